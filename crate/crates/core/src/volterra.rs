//! Product-integration solver for the modal surface equation
//! `U_n(x*) = ∫_{X₁}^{x*} K_n(x*, x) U_n(x) dx + 2U^in_n(x*)`.
//!
//! `U` is interpolated by hat functions on the axial grid and each weight
//! `W_jm = ∫ K_n(x_j, x) φ_m(x) dx` is integrated accurately. Panels close
//! to the diagonal are integrated along contours lifted into the upper half
//! `x`-plane, where the part of the kernel that oscillates like
//! `exp{(ik/2)(f*+f)²/Δ}` decays. The panel that ends on the diagonal
//! reaches `x*` through the substitution `Δ = c t²`, which absorbs the
//! `Δ^{-1/2}` behaviour of the remaining part. No absorption is required;
//! `Im k > 0` is accepted and used for the extrapolation pass.

use crate::error::{domain, Error, Result};
use crate::geometry::{Profile, WaveParams};
use crate::kernels::{KernelEvaluator, VolterraKernel};
use crate::numerics::bessel::j_int;
use crate::numerics::quadrature::{extrapolate_to_zero, integrate_path, periodic_trapezoid, Adaptive, Estimate, GaussLegendre, Tolerance};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Strictly increasing axial nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AxialGrid {
    nodes: Vec<f64>,
}

impl AxialGrid {
    pub fn new(nodes: Vec<f64>) -> Result<Self> {
        if nodes.is_empty() {
            return domain("axial grid needs at least one node");
        }
        if nodes.iter().any(|x| !x.is_finite()) || nodes.windows(2).any(|w| w[1] <= w[0]) {
            return domain("axial grid nodes must be finite and strictly increasing");
        }
        Ok(Self { nodes })
    }

    /// `intervals + 1` equally spaced nodes on `[x0, x1]`.
    pub fn uniform(x0: f64, x1: f64, intervals: usize) -> Result<Self> {
        if intervals == 0 || !(x1 > x0) {
            return domain(format!("uniform grid on [{x0}, {x1}] with {intervals} intervals"));
        }
        let h = (x1 - x0) / intervals as f64;
        let mut nodes: Vec<f64> = (0..=intervals).map(|i| x0 + h * i as f64).collect();
        nodes[intervals] = x1;
        Self::new(nodes)
    }

    /// Nodes uniform in `y = Re k·α²·x` on `[y0, y1]`.
    pub fn uniform_in_y(wp: &WaveParams, alpha: f64, y0: f64, y1: f64, intervals: usize) -> Result<Self> {
        let xc = diffraction_length(wp, alpha);
        if intervals == 0 || !(y1 > y0) {
            return domain(format!("uniform y-grid on [{y0}, {y1}] with {intervals} intervals"));
        }
        let h = (y1 - y0) / intervals as f64;
        Self::new((0..=intervals).map(|i| (y0 + h * i as f64) * xc).collect())
    }

    pub fn nodes(&self) -> &[f64] {
        &self.nodes
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.nodes.is_empty()
    }

    pub fn max_spacing(&self) -> f64 {
        self.nodes.windows(2).map(|w| w[1] - w[0]).fold(0.0, f64::max)
    }

    /// Every other node (the coarse partner of a two-grid check).
    pub fn coarsened(&self) -> Option<Self> {
        if self.nodes.len() < 3 || self.nodes.len().is_multiple_of(2) {
            return None;
        }
        Some(Self {
            nodes: self.nodes.iter().step_by(2).copied().collect(),
        })
    }
}

/// `x_c = 1/(Re k α²)`, the length over which `y = kα²x` changes by one.
pub fn diffraction_length(wp: &WaveParams, alpha: f64) -> f64 {
    1.0 / (wp.k.re * alpha * alpha)
}

/// Total surface field `U_n` at the grid nodes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModalSurfaceField {
    pub mode: i32,
    pub grid: AxialGrid,
    pub values: Vec<C64>,
}

impl ModalSurfaceField {
    pub fn zeros(mode: i32, grid: AxialGrid) -> Self {
        let values = vec![C64::new(0.0, 0.0); grid.len()];
        Self { mode, grid, values }
    }

    /// Piecewise-linear interpolant (the representation the solver assumes).
    pub fn interpolate(&self, x: f64) -> C64 {
        let nodes = self.grid.nodes();
        if x <= nodes[0] {
            return self.values[0];
        }
        let j = nodes.partition_point(|&v| v <= x);
        if j >= nodes.len() {
            return self.values[nodes.len() - 1];
        }
        let t = (x - nodes[j - 1]) / (nodes[j] - nodes[j - 1]);
        self.values[j - 1] * (1.0 - t) + self.values[j] * t
    }

    /// `U^sc = U − U^in` at the nodes.
    pub fn scattered(&self, wp: &WaveParams, profile: &Profile) -> Vec<C64> {
        self.grid
            .nodes()
            .iter()
            .zip(&self.values)
            .map(|(&x, &u)| u - incident_modal(wp, profile, self.mode, x))
            .collect()
    }
}

/// Terms of the iteration series and their relative sizes.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IterationTrace {
    /// `U^(0) = rhs`, `U^(m+1) = 𝒦 U^(m)`.
    pub terms: Vec<Vec<C64>>,
    /// `max|U^(m)| / max|Σ_{i<=m} U^(i)|`.
    pub residual_norms: Vec<f64>,
}

impl IterationTrace {
    /// `Σ_{m < count} U^(m)`.
    pub fn partial_sum(&self, count: usize) -> Vec<C64> {
        let n = self.terms.first().map_or(0, |t| t.len());
        let mut s = vec![C64::new(0.0, 0.0); n];
        for t in self.terms.iter().take(count) {
            s.iter_mut().zip(t).for_each(|(a, b)| *a += b);
        }
        s
    }
}

/// `U^in_n(x) = i^n J_n(kθf) e^{−ikxθ²/2}`.
pub fn incident_modal(wp: &WaveParams, profile: &Profile, n: i32, x: f64) -> C64 {
    let j = if wp.theta == 0.0 {
        if n == 0 {
            C64::new(1.0, 0.0)
        } else {
            C64::new(0.0, 0.0)
        }
    } else {
        j_int(n, wp.k * wp.theta * profile.f(x))
    };
    I.powi(n) * j * (-0.5 * I * wp.k * x * wp.theta * wp.theta).exp()
}

/// `(1/2π)∫ exp{ik(θf cos φ − xθ²/2)} e^{−inφ} dφ` by adaptive trapezoid.
pub fn incident_modal_reference(wp: &WaveParams, profile: &Profile, n: i32, x: f64) -> Result<Estimate> {
    let (k, th, f) = (wp.k, wp.theta, profile.f(x));
    let g = |phi: f64| (I * k * (th * f * phi.cos() - 0.5 * x * th * th) - I * (n as f64) * phi).exp() / (2.0 * std::f64::consts::PI);
    periodic_trapezoid(g, 1e-14, 1e-16, 16 + (k.norm() * th * f) as usize, 1 << 20)
}

/// Right-hand side `2U^in_n` on the grid.
pub fn incident_rhs(wp: &WaveParams, profile: &Profile, n: i32, grid: &AxialGrid) -> Vec<C64> {
    grid.nodes().iter().map(|&x| 2.0 * incident_modal(wp, profile, n, x)).collect()
}

/// Mode cutoff `n_max = ceil(3 + 2kθ·max f)`.
pub fn mode_cutoff(wp: &WaveParams, profile: &Profile, x_max: f64) -> i32 {
    let fmax = if profile.is_compact() { profile.max_radius() } else { profile.f(x_max) };
    (3.0 + 2.0 * wp.k.re * wp.theta * fmax).ceil() as i32
}

/// Controls of the panel integration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WeightOptions {
    /// Relative tolerance of the adaptive panel integrals.
    pub relative_tolerance: f64,
    /// Gauss–Legendre points on panels integrated along the real axis.
    pub far_points: usize,
    /// Panels closer than this many widths to `x*` are lifted off the axis.
    pub near_panels: f64,
    /// Largest kernel phase change per panel handled on the real axis.
    pub max_phase_per_panel: f64,
    /// Height of the lifted contour in panel widths.
    pub lift: f64,
    pub max_subdivisions: usize,
}

impl Default for WeightOptions {
    fn default() -> Self {
        Self {
            relative_tolerance: 1e-8,
            far_points: 8,
            near_panels: 2.0,
            max_phase_per_panel: 1.5,
            lift: 0.5,
            max_subdivisions: 300,
        }
    }
}

/// Quadrature bookkeeping of an assembly.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct WeightStats {
    pub near_panels: usize,
    pub far_panels: usize,
    pub unconverged_panels: usize,
    /// Largest error estimate of a single panel integral.
    pub max_panel_error: f64,
}

impl WeightStats {
    fn merge(self, o: Self) -> Self {
        Self {
            near_panels: self.near_panels + o.near_panels,
            far_panels: self.far_panels + o.far_panels,
            unconverged_panels: self.unconverged_panels + o.unconverged_panels,
            max_panel_error: self.max_panel_error.max(o.max_panel_error),
        }
    }
}

/// Hat-function moments `(∫Kφ_left, ∫Kφ_right)` of one panel.
pub(crate) struct PanelMoments {
    pub left: C64,
    pub right: C64,
    pub error: f64,
    pub converged: bool,
}

/// Moments of `kernel(Δ)` against the hats of panel `[a, b]`, integrated
/// over `[a, upper]` (`upper <= b`), for the target plane `x_star >= upper`.
///
/// `rate(Δ)` bounds the kernel phase derivative at real separation `Δ`.
pub(crate) fn panel_moments<K, R>(kernel: &K, rate: &R, analytic: bool, x_star: f64, a: f64, b: f64, upper: f64, opts: &WeightOptions) -> PanelMoments
where
    K: Fn(C64) -> C64,
    R: Fn(f64) -> f64,
{
    let h = b - a;
    let len = upper - a;
    let dmin = x_star - upper;
    let probe = dmin.max(1e-3 * h);
    let near = dmin < opts.near_panels * h || rate(probe) * len > opts.max_phase_per_panel;
    let hats = move |x: C64| -> [C64; 2] {
        let t = (x - a) / h;
        [1.0 - t, t]
    };
    if !near || !analytic {
        if !near {
            let gl = GaussLegendre::cached(opts.far_points);
            let v: [C64; 2] = gl.integrate(
                |x| {
                    let k = kernel(C64::new(x_star, 0.0) - x);
                    let [l, r] = hats(x);
                    [k * l, k * r]
                },
                C64::new(a, 0.0),
                C64::new(upper, 0.0),
            );
            return PanelMoments {
                left: v[0],
                right: v[1],
                error: 0.0,
                converged: true,
            };
        }
        let tol = Tolerance::new(opts.relative_tolerance, 1e-300, opts.max_subdivisions);
        let mut f = |x: C64| {
            let k = kernel(C64::new(x_star, 0.0) - x);
            let [l, r] = hats(x);
            [k * l, k * r]
        };
        let r: Adaptive<[C64; 2]> = integrate_path(&mut f, &[C64::new(a, 0.0), C64::new(upper, 0.0)], tol);
        return PanelMoments {
            left: r.value[0],
            right: r.value[1],
            error: r.error,
            converged: r.converged,
        };
    }
    let lift = C64::new(0.0, opts.lift * len);
    let pa = C64::new(a, 0.0);
    let tol = Tolerance::new(opts.relative_tolerance, 1e-300, opts.max_subdivisions);
    let r: Adaptive<[C64; 2]> = if upper >= x_star {
        // s ∈ [0,1]: a → a + iH; s ∈ [1,2]: Δ = c(2−s)², reaching x* at s = 2.
        let c = C64::new(x_star, 0.0) - (pa + lift);
        let mut f = |s: C64| -> [C64; 2] {
            let s = s.re;
            let (delta, x, dx) = if s <= 1.0 {
                let x = pa + lift * s;
                (C64::new(x_star, 0.0) - x, x, lift)
            } else {
                let t = 2.0 - s;
                let delta = c * t * t;
                (delta, C64::new(x_star, 0.0) - delta, 2.0 * c * t)
            };
            let k = kernel(delta) * dx;
            let [l, r] = hats(x);
            [k * l, k * r]
        };
        let mut pts: Vec<C64> = leg_fractions(rate(x_star - a) * lift.im).into_iter().map(|s| C64::new(s, 0.0)).collect();
        pts.push(C64::new(2.0, 0.0));
        integrate_path(&mut f, &pts, tol)
    } else {
        let pb = C64::new(upper, 0.0);
        let mut f = |x: C64| -> [C64; 2] {
            let k = kernel(C64::new(x_star, 0.0) - x);
            let [l, r] = hats(x);
            [k * l, k * r]
        };
        let mut pts: Vec<C64> = leg_fractions(rate(x_star - a) * lift.im).into_iter().map(|s| pa + lift * s).collect();
        pts.extend(leg_fractions(rate(x_star - upper) * lift.im).into_iter().rev().map(|s| pb + lift * s));
        integrate_path(&mut f, &pts, tol)
    };
    PanelMoments {
        left: r.value[0],
        right: r.value[1],
        error: r.error,
        converged: r.converged,
    }
}

/// Breakpoints `0 < … < 1` on a vertical leg leaving the real axis.
///
/// The fast term of the kernel decays like `exp(−rate·σ·H)` along the leg,
/// so the first break sits at one decay length and the rest grow by 4.
fn leg_fractions(rate_times_lift: f64) -> Vec<f64> {
    let mut pts = vec![0.0];
    let mut s = 1.0 / rate_times_lift.max(1.0);
    while s < 0.25 {
        pts.push(s);
        s *= 4.0;
    }
    pts.push(1.0);
    pts
}

fn adaptive_pair<F: FnMut(C64) -> [C64; 2]>(mut f: F, pts: &[C64], opts: &WeightOptions, st: &mut WeightStats) -> [C64; 2] {
    let tol = Tolerance::new(opts.relative_tolerance, 1e-300, opts.max_subdivisions);
    let r: Adaptive<[C64; 2]> = integrate_path(&mut f, pts, tol);
    if !r.converged {
        st.unconverged_panels += 1;
    }
    st.max_panel_error = st.max_panel_error.max(r.error);
    r.value
}

/// Gauss–Legendre order for a real-axis panel with phase change `phase`
/// whose near end lies `gap` panel widths from `x*`.
fn far_order(max_points: usize, phase: f64, gap: f64) -> usize {
    let n = if gap >= 8.0 && phase <= 0.5 {
        4
    } else if gap >= 4.0 && phase <= 1.0 {
        6
    } else {
        max_points
    };
    n.min(max_points)
}

/// Row `j` of the product-integration weights.
///
/// Panels left of the first near panel are integrated on the real axis.
/// From the node `x_q` where the near region starts, the contour rises to
/// `Im x = H`, runs parallel to the axis and drops onto `x*` through
/// `Δ = c t²`. The hats are continuous, so at interior nodes the down leg of
/// one panel and the up leg of the next reduce to the single moment
/// `M = ∫₀^H K(x_m + iσ) σ dσ`.
fn row_weights<K: VolterraKernel>(kernel: &K, nodes: &[f64], j: usize, opts: &WeightOptions) -> (Vec<C64>, WeightStats) {
    let xs = nodes[j];
    let mut row = vec![C64::new(0.0, 0.0); j + 1];
    let mut st = WeightStats::default();
    if j == 0 {
        return (row, st);
    }
    let kf = |d: C64| kernel.eval(xs, d);
    let rate = |d: f64| kernel.phase_rate(xs, d);
    let is_near = |m: usize| {
        let h = nodes[m + 1] - nodes[m];
        let dmin = xs - nodes[m + 1];
        dmin < opts.near_panels * h || rate(dmin.max(1e-3 * h)) * h > opts.max_phase_per_panel
    };
    let q = (0..j).find(|&m| is_near(m)).unwrap_or(j);
    st.far_panels = q;
    st.near_panels = j - q;
    if !kernel.analytic() {
        for m in 0..j {
            let pm = panel_moments(&kf, &rate, false, xs, nodes[m], nodes[m + 1], nodes[m + 1], opts);
            row[m] += pm.left;
            row[m + 1] += pm.right;
            if !pm.converged {
                st.unconverged_panels += 1;
            }
            st.max_panel_error = st.max_panel_error.max(pm.error);
        }
        return (row, st);
    }
    for m in 0..q {
        let (a, b) = (nodes[m], nodes[m + 1]);
        let h = b - a;
        let gl = GaussLegendre::cached(far_order(opts.far_points, rate(xs - b) * h, (xs - b) / h));
        let v: [C64; 2] = gl.integrate(
            |x| {
                let k = kf(xs - x);
                let t = (x - a) / h;
                [k * (1.0 - t), k * t]
            },
            C64::new(a, 0.0),
            C64::new(b, 0.0),
        );
        row[m] += v[0];
        row[m + 1] += v[1];
    }
    let lift = opts.lift * (nodes[j] - nodes[j - 1]);
    let hi = C64::new(0.0, lift);
    // Up leg at x_q.
    {
        let (a, hr) = (nodes[q], nodes[q + 1] - nodes[q]);
        let pts: Vec<C64> = leg_fractions(rate(xs - a) * lift).into_iter().map(|s| C64::new(s * lift, 0.0)).collect();
        let v = adaptive_pair(
            |sig: C64| {
                let k = kf(C64::new(xs - a, -sig.re)) * I;
                let t = I * sig.re / hr;
                [k * (1.0 - t), k * t]
            },
            &pts,
            opts,
            &mut st,
        );
        row[q] += v[0];
        row[q + 1] += v[1];
    }
    // Shared legs at interior nodes of the near region.
    for m in q + 1..j {
        let x = nodes[m];
        let (hl, hr) = (x - nodes[m - 1], nodes[m + 1] - x);
        let pts: Vec<C64> = leg_fractions(rate(xs - x) * lift).into_iter().map(|s| C64::new(s * lift, 0.0)).collect();
        let v = adaptive_pair(|sig: C64| [kf(C64::new(xs - x, -sig.re)) * sig.re, C64::new(0.0, 0.0)], &pts, opts, &mut st);
        let mom = v[0];
        row[m - 1] -= mom / hl;
        row[m] += mom / hl + mom / hr;
        row[m + 1] -= mom / hr;
    }
    // Top legs.
    for m in q..j - 1 {
        let (a, b) = (nodes[m], nodes[m + 1]);
        let h = b - a;
        let v = adaptive_pair(
            |x: C64| {
                let k = kf(xs - x);
                let t = (x - a) / h;
                [k * (1.0 - t), k * t]
            },
            &[a + hi, b + hi],
            opts,
            &mut st,
        );
        row[m] += v[0];
        row[m + 1] += v[1];
    }
    // Drop onto the diagonal: Δ = c t², t from 1 to 0.
    {
        let a = nodes[j - 1];
        let h = xs - a;
        let c = C64::new(h, -lift);
        let v = adaptive_pair(
            |t: C64| {
                let t = t.re;
                let delta = c * t * t;
                let k = kf(delta) * 2.0 * c * t;
                let u = (h - delta) / h;
                [k * (1.0 - u), k * u]
            },
            &[C64::new(0.0, 0.0), C64::new(1.0, 0.0)],
            opts,
            &mut st,
        );
        row[j - 1] += v[0];
        row[j] += v[1];
    }
    (row, st)
}

/// Lower-triangular product-integration weights of a Volterra operator.
#[derive(Debug, Clone)]
pub struct VolterraSystem {
    grid: AxialGrid,
    /// Row `j` holds `W_{j,0..=j}`.
    rows: Vec<Vec<C64>>,
    pub stats: WeightStats,
}

impl VolterraSystem {
    /// Weights of `∫_{x_0}^{x_j} K(x_j, x) U(x) dx ≈ Σ_m W_jm U_m`.
    pub fn assemble<K: VolterraKernel>(kernel: &K, grid: &AxialGrid, opts: &WeightOptions) -> Result<Self> {
        let nodes = grid.nodes();
        let results: Vec<(Vec<C64>, WeightStats)> = (0..nodes.len())
            .into_par_iter()
            .map(|j| row_weights(kernel, nodes, j, opts))
            .collect();
        let mut stats = WeightStats::default();
        let mut rows = Vec::with_capacity(results.len());
        for (j, (row, st)) in results.into_iter().enumerate() {
            if row.iter().any(|w| !w.is_finite()) {
                return Err(Error::Numeric(format!("non-finite quadrature weight in row {j} (x* = {})", nodes[j])));
            }
            stats = stats.merge(st);
            rows.push(row);
        }
        Ok(Self {
            grid: grid.clone(),
            rows,
            stats,
        })
    }

    pub fn grid(&self) -> &AxialGrid {
        &self.grid
    }

    /// `W_jm` for `m <= j`.
    pub fn weight(&self, j: usize, m: usize) -> C64 {
        self.rows[j][m]
    }

    /// Forward substitution `U_j = (rhs_j + Σ_{m<j} W_jm U_m)/(1 − W_jj)`.
    pub fn march(&self, rhs: &[C64]) -> Result<Vec<C64>> {
        self.check_len(rhs)?;
        let mut u = Vec::with_capacity(rhs.len());
        for (j, row) in self.rows.iter().enumerate() {
            let mut acc = rhs[j];
            for m in 0..j {
                acc += row[m] * u[m];
            }
            let denom = 1.0 - row[j];
            if denom.norm() < 1e-12 {
                return Err(Error::Singular(format!("1 − W_jj vanishes at node {j}")));
            }
            u.push(acc / denom);
        }
        Ok(u)
    }

    /// `(𝒦u)_j = Σ_{m<=j} W_jm u_m`.
    pub fn apply(&self, u: &[C64]) -> Vec<C64> {
        self.rows.iter().map(|row| row.iter().zip(u).map(|(w, v)| w * v).sum()).collect()
    }

    /// Iteration series `Σ_m 𝒦^m rhs`, stopped at `max_terms` terms or when
    /// the newest term is below `tolerance` relative to the sum.
    pub fn neumann(&self, rhs: &[C64], max_terms: usize, tolerance: f64) -> Result<(Vec<C64>, IterationTrace)> {
        self.check_len(rhs)?;
        if max_terms == 0 {
            return domain("iteration series needs at least one term");
        }
        let sup = |v: &[C64]| v.iter().map(|z| z.norm()).fold(0.0, f64::max);
        let mut sum = rhs.to_vec();
        let mut term = rhs.to_vec();
        let mut trace = IterationTrace {
            terms: vec![term.clone()],
            residual_norms: vec![if sup(&sum) > 0.0 { 1.0 } else { 0.0 }],
        };
        let mut growth = 0;
        let mut last_norm = sup(&term);
        while trace.terms.len() < max_terms {
            if *trace.residual_norms.last().unwrap() < tolerance {
                break;
            }
            term = self.apply(&term);
            sum.iter_mut().zip(&term).for_each(|(s, t)| *s += t);
            let tn = sup(&term);
            let total = sup(&sum);
            trace.terms.push(term.clone());
            trace.residual_norms.push(if total > 0.0 { tn / total } else { 0.0 });
            growth = if tn > last_norm { growth + 1 } else { 0 };
            last_norm = tn;
            if growth >= 3 || !tn.is_finite() {
                let k = trace.residual_norms.len();
                return Err(Error::Divergence {
                    terms: k,
                    last_norms: trace.residual_norms[k.saturating_sub(4)..].to_vec(),
                });
            }
        }
        Ok((sum, trace))
    }

    fn check_len(&self, rhs: &[C64]) -> Result<()> {
        if rhs.len() != self.rows.len() {
            return domain(format!("rhs has {} entries for {} nodes", rhs.len(), self.rows.len()));
        }
        Ok(())
    }
}

/// Options for [`solve_marching_with`].
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SolveOptions {
    pub weights: WeightOptions,
    /// Re-solve on every other node and report the difference.
    pub two_grid_check: bool,
    /// Relative two-grid estimate above which a warning is attached.
    pub warn_above: f64,
}

impl Default for SolveOptions {
    fn default() -> Self {
        Self {
            weights: WeightOptions::default(),
            two_grid_check: false,
            warn_above: 1e-2,
        }
    }
}

/// Diagnostics of a solve.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub stats: WeightStats,
    /// `max|U_h − U_2h| / (3 max|U_h|)` on the shared nodes.
    pub two_grid_error: Option<f64>,
    pub warnings: Vec<String>,
}

/// Marching solution with default options.
pub fn solve_marching<K: VolterraKernel>(kernel: &K, rhs: &[C64], grid: &AxialGrid, mode: i32) -> Result<(ModalSurfaceField, SolveReport)> {
    solve_marching_with(kernel, rhs, grid, mode, &SolveOptions::default())
}

pub fn solve_marching_with<K: VolterraKernel>(kernel: &K, rhs: &[C64], grid: &AxialGrid, mode: i32, opts: &SolveOptions) -> Result<(ModalSurfaceField, SolveReport)> {
    let sys = VolterraSystem::assemble(kernel, grid, &opts.weights)?;
    let values = sys.march(rhs)?;
    let mut report = SolveReport {
        stats: sys.stats,
        ..SolveReport::default()
    };
    if sys.stats.unconverged_panels > 0 {
        report.warnings.push(format!(
            "{} panel integrals stopped at the subdivision limit (max error {:e})",
            sys.stats.unconverged_panels, sys.stats.max_panel_error
        ));
    }
    if opts.two_grid_check {
        if let Some(coarse) = grid.coarsened() {
            let crhs: Vec<C64> = rhs.iter().step_by(2).copied().collect();
            let cu = VolterraSystem::assemble(kernel, &coarse, &opts.weights)?.march(&crhs)?;
            let diff = values.iter().step_by(2).zip(&cu).map(|(a, b)| (a - b).norm()).fold(0.0, f64::max);
            let scale = values.iter().map(|v| v.norm()).fold(0.0, f64::max).max(1e-300);
            let est = diff / (3.0 * scale);
            if est > opts.warn_above {
                report.warnings.push(format!("grid too coarse: two-grid error estimate {est:.3e}"));
            }
            report.two_grid_error = Some(est);
        } else {
            report.warnings.push("two-grid check needs an odd node count".into());
        }
    }
    Ok((
        ModalSurfaceField {
            mode,
            grid: grid.clone(),
            values,
        },
        report,
    ))
}

/// Iteration-series solution.
pub fn solve_neumann<K: VolterraKernel>(kernel: &K, rhs: &[C64], grid: &AxialGrid, mode: i32, max_terms: usize) -> Result<(ModalSurfaceField, IterationTrace)> {
    let sys = VolterraSystem::assemble(kernel, grid, &WeightOptions::default())?;
    let (values, trace) = sys.neumann(rhs, max_terms, 1e-6)?;
    Ok((
        ModalSurfaceField {
            mode,
            grid: grid.clone(),
            values,
        },
        trace,
    ))
}

/// Sample resolution check: nodes per period of `exp{ik ḟ² x/2}`.
pub fn resolution_warning(profile: &Profile, wp: &WaveParams, grid: &AxialGrid) -> Option<String> {
    let s = profile.max_slope();
    let period = 4.0 * std::f64::consts::PI / (wp.k.re * s * s).max(1e-300);
    let per = period / grid.max_spacing();
    (per < 8.0).then(|| format!("only {per:.1} nodes per period of exp(ik f'^2 x/2); at least 8 recommended"))
}

/// Relative absorptions of the extrapolation pass.
pub const DEFAULT_ETAS: [f64; 3] = [4e-3, 2e-3, 1e-3];

/// Solve mode `n` of `profile` at each `η` and extrapolate the node values to `η = 0`.
pub fn solve_eta_extrapolated(profile: &Profile, wp: &WaveParams, n: i32, grid: &AxialGrid, etas: &[f64], opts: &SolveOptions) -> Result<(ModalSurfaceField, Vec<ModalSurfaceField>)> {
    if etas.is_empty() {
        return domain("no absorption values given");
    }
    let runs: Vec<ModalSurfaceField> = etas
        .iter()
        .map(|&eta| {
            let w = wp.at_eta(eta);
            let ke = KernelEvaluator::modal(*profile, w, n);
            let rhs = incident_rhs(&w, profile, n, grid);
            solve_marching_with(&ke, &rhs, grid, n, opts).map(|r| r.0)
        })
        .collect::<Result<_>>()?;
    let values = (0..grid.len())
        .map(|j| {
            let ys: Vec<C64> = runs.iter().map(|r| r.values[j]).collect();
            extrapolate_to_zero(etas, &ys)
        })
        .collect();
    Ok((
        ModalSurfaceField {
            mode: n,
            grid: grid.clone(),
            values,
        },
        runs,
    ))
}

/// Modes needed for incidence angle `θ`: `0` alone for axial incidence,
/// otherwise `−n_max..=n_max` with the default cutoff.
pub fn required_modes(wp: &WaveParams, profile: &Profile, grid: &AxialGrid) -> Vec<i32> {
    if wp.theta == 0.0 {
        return vec![0];
    }
    let x_max = *grid.nodes().last().unwrap_or(&0.0);
    let n = mode_cutoff(wp, profile, x_max);
    (-n..=n).collect()
}

/// Surface fields of every mode in `modes` by marching, at `wp` or
/// extrapolated to `η = 0` from `etas`. `U_{−n} = U_n` is used to skip
/// negative modes.
pub fn solve_mode_set(profile: &Profile, wp: &WaveParams, grid: &AxialGrid, modes: &[i32], etas: Option<&[f64]>, opts: &SolveOptions) -> Result<Vec<ModalSurfaceField>> {
    let mut distinct: Vec<i32> = modes.iter().map(|n| n.abs()).collect();
    distinct.sort_unstable();
    distinct.dedup();
    let solved: Vec<ModalSurfaceField> = distinct
        .iter()
        .map(|&n| match etas {
            Some(e) => solve_eta_extrapolated(profile, wp, n, grid, e, opts).map(|r| r.0),
            None => {
                let ke = KernelEvaluator::modal(*profile, *wp, n);
                solve_marching_with(&ke, &incident_rhs(wp, profile, n, grid), grid, n, opts).map(|r| r.0)
            }
        })
        .collect::<Result<_>>()?;
    Ok(modes
        .iter()
        .map(|&n| {
            let i = distinct.binary_search(&n.abs()).unwrap();
            ModalSurfaceField {
                mode: n,
                ..solved[i].clone()
            }
        })
        .collect())
}
