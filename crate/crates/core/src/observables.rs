//! Fields off the surface: reconstruction at a point, far-field directivity
//! and the optical-theorem balance on a transverse plane.
//!
//! Everything is a linear functional of the modal surface fields `U_n`,
//! taken in their piecewise-linear (hat) representation.

use crate::error::{domain, Error, Result};
use crate::geometry::{Profile, WaveParams};
use crate::kernels::{minus_i_pow, modal_source_kernel, SpacePoint};
use crate::numerics::bessel::j_triple;
use crate::numerics::quadrature::{periodic_trapezoid, GaussLegendre};
use crate::volterra::{panel_moments, ModalSurfaceField, WeightOptions};
use num_complex::Complex64 as C64;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Largest phase change handled by one Gauss–Legendre subpanel.
const SUBPANEL_PHASE: f64 = 8.0;
const SUBPANEL_POINTS: usize = 10;

/// Incident plane wave `exp{ik(θ r cos φ − xθ²/2)}`.
pub fn incident_field(wp: &WaveParams, p: &SpacePoint) -> C64 {
    let th = wp.theta;
    (I * wp.k * (th * p.r * p.phi.cos() - 0.5 * p.x * th * th)).exp()
}

/// Mode-`n` kernel carrying the surface field to a ring of radius `r_star`
/// on the plane `x_star`: half the surface kernel with `f(x*)` replaced by `r*`.
struct RingKernel<'a> {
    profile: &'a Profile,
    k: C64,
    n: i32,
    x_star: f64,
    r_star: f64,
    /// `r* − f(x*)` with `f` continued as a polynomial.
    gap: f64,
}

impl<'a> RingKernel<'a> {
    fn new(profile: &'a Profile, k: C64, n: i32, x_star: f64, r_star: f64) -> Self {
        let gap = r_star - profile.f_c(C64::new(x_star, 0.0)).re;
        Self {
            profile,
            k,
            n,
            x_star,
            r_star,
            gap,
        }
    }

    fn eval(&self, delta: C64) -> C64 {
        let x = C64::new(self.x_star, 0.0) - delta;
        let f = self.profile.f_c(x);
        let fd = self.profile.f_dot_c(x);
        let rem = self.gap + self.profile.taylor_remainder(x, delta);
        0.5 * modal_source_kernel(self.k, self.n, self.r_star, f, fd, delta, rem)
    }

    fn rate(&self, delta: f64) -> f64 {
        let x = self.x_star - delta;
        let s = self.r_star + self.profile.f(x).abs();
        self.k.norm() * (0.5 * s * s / (delta * delta) + s * self.profile.f_dot(x).abs() / delta)
    }
}

/// `∫ R_n(x*, r*; x) U_n(x) dx` over the part of the grid below `x*`.
fn ring_integral(kernel: &RingKernel, field: &ModalSurfaceField, opts: &WeightOptions) -> Result<C64> {
    let nodes = field.grid.nodes();
    let xs = kernel.x_star;
    let kf = |d: C64| kernel.eval(d);
    let rate = |d: f64| kernel.rate(d);
    let mut acc = C64::new(0.0, 0.0);
    for m in 0..nodes.len() - 1 {
        let (a, b) = (nodes[m], nodes[m + 1]);
        if a >= xs {
            break;
        }
        let upper = b.min(xs);
        let h = b - a;
        let (ul, ur) = (field.values[m], field.values[m + 1]);
        if xs - upper >= opts.near_panels * h {
            // Smooth on the axis: split by phase and use Gauss–Legendre.
            let phase = rate(xs - upper).max(rate(xs - a)) * (upper - a);
            let pieces = (phase / SUBPANEL_PHASE).ceil().max(1.0) as usize;
            let gl = GaussLegendre::cached(SUBPANEL_POINTS);
            let w = (upper - a) / pieces as f64;
            for s in 0..pieces {
                let lo = a + s as f64 * w;
                acc += gl.integrate(
                    |x| {
                        let t = (x.re - a) / h;
                        kf(C64::new(xs, 0.0) - x) * (ul * (1.0 - t) + ur * t)
                    },
                    C64::new(lo, 0.0),
                    C64::new(lo + w, 0.0),
                );
            }
        } else {
            let pm = panel_moments(&kf, &rate, true, xs, a, b, upper, opts);
            if !pm.converged {
                return Err(Error::Accuracy {
                    value: pm.left * ul + pm.right * ur,
                    error: pm.error,
                    target: opts.relative_tolerance,
                    context: format!("reconstruction panel [{a}, {upper}] for x* = {xs}"),
                });
            }
            acc += pm.left * ul + pm.right * ur;
        }
    }
    Ok(acc)
}

fn check_target(profile: &Profile, target: &SpacePoint) -> Result<()> {
    if !(target.x > profile.x_start()) {
        return domain(format!("target x = {} not beyond the body start {}", target.x, profile.x_start()));
    }
    if profile.contains(target.x) && !(target.r > profile.f(target.x)) {
        return domain(format!("target r = {} inside the body (f = {})", target.r, profile.f(target.x)));
    }
    Ok(())
}

/// Modal components `u_n(x*, r*)` of the scattered field, one per field.
pub fn reconstruct_modes(fields: &[ModalSurfaceField], profile: &Profile, wp: &WaveParams, x: f64, r: f64) -> Result<Vec<C64>> {
    check_target(profile, &SpacePoint { x, r, phi: 0.0 })?;
    let opts = WeightOptions::default();
    fields
        .par_iter()
        .map(|fld| ring_integral(&RingKernel::new(profile, wp.k, fld.mode, x, r), fld, &opts))
        .collect()
}

/// Scattered field `u^sc(target) = Σ_n e^{inφ} ∫ R_n U_n dx`.
pub fn reconstruct_point(fields: &[ModalSurfaceField], profile: &Profile, wp: &WaveParams, target: &SpacePoint) -> Result<C64> {
    let modes = reconstruct_modes(fields, profile, wp, target.x, target.r)?;
    Ok(fields
        .iter()
        .zip(modes)
        .map(|(fld, u)| u * (I * fld.mode as f64 * target.phi).exp())
        .sum())
}

/// Total field `u^in + u^sc` at `target`.
pub fn reconstruct_total(fields: &[ModalSurfaceField], profile: &Profile, wp: &WaveParams, target: &SpacePoint) -> Result<C64> {
    Ok(incident_field(wp, target) + reconstruct_point(fields, profile, wp, target)?)
}

/// Far-field amplitude `T(θ*, φ*)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Directivity {
    pub theta_star: f64,
    pub phi_star: f64,
    pub value: C64,
}

/// Both evaluations of `T` and their difference.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DirectivityCheck {
    pub series: C64,
    pub quadrature: C64,
    pub relative_difference: f64,
}

/// Relative disagreement between the two routes that raises an error.
pub const DIRECTIVITY_TOLERANCE: f64 = 1e-4;

fn require_compact(profile: &Profile) -> Result<()> {
    if !profile.is_compact() {
        return domain("directivity needs a compact scatterer");
    }
    Ok(())
}

/// Integral over every grid panel of `g(x)·U(x)` with `U` the hat interpolant,
/// split so that each piece sees a phase change of at most `SUBPANEL_PHASE`.
fn axial_sum<G: Fn(f64) -> C64>(field: &ModalSurfaceField, rate: f64, g: G) -> C64 {
    let nodes = field.grid.nodes();
    let gl = GaussLegendre::cached(SUBPANEL_POINTS);
    let mut acc = C64::new(0.0, 0.0);
    for m in 0..nodes.len() - 1 {
        let (a, b) = (nodes[m], nodes[m + 1]);
        let h = b - a;
        let (ul, ur) = (field.values[m], field.values[m + 1]);
        let pieces = (rate * h / SUBPANEL_PHASE).ceil().max(1.0) as usize;
        let w = h / pieces as f64;
        for s in 0..pieces {
            let lo = a + s as f64 * w;
            acc += gl.integrate(
                |x| {
                    let t = (x.re - a) / h;
                    g(x.re) * (ul * (1.0 - t) + ur * t)
                },
                C64::new(lo, 0.0),
                C64::new(lo + w, 0.0),
            );
        }
    }
    acc
}

/// Phase rate in `x` of the directivity integrand.
fn directivity_rate(profile: &Profile, wp: &WaveParams, theta_star: f64) -> f64 {
    wp.k.norm() * theta_star * (profile.max_slope() + 0.5 * theta_star) + 1.0
}

/// Modal series `T = π Σ_n (−i)^n e^{inφ*} ∫ [iθ* J_n'(b) − ḟ J_n(b)] e^{ikxθ*²/2} U_n f dx`,
/// `b = kθ*f`.
pub fn directivity_series(fields: &[ModalSurfaceField], profile: &Profile, wp: &WaveParams, theta_star: f64, phi_star: f64) -> Result<C64> {
    require_compact(profile)?;
    let k = wp.k;
    let rate = directivity_rate(profile, wp, theta_star);
    let terms: Vec<C64> = fields
        .par_iter()
        .map(|fld| {
            let n = fld.mode;
            let integral = axial_sum(fld, rate, |x| {
                let f = profile.f(x);
                let [jm, j, jp] = j_triple(n, k * theta_star * f);
                let jd = 0.5 * (jm - jp);
                (I * theta_star * jd - profile.f_dot(x) * j) * (0.5 * I * k * x * theta_star * theta_star).exp() * f
            });
            PI * minus_i_pow(n) * (I * n as f64 * phi_star).exp() * integral
        })
        .collect();
    Ok(terms.into_iter().sum())
}

/// Direct quadrature of
/// `T = ½ ∫∫ (θ* cos(φ−φ*) − ḟ) exp{ik(−θ* f cos(φ−φ*) + xθ*²/2)} U(x, φ) f dx dφ`
/// with `U(x, φ) = Σ_n U_n(x) e^{inφ}` summed pointwise.
pub fn directivity_quadrature(fields: &[ModalSurfaceField], profile: &Profile, wp: &WaveParams, theta_star: f64, phi_star: f64) -> Result<C64> {
    require_compact(profile)?;
    let k = wp.k;
    let grid = match fields.first() {
        Some(f) => f.grid.clone(),
        None => return Ok(C64::new(0.0, 0.0)),
    };
    if fields.iter().any(|f| f.grid != grid) {
        return domain("directivity quadrature needs all modes on one grid");
    }
    let n_max = fields.iter().map(|f| f.mode.unsigned_abs() as usize).max().unwrap_or(0);
    let min_nodes = 16 + 2 * n_max + (k.norm() * theta_star * profile.max_radius()) as usize;
    let rate = directivity_rate(profile, wp, theta_star);
    // Angular integral as a function of x, with each U_n entering through its value at x.
    let nodes = grid.nodes();
    let gl = GaussLegendre::cached(SUBPANEL_POINTS);
    let panel_values: Vec<Result<C64>> = (0..nodes.len() - 1)
        .into_par_iter()
        .map(|m| {
            let (a, b) = (nodes[m], nodes[m + 1]);
            let h = b - a;
            let pieces = (rate * h / SUBPANEL_PHASE).ceil().max(1.0) as usize;
            let w = h / pieces as f64;
            let mut acc = C64::new(0.0, 0.0);
            for s in 0..pieces {
                let lo = a + s as f64 * w;
                let c = lo + 0.5 * w;
                for (xi, wi) in gl.nodes.iter().zip(&gl.weights) {
                    let x = c + 0.5 * w * xi;
                    let t = (x - a) / h;
                    let us: Vec<(i32, C64)> = fields.iter().map(|f| (f.mode, f.values[m] * (1.0 - t) + f.values[m + 1] * t)).collect();
                    let f = profile.f(x);
                    let fd = profile.f_dot(x);
                    let inner = periodic_trapezoid(
                        |phi| {
                            let cs = (phi - phi_star).cos();
                            let u: C64 = us.iter().map(|&(n, un)| un * (I * n as f64 * phi).exp()).sum();
                            (theta_star * cs - fd) * (I * k * (-theta_star * f * cs + 0.5 * x * theta_star * theta_star)).exp() * u
                        },
                        1e-13,
                        1e-300,
                        min_nodes,
                        1 << 16,
                    )?;
                    acc += inner.value * (0.5 * f * wi * 0.5 * w);
                }
            }
            Ok(acc)
        })
        .collect();
    let mut total = C64::new(0.0, 0.0);
    for v in panel_values {
        total += v?;
    }
    Ok(total)
}

/// `T(θ*, φ*)` from the modal series, after checking it against the direct
/// quadrature.
pub fn directivity(fields: &[ModalSurfaceField], profile: &Profile, wp: &WaveParams, theta_star: f64, phi_star: f64) -> Result<Directivity> {
    let (d, _) = directivity_checked(fields, profile, wp, theta_star, phi_star)?;
    Ok(d)
}

/// As [`directivity`], also returning both routes.
pub fn directivity_checked(fields: &[ModalSurfaceField], profile: &Profile, wp: &WaveParams, theta_star: f64, phi_star: f64) -> Result<(Directivity, DirectivityCheck)> {
    if !(theta_star >= 0.0 && theta_star.is_finite()) {
        return domain(format!("observation angle {theta_star} must be nonnegative"));
    }
    let series = directivity_series(fields, profile, wp, theta_star, phi_star)?;
    let quadrature = directivity_quadrature(fields, profile, wp, theta_star, phi_star)?;
    let scale = series.norm().max(quadrature.norm());
    let relative_difference = if scale == 0.0 { 0.0 } else { (series - quadrature).norm() / scale };
    let check = DirectivityCheck {
        series,
        quadrature,
        relative_difference,
    };
    if relative_difference > DIRECTIVITY_TOLERANCE {
        return Err(Error::Consistency(format!(
            "directivity series {series} and quadrature {quadrature} differ by {relative_difference:e} (relative)"
        )));
    }
    Ok((
        Directivity {
            theta_star,
            phi_star,
            value: series,
        },
        check,
    ))
}

/// Transverse-plane controls of the optical theorem.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneOptions {
    /// Truncate where `|u^sc|` falls below this fraction of its peak.
    pub cutoff: f64,
    /// Gauss–Legendre points per radial panel.
    pub points: usize,
    /// Largest phase change of `u^sc` across one radial panel.
    pub panel_phase: f64,
    pub max_radius_factor: f64,
}

impl Default for PlaneOptions {
    fn default() -> Self {
        Self {
            cutoff: 1e-4,
            points: 16,
            panel_phase: 10.0,
            max_radius_factor: 20.0,
        }
    }
}

/// `∫∫|u^sc|² r dr dφ` over one transverse plane.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PlaneFlux {
    pub plane_x: f64,
    pub value: f64,
    /// Radius where the sampled integral stops.
    pub r_max: f64,
    /// Estimated contribution of `r > r_max`.
    pub tail: f64,
    pub samples: usize,
}

/// Scattered power through the plane `x = plane_x > X₂`.
pub fn plane_flux(fields: &[ModalSurfaceField], profile: &Profile, wp: &WaveParams, plane_x: f64, opts: &PlaneOptions) -> Result<PlaneFlux> {
    require_compact(profile)?;
    if !(plane_x > profile.x_end()) {
        return domain(format!("plane x = {plane_x} must lie beyond the body end {}", profile.x_end()));
    }
    let (x1, x2) = (profile.x_start(), profile.x_end());
    let fmax = profile.max_radius();
    let kk = wp.k.norm();
    let gap = plane_x - x2;
    let span = plane_x - x1;
    // Rays reflected at slope ḟ leave at 2ḟ; add the Fresnel width of the spread.
    let r_geo = fmax + 2.0 * profile.max_slope() * span + 4.0 * (span / kk).sqrt();
    let r_cap = opts.max_radius_factor * r_geo;
    let gl = GaussLegendre::cached(opts.points);
    let mut r = 0.0;
    let mut total = 0.0;
    let mut peak: f64 = 0.0;
    let mut samples = 0;
    let mut last = [f64::NAN; 2];
    loop {
        let width = opts.panel_phase * gap / (kk * (r + fmax) + 1e-300);
        let width = width.min(0.25 * r_geo);
        let (lo, hi) = (r, r + width);
        let pts: Vec<f64> = gl.nodes.iter().map(|t| lo + 0.5 * width * (1.0 + t)).collect();
        let vals: Vec<Result<f64>> = pts
            .par_iter()
            .map(|&rr| {
                let modes = reconstruct_modes(fields, profile, wp, plane_x, rr)?;
                Ok(modes.iter().map(|u| u.norm_sqr()).sum::<f64>())
            })
            .collect();
        let mut panel = 0.0;
        let mut panel_peak: f64 = 0.0;
        for ((v, &rr), w) in vals.into_iter().zip(&pts).zip(&gl.weights) {
            let v = v?;
            panel += 2.0 * PI * v * rr * w * 0.5 * width;
            panel_peak = panel_peak.max(v.sqrt());
        }
        samples += pts.len();
        total += panel;
        peak = peak.max(panel_peak);
        last = [last[1], panel / width];
        r = hi;
        if r >= r_geo && panel_peak <= opts.cutoff * peak {
            break;
        }
        if r > r_cap {
            return Err(Error::Accuracy {
                value: C64::new(total, 0.0),
                error: panel,
                target: opts.cutoff,
                context: format!("plane flux at x = {plane_x} not decayed by r = {r}"),
            });
        }
    }
    // Tail: continue the decay of the last two panel densities geometrically
    // per panel width, or as r^{-2} when they do not decrease.
    let width = opts.panel_phase * gap / (kk * (r + fmax));
    let ratio = last[1] / last[0];
    let tail = if ratio.is_finite() && ratio < 1.0 {
        last[1] * width * ratio / (1.0 - ratio)
    } else {
        last[1] * r
    };
    Ok(PlaneFlux {
        plane_x,
        value: total + tail,
        r_max: r,
        tail,
        samples,
    })
}

/// Both sides of `∫∫|u^sc|² r dr dφ = −2 Re T(θ, 0)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OpticalTheorem {
    pub lhs: PlaneFlux,
    pub rhs: f64,
    pub forward: C64,
    pub residual: f64,
}

/// Optical-theorem balance on the plane `plane_x`.
pub fn optical_theorem(fields: &[ModalSurfaceField], profile: &Profile, wp: &WaveParams, plane_x: f64, opts: &PlaneOptions) -> Result<OpticalTheorem> {
    if wp.k.im != 0.0 {
        return domain("the optical theorem holds for real k only");
    }
    let lhs = plane_flux(fields, profile, wp, plane_x, opts)?;
    let forward = directivity(fields, profile, wp, wp.theta, 0.0)?.value;
    let rhs = -2.0 * forward.re;
    let scale = lhs.value.abs().max(rhs.abs());
    let residual = if scale == 0.0 { 0.0 } else { (lhs.value - rhs).abs() / scale };
    Ok(OpticalTheorem {
        lhs,
        rhs,
        forward,
        residual,
    })
}

/// Relative residual `|LHS − RHS| / max(|LHS|, |RHS|)`.
pub fn optical_theorem_residual(fields: &[ModalSurfaceField], profile: &Profile, wp: &WaveParams, plane_x: f64) -> Result<f64> {
    Ok(optical_theorem(fields, profile, wp, plane_x, &PlaneOptions::default())?.residual)
}
