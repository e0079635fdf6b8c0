//! Parabolic Green's function, the continuation identity and the
//! boundary-integral kernels (full and per angular mode).

use crate::error::{domain, Error, Result};
use crate::geometry::{Profile, WaveParams};
use crate::numerics::bessel::{hankel_scaled_both, j_int, j_triple};
use crate::numerics::quadrature::{periodic_trapezoid, rotated_half_line, Estimate, QuadratureSpec};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::PI;

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// A point `(x, r, φ)` in cylindrical coordinates.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct SpacePoint {
    pub x: f64,
    pub r: f64,
    pub phi: f64,
}

impl SpacePoint {
    pub fn new(x: f64, r: f64, phi: f64) -> Result<Self> {
        if !(r >= 0.0) {
            return domain(format!("radius {r} must be nonnegative"));
        }
        Ok(Self { x, r, phi })
    }
}

/// `g(obs; src) = k/(2πi(x−x_s)) exp{(ik/2)|Δr⊥|²/(x−x_s)}`, zero for `x <= x_s`.
pub fn greens(obs: &SpacePoint, src: &SpacePoint, wp: &WaveParams) -> C64 {
    let dx = obs.x - src.x;
    if dx <= 0.0 {
        return C64::new(0.0, 0.0);
    }
    let dr2 = obs.r * obs.r + src.r * src.r - 2.0 * obs.r * src.r * (obs.phi - src.phi).cos();
    greens_transverse(wp.k, dx, C64::new(dr2, 0.0))
}

fn greens_transverse(k: C64, dx: f64, dr2: C64) -> C64 {
    k / (2.0 * PI * I * dx) * (0.5 * I * k * dr2 / dx).exp()
}

/// `∫_0^{2π}∫_0^∞ g(target; x0, r, φ) v(r, φ) r dr dφ`.
///
/// `v` must accept complex `r`: the radial half-line is rotated by
/// `spec.contour_rotation_angle`, which damps `exp{ikr²/2(x−x0)}`.
pub fn continuation_apply<V: Fn(C64, f64) -> C64 + Sync>(v: V, x0: f64, target: &SpacePoint, wp: &WaveParams, spec: &QuadratureSpec) -> Result<Estimate> {
    spec.validate()?;
    let dx = target.x - x0;
    if dx <= 0.0 {
        return domain(format!("target x = {} must lie beyond the plane x0 = {x0}", target.x));
    }
    let k = wp.k;
    let rt = target.r;
    let inner_err = std::cell::Cell::new(0.0f64);
    let radial = |r: C64| -> C64 {
        let ang = |phi: f64| {
            let dr2 = r * r + rt * rt - 2.0 * r * rt * (phi - target.phi).cos();
            greens_transverse(k, dx, dr2) * v(r, phi)
        };
        let nodes = 32 + (4.0 * (k * r * rt / dx).norm()) as usize;
        match periodic_trapezoid(ang, 0.01 * spec.relative_tolerance, 1e-300, nodes, 1 << 18) {
            Ok(e) => {
                inner_err.set(inner_err.get().max(e.error));
                e.value * r
            }
            Err(_) => C64::new(f64::NAN, f64::NAN),
        }
    };
    let scale = (dx / k.norm()).sqrt().max(1e-12);
    let scaled = |s: C64| radial(s * scale) * scale;
    rotated_half_line(&scaled, spec.contour_rotation_angle, 1.0 + rt / scale, spec)
}

/// `N[u] = ∂u/∂r − ikḟ u` from supplied radial derivative.
pub fn boundary_operator_n(u: C64, du_dr: C64, k: C64, f_dot: f64) -> C64 {
    du_dr - I * k * f_dot * u
}

/// `N̄[w] = ∂w/∂r + ikḟ w` from supplied radial derivative.
pub fn boundary_operator_n_bar(w: C64, dw_dr: C64, k: C64, f_dot: f64) -> C64 {
    dw_dr + I * k * f_dot * w
}

/// Which kernel a [`KernelEvaluator`] produces.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum KernelMode {
    Full,
    Modal(i32),
}

/// Kernels of the surface equation `U = ∫∫ K U dφ dx + 2U^in` for one body.
#[derive(Debug, Clone, Copy)]
pub struct KernelEvaluator {
    pub profile: Profile,
    pub wp: WaveParams,
    pub mode: KernelMode,
}

impl KernelEvaluator {
    pub fn new(profile: Profile, wp: WaveParams, mode: KernelMode) -> Self {
        Self { profile, wp, mode }
    }

    pub fn modal(profile: Profile, wp: WaveParams, n: i32) -> Self {
        Self::new(profile, wp, KernelMode::Modal(n))
    }

    fn check_pair(&self, x_star: f64, x: f64) -> Result<()> {
        if !(x_star > x) {
            return domain(format!("kernel needs x* > x (got x* = {x_star}, x = {x})"));
        }
        if !(self.profile.contains(x) && self.profile.contains(x_star)) {
            return domain(format!("x = {x} or x* = {x_star} outside the profile support"));
        }
        Ok(())
    }

    /// `K(x*,φ*,x,φ) = (ikf/2π)[ḟ/Δ + (f − f* cos(φ−φ*))/Δ²] exp{(ik/2)(f*² + f² − 2f*f cos(φ−φ*))/Δ}`.
    pub fn full(&self, x_star: f64, phi_star: f64, x: f64, phi: f64) -> Result<C64> {
        self.check_pair(x_star, x)?;
        Ok(full_kernel(&self.profile, self.wp.k, x_star, x, phi - phi_star))
    }

    /// `K_n(x*,x) = ∫_0^{2π} K(x*,φ,x,0) e^{−inφ} dφ` by adaptive trapezoid.
    pub fn modal_reference(&self, x_star: f64, x: f64) -> Result<Estimate> {
        let n = self.mode_number()?;
        self.check_pair(x_star, x)?;
        let p = &self.profile;
        let k = self.wp.k;
        let c = (k * p.f(x_star) * p.f(x) / (x_star - x)).norm();
        let nodes = 32 + 2 * (c as usize + n.unsigned_abs() as usize);
        let f = |phi: f64| full_kernel(p, k, x_star, x, phi) * C64::from_polar(1.0, -(n as f64) * phi);
        let size = (0..16).map(|j| f(j as f64 * PI / 8.0).norm()).fold(0.0, f64::max);
        periodic_trapezoid(f, 1e-13, 1e-15 * 2.0 * PI * size, nodes, 1 << 22).map_err(|e| match e {
            Error::Accuracy { value, error, target, .. } => Error::Accuracy {
                value,
                error,
                target,
                context: format!("angular quadrature of K_{n} at x*-x = {:e}; increase Im k or move off the diagonal", x_star - x),
            },
            other => other,
        })
    }

    /// Closed-form modal kernel
    /// `K_n = (ikf/Δ²) e^{(ik/2)(f*²+f²)/Δ} (−i)^n [(f + Δḟ) J_n(c) − i f* J_n'(c)]`, `c = k f* f/Δ`.
    pub fn modal_closed(&self, x_star: f64, x: f64) -> Result<C64> {
        let n = self.mode_number()?;
        self.check_pair(x_star, x)?;
        let v = surface_modal_kernel(&self.profile, self.wp.k, n, x_star, C64::new(x_star - x, 0.0));
        if v.is_finite() {
            Ok(v)
        } else {
            Err(Error::Numeric(format!("K_{n}({x_star}, {x}) not finite")))
        }
    }

    fn mode_number(&self) -> Result<i32> {
        match self.mode {
            KernelMode::Modal(n) => Ok(n),
            KernelMode::Full => domain("modal kernel requested from a full-mode evaluator"),
        }
    }
}

pub(crate) fn full_kernel(p: &Profile, k: C64, x_star: f64, x: f64, psi: f64) -> C64 {
    let d = x_star - x;
    let (fs, f, fd) = (p.f(x_star), p.f(x), p.f_dot(x));
    let c = psi.cos();
    I * k * f / (2.0 * PI) * (fd / d + (f - fs * c) / (d * d)) * (0.5 * I * k * (fs * fs + f * f - 2.0 * fs * f * c) / d).exp()
}

/// Modal kernel on the surface with the source at complex `x = x* − delta`.
pub(crate) fn surface_modal_kernel(p: &Profile, k: C64, n: i32, x_star: f64, delta: C64) -> C64 {
    let x = x_star - delta;
    let f = p.f_c(x);
    let fd = p.f_dot_c(x);
    let rem = p.taylor_remainder(x, delta);
    modal_source_kernel(k, n, p.f(x_star), f, fd, delta, rem)
}

/// Modal kernel for a target ring of radius `r_star` on the plane `x*`.
///
/// The source sits at `x = x* − delta` with radius `f` and slope `fd`;
/// `rem = r_star − f − delta·fd` is passed in so the caller can supply it
/// without cancellation. Large `c = k r* f/Δ` is split into the
/// `H^(1)` part, which oscillates like `exp{(ik/2)(r*+f)²/Δ}`, and the
/// `H^(2)` part, which carries `exp{(ik/2)(r*−f)²/Δ}`.
pub(crate) fn modal_source_kernel(k: C64, n: i32, r_star: f64, f: C64, fd: C64, delta: C64, rem: C64) -> C64 {
    let c = k * r_star * f / delta;
    let pre = I * k * f / (delta * delta) * minus_i_pow(n);
    let base = f + delta * fd;
    if c.norm() < 20.0 {
        let [jm, j, jp] = j_triple(n, c);
        let e = (0.5 * I * k * (r_star * r_star + f * f) / delta).exp();
        return pre * e * (base * j - I * r_star * 0.5 * (jm - jp));
    }
    let [(h1, q1), (h2, q2)] = hankel_scaled_both(n, c);
    let sum = r_star + f;
    let diff = r_star - f;
    let mut acc = C64::new(0.0, 0.0);
    let e_osc = 0.5 * I * k * sum * sum / delta;
    if e_osc.re > -745.0 {
        acc += e_osc.exp() * ((base + r_star) * h1 - I * r_star * q1);
    }
    let e_weak = 0.5 * I * k * diff * diff / delta;
    acc += e_weak.exp() * (-rem * h2 - I * r_star * q2);
    0.5 * pre * acc
}

pub(crate) fn minus_i_pow(n: i32) -> C64 {
    match n.rem_euclid(4) {
        0 => C64::new(1.0, 0.0),
        1 => C64::new(0.0, -1.0),
        2 => C64::new(-1.0, 0.0),
        _ => C64::new(0.0, 1.0),
    }
}

/// Axisymmetric cone kernel
/// `K_0 = (ikα²x*x/Δ²) exp{(ikα²/2)(x*²+x²)/Δ} [J_0(c) + iJ_1(c)]`, `c = kα²x*x/Δ`.
pub fn kernel_cone0(wp: &WaveParams, alpha: f64, x_star: f64, x: f64) -> Result<C64> {
    if !(x_star > x && x > 0.0) {
        return domain(format!("cone kernel needs x* > x > 0 (got {x_star}, {x})"));
    }
    let s = wp.k * alpha * alpha;
    let d = x_star - x;
    let c = s * x_star * x / d;
    let pre = I * s * x_star * x / (d * d);
    let v = if c.norm() < 20.0 {
        pre * (0.5 * I * s * (x_star * x_star + x * x) / d).exp() * (j_int(0, c) + I * j_int(1, c))
    } else {
        // Same expression written with scaled Hankel functions.
        // With H_1 = −H_0': h1_0 + i h1_1 = 2 h1_0 − i h1_0' and h2_0 + i h2_1 = −i h2_0'
        // for the scaled functions h, which avoids cancellation near the diagonal.
        let [(a0, da0), (_, db0)] = hankel_scaled_both(0, c);
        let osc = (0.5 * I * s * (x_star + x) * (x_star + x) / d).exp() * (2.0 * a0 - I * da0);
        let weak = (0.5 * I * s * d).exp() * (-I * db0);
        0.5 * pre * (osc + weak)
    };
    if v.is_finite() {
        Ok(v)
    } else {
        Err(Error::Numeric(format!("cone kernel not finite at ({x_star}, {x})")))
    }
}

/// Kernel of a Volterra equation `U(x*) = ∫_{x_0}^{x*} K(x*, x) U(x) dx + rhs(x*)`.
///
/// `eval` receives the separation `delta = x* − x`, possibly complex with
/// `Im delta <= 0` (source pushed into the upper half `x`-plane).
pub trait VolterraKernel: Sync {
    fn eval(&self, x_star: f64, delta: C64) -> C64;

    /// Bound on `|d(phase)/dx|` of the kernel at real separation `delta`.
    fn phase_rate(&self, x_star: f64, delta: f64) -> f64;

    /// Whether `eval` continues analytically off the real axis.
    fn analytic(&self) -> bool {
        true
    }
}

impl VolterraKernel for KernelEvaluator {
    fn eval(&self, x_star: f64, delta: C64) -> C64 {
        let n = match self.mode {
            KernelMode::Modal(n) => n,
            KernelMode::Full => 0,
        };
        surface_modal_kernel(&self.profile, self.wp.k, n, x_star, delta)
    }

    fn phase_rate(&self, x_star: f64, delta: f64) -> f64 {
        let p = &self.profile;
        let x = x_star - delta;
        let s = p.f(x_star) + p.f(x);
        let kk = self.wp.k.norm();
        kk * (0.5 * s * s / (delta * delta) + s * p.f_dot(x).abs() / delta)
    }
}

/// The kernel `K ≡ 0`.
#[derive(Debug, Clone, Copy, Default)]
pub struct ZeroKernel;

impl VolterraKernel for ZeroKernel {
    fn eval(&self, _: f64, _: C64) -> C64 {
        C64::new(0.0, 0.0)
    }
    fn phase_rate(&self, _: f64, _: f64) -> f64 {
        0.0
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn wp(k: f64, eta: f64) -> WaveParams {
        WaveParams::with_absorption(k, eta, 0.0).unwrap()
    }

    #[test]
    fn greens_on_axis_and_causality() {
        let w = WaveParams::new(C64::new(2.0 * PI, 0.0), 0.0).unwrap();
        let g = greens(&SpacePoint::new(1.0, 0.3, 0.2).unwrap(), &SpacePoint::new(0.0, 0.3, 0.2).unwrap(), &w);
        assert!((g - C64::new(0.0, -1.0)).norm() < 1e-15);
        assert_eq!(greens(&SpacePoint::new(0.0, 0.0, 0.0).unwrap(), &SpacePoint::new(1.0, 0.0, 0.0).unwrap(), &w), C64::new(0.0, 0.0));
        let a = greens(&SpacePoint::new(2.0, 0.4, 0.1).unwrap(), &SpacePoint::new(1.0, 0.2, 1.3).unwrap(), &w);
        let b = greens(&SpacePoint::new(2.0, 0.4, 0.1 + 0.7).unwrap(), &SpacePoint::new(1.0, 0.2, 1.3 + 0.7).unwrap(), &w);
        assert!((a - b).norm() < 1e-14 * a.norm());
    }

    #[test]
    fn greens_solves_parabolic_equation() {
        // u_x + (1/2ik)(u_rr + u_r/r + u_φφ/r²) = 0 by finite differences.
        let w = wp(30.0, 0.0);
        let src = SpacePoint::new(0.0, 0.5, 0.3).unwrap();
        let g = |x: f64, r: f64, phi: f64| greens(&SpacePoint { x, r, phi }, &src, &w);
        let (x, r, phi) = (1.3, 0.8, 1.1);
        let h = 1e-3;
        let gx = (g(x + h, r, phi) - g(x - h, r, phi)) / (2.0 * h);
        let gr = (g(x, r + h, phi) - g(x, r - h, phi)) / (2.0 * h);
        let grr = (g(x, r + h, phi) - 2.0 * g(x, r, phi) + g(x, r - h, phi)) / (h * h);
        let gpp = (g(x, r, phi + h) - 2.0 * g(x, r, phi) + g(x, r, phi - h)) / (h * h);
        let lap = grr + gr / r + gpp / (r * r);
        let res = gx + lap / (2.0 * I * w.k);
        assert!(res.norm() <= 1e-4 * gx.norm(), "{res} {gx}");
    }

    #[test]
    fn cylinder_kernel_vanishes_on_line() {
        let ke = KernelEvaluator::new(Profile::cylinder(0.3).unwrap(), wp(50.0, 0.01), KernelMode::Full);
        assert_eq!(ke.full(2.0, 0.3, 1.0, 0.3).unwrap(), C64::new(0.0, 0.0));
        assert!(ke.full(2.0, 0.3, 1.0, 0.5).unwrap().norm() > 0.0);
    }

    #[test]
    fn full_kernel_matches_finite_difference_oracle() {
        for (p, x_star, x, psi) in [
            (Profile::cone(0.1).unwrap(), 2.0, 1.0, 0.4),
            (Profile::spindle(0.08, 0.0, 10.0).unwrap(), 6.0, 3.5, 2.1),
        ] {
            let w = wp(40.0, 0.01);
            let ke = KernelEvaluator::new(p, w, KernelMode::Full);
            let k_val = ke.full(x_star, psi, x, 0.0).unwrap();
            let obs = SpacePoint::new(x_star, p.f(x_star), psi).unwrap();
            let g = |r: f64| greens(&obs, &SpacePoint { x, r, phi: 0.0 }, &w);
            let h = 1e-6;
            let dg = (g(p.f(x) + h) - g(p.f(x) - h)) / (2.0 * h);
            let oracle = I * p.f(x) / w.k * boundary_operator_n_bar(g(p.f(x)), dg, w.k, p.f_dot(x));
            assert!((k_val - oracle).norm() <= 1e-6 * k_val.norm(), "{k_val} {oracle}");
        }
    }

    #[test]
    fn modal_reference_matches_cone_kernel() {
        let w = wp(100.0, 0.01);
        let p = Profile::cone(0.1).unwrap();
        let ke = KernelEvaluator::modal(p, w, 0);
        let q = ke.modal_reference(2.0, 1.0).unwrap().value;
        let c = kernel_cone0(&w, 0.1, 2.0, 1.0).unwrap();
        assert!((q - c).norm() <= 1e-8 * c.norm());
    }

    #[test]
    fn closed_modal_matches_reference_for_several_modes() {
        let w = wp(300.0, 0.002);
        for p in [Profile::cone(0.07).unwrap(), Profile::spindle(0.05, 0.0, 10.0).unwrap()] {
            for &(xs, x) in &[(3.0, 1.0), (5.0, 4.9), (7.0, 2.5)] {
                for n in [-3, -1, 0, 1, 2, 5] {
                    let ke = KernelEvaluator::modal(p, w, n);
                    let q = ke.modal_reference(xs, x).unwrap().value;
                    let c = ke.modal_closed(xs, x).unwrap();
                    assert!((q - c).norm() <= 1e-9 * q.norm().max(1e-12), "n={n} ({xs},{x}) {q} {c}");
                }
            }
        }
    }

    #[test]
    fn modal_kernel_decays_beyond_bessel_argument() {
        let w = wp(200.0, 0.01);
        let p = Profile::cone(0.1).unwrap();
        let (xs, x) = (2.0, 1.0);
        let c = 200.0 * 0.2 * 0.1 / 1.0; // k f* f / Δ = 4
        let mags: Vec<f64> = (6..14).map(|n| KernelEvaluator::modal(p, w, n).modal_reference(xs, x).unwrap().value.norm()).collect();
        assert!(c < 6.0);
        assert!(mags.windows(2).all(|m| m[1] < m[0]));
    }

    #[test]
    fn modal_kernel_vanishes_with_source_radius() {
        let w = wp(100.0, 0.01);
        let ke = KernelEvaluator::modal(Profile::cone(0.1).unwrap(), w, 1);
        let small = ke.modal_closed(2.0, 1e-9).unwrap().norm();
        assert!(small < 1e-6);
    }

    #[test]
    fn cone_factorization_identity() {
        let w = wp(50.0, 0.01);
        let alpha = 0.1;
        let s = w.k * alpha * alpha;
        for &(xs, x) in &[(2.0, 1.0), (3.0, 0.4), (10.0, 9.5)] {
            let (t, ts) = (1.0 / x, 1.0 / xs);
            let zeta = |tau: f64| w.k / tau * (-I * s / (2.0 * tau)).exp();
            let xi = t - ts;
            let arg = s / xi;
            let g = I * s / (xi * xi) * (I * s / xi).exp() * (j_int(0, arg) + I * j_int(1, arg));
            let rhs = t * t * zeta(t) / zeta(ts) * g;
            let lhs = kernel_cone0(&w, alpha, xs, x).unwrap();
            assert!((lhs - rhs).norm() <= 1e-12 * lhs.norm(), "{lhs} {rhs}");
        }
    }

    #[test]
    fn cone_kernel_scales_with_alpha_squared() {
        // Fixed Bessel argument kα²x*x/Δ: shrink α by 2, grow k by 4.
        let a = kernel_cone0(&wp(100.0, 0.0), 0.1, 2.0, 1.0).unwrap();
        let b = kernel_cone0(&wp(400.0, 0.0), 0.05, 2.0, 1.0).unwrap();
        assert!((a - b).norm() < 1e-12 * a.norm());
    }

    #[test]
    fn cone_kernel_diagonal_limit_is_inverse_square_root() {
        // The H^(2) half of J0 + iJ1 is not damped by Im k:
        // K_0 √Δ → −(e^{iπ/4}/4) √(2/π) (kα² x*²)^{-1/2}.
        let w = wp(100.0, 0.01);
        let (alpha, xs) = (0.1, 2.0);
        let s = w.k * alpha * alpha;
        let limit = -C64::from_polar(0.25 * (2.0 / PI).sqrt(), PI / 4.0) / (s * xs * xs).sqrt();
        let mut last = f64::INFINITY;
        for m in 8..30 {
            let d = 2f64.powi(-m);
            let v = kernel_cone0(&w, alpha, xs, xs - d).unwrap() * d.sqrt();
            let err = (v - limit).norm();
            assert!(err <= last * 1.01 + 1e-13 * limit.norm(), "m={m} {err} {last}");
            last = err;
        }
        assert!(last < 1e-5 * limit.norm());
    }

    #[test]
    fn continuation_of_constant_and_plane_wave() {
        let w = wp(80.0, 0.0);
        let spec = QuadratureSpec::with_tolerance(1e-9);
        let t = SpacePoint::new(2.0, 0.3, 0.7).unwrap();
        let one = continuation_apply(|_, _| C64::new(1.0, 0.0), 1.0, &t, &w, &spec).unwrap();
        assert!((one.value - 1.0).norm() < 1e-6, "{}", one.value);
        let th = 0.05;
        let wt = WaveParams::new(w.k, th).unwrap();
        let plane = |x: f64, r: C64, phi: f64| (I * wt.k * (th * r * phi.cos() - x * th * th / 2.0)).exp();
        let v = continuation_apply(|r, phi| plane(1.0, r, phi), 1.0, &t, &wt, &spec).unwrap();
        let exact = plane(t.x, C64::new(t.r, 0.0), t.phi);
        assert!((v.value - exact).norm() < 1e-6, "{} {}", v.value, exact);
    }

    #[test]
    fn continuation_gaussian_semigroup() {
        let w = wp(60.0, 0.0);
        let spec = QuadratureSpec::with_tolerance(1e-10);
        let width = 0.2;
        let gauss = |r: C64, _phi: f64| (-r * r / (2.0 * width * width)).exp();
        let target = SpacePoint::new(2.0, 0.15, 0.0).unwrap();
        let direct = continuation_apply(gauss, 0.0, &target, &w, &spec).unwrap().value;
        // Axisymmetric: the intermediate field depends on r only.
        let mid = |r: C64, _phi: f64| {
            let p = SpacePoint { x: 1.0, r: 0.0, phi: 0.0 };
            let _ = p;
            mid_field(r, &w, width)
        };
        let two = continuation_apply(mid, 1.0, &target, &w, &spec).unwrap().value;
        assert!((direct - two).norm() < 1e-6, "{direct} {two}");
    }

    // Gaussian beam after propagating a distance 1: closed form of the same
    // transverse integral (complex width w² + i/k).
    fn mid_field(r: C64, w: &WaveParams, width: f64) -> C64 {
        let q = C64::new(width * width, 0.0) + I / w.k;
        (width * width / q) * (-r * r / (2.0 * q)).exp()
    }

    #[test]
    fn closed_gaussian_matches_numeric_half_step() {
        let w = wp(60.0, 0.0);
        let spec = QuadratureSpec::with_tolerance(1e-10);
        let width = 0.2;
        let gauss = |r: C64, _phi: f64| (-r * r / (2.0 * width * width)).exp();
        for r in [0.0, 0.1, 0.35] {
            let t = SpacePoint::new(1.0, r, 0.4).unwrap();
            let v = continuation_apply(gauss, 0.0, &t, &w, &spec).unwrap().value;
            assert!((v - mid_field(C64::new(r, 0.0), &w, width)).norm() < 1e-7);
        }
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(32))]
        #[test]
        fn full_kernel_depends_on_angle_difference(a in 0.0f64..6.3, b in 0.0f64..6.3, c in -3.0f64..3.0) {
            let ke = KernelEvaluator::new(Profile::cone(0.1).unwrap(), wp(70.0, 0.01), KernelMode::Full);
            let u = ke.full(3.0, a, 1.5, b).unwrap();
            let v = ke.full(3.0, a + c, 1.5, b + c).unwrap();
            prop_assert!((u - v).norm() <= 1e-10 * u.norm());
        }

        #[test]
        fn full_kernel_conjugate_symmetry(kr in 10.0f64..200.0, ki in 0.0f64..2.0, psi in 0.0f64..6.3) {
            let p = Profile::spindle(0.05, 0.0, 10.0).unwrap();
            let k = C64::new(kr, ki);
            let a = full_kernel(&p, k, 6.0, 2.0, psi).conj();
            let b = full_kernel(&p, -k.conj(), 6.0, 2.0, psi);
            prop_assert!((a - b).norm() <= 1e-12 * a.norm().max(1e-300));
        }
    }
}
