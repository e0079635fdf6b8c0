//! Closed-form cone solution for axial incidence and its by-products.
//!
//! With `y = kα²x` and `ρ = r/(αx)` the scattered field is
//! `u^sc = (i/y) e^{iy/2} ∫_0^∞ [J_1(κ)/H_1(κ)] H_0(ρκ) e^{iκ²/2y} κ dκ`
//! (Hankel functions of the first kind). On the surface `ρ = 1`.
//!
//! The integral is split with `J_1 = (H^(1)_1 + H^(2)_1)/2`. The `H^(1)`
//! half decays in the upper half plane and is integrated along the ray
//! `arg κ = π/4 + arg(y)/2`. The `H^(2)` half carries
//! `exp{i(ρ−2)κ + iκ²/2y}`; it is integrated first into the fourth quadrant
//! and then along the steepest-descent line through `κ_s = (2−ρ)y`.

use crate::error::{domain, Error, Result};
use crate::geometry::WaveParams;
use crate::numerics::bessel::{bessel_j, hankel1, hankel_scaled_both, hankel_scaled_pair};
use crate::numerics::pcf::parabolic_cylinder_d_neg32;
use crate::numerics::quadrature::{extrapolate_to_zero, integrate_path, rotated_half_line, Adaptive, Estimate, QuadratureSpec, Tolerance};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};
use std::f64::consts::{FRAC_PI_4, FRAC_PI_8, PI, SQRT_2};

const I: C64 = C64 { re: 0.0, im: 1.0 };

/// Tolerance of the contour integrals in this module.
pub const CONE_TOLERANCE: f64 = 1e-11;

/// `y = Re k · α² · x`.
pub fn self_similar_y(wp: &WaveParams, alpha: f64, x: f64) -> f64 {
    wp.k.re * alpha * alpha * x
}

/// `(h1_0, h1_1, h2_1)`: scaled Hankel functions `e^{−iz}H^(1)_n`, `e^{iz}H^(2)_n`.
fn scaled_set(z: C64) -> (C64, C64, C64) {
    let [(h10, d10), (h20, d20)] = hankel_scaled_both(0, z);
    (h10, -d10 - I * h10, -d20 + I * h20)
}

fn scaled_h10(z: C64) -> C64 {
    hankel_scaled_pair(0, z, 1.0).0
}

struct Accum {
    value: C64,
    error: f64,
    converged: bool,
}

impl Accum {
    fn new() -> Self {
        Self {
            value: C64::new(0.0, 0.0),
            error: 0.0,
            converged: true,
        }
    }
    fn add(&mut self, r: Adaptive<C64>) {
        self.value += r.value;
        self.error += r.error;
        self.converged &= r.converged;
    }
}

fn tol() -> Tolerance {
    Tolerance::new(CONE_TOLERANCE, 1e-300, 20000)
}

/// The integral `∫ [J_1/H_1](κ) H_0(ρκ) e^{iκ²/2y} κ dκ` along the split contour.
fn split_integral(y: C64, rho: f64) -> Result<Estimate> {
    if !(y.norm() > 0.0) || !y.is_finite() || y.arg().abs() >= FRAC_PI_4 {
        return domain(format!("self-similar variable {y} must be nonzero with |arg| < π/4"));
    }
    if !(rho >= 1.0) || !rho.is_finite() {
        return domain(format!("ρ = r/(αx) = {rho} must be ≥ 1"));
    }
    let theta = FRAC_PI_4 + 0.5 * y.arg();
    let e = C64::from_polar(1.0, theta);
    let ay = y.norm();
    // e^{−45} below the peak of the Gaussian factor.
    let gauss = (90.0 * ay).sqrt();
    let fa = |k: C64| 0.5 * scaled_h10(rho * k) * (I * rho * k + I * k * k / (2.0 * y)).exp() * k;
    let fb = |k: C64| {
        let (h10, h11, h21) = scaled_set(k);
        let h0r = if rho == 1.0 { h10 } else { scaled_h10(rho * k) };
        0.5 * h21 * h0r / h11 * (I * (rho - 2.0) * k + I * k * k / (2.0 * y)).exp() * k
    };
    let mut acc = Accum::new();
    let zero = C64::new(0.0, 0.0);
    let mut fa_m = fa;
    acc.add(integrate_path(&mut fa_m, &[zero, e * (0.1 * gauss), e * gauss], tol()));
    let ks = (2.0 - rho) * y;
    let mut fb_m = fb;
    if ks.re > 0.0 {
        let w = ks - (ks.norm() / SQRT_2) * e;
        acc.add(integrate_path(&mut fb_m, &[zero, w, ks, ks + e * gauss], tol()));
    } else {
        let end = e * (ks.norm() + gauss);
        acc.add(integrate_path(&mut fb_m, &[zero, e * (0.1 * gauss), end], tol()));
    }
    if !acc.value.is_finite() {
        return Err(Error::Numeric(format!("cone integral not finite at y = {y}, ρ = {rho}")));
    }
    if !acc.converged {
        return Err(Error::Accuracy {
            value: acc.value,
            error: acc.error,
            target: CONE_TOLERANCE,
            context: format!("cone contour integral at y = {y}, ρ = {rho}"),
        });
    }
    Ok(Estimate::new(acc.value, acc.error))
}

fn with_prefactor(y: C64, est: Estimate) -> Estimate {
    let pre = I / y * (0.5 * I * y).exp();
    Estimate::new(pre * est.value, pre.norm() * est.error)
}

/// Scattered surface field `U^sc(y)`; the total surface field is `1 + U^sc`.
///
/// `y = 0` returns the limit `0`.
pub fn surface_field_sc(y: f64) -> Result<Estimate> {
    if y == 0.0 {
        return Ok(Estimate::new(C64::new(0.0, 0.0), 0.0));
    }
    if !(y > 0.0) {
        return domain(format!("y = {y} must be ≥ 0"));
    }
    surface_field_sc_complex(C64::new(y, 0.0))
}

/// `U^sc` continued to complex `y = kα²x` (absorbing medium or complex `x`).
pub fn surface_field_sc_complex(y: C64) -> Result<Estimate> {
    split_integral(y, 1.0).map(|e| with_prefactor(y, e))
}

/// `U^sc(y)` from a single ray `arg κ = δ` (both halves together).
///
/// The `H^(2)` half grows like `e^{2|κ| sin δ}` on this ray before the
/// Gaussian takes over, so this form is practical for moderate `y` only.
pub fn surface_field_sc_rotated(y: f64, delta: f64) -> Result<Estimate> {
    if !(y > 0.0 && y <= 200.0) {
        return domain(format!("single-ray evaluation needs 0 < y ≤ 200 (got {y})"));
    }
    if !(delta > 0.0 && delta < PI / 2.0) {
        return domain(format!("ray angle {delta} must lie in (0, π/2)"));
    }
    let d = C64::from_polar(1.0, delta);
    let r_max = (2.0 * y * 80.0 / (2.0 * delta).sin()).sqrt() + 20.0;
    let mut f = |k: C64| {
        let (h10, h11, h21) = scaled_set(k);
        let a = 0.5 * h10 * (I * k + I * k * k / (2.0 * y)).exp();
        let b = 0.5 * h21 * h10 / h11 * (-I * k + I * k * k / (2.0 * y)).exp();
        (a + b) * k
    };
    let r: Adaptive<C64> = integrate_path(&mut f, &[C64::new(0.0, 0.0), d * (0.25 * r_max), d * r_max], tol());
    if !r.converged || !r.value.is_finite() {
        return Err(Error::Accuracy {
            value: r.value,
            error: r.error,
            target: CONE_TOLERANCE,
            context: format!("single-ray cone integral at y = {y}"),
        });
    }
    Ok(with_prefactor(C64::new(y, 0.0), r.estimate()))
}

/// `U^sc` at the complex `y(1 − iη)` by quadrature on the real `κ` axis.
///
/// For `Im y < 0` the factor `e^{iκ²/2y}` is a decaying Gaussian on the real
/// axis, so no contour deformation is used. The value is the continuation
/// of `U^sc` to that `y`, which [`surface_field_sc_complex`] also evaluates.
pub fn surface_field_sc_damped(y: f64, eta: f64) -> Result<Estimate> {
    if !(y > 0.0 && eta > 0.0) {
        return domain(format!("damped evaluation needs y > 0 and η > 0 (got {y}, {eta})"));
    }
    let yc = C64::new(y, -y * eta);
    let decay = (1.0 / yc).im.abs() * 0.5;
    let k_max = (50.0 / decay).sqrt();
    let mut f = |k: C64| {
        let j1 = bessel_j(1, k).unwrap_or(C64::new(f64::NAN, 0.0));
        let h0 = hankel1(0, k).unwrap_or(C64::new(f64::NAN, 0.0));
        let h1 = hankel1(1, k).unwrap_or(C64::new(f64::NAN, 0.0));
        j1 * h0 / h1 * (I * k * k / (2.0 * yc)).exp() * k
    };
    let n = (k_max / 2.0).ceil().max(4.0) as usize;
    let pts: Vec<C64> = (0..=n).map(|i| C64::new(k_max * i as f64 / n as f64, 0.0)).collect();
    let r: Adaptive<C64> = integrate_path(&mut f, &pts, Tolerance::new(CONE_TOLERANCE, 1e-300, 200_000));
    if !r.converged || !r.value.is_finite() {
        return Err(Error::Accuracy {
            value: r.value,
            error: r.error,
            target: CONE_TOLERANCE,
            context: format!("real-axis cone integral at y = {y}, η = {eta}"),
        });
    }
    Ok(with_prefactor(yc, r.estimate()))
}

/// Scattered field off the cone surface at `(x, r)`, `r ≥ αx`:
/// `(i/y) e^{ikr²/2x} ∫ [J_1/H_1](κ) H_0(ρκ) e^{iκ²/2y} κ dκ`, `ρ = r/(αx)`.
pub fn offsurface_field(wp: &WaveParams, alpha: f64, x: f64, r: f64) -> Result<Estimate> {
    if !(x > 0.0) || !(alpha > 0.0) {
        return domain(format!("off-surface field needs x > 0 and α > 0 (got x = {x}, α = {alpha})"));
    }
    let rho = r / (alpha * x);
    if rho < 1.0 {
        return domain(format!("point (x = {x}, r = {r}) lies inside the cone"));
    }
    let y = wp.k * alpha * alpha * x;
    // Fresnel phase of the observation ring relative to the surface ring.
    let ring = (0.5 * I * y * (rho * rho - 1.0)).exp();
    split_integral(y, rho).map(|e| {
        let e = with_prefactor(y, e);
        Estimate::new(ring * e.value, ring.norm() * e.error)
    })
}

/// `P = i ∫_0^∞ [J_1(κ)H_0(κ)/H_1(κ)] κ dκ`, regularized by contour rotation.
///
/// The `H^(1)` half is integrated along `arg κ = δ`, the `H^(2)` half along
/// `arg κ = −δ`.
pub fn asympt_constant_p_with(delta: f64) -> Result<Estimate> {
    if !(delta > 0.0 && delta < PI / 2.0) {
        return domain(format!("rotation angle {delta} must lie in (0, π/2)"));
    }
    let spec = QuadratureSpec {
        relative_tolerance: 1e-12,
        max_subdivisions: 20000,
        contour_rotation_angle: delta,
    };
    let up = |k: C64| 0.5 * scaled_h10(k) * (I * k).exp() * k;
    let down = |k: C64| {
        let (h10, h11, h21) = scaled_set(k);
        0.5 * h21 * h10 / h11 * (-I * k).exp() * k
    };
    let a = rotated_half_line(&up, delta, 2.0, &spec)?;
    let b = rotated_half_line(&down, -delta, 2.0, &spec)?;
    Ok(Estimate::new(I * (a.value + b.value), a.error + b.error))
}

/// [`asympt_constant_p_with`] at the default rotation `π/6`.
pub fn asympt_constant_p() -> Result<Estimate> {
    asympt_constant_p_with(QuadratureSpec::default().contour_rotation_angle)
}

/// Least-squares fit of `(U^sc(y) − 1)·y = P·e^{iy/2} + c` over samples.
///
/// Returns `(P, c)`; `c` absorbs the next-order, non-oscillating term.
pub fn fit_far_constant(ys: &[f64], usc: &[C64]) -> Result<(C64, C64)> {
    if ys.len() != usc.len() || ys.len() < 2 {
        return domain("far-field fit needs at least two matching samples");
    }
    // Normal equations of the 2x2 complex system [e_j, 1]·[P, c]^T = d_j.
    let (mut a11, mut a12, mut a22) = (0.0, C64::new(0.0, 0.0), ys.len() as f64);
    let (mut b1, mut b2) = (C64::new(0.0, 0.0), C64::new(0.0, 0.0));
    for (&y, &u) in ys.iter().zip(usc) {
        let e = C64::from_polar(1.0, 0.5 * y);
        let d = (u - 1.0) * y;
        a11 += 1.0;
        a12 += e.conj();
        b1 += e.conj() * d;
        b2 += d;
    }
    let _ = &mut a22;
    let det = a11 * a22 - (a12 * a12.conj()).re;
    if det.abs() < 1e-12 * a11 * a22 {
        return Err(Error::Singular("far-field fit samples do not separate P from the offset".into()));
    }
    let p = (a22 * b1 - a12 * b2) / det;
    let c = (-a12.conj() * b1 + a11 * b2) / det;
    Ok((p, c))
}

/// Penumbra approximation near the reflected-ray boundary `r = 2αx`.
///
/// `(√2/4) e^{iπ/8} (kx)^{-1/4} √(x/r) exp{ikr²/2x − ikxγ²/2} D_{-3/2}(√(kx) γ e^{3iπ/4})`
/// with `γ = 2α − r/x`.
pub fn penumbra_field(wp: &WaveParams, alpha: f64, x: f64, r: f64) -> Result<C64> {
    check_penumbra(wp, x, r)?;
    let kx = wp.k * x;
    let g = 2.0 * alpha - r / x;
    let d = parabolic_cylinder_d_neg32(kx.sqrt() * g * C64::from_polar(1.0, 3.0 * FRAC_PI_4))?.value;
    let pre = SQRT_2 / 4.0 * C64::from_polar(1.0, FRAC_PI_8) * kx.powf(-0.25) * (x / r).sqrt();
    Ok(pre * (0.5 * I * wp.k * r * r / x - 0.5 * I * kx * g * g).exp() * d)
}

/// Penumbra formula with the real Gaussian factor and `tan²α` phase, kept
/// for comparison with [`penumbra_field`]:
/// `−(i e^{iπ/8}/(kx)^{1/4}) √(x/r) exp{i(kx/2)tan²α − kxγ²} D_{-3/2}(√(kx) γ e^{3iπ/4})`.
pub fn penumbra_field_uncorrected(wp: &WaveParams, alpha: f64, x: f64, r: f64) -> Result<C64> {
    check_penumbra(wp, x, r)?;
    let kx = wp.k * x;
    let g = 2.0 * alpha - r / x;
    let t = alpha.tan();
    let d = parabolic_cylinder_d_neg32(kx.sqrt() * g * C64::from_polar(1.0, 3.0 * FRAC_PI_4))?.value;
    let pre = -I * C64::from_polar(1.0, FRAC_PI_8) * kx.powf(-0.25) * (x / r).sqrt();
    Ok(pre * (0.5 * I * kx * t * t - kx * g * g).exp() * d)
}

fn check_penumbra(wp: &WaveParams, x: f64, r: f64) -> Result<()> {
    if !(x > 0.0 && r > 0.0) || wp.k.re * x <= 0.0 {
        return domain(format!("penumbra formula needs x > 0, r > 0 (got {x}, {r})"));
    }
    Ok(())
}

/// Closed-form pieces of the convolution form of the cone equation in `τ = 1/x`.
///
/// `K_0(x*, x) = τ² ζ(τ) ζ(τ*)^{-1} G(τ − τ*)` and `V(τ) = ζ(τ) U(1/τ)` obeys
/// `V(τ*) = ∫_{τ*}^∞ G(τ − τ*) V(τ) dτ + 2ζ(τ*)`. Transforms:
/// `p̃(λ) = ∫ p(τ) e^{−iλτ} dτ` for the source, `G̃(λ) = ∫_0^∞ G(ξ) e^{iλξ} dξ`.
/// `zeta_hat` is the transform of the whole source term `2ζ`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConvolutionPieces {
    pub k: C64,
    pub alpha: f64,
}

impl ConvolutionPieces {
    pub fn new(wp: &WaveParams, alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return domain(format!("cone half-angle {alpha} must lie in (0, 1)"));
        }
        Ok(Self { k: wp.k, alpha })
    }

    fn s(&self) -> C64 {
        self.k * self.alpha * self.alpha
    }

    /// `ζ(τ) = (k/τ) e^{−ikα²/(2τ)}`.
    pub fn zeta(&self, tau: f64) -> C64 {
        self.k / tau * (-0.5 * I * self.s() / tau).exp()
    }

    /// `G(ξ) = (ikα²/ξ²) e^{ikα²/ξ} [J_0(kα²/ξ) + iJ_1(kα²/ξ)]`.
    pub fn g(&self, xi: f64) -> C64 {
        let s = self.s();
        let c = s / xi;
        let [(h10, d10), (_, d20)] = hankel_scaled_both(0, c);
        if c.norm() >= 20.0 {
            // J_0 + iJ_1 through the scaled Hankel functions, as in the cone kernel.
            let osc = (2.0 * I * c).exp() * (2.0 * h10 - I * d10);
            let weak = -I * d20;
            return 0.5 * I * s / (xi * xi) * (osc + weak);
        }
        let j0 = bessel_j(0, c).unwrap_or(C64::new(f64::NAN, 0.0));
        let j1 = bessel_j(1, c).unwrap_or(C64::new(f64::NAN, 0.0));
        I * s / (xi * xi) * (I * c).exp() * (j0 + I * j1)
    }

    fn q(&self, lambda: C64) -> C64 {
        (2.0 * self.s() * lambda).sqrt()
    }

    /// `ζ̃(λ) = −4πik J_0(√(2kα²λ))` for `λ > 0`, `0` for `λ < 0`.
    ///
    /// Complex `λ` continues the `λ > 0` branch.
    pub fn zeta_hat(&self, lambda: C64) -> C64 {
        if lambda.im == 0.0 && lambda.re < 0.0 {
            return C64::new(0.0, 0.0);
        }
        -4.0 * PI * I * self.k * bessel_j(0, self.q(lambda)).unwrap_or(C64::new(f64::NAN, 0.0))
    }

    /// `G̃(λ) = 1 + iπ q J_0(q) H_0^(1)'(q)`, `q = √(2kα²λ)`.
    pub fn g_hat(&self, lambda: C64) -> C64 {
        let q = self.q(lambda);
        let j0 = bessel_j(0, q).unwrap_or(C64::new(f64::NAN, 0.0));
        let dh = -hankel1(1, q).unwrap_or(C64::new(f64::NAN, 0.0));
        1.0 + I * PI * q * j0 * dh
    }

    /// `ζ̃(λ)` by direct numerical transform of `2ζ(τ)` over the real line.
    ///
    /// The transform only exists as a limit, so it is computed with the
    /// convergence factor `e^{−ε(|τ| + 1/|τ|)}` in `τ = e^t` and extrapolated
    /// to `ε = 0` from `epsilons`.
    pub fn zeta_hat_numeric(&self, lambda: f64, epsilons: &[f64]) -> Result<Estimate> {
        if epsilons.len() < 2 || epsilons.iter().any(|&e| !(e > 0.0)) {
            return domain("need at least two positive damping parameters");
        }
        let a = 0.5 * self.s();
        let vals: Vec<C64> = epsilons
            .iter()
            .map(|&eps| {
                let t_hi = (60.0 / eps).ln();
                let mut f = |t: C64| {
                    let t = t.re;
                    let (tau, inv) = (t.exp(), (-t).exp());
                    let ph = a * inv + lambda * tau;
                    let damp = (-eps * (tau + inv)).exp();
                    2.0 * self.k * ((-I * ph).exp() - (I * ph).exp()) * damp
                };
                let n = 64;
                let pts: Vec<C64> = (0..=n).map(|i| C64::new(-t_hi + 2.0 * t_hi * i as f64 / n as f64, 0.0)).collect();
                let r: Adaptive<C64> = integrate_path(&mut f, &pts, Tolerance::new(1e-12, 1e-14, 200_000));
                if r.converged {
                    Ok(r.value)
                } else {
                    Err(Error::Accuracy {
                        value: r.value,
                        error: r.error,
                        target: 1e-12,
                        context: format!("damped transform of ζ at ε = {eps}"),
                    })
                }
            })
            .collect::<Result<_>>()?;
        let best = extrapolate_to_zero(epsilons, &vals);
        let lower = extrapolate_to_zero(&epsilons[1..], &vals[1..]);
        Ok(Estimate::new(best, (best - lower).norm()))
    }

    /// `Ṽ(λ) = ζ̃(λ)/(1 − G̃(λ))`.
    pub fn v_hat(&self, lambda: C64) -> C64 {
        self.zeta_hat(lambda) / (1.0 - self.g_hat(lambda))
    }

    /// `V(τ) = (1/2π) ∫_0^∞ Ṽ(λ) e^{iλτ} dλ` on the ray `arg λ = δ`.
    pub fn v(&self, tau: f64, spec: &QuadratureSpec) -> Result<Estimate> {
        if !(tau > 0.0) {
            return domain(format!("τ = {tau} must be positive"));
        }
        let f = |l: C64| self.v_hat(l) * (I * l * tau).exp();
        let r = rotated_half_line(&f, spec.contour_rotation_angle, 1.0 / tau, spec)?;
        Ok(Estimate::new(r.value / (2.0 * PI), r.error / (2.0 * PI)))
    }

    /// Total surface field `U(x) = V(1/x)/ζ(1/x)` from the transform solution.
    pub fn surface_field_total(&self, x: f64, spec: &QuadratureSpec) -> Result<Estimate> {
        let tau = 1.0 / x;
        let v = self.v(tau, spec)?;
        let z = self.zeta(tau);
        Ok(Estimate::new(v.value / z, v.error / z.norm()))
    }
}
