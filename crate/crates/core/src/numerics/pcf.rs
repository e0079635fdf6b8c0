//! Parabolic cylinder function `D_{-3/2}` from its integral representation
//!
//! `D_{-3/2}(z) = (2/√π) e^{-z²/2} ∫_0^∞ e^{-zs - s²/2} s^{1/2} ds`,
//!
//! which is taken as the definition. The substitution `s = t²` removes the
//! square-root endpoint behaviour before Gauss–Kronrod is applied.

use super::quadrature::{integrate_segment, Estimate, Tolerance};
use crate::error::{domain, Error, Result};
use num_complex::Complex64 as C64;
use std::f64::consts::PI;

/// `∫_0^∞ e^{-zs - s²/2} s^{1/2} ds`.
pub fn pcf_bare_integral(z: C64) -> Result<Estimate> {
    if !z.is_finite() {
        return domain(format!("non-finite argument {z}"));
    }
    // Upper limit where |integrand| < e^{-60}: t⁴/2 + Re z t² >= 60 + growth margin.
    let a = z.re;
    let t2 = -a + (a * a + 2.0 * 60.0).sqrt();
    let upper = t2.max(1e-3).sqrt() * 1.1 + 1.0;
    let f = |t: C64| {
        let t2 = t * t;
        2.0 * t2 * (-z * t2 - 0.5 * t2 * t2).exp()
    };
    let r = integrate_segment(f, C64::new(0.0, 0.0), C64::new(upper, 0.0), Tolerance::new(1e-14, 1e-300, 2000));
    if !r.value.is_finite() {
        return Err(Error::Numeric(format!("D_(-3/2) integral not finite at z = {z}")));
    }
    if !r.converged {
        return Err(Error::Accuracy {
            value: r.value,
            error: r.error,
            target: 1e-14,
            context: format!("D_(-3/2) integral at z = {z}"),
        });
    }
    Ok(r.estimate())
}

/// `D_{-3/2}(z)` with its quadrature error estimate.
pub fn parabolic_cylinder_d_neg32(z: C64) -> Result<Estimate> {
    let bare = pcf_bare_integral(z)?;
    let pre = 2.0 / PI.sqrt() * (-0.5 * z * z).exp();
    Ok(bare * pre)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn value_at_origin() {
        // 2^{3/4} Γ(3/4) / √π
        let gamma_3_4 = 1.225_416_702_465_178;
        let exact = 2f64.powf(0.75) * gamma_3_4 / PI.sqrt();
        let v = parabolic_cylinder_d_neg32(C64::new(0.0, 0.0)).unwrap().value;
        assert!((v.re - exact).abs() < 1e-12 && v.im.abs() < 1e-15);
        assert!((v.re - 1.1628).abs() < 1e-4);
    }

    #[test]
    fn decreasing_on_positive_axis() {
        let vals: Vec<f64> = [2.0, 4.0, 8.0]
            .iter()
            .map(|&x| parabolic_cylinder_d_neg32(C64::new(x, 0.0)).unwrap().value.norm())
            .collect();
        assert!(vals[0] > vals[1] && vals[1] > vals[2]);
    }

    #[test]
    fn factorization_is_exact() {
        let z = C64::new(0.7, -1.3);
        let bare = pcf_bare_integral(z).unwrap().value;
        let d = parabolic_cylinder_d_neg32(z).unwrap().value;
        let pre = 2.0 / PI.sqrt() * (-0.5 * z * z).exp();
        assert_eq!(d, bare * pre);
    }
}
