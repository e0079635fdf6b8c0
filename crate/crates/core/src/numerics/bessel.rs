//! Bessel and Hankel functions of integer order and complex argument.
//!
//! `J_n` is computed here (ascending series near the origin, Miller backward
//! recurrence elsewhere). `Y_n` and `H^(1)_n` wrap the Amos routines from
//! `complex-bessel`. Exponentially scaled Hankel functions switch to the
//! large-argument Hankel expansion once `|z| >= max(20, n^2)`, which stays
//! finite for the huge arguments that appear next to a kernel diagonal.

use crate::error::{domain, Error, Result};
use num_complex::Complex64 as C64;
use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

/// Largest order accepted by the public wrappers.
pub const MAX_ORDER: i32 = 512;
/// Documented working range `|z| < MAX_ARG` of the public wrappers.
pub const MAX_ARG: f64 = 1e4;

const I: C64 = C64 { re: 0.0, im: 1.0 };

fn check_args(n: i32, z: C64) -> Result<()> {
    if n.abs() > MAX_ORDER {
        return domain(format!("order {n} outside |n| <= {MAX_ORDER}"));
    }
    if !(z.re.is_finite() && z.im.is_finite()) {
        return domain(format!("non-finite argument {z}"));
    }
    if z.norm() >= MAX_ARG {
        return domain(format!("|z| = {:e} outside working range {MAX_ARG:e}", z.norm()));
    }
    Ok(())
}

/// `J_n(z)` for integer `n >= 0`.
pub fn bessel_j(n: i32, z: C64) -> Result<C64> {
    if n < 0 {
        return domain(format!("order {n} must be nonnegative"));
    }
    check_args(n, z)?;
    Ok(j_int(n, z))
}

/// `J_n'(z) = (J_{n-1}(z) - J_{n+1}(z)) / 2`.
pub fn bessel_j_deriv(n: i32, z: C64) -> Result<C64> {
    if n < 0 {
        return domain(format!("order {n} must be nonnegative"));
    }
    check_args(n + 1, z)?;
    let [a, _, b] = j_triple(n, z);
    Ok(0.5 * (a - b))
}

/// `Y_n(z)`, `z != 0`.
pub fn bessel_y(n: i32, z: C64) -> Result<C64> {
    if n < 0 {
        return domain(format!("order {n} must be nonnegative"));
    }
    check_args(n, z)?;
    if z == C64::new(0.0, 0.0) {
        return Err(Error::Singular(format!("Y_{n} at z = 0")));
    }
    amos(complex_bessel::bessely(n as f64, z), "Y", n, z)
}

/// `Y_n'(z)`.
pub fn bessel_y_deriv(n: i32, z: C64) -> Result<C64> {
    let lo = signed_order(n - 1, z, bessel_y)?;
    let hi = bessel_y(n + 1, z)?;
    Ok(0.5 * (lo - hi))
}

/// `H^(1)_n(z) = J_n(z) + i Y_n(z)`, `z != 0`, `Im z >= 0`.
pub fn hankel1(n: i32, z: C64) -> Result<C64> {
    if n < 0 {
        return domain(format!("order {n} must be nonnegative"));
    }
    check_args(n, z)?;
    if z.im < 0.0 {
        return domain(format!("Im z = {} < 0", z.im));
    }
    if z == C64::new(0.0, 0.0) {
        return Err(Error::Singular(format!("H^(1)_{n} at z = 0")));
    }
    amos(complex_bessel::hankel1(n as f64, z), "H1", n, z)
}

/// `dH^(1)_n/dz`; for `n = 0` this is `-H^(1)_1`.
pub fn hankel1_deriv(n: i32, z: C64) -> Result<C64> {
    let lo = signed_order(n - 1, z, hankel1)?;
    let hi = hankel1(n + 1, z)?;
    Ok(0.5 * (lo - hi))
}

/// `e^{-iz} H^(1)_n(z)` for any integer `n`, `z != 0`, `Re z >= 0` or `Im z >= 0`.
pub fn hankel1_scaled(n: i32, z: C64) -> Result<C64> {
    scaled_checked(n, z, 1.0).map(|(v, _)| v)
}

/// `e^{iz} H^(2)_n(z)` for any integer `n`, `z != 0`.
pub fn hankel2_scaled(n: i32, z: C64) -> Result<C64> {
    scaled_checked(n, z, -1.0).map(|(v, _)| v)
}

fn scaled_checked(n: i32, z: C64, sgn: f64) -> Result<(C64, C64)> {
    if n.abs() > MAX_ORDER || !(z.re.is_finite() && z.im.is_finite()) {
        return domain(format!("order {n} / argument {z} out of range"));
    }
    if z == C64::new(0.0, 0.0) {
        return Err(Error::Singular("scaled Hankel function at z = 0".into()));
    }
    let v = hankel_scaled_pair(n, z, sgn);
    if v.0.is_finite() && v.1.is_finite() {
        Ok(v)
    } else {
        Err(Error::Numeric(format!("scaled Hankel order {n} at {z} not finite")))
    }
}

fn signed_order(m: i32, z: C64, f: impl Fn(i32, C64) -> Result<C64>) -> Result<C64> {
    if m >= 0 {
        f(m, z)
    } else {
        let v = f(-m, z)?;
        Ok(if m % 2 == 0 { v } else { -v })
    }
}

fn amos(r: std::result::Result<C64, complex_bessel::Error>, what: &str, n: i32, z: C64) -> Result<C64> {
    match r {
        Ok(v) if v.is_finite() => Ok(v),
        Ok(v) => Err(Error::Numeric(format!("{what}_{n}({z}) = {v}"))),
        Err(e) => Err(Error::Numeric(format!("{what}_{n}({z}): {e:?}"))),
    }
}

/// `J_n(z)` for any integer order, no range checks.
pub(crate) fn j_int(n: i32, z: C64) -> C64 {
    let m = n.unsigned_abs() as usize;
    let v = with_block(m, z, |b| b[m]);
    if n < 0 && m % 2 == 1 {
        -v
    } else {
        v
    }
}

/// `[J_{n-1}, J_n, J_{n+1}]` for any integer `n`.
pub(crate) fn j_triple(n: i32, z: C64) -> [C64; 3] {
    let top = (n.unsigned_abs() + 1) as usize;
    with_block(top, z, |b| {
        let get = |k: i32| {
            let m = k.unsigned_abs() as usize;
            if k < 0 && m % 2 == 1 {
                -b[m]
            } else {
                b[m]
            }
        };
        [get(n - 1), get(n), get(n + 1)]
    })
}

fn with_block<T>(top: usize, z: C64, f: impl FnOnce(&[C64]) -> T) -> T {
    if top < 48 {
        let mut buf = [C64::new(0.0, 0.0); 48];
        j_block(z, &mut buf[..=top]);
        f(&buf[..=top])
    } else {
        let mut buf = vec![C64::new(0.0, 0.0); top + 1];
        j_block(z, &mut buf);
        f(&buf)
    }
}

/// Fills `out[m] = J_m(z)` for `m = 0..out.len()`.
pub(crate) fn j_block(z: C64, out: &mut [C64]) {
    let top = out.len() - 1;
    let a = z.norm();
    if a == 0.0 {
        out.iter_mut().for_each(|v| *v = C64::new(0.0, 0.0));
        out[0] = C64::new(1.0, 0.0);
        return;
    }
    if a <= 2.0 {
        for (m, slot) in out.iter_mut().enumerate() {
            *slot = j_series(m, z);
        }
        return;
    }
    let start = {
        let s = (top as f64).max(a) + 20.0 + 12.0 * a.cbrt();
        let s = s.ceil() as usize;
        s + (s & 1)
    };
    let two_over_z = 2.0 / z;
    let upper = z.im >= 0.0;
    // e^{-iz} = J0 + 2 sum (-i)^m J_m when Im z >= 0, else e^{iz} with i^m.
    let unit = if upper { C64::new(0.0, -1.0) } else { C64::new(0.0, 1.0) };
    let mut phase = unit.powu(start as u32);
    let mut jp1 = C64::new(0.0, 0.0);
    let mut jk = C64::new(1e-30, 0.0);
    let mut sum = C64::new(0.0, 0.0);
    let inv_unit = unit.conj();
    for k in (1..=start).rev() {
        if k <= top {
            out[k] = jk;
        }
        sum += 2.0 * phase * jk;
        let jm1 = (k as f64) * two_over_z * jk - jp1;
        jp1 = jk;
        jk = jm1;
        phase *= inv_unit;
        if jk.norm() > 1e250 {
            let s = 1e-250;
            jk *= s;
            jp1 *= s;
            sum *= s;
            for v in out.iter_mut().skip(k) {
                *v *= s;
            }
        }
    }
    out[0] = jk;
    sum += jk;
    let target = if upper { (-I * z).exp() } else { (I * z).exp() };
    let scale = target / sum;
    out.iter_mut().for_each(|v| *v *= scale);
}

fn j_series(m: usize, z: C64) -> C64 {
    let half = 0.5 * z;
    let mut lead = C64::new(1.0, 0.0);
    for j in 1..=m {
        lead *= half / j as f64;
    }
    let q = -half * half;
    let mut term = C64::new(1.0, 0.0);
    let mut sum = term;
    for k in 1..60 {
        term *= q / ((k * (m + k)) as f64);
        sum += term;
        if term.norm() <= 1e-17 * sum.norm() {
            break;
        }
    }
    lead * sum
}

/// Scaled Hankel function and the `z`-derivative of the scaled function.
///
/// `sgn = +1`: `h(z) = e^{-iz} H^(1)_n(z)`; `sgn = -1`: `h(z) = e^{iz} H^(2)_n(z)`.
pub(crate) fn hankel_scaled_pair(n: i32, z: C64, sgn: f64) -> (C64, C64) {
    let a = z.norm();
    let nn = (n as f64).abs();
    if a >= (nn * nn).max(20.0) && z.arg().abs() <= FRAC_PI_2 + 0.5 {
        return hankel_asymptotic(n, z, sgn);
    }
    let m = n.unsigned_abs() as i32;
    let f = |k: i32| -> C64 {
        let kk = k.unsigned_abs() as f64;
        let v = if sgn > 0.0 {
            complex_bessel::hankel1_scaled(kk, z)
        } else {
            complex_bessel::hankel2_scaled(kk, z)
        }
        .unwrap_or(C64::new(f64::NAN, f64::NAN));
        if k < 0 && k % 2 != 0 {
            -v
        } else {
            v
        }
    };
    let (lo, mid, hi) = (f(m - 1), f(m), f(m + 1));
    let mut d = 0.5 * (lo - hi) - sgn * I * mid;
    let mut v = mid;
    if n < 0 && m % 2 == 1 {
        v = -v;
        d = -d;
    }
    (v, d)
}

/// Both scaled pairs `(h, dh)` for `sgn = +1` and `sgn = −1`.
///
/// In the large-argument range the two expansions share their terms, with
/// odd terms of opposite sign, so one pass produces both.
pub(crate) fn hankel_scaled_both(n: i32, z: C64) -> [(C64, C64); 2] {
    let nn = (n as f64).abs();
    if z.norm() < (nn * nn).max(20.0) || z.arg().abs() > FRAC_PI_2 + 0.5 {
        return [hankel_scaled_pair(n, z, 1.0), hankel_scaled_pair(n, z, -1.0)];
    }
    let mu = 4.0 * (n as f64) * (n as f64);
    let step = I / z;
    let mut term = C64::new(1.0, 0.0);
    let (mut even, mut odd) = (term, C64::new(0.0, 0.0));
    let (mut deven, mut dodd) = (C64::new(-0.5, 0.0), C64::new(0.0, 0.0));
    let mut last = f64::INFINITY;
    for k in 1..80 {
        let c = (mu - ((2 * k - 1) * (2 * k - 1)) as f64) / (8.0 * k as f64);
        let next = term * c * step;
        let size = next.norm();
        if size > last {
            break;
        }
        term = next;
        last = size;
        let dt = term * (-(k as f64) - 0.5);
        if k % 2 == 0 {
            even += term;
            deven += dt;
        } else {
            odd += term;
            dodd += dt;
        }
        if size <= 1e-17 * even.norm() {
            break;
        }
    }
    let ph = n as f64 * FRAC_PI_2 + FRAC_PI_4;
    let root = (2.0 / (PI * z)).sqrt();
    let a1 = root * C64::from_polar(1.0, -ph);
    let a2 = root * C64::from_polar(1.0, ph);
    [(a1 * (even + odd), a1 * (deven + dodd) / z), (a2 * (even - odd), a2 * (deven - dodd) / z)]
}

/// Hankel large-argument expansion, truncated at the smallest term.
fn hankel_asymptotic(n: i32, z: C64, sgn: f64) -> (C64, C64) {
    let mu = 4.0 * (n as f64) * (n as f64);
    let step = C64::new(0.0, sgn) / z;
    let mut term = C64::new(1.0, 0.0);
    let mut sum = term;
    let mut dsum = C64::new(-0.5, 0.0);
    let mut last = f64::INFINITY;
    for k in 1..80 {
        let c = (mu - ((2 * k - 1) * (2 * k - 1)) as f64) / (8.0 * k as f64);
        let next = term * c * step;
        let size = next.norm();
        if size > last {
            break;
        }
        term = next;
        last = size;
        sum += term;
        dsum += term * (-(k as f64) - 0.5);
        if size <= 1e-17 * sum.norm() {
            break;
        }
    }
    let phase = C64::from_polar(1.0, -sgn * (n as f64 * FRAC_PI_2 + FRAC_PI_4));
    let amp = (2.0 / (PI * z)).sqrt() * phase;
    (amp * sum, amp * dsum / z)
}

#[cfg(test)]
mod tests {
    #[test]
    fn joint_expansion_matches_single() {
        for n in [-3, 0, 1, 4] {
            for z in [C64::new(25.0, 0.0), C64::new(40.0, 13.0), C64::new(60.0, -20.0), C64::new(5.0, 1.0)] {
                let [p, m] = hankel_scaled_both(n, z);
                let (p1, m1) = (hankel_scaled_pair(n, z, 1.0), hankel_scaled_pair(n, z, -1.0));
                for (a, b) in [(p.0, p1.0), (p.1, p1.1), (m.0, m1.0), (m.1, m1.1)] {
                    assert!((a - b).norm() <= 1e-14 * b.norm().max(1e-3), "n={n} z={z}");
                }
            }
        }
    }

    use super::*;
    use approx::assert_relative_eq;

    fn rel(a: C64, b: C64) -> f64 {
        (a - b).norm() / b.norm().max(1e-300)
    }

    #[test]
    fn origin_values() {
        assert_eq!(bessel_j(0, C64::new(0.0, 0.0)).unwrap(), C64::new(1.0, 0.0));
        assert_eq!(bessel_j(1, C64::new(0.0, 0.0)).unwrap(), C64::new(0.0, 0.0));
    }

    #[test]
    fn first_zero_of_j0() {
        assert!(bessel_j(0, C64::new(2.404826, 0.0)).unwrap().norm() < 1e-5);
    }

    #[test]
    fn j_matches_amos_over_plane() {
        for &(re, im) in &[(0.3, 0.1), (1.9, -0.5), (2.5, 0.0), (7.0, 3.0), (15.0, -8.0), (40.0, 0.2), (300.0, 1.0), (9.0, 40.0)] {
            let z = C64::new(re, im);
            for n in [0, 1, 2, 5, 17, 33] {
                let ours = bessel_j(n, z).unwrap();
                let reference = complex_bessel::besselj(n as f64, z).unwrap();
                assert!(rel(ours, reference) < 1e-12 || (ours - reference).norm() < 1e-15 * (z.im.abs()).exp(), "n={n} z={z} {ours} {reference}");
            }
        }
    }

    #[test]
    fn negative_orders_reflect() {
        let z = C64::new(3.2, 0.4);
        assert_relative_eq!((j_int(-3, z) + j_int(3, z)).norm(), 0.0, epsilon = 1e-15);
        assert_relative_eq!((j_int(-2, z) - j_int(2, z)).norm(), 0.0, epsilon = 1e-15);
    }

    #[test]
    fn y_and_h1_definitions() {
        let x = C64::new(3.7, 0.0);
        let h = hankel1(0, x).unwrap();
        let j = bessel_j(0, x).unwrap();
        assert!((h - j).re.abs() < 1e-14);
        let z = C64::new(2.0, 0.7);
        let d = hankel1_deriv(0, z).unwrap();
        assert!((d + hankel1(1, z).unwrap()).norm() < 1e-14);
        assert!(hankel1(0, C64::new(0.0, 0.0)).is_err());
    }

    #[test]
    fn h1_modulus_large_argument() {
        let x = 50.0;
        let m = hankel1(0, C64::new(x, 0.0)).unwrap().norm();
        let model = (2.0 / (PI * x)).sqrt();
        assert!((m / model - 1.0).abs() < 0.01);
    }

    #[test]
    fn asymptotic_and_amos_agree_at_crossover() {
        for &z in &[C64::new(21.0, 3.0), C64::new(35.0, -20.0), C64::new(60.0, 10.0)] {
            for n in [0, 1, 2, 4] {
                for sgn in [1.0, -1.0] {
                    let (v, d) = hankel_asymptotic(n, z, sgn);
                    let amos = |k: f64| if sgn > 0.0 { complex_bessel::hankel1_scaled(k, z).unwrap() } else { complex_bessel::hankel2_scaled(k, z).unwrap() };
                    let nf = n as f64;
                    let dref = 0.5 * (if n == 0 { -amos(1.0) } else { amos(nf - 1.0) } - amos(nf + 1.0)) - sgn * I * amos(nf);
                    assert!(rel(v, amos(nf)) < 1e-13, "n={n} z={z}");
                    assert!(rel(d, dref) < 1e-11, "n={n} z={z} {d} {dref}");
                }
            }
        }
    }

    #[test]
    fn scaled_hankel_finite_for_huge_arguments() {
        let (v, d) = hankel_scaled_pair(1, C64::new(1e12, -3e11), -1.0);
        assert!(v.is_finite() && d.is_finite());
        assert!(v.norm() * 1e6 > 0.0);
    }

    #[test]
    fn range_errors() {
        assert!(bessel_j(-1, C64::new(1.0, 0.0)).is_err());
        assert!(bessel_j(0, C64::new(2e4, 0.0)).is_err());
        assert!(bessel_j(MAX_ORDER + 1, C64::new(1.0, 0.0)).is_err());
    }
}
