//! Special functions and quadrature shared by every other module.

pub mod bessel;
pub mod pcf;
pub mod quadrature;

pub use bessel::{bessel_j, bessel_j_deriv, bessel_y, bessel_y_deriv, hankel1, hankel1_deriv, hankel1_scaled, hankel2_scaled};
pub use pcf::{parabolic_cylinder_d_neg32, pcf_bare_integral};
pub use quadrature::{
    extrapolate_to_zero, integrate_path, integrate_segment, oscillatory_integral, periodic_trapezoid, wynn_epsilon, Adaptive, Estimate,
    GaussLegendre, QuadValue, QuadratureSpec, Tolerance,
};
