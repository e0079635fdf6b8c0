//! Paraxial boundary-integral diffraction by elongated bodies of revolution.
//!
//! The attenuation function `u` (total field `e^{ikx} u`, time factor
//! `e^{-iωt}`) obeys `u_x + (2ik)^{-1} Δ⊥u = 0` outside the body `r < f(x)`
//! with `∂u/∂r = ikḟ u` on its surface. Surface values satisfy a Volterra
//! equation in `x`, solved here by marching and by iteration; the cone has a
//! closed-form solution used as the oracle.

pub mod error;
pub mod geometry;
pub mod kernels;
pub mod cone;
pub mod volterra;
pub mod observables;
pub mod numerics;

pub use error::{Error, Result};
pub use num_complex::Complex64;
