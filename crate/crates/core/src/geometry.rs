//! Bodies of revolution `r < f(x)` and the paraxiality diagnostics.

use crate::error::{domain, Result};
use num_complex::Complex64 as C64;
use serde::{Deserialize, Serialize};

/// Shape families with analytic derivatives.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "lowercase")]
pub enum Shape {
    /// `f = αx`, `x > 0`.
    Cone { alpha: f64 },
    /// `f = α(x−x1)(x2−x)·4/(x2−x1)`, pointed at both ends.
    Spindle { alpha: f64, x1: f64, x2: f64 },
    /// `f = a` on `x >= 0`; a blunt body, used for kernel checks only.
    Cylinder { radius: f64 },
}

/// A body of revolution with its axial support `[x_start, x_end]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Profile {
    shape: Shape,
}

impl Profile {
    pub fn cone(alpha: f64) -> Result<Self> {
        if !(alpha > 0.0 && alpha < 1.0) {
            return domain(format!("cone half-angle slope {alpha} not in (0, 1)"));
        }
        Ok(Self { shape: Shape::Cone { alpha } })
    }

    pub fn spindle(alpha: f64, x1: f64, x2: f64) -> Result<Self> {
        if !(x1.is_finite() && x2.is_finite() && x2 > x1) {
            return domain(format!("spindle interval [{x1}, {x2}] is degenerate"));
        }
        if !(alpha > 0.0 && alpha.is_finite()) {
            return domain(format!("spindle alpha {alpha} must be positive"));
        }
        Ok(Self {
            shape: Shape::Spindle { alpha, x1, x2 },
        })
    }

    pub fn cylinder(radius: f64) -> Result<Self> {
        if !(radius > 0.0 && radius.is_finite()) {
            return domain(format!("cylinder radius {radius} must be positive"));
        }
        Ok(Self {
            shape: Shape::Cylinder { radius },
        })
    }

    pub fn shape(&self) -> Shape {
        self.shape
    }

    pub fn x_start(&self) -> f64 {
        match self.shape {
            Shape::Cone { .. } | Shape::Cylinder { .. } => 0.0,
            Shape::Spindle { x1, .. } => x1,
        }
    }

    /// `X₂`; `+∞` for the cone.
    pub fn x_end(&self) -> f64 {
        match self.shape {
            Shape::Cone { .. } | Shape::Cylinder { .. } => f64::INFINITY,
            Shape::Spindle { x2, .. } => x2,
        }
    }

    pub fn is_compact(&self) -> bool {
        self.x_end().is_finite()
    }

    pub fn contains(&self, x: f64) -> bool {
        x >= self.x_start() && x <= self.x_end()
    }

    /// Cone slope `α`, if this is a cone.
    pub fn cone_alpha(&self) -> Option<f64> {
        match self.shape {
            Shape::Cone { alpha } => Some(alpha),
            _ => None,
        }
    }

    pub fn f(&self, x: f64) -> f64 {
        self.f_c(C64::new(x, 0.0)).re
    }

    pub fn f_dot(&self, x: f64) -> f64 {
        self.f_dot_c(C64::new(x, 0.0)).re
    }

    pub fn f_ddot(&self, _x: f64) -> f64 {
        match self.shape {
            Shape::Cone { .. } | Shape::Cylinder { .. } => 0.0,
            Shape::Spindle { alpha, x1, x2 } => -8.0 * alpha / (x2 - x1),
        }
    }

    /// `f` continued to complex `x` (both families are polynomials).
    pub fn f_c(&self, x: C64) -> C64 {
        match self.shape {
            Shape::Cone { alpha } => alpha * x,
            Shape::Cylinder { radius } => C64::new(radius, 0.0),
            Shape::Spindle { alpha, x1, x2 } => (x - x1) * (x2 - x) * (4.0 * alpha / (x2 - x1)),
        }
    }

    pub fn f_dot_c(&self, x: C64) -> C64 {
        match self.shape {
            Shape::Cone { alpha } => C64::new(alpha, 0.0),
            Shape::Cylinder { .. } => C64::new(0.0, 0.0),
            Shape::Spindle { alpha, x1, x2 } => (x1 + x2 - 2.0 * x) * (4.0 * alpha / (x2 - x1)),
        }
    }

    /// `f(x + d) − f(x) − d·ḟ(x)` without cancellation.
    pub fn taylor_remainder(&self, _x: C64, d: C64) -> C64 {
        0.5 * self.f_ddot(0.0) * d * d
    }

    /// `sup |ḟ|` over the support.
    pub fn max_slope(&self) -> f64 {
        match self.shape {
            Shape::Cone { alpha } => alpha,
            Shape::Cylinder { .. } => 0.0,
            Shape::Spindle { alpha, .. } => 4.0 * alpha,
        }
    }

    /// `sup f` over the support (`+∞` for the cone).
    pub fn max_radius(&self) -> f64 {
        match self.shape {
            Shape::Cone { .. } => f64::INFINITY,
            Shape::Cylinder { radius } => radius,
            Shape::Spindle { alpha, x1, x2 } => alpha * (x2 - x1),
        }
    }

    /// `sup |f̈|`.
    pub fn max_curvature(&self) -> f64 {
        self.f_ddot(0.0).abs()
    }
}

/// Complex wavenumber and incidence angle.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct WaveParams {
    pub k: C64,
    pub theta: f64,
}

impl WaveParams {
    pub fn new(k: C64, theta: f64) -> Result<Self> {
        if !(k.re > 0.0 && k.re.is_finite()) {
            return domain(format!("Re k = {} must be positive", k.re));
        }
        if !(k.im >= 0.0 && k.im.is_finite()) {
            return domain(format!("Im k = {} must be nonnegative", k.im));
        }
        if !(theta >= 0.0 && theta.is_finite()) {
            return domain(format!("incidence angle {theta} must be nonnegative"));
        }
        Ok(Self { k, theta })
    }

    /// `k = k_re (1 + iη)`.
    pub fn with_absorption(k_re: f64, eta: f64, theta: f64) -> Result<Self> {
        Self::new(C64::new(k_re, k_re * eta), theta)
    }

    /// Relative absorption `Im k / Re k`.
    pub fn eta(&self) -> f64 {
        self.k.im / self.k.re
    }

    /// Same parameters with a different relative absorption.
    pub fn at_eta(&self, eta: f64) -> Self {
        Self {
            k: C64::new(self.k.re, self.k.re * eta),
            theta: self.theta,
        }
    }
}

/// Outcome of one paraxiality condition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Verdict {
    /// Value at or below the threshold.
    Pass,
    /// Above the threshold but not above 1.
    Warn,
    /// Above 1: the small parameter is not small.
    Fail,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConditionCheck {
    pub name: &'static str,
    pub value: f64,
    pub threshold: f64,
    pub passed: bool,
    pub verdict: Verdict,
}

impl ConditionCheck {
    fn new(name: &'static str, value: f64, threshold: f64) -> Self {
        let passed = value <= threshold;
        let verdict = if passed {
            Verdict::Pass
        } else if value <= 1.0 {
            Verdict::Warn
        } else {
            Verdict::Fail
        };
        Self {
            name,
            value,
            threshold,
            passed,
            verdict,
        }
    }
}

/// Incidence angle, surface slope and Fock angle against a threshold.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct ParaxialityReport {
    pub theta: f64,
    pub max_slope: f64,
    /// `sup (|f̈| / Re k)^{1/3}`.
    pub max_fock_angle: f64,
    /// Longitudinal Fock scale `|f̈|^{-2/3} (Re k)^{-1/3}` (infinite without curvature).
    pub fock_length: f64,
    pub checks: [ConditionCheck; 3],
}

impl ParaxialityReport {
    pub fn all_pass(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    pub fn worst(&self) -> Verdict {
        self.checks.iter().map(|c| c.verdict).max().unwrap_or(Verdict::Pass)
    }
}

pub const DEFAULT_PARAXIAL_THRESHOLD: f64 = 0.3;

pub fn validate_paraxial(profile: &Profile, wp: &WaveParams, threshold: f64) -> ParaxialityReport {
    let curv = profile.max_curvature();
    let fock = (curv / wp.k.re).cbrt();
    let fock_length = if curv > 0.0 {
        curv.powf(-2.0 / 3.0) * wp.k.re.powf(-1.0 / 3.0)
    } else {
        f64::INFINITY
    };
    let slope = profile.max_slope();
    ParaxialityReport {
        theta: wp.theta,
        max_slope: slope,
        max_fock_angle: fock,
        fock_length,
        checks: [
            ConditionCheck::new("incidence angle", wp.theta, threshold),
            ConditionCheck::new("surface slope", slope, threshold),
            ConditionCheck::new("fock angle", fock, threshold),
        ],
    }
}
