//! Subcommand bodies. Each returns the tables it produced; `main` writes them.

use crate::config::{RunConfig, Solver};
use crate::output::Table;
use paraxial::cone::{offsurface_field, penumbra_field, penumbra_field_uncorrected, surface_field_sc, surface_field_sc_complex};
use paraxial::geometry::{validate_paraxial, ParaxialityReport, Verdict, WaveParams};
use paraxial::kernels::{KernelEvaluator, SpacePoint};
use paraxial::observables::{directivity_checked, optical_theorem, reconstruct_point, incident_field, PlaneOptions};
use paraxial::volterra::{incident_rhs, solve_mode_set, IterationTrace, ModalSurfaceField, VolterraSystem, WeightOptions};
use paraxial::Complex64 as C64;

#[derive(Debug, thiserror::Error)]
pub enum CommandError {
    #[error("{0}")]
    Usage(String),
    #[error(transparent)]
    Numeric(#[from] paraxial::Error),
}

pub type Outcome = Result<Vec<(String, Table)>, CommandError>;

fn usage<T>(msg: impl Into<String>) -> Result<T, CommandError> {
    Err(CommandError::Usage(msg.into()))
}

fn one(name: &str, t: Table) -> Outcome {
    Ok(vec![(name.to_string(), t)])
}

/// Wavenumber at which observables are evaluated: real after extrapolation.
fn observation_wave(cfg: &RunConfig) -> WaveParams {
    if cfg.extrapolate.is_some() {
        cfg.wave.at_eta(0.0)
    } else {
        cfg.wave
    }
}

fn cone_y(cfg: &RunConfig, x: f64) -> f64 {
    cfg.profile.cone_alpha().map_or(f64::NAN, |a| cfg.wave.k.re * a * a * x)
}

fn analytic_usc(cfg: &RunConfig, x: f64) -> Result<C64, CommandError> {
    let alpha = cfg.profile.cone_alpha().ok_or_else(|| CommandError::Usage("the analytic solution exists for the cone only".into()))?;
    if x == 0.0 {
        return Ok(C64::new(0.0, 0.0));
    }
    let w = observation_wave(cfg);
    let y = w.k * alpha * alpha * x;
    let e = if y.im == 0.0 { surface_field_sc(y.re)? } else { surface_field_sc_complex(y)? };
    Ok(e.value)
}

/// Neumann series of mode `n` on the configured grid.
fn neumann_series(cfg: &RunConfig, n: i32) -> Result<(Vec<C64>, IterationTrace), CommandError> {
    let ke = KernelEvaluator::modal(cfg.profile, cfg.wave, n);
    let opts = WeightOptions {
        relative_tolerance: cfg.tolerance,
        ..WeightOptions::default()
    };
    let sys = VolterraSystem::assemble(&ke, &cfg.grid, &opts)?;
    Ok(sys.neumann(&incident_rhs(&cfg.wave, &cfg.profile, n, &cfg.grid), cfg.max_terms.max(1), cfg.series_tolerance)?)
}

/// Surface fields for every required mode, by the configured solver.
pub fn surface_fields(cfg: &RunConfig) -> Result<Vec<ModalSurfaceField>, CommandError> {
    let modes = cfg.modes();
    match cfg.solver {
        Solver::Marching => Ok(solve_mode_set(&cfg.profile, &cfg.wave, &cfg.grid, &modes, cfg.extrapolate.as_deref(), &cfg.solve_options())?),
        Solver::Neumann => {
            if cfg.extrapolate.is_some() {
                return usage("η-extrapolation is implemented for the marching solver");
            }
            modes
                .iter()
                .map(|&n| {
                    let (values, _) = neumann_series(cfg, n.abs())?;
                    Ok(ModalSurfaceField {
                        mode: n,
                        grid: cfg.grid.clone(),
                        values,
                    })
                })
                .collect()
        }
        Solver::Analytic => {
            if cfg.wave.theta != 0.0 {
                return usage("the analytic cone solution is for axial incidence (theta = 0)");
            }
            let values = cfg.grid.nodes().iter().map(|&x| analytic_usc(cfg, x).map(|u| 1.0 + u)).collect::<Result<_, _>>()?;
            Ok(vec![ModalSurfaceField {
                mode: 0,
                grid: cfg.grid.clone(),
                values,
            }])
        }
    }
}

pub fn validate(cfg: &RunConfig) -> (ParaxialityReport, Table) {
    let r = validate_paraxial(&cfg.profile, &cfg.wave, cfg.threshold);
    let mut t = Table::new(&["condition", "value", "threshold", "verdict"]);
    for (i, c) in r.checks.iter().enumerate() {
        let v = match c.verdict {
            Verdict::Pass => 0.0,
            Verdict::Warn => 1.0,
            Verdict::Fail => 2.0,
        };
        t.push(vec![i as f64, c.value, c.threshold, v]);
    }
    (r, t)
}

/// `K_n(x*, x)` in closed form and by angular quadrature at `samples` sources.
pub fn kernel(cfg: &RunConfig) -> Outcome {
    let ke = KernelEvaluator::modal(cfg.profile, cfg.wave, cfg.mode);
    let x0 = cfg.grid.nodes()[0];
    let xs = cfg.x_star;
    if !(xs > x0) {
        return usage(format!("x_star = {xs} must exceed the grid start {x0}"));
    }
    let mut t = Table::new(&["x", "delta", "re_closed", "im_closed", "re_reference", "im_reference", "reference_error", "relative_difference"]);
    for j in 0..cfg.samples {
        let x = x0 + (xs - x0) * j as f64 / cfg.samples as f64;
        let c = ke.modal_closed(xs, x)?;
        let r = ke.modal_reference(xs, x)?;
        let diff = (c - r.value).norm();
        let rel = if diff == 0.0 { 0.0 } else { diff / r.value.norm() };
        t.push(vec![x, xs - x, c.re, c.im, r.value.re, r.value.im, r.error, rel]);
    }
    one("kernel", t)
}

pub fn solve(cfg: &RunConfig) -> Outcome {
    let mut out = Vec::new();
    if cfg.solver == Solver::Neumann {
        let mut s = Table::new(&["mode", "term", "relative_term_norm"]);
        let mut modes = cfg.modes().iter().map(|n| n.abs()).collect::<Vec<_>>();
        modes.dedup();
        for n in modes {
            let (_, trace) = neumann_series(cfg, n)?;
            for (m, r) in trace.residual_norms.iter().enumerate() {
                s.push(vec![n as f64, m as f64, *r]);
            }
        }
        out.push(("series".to_string(), s));
    }
    let fields = surface_fields(cfg)?;
    let w = observation_wave(cfg);
    let mut t = Table::new(&["mode", "x", "y", "re_u", "im_u", "abs_u", "re_usc", "im_usc"]);
    for f in &fields {
        let sc = f.scattered(&w, &cfg.profile);
        for ((&x, u), s) in f.grid.nodes().iter().zip(&f.values).zip(sc) {
            t.push(vec![f.mode as f64, x, cone_y(cfg, x), u.re, u.im, u.norm(), s.re, s.im]);
        }
    }
    out.insert(0, ("solve".to_string(), t));
    Ok(out)
}

pub fn analytic(cfg: &RunConfig) -> Outcome {
    let mut t = Table::new(&["x", "y", "re_usc", "im_usc", "abs_usc"]);
    for &x in cfg.grid.nodes() {
        let u = analytic_usc(cfg, x)?;
        t.push(vec![x, cone_y(cfg, x), u.re, u.im, u.norm()]);
    }
    one("analytic", t)
}

/// Field map over every `(target_x, target_r)` pair. For the cone at axial
/// incidence a second table holds the closed-form off-surface field.
pub fn reconstruct(cfg: &RunConfig) -> Outcome {
    let fields = surface_fields(cfg)?;
    let w = observation_wave(cfg);
    let phi = cfg.target_phi;
    let mut t = Table::new(&["x", "r", "phi", "re_usc", "im_usc", "re_u", "im_u", "abs_u"]);
    let mut closed = Table::new(&["x", "r", "re_usc", "im_usc", "abs_usc"]);
    let cone = cfg.profile.cone_alpha().filter(|_| w.theta == 0.0);
    for &x in &cfg.target_x {
        for &r in &cfg.target_r {
            let p = SpacePoint::new(x, r, phi)?;
            let sc = reconstruct_point(&fields, &cfg.profile, &w, &p)?;
            let tot = sc + incident_field(&w, &p);
            t.push(vec![x, r, phi, sc.re, sc.im, tot.re, tot.im, tot.norm()]);
            if let Some(alpha) = cone {
                let c = offsurface_field(&w, alpha, x, r)?.value;
                closed.push(vec![x, r, c.re, c.im, c.norm()]);
            }
        }
    }
    let mut out = vec![("reconstruct".to_string(), t)];
    if cone.is_some() {
        out.push(("reconstruct_closed_form".to_string(), closed));
    }
    Ok(out)
}

pub fn directivity(cfg: &RunConfig) -> Outcome {
    let fields = surface_fields(cfg)?;
    let w = observation_wave(cfg);
    let mut t = Table::new(&["theta_star", "phi_star", "re_t", "im_t", "abs_t", "quadrature_difference"]);
    for &th in &cfg.theta_star {
        let (d, chk) = directivity_checked(&fields, &cfg.profile, &w, th, cfg.phi_star)?;
        t.push(vec![th, cfg.phi_star, d.value.re, d.value.im, d.value.norm(), chk.relative_difference]);
    }
    one("directivity", t)
}

/// Default planes at half and one body length behind the scatterer.
fn planes(cfg: &RunConfig) -> Vec<f64> {
    cfg.planes.clone().unwrap_or_else(|| {
        let (a, b) = (cfg.profile.x_start(), cfg.profile.x_end());
        vec![b + 0.5 * (b - a), b + (b - a)]
    })
}

pub fn optical(cfg: &RunConfig) -> Outcome {
    if cfg.extrapolate.is_none() && cfg.wave.k.im != 0.0 {
        return usage("the optical theorem needs real k: set eta = 0 or extrapolate = true");
    }
    let fields = surface_fields(cfg)?;
    let w = observation_wave(cfg);
    let mut t = Table::new(&["plane_x", "lhs", "rhs", "residual", "r_max", "tail", "samples"]);
    for x in planes(cfg) {
        let o = optical_theorem(&fields, &cfg.profile, &w, x, &PlaneOptions::default())?;
        t.push(vec![x, o.lhs.value, o.rhs, o.residual, o.lhs.r_max, o.lhs.tail, o.lhs.samples as f64]);
    }
    one("optical_theorem", t)
}

/// Partial sums `|Σ_{m<=M} U^(m)|` of the cone iteration series, `M = 1..=12`,
/// beside the marching solution.
pub fn fig4(cfg: &RunConfig) -> Outcome {
    let ke = KernelEvaluator::modal(cfg.profile, cfg.wave, 0);
    let opts = WeightOptions {
        relative_tolerance: cfg.tolerance,
        ..WeightOptions::default()
    };
    let sys = VolterraSystem::assemble(&ke, &cfg.grid, &opts)?;
    let rhs = incident_rhs(&cfg.wave, &cfg.profile, 0, &cfg.grid);
    let (_, trace) = sys.neumann(&rhs, 12, 0.0)?;
    let march = sys.march(&rhs)?;
    let mut cols = vec!["y".to_string()];
    cols.extend((1..=12).map(|m| format!("abs_sum_{m}")));
    cols.push("abs_marching".into());
    let sums: Vec<Vec<C64>> = (1..=12).map(|m| trace.partial_sum(m)).collect();
    let mut t = Table {
        columns: cols,
        rows: Vec::new(),
    };
    for (j, &x) in cfg.grid.nodes().iter().enumerate() {
        let mut row = vec![cone_y(cfg, x)];
        row.extend(sums.iter().map(|s| s[j].norm()));
        row.push(march[j].norm());
        t.push(row);
    }
    one("fig4", t)
}

pub fn cone_vs_analytic(cfg: &RunConfig) -> Outcome {
    if cfg.profile.cone_alpha().is_none() {
        return usage("cone-vs-analytic needs geometry = cone");
    }
    let fields = solve_mode_set(&cfg.profile, &cfg.wave, &cfg.grid, &[0], cfg.extrapolate.as_deref(), &cfg.solve_options())?;
    let w = observation_wave(cfg);
    let sc = fields[0].scattered(&w, &cfg.profile);
    let mut t = Table::new(&["y", "re_marching", "im_marching", "re_analytic", "im_analytic", "abs_difference", "relative_difference"]);
    for (&x, s) in cfg.grid.nodes().iter().zip(sc) {
        let a = analytic_usc(cfg, x)?;
        let d = (s - a).norm();
        t.push(vec![cone_y(cfg, x), s.re, s.im, a.re, a.im, d, d / (1.0 + a).norm()]);
    }
    one("cone_vs_analytic", t)
}

/// Off-surface field against both penumbra formulas along `r/x` through `2α`
/// at `x = target_x`, for `γ√(kx)` in `[−4, 4]`.
pub fn penumbra(cfg: &RunConfig) -> Outcome {
    let alpha = match cfg.profile.cone_alpha() {
        Some(a) => a,
        None => return usage("penumbra needs geometry = cone"),
    };
    let w = observation_wave(cfg);
    let x = cfg.target_x[0];
    let kx = w.k.re * x;
    let mut t = Table::new(&["r_over_x", "gamma_sqrt_kx", "re_offsurface", "im_offsurface", "re_penumbra", "im_penumbra", "re_uncorrected", "im_uncorrected", "relative_error", "relative_error_uncorrected"]);
    let n = cfg.samples.max(2);
    for j in 0..n {
        let s = -4.0 + 8.0 * j as f64 / (n - 1) as f64;
        let gamma = s / kx.sqrt();
        let r = x * (2.0 * alpha - gamma);
        if r < alpha * x {
            continue;
        }
        let off = offsurface_field(&w, alpha, x, r)?.value;
        let pen = penumbra_field(&w, alpha, x, r)?;
        let pr = penumbra_field_uncorrected(&w, alpha, x, r)?;
        t.push(vec![r / x, s, off.re, off.im, pen.re, pen.im, pr.re, pr.im, (pen - off).norm() / off.norm(), (pr - off).norm() / off.norm()]);
    }
    one("penumbra", t)
}

/// Settings that a preset applies before the config file and overrides.
pub fn preset_base(name: &str) -> Option<&'static [(&'static str, &'static str)]> {
    Some(match name {
        "fig4" => &[("geometry", "cone"), ("alpha", "0.1"), ("k", "1000"), ("eta", "0"), ("grid", "y"), ("start", "0"), ("end", "20"), ("nodes", "400")],
        "cone-vs-analytic" => &[
            ("geometry", "cone"),
            ("alpha", "0.1"),
            ("k", "1000"),
            ("eta", "0"),
            ("extrapolate", "true"),
            ("grid", "y"),
            ("start", "0"),
            ("end", "20"),
            ("nodes", "1600"),
        ],
        "penumbra" => &[("geometry", "cone"), ("alpha", "0.1"), ("k", "10000"), ("eta", "0"), ("target_x", "1"), ("samples", "81"), ("nodes", "1")],
        _ => return None,
    })
}
