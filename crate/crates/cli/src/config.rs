//! Run configuration: a `key = value` text file plus `--set` overrides.

use paraxial::geometry::{Profile, WaveParams};
use paraxial::volterra::{AxialGrid, SolveOptions};
use paraxial::Complex64 as C64;
use sha2::{Digest, Sha256};
use std::collections::BTreeMap;
use std::fmt;

#[derive(Debug, thiserror::Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read { path: String, source: std::io::Error },
    #[error("config line {line}: expected `key = value`, got `{text}`")]
    Syntax { line: usize, text: String },
    #[error("unknown config key `{0}`")]
    UnknownKey(String),
    #[error("config field `{field}`: {message}")]
    Field { field: &'static str, message: String },
}

fn field(field: &'static str, message: impl fmt::Display) -> ConfigError {
    ConfigError::Field {
        field,
        message: message.to_string(),
    }
}

/// Every recognised key with its default value.
const KEYS: &[(&str, &str)] = &[
    ("geometry", "cone"),
    ("alpha", "0.1"),
    ("x1", "0"),
    ("x2", "10"),
    ("radius", "1"),
    ("k", "1000"),
    ("eta", "2e-3"),
    ("theta", "0"),
    ("extrapolate", "false"),
    ("etas", "4e-3,2e-3,1e-3"),
    ("grid", "y"),
    ("start", "0"),
    ("end", "20"),
    ("nodes", "800"),
    ("solver", "marching"),
    ("max_terms", "200"),
    ("series_tolerance", "1e-6"),
    ("n_max", "auto"),
    ("tolerance", "1e-8"),
    ("target_x", "1"),
    ("target_r", "0.2"),
    ("target_phi", "0"),
    ("theta_star", "0,0.01,0.02,0.05"),
    ("phi_star", "0"),
    ("planes", "auto"),
    ("x_star", "1"),
    ("samples", "20"),
    ("mode", "0"),
    ("threshold", "0.3"),
];

/// Raw key-value settings with defaults filled in.
#[derive(Debug, Clone, PartialEq)]
pub struct Settings {
    values: BTreeMap<String, String>,
}

impl Default for Settings {
    fn default() -> Self {
        Self {
            values: KEYS.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect(),
        }
    }
}

impl Settings {
    pub fn apply_text(&mut self, text: &str) -> Result<(), ConfigError> {
        for (i, raw) in text.lines().enumerate() {
            let line = raw.split('#').next().unwrap_or("").trim();
            if line.is_empty() {
                continue;
            }
            let (k, v) = line.split_once('=').ok_or_else(|| ConfigError::Syntax {
                line: i + 1,
                text: raw.to_string(),
            })?;
            self.set(k.trim(), v.trim())?;
        }
        Ok(())
    }

    pub fn set(&mut self, key: &str, value: &str) -> Result<(), ConfigError> {
        match self.values.get_mut(key) {
            Some(slot) => {
                *slot = value.to_string();
                Ok(())
            }
            None => Err(ConfigError::UnknownKey(key.to_string())),
        }
    }

    pub fn get(&self, key: &str) -> &str {
        &self.values[key]
    }

    /// Canonical `key=value` lines, sorted by key.
    pub fn canonical(&self) -> String {
        self.values.iter().map(|(k, v)| format!("{k}={v}\n")).collect()
    }

    pub fn hash(&self) -> String {
        hex::encode(Sha256::digest(self.canonical().as_bytes()))
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Solver {
    Marching,
    Neumann,
    Analytic,
}

/// Validated configuration.
#[derive(Debug, Clone)]
pub struct RunConfig {
    pub settings: Settings,
    pub profile: Profile,
    pub wave: WaveParams,
    pub grid: AxialGrid,
    pub solver: Solver,
    pub max_terms: usize,
    pub series_tolerance: f64,
    pub n_max: Option<i32>,
    pub extrapolate: Option<Vec<f64>>,
    pub tolerance: f64,
    /// Reconstruction targets: every `(x, r)` pair of the two lists at one `φ`.
    pub target_x: Vec<f64>,
    pub target_r: Vec<f64>,
    pub target_phi: f64,
    pub theta_star: Vec<f64>,
    pub phi_star: f64,
    pub planes: Option<Vec<f64>>,
    pub x_star: f64,
    pub samples: usize,
    pub mode: i32,
    pub threshold: f64,
}

fn num(s: &Settings, key: &'static str) -> Result<f64, ConfigError> {
    let v = s.get(key);
    v.parse::<f64>().ok().filter(|x| x.is_finite()).ok_or_else(|| field(key, format!("`{v}` is not a finite number")))
}

fn count(s: &Settings, key: &'static str) -> Result<usize, ConfigError> {
    let v = s.get(key);
    v.parse::<usize>().map_err(|_| field(key, format!("`{v}` is not a nonnegative integer")))
}

fn list(s: &Settings, key: &'static str) -> Result<Vec<f64>, ConfigError> {
    let v = s.get(key);
    v.split(',')
        .map(|t| t.trim().parse::<f64>().ok().filter(|x| x.is_finite()))
        .collect::<Option<Vec<_>>>()
        .filter(|l| !l.is_empty())
        .ok_or_else(|| field(key, format!("`{v}` is not a comma-separated list of numbers")))
}

impl RunConfig {
    pub fn from_settings(settings: Settings) -> Result<Self, ConfigError> {
        let s = &settings;
        let profile = match s.get("geometry") {
            "cone" => Profile::cone(num(s, "alpha")?),
            "spindle" => Profile::spindle(num(s, "alpha")?, num(s, "x1")?, num(s, "x2")?),
            "cylinder" => Profile::cylinder(num(s, "radius")?),
            other => return Err(field("geometry", format!("`{other}` is not one of cone, spindle, cylinder"))),
        }
        .map_err(|e| field("geometry", e))?;
        let k = num(s, "k")?;
        let eta = num(s, "eta")?;
        let wave = WaveParams::new(C64::new(k, k * eta), num(s, "theta")?).map_err(|e| field("k", e))?;
        let extrapolate = match s.get("extrapolate") {
            "true" => {
                let etas = list(s, "etas")?;
                if etas.len() < 2 || etas.iter().any(|&e| !(e > 0.0)) {
                    return Err(field("etas", "need at least two positive values"));
                }
                Some(etas)
            }
            "false" => None,
            other => return Err(field("extrapolate", format!("`{other}` is not true or false"))),
        };
        let nodes = count(s, "nodes")?;
        let (a, b) = (num(s, "start")?, num(s, "end")?);
        let grid = match s.get("grid") {
            "y" => {
                let alpha = profile.cone_alpha().unwrap_or(num(s, "alpha")?);
                AxialGrid::uniform_in_y(&wave, alpha, a, b, nodes)
            }
            "x" => AxialGrid::uniform(a, b, nodes),
            "body" => {
                if !profile.is_compact() {
                    return Err(field("grid", "`body` needs a compact geometry"));
                }
                AxialGrid::uniform(profile.x_start(), profile.x_end(), nodes)
            }
            other => return Err(field("grid", format!("`{other}` is not one of y, x, body"))),
        }
        .map_err(|e| field("nodes", e))?;
        let (g0, g1) = (grid.nodes()[0], *grid.nodes().last().unwrap());
        if g0 < profile.x_start() || g1 > profile.x_end() {
            return Err(field("end", format!("grid [{g0}, {g1}] leaves the body [{}, {}]", profile.x_start(), profile.x_end())));
        }
        let solver = match s.get("solver") {
            "marching" => Solver::Marching,
            "neumann" => Solver::Neumann,
            "analytic" => Solver::Analytic,
            other => return Err(field("solver", format!("`{other}` is not one of marching, neumann, analytic"))),
        };
        if solver == Solver::Analytic && profile.cone_alpha().is_none() {
            return Err(field("solver", "the analytic solution exists for the cone only"));
        }
        let n_max = match s.get("n_max") {
            "auto" => None,
            v => Some(v.parse::<i32>().ok().filter(|n| *n >= 0).ok_or_else(|| field("n_max", format!("`{v}` is not `auto` or a nonnegative integer")))?),
        };
        let tolerance = num(s, "tolerance")?;
        if !(tolerance > 0.0 && tolerance < 1.0) {
            return Err(field("tolerance", "must lie in (0, 1)"));
        }
        let planes = match s.get("planes") {
            "auto" => None,
            _ => Some(list(s, "planes")?),
        };
        let theta_star = list(s, "theta_star")?;
        if theta_star.iter().any(|&t| t < 0.0) {
            return Err(field("theta_star", "angles must be nonnegative"));
        }
        let mode = s.get("mode").parse::<i32>().map_err(|_| field("mode", "not an integer"))?;
        Ok(Self {
            profile,
            wave,
            grid,
            solver,
            max_terms: count(s, "max_terms")?,
            series_tolerance: num(s, "series_tolerance")?,
            n_max,
            extrapolate,
            tolerance,
            target_x: list(s, "target_x")?,
            target_r: list(s, "target_r")?,
            target_phi: num(s, "target_phi")?,
            theta_star,
            phi_star: num(s, "phi_star")?,
            planes,
            x_star: num(s, "x_star")?,
            samples: count(s, "samples")?.max(1),
            mode,
            threshold: num(s, "threshold")?,
            settings,
        })
    }

    pub fn solve_options(&self) -> SolveOptions {
        let mut o = SolveOptions::default();
        o.weights.relative_tolerance = self.tolerance;
        o
    }

    /// Modes carried by the surface solution.
    pub fn modes(&self) -> Vec<i32> {
        match self.n_max {
            Some(n) if self.wave.theta > 0.0 => (-n..=n).collect(),
            Some(_) => vec![0],
            None => paraxial::volterra::required_modes(&self.wave, &self.profile, &self.grid),
        }
    }
}
