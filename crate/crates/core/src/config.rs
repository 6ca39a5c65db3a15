//! Batch configuration and spectrum-file parsing.

use crate::error::{Error, Result};
use crate::jet::MAX_ORDER;
use crate::repmodels::{Series, SpectralParameter};
use crate::spectral::SpectrumEntry;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};
use std::collections::BTreeMap;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Command {
    NormSweep,
    InvariantBound,
    Dyadic,
    Geometry,
    SphericalCheck,
    Propagate,
    CuspScan,
    Selftest,
}

impl Command {
    pub fn name(&self) -> &'static str {
        match self {
            Command::NormSweep => "norm-sweep",
            Command::InvariantBound => "invariant-bound",
            Command::Dyadic => "dyadic",
            Command::Geometry => "geometry",
            Command::SphericalCheck => "spherical-check",
            Command::Propagate => "propagate",
            Command::CuspScan => "cusp-scan",
            Command::Selftest => "selftest",
        }
    }

    fn needs_lambdas(&self) -> bool {
        matches!(self, Command::NormSweep | Command::InvariantBound | Command::SphericalCheck)
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct LambdaSpec {
    #[serde(default)]
    pub re: f64,
    #[serde(default)]
    pub im: f64,
}

impl LambdaSpec {
    pub fn parameter(&self) -> SpectralParameter {
        SpectralParameter::from_lambda(Complex64::new(self.re, self.im))
    }
}

/// `points` values from `start` to `stop`, equally spaced in `ln`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GeometricGrid {
    pub start: f64,
    pub stop: f64,
    pub points: usize,
}

impl GeometricGrid {
    pub fn values(&self) -> Vec<f64> {
        if self.points == 1 {
            return vec![self.start];
        }
        let r = (self.stop / self.start).ln() / (self.points - 1) as f64;
        (0..self.points).map(|j| self.start * (r * j as f64).exp()).collect()
    }
}

/// Caps that keep a hostile config from requesting unbounded work.
pub const MAX_GRID_POINTS: usize = 4096;
pub const MAX_SAMPLES: usize = 1_000_000;

pub const TOLERANCE_KEYS: [&str; 6] = ["band_max", "r_squared_min", "exponent_tol", "slope_tol", "relative_tol", "dw_slope_max"];

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepConfig {
    pub command: Command,
    #[serde(default)]
    pub lambdas: Vec<LambdaSpec>,
    #[serde(default)]
    pub eps_grid: Option<GeometricGrid>,
    #[serde(default = "default_order")]
    pub sobolev_order: usize,
    #[serde(default)]
    pub output: Option<String>,
    #[serde(default)]
    pub seed: u64,
    #[serde(default)]
    pub tolerances: BTreeMap<String, f64>,
    /// Spectrum file for `propagate`; a seeded Weyl-law spectrum otherwise.
    #[serde(default)]
    pub spectrum: Option<String>,
    /// `T` values for `propagate`, `t` values for lower-bound tables.
    #[serde(default)]
    pub t_grid: Option<Vec<f64>>,
    /// Sample count for `geometry` and `cusp-scan`.
    #[serde(default)]
    pub samples: Option<usize>,
}

fn default_order() -> usize {
    2
}

impl SweepConfig {
    /// Defaults for a subcommand run without a config file.
    pub fn defaults(command: Command) -> Self {
        let lambdas = match command {
            Command::InvariantBound => vec![LambdaSpec { re: 0.0, im: 0.0 }, LambdaSpec { re: 0.0, im: 1.0 }, LambdaSpec { re: -0.5, im: 0.0 }],
            Command::NormSweep | Command::SphericalCheck => {
                vec![LambdaSpec { re: 0.0, im: 0.0 }, LambdaSpec { re: 0.0, im: 1.0 }, LambdaSpec { re: 0.0, im: 5.0 }]
            }
            _ => Vec::new(),
        };
        let eps_grid = match command {
            Command::NormSweep => Some(GeometricGrid { start: 0.125, stop: 2f64.powi(-20), points: 18 }),
            Command::InvariantBound | Command::Dyadic => Some(GeometricGrid { start: 0.0625, stop: 2f64.powi(-20), points: 9 }),
            Command::SphericalCheck => Some(GeometricGrid { start: 0.1, stop: 0.01, points: 2 }),
            _ => None,
        };
        SweepConfig {
            command,
            lambdas,
            eps_grid,
            sobolev_order: default_order(),
            output: None,
            seed: 0,
            tolerances: BTreeMap::new(),
            spectrum: None,
            t_grid: None,
            samples: None,
        }
    }

    pub fn epsilons(&self) -> Vec<f64> {
        self.eps_grid.map(|g| g.values()).unwrap_or_default()
    }

    pub fn parameters(&self) -> Vec<SpectralParameter> {
        self.lambdas.iter().map(|l| l.parameter()).collect()
    }

    pub fn tolerance(&self, key: &str, default: f64) -> f64 {
        self.tolerances.get(key).copied().unwrap_or(default)
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Config(m));
        if self.command.needs_lambdas() && self.lambdas.is_empty() {
            return bad(format!("{} needs a nonempty lambda list", self.command.name()));
        }
        for l in &self.lambdas {
            if !(l.re.is_finite() && l.im.is_finite()) {
                return bad("non-finite lambda".into());
            }
            if self.command != Command::SphericalCheck && l.parameter().series == Series::General {
                return bad(format!("lambda {}+{}i is neither principal nor complementary", l.re, l.im));
            }
        }
        if let Some(g) = &self.eps_grid {
            if g.points == 0 || g.points > MAX_GRID_POINTS {
                return bad(format!("epsilon grid needs 1 to {MAX_GRID_POINTS} points"));
            }
            for e in [g.start, g.stop] {
                if !(e > 0.0 && e <= 1.0) {
                    return bad(format!("epsilon {e} not in (0, 1]"));
                }
            }
        }
        if self.sobolev_order > MAX_ORDER {
            return bad(format!("Sobolev order {} exceeds {MAX_ORDER}", self.sobolev_order));
        }
        for (k, v) in &self.tolerances {
            if !TOLERANCE_KEYS.contains(&k.as_str()) {
                return bad(format!("unknown tolerance {k}"));
            }
            if !(v.is_finite() && *v > 0.0) {
                return bad(format!("tolerance {k} must be positive"));
            }
        }
        if let Some(ts) = &self.t_grid {
            if ts.is_empty() || ts.len() > MAX_GRID_POINTS || ts.iter().any(|t| !(t.is_finite() && *t >= 0.0)) {
                return bad("t grid must be nonempty and nonnegative".into());
            }
        }
        if matches!(self.samples, Some(n) if n == 0 || n > MAX_SAMPLES) {
            return bad(format!("sample count must be in 1..={MAX_SAMPLES}"));
        }
        Ok(())
    }
}

/// Parse and validate a JSON configuration.
pub fn parse_config(text: &str) -> Result<SweepConfig> {
    let cfg: SweepConfig = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    cfg.validate()?;
    Ok(cfg)
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEntry {
    lambda: f64,
    c_re: f64,
    c_im: f64,
}

/// Parse a JSON array of `{lambda, c_re, c_im}` records.
pub fn parse_spectrum(text: &str) -> Result<Vec<SpectrumEntry>> {
    let raw: Vec<RawEntry> = serde_json::from_str(text).map_err(|e| Error::Parse(e.to_string()))?;
    raw.iter()
        .enumerate()
        .map(|(i, r)| {
            SpectrumEntry::new(r.lambda, Complex64::new(r.c_re, r.c_im))
                .map_err(|e| Error::Parse(format!("entry {i}: {e}")))
        })
        .collect()
}

pub fn spectrum_to_json(spec: &[SpectrumEntry]) -> String {
    let rows: Vec<serde_json::Value> = spec
        .iter()
        .map(|e| serde_json::json!({ "lambda": e.lambda, "c_re": e.c.re, "c_im": e.c.im }))
        .collect();
    serde_json::to_string_pretty(&rows).expect("plain numbers serialize")
}
