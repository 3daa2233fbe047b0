//! Flat JSON run configuration and its validation.

use std::f64::consts::FRAC_PI_2;
use std::fmt;
use std::path::{Path, PathBuf};
use std::str::FromStr;

use optovib::fd::{self, Grid};
use optovib::fock::FockConfig;
use optovib::{Branch, GridError, Mode, ModelParams, ParamError};
use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Json,
    Svg,
}

impl fmt::Display for Format {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Format::Csv => "csv",
            Format::Json => "json",
            Format::Svg => "svg",
        })
    }
}

impl FromStr for Format {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "csv" => Ok(Format::Csv),
            "json" => Ok(Format::Json),
            "svg" => Ok(Format::Svg),
            other => Err(format!("unknown format `{other}` (expected csv, json or svg)")),
        }
    }
}

#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config {path}: {source}")]
    Read { path: PathBuf, source: std::io::Error },
    #[error("invalid config {path}: {source}")]
    Parse { path: PathBuf, source: serde_json::Error },
    #[error(transparent)]
    Params(#[from] ParamError),
    #[error(transparent)]
    Grid(#[from] GridError),
    #[error("{0}")]
    Invalid(String),
}

fn default_omega() -> f64 {
    1.0
}
fn default_gamma0() -> f64 {
    4.0
}
fn default_phi() -> f64 {
    FRAC_PI_2
}
fn default_eta() -> f64 {
    2.0
}
fn default_x_max() -> f64 {
    fd::DEFAULT_X_MAX
}
fn default_n_points() -> usize {
    fd::DEFAULT_N_POINTS
}
fn default_k() -> usize {
    30
}
fn default_eta_stop() -> f64 {
    6.0
}
fn default_eta_step() -> f64 {
    0.05
}
fn default_energy_min() -> f64 {
    -5.0
}
fn default_energy_max() -> f64 {
    40.0
}
fn default_lattice() -> usize {
    300
}
fn default_indices() -> Vec<usize> {
    (0..10).collect()
}
fn default_stride() -> usize {
    10
}
fn default_out() -> PathBuf {
    PathBuf::from("out")
}
fn default_formats() -> Vec<Format> {
    vec![Format::Csv, Format::Json]
}
fn default_fock_n_max() -> usize {
    FockConfig::default().n_max
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    #[serde(default = "default_omega")]
    pub omega: f64,
    #[serde(default = "default_gamma0")]
    pub gamma0: f64,
    #[serde(default = "default_phi")]
    pub phi: f64,
    #[serde(default = "default_eta")]
    pub eta: f64,
    #[serde(default)]
    pub branch: Branch,
    #[serde(default)]
    pub mode: Mode,
    #[serde(default = "default_x_max")]
    pub x_max: f64,
    #[serde(default = "default_n_points")]
    pub n_points: usize,
    /// Number of eigenvalues per solve.
    #[serde(default = "default_k")]
    pub k: usize,
    #[serde(default)]
    pub eta_start: f64,
    #[serde(default = "default_eta_stop")]
    pub eta_stop: f64,
    #[serde(default = "default_eta_step")]
    pub eta_step: f64,
    /// Explicit sweep couplings; overrides start/stop/step.
    #[serde(default)]
    pub eta_list: Option<Vec<f64>>,
    #[serde(default = "default_energy_min")]
    pub energy_min: f64,
    #[serde(default = "default_energy_max")]
    pub energy_max: f64,
    #[serde(default = "default_lattice")]
    pub energy_points: usize,
    #[serde(default = "default_lattice")]
    pub eta_points: usize,
    /// Eigenvector indices written to eigenvectors.csv.
    #[serde(default = "default_indices")]
    pub indices: Vec<usize>,
    /// Every `stride`-th grid point is written to the profile files.
    #[serde(default = "default_stride")]
    pub stride: usize,
    #[serde(default = "default_fock_n_max")]
    pub fock_n_max: usize,
    #[serde(default = "default_out")]
    pub out: PathBuf,
    #[serde(default = "default_formats")]
    pub formats: Vec<Format>,
    /// Reserved; every stage is deterministic.
    #[serde(default)]
    pub seed: u64,
}

impl Default for RunConfig {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all fields have defaults")
    }
}

/// Reads a flat config file, or the `config` object of a run-metadata file.
pub fn load(path: &Path) -> Result<RunConfig, ConfigError> {
    let text = std::fs::read_to_string(path).map_err(|source| ConfigError::Read {
        path: path.to_path_buf(),
        source,
    })?;
    let parse_err = |source| ConfigError::Parse {
        path: path.to_path_buf(),
        source,
    };
    let value: serde_json::Value = serde_json::from_str(&text).map_err(parse_err)?;
    let value = match value {
        serde_json::Value::Object(mut map) if map.contains_key("command") && map.contains_key("config") => {
            map.remove("config").unwrap_or_default()
        }
        other => other,
    };
    serde_json::from_value(value).map_err(parse_err)
}

impl RunConfig {
    pub fn params(&self) -> ModelParams {
        ModelParams {
            omega: self.omega,
            gamma0: self.gamma0,
            phi: self.phi,
            eta: self.eta,
            branch: self.branch,
        }
    }

    pub fn grid(&self) -> Result<Grid, GridError> {
        Grid::new(self.x_max, self.n_points)
    }

    pub fn fock(&self) -> Result<FockConfig, ConfigError> {
        FockConfig::new(self.fock_n_max).map_err(|e| ConfigError::Invalid(e.to_string()))
    }

    pub fn wants(&self, f: Format) -> bool {
        self.formats.contains(&f)
    }

    /// Sweep couplings in ascending order.
    pub fn etas(&self) -> Result<Vec<f64>, ConfigError> {
        if let Some(list) = &self.eta_list {
            if list.is_empty() || list.iter().any(|e| !e.is_finite() || *e < 0.0) {
                return Err(ConfigError::Invalid("eta_list must hold finite non-negative values".into()));
            }
            let mut v = list.clone();
            v.sort_by(f64::total_cmp);
            return Ok(v);
        }
        if !(self.eta_step > 0.0) || !(self.eta_stop >= self.eta_start) || !(self.eta_start >= 0.0) || !self.eta_stop.is_finite() {
            return Err(ConfigError::Invalid(format!(
                "sweep needs 0 <= eta_start <= eta_stop and eta_step > 0 (got {}, {}, {})",
                self.eta_start, self.eta_stop, self.eta_step
            )));
        }
        let n = ((self.eta_stop - self.eta_start) / self.eta_step + 1e-9).floor() as usize;
        Ok((0..=n).map(|i| self.eta_start + self.eta_step * i as f64).collect())
    }

    /// Phase-map lattice axes `(η, E)`.
    pub fn lattice(&self) -> Result<(Vec<f64>, Vec<f64>), ConfigError> {
        if self.energy_points < 2 || self.eta_points < 2 || !(self.energy_max > self.energy_min) {
            return Err(ConfigError::Invalid(
                "phase map needs energy_max > energy_min and at least 2 points per axis".into(),
            ));
        }
        if !(self.eta_stop > self.eta_start) || !(self.eta_start >= 0.0) {
            return Err(ConfigError::Invalid("phase map needs 0 <= eta_start < eta_stop".into()));
        }
        let axis = |lo: f64, hi: f64, n: usize| -> Vec<f64> {
            (0..n).map(|i| lo + (hi - lo) * i as f64 / (n - 1) as f64).collect()
        };
        Ok((
            axis(self.eta_start, self.eta_stop, self.eta_points),
            axis(self.energy_min, self.energy_max, self.energy_points),
        ))
    }

    /// Checks shared by every command: parameters, grid, output settings.
    pub fn validate_common(&self) -> Result<(), ConfigError> {
        self.params().validate()?;
        self.grid()?;
        if self.k == 0 {
            return Err(ConfigError::Invalid("k must be at least 1".into()));
        }
        if self.stride == 0 {
            return Err(ConfigError::Invalid("stride must be at least 1".into()));
        }
        if self.formats.is_empty() {
            return Err(ConfigError::Invalid("at least one output format is required".into()));
        }
        self.fock()?;
        Ok(())
    }

    /// Grid resolution for every coupling the run will solve at.
    pub fn check_resolution(&self, etas: &[f64]) -> Result<(), ConfigError> {
        let grid = self.grid()?;
        let eta = etas.iter().copied().fold(0.0, f64::max);
        grid.check_resolution(eta)?;
        Ok(())
    }
}
