//! Experiment configuration, read from TOML.
//!
//! ```toml
//! seed = 7
//! trials = 20
//! noise_eps = 1e-6
//! moment_count = 6
//!
//! [spikes]
//! nodes = [0.3, 0.7]
//! amplitudes = [1.0, -1.0]
//! ```
//!
//! Each task reads its own model section: `spikes` (solve-prony and
//! stability-sweep), `confluent` (solve-confluent, or stability-sweep
//! without `spikes`), `md`, `shifts` (both shift tasks) and `pwc`. A model
//! section describes the ground truth used to synthesize measurements; with
//! `moments_file` the measurements are read instead and the truth fields
//! become optional.

use std::fmt;
use std::path::{Path, PathBuf};

use clap::ValueEnum;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use prony_core::stability::NoiseDistribution;

use crate::error::{config_error, CliError};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "kebab-case")]
pub enum TaskKind {
    SolveProny,
    SolveConfluent,
    SolveMd,
    ShiftsMoments,
    ShiftsFourier,
    Pwc,
    StabilitySweep,
}

impl TaskKind {
    pub fn name(self) -> &'static str {
        match self {
            TaskKind::SolveProny => "solve-prony",
            TaskKind::SolveConfluent => "solve-confluent",
            TaskKind::SolveMd => "solve-md",
            TaskKind::ShiftsMoments => "shifts-moments",
            TaskKind::ShiftsFourier => "shifts-fourier",
            TaskKind::Pwc => "pwc",
            TaskKind::StabilitySweep => "stability-sweep",
        }
    }
}

impl fmt::Display for TaskKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SpikeModel {
    pub nodes: Option<Vec<f64>>,
    pub amplitudes: Option<Vec<f64>>,
    /// Number of spikes when no ground truth is given.
    pub count: Option<usize>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfluentModel {
    pub nodes: Option<Vec<f64>>,
    /// `amplitudes[j][i]` multiplies the `i`-th derivative term at node `j`.
    pub amplitudes: Option<Vec<Vec<f64>>>,
    pub multiplicities: Option<Vec<usize>>,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MdModel {
    pub points: Vec<Vec<f64>>,
    pub amplitudes: Vec<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "lowercase", deny_unknown_fields)]
pub enum KernelSpec {
    /// Indicator of `[0, width]`.
    Box { width: f64 },
    /// `exp(-t^2 / (2 sigma^2))`.
    Gaussian { sigma: f64 },
}

fn default_panels() -> usize {
    64
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ShiftModel {
    pub kernel: KernelSpec,
    pub shifts: Option<Vec<f64>>,
    pub amplitudes: Option<Vec<f64>>,
    pub count: Option<usize>,
    /// Starting panel count for quadrature.
    #[serde(default = "default_panels")]
    pub panels: usize,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PwcModel {
    /// Piece `i` holds `values[i]` on `[breakpoints[i], breakpoints[i+1])`.
    pub breakpoints: Option<Vec<f64>>,
    pub values: Option<Vec<f64>>,
    /// All jumps of the zero-extended signal; derived from the pieces when
    /// omitted.
    pub jump_count: Option<usize>,
}

/// Scales one amplitude over `scales` at a single noise level.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSpec {
    pub index: usize,
    pub scales: Vec<f64>,
    pub eps: f64,
}

#[derive(Clone, Debug, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub task: Option<TaskKind>,
    pub seed: Option<u64>,
    #[serde(default)]
    pub trials: usize,
    #[serde(default)]
    pub noise_eps: f64,
    #[serde(default)]
    pub noise: NoiseDistribution,
    #[serde(default)]
    pub eps_grid: Vec<f64>,
    pub moment_count: Option<usize>,
    pub moments_file: Option<PathBuf>,
    pub output: Option<PathBuf>,
    #[serde(default)]
    pub serial: bool,
    pub spikes: Option<SpikeModel>,
    pub confluent: Option<ConfluentModel>,
    pub md: Option<MdModel>,
    pub shifts: Option<ShiftModel>,
    pub pwc: Option<PwcModel>,
    pub sweep: Option<SweepSpec>,
}

impl ExperimentConfig {
    pub fn from_toml(text: &str) -> Result<Self, CliError> {
        toml::from_str(text).map_err(|e| config_error(e.to_string()))
    }

    /// Reads a config file; a relative `moments_file` is resolved against
    /// the file's directory.
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let mut cfg = Self::from_toml(&text)?;
        if let (Some(file), Some(dir)) = (cfg.moments_file.as_mut(), path.parent()) {
            if file.is_relative() {
                *file = dir.join(&*file);
            }
        }
        Ok(cfg)
    }

    /// Checks the invariants shared by every task.
    pub fn validate(&self, task: TaskKind) -> Result<(), CliError> {
        if let Some(t) = self.task {
            if t != task {
                return Err(config_error(format!("config is for task {t}, not {task}")));
            }
        }
        if !(self.noise_eps.is_finite() && self.noise_eps >= 0.0) {
            return Err(config_error("noise_eps must be a nonnegative number"));
        }
        if self.eps_grid.iter().any(|e| !(e.is_finite() && *e >= 0.0)) {
            return Err(config_error("eps_grid entries must be nonnegative numbers"));
        }
        if self.trials > 0 && self.seed.is_none() {
            return Err(config_error("a seed is required when trials > 0"));
        }
        if self.noise_eps > 0.0 && self.trials == 0 {
            return Err(config_error("noise_eps > 0 needs trials >= 1"));
        }
        if self.moment_count == Some(0) {
            return Err(config_error("moment_count must be positive"));
        }
        if let Some(s) = &self.shifts {
            if s.panels < 64 {
                return Err(config_error("shifts.panels must be at least 64"));
            }
        }
        if task == TaskKind::StabilitySweep {
            if self.eps_grid.is_empty() && self.sweep.is_none() {
                return Err(config_error(
                    "stability-sweep needs eps_grid or a [sweep] section",
                ));
            }
            if self.trials == 0 {
                return Err(config_error("stability-sweep needs trials >= 1"));
            }
        }
        Ok(())
    }
}

/// Moment input file: `{"values": [x or [re, im], ...], "noise_eps": e}`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct MomentFile {
    pub values: Vec<MomentValue>,
    pub noise_eps: Option<f64>,
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum MomentValue {
    Real(f64),
    Complex([f64; 2]),
}

impl From<MomentValue> for Complex64 {
    fn from(v: MomentValue) -> Self {
        match v {
            MomentValue::Real(x) => Complex64::new(x, 0.0),
            MomentValue::Complex([re, im]) => Complex64::new(re, im),
        }
    }
}

impl MomentFile {
    pub fn load(path: &Path) -> Result<Self, CliError> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Io {
            path: path.display().to_string(),
            message: e.to_string(),
        })?;
        let file: MomentFile = serde_json::from_str(&text)
            .map_err(|e| config_error(format!("moment file {}: {e}", path.display())))?;
        if file.values.is_empty() {
            return Err(config_error("moment file has no values"));
        }
        if let Some(e) = file.noise_eps {
            if !(e.is_finite() && e >= 0.0) {
                return Err(config_error("moment file noise_eps must be nonnegative"));
            }
        }
        Ok(file)
    }

    pub fn complex_values(&self) -> Vec<Complex64> {
        self.values.iter().map(|&v| v.into()).collect()
    }
}
