//! Run configuration: the JSON config file plus command-line overrides.

use std::path::PathBuf;
use std::str::FromStr;

use bellcond_core::{
    BellState, ChshAngles, Complex64, ComplexMatrix, DensityOperator, ExperimentConfig,
};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

/// Either a Bell-state label or an explicit 4x4 matrix given as rows of
/// `[re, im]` pairs.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum StateSpec {
    Named(String),
    Matrix(Vec<Vec<[f64; 2]>>),
}

impl Default for StateSpec {
    fn default() -> Self {
        StateSpec::Named(BellState::PhiPlus.name().to_owned())
    }
}

impl StateSpec {
    pub fn to_density(&self) -> Result<DensityOperator> {
        match self {
            StateSpec::Named(name) => BellState::from_str(name)
                .map(BellState::density)
                .map_err(|e| CliError::Config(format!("state: {e}"))),
            StateSpec::Matrix(rows) => {
                if rows.len() != 4 || rows.iter().any(|r| r.len() != 4) {
                    return Err(CliError::Config(
                        "state: explicit matrix must have 4 rows of 4 [re, im] entries".into(),
                    ));
                }
                let data = rows
                    .iter()
                    .flatten()
                    .map(|&[re, im]| Complex64::new(re, im))
                    .collect();
                let m = ComplexMatrix::from_vec(4, data)
                    .map_err(|e| CliError::Config(format!("state: {e}")))?;
                DensityOperator::new(m, "explicit")
                    .map_err(|e| CliError::Config(format!("state: {e}")))
            }
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq, Serialize, Deserialize, clap::ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum OutputFormat {
    #[default]
    Json,
    Csv,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OutputSpec {
    #[serde(default)]
    pub format: OutputFormat,
    #[serde(default = "stdout_path")]
    pub path: String,
}

fn stdout_path() -> String {
    "-".to_owned()
}

impl Default for OutputSpec {
    fn default() -> Self {
        Self {
            format: OutputFormat::Json,
            path: stdout_path(),
        }
    }
}

fn default_angles() -> ChshAngles {
    ChshAngles::tsirelson()
}

fn uniform() -> [f64; 2] {
    [0.5, 0.5]
}

fn default_trials() -> u64 {
    1_000_000
}

fn default_workers() -> usize {
    1
}

/// The on-disk config file. Every key is optional; unknown keys are an error.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfigFile {
    #[serde(default)]
    pub state: StateSpec,
    #[serde(default = "default_angles")]
    pub angles_rad: ChshAngles,
    #[serde(default = "uniform")]
    pub p: [f64; 2],
    #[serde(default = "uniform")]
    pub q: [f64; 2],
    #[serde(default = "default_trials")]
    pub trials: u64,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_workers")]
    pub workers: usize,
    #[serde(default)]
    pub output: OutputSpec,
}

impl Default for RunConfigFile {
    fn default() -> Self {
        serde_json::from_str("{}").expect("all keys have defaults")
    }
}

impl RunConfigFile {
    /// Parses a config document; errors carry the line and column.
    pub fn from_json_str(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| {
            CliError::Config(format!(
                "line {}, column {}: {}",
                e.line(),
                e.column(),
                strip_position(&e.to_string())
            ))
        })
    }

    pub fn load(path: &std::path::Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)
            .map_err(|e| CliError::Config(format!("{}: {e}", path.display())))?;
        Self::from_json_str(&text).map_err(|e| match e {
            CliError::Config(msg) => CliError::Config(format!("{}: {msg}", path.display())),
            other => other,
        })
    }
}

fn strip_position(msg: &str) -> &str {
    msg.rfind(" at line ").map_or(msg, |i| &msg[..i])
}

/// Command-line values that take precedence over the file.
#[derive(Clone, Debug, Default)]
pub struct Overrides {
    pub seed: Option<u64>,
    pub trials: Option<u64>,
    pub workers: Option<usize>,
    pub output: Option<String>,
    pub format: Option<OutputFormat>,
    pub degrees: bool,
}

/// Configuration echoed into every output record. Thread count and output
/// routing are left out so that results compare byte for byte.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ConfigEcho {
    pub state: StateSpec,
    pub angles_rad: ChshAngles,
    pub p: [f64; 2],
    pub q: [f64; 2],
    pub trials: u64,
    pub seed: u64,
}

/// A fully resolved run.
#[derive(Clone, Debug)]
pub struct RunSettings {
    pub experiment: ExperimentConfig,
    pub echo: ConfigEcho,
    pub output: OutputSpec,
    pub degrees: bool,
}

impl RunSettings {
    pub fn resolve(file: RunConfigFile, overrides: &Overrides) -> Result<Self> {
        let mut angles = file.angles_rad;
        if overrides.degrees {
            angles = ChshAngles {
                a0: angles.a0.to_radians(),
                a1: angles.a1.to_radians(),
                b0: angles.b0.to_radians(),
                b1: angles.b1.to_radians(),
            };
        }
        let trials = overrides.trials.unwrap_or(file.trials);
        let seed = overrides.seed.unwrap_or(file.seed);
        let workers = overrides.workers.unwrap_or(file.workers);
        let state = file.state.to_density()?;
        let experiment =
            ExperimentConfig::new(state, angles, file.p, file.q, trials, seed, workers)
                .map_err(|e| CliError::Config(e.to_string()))?;
        let mut output = file.output;
        if let Some(path) = &overrides.output {
            output.path = path.clone();
        }
        if let Some(format) = overrides.format {
            output.format = format;
        }
        Ok(Self {
            echo: ConfigEcho {
                state: file.state,
                angles_rad: experiment.angles,
                p: file.p,
                q: file.q,
                trials,
                seed,
            },
            experiment,
            output,
            degrees: overrides.degrees,
        })
    }

    pub fn from_path(path: Option<&PathBuf>, overrides: &Overrides) -> Result<Self> {
        let file = match path {
            Some(p) => RunConfigFile::load(p)?,
            None => RunConfigFile::default(),
        };
        Self::resolve(file, overrides)
    }
}
