use std::path::{Path, PathBuf};

use clap::ValueEnum;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub const OUTPUT_DIR_ENV: &str = "CHERNOFF_DP_OUTPUT_DIR";

pub const DEFAULT_MULTIPLIERS: [f64; 3] = [1.0, 2.0, 3.0];
pub const DEFAULT_THETAS: [f64; 4] = [1.0, 1.1, 1.5, 2.0];

/// 0.05, 0.10, ..., 0.95
pub fn default_epsilon_grid() -> Vec<f64> {
    (1..=19).map(|k| k as f64 / 20.0).collect()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize, ValueEnum)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    #[default]
    Csv,
    Json,
}

impl Format {
    pub fn extension(&self) -> &'static str {
        match self {
            Format::Csv => "csv",
            Format::Json => "json",
        }
    }
}

/// Contents of a `--config` TOML file. Every field is optional.
#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FileConfig {
    #[serde(default)]
    pub sweep: SweepSection,
    #[serde(default)]
    pub scenario: ScenarioSection,
    #[serde(default)]
    pub classify: ClassifySection,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SweepSection {
    pub epsilon_grid: Option<Vec<f64>>,
    pub delta_mu_multipliers: Option<Vec<f64>>,
    pub theta_values: Option<Vec<f64>>,
    pub sensitivity: Option<f64>,
    pub output_path: Option<PathBuf>,
    pub format: Option<Format>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScenarioSection {
    pub epsilon: Option<f64>,
    pub sensitivity: Option<f64>,
    pub delta_mu: Option<f64>,
    pub multiplier: Option<f64>,
    pub theta: Option<f64>,
    pub prior_alpha: Option<f64>,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ClassifySection {
    pub m_grid: Option<Vec<usize>>,
    pub trials: Option<usize>,
    pub shards: Option<usize>,
}

impl FileConfig {
    pub fn load(path: &Path) -> Result<Self> {
        let text = std::fs::read_to_string(path)?;
        Self::parse(&text)
    }

    pub fn parse(text: &str) -> Result<Self> {
        toml::from_str(text).map_err(|e| Error::Config(e.to_string()))
    }
}

/// Grid of closed-form and numeric divergence evaluations.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SweepConfig {
    pub epsilon_grid: Vec<f64>,
    /// `delta_mu = multiplier * sensitivity`
    pub delta_mu_multipliers: Vec<f64>,
    pub theta_values: Vec<f64>,
    pub sensitivity: f64,
    pub output_path: PathBuf,
    pub format: Format,
}

impl Default for SweepConfig {
    fn default() -> Self {
        SweepConfig {
            epsilon_grid: default_epsilon_grid(),
            delta_mu_multipliers: DEFAULT_MULTIPLIERS.to_vec(),
            theta_values: DEFAULT_THETAS.to_vec(),
            sensitivity: 1.0,
            output_path: default_output_path("sweep", Format::Csv),
            format: Format::Csv,
        }
    }
}

impl SweepConfig {
    pub fn validate(&self) -> Result<()> {
        validate_epsilon_grid(&self.epsilon_grid)?;
        if self.delta_mu_multipliers.is_empty() || self.theta_values.is_empty() {
            return Err(Error::Config("sweep grids must be nonempty".into()));
        }
        if let Some(m) = self.delta_mu_multipliers.iter().find(|m| !m.is_finite()) {
            return Err(Error::Config(format!("delta_mu multiplier must be finite, got {m}")));
        }
        if let Some(t) = self.theta_values.iter().find(|t| !(**t >= 1.0 && t.is_finite())) {
            return Err(Error::Config(format!("theta values must be >= 1, got {t}")));
        }
        if !(self.sensitivity > 0.0 && self.sensitivity.is_finite()) {
            return Err(Error::Config(format!("sensitivity must be positive, got {}", self.sensitivity)));
        }
        Ok(())
    }
}

pub fn validate_epsilon_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Config("epsilon grid must be nonempty".into()));
    }
    if let Some(e) = grid.iter().find(|e| !(**e > 0.0 && **e < 1.0)) {
        return Err(Error::Config(format!("epsilon grid values must lie in (0, 1), got {e}")));
    }
    if grid.windows(2).any(|w| w[1] <= w[0]) {
        return Err(Error::Config("epsilon grid must be strictly increasing".into()));
    }
    Ok(())
}

/// `$CHERNOFF_DP_OUTPUT_DIR/<stem>.<ext>`, or the working directory when unset.
pub fn default_output_path(stem: &str, format: Format) -> PathBuf {
    let dir = std::env::var_os(OUTPUT_DIR_ENV).map(PathBuf::from).unwrap_or_else(|| PathBuf::from("."));
    dir.join(format!("{stem}.{}", format.extension()))
}
