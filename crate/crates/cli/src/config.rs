//! The JSON run configuration.
//!
//! One document drives every subcommand; each subcommand reads only the
//! sections it needs and reports a missing one as a configuration error.
//! A top-level `seed`, or `--seed`, overrides the seeds inside sections.

use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use mtdpp::mcmc::{McmcConfig, ModelSpec, PriorSpec};
use mtdpp::simulate::SimSpec;

use crate::error::{CliError, CliResult};

#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RunConfig {
    #[serde(skip_serializing_if = "Option::is_none")]
    pub seed: Option<u64>,
    /// Pattern CSV, or for batch `fit` a directory of them.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub data: Option<PathBuf>,
    /// Observation horizon; overrides a `# T=` line in the pattern file.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub horizon: Option<f64>,
    /// Posterior samples CSV written by `fit`.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub samples: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub out: Option<PathBuf>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub jobs: Option<usize>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub simulation: Option<SimSpec>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub fit: Option<FitSection>,
    pub predict: PredictSection,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub score: Option<ScoreSection>,
    pub pacf: PacfSection,
    pub curves: CurveSection,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct FitSection {
    pub model: ModelSpec,
    #[serde(default)]
    pub prior: PriorSpec,
    #[serde(default)]
    pub mcmc: McmcConfig,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PredictSection {
    /// Number of future durations per simulated path.
    pub steps: usize,
    /// Paths per posterior draw.
    pub replicates: usize,
}

impl Default for PredictSection {
    fn default() -> Self {
        Self { steps: 1, replicates: 1 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ScoreSection {
    /// Predictive draws CSV written by `predict`.
    pub draws: PathBuf,
    /// CSV with header `duration`, one realised value per predicted step.
    pub actuals: PathBuf,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PacfSection {
    pub max_lag: usize,
}

impl Default for PacfSection {
    fn default() -> Self {
        Self { max_lag: 20 }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct CurveSection {
    /// Grid size for every curve.
    pub points: usize,
    /// Upper end of the duration grid; defaults to the largest observed duration.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub duration_max: Option<f64>,
}

impl Default for CurveSection {
    fn default() -> Self {
        Self { points: 200, duration_max: None }
    }
}

impl RunConfig {
    pub fn load(path: &Path) -> CliResult<Self> {
        let text = std::fs::read_to_string(path).map_err(|e| CliError::Config {
            path: path.to_owned(),
            message: e.to_string(),
        })?;
        let config: Self = serde_json::from_str(&text).map_err(|e| CliError::Config {
            path: path.to_owned(),
            message: e.to_string(),
        })?;
        config.validate().map_err(|message| CliError::Config { path: path.to_owned(), message })?;
        Ok(config)
    }

    pub fn validate(&self) -> Result<(), String> {
        if let Some(fit) = &self.fit {
            fit.prior.validate().map_err(|e| e.to_string())?;
            fit.mcmc.validate().map_err(|e| e.to_string())?;
        }
        if let Some(h) = self.horizon {
            if !(h.is_finite() && h > 0.0) {
                return Err(format!("horizon must be finite and positive, got {h}"));
            }
        }
        if self.jobs == Some(0) {
            return Err("jobs must be at least 1".into());
        }
        if self.predict.steps == 0 || self.predict.replicates == 0 {
            return Err("predict.steps and predict.replicates must be at least 1".into());
        }
        if self.curves.points < 2 {
            return Err("curves.points must be at least 2".into());
        }
        if self.pacf.max_lag == 0 {
            return Err("pacf.max_lag must be at least 1".into());
        }
        Ok(())
    }

    /// Push the top-level seed into every seeded section.
    pub fn apply_seed(&mut self) {
        if let Some(seed) = self.seed {
            if let Some(sim) = &mut self.simulation {
                sim.seed = seed;
            }
            if let Some(fit) = &mut self.fit {
                fit.mcmc.seed = seed;
            }
        }
    }

    pub fn seed(&self) -> u64 {
        self.seed.unwrap_or(1)
    }

    pub fn require<'a, T>(value: &'a Option<T>, name: &str) -> CliResult<&'a T> {
        value.as_ref().ok_or_else(|| CliError::Usage(format!("configuration needs `{name}` for this subcommand")))
    }
}
