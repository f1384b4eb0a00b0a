//! Metropolis-within-Gibbs posterior simulation for the Burr MTDPP, the
//! (seasonal) scaled-Lomax MTDPP and the Lomax MTDCPP.
//!
//! Every sampler conditions on the first `L` durations and carries one
//! configuration label per duration `i = L+1..n+1`, the last one belonging
//! to the censored tail `T − t_n`. Weights get a Dirichlet prior whose
//! shapes are increments of a Beta CDF (the CDP prior).

mod burr;
mod cluster;
mod config;
mod kernel;
mod prior;
mod samples;
mod scaled_lomax;

use std::collections::BTreeMap;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

pub use burr::BurrSampler;
pub use cluster::{ClusterSampler, ClusterStats};
pub use config::{config_hash, McmcConfig, StepSizes, TARGET_ACCEPTANCE};
pub use kernel::{sample_log_categorical, Allocation, RandomWalk};
pub use prior::{cdp_shapes, BetaPrior, CdpPrior, GammaPrior, NormalPrior, PriorSpec};
pub use samples::{FittedModel, PosteriorSamples, SampleMeta, Summary};
pub use scaled_lomax::{Harmonics, ScaledLomaxSampler};

use crate::error::{Error, Result};
use crate::process::PointPattern;

/// Which model to fit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "model", rename_all = "snake_case", deny_unknown_fields)]
pub enum ModelSpec {
    Burr {
        order: usize,
    },
    ScaledLomax {
        order: usize,
        #[serde(default, skip_serializing_if = "Option::is_none")]
        harmonics: Option<Harmonics>,
    },
    LomaxMtdcpp {
        order: usize,
    },
    /// Homogeneous Poisson process: the MTDCPP sampler with `π₀ = 1`.
    Poisson {
        #[serde(default = "one")]
        order: usize,
    },
}

fn one() -> usize {
    1
}

impl ModelSpec {
    pub fn order(&self) -> usize {
        match self {
            Self::Burr { order }
            | Self::ScaledLomax { order, .. }
            | Self::LomaxMtdcpp { order }
            | Self::Poisson { order } => *order,
        }
    }
}

/// Switches for tests: drop the likelihood (prior recovery) or freeze blocks.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SamplerOptions {
    pub likelihood: bool,
    pub update_configs: bool,
    pub update_weights: bool,
    pub update_params: bool,
}

impl Default for SamplerOptions {
    fn default() -> Self {
        Self { likelihood: true, update_configs: true, update_weights: true, update_params: true }
    }
}

/// One sweep of a chain plus the bookkeeping `run_mcmc` needs.
pub trait Sampler {
    fn step(&mut self, rng: &mut ChaCha8Rng) -> Result<()>;
    fn columns(&self) -> Vec<String>;
    fn record(&self, row: &mut Vec<f64>);
    /// End adaptation and reset acceptance counters.
    fn freeze(&mut self);
    fn acceptance(&self) -> Vec<(String, f64)>;
}

/// Build the sampler for `spec`.
pub fn build_sampler(
    pattern: &PointPattern,
    spec: &ModelSpec,
    prior: &PriorSpec,
    config: &McmcConfig,
) -> Result<Box<dyn Sampler + Send>> {
    Ok(match spec {
        ModelSpec::Burr { order } => Box::new(BurrSampler::new(pattern, *order, prior, config)?),
        ModelSpec::ScaledLomax { order, harmonics } => {
            Box::new(ScaledLomaxSampler::new(pattern, *order, *harmonics, prior, config)?)
        }
        ModelSpec::LomaxMtdcpp { order } => Box::new(ClusterSampler::new(pattern, *order, None, prior, config)?),
        ModelSpec::Poisson { order } => Box::new(ClusterSampler::new(pattern, *order, Some(1.0), prior, config)?),
    })
}

/// Drive `sampler` for `config.iterations` sweeps and keep thinned draws.
pub fn run_sampler(
    sampler: &mut dyn Sampler,
    pattern: &PointPattern,
    spec: &ModelSpec,
    prior: &PriorSpec,
    config: &McmcConfig,
) -> Result<PosteriorSamples> {
    config.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(config.seed);
    let columns = sampler.columns();
    let mut data = Vec::with_capacity(config.retained() * columns.len());
    if config.burn_in == 0 {
        sampler.freeze();
    }
    for k in 1..=config.iterations {
        sampler.step(&mut rng)?;
        if k == config.burn_in {
            sampler.freeze();
        }
        if config.keeps(k) {
            sampler.record(&mut data);
        }
    }
    let acceptance: BTreeMap<String, f64> = sampler.acceptance().into_iter().collect();
    let meta = SampleMeta {
        model: spec.clone(),
        prior: prior.clone(),
        config: config.clone(),
        seed: config.seed,
        config_hash: config_hash(&(spec, prior, config))?,
        acceptance,
        rows: config.retained(),
        columns,
        events: pattern.len(),
    };
    PosteriorSamples::new(meta, data)
}

/// Fit `spec` to `pattern`.
pub fn run_mcmc(
    pattern: &PointPattern,
    spec: &ModelSpec,
    prior: &PriorSpec,
    config: &McmcConfig,
) -> Result<PosteriorSamples> {
    config.validate()?;
    if spec.order() == 0 {
        return Err(Error::Contract("order must be >= 1".into()));
    }
    let mut sampler = build_sampler(pattern, spec, prior, config)?;
    run_sampler(sampler.as_mut(), pattern, spec, prior, config)
}

#[cfg(test)]
mod tests;
