use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use crate::error::{Error, Result};

/// Proposal standard deviations. `gamma`, `lambda`, `phi` are on the log
/// scale, `alpha` on the `log(α − 1)` scale, `beta` on the natural scale.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct StepSizes {
    pub gamma: f64,
    pub lambda: f64,
    pub phi: f64,
    pub alpha: f64,
    pub beta: f64,
}

impl Default for StepSizes {
    fn default() -> Self {
        Self { gamma: 0.1, lambda: 0.1, phi: 0.1, alpha: 0.1, beta: 0.05 }
    }
}

/// Chain length, thinning, proposal tuning and seed.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct McmcConfig {
    pub iterations: usize,
    pub burn_in: usize,
    pub thin: usize,
    pub steps: StepSizes,
    /// Robbins–Monro step adaptation toward [`TARGET_ACCEPTANCE`] during
    /// burn-in; steps are frozen afterwards.
    pub adapt: bool,
    pub seed: u64,
}

/// Acceptance rate targeted by adaptation.
pub const TARGET_ACCEPTANCE: f64 = 0.3;

impl Default for McmcConfig {
    fn default() -> Self {
        Self { iterations: 25_000, burn_in: 5_000, thin: 4, steps: StepSizes::default(), adapt: true, seed: 1 }
    }
}

impl McmcConfig {
    pub fn validate(&self) -> Result<()> {
        if self.iterations == 0 || self.thin == 0 || self.burn_in >= self.iterations {
            return Err(Error::Contract(format!(
                "need iterations > burn_in >= 0 and thin >= 1 (iterations {}, burn_in {}, thin {})",
                self.iterations, self.burn_in, self.thin
            )));
        }
        let s = &self.steps;
        for (name, v) in [("gamma", s.gamma), ("lambda", s.lambda), ("phi", s.phi), ("alpha", s.alpha), ("beta", s.beta)] {
            if !(v.is_finite() && v >= 0.0) {
                return Err(Error::Contract(format!("step size for {name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(())
    }

    /// Number of retained draws, `⌊(iterations − burn_in) / thin⌋`.
    pub fn retained(&self) -> usize {
        (self.iterations - self.burn_in) / self.thin
    }

    /// Whether 1-based iteration `k` is retained.
    pub fn keeps(&self, k: usize) -> bool {
        k > self.burn_in && (k - self.burn_in).is_multiple_of(self.thin)
    }
}

/// First 16 hex digits of the SHA-256 of the JSON encoding of `value`.
pub fn config_hash<T: Serialize>(value: &T) -> Result<String> {
    let bytes = serde_json::to_vec(value)?;
    Ok(hex::encode(&Sha256::digest(&bytes)[..8]))
}
