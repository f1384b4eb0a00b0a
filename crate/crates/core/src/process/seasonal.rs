use std::f64::consts::TAU;

use serde::{Deserialize, Serialize};

use super::model::{DurationModel, MtdppModel};
use super::pattern::PointPattern;
use crate::error::{domain, Error, Result};
use crate::numeric::CompensatedSum;

/// Harmonic log-scale `log μ(t) = Σ_j β_{1j} sin(jωt) + β_{2j} cos(jωt)`,
/// `ω = 2π / period`. `beta` stores the sine block then the cosine block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "SeasonalRaw", into = "SeasonalRaw")]
pub struct SeasonalParams {
    beta: Vec<f64>,
    period: f64,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct SeasonalRaw {
    beta: Vec<f64>,
    period: f64,
}

impl TryFrom<SeasonalRaw> for SeasonalParams {
    type Error = Error;

    fn try_from(r: SeasonalRaw) -> Result<Self> {
        Self::new(r.beta, r.period)
    }
}

impl From<SeasonalParams> for SeasonalRaw {
    fn from(s: SeasonalParams) -> Self {
        Self { beta: s.beta, period: s.period }
    }
}

impl SeasonalParams {
    pub fn new(beta: Vec<f64>, period: f64) -> Result<Self> {
        if beta.is_empty() || !beta.len().is_multiple_of(2) {
            return Err(domain(format!("beta needs 2J >= 2 coefficients, got {}", beta.len())));
        }
        if beta.iter().any(|b| !b.is_finite()) {
            return Err(domain("beta coefficients must be finite"));
        }
        if !(period.is_finite() && period > 0.0) {
            return Err(domain(format!("period must be finite and > 0, got {period}")));
        }
        Ok(Self { beta, period })
    }

    /// All-zero coefficients with `harmonics` sine/cosine pairs.
    pub fn flat(harmonics: usize, period: f64) -> Result<Self> {
        Self::new(vec![0.0; 2 * harmonics], period)
    }

    /// Sine coefficients `β_{11..1J}` followed by cosine `β_{21..2J}`.
    pub fn from_blocks(sin: &[f64], cos: &[f64], period: f64) -> Result<Self> {
        if sin.len() != cos.len() {
            return Err(domain("sine and cosine blocks must have equal length"));
        }
        Self::new(sin.iter().chain(cos).copied().collect(), period)
    }

    pub fn harmonics(&self) -> usize {
        self.beta.len() / 2
    }

    pub fn beta(&self) -> &[f64] {
        &self.beta
    }

    pub fn period(&self) -> f64 {
        self.period
    }

    pub fn omega(&self) -> f64 {
        TAU / self.period
    }

    pub fn with_beta(&self, beta: Vec<f64>) -> Result<Self> {
        Self::new(beta, self.period)
    }

    pub fn ln_mu(&self, t: f64) -> f64 {
        let j_count = self.harmonics();
        let wt = self.omega() * t;
        (1..=j_count)
            .map(|j| {
                let (s, c) = (j as f64 * wt).sin_cos();
                self.beta[j - 1] * s + self.beta[j_count + j - 1] * c
            })
            .sum()
    }

    pub fn mu(&self, t: f64) -> f64 {
        self.ln_mu(t).exp()
    }
}

/// `μ(t)` under `s`.
pub fn seasonal_mu(t: f64, s: &SeasonalParams) -> f64 {
    s.mu(t)
}

/// Latent durations `z_i = x_i / μ(t_i)`.
pub fn seasonal_transform(pattern: &PointPattern, s: &SeasonalParams) -> Vec<f64> {
    pattern.durations().iter().zip(pattern.times()).map(|(&x, &t)| x / s.mu(t)).collect()
}

/// Multiplicative seasonal model `x_i = μ(t_i) z_i` with an MTDPP on `z`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeasonalModel {
    pub inner: MtdppModel,
    pub seasonal: SeasonalParams,
}

impl SeasonalModel {
    /// Conditional log-likelihood on the observed scale, including the
    /// `μ(t_i)^{-1}` Jacobians; the censored tail is scaled by `μ(T)`.
    pub fn conditional_log_likelihood(&self, pattern: &PointPattern) -> Result<f64> {
        let order = self.inner.order();
        let n = pattern.len();
        if n <= order {
            return Err(Error::InsufficientEvents { n, order });
        }
        let z = seasonal_transform(pattern, &self.seasonal);
        let t = pattern.times();
        let mut total = CompensatedSum::new(0.0);
        for i in (order + 1)..=n {
            let lags: Vec<f64> = (1..=order).map(|l| z[i - 1 - l]).collect();
            total.add(self.inner.mixture(&lags).ln_density(z[i - 1]) - self.seasonal.ln_mu(t[i - 1]));
        }
        let lags: Vec<f64> = (1..=order).map(|l| z[n - l]).collect();
        let tail = pattern.censored_tail() / self.seasonal.mu(pattern.horizon());
        total.add(self.inner.mixture(&lags).ln_survival(tail));
        Ok(total.value())
    }
}
