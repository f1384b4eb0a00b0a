use rand::Rng;
use rand_distr::StandardNormal;

use super::config::TARGET_ACCEPTANCE;
use crate::error::{numerical, Result};
use crate::numeric::open_unit;

/// Gaussian random-walk proposal with acceptance bookkeeping.
#[derive(Debug, Clone)]
pub struct RandomWalk {
    step: f64,
    log_step: f64,
    proposed: u64,
    accepted: u64,
    adapting: bool,
    rounds: u64,
}

impl RandomWalk {
    pub fn new(step: f64, adapting: bool) -> Self {
        Self { step, log_step: step.ln(), proposed: 0, accepted: 0, adapting: adapting && step > 0.0, rounds: 0 }
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Increment `step · N(0, 1)`.
    pub fn propose<R: Rng + ?Sized>(&self, rng: &mut R) -> f64 {
        if self.step == 0.0 {
            return 0.0;
        }
        let e: f64 = rng.sample(StandardNormal);
        self.step * e
    }

    /// Metropolis–Hastings accept/reject given the log acceptance ratio.
    pub fn accept<R: Rng + ?Sized>(&mut self, log_ratio: f64, rng: &mut R) -> bool {
        self.proposed += 1;
        let ok = !log_ratio.is_nan() && (log_ratio >= 0.0 || open_unit(rng.next_u64()).ln() < log_ratio);
        if ok {
            self.accepted += 1;
        }
        if self.adapting {
            self.rounds += 1;
            let a = if ok { 1.0 } else { 0.0 };
            self.log_step += (a - TARGET_ACCEPTANCE) / (self.rounds as f64 + 1.0).powf(0.6);
            self.log_step = self.log_step.clamp(-12.0, 3.0);
            self.step = self.log_step.exp();
        }
        ok
    }

    /// Stop adapting and reset the acceptance counters.
    pub fn freeze(&mut self) {
        self.adapting = false;
        self.proposed = 0;
        self.accepted = 0;
    }

    pub fn acceptance_rate(&self) -> f64 {
        if self.proposed == 0 {
            0.0
        } else {
            self.accepted as f64 / self.proposed as f64
        }
    }
}

/// Sample an index with probabilities proportional to `exp(log_weights)`.
/// `scratch` is overwritten.
pub fn sample_log_categorical<R: Rng + ?Sized>(log_weights: &[f64], scratch: &mut Vec<f64>, rng: &mut R) -> Result<usize> {
    let max = log_weights.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if !max.is_finite() {
        return Err(numerical(format!("categorical log masses have maximum {max}")));
    }
    scratch.clear();
    let mut total = 0.0;
    for &lw in log_weights {
        total += (lw - max).exp();
        scratch.push(total);
    }
    let u = open_unit(rng.next_u64()) * total;
    Ok(scratch.iter().position(|&c| u < c).unwrap_or(log_weights.len() - 1))
}

/// Configuration labels for `i = L+1..n+1` and their counts.
#[derive(Debug, Clone, PartialEq)]
pub struct Allocation {
    /// `labels[k]` belongs to duration `L + 1 + k`; the last entry is the
    /// censored tail.
    pub labels: Vec<usize>,
    /// `counts[c]` = number of labels equal to `c`.
    pub counts: Vec<usize>,
}

impl Allocation {
    pub fn new(len: usize, categories: usize) -> Self {
        Self { labels: vec![0; len], counts: vec![0; categories] }
    }

    pub fn recount(&mut self) {
        self.counts.iter_mut().for_each(|c| *c = 0);
        for &l in &self.labels {
            self.counts[l] += 1;
        }
    }
}
