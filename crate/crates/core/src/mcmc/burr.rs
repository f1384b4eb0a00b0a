//! Burr MTDPP sampler: log-scale random-walk updates for `γ` and `λ`, an
//! exact truncated-gamma draw for `κ`, categorical configurations and a
//! conjugate Dirichlet step for the weights.

use rand_chacha::ChaCha8Rng;

use super::kernel::{sample_log_categorical, Allocation, RandomWalk};
use super::prior::{cdp_shapes, GammaPrior};
use super::{Sampler, SamplerOptions};
use crate::dist::{dirichlet_sample, trunc_gamma_sample, GammaTruncation};
use crate::error::{Error, Result};
use crate::mcmc::{McmcConfig, PriorSpec};
use crate::process::{MtdppModel, PointPattern};

/// Augmented Burr MTDPP chain state together with the data it conditions on.
#[derive(Debug, Clone)]
pub struct BurrSampler {
    order: usize,
    n: usize,
    /// `log x` for `x_1..x_n` followed by the censored tail.
    ln_x: Vec<f64>,
    /// Cached `x_j^γ` for the current `γ`.
    xg: Vec<f64>,
    pub gamma: f64,
    pub lambda: f64,
    pub kappa: f64,
    pub weights: Vec<f64>,
    /// Labels in `1..=L`; `counts[0]` stays zero.
    pub alloc: Allocation,
    prior_gamma: GammaPrior,
    prior_lambda: GammaPrior,
    prior_kappa: GammaPrior,
    shapes: Vec<f64>,
    rw_gamma: RandomWalk,
    rw_lambda: RandomWalk,
    pub options: SamplerOptions,
    /// Number of per-duration likelihood terms evaluated so far.
    pub evaluations: u64,
    scratch_lw: Vec<f64>,
    scratch_cum: Vec<f64>,
    scratch_xg: Vec<f64>,
}

impl BurrSampler {
    pub fn new(pattern: &PointPattern, order: usize, prior: &PriorSpec, config: &McmcConfig) -> Result<Self> {
        let n = pattern.len();
        if order == 0 {
            return Err(Error::Contract("order must be >= 1".into()));
        }
        if n <= order {
            return Err(Error::InsufficientEvents { n, order });
        }
        prior.validate()?;
        let mut x = pattern.durations().to_vec();
        x.push(pattern.censored_tail());
        let ln_x: Vec<f64> = x.iter().map(|v| v.ln()).collect();
        let shapes = cdp_shapes(&prior.cdp_for(order), order)?;
        let total: f64 = shapes.iter().sum();
        let mut sorted = pattern.durations().to_vec();
        sorted.sort_by(f64::total_cmp);
        let median = sorted[sorted.len() / 2];
        let mut s = Self {
            order,
            n,
            xg: x,
            ln_x,
            gamma: 1.0,
            lambda: median,
            kappa: 2.0,
            weights: shapes.iter().map(|a| a / total).collect(),
            alloc: Allocation::new(n - order + 1, order + 1),
            prior_gamma: prior.gamma,
            prior_lambda: prior.lambda,
            prior_kappa: prior.kappa,
            shapes,
            rw_gamma: RandomWalk::new(config.steps.gamma, config.adapt),
            rw_lambda: RandomWalk::new(config.steps.lambda, config.adapt),
            options: SamplerOptions::default(),
            evaluations: 0,
            scratch_lw: Vec::with_capacity(order),
            scratch_cum: Vec::with_capacity(order),
            scratch_xg: Vec::new(),
        };
        s.refresh_cache();
        Ok(s)
    }

    /// Set `(γ, λ, κ)` and weights directly.
    pub fn set_state(&mut self, gamma: f64, lambda: f64, kappa: f64, weights: Vec<f64>) {
        assert_eq!(weights.len(), self.order);
        self.gamma = gamma;
        self.lambda = lambda;
        self.kappa = kappa;
        self.weights = weights;
        self.refresh_cache();
    }

    fn refresh_cache(&mut self) {
        let g = self.gamma;
        self.xg.iter_mut().zip(&self.ln_x).for_each(|(v, l)| *v = (g * l).exp());
    }

    pub fn order(&self) -> usize {
        self.order
    }

    pub fn model(&self) -> Result<MtdppModel> {
        MtdppModel::burr(self.gamma, self.lambda, self.kappa, self.weights.clone())
    }

    /// Log-likelihood of the allocated data for `xg = x^γ` and `lg = λ^γ`,
    /// using `λ̃(v)^γ = λ^γ + v^γ`.
    fn allocated_log_lik(&mut self, gamma: f64, lg: f64, kappa: f64, xg: &[f64]) -> f64 {
        let (order, n) = (self.order, self.n);
        self.evaluations += (n - order + 1) as u64;
        let mut obs_log_x = 0.0;
        let mut obs_ln_s = 0.0;
        let mut tail = 0.0;
        for (k, &lag) in self.alloc.labels.iter().enumerate() {
            let idx = order + k;
            let s = lg + xg[idx - lag];
            let q = (xg[idx] / s).ln_1p();
            if idx < n {
                obs_log_x += self.ln_x[idx];
                obs_ln_s += s.ln();
                tail += (kappa + 1.0) * q;
            } else {
                tail += kappa * q;
            }
        }
        let m = (n - order) as f64;
        m * (kappa.ln() + gamma.ln()) + (gamma - 1.0) * obs_log_x - obs_ln_s - tail
    }

    /// Redraw every configuration label from its full conditional.
    pub fn step_configs(&mut self, rng: &mut ChaCha8Rng) -> Result<()> {
        let (order, n) = (self.order, self.n);
        let lw: Vec<f64> = self.weights.iter().map(|w| w.ln()).collect();
        let lg = (self.gamma * self.lambda.ln()).exp();
        let mut scores = std::mem::take(&mut self.scratch_lw);
        let mut cum = std::mem::take(&mut self.scratch_cum);
        for k in 0..self.alloc.labels.len() {
            let idx = order + k;
            scores.clear();
            for l in 1..=order {
                let term = if !self.options.likelihood {
                    0.0
                } else {
                    let s = lg + self.xg[idx - l];
                    let q = (self.xg[idx] / s).ln_1p();
                    if idx < n {
                        -s.ln() - (self.kappa + 1.0) * q
                    } else {
                        -self.kappa * q
                    }
                };
                scores.push(lw[l - 1] + term);
            }
            self.alloc.labels[k] = 1 + sample_log_categorical(&scores, &mut cum, rng)?;
        }
        self.scratch_lw = scores;
        self.scratch_cum = cum;
        self.alloc.recount();
        Ok(())
    }

    /// Conjugate Dirichlet draw of the weights.
    pub fn step_weights(&mut self, rng: &mut ChaCha8Rng) -> Result<()> {
        let post: Vec<f64> = self.shapes.iter().zip(&self.alloc.counts[1..]).map(|(a, &m)| a + m as f64).collect();
        self.weights = dirichlet_sample(&post, rng)?;
        Ok(())
    }

    /// Full-conditional truncated-gamma parameters of `κ`.
    pub fn kappa_conditional(&self) -> GammaTruncation {
        let (order, n) = (self.order, self.n);
        let mut shape = self.prior_kappa.shape;
        let mut rate = self.prior_kappa.rate;
        if self.options.likelihood {
            let lg = (self.gamma * self.lambda.ln()).exp();
            shape += (n - order) as f64;
            for (k, &lag) in self.alloc.labels.iter().enumerate() {
                let idx = order + k;
                rate += (self.xg[idx] / (lg + self.xg[idx - lag])).ln_1p();
            }
        }
        GammaTruncation { shape, rate, lower: 1.0 }
    }

    pub fn step_kappa(&mut self, rng: &mut ChaCha8Rng) -> Result<()> {
        self.kappa = trunc_gamma_sample(&self.kappa_conditional(), rng)?;
        Ok(())
    }

    pub fn step_gamma(&mut self, rng: &mut ChaCha8Rng) -> Result<()> {
        let eps = self.rw_gamma.propose(rng);
        if eps == 0.0 {
            self.rw_gamma.accept(f64::NEG_INFINITY, rng);
            return Ok(());
        }
        let proposed = self.gamma * eps.exp();
        let mut ratio = self.prior_gamma.ln_kernel(proposed) - self.prior_gamma.ln_kernel(self.gamma) + eps;
        let mut xg_new = std::mem::take(&mut self.scratch_xg);
        if self.options.likelihood {
            xg_new.clear();
            xg_new.extend(self.ln_x.iter().map(|l| (proposed * l).exp()));
            let ln_lambda = self.lambda.ln();
            let xg_cur = std::mem::take(&mut self.xg);
            let cur = self.allocated_log_lik(self.gamma, (self.gamma * ln_lambda).exp(), self.kappa, &xg_cur);
            let new = self.allocated_log_lik(proposed, (proposed * ln_lambda).exp(), self.kappa, &xg_new);
            self.xg = xg_cur;
            ratio += new - cur;
        }
        if proposed.is_finite() && self.rw_gamma.accept(ratio, rng) {
            self.gamma = proposed;
            if self.options.likelihood {
                std::mem::swap(&mut self.xg, &mut xg_new);
            } else {
                self.refresh_cache();
            }
        }
        self.scratch_xg = xg_new;
        Ok(())
    }

    pub fn step_lambda(&mut self, rng: &mut ChaCha8Rng) -> Result<()> {
        let eps = self.rw_lambda.propose(rng);
        if eps == 0.0 {
            self.rw_lambda.accept(f64::NEG_INFINITY, rng);
            return Ok(());
        }
        let proposed = self.lambda * eps.exp();
        let mut ratio = self.prior_lambda.ln_kernel(proposed) - self.prior_lambda.ln_kernel(self.lambda) + eps;
        if self.options.likelihood {
            let xg = std::mem::take(&mut self.xg);
            let cur = self.allocated_log_lik(self.gamma, (self.gamma * self.lambda.ln()).exp(), self.kappa, &xg);
            let new = self.allocated_log_lik(self.gamma, (self.gamma * proposed.ln()).exp(), self.kappa, &xg);
            self.xg = xg;
            ratio += new - cur;
        }
        if proposed.is_finite() && proposed > 0.0 && self.rw_lambda.accept(ratio, rng) {
            self.lambda = proposed;
        }
        Ok(())
    }

    /// Log-likelihood of the data given the current labels.
    pub fn allocated_log_likelihood(&mut self) -> f64 {
        let xg = std::mem::take(&mut self.xg);
        let lg = (self.gamma * self.lambda.ln()).exp();
        let v = self.allocated_log_lik(self.gamma, lg, self.kappa, &xg);
        self.xg = xg;
        v
    }
}

impl Sampler for BurrSampler {
    fn step(&mut self, rng: &mut ChaCha8Rng) -> Result<()> {
        if self.options.update_configs {
            self.step_configs(rng)?;
        }
        if self.options.update_weights {
            self.step_weights(rng)?;
        }
        if self.options.update_params {
            self.step_kappa(rng)?;
            self.step_gamma(rng)?;
            self.step_lambda(rng)?;
        }
        Ok(())
    }

    fn columns(&self) -> Vec<String> {
        let mut c = vec!["gamma".to_string(), "lambda".into(), "kappa".into()];
        c.extend((1..=self.order).map(|l| format!("w_{l}")));
        c.extend((1..=self.order).map(|l| format!("m_{l}")));
        c
    }

    fn record(&self, row: &mut Vec<f64>) {
        row.extend([self.gamma, self.lambda, self.kappa]);
        row.extend_from_slice(&self.weights);
        row.extend(self.alloc.counts[1..].iter().map(|&m| m as f64));
    }

    fn freeze(&mut self) {
        self.rw_gamma.freeze();
        self.rw_lambda.freeze();
    }

    fn acceptance(&self) -> Vec<(String, f64)> {
        vec![
            ("gamma".into(), self.rw_gamma.acceptance_rate()),
            ("lambda".into(), self.rw_lambda.acceptance_rate()),
        ]
    }
}
