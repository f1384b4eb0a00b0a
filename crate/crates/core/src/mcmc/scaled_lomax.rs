//! Scaled-Lomax MTDPP sampler with optional harmonic seasonality
//! `x_i = μ(t_i) z_i`. Harmonic coefficients and `φ` use random-walk
//! updates (natural and log scale); `α` is proposed on the `log(α − 1)`
//! scale so proposals never leave `(1, ∞)`.

use rand_chacha::ChaCha8Rng;

use super::kernel::{sample_log_categorical, Allocation, RandomWalk};
use super::prior::{cdp_shapes, GammaPrior, NormalPrior};
use super::{Sampler, SamplerOptions};
use crate::dist::dirichlet_sample;
use crate::error::{Error, Result};
use crate::mcmc::{McmcConfig, PriorSpec};
use crate::process::{MtdppModel, PointPattern, SeasonalModel, SeasonalParams};

/// Harmonic design for the seasonal log-scale.
#[derive(Debug, Clone, Copy, PartialEq, serde::Serialize, serde::Deserialize)]
#[serde(deny_unknown_fields)]
pub struct Harmonics {
    pub count: usize,
    pub period: f64,
}

#[derive(Debug, Clone)]
pub struct ScaledLomaxSampler {
    order: usize,
    n: usize,
    /// `x_1..x_n` followed by the censored tail.
    x: Vec<f64>,
    /// Row-major `(n+1) × 2J` matrix of `sin(jωt)` then `cos(jωt)`, with
    /// `t = t_1..t_n, T`.
    basis: Vec<f64>,
    harmonics: Option<Harmonics>,
    /// `log μ` at `t_1..t_n, T` for the current coefficients.
    ln_mu: Vec<f64>,
    /// Latent durations `z = x / μ` for the current coefficients.
    z: Vec<f64>,
    pub alpha: f64,
    pub phi: f64,
    pub beta: Vec<f64>,
    pub weights: Vec<f64>,
    /// Labels in `1..=L`; `counts[0]` stays zero.
    pub alloc: Allocation,
    prior_alpha: GammaPrior,
    prior_phi: GammaPrior,
    prior_beta: NormalPrior,
    shapes: Vec<f64>,
    rw_alpha: RandomWalk,
    rw_phi: RandomWalk,
    rw_beta: Vec<RandomWalk>,
    pub options: SamplerOptions,
    pub evaluations: u64,
    scratch_lw: Vec<f64>,
    scratch_cum: Vec<f64>,
}

impl ScaledLomaxSampler {
    pub fn new(
        pattern: &PointPattern,
        order: usize,
        harmonics: Option<Harmonics>,
        prior: &PriorSpec,
        config: &McmcConfig,
    ) -> Result<Self> {
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
        let j_count = harmonics.map_or(0, |h| h.count);
        let mut basis = Vec::with_capacity((n + 1) * 2 * j_count);
        if let Some(h) = harmonics {
            // Validates count >= 1 and period > 0.
            let omega = SeasonalParams::flat(h.count, h.period)?.omega();
            for &t in pattern.times().iter().chain(std::iter::once(&pattern.horizon())) {
                let sc: Vec<(f64, f64)> = (1..=h.count).map(|j| (j as f64 * omega * t).sin_cos()).collect();
                basis.extend(sc.iter().map(|p| p.0));
                basis.extend(sc.iter().map(|p| p.1));
            }
        }
        let shapes = cdp_shapes(&prior.cdp_for(order), order)?;
        let total: f64 = shapes.iter().sum();
        let mean = pattern.durations().iter().sum::<f64>() / n as f64;
        Ok(Self {
            order,
            n,
            z: x.clone(),
            x,
            basis,
            harmonics,
            ln_mu: vec![0.0; n + 1],
            alpha: 3.0,
            phi: mean / 3.0,
            beta: vec![0.0; 2 * j_count],
            weights: shapes.iter().map(|a| a / total).collect(),
            alloc: Allocation::new(n - order + 1, order + 1),
            prior_alpha: prior.alpha,
            prior_phi: prior.phi,
            prior_beta: prior.beta,
            shapes,
            rw_alpha: RandomWalk::new(config.steps.alpha, config.adapt),
            rw_phi: RandomWalk::new(config.steps.phi, config.adapt),
            rw_beta: (0..2 * j_count).map(|_| RandomWalk::new(config.steps.beta, config.adapt)).collect(),
            options: SamplerOptions::default(),
            evaluations: 0,
            scratch_lw: Vec::with_capacity(order),
            scratch_cum: Vec::with_capacity(order),
        })
    }

    pub fn set_state(&mut self, alpha: f64, phi: f64, beta: Vec<f64>, weights: Vec<f64>) {
        assert_eq!(beta.len(), self.beta.len());
        assert_eq!(weights.len(), self.order);
        self.alpha = alpha;
        self.phi = phi;
        self.weights = weights;
        self.beta = beta;
        let width = self.beta.len();
        for j in 0..=self.n {
            let row = &self.basis[j * width..(j + 1) * width];
            self.ln_mu[j] = row.iter().zip(&self.beta).map(|(b, c)| b * c).sum();
            self.z[j] = self.x[j] * (-self.ln_mu[j]).exp();
        }
    }

    pub fn order(&self) -> usize {
        self.order
    }

    /// Current latent durations `z_1..z_n` and scaled tail.
    pub fn latent(&self) -> &[f64] {
        &self.z
    }

    pub fn inner_model(&self) -> Result<MtdppModel> {
        MtdppModel::scaled_lomax(self.alpha, self.phi, self.weights.clone())
    }

    pub fn seasonal_model(&self) -> Result<Option<SeasonalModel>> {
        match self.harmonics {
            None => Ok(None),
            Some(h) => Ok(Some(SeasonalModel {
                inner: self.inner_model()?,
                seasonal: SeasonalParams::new(self.beta.clone(), h.period)?,
            })),
        }
    }

    /// Observed-scale log-likelihood given the labels, including the
    /// `−log μ(t_i)` Jacobians.
    fn allocated_log_lik(&mut self, alpha: f64, phi: f64, z: &[f64], ln_mu: &[f64]) -> f64 {
        let (order, n) = (self.order, self.n);
        self.evaluations += (n - order + 1) as u64;
        let base = alpha * phi;
        let ln_alpha = alpha.ln();
        let mut total = 0.0;
        for (k, &lag) in self.alloc.labels.iter().enumerate() {
            let idx = order + k;
            let s = base + z[idx - lag];
            let q = (z[idx] / s).ln_1p();
            total += if idx < n { ln_alpha - s.ln() - (alpha + 1.0) * q - ln_mu[idx] } else { -alpha * q };
        }
        total
    }

    pub fn allocated_log_likelihood(&mut self) -> f64 {
        let z = std::mem::take(&mut self.z);
        let ln_mu = std::mem::take(&mut self.ln_mu);
        let v = self.allocated_log_lik(self.alpha, self.phi, &z, &ln_mu);
        self.z = z;
        self.ln_mu = ln_mu;
        v
    }

    pub fn step_configs(&mut self, rng: &mut ChaCha8Rng) -> Result<()> {
        let (order, n) = (self.order, self.n);
        let lw: Vec<f64> = self.weights.iter().map(|w| w.ln()).collect();
        let base = self.alpha * self.phi;
        let mut scores = std::mem::take(&mut self.scratch_lw);
        let mut cum = std::mem::take(&mut self.scratch_cum);
        for k in 0..self.alloc.labels.len() {
            let idx = order + k;
            scores.clear();
            for l in 1..=order {
                let term = if !self.options.likelihood {
                    0.0
                } else {
                    let s = base + self.z[idx - l];
                    let q = (self.z[idx] / s).ln_1p();
                    if idx < n {
                        -s.ln() - (self.alpha + 1.0) * q
                    } else {
                        -self.alpha * q
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

    pub fn step_weights(&mut self, rng: &mut ChaCha8Rng) -> Result<()> {
        let post: Vec<f64> = self.shapes.iter().zip(&self.alloc.counts[1..]).map(|(a, &m)| a + m as f64).collect();
        self.weights = dirichlet_sample(&post, rng)?;
        Ok(())
    }

    fn likelihood_delta(&mut self, alpha: f64, phi: f64, z: Option<(&[f64], &[f64])>) -> f64 {
        if !self.options.likelihood {
            return 0.0;
        }
        let z_cur = std::mem::take(&mut self.z);
        let mu_cur = std::mem::take(&mut self.ln_mu);
        let cur = self.allocated_log_lik(self.alpha, self.phi, &z_cur, &mu_cur);
        let new = match z {
            Some((zn, mn)) => self.allocated_log_lik(alpha, phi, zn, mn),
            None => self.allocated_log_lik(alpha, phi, &z_cur, &mu_cur),
        };
        self.z = z_cur;
        self.ln_mu = mu_cur;
        new - cur
    }

    pub fn step_phi(&mut self, rng: &mut ChaCha8Rng) -> Result<()> {
        let eps = self.rw_phi.propose(rng);
        if eps == 0.0 {
            self.rw_phi.accept(f64::NEG_INFINITY, rng);
            return Ok(());
        }
        let proposed = self.phi * eps.exp();
        let ratio = self.prior_phi.ln_kernel(proposed) - self.prior_phi.ln_kernel(self.phi)
            + eps
            + self.likelihood_delta(self.alpha, proposed, None);
        if proposed > 0.0 && proposed.is_finite() && self.rw_phi.accept(ratio, rng) {
            self.phi = proposed;
        }
        Ok(())
    }

    /// Random walk on `log(α − 1)`; the Jacobian term is `ε`.
    pub fn step_alpha(&mut self, rng: &mut ChaCha8Rng) -> Result<()> {
        let eps = self.rw_alpha.propose(rng);
        if eps == 0.0 {
            self.rw_alpha.accept(f64::NEG_INFINITY, rng);
            return Ok(());
        }
        let proposed = 1.0 + (self.alpha - 1.0) * eps.exp();
        let ratio = self.prior_alpha.ln_kernel(proposed) - self.prior_alpha.ln_kernel(self.alpha)
            + eps
            + self.likelihood_delta(proposed, self.phi, None);
        if proposed > 1.0 && proposed.is_finite() && self.rw_alpha.accept(ratio, rng) {
            self.alpha = proposed;
        }
        Ok(())
    }

    pub fn step_beta(&mut self, rng: &mut ChaCha8Rng) -> Result<()> {
        let width = self.beta.len();
        let mut ln_mu_new = vec![0.0; self.n + 1];
        let mut z_new = vec![0.0; self.n + 1];
        for k in 0..width {
            let eps = self.rw_beta[k].propose(rng);
            if eps == 0.0 {
                self.rw_beta[k].accept(f64::NEG_INFINITY, rng);
                continue;
            }
            let proposed = self.beta[k] + eps;
            for j in 0..=self.n {
                ln_mu_new[j] = self.ln_mu[j] + eps * self.basis[j * width + k];
                z_new[j] = self.x[j] * (-ln_mu_new[j]).exp();
            }
            let ratio = self.prior_beta.ln_kernel(proposed) - self.prior_beta.ln_kernel(self.beta[k])
                + self.likelihood_delta(self.alpha, self.phi, Some((&z_new, &ln_mu_new)));
            if self.rw_beta[k].accept(ratio, rng) {
                self.beta[k] = proposed;
                std::mem::swap(&mut self.ln_mu, &mut ln_mu_new);
                std::mem::swap(&mut self.z, &mut z_new);
            }
        }
        Ok(())
    }

    fn beta_names(&self) -> Vec<String> {
        let j = self.beta.len() / 2;
        (1..=j).map(|i| format!("beta_sin_{i}")).chain((1..=j).map(|i| format!("beta_cos_{i}"))).collect()
    }
}

impl Sampler for ScaledLomaxSampler {
    fn step(&mut self, rng: &mut ChaCha8Rng) -> Result<()> {
        if self.options.update_configs {
            self.step_configs(rng)?;
        }
        if self.options.update_weights {
            self.step_weights(rng)?;
        }
        if self.options.update_params {
            self.step_beta(rng)?;
            self.step_phi(rng)?;
            self.step_alpha(rng)?;
        }
        Ok(())
    }

    fn columns(&self) -> Vec<String> {
        let mut c = vec!["alpha".to_string(), "phi".into()];
        c.extend(self.beta_names());
        c.extend((1..=self.order).map(|l| format!("w_{l}")));
        c.extend((1..=self.order).map(|l| format!("m_{l}")));
        c
    }

    fn record(&self, row: &mut Vec<f64>) {
        row.extend([self.alpha, self.phi]);
        row.extend_from_slice(&self.beta);
        row.extend_from_slice(&self.weights);
        row.extend(self.alloc.counts[1..].iter().map(|&m| m as f64));
    }

    fn freeze(&mut self) {
        self.rw_alpha.freeze();
        self.rw_phi.freeze();
        self.rw_beta.iter_mut().for_each(RandomWalk::freeze);
    }

    fn acceptance(&self) -> Vec<(String, f64)> {
        let mut v = vec![
            ("alpha".to_string(), self.rw_alpha.acceptance_rate()),
            ("phi".to_string(), self.rw_phi.acceptance_rate()),
        ];
        v.extend(self.beta_names().into_iter().zip(self.rw_beta.iter().map(RandomWalk::acceptance_rate)));
        v
    }
}
