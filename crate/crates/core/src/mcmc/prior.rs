use serde::{Deserialize, Serialize};
use statrs::function::beta::beta_reg;
use statrs::function::gamma::ln_gamma;

use crate::error::{domain, Result};

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(domain(format!("{name} must be finite and > 0, got {v}")))
    }
}

/// Weight prior `Dir(α₀ a_1, …, α₀ a_L)` with `a_l` the increments of a
/// `Beta(a₀, b₀)` CDF over the grid `l/L`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CdpPrior {
    pub alpha0: f64,
    pub a0: f64,
    pub b0: f64,
}

impl CdpPrior {
    pub fn new(alpha0: f64, a0: f64, b0: f64) -> Result<Self> {
        let p = Self { alpha0, a0, b0 };
        p.validate()?;
        Ok(p)
    }

    /// `CDP(5, 1, b₀)` with `b₀ = 2` for small orders and `6` from `L = 15` up,
    /// interpolated linearly in between.
    pub fn default_for_order(order: usize) -> Self {
        let b0 = match order {
            0..=3 => 2.0,
            15.. => 6.0,
            l => 2.0 + 4.0 * (l - 3) as f64 / 12.0,
        };
        Self { alpha0: 5.0, a0: 1.0, b0 }
    }

    pub fn validate(&self) -> Result<()> {
        positive("CDP alpha0", self.alpha0)?;
        positive("CDP a0", self.a0)?;
        positive("CDP b0", self.b0)
    }

    /// Prior mean of the weights, `a_l = G₀(l/L) − G₀((l−1)/L)`.
    pub fn base_increments(&self, order: usize) -> Result<Vec<f64>> {
        self.validate()?;
        if order == 0 {
            return Err(domain("order must be >= 1"));
        }
        let g = |l: usize| match l {
            0 => 0.0,
            l if l == order => 1.0,
            l => beta_reg(self.a0, self.b0, l as f64 / order as f64),
        };
        Ok((1..=order).map(|l| g(l) - g(l - 1)).collect())
    }
}

/// Dirichlet shapes `α₀ a_l` induced by `prior` at order `L`.
pub fn cdp_shapes(prior: &CdpPrior, order: usize) -> Result<Vec<f64>> {
    let a = prior.base_increments(order)?;
    if let Some(bad) = a.iter().find(|v| **v <= 0.0) {
        return Err(domain(format!("CDP increment underflowed to {bad}; reduce the order or flatten G0")));
    }
    Ok(a.into_iter().map(|v| prior.alpha0 * v).collect())
}

/// `Ga(shape, rate)` prior, optionally truncated to `(1, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct GammaPrior {
    pub shape: f64,
    pub rate: f64,
}

impl GammaPrior {
    pub fn new(shape: f64, rate: f64) -> Result<Self> {
        let p = Self { shape, rate };
        p.validate()?;
        Ok(p)
    }

    pub fn validate(&self) -> Result<()> {
        positive("gamma prior shape", self.shape)?;
        positive("gamma prior rate", self.rate)
    }

    /// Unnormalised log density.
    #[inline]
    pub fn ln_kernel(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return f64::NEG_INFINITY;
        }
        (self.shape - 1.0) * x.ln() - self.rate * x
    }

    pub fn ln_pdf(&self, x: f64) -> f64 {
        self.ln_kernel(x) + self.shape * self.rate.ln() - ln_gamma(self.shape)
    }
}

/// `N(mean, sd²)` prior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct NormalPrior {
    pub mean: f64,
    pub sd: f64,
}

impl NormalPrior {
    pub fn validate(&self) -> Result<()> {
        if !self.mean.is_finite() {
            return Err(domain("normal prior mean must be finite"));
        }
        positive("normal prior sd", self.sd)
    }

    #[inline]
    pub fn ln_kernel(&self, x: f64) -> f64 {
        let z = (x - self.mean) / self.sd;
        -0.5 * z * z
    }
}

/// `Beta(u, v)` prior.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BetaPrior {
    pub a: f64,
    pub b: f64,
}

impl BetaPrior {
    pub fn validate(&self) -> Result<()> {
        positive("beta prior a", self.a)?;
        positive("beta prior b", self.b)
    }

    /// Log density up to a constant.
    pub fn ln_kernel(&self, p: f64) -> f64 {
        (self.a - 1.0) * p.ln() + (self.b - 1.0) * (-p).ln_1p()
    }
}

/// Priors for every sampler family. Unused entries are ignored by a given
/// family; shape priors (`kappa`, `alpha`) are truncated to `(1, ∞)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PriorSpec {
    pub cdp: Option<CdpPrior>,
    pub gamma: GammaPrior,
    pub lambda: GammaPrior,
    pub kappa: GammaPrior,
    pub alpha: GammaPrior,
    pub phi: GammaPrior,
    pub mu: GammaPrior,
    pub beta: NormalPrior,
    pub pi0: BetaPrior,
}

impl Default for PriorSpec {
    fn default() -> Self {
        let unit = GammaPrior { shape: 1.0, rate: 1.0 };
        let shape = GammaPrior { shape: 6.0, rate: 1.0 };
        Self {
            cdp: None,
            gamma: unit,
            lambda: unit,
            kappa: shape,
            alpha: shape,
            phi: unit,
            mu: unit,
            beta: NormalPrior { mean: 0.0, sd: 10.0 },
            pi0: BetaPrior { a: 5.0, b: 5.0 },
        }
    }
}

impl PriorSpec {
    pub fn validate(&self) -> Result<()> {
        if let Some(c) = &self.cdp {
            c.validate()?;
        }
        for g in [&self.gamma, &self.lambda, &self.kappa, &self.alpha, &self.phi, &self.mu] {
            g.validate()?;
        }
        self.beta.validate()?;
        self.pi0.validate()
    }

    /// The CDP prior, defaulting by order.
    pub fn cdp_for(&self, order: usize) -> CdpPrior {
        self.cdp.unwrap_or_else(|| CdpPrior::default_for_order(order))
    }
}
