use serde::{Deserialize, Serialize};

use super::mixture::Mixture;
use crate::dist::{burr_conditional_scale, BurrParams, Component, Exponential, LomaxParams};
use crate::error::{domain, Error, Result};

/// Tolerance on `Σ w_l = 1`.
pub const SIMPLEX_TOL: f64 = 1e-12;

/// Nonnegative mixture weights over lags `1..=L`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct MixtureWeights(Vec<f64>);

impl MixtureWeights {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() {
            return Err(domain("mixture weights need at least one lag"));
        }
        if let Some(bad) = w.iter().find(|v| !(v.is_finite() && **v >= 0.0)) {
            return Err(domain(format!("mixture weights must be finite and >= 0, got {bad}")));
        }
        let total: f64 = w.iter().sum();
        if (total - 1.0).abs() > SIMPLEX_TOL * w.len().max(8) as f64 {
            return Err(domain(format!("mixture weights must sum to 1, got {total}")));
        }
        Ok(Self(w))
    }

    /// Accepts any nonnegative vector with positive sum and rescales it.
    pub fn normalized(mut w: Vec<f64>) -> Result<Self> {
        let total: f64 = w.iter().sum();
        if !(total.is_finite() && total > 0.0) {
            return Err(domain(format!("cannot normalise weights with sum {total}")));
        }
        w.iter_mut().for_each(|v| *v /= total);
        Self::new(w)
    }

    /// Uniform weights `1/L`.
    pub fn uniform(order: usize) -> Result<Self> {
        Self::new(vec![1.0 / order as f64; order])
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.0
    }

    pub fn order(&self) -> usize {
        self.0.len()
    }
}

impl TryFrom<Vec<f64>> for MixtureWeights {
    type Error = Error;

    fn try_from(w: Vec<f64>) -> Result<Self> {
        Self::new(w)
    }
}

impl From<MixtureWeights> for Vec<f64> {
    fn from(w: MixtureWeights) -> Self {
        w.0
    }
}

/// Component family of an MTDPP, with its parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
pub enum Family {
    /// Lag-`l` component `Lomax(αφ + x_{i-l}, α)`, shared across lags.
    ScaledLomax { alpha: f64, phi: f64 },
    /// Lag-`l` component `Lomax(φ_l + x_{i-l}, α_l)`.
    Lomax { phi: Vec<f64>, alpha: Vec<f64> },
    /// Lag-`l` component `Burr(γ, λ̃(x_{i-l}), κ)` from the HRT copula.
    Burr { gamma: f64, lambda: f64, kappa: f64 },
}

fn positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(domain(format!("{name} must be finite and > 0, got {v}")))
    }
}

fn above_one(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 1.0 {
        Ok(())
    } else {
        Err(domain(format!("{name} must be finite and > 1, got {v}")))
    }
}

impl Family {
    pub fn validate(&self, order: usize) -> Result<()> {
        match self {
            Self::ScaledLomax { alpha, phi } => {
                above_one("alpha", *alpha)?;
                positive("phi", *phi)
            }
            Self::Lomax { phi, alpha } => {
                if phi.len() != order || alpha.len() != order {
                    return Err(domain(format!(
                        "Lomax family needs {order} per-lag (phi, alpha) values, got {} and {}",
                        phi.len(),
                        alpha.len()
                    )));
                }
                phi.iter().try_for_each(|&p| positive("phi", p))?;
                alpha.iter().try_for_each(|&a| above_one("alpha", a))
            }
            Self::Burr { gamma, lambda, kappa } => {
                positive("gamma", *gamma)?;
                positive("lambda", *lambda)?;
                above_one("kappa", *kappa)
            }
        }
    }

    /// Component for lag `lag` (1-based) conditioned on the lagged duration.
    #[inline]
    pub fn component(&self, lag: usize, x_lag: f64) -> Component {
        match self {
            Self::ScaledLomax { alpha, phi } => Component::Lomax(LomaxParams::raw(alpha * phi + x_lag, *alpha)),
            Self::Lomax { phi, alpha } => Component::Lomax(LomaxParams::raw(phi[lag - 1] + x_lag, alpha[lag - 1])),
            Self::Burr { gamma, lambda, kappa } => Component::Burr(BurrParams::raw(
                *gamma,
                burr_conditional_scale(*gamma, *lambda, x_lag),
                *kappa,
            )),
        }
    }

    /// Default first-arrival density: the stationary marginal, or
    /// `Lomax(φ_1, α_1 − 1)` for the heterogeneous Lomax family.
    pub fn default_first_arrival(&self) -> Component {
        match self {
            Self::ScaledLomax { alpha, phi } => Component::Lomax(LomaxParams::raw(alpha * phi, alpha - 1.0)),
            Self::Lomax { phi, alpha } => Component::Lomax(LomaxParams::raw(phi[0], alpha[0] - 1.0)),
            Self::Burr { gamma, lambda, kappa } => Component::Burr(BurrParams::raw(*gamma, *lambda, kappa - 1.0)),
        }
    }
}

/// Anything that yields a conditional duration mixture from its lag history.
pub trait DurationModel {
    /// Model order `L`.
    fn order(&self) -> usize;

    /// Conditional duration mixture given `lags`, most recent first. An
    /// empty slice selects the first-arrival law; fewer than `L` lags use
    /// the truncated-history weights.
    fn mixture(&self, lags: &[f64]) -> Mixture;
}

/// MTD point process: family, weights and first-arrival density.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MtdppRaw", into = "MtdppRaw")]
pub struct MtdppModel {
    family: Family,
    weights: MixtureWeights,
    first_arrival: Component,
}

#[derive(Serialize, Deserialize)]
struct MtdppRaw {
    #[serde(flatten)]
    family: Family,
    weights: MixtureWeights,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    first_arrival: Option<Component>,
}

impl TryFrom<MtdppRaw> for MtdppModel {
    type Error = Error;

    fn try_from(r: MtdppRaw) -> Result<Self> {
        let m = Self::new(r.family, r.weights)?;
        Ok(match r.first_arrival {
            Some(c) => m.with_first_arrival(c),
            None => m,
        })
    }
}

impl From<MtdppModel> for MtdppRaw {
    fn from(m: MtdppModel) -> Self {
        let default = m.family.default_first_arrival();
        Self {
            first_arrival: (m.first_arrival != default).then_some(m.first_arrival),
            family: m.family,
            weights: m.weights,
        }
    }
}

impl MtdppModel {
    pub fn new(family: Family, weights: MixtureWeights) -> Result<Self> {
        family.validate(weights.order())?;
        let first_arrival = family.default_first_arrival();
        Ok(Self { family, weights, first_arrival })
    }

    pub fn scaled_lomax(alpha: f64, phi: f64, weights: Vec<f64>) -> Result<Self> {
        Self::new(Family::ScaledLomax { alpha, phi }, MixtureWeights::new(weights)?)
    }

    pub fn lomax(phi: Vec<f64>, alpha: Vec<f64>, weights: Vec<f64>) -> Result<Self> {
        Self::new(Family::Lomax { phi, alpha }, MixtureWeights::new(weights)?)
    }

    pub fn burr(gamma: f64, lambda: f64, kappa: f64, weights: Vec<f64>) -> Result<Self> {
        Self::new(Family::Burr { gamma, lambda, kappa }, MixtureWeights::new(weights)?)
    }

    pub fn with_first_arrival(mut self, first_arrival: Component) -> Self {
        self.first_arrival = first_arrival;
        self
    }

    pub fn family(&self) -> &Family {
        &self.family
    }

    pub fn weights(&self) -> &[f64] {
        self.weights.as_slice()
    }

    pub fn first_arrival(&self) -> &Component {
        &self.first_arrival
    }

    /// Component `f_l(· | x_lag)` for lag `l` (1-based).
    pub fn component(&self, lag: usize, x_lag: f64) -> Component {
        self.family.component(lag, x_lag)
    }
}

impl DurationModel for MtdppModel {
    fn order(&self) -> usize {
        self.weights.order()
    }

    fn mixture(&self, lags: &[f64]) -> Mixture {
        let w = self.weights.as_slice();
        let order = w.len();
        let k = lags.len().min(order);
        if k == 0 {
            return Mixture::single(self.first_arrival);
        }
        let components: Vec<Component> = (1..=k).map(|l| self.family.component(l, lags[l - 1])).collect();
        let mut weights = w[..k].to_vec();
        if k < order {
            // Lags 1..k-1 keep their weights; the deepest available lag absorbs the rest.
            let head: f64 = w[..k - 1].iter().sum();
            weights[k - 1] = (1.0 - head).max(0.0);
        }
        Mixture::new(weights, components)
    }
}

/// MTD cluster point process: immigrant exponential durations with
/// probability `π₀`, otherwise the inner MTDPP mixture.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "MtdcppRaw", into = "MtdcppRaw")]
pub struct MtdcppModel {
    pi0: f64,
    immigrant: Exponential,
    inner: MtdppModel,
}

#[derive(Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct MtdcppRaw {
    pi0: f64,
    immigrant_rate: f64,
    inner: MtdppModel,
}

impl TryFrom<MtdcppRaw> for MtdcppModel {
    type Error = Error;

    fn try_from(r: MtdcppRaw) -> Result<Self> {
        Self::new(r.pi0, r.immigrant_rate, r.inner)
    }
}

impl From<MtdcppModel> for MtdcppRaw {
    fn from(m: MtdcppModel) -> Self {
        Self { pi0: m.pi0, immigrant_rate: m.immigrant.rate(), inner: m.inner }
    }
}

impl MtdcppModel {
    pub fn new(pi0: f64, immigrant_rate: f64, inner: MtdppModel) -> Result<Self> {
        if !(0.0..=1.0).contains(&pi0) {
            return Err(domain(format!("pi0 must lie in [0, 1], got {pi0}")));
        }
        Ok(Self { pi0, immigrant: Exponential::new(immigrant_rate)?, inner })
    }

    pub fn pi0(&self) -> f64 {
        self.pi0
    }

    pub fn immigrant_rate(&self) -> f64 {
        self.immigrant.rate()
    }

    pub fn immigrant(&self) -> Component {
        Component::Exponential(self.immigrant)
    }

    pub fn inner(&self) -> &MtdppModel {
        &self.inner
    }
}

impl DurationModel for MtdcppModel {
    fn order(&self) -> usize {
        self.inner.order()
    }

    /// Index 0 is the immigrant component; index `l ≥ 1` is lag `l`.
    fn mixture(&self, lags: &[f64]) -> Mixture {
        if lags.is_empty() {
            return Mixture::single(self.immigrant());
        }
        let inner = self.inner.mixture(lags);
        let mut weights = Vec::with_capacity(inner.len() + 1);
        let mut components = Vec::with_capacity(inner.len() + 1);
        weights.push(self.pi0);
        components.push(self.immigrant());
        weights.extend(inner.weights().iter().map(|w| (1.0 - self.pi0) * w));
        components.extend_from_slice(inner.components());
        Mixture::new(weights, components)
    }
}

/// Stationary marginal duration law of an MTDPP.
pub fn stationary_marginal(model: &MtdppModel) -> Result<Component> {
    match model.family() {
        Family::ScaledLomax { alpha, phi } => Ok(Component::Lomax(LomaxParams::new(alpha * phi, alpha - 1.0)?)),
        Family::Burr { gamma, lambda, kappa } => Ok(Component::Burr(BurrParams::new(*gamma, *lambda, kappa - 1.0)?)),
        Family::Lomax { phi, alpha } => {
            let shared = phi.iter().all(|&p| p == phi[0]) && alpha.iter().all(|&a| a == alpha[0]);
            if shared {
                Ok(Component::Lomax(LomaxParams::new(phi[0], alpha[0] - 1.0)?))
            } else {
                Err(Error::NotStationary(
                    "Lomax family with per-lag (phi, alpha) has no guaranteed stationary marginal".into(),
                ))
            }
        }
    }
}

/// Upper bound on the conditional intensity, hence on the mean event rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", content = "value", rename_all = "snake_case")]
pub enum IntensityBound {
    Finite(f64),
    Unbounded,
}

impl IntensityBound {
    pub fn value(&self) -> Option<f64> {
        match self {
            Self::Finite(v) => Some(*v),
            Self::Unbounded => None,
        }
    }
}

/// `Σ w_l B_l` where `B_l` bounds the lag-`l` hazard over all lagged values.
///
/// Lomax hazards `α/(s + x)` peak at `x = 0` with the smallest scale, so
/// `B_l = 1/φ` (scaled) or `α_l/φ_l`. Burr component hazards scale as
/// `1/λ̃ ≤ 1/λ`, so the bound is the numerically located supremum of the
/// `Burr(γ, λ, κ)` hazard; it does not exist for `γ < 1`.
pub fn intensity_bound(model: &MtdppModel) -> IntensityBound {
    let w = model.weights();
    match model.family() {
        Family::ScaledLomax { phi, .. } => IntensityBound::Finite(w.iter().sum::<f64>() / phi),
        Family::Lomax { phi, alpha } => {
            IntensityBound::Finite(w.iter().zip(phi).zip(alpha).map(|((w, p), a)| w * a / p).sum())
        }
        Family::Burr { gamma, lambda, kappa } => match BurrParams::raw(*gamma, *lambda, *kappa).hazard_supremum() {
            Some(h) => IntensityBound::Finite(h),
            None => IntensityBound::Unbounded,
        },
    }
}

/// Bound for an MTDCPP: the immigrant rate mixed with the inner bound.
pub fn mtdcpp_intensity_bound(model: &MtdcppModel) -> IntensityBound {
    let mu = model.immigrant_rate();
    if model.pi0() == 1.0 {
        return IntensityBound::Finite(mu);
    }
    match intensity_bound(model.inner()) {
        IntensityBound::Finite(b) => IntensityBound::Finite(mu.max(b)),
        IntensityBound::Unbounded => IntensityBound::Unbounded,
    }
}
