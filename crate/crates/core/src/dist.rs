//! Duration distributions used as mixture components.
//!
//! Everything is evaluated in log space; `pdf`/`survival` are `exp` of the
//! log forms. Parameters are validated once, at construction, so the
//! evaluation methods are unchecked and cheap enough for sampler hot loops.
//! The free functions (`lomax_pdf`, `burr_quantile`, ...) are the checked
//! entry points that also validate their arguments.

use rand::{Rng, RngCore};
use rand_distr::{Distribution, Gamma};
use serde::{Deserialize, Serialize};
use statrs::function::gamma::gamma_ur;

use crate::error::{domain, numerical, Result};
use crate::numeric::{bisect, golden_section_max, log_sum_exp, open_unit};

fn check_positive(name: &str, v: f64) -> Result<()> {
    if v.is_finite() && v > 0.0 {
        Ok(())
    } else {
        Err(domain(format!("{name} must be finite and > 0, got {v}")))
    }
}

fn check_time(x: f64) -> Result<()> {
    if x.is_finite() && x >= 0.0 {
        Ok(())
    } else {
        Err(domain(format!("time argument must be finite and >= 0, got {x}")))
    }
}

fn check_prob(u: f64) -> Result<()> {
    if (0.0..1.0).contains(&u) {
        Ok(())
    } else {
        Err(domain(format!("probability must lie in [0, 1), got {u}")))
    }
}

/// Lomax (Pareto type II) distribution with density
/// `shape/scale · (1 + x/scale)^-(shape+1)` on `x > 0`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LomaxParams {
    scale: f64,
    shape: f64,
}

impl LomaxParams {
    pub fn new(scale: f64, shape: f64) -> Result<Self> {
        check_positive("Lomax scale", scale)?;
        check_positive("Lomax shape", shape)?;
        Ok(Self { scale, shape })
    }

    /// Skips validation; callers guarantee both values are finite and positive.
    #[inline]
    pub(crate) fn raw(scale: f64, shape: f64) -> Self {
        debug_assert!(scale > 0.0 && shape > 0.0);
        Self { scale, shape }
    }

    pub fn scale(&self) -> f64 {
        self.scale
    }

    pub fn shape(&self) -> f64 {
        self.shape
    }

    #[inline]
    pub fn ln_pdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return f64::NEG_INFINITY;
        }
        (self.shape / self.scale).ln() - (self.shape + 1.0) * (x / self.scale).ln_1p()
    }

    #[inline]
    pub fn ln_survival(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        -self.shape * (x / self.scale).ln_1p()
    }

    #[inline]
    pub fn hazard(&self, x: f64) -> f64 {
        self.shape / (self.scale + x.max(0.0))
    }

    /// Solves `ln S(x) = ln_s` for `ln_s <= 0`.
    #[inline]
    pub fn inverse_ln_survival(&self, ln_s: f64) -> f64 {
        self.scale * (-ln_s / self.shape).exp_m1()
    }

    /// Mean `scale / (shape - 1)`, defined for `shape > 1`.
    pub fn mean(&self) -> Option<f64> {
        (self.shape > 1.0).then(|| self.scale / (self.shape - 1.0))
    }
}

/// Three-parameter Burr (Burr XII) distribution with survival
/// `(1 + (x/lambda)^gamma)^-psi`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BurrParams {
    gamma: f64,
    lambda: f64,
    psi: f64,
}

impl BurrParams {
    pub fn new(gamma: f64, lambda: f64, psi: f64) -> Result<Self> {
        check_positive("Burr gamma", gamma)?;
        check_positive("Burr lambda", lambda)?;
        check_positive("Burr psi", psi)?;
        Ok(Self { gamma, lambda, psi })
    }

    /// Skips validation; callers guarantee all values are finite and positive.
    #[inline]
    pub(crate) fn raw(gamma: f64, lambda: f64, psi: f64) -> Self {
        debug_assert!(gamma > 0.0 && lambda > 0.0 && psi > 0.0);
        Self { gamma, lambda, psi }
    }

    /// Log-logistic distribution, the Burr member with `psi = 1`.
    pub fn log_logistic(gamma: f64, lambda: f64) -> Result<Self> {
        Self::new(gamma, lambda, 1.0)
    }

    pub fn gamma(&self) -> f64 {
        self.gamma
    }

    pub fn lambda(&self) -> f64 {
        self.lambda
    }

    pub fn psi(&self) -> f64 {
        self.psi
    }

    #[inline]
    pub fn ln_pdf(&self, x: f64) -> f64 {
        if x < 0.0 {
            return f64::NEG_INFINITY;
        }
        let base = (self.psi * self.gamma / self.lambda).ln();
        if x == 0.0 {
            return match self.gamma.partial_cmp(&1.0) {
                Some(std::cmp::Ordering::Less) => f64::INFINITY,
                Some(std::cmp::Ordering::Equal) => base,
                _ => f64::NEG_INFINITY,
            };
        }
        let r = x / self.lambda;
        base + (self.gamma - 1.0) * r.ln() - (self.psi + 1.0) * r.powf(self.gamma).ln_1p()
    }

    #[inline]
    pub fn ln_survival(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return 0.0;
        }
        -self.psi * (x / self.lambda).powf(self.gamma).ln_1p()
    }

    #[inline]
    pub fn hazard(&self, x: f64) -> f64 {
        if x <= 0.0 {
            return match self.gamma.partial_cmp(&1.0) {
                Some(std::cmp::Ordering::Less) => f64::INFINITY,
                Some(std::cmp::Ordering::Equal) => self.psi / self.lambda,
                _ => 0.0,
            };
        }
        let rg = (x / self.lambda).powf(self.gamma);
        self.psi * self.gamma * rg / (x * (1.0 + rg))
    }

    #[inline]
    pub fn inverse_ln_survival(&self, ln_s: f64) -> f64 {
        self.lambda * (-ln_s / self.psi).exp_m1().powf(1.0 / self.gamma)
    }

    /// Mean `lambda · Γ(1 + 1/γ) Γ(ψ - 1/γ) / Γ(ψ)`, defined for `γψ > 1`.
    pub fn mean(&self) -> Option<f64> {
        use statrs::function::gamma::ln_gamma;
        (self.gamma * self.psi > 1.0).then(|| {
            let g = 1.0 / self.gamma;
            self.lambda * (ln_gamma(1.0 + g) + ln_gamma(self.psi - g) - ln_gamma(self.psi)).exp()
        })
    }

    /// Supremum of the hazard over `x > 0`. Unbounded (`None`) for `γ < 1`;
    /// for `γ > 1` the hump is located numerically by golden-section search.
    pub fn hazard_supremum(&self) -> Option<f64> {
        if self.gamma < 1.0 {
            return None;
        }
        if self.gamma == 1.0 {
            return Some(self.psi / self.lambda);
        }
        // The hazard scales as h(x; λ) = h(x/λ; 1)/λ, so search on the unit scale.
        let unit = Self { lambda: 1.0, ..*self };
        let mut hi = 1.0;
        while unit.hazard(hi) > unit.hazard(hi * 0.5) {
            hi *= 2.0;
        }
        let (_, peak) = golden_section_max(|x| unit.hazard(x), 0.0, hi, 1e-12);
        Some(peak / self.lambda)
    }
}

/// Exponential distribution with the given rate.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Exponential {
    rate: f64,
}

impl Exponential {
    pub fn new(rate: f64) -> Result<Self> {
        check_positive("exponential rate", rate)?;
        Ok(Self { rate })
    }

    pub fn rate(&self) -> f64 {
        self.rate
    }
}

/// A positive-valued duration distribution usable as a mixture component.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "type", rename_all = "snake_case")]
pub enum Component {
    Lomax(LomaxParams),
    Burr(BurrParams),
    Exponential(Exponential),
}

impl Component {
    #[inline]
    pub fn ln_pdf(&self, x: f64) -> f64 {
        match self {
            Self::Lomax(p) => p.ln_pdf(x),
            Self::Burr(p) => p.ln_pdf(x),
            Self::Exponential(e) => {
                if x < 0.0 {
                    f64::NEG_INFINITY
                } else {
                    e.rate.ln() - e.rate * x
                }
            }
        }
    }

    pub fn pdf(&self, x: f64) -> f64 {
        self.ln_pdf(x).exp()
    }

    #[inline]
    pub fn ln_survival(&self, x: f64) -> f64 {
        match self {
            Self::Lomax(p) => p.ln_survival(x),
            Self::Burr(p) => p.ln_survival(x),
            Self::Exponential(e) => -e.rate * x.max(0.0),
        }
    }

    pub fn survival(&self, x: f64) -> f64 {
        self.ln_survival(x).exp()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        -self.ln_survival(x).exp_m1()
    }

    #[inline]
    pub fn hazard(&self, x: f64) -> f64 {
        match self {
            Self::Lomax(p) => p.hazard(x),
            Self::Burr(p) => p.hazard(x),
            Self::Exponential(e) => e.rate,
        }
    }

    /// The `x` at which `ln S(x) = ln_s`.
    #[inline]
    pub fn inverse_ln_survival(&self, ln_s: f64) -> f64 {
        match self {
            Self::Lomax(p) => p.inverse_ln_survival(ln_s),
            Self::Burr(p) => p.inverse_ln_survival(ln_s),
            Self::Exponential(e) => -ln_s / e.rate,
        }
    }

    /// Closed-form inverse CDF; `u` must lie in `[0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        self.inverse_ln_survival((-u).ln_1p())
    }

    pub fn mean(&self) -> Option<f64> {
        match self {
            Self::Lomax(p) => p.mean(),
            Self::Burr(p) => p.mean(),
            Self::Exponential(e) => Some(1.0 / e.rate),
        }
    }

    /// Draw by inversion from the open unit interval.
    pub fn sample<R: RngCore + ?Sized>(&self, rng: &mut R) -> f64 {
        self.quantile(open_unit(rng.next_u64()))
    }

    /// Draw conditional on exceeding `floor`, by inverting the survival
    /// function in log space: `S(x) = S(floor) · (1 - u)`.
    pub fn sample_above(&self, floor: f64, u: f64) -> f64 {
        let ln_s = self.ln_survival(floor) + (-u).ln_1p();
        self.inverse_ln_survival(ln_s).max(floor)
    }
}

pub fn lomax_pdf(x: f64, p: &LomaxParams) -> Result<f64> {
    check_time(x)?;
    Ok(p.ln_pdf(x).exp())
}

pub fn lomax_survival(x: f64, p: &LomaxParams) -> Result<f64> {
    check_time(x)?;
    Ok(p.ln_survival(x).exp())
}

pub fn lomax_quantile(u: f64, p: &LomaxParams) -> Result<f64> {
    check_prob(u)?;
    Ok(p.inverse_ln_survival((-u).ln_1p()))
}

pub fn burr_pdf(x: f64, p: &BurrParams) -> Result<f64> {
    check_time(x)?;
    Ok(p.ln_pdf(x).exp())
}

pub fn burr_survival(x: f64, p: &BurrParams) -> Result<f64> {
    check_time(x)?;
    Ok(p.ln_survival(x).exp())
}

pub fn burr_quantile(u: f64, p: &BurrParams) -> Result<f64> {
    check_prob(u)?;
    Ok(p.inverse_ln_survival((-u).ln_1p()))
}

/// Heavy-right-tail copula
/// `C(u, v) = u + v - 1 + ((1-u)^(-1/a) + (1-v)^(-1/a) - 1)^(-a)`.
pub fn hrt_copula_cdf(u: f64, v: f64, a: f64) -> Result<f64> {
    if !(0.0..=1.0).contains(&u) || !(0.0..=1.0).contains(&v) {
        return Err(domain(format!("copula arguments must lie in [0, 1], got ({u}, {v})")));
    }
    check_positive("copula parameter", a)?;
    if u == 0.0 || v == 0.0 {
        return Ok(0.0);
    }
    if u == 1.0 {
        return Ok(v);
    }
    if v == 1.0 {
        return Ok(u);
    }
    let inner = (1.0 - u).powf(-1.0 / a) + (1.0 - v).powf(-1.0 / a) - 1.0;
    Ok((u + v - 1.0 + inner.powf(-a)).clamp(0.0, u.min(v)))
}

/// Parameters of the Burr conditional `Y | X = x_lag` under the HRT copula
/// with Burr margins: `(γ, λ̃(x_lag), ψ + 1)`, `λ̃(x) = (λ^γ + x^γ)^(1/γ)`.
pub fn burr_conditional_params(x_lag: f64, p: &BurrParams) -> Result<BurrParams> {
    check_time(x_lag)?;
    Ok(BurrParams {
        gamma: p.gamma,
        lambda: burr_conditional_scale(p.gamma, p.lambda, x_lag),
        psi: p.psi + 1.0,
    })
}

/// `λ̃(x) = λ (1 + (x/λ)^γ)^(1/γ)`, written to avoid overflow of `λ^γ`.
#[inline]
pub fn burr_conditional_scale(gamma: f64, lambda: f64, x_lag: f64) -> f64 {
    lambda * ((x_lag / lambda).powf(gamma).ln_1p() / gamma).exp()
}

/// Scaled-Lomax conditional `Lomax(alpha·phi + x_lag, alpha)`.
pub fn scaled_lomax_conditional_params(x_lag: f64, alpha: f64, phi: f64) -> Result<LomaxParams> {
    check_time(x_lag)?;
    if !(alpha.is_finite() && alpha > 1.0) {
        return Err(domain(format!("scaled-Lomax alpha must exceed 1, got {alpha}")));
    }
    check_positive("scaled-Lomax phi", phi)?;
    LomaxParams::new(alpha * phi + x_lag, alpha)
}

/// Lomax-family conditional `Lomax(phi + x_lag, alpha)`.
pub fn lomax_conditional_params(x_lag: f64, phi: f64, alpha: f64) -> Result<LomaxParams> {
    check_time(x_lag)?;
    LomaxParams::new(phi + x_lag, alpha)
}

/// Gamma distribution (shape, rate) truncated to `(lower, ∞)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GammaTruncation {
    pub shape: f64,
    pub rate: f64,
    pub lower: f64,
}

impl GammaTruncation {
    pub fn new(shape: f64, rate: f64, lower: f64) -> Result<Self> {
        check_positive("gamma shape", shape)?;
        check_positive("gamma rate", rate)?;
        if !(lower.is_finite() && lower >= 0.0) {
            return Err(domain(format!("truncation bound must be finite and >= 0, got {lower}")));
        }
        Ok(Self { shape, rate, lower })
    }
}

const REJECTION_MIN_MASS: f64 = 0.1;

/// Draws from a lower-truncated gamma. Plain rejection when the retained
/// mass exceeds 0.1, otherwise inversion of the regularized upper incomplete
/// gamma function by bisection on the log tail probability.
pub fn trunc_gamma_sample<R: Rng + ?Sized>(t: &GammaTruncation, rng: &mut R) -> Result<f64> {
    let gamma = Gamma::new(t.shape, 1.0 / t.rate).map_err(|e| domain(e.to_string()))?;
    if t.lower == 0.0 {
        return Ok(gamma.sample(rng));
    }
    let tail = gamma_ur(t.shape, t.rate * t.lower);
    if !(tail > 0.0) || !tail.is_finite() {
        return Err(numerical(format!(
            "truncated gamma (shape {}, rate {}) has no mass above {}",
            t.shape, t.rate, t.lower
        )));
    }
    if tail > REJECTION_MIN_MASS {
        loop {
            let x = gamma.sample(rng);
            if x > t.lower {
                return Ok(x);
            }
        }
    }
    let target = tail.ln() + open_unit(rng.next_u64()).ln();
    let ln_tail = |x: f64| gamma_ur(t.shape, t.rate * x).ln();
    let mut hi = t.lower + (t.shape / t.rate).max(t.lower);
    let mut guard = 0;
    while ln_tail(hi) > target {
        hi = t.lower + 2.0 * (hi - t.lower);
        guard += 1;
        if guard > 200 {
            return Err(numerical("truncated gamma inversion bracket did not close"));
        }
    }
    let x = bisect(|x| ln_tail(x) - target, t.lower, hi, 1e-14, 300);
    Ok(x.max(t.lower))
}

/// Dirichlet draw through normalised log-gamma variates, which keeps tiny
/// shape parameters from underflowing every component to zero.
pub fn dirichlet_sample<R: Rng + ?Sized>(shapes: &[f64], rng: &mut R) -> Result<Vec<f64>> {
    if shapes.is_empty() {
        return Err(domain("Dirichlet needs at least one shape"));
    }
    let mut logs = Vec::with_capacity(shapes.len());
    for &a in shapes {
        check_positive("Dirichlet shape", a)?;
        let lg = if a >= 1.0 {
            Gamma::new(a, 1.0).map_err(|e| domain(e.to_string()))?.sample(rng).ln()
        } else {
            let g = Gamma::new(a + 1.0, 1.0).map_err(|e| domain(e.to_string()))?.sample(rng);
            g.ln() + open_unit(rng.next_u64()).ln() / a
        };
        logs.push(lg);
    }
    let norm = log_sum_exp(&logs);
    let mut w: Vec<f64> = logs.iter().map(|l| (l - norm).exp()).collect();
    let total: f64 = w.iter().sum();
    w.iter_mut().for_each(|x| *x /= total);
    Ok(w)
}
