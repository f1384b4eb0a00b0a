use super::model::DurationModel;
use super::pattern::PointPattern;
use crate::error::{numerical, Error, Result};
use crate::numeric::{integrate, CompensatedSum};

/// Log-likelihood conditioned on the first `L` durations:
/// `Σ_{i=L+1..n} ln f*(x_i) + ln S*(T − t_n)`.
pub fn conditional_log_likelihood<M: DurationModel + ?Sized>(model: &M, pattern: &PointPattern) -> Result<f64> {
    let order = model.order();
    let n = pattern.len();
    if n <= order {
        return Err(Error::InsufficientEvents { n, order });
    }
    let x = pattern.durations();
    let mut total = CompensatedSum::new(0.0);
    for i in (order + 1)..=n {
        total.add(model.mixture(&pattern.history(i, order)).ln_density(x[i - 1]));
    }
    total.add(model.mixture(&pattern.history(n + 1, order)).ln_survival(pattern.censored_tail()));
    finite(total.value())
}

/// Full log-likelihood including the first-arrival and truncated-history
/// terms: `Σ_{i=1..n} ln f*(x_i) + ln S*(T − t_n)`.
pub fn full_log_likelihood<M: DurationModel + ?Sized>(model: &M, pattern: &PointPattern) -> Result<f64> {
    let order = model.order();
    let n = pattern.len();
    let x = pattern.durations();
    let mut total = CompensatedSum::new(0.0);
    for i in 1..=n {
        total.add(model.mixture(&pattern.history(i, order)).ln_density(x[i - 1]));
    }
    total.add(model.mixture(&pattern.history(n + 1, order)).ln_survival(pattern.censored_tail()));
    finite(total.value())
}

/// Full log-likelihood in intensity form, `Σ ln λ*(t_i) − ∫_0^T λ*(t) dt`,
/// with the compensator integrated numerically between events.
pub fn intensity_log_likelihood<M: DurationModel + ?Sized>(
    model: &M,
    pattern: &PointPattern,
    tol: f64,
) -> Result<f64> {
    let order = model.order();
    let n = pattern.len();
    let x = pattern.durations();
    let mut total = CompensatedSum::new(0.0);
    for i in 1..=(n + 1) {
        let mixture = model.mixture(&pattern.history(i, order));
        let span = if i <= n { x[i - 1] } else { pattern.censored_tail() };
        if i <= n {
            total.add(mixture.hazard(span).ln());
        }
        total.add(-integrate(|s| mixture.hazard(s), 0.0, span, tol));
    }
    finite(total.value())
}

fn finite(v: f64) -> Result<f64> {
    if v.is_nan() || v == f64::INFINITY {
        Err(numerical(format!("log-likelihood evaluated to {v}")))
    } else {
        Ok(v)
    }
}
