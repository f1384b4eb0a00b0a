//! Point patterns, MTDPP/MTDCPP models and their conditional densities,
//! survivals, intensities, stationary marginals and likelihoods.
//!
//! Lag histories are passed most recent first: `lags[0] = x_{i-1}`.
//! Mixtures built by an MTDPP index lag `l` at position `l - 1`; mixtures
//! built by an MTDCPP put the immigrant at position 0 and lag `l` at `l`.

mod likelihood;
mod mixture;
mod model;
mod pattern;
mod seasonal;

pub use likelihood::{conditional_log_likelihood, full_log_likelihood, intensity_log_likelihood};
pub use mixture::Mixture;
pub use model::{
    intensity_bound, mtdcpp_intensity_bound, stationary_marginal, DurationModel, Family, IntensityBound,
    MixtureWeights, MtdcppModel, MtdppModel, SIMPLEX_TOL,
};
pub use pattern::{PointPattern, MIN_SPACING};
pub use seasonal::{seasonal_mu, seasonal_transform, SeasonalModel, SeasonalParams};

use crate::error::{domain, Error, Result};

/// Mixture for duration `index` (1-based) given at least `min(index-1, L)`
/// lagged durations, most recent first.
pub fn conditional_mixture<M: DurationModel + ?Sized>(model: &M, history: &[f64], index: usize) -> Result<Mixture> {
    if index == 0 {
        return Err(Error::Contract("duration index is 1-based".into()));
    }
    let need = (index - 1).min(model.order());
    if history.len() < need {
        return Err(Error::Contract(format!(
            "duration {index} needs {need} lagged durations, got {}",
            history.len()
        )));
    }
    if let Some(bad) = history[..need].iter().find(|x| !(x.is_finite() && **x > 0.0)) {
        return Err(domain(format!("lagged durations must be finite and > 0, got {bad}")));
    }
    Ok(model.mixture(&history[..need]))
}

fn check_duration(x: f64) -> Result<()> {
    if x.is_finite() && x >= 0.0 {
        Ok(())
    } else {
        Err(domain(format!("duration must be finite and >= 0, got {x}")))
    }
}

/// Conditional density `f*(x)` of duration `index`.
pub fn conditional_duration_density<M: DurationModel + ?Sized>(
    model: &M,
    x: f64,
    history: &[f64],
    index: usize,
) -> Result<f64> {
    check_duration(x)?;
    Ok(conditional_mixture(model, history, index)?.density(x))
}

/// Conditional survival `S*(x)` of duration `index`.
pub fn conditional_survival<M: DurationModel + ?Sized>(
    model: &M,
    x: f64,
    history: &[f64],
    index: usize,
) -> Result<f64> {
    check_duration(x)?;
    Ok(conditional_mixture(model, history, index)?.survival(x))
}

/// Mixture and elapsed time governing the intensity at `t`, using the
/// events of `pattern` strictly before `t`.
pub fn intensity_state<M: DurationModel + ?Sized>(model: &M, t: f64, pattern: &PointPattern) -> Result<(Mixture, f64)> {
    if !(t.is_finite() && t > 0.0) {
        return Err(domain(format!("time must be finite and > 0, got {t}")));
    }
    let n = pattern.count_before(t);
    let last = if n == 0 { 0.0 } else { pattern.times()[n - 1] };
    Ok((model.mixture(&pattern.history(n + 1, model.order())), t - last))
}

/// Conditional intensity `λ*(t) = Σ w*_l(t) h_l(t − t_{N(t⁻)})`, where
/// `pattern` holds the history before `t`.
pub fn conditional_intensity<M: DurationModel + ?Sized>(model: &M, t: f64, pattern: &PointPattern) -> Result<f64> {
    if t <= pattern.last_time() {
        return Err(Error::Contract(format!(
            "intensity time {t} is not after the last event {}",
            pattern.last_time()
        )));
    }
    let (mixture, elapsed) = intensity_state(model, t, pattern)?;
    Ok(mixture.hazard(elapsed))
}

/// Survival-reweighted mixture weights `w*_l(t)` at `t`.
pub fn local_weights<M: DurationModel + ?Sized>(model: &M, t: f64, pattern: &PointPattern) -> Result<Vec<f64>> {
    let (mixture, elapsed) = intensity_state(model, t, pattern)?;
    Ok(mixture.local_weights(elapsed))
}

/// Intensity along `grid`, each point using the events strictly before it.
pub fn intensity_path<M: DurationModel + ?Sized>(model: &M, pattern: &PointPattern, grid: &[f64]) -> Result<Vec<f64>> {
    grid.iter()
        .map(|&t| intensity_state(model, t, pattern).map(|(m, e)| m.hazard(e)))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{burr_pdf, BurrParams, Component, LomaxParams};
    use crate::numeric::{integrate, integrate_to_infinity};

    fn rel(a: f64, b: f64) -> f64 {
        (a - b).abs() / b.abs().max(1e-300)
    }

    fn scaled_lomax() -> MtdppModel {
        MtdppModel::scaled_lomax(5.0, 0.5, vec![0.5, 0.3, 0.2]).unwrap()
    }

    #[test]
    fn scaled_lomax_mixture_values() {
        let m = scaled_lomax();
        let h = [1.0, 0.4, 2.2];
        let f = conditional_duration_density(&m, 0.7, &h, 10).unwrap();
        let s = conditional_survival(&m, 0.7, &h, 10).unwrap();
        assert!(rel(f, 0.47305002181146584) < 1e-14, "{f}");
        assert!(rel(s, 0.40260040628796892) < 1e-14, "{s}");
        assert_eq!(conditional_survival(&m, 0.0, &h, 10).unwrap(), 1.0);
    }

    #[test]
    fn single_lag_is_component() {
        let m = MtdppModel::burr(2.0, 1.0, 6.0, vec![1.0]).unwrap();
        let c = BurrParams::new(2.0, 5f64.sqrt(), 6.0).unwrap();
        let f = conditional_duration_density(&m, 0.8, &[2.0], 3).unwrap();
        assert!(rel(f, burr_pdf(0.8, &c).unwrap()) < 1e-14);
        let p = PointPattern::new(vec![2.0], 10.0).unwrap();
        let lam = conditional_intensity(&m, 2.8, &p).unwrap();
        assert!(rel(lam, c.hazard(0.8)) < 1e-12);
    }

    #[test]
    fn degenerate_weights_select_one_lag() {
        let m = MtdppModel::burr(1.5, 0.8, 3.0, vec![0.0, 1.0, 0.0]).unwrap();
        let c = Component::Burr(BurrParams::new(1.5, crate::dist::burr_conditional_scale(1.5, 0.8, 0.4), 3.0).unwrap());
        let h = [1.0, 0.4, 2.2];
        assert!(rel(conditional_survival(&m, 0.9, &h, 9).unwrap(), c.survival(0.9)) < 1e-14);
    }

    #[test]
    fn burr_mixture_intensity_value() {
        let m = MtdppModel::burr(1.5, 0.8, 3.0, vec![0.6, 0.4]).unwrap();
        // Events at 1.2 and 1.7 give durations (1.2, 0.5); most recent first (0.5, 1.2).
        let p = PointPattern::new(vec![1.2, 1.7], 5.0).unwrap();
        let lam = conditional_intensity(&m, 2.6, &p).unwrap();
        assert!(rel(lam, 1.7947059230353585) < 1e-12, "{lam}");
        let f = conditional_duration_density(&m, 0.9, &[0.5, 1.2], 3).unwrap();
        let s = conditional_survival(&m, 0.9, &[0.5, 1.2], 3).unwrap();
        assert!(rel(lam * s, f) < 1e-10);
    }

    #[test]
    fn mtdcpp_values_and_limits() {
        let inner = MtdppModel::lomax(vec![0.1, 0.1], vec![5.0, 5.0], vec![0.6, 0.4]).unwrap();
        let m = MtdcppModel::new(0.5, 0.2, inner.clone()).unwrap();
        let h = [0.3, 2.0];
        let f = conditional_duration_density(&m, 0.25, &h, 5).unwrap();
        assert!(rel(f, 0.54127291367165208) < 1e-13, "{f}");
        let p = PointPattern::new(vec![2.0, 2.3], 4.0).unwrap();
        let lam = conditional_intensity(&m, 2.55, &p).unwrap();
        assert!(rel(lam, 0.87860429092541798) < 1e-12, "{lam}");

        let poisson = MtdcppModel::new(1.0, 0.2, inner.clone()).unwrap();
        for &t in &[2.31, 3.0, 3.99] {
            assert!(rel(conditional_intensity(&poisson, t, &p).unwrap(), 0.2) < 1e-14);
        }
        let pure = MtdcppModel::new(0.0, 0.2, inner.clone()).unwrap();
        for &t in &[2.31, 3.0, 3.99] {
            let a = conditional_intensity(&pure, t, &p).unwrap();
            let b = conditional_intensity(&inner, t, &p).unwrap();
            assert!(rel(a, b) < 1e-14);
        }
        // First duration under the cluster model is immigrant.
        assert!(rel(conditional_duration_density(&m, 1.0, &[], 1).unwrap(), 0.2 * (-0.2f64).exp()) < 1e-14);
    }

    #[test]
    fn truncated_history_reassigns_residual_weight() {
        let m = scaled_lomax();
        let mix = conditional_mixture(&m, &[1.0, 0.4, 2.2], 3).unwrap();
        assert_eq!(mix.weights(), &[0.5, 0.5]);
        let mix = conditional_mixture(&m, &[1.0], 2).unwrap();
        assert_eq!(mix.weights(), &[1.0]);
        let first = conditional_mixture(&m, &[], 1).unwrap();
        assert_eq!(first.components()[0], Component::Lomax(LomaxParams::new(2.5, 4.0).unwrap()));
        assert!(matches!(conditional_mixture(&m, &[1.0], 4), Err(Error::Contract(_))));
    }

    #[test]
    fn density_integrates_and_survival_matches() {
        let m = MtdppModel::burr(0.7, 1.3, 2.5, vec![0.5, 0.3, 0.2]).unwrap();
        let h = [0.2, 3.0, 0.05];
        let mix = conditional_mixture(&m, &h, 7).unwrap();
        let total = integrate_to_infinity(|x| mix.density(x), 0.0, 1e-11);
        assert!((total - 1.0).abs() < 1e-6, "{total}");
        for &x in &[0.1, 1.0, 4.0] {
            let s = 1.0 - integrate(|u| mix.density(u), 0.0, x, 1e-12);
            assert!((s - mix.survival(x)).abs() < 1e-8);
        }
    }

    #[test]
    fn stationary_marginals() {
        assert_eq!(
            stationary_marginal(&scaled_lomax()).unwrap(),
            Component::Lomax(LomaxParams::new(2.5, 4.0).unwrap())
        );
        let b = MtdppModel::burr(2.0, 1.0, 6.0, vec![0.5, 0.3, 0.2]).unwrap();
        assert_eq!(stationary_marginal(&b).unwrap(), Component::Burr(BurrParams::new(2.0, 1.0, 5.0).unwrap()));
        let ll = MtdppModel::burr(2.0, 1.0, 2.0, vec![1.0]).unwrap();
        assert_eq!(
            stationary_marginal(&ll).unwrap(),
            Component::Burr(BurrParams::log_logistic(2.0, 1.0).unwrap())
        );
        let het = MtdppModel::lomax(vec![0.1, 0.2], vec![5.0, 5.0], vec![0.5, 0.5]).unwrap();
        assert!(matches!(stationary_marginal(&het), Err(Error::NotStationary(_))));
    }

    #[test]
    fn intensity_bounds() {
        let one = MtdppModel::scaled_lomax(3.0, 0.5, vec![1.0]).unwrap();
        assert_eq!(intensity_bound(&one), IntensityBound::Finite(2.0));
        let b = intensity_bound(&scaled_lomax()).value().unwrap();
        assert!((b - 2.0).abs() < 1e-15);
        let burr = MtdppModel::burr(0.8, 1.0, 3.0, vec![1.0]).unwrap();
        assert_eq!(intensity_bound(&burr), IntensityBound::Unbounded);
        let burr = MtdppModel::burr(2.0, 1.0, 3.0, vec![1.0]).unwrap();
        // Burr hazard peak ψ(γ−1)^((γ−1)/γ)/λ at γ = 2: 3·1 = 3 ... evaluated as the numeric supremum.
        let sup = intensity_bound(&burr).value().unwrap();
        assert!((sup - 3.0).abs() < 1e-9, "{sup}");
    }

    #[test]
    fn scaled_lomax_intensity_below_local_bound() {
        let m = scaled_lomax();
        let p = PointPattern::new(vec![0.5, 0.6, 2.0, 2.1], 9.0).unwrap();
        for k in 1..200 {
            let t = 2.1 + k as f64 * 0.03;
            let lam = conditional_intensity(&m, t, &p).unwrap();
            let w = local_weights(&m, t, &p).unwrap();
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            assert!(lam <= w.iter().sum::<f64>() / 0.5 + 1e-12);
        }
    }

    #[test]
    fn intensity_rejects_time_before_last_event() {
        let p = PointPattern::new(vec![1.0, 2.0], 3.0).unwrap();
        assert!(matches!(conditional_intensity(&scaled_lomax(), 1.5, &p), Err(Error::Contract(_))));
    }

    #[test]
    fn likelihood_forms_agree() {
        let m = MtdppModel::burr(1.5, 0.8, 3.0, vec![0.6, 0.3, 0.1]).unwrap();
        let p = PointPattern::new(vec![0.3, 1.1, 1.3, 2.9, 3.2], 4.0).unwrap();
        let a = full_log_likelihood(&m, &p).unwrap();
        let b = intensity_log_likelihood(&m, &p, 1e-12).unwrap();
        assert!((a - b).abs() < 1e-8 * a.abs(), "{a} {b}");
    }

    #[test]
    fn conditional_likelihood_needs_more_than_order_events() {
        let m = scaled_lomax();
        let p = PointPattern::new(vec![1.0, 2.0, 3.0], 4.0).unwrap();
        assert!(matches!(
            conditional_log_likelihood(&m, &p),
            Err(Error::InsufficientEvents { n: 3, order: 3 })
        ));
    }

    #[test]
    fn single_term_conditional_likelihood() {
        let m = scaled_lomax();
        let p = PointPattern::new(vec![1.0, 1.5, 2.0, 3.0], 3.7).unwrap();
        let ll = conditional_log_likelihood(&m, &p).unwrap();
        let f = m.mixture(&[0.5, 0.5, 1.0]).ln_density(1.0);
        let s = m.mixture(&[1.0, 0.5, 0.5]).ln_survival(0.7);
        assert!((ll - (f + s)).abs() < 1e-14);
    }

    #[test]
    fn scaled_lomax_six_event_likelihood() {
        let p = PointPattern::new(vec![0.8, 1.1, 2.5, 2.9, 4.0, 4.6], 5.3).unwrap();
        let ll = conditional_log_likelihood(&scaled_lomax(), &p).unwrap();
        assert!((ll - -3.2167020462800023).abs() < 1e-13, "{ll}");
        let seasonal = SeasonalModel { inner: scaled_lomax(), seasonal: SeasonalParams::flat(2, 7.0).unwrap() };
        assert!((seasonal.conditional_log_likelihood(&p).unwrap() - ll).abs() < 1e-14);
    }

    #[test]
    fn seasonal_mu_values() {
        let s = SeasonalParams::from_blocks(&[1.0], &[0.0], 8.0).unwrap();
        assert!((s.mu(2.0) - std::f64::consts::E).abs() < 1e-15);
        let flat = SeasonalParams::flat(3, 365.0).unwrap();
        assert_eq!(flat.mu(123.4), 1.0);
        let p = PointPattern::new(vec![1.0, 2.5], 3.0).unwrap();
        assert_eq!(seasonal_transform(&p, &flat), p.durations());
    }

    #[test]
    fn serde_round_trip_models() {
        let m = MtdcppModel::new(0.3, 0.2, MtdppModel::lomax(vec![0.1, 0.2], vec![5.0, 3.0], vec![0.7, 0.3]).unwrap())
            .unwrap();
        let js = serde_json::to_string(&m).unwrap();
        assert_eq!(serde_json::from_str::<MtdcppModel>(&js).unwrap(), m);
        let bad = js.replace("0.3,", "1.3,");
        assert!(serde_json::from_str::<MtdcppModel>(&bad).is_err());
        let b = MtdppModel::burr(2.0, 1.0, 6.0, vec![0.5, 0.3, 0.2]).unwrap();
        let js = serde_json::to_string(&b).unwrap();
        assert_eq!(serde_json::from_str::<MtdppModel>(&js).unwrap(), b);
        assert!(serde_json::from_str::<MtdppModel>(&js.replace("6.0", "0.5")).is_err());
    }
}
