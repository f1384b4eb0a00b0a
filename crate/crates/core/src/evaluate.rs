//! Posterior prediction, time-rescaling checks, duration-series diagnostics
//! and forecast scores.
//!
//! Every predictive routine walks the posterior draws and, for each draw,
//! produces `replicates` simulated futures. Uniforms come from a per-draw
//! ChaCha stream positioned at `(row · replicates + rep) · steps + step`, so
//! results depend only on the seed and never on evaluation order.

use serde::{Deserialize, Serialize};

use crate::error::{numerical, Error, Result};
use crate::mcmc::{FittedModel, PosteriorSamples, Summary};
use crate::numeric::{ks_uniform, mean, quantile_sorted, KsTest};
use crate::process::PointPattern;
use crate::simulate::{solve_seasonal_step, EventStream};

/// Nominal coverage of the interval score and predictive bands.
pub const INTERVAL_LEVEL: f64 = 0.95;

/// Sampling controls shared by the predictive routines.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct PredictOptions {
    /// Simulated futures per posterior draw.
    pub replicates: usize,
    pub seed: u64,
}

impl Default for PredictOptions {
    fn default() -> Self {
        Self { replicates: 1, seed: 1 }
    }
}

/// Simulated future durations, one row per (posterior draw, replicate).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PredictiveDraws {
    pub steps: usize,
    /// Lower truncation of the first step (`T − t_n`, or 0 in-sample).
    pub floor: f64,
    /// Row-major, `steps` values per row.
    pub values: Vec<f64>,
}

impl PredictiveDraws {
    pub fn rows(&self) -> usize {
        self.values.len() / self.steps
    }

    /// Draws of step `k` (1-based).
    pub fn step(&self, k: usize) -> Vec<f64> {
        assert!((1..=self.steps).contains(&k), "step {k} out of 1..={}", self.steps);
        self.values.iter().skip(k - 1).step_by(self.steps).copied().collect()
    }

    pub fn summary(&self, k: usize) -> Summary {
        Summary::of(&self.step(k))
    }
}

fn check_options(samples: &PosteriorSamples, options: &PredictOptions) -> Result<()> {
    if options.replicates == 0 {
        return Err(Error::Contract("replicates must be at least 1".into()));
    }
    if samples.rows() == 0 {
        return Err(Error::Contract("posterior samples are empty".into()));
    }
    Ok(())
}

fn check_pattern(samples: &PosteriorSamples, pattern: &PointPattern) -> Result<()> {
    if samples.meta.events != pattern.len() {
        return Err(Error::Contract(format!(
            "samples were fitted to {} events but the pattern has {}",
            samples.meta.events,
            pattern.len()
        )));
    }
    Ok(())
}

/// One-step-ahead predictive draws of `x_{n+1}`, truncated below at `T − t_n`.
pub fn predict_next(samples: &PosteriorSamples, pattern: &PointPattern, options: PredictOptions) -> Result<PredictiveDraws> {
    predict_k_ahead(samples, pattern, 1, options)
}

/// Draws of `x_{n+1}, ..., x_{n+k}`: the first truncated below at `T − t_n`,
/// the rest forward-simulated from the full conditional mixtures.
pub fn predict_k_ahead(
    samples: &PosteriorSamples,
    pattern: &PointPattern,
    k: usize,
    options: PredictOptions,
) -> Result<PredictiveDraws> {
    if k == 0 {
        return Err(Error::Contract("prediction horizon k must be at least 1".into()));
    }
    check_options(samples, &options)?;
    check_pattern(samples, pattern)?;
    let n = pattern.len();
    let tail = pattern.censored_tail();
    let mut stream = EventStream::new(options.seed);
    let mut values = Vec::with_capacity(samples.rows() * options.replicates * k);
    for r in 0..samples.rows() {
        let model = samples.model_at(r)?;
        let order = model.order();
        let (first, scale) = model.duration_mixture(pattern, n + 1);
        let base_lags = model.latent_lags(pattern, n + 1);
        for rep in 0..options.replicates {
            let slot = (r * options.replicates + rep) * k;
            let u = stream.uniforms(slot);
            let floor = tail / scale;
            let (_, z) = first.sample_above(floor, u.lag, u.value);
            if !z.is_finite() {
                return Err(numerical(format!("truncated draw above {floor} is not finite")));
            }
            // Quantile inversion can round onto the floor itself.
            let x = (scale * z).max(tail.next_up());
            values.push(x);

            let mut lags = base_lags.clone();
            let mut t = pattern.horizon();
            let mut latent = z;
            for step in 1..k {
                lags.insert(0, latent);
                lags.truncate(order);
                let u = stream.uniforms(slot + step);
                let (_, z) = model.mixture(&lags).sample_with(u.lag, u.value);
                let x = match model.seasonal() {
                    None => z,
                    Some(s) => {
                        t += values.last().copied().unwrap_or(0.0);
                        solve_seasonal_step(s, t, z)?
                    }
                };
                if !x.is_finite() {
                    return Err(numerical(format!("step {} draw is not finite", step + 1)));
                }
                values.push(x);
                latent = z;
            }
        }
    }
    Ok(PredictiveDraws { steps: k, floor: tail, values })
}

/// Predictive draws of the observed duration `x_i`, `L + 1 ≤ i ≤ n`, given
/// its observed lags.
pub fn in_sample_predictive(
    samples: &PosteriorSamples,
    pattern: &PointPattern,
    i: usize,
    options: PredictOptions,
) -> Result<PredictiveDraws> {
    check_options(samples, &options)?;
    check_pattern(samples, pattern)?;
    let order = samples.meta.model.order();
    if i <= order || i > pattern.len() {
        return Err(Error::Contract(format!("index {i} outside {}..={}", order + 1, pattern.len())));
    }
    let mut stream = EventStream::new(options.seed);
    let mut values = Vec::with_capacity(samples.rows() * options.replicates);
    for r in 0..samples.rows() {
        let (mixture, scale) = samples.model_at(r)?.duration_mixture(pattern, i);
        for rep in 0..options.replicates {
            let u = stream.uniforms(r * options.replicates + rep);
            values.push(scale * mixture.sample_with(u.lag, u.value).1);
        }
    }
    Ok(PredictiveDraws { steps: 1, floor: 0.0, values })
}

/// `U*_i = 1 − S*(x_i | lags)` for one fitted model, `i = L + 1..n`.
pub fn rescaled_uniforms_for(model: &FittedModel, pattern: &PointPattern) -> Vec<f64> {
    let durations = pattern.durations();
    (model.order() + 1..=pattern.len())
        .map(|i| {
            let (mixture, scale) = model.duration_mixture(pattern, i);
            mixture.cdf(durations[i - 1] / scale)
        })
        .collect()
}

/// Time-rescaled durations summarised over the posterior.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RescaledUniforms {
    /// 1-based event indices `L + 1..=n`.
    pub index: Vec<usize>,
    pub mean: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
    /// Values at the posterior-mean parameters.
    pub plug_in: Vec<f64>,
}

impl RescaledUniforms {
    /// KS test of the posterior-mean values against Uniform(0, 1).
    pub fn ks_mean(&self) -> KsTest {
        ks_uniform(&self.mean)
    }

    pub fn ks_plug_in(&self) -> KsTest {
        ks_uniform(&self.plug_in)
    }
}

pub fn rescaled_uniforms(samples: &PosteriorSamples, pattern: &PointPattern) -> Result<RescaledUniforms> {
    check_pattern(samples, pattern)?;
    if samples.rows() == 0 {
        return Err(Error::Contract("posterior samples are empty".into()));
    }
    let order = samples.meta.model.order();
    if pattern.len() <= order {
        return Err(Error::InsufficientEvents { n: pattern.len(), order });
    }
    let m = pattern.len() - order;
    let mut per_event = vec![Vec::with_capacity(samples.rows()); m];
    for r in 0..samples.rows() {
        let u = rescaled_uniforms_for(&samples.model_at(r)?, pattern);
        per_event.iter_mut().zip(u).for_each(|(col, v)| col.push(v));
    }
    let summaries: Vec<Summary> = per_event.iter().map(|c| Summary::of(c)).collect();
    Ok(RescaledUniforms {
        index: (order + 1..=pattern.len()).collect(),
        mean: summaries.iter().map(|s| s.mean).collect(),
        lower: summaries.iter().map(|s| s.lower).collect(),
        upper: summaries.iter().map(|s| s.upper).collect(),
        plug_in: rescaled_uniforms_for(&samples.mean_model()?, pattern),
    })
}

/// Uniform QQ pairs `(theoretical, empirical)` with plotting positions
/// `(k − ½)/m`.
pub fn qq_uniform(values: &[f64]) -> Vec<(f64, f64)> {
    let mut sorted = values.to_vec();
    sorted.sort_by(f64::total_cmp);
    let m = sorted.len() as f64;
    sorted.into_iter().enumerate().map(|(k, v)| ((k as f64 + 0.5) / m, v)).collect()
}

/// Sample autocorrelations at lags `0..=max_lag`.
pub fn acf(series: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    if series.len() <= max_lag + 1 {
        return Err(Error::Contract(format!(
            "series of length {} is too short for {max_lag} lags",
            series.len()
        )));
    }
    let n = series.len();
    let centre = mean(series);
    let dev: Vec<f64> = series.iter().map(|x| x - centre).collect();
    let autocov = |h: usize| dev[..n - h].iter().zip(&dev[h..]).map(|(a, b)| a * b).sum::<f64>() / n as f64;
    let c0 = autocov(0);
    if !(c0 > 0.0) || !c0.is_finite() {
        return Err(Error::Data("autocorrelation of a constant series is undefined".into()));
    }
    Ok((0..=max_lag).map(|h| if h == 0 { 1.0 } else { autocov(h) / c0 }).collect())
}

/// Sample partial autocorrelations at lags `1..=max_lag` by the
/// Durbin–Levinson recursion.
pub fn pacf(series: &[f64], max_lag: usize) -> Result<Vec<f64>> {
    let rho = acf(series, max_lag)?;
    let mut out = Vec::with_capacity(max_lag);
    let mut phi: Vec<f64> = Vec::with_capacity(max_lag);
    for k in 1..=max_lag {
        let num = rho[k] - phi.iter().enumerate().map(|(j, p)| p * rho[k - 1 - j]).sum::<f64>();
        let den = 1.0 - phi.iter().enumerate().map(|(j, p)| p * rho[j + 1]).sum::<f64>();
        if !(den.abs() > 0.0) {
            return Err(numerical(format!("Durbin-Levinson recursion degenerated at lag {k}")));
        }
        let kk = num / den;
        let next: Vec<f64> = (0..phi.len()).map(|j| phi[j] - kk * phi[phi.len() - 1 - j]).collect();
        phi = next;
        phi.push(kk);
        out.push(kk);
    }
    Ok(out)
}

/// Approximate 95% noise band `±2/√n` for sample autocorrelations.
pub fn noise_band(len: usize) -> f64 {
    2.0 / (len as f64).sqrt()
}

/// Point and distributional forecast accuracy.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ForecastScores {
    /// Median absolute error of the predictive means.
    pub mad: f64,
    pub rmse: f64,
    pub crps: f64,
    pub interval_score: f64,
}

/// Sample CRPS `E|X − y| − ½ E|X − X′|`, the second term over all ordered
/// pairs of draws including coincident ones.
pub fn crps(draws: &[f64], actual: f64) -> f64 {
    let m = draws.len() as f64;
    let mut sorted = draws.to_vec();
    sorted.sort_by(f64::total_cmp);
    let abs_err = sorted.iter().map(|x| (x - actual).abs()).sum::<f64>() / m;
    // Σ_{i,j} |x_i − x_j| = 2 Σ_k (2k − m + 1) x_(k) over sorted draws.
    let spread: f64 = sorted.iter().enumerate().map(|(k, x)| (2.0 * k as f64 - m + 1.0) * x).sum::<f64>() * 2.0;
    abs_err - 0.5 * spread / (m * m)
}

/// Interval score of the equal-tailed interval at level `1 − alpha`.
pub fn interval_score(draws: &[f64], actual: f64, alpha: f64) -> f64 {
    let mut sorted = draws.to_vec();
    sorted.sort_by(f64::total_cmp);
    let lo = quantile_sorted(&sorted, alpha / 2.0);
    let hi = quantile_sorted(&sorted, 1.0 - alpha / 2.0);
    (hi - lo) + 2.0 / alpha * ((lo - actual).max(0.0) + (actual - hi).max(0.0))
}

/// Average scores over targets; `predictive[j]` holds draws for `actuals[j]`.
pub fn forecast_scores(actuals: &[f64], predictive: &[Vec<f64>]) -> Result<ForecastScores> {
    if actuals.is_empty() {
        return Err(Error::Contract("no forecast targets".into()));
    }
    if actuals.len() != predictive.len() {
        return Err(Error::Contract(format!(
            "{} targets but {} predictive samples",
            actuals.len(),
            predictive.len()
        )));
    }
    if predictive.iter().any(Vec::is_empty) {
        return Err(Error::Contract("empty predictive sample".into()));
    }
    let m = actuals.len() as f64;
    let mut abs_err: Vec<f64> =
        actuals.iter().zip(predictive).map(|(y, d)| (y - mean(d)).abs()).collect();
    let rmse = (abs_err.iter().map(|e| e * e).sum::<f64>() / m).sqrt();
    abs_err.sort_by(f64::total_cmp);
    let alpha = 1.0 - INTERVAL_LEVEL;
    Ok(ForecastScores {
        mad: quantile_sorted(&abs_err, 0.5),
        rmse,
        crps: actuals.iter().zip(predictive).map(|(y, d)| crps(d, *y)).sum::<f64>() / m,
        interval_score: actuals.iter().zip(predictive).map(|(y, d)| interval_score(d, *y, alpha)).sum::<f64>() / m,
    })
}
