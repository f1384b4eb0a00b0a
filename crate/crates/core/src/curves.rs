//! Posterior summaries of curves: conditional intensity over time, the
//! stationary marginal duration density and hazard, and mixture weights.
//!
//! Each curve is evaluated once per posterior draw and summarised pointwise
//! by its mean and equal-tailed 95% interval.

use serde::{Deserialize, Serialize};

use crate::dist::Component;
use crate::error::{Error, Result};
use crate::mcmc::{FittedModel, PosteriorSamples, Summary};
use crate::process::{intensity_path, stationary_marginal, PointPattern};

/// Pointwise posterior mean and 95% band on a strictly increasing grid.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurveGrid {
    pub x: Vec<f64>,
    pub mean: Vec<f64>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl CurveGrid {
    /// Summarise `curves[draw][point]` over draws.
    fn from_draws(x: Vec<f64>, curves: &[Vec<f64>]) -> Self {
        let mut out = Self { mean: Vec::with_capacity(x.len()), lower: Vec::new(), upper: Vec::new(), x };
        let mut column = Vec::with_capacity(curves.len());
        for j in 0..out.x.len() {
            column.clear();
            column.extend(curves.iter().map(|c| c[j]));
            let s = Summary::of(&column);
            out.mean.push(s.mean);
            out.lower.push(s.lower);
            out.upper.push(s.upper);
        }
        out
    }

    pub fn len(&self) -> usize {
        self.x.len()
    }

    pub fn is_empty(&self) -> bool {
        self.x.is_empty()
    }
}

/// `count` equally spaced points on `[lo, hi]`.
pub fn linear_grid(lo: f64, hi: f64, count: usize) -> Result<Vec<f64>> {
    if count < 2 || !(lo.is_finite() && hi.is_finite() && lo < hi) {
        return Err(Error::Contract(format!("grid needs lo < hi and at least 2 points, got [{lo}, {hi}] x {count}")));
    }
    let step = (hi - lo) / (count - 1) as f64;
    Ok((0..count).map(|k| if k + 1 == count { hi } else { lo + step * k as f64 }).collect())
}

fn check_grid(grid: &[f64], lo: f64, hi: f64, what: &str) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::Contract(format!("{what} grid is empty")));
    }
    if grid.windows(2).any(|p| !(p[0] < p[1])) {
        return Err(Error::Contract(format!("{what} grid must be strictly increasing")));
    }
    let (first, last) = (grid[0], grid[grid.len() - 1]);
    if !(first > lo && last <= hi) {
        return Err(Error::Domain(format!("{what} grid [{first}, {last}] leaves the support ({lo}, {hi}]")));
    }
    Ok(())
}

fn require_rows(samples: &PosteriorSamples) -> Result<()> {
    if samples.rows() == 0 {
        return Err(Error::Contract("posterior samples are empty".into()));
    }
    Ok(())
}

/// Conditional intensity over `grid ⊂ (0, T]`.
pub fn intensity_curve(samples: &PosteriorSamples, pattern: &PointPattern, grid: &[f64]) -> Result<CurveGrid> {
    require_rows(samples)?;
    check_grid(grid, 0.0, pattern.horizon(), "intensity")?;
    let curves = (0..samples.rows())
        .map(|r| match samples.model_at(r)? {
            FittedModel::Mtdpp(m) => intensity_path(&m, pattern, grid),
            FittedModel::Mtdcpp(m) => intensity_path(&m, pattern, grid),
            FittedModel::Seasonal(_) => {
                Err(Error::Contract("intensity curves are not defined for seasonally scaled fits".into()))
            }
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CurveGrid::from_draws(grid.to_vec(), &curves))
}

fn marginal(model: &FittedModel) -> Result<Component> {
    match model {
        FittedModel::Mtdpp(m) => stationary_marginal(m),
        _ => Err(Error::NotStationary("only unscaled MTDPP fits have a stationary marginal duration law".into())),
    }
}

fn marginal_curve<F: Fn(&Component, f64) -> f64>(samples: &PosteriorSamples, grid: &[f64], eval: F) -> Result<CurveGrid> {
    require_rows(samples)?;
    check_grid(grid, 0.0, f64::INFINITY, "duration")?;
    let curves = (0..samples.rows())
        .map(|r| {
            let c = marginal(&samples.model_at(r)?)?;
            Ok(grid.iter().map(|&x| eval(&c, x)).collect())
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(CurveGrid::from_draws(grid.to_vec(), &curves))
}

/// Stationary marginal duration density over `grid ⊂ (0, ∞)`.
pub fn marginal_density_curve(samples: &PosteriorSamples, grid: &[f64]) -> Result<CurveGrid> {
    marginal_curve(samples, grid, Component::pdf)
}

/// Stationary marginal duration hazard over `grid ⊂ (0, ∞)`.
pub fn marginal_hazard_curve(samples: &PosteriorSamples, grid: &[f64]) -> Result<CurveGrid> {
    marginal_curve(samples, grid, Component::hazard)
}

/// Mixture weights against lag `1..=L`.
pub fn weight_curve(samples: &PosteriorSamples) -> Result<CurveGrid> {
    require_rows(samples)?;
    let order = samples.meta.model.order();
    let curves: Vec<Vec<f64>> = (0..samples.rows()).map(|r| samples.weights(r)).collect();
    Ok(CurveGrid::from_draws((1..=order).map(|l| l as f64).collect(), &curves))
}
