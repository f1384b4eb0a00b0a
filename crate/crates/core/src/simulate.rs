//! Forward simulation of MTDPP, MTDCPP and seasonal multiplicative processes.
//!
//! Randomness comes from a ChaCha8 stream keyed by the seed. Event `i`
//! (0-based) reads its uniforms from a fixed block of the stream starting at
//! word `i · WORDS_PER_EVENT`: the branch uniform, the lag uniform, then the
//! value uniform. A draw therefore depends only on `(seed, i)` and the
//! history, never on how many uniforms earlier events consumed.

use std::collections::VecDeque;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{numerical, Error, Result};
use crate::numeric::{open_unit, CompensatedSum};
use crate::process::{DurationModel, Mixture, MtdcppModel, MtdppModel, PointPattern, SeasonalModel, SeasonalParams};

/// 32-bit words reserved per event in the generator stream.
pub const WORDS_PER_EVENT: u128 = 8;

/// Seasonal fixed-point tolerance (relative to `max(1, x)`).
pub const FIXED_POINT_TOL: f64 = 1e-10;
/// Seasonal fixed-point iteration cap.
pub const FIXED_POINT_MAX_ITER: usize = 200;

/// When a simulated trajectory ends.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum StopRule {
    /// Observe on `(0, T]`; the first event past `T` is discarded.
    Horizon(f64),
    /// Keep `n` events; the horizon is set just below the `(n+1)`-th arrival.
    Count(usize),
}

impl StopRule {
    fn validate(&self) -> Result<()> {
        match *self {
            Self::Horizon(t) if t.is_finite() && t > 0.0 => Ok(()),
            Self::Count(n) if n >= 1 => Ok(()),
            _ => Err(Error::Contract(format!("invalid stop rule {self:?}"))),
        }
    }
}

/// Uniforms for one event.
#[derive(Debug, Clone, Copy)]
pub struct EventUniforms {
    pub branch: f64,
    pub lag: f64,
    pub value: f64,
}

/// Per-event random stream.
#[derive(Debug, Clone)]
pub struct EventStream {
    rng: ChaCha8Rng,
}

impl EventStream {
    pub fn new(seed: u64) -> Self {
        Self { rng: ChaCha8Rng::seed_from_u64(seed) }
    }

    /// Uniforms for event `index` (0-based).
    pub fn uniforms(&mut self, index: usize) -> EventUniforms {
        self.rng.set_word_pos(index as u128 * WORDS_PER_EVENT);
        EventUniforms {
            branch: open_unit(self.rng.next_u64()),
            lag: open_unit(self.rng.next_u64()),
            value: open_unit(self.rng.next_u64()),
        }
    }
}

/// A model that can draw the next duration from its lag history.
pub trait Simulate: DurationModel {
    /// Returns `(label, duration)`. Label 0 is the first-arrival or immigrant
    /// law; label `l ≥ 1` is lag `l`.
    fn draw(&self, lags: &[f64], u: EventUniforms) -> (usize, f64);
}

fn draw_from(mixture: &Mixture, u_lag: f64, u_value: f64) -> (usize, f64) {
    let (k, x) = mixture.sample_with(u_lag, u_value);
    (k + 1, x)
}

impl Simulate for MtdppModel {
    fn draw(&self, lags: &[f64], u: EventUniforms) -> (usize, f64) {
        if lags.is_empty() {
            return (0, self.first_arrival().quantile(u.value));
        }
        draw_from(&self.mixture(lags), u.lag, u.value)
    }
}

impl Simulate for MtdcppModel {
    fn draw(&self, lags: &[f64], u: EventUniforms) -> (usize, f64) {
        if lags.is_empty() || u.branch < self.pi0() {
            return (0, self.immigrant().quantile(u.value));
        }
        draw_from(&self.inner().mixture(lags), u.lag, u.value)
    }
}

/// A simulated pattern with the generating component of every event.
#[derive(Debug, Clone, PartialEq)]
pub struct Simulation {
    pub pattern: PointPattern,
    pub labels: Vec<usize>,
}

/// Generic simulation loop. `to_observed(t_prev, z)` maps the latent draw to
/// the observed duration.
fn run<M, F>(model: &M, stop: StopRule, seed: u64, mut to_observed: F) -> Result<Simulation>
where
    M: Simulate + ?Sized,
    F: FnMut(f64, f64) -> Result<f64>,
{
    stop.validate()?;
    let order = model.order();
    let mut stream = EventStream::new(seed);
    let mut lags: VecDeque<f64> = VecDeque::with_capacity(order + 1);
    let mut clock = CompensatedSum::new(0.0);
    let mut times = Vec::new();
    let mut labels = Vec::new();
    for i in 0.. {
        let (label, z) = model.draw(lags.make_contiguous(), stream.uniforms(i));
        if !(z.is_finite() && z >= 0.0) {
            return Err(numerical(format!("event {} drew non-finite duration {z}", i + 1)));
        }
        let x = to_observed(clock.value(), z)?;
        clock.add(x);
        let t = clock.value();
        if !t.is_finite() {
            return Err(numerical(format!("event {} time overflowed", i + 1)));
        }
        match stop {
            StopRule::Horizon(horizon) if t >= horizon => {
                return Ok(Simulation { pattern: PointPattern::new(times, horizon)?, labels });
            }
            StopRule::Count(n) if times.len() == n => {
                return Ok(Simulation { pattern: PointPattern::new(times, t.next_down())?, labels });
            }
            _ => {}
        }
        times.push(t);
        labels.push(label);
        lags.push_front(z);
        lags.truncate(order);
    }
    unreachable!()
}

/// Simulate any [`Simulate`] model.
pub fn simulate<M: Simulate + ?Sized>(model: &M, stop: StopRule, seed: u64) -> Result<Simulation> {
    run(model, stop, seed, |_, z| Ok(z))
}

pub fn simulate_mtdpp(model: &MtdppModel, stop: StopRule, seed: u64) -> Result<Simulation> {
    simulate(model, stop, seed)
}

pub fn simulate_mtdcpp(model: &MtdcppModel, stop: StopRule, seed: u64) -> Result<Simulation> {
    simulate(model, stop, seed)
}

/// Solve `x = μ(t_prev + x) · z` by damped fixed-point iteration.
pub fn solve_seasonal_step(s: &SeasonalParams, t_prev: f64, z: f64) -> Result<f64> {
    let mut x = s.mu(t_prev) * z;
    let mut damping = 1.0;
    let mut last_residual = f64::INFINITY;
    for _ in 0..FIXED_POINT_MAX_ITER {
        let target = s.mu(t_prev + x) * z;
        let residual = (target - x).abs();
        if residual <= FIXED_POINT_TOL * x.max(1.0) {
            return Ok(target);
        }
        if residual > last_residual {
            damping *= 0.5;
        }
        last_residual = residual;
        x += damping * (target - x);
    }
    Err(numerical(format!(
        "seasonal fixed point did not converge after {FIXED_POINT_MAX_ITER} iterations (t = {t_prev}, z = {z})"
    )))
}

/// Simulate `x_i = μ(t_i) z_i` with latent `z` from the inner MTDPP.
pub fn simulate_seasonal(model: &SeasonalModel, stop: StopRule, seed: u64) -> Result<Simulation> {
    run(&model.inner, stop, seed, |t_prev, z| solve_seasonal_step(&model.seasonal, t_prev, z))
}

/// Which process a [`SimSpec`] simulates.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ProcessModel {
    Mtdpp(MtdppModel),
    Mtdcpp(MtdcppModel),
}

/// Full simulation request.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct SimSpec {
    pub model: ProcessModel,
    pub stop: StopRule,
    pub seed: u64,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub seasonal: Option<SeasonalParams>,
}

impl SimSpec {
    pub fn run(&self) -> Result<Simulation> {
        match (&self.model, &self.seasonal) {
            (ProcessModel::Mtdpp(m), None) => simulate_mtdpp(m, self.stop, self.seed),
            (ProcessModel::Mtdpp(m), Some(s)) => {
                simulate_seasonal(&SeasonalModel { inner: m.clone(), seasonal: s.clone() }, self.stop, self.seed)
            }
            (ProcessModel::Mtdcpp(m), None) => simulate_mtdcpp(m, self.stop, self.seed),
            (ProcessModel::Mtdcpp(_), Some(_)) => {
                Err(Error::Contract("seasonal simulation requires an MTDPP model".into()))
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dist::{Component, Exponential};
    use crate::numeric::ks_test;
    use crate::process::stationary_marginal;

    #[test]
    fn same_seed_same_pattern() {
        let m = MtdppModel::burr(2.0, 1.0, 6.0, vec![0.5, 0.3, 0.2]).unwrap();
        let a = simulate_mtdpp(&m, StopRule::Horizon(300.0), 7).unwrap();
        let b = simulate_mtdpp(&m, StopRule::Horizon(300.0), 7).unwrap();
        let c = simulate_mtdpp(&m, StopRule::Horizon(300.0), 8).unwrap();
        assert_eq!(a, b);
        assert_ne!(a.pattern.times(), c.pattern.times());
        assert!(a.pattern.horizon() == 300.0 && a.pattern.last_time() < 300.0);
    }

    #[test]
    fn count_rule_sets_honest_horizon() {
        let m = MtdppModel::scaled_lomax(5.0, 0.5, vec![0.5, 0.3, 0.2]).unwrap();
        let s = simulate_mtdpp(&m, StopRule::Count(50), 3).unwrap();
        assert_eq!(s.pattern.len(), 50);
        let longer = simulate_mtdpp(&m, StopRule::Count(51), 3).unwrap();
        assert_eq!(&longer.pattern.times()[..50], s.pattern.times());
        assert_eq!(s.pattern.horizon(), longer.pattern.times()[50].next_down());
    }

    #[test]
    fn stationary_burr_marginal() {
        let m = MtdppModel::burr(2.0, 1.0, 6.0, vec![0.5, 0.3, 0.2]).unwrap();
        let s = simulate_mtdpp(&m, StopRule::Count(40_000), 11).unwrap();
        let f = stationary_marginal(&m).unwrap();
        let ks = ks_test(&s.pattern.durations()[1000..], |x| f.cdf(x));
        assert!(ks.statistic < 0.015, "{ks:?}");
    }

    #[test]
    fn cluster_with_no_immigrants_matches_mtdpp() {
        let inner = MtdppModel::lomax(vec![0.1; 3], vec![5.0; 3], vec![0.5, 0.3, 0.2]).unwrap();
        let cl = MtdcppModel::new(0.0, 0.2, inner.clone()).unwrap();
        let plain = inner.with_first_arrival(Component::Exponential(Exponential::new(0.2).unwrap()));
        let a = simulate_mtdcpp(&cl, StopRule::Horizon(200.0), 5).unwrap();
        let b = simulate_mtdpp(&plain, StopRule::Horizon(200.0), 5).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn pure_immigrant_durations_are_exponential() {
        let inner = MtdppModel::lomax(vec![0.1; 2], vec![5.0; 2], vec![0.5, 0.5]).unwrap();
        let m = MtdcppModel::new(1.0, 0.2, inner).unwrap();
        let s = simulate_mtdcpp(&m, StopRule::Count(5000), 9).unwrap();
        assert!(s.labels.iter().all(|&l| l == 0));
        let ks = ks_test(s.pattern.durations(), |x| -(-0.2 * x).exp_m1());
        assert!(ks.passes(0.01), "{ks:?}");
    }

    #[test]
    fn flat_seasonality_reproduces_mtdpp() {
        let m = MtdppModel::scaled_lomax(5.0, 0.5, vec![0.5, 0.3, 0.2]).unwrap();
        let sm = SeasonalModel { inner: m.clone(), seasonal: SeasonalParams::flat(2, 50.0).unwrap() };
        assert_eq!(
            simulate_seasonal(&sm, StopRule::Horizon(500.0), 4).unwrap(),
            simulate_mtdpp(&m, StopRule::Horizon(500.0), 4).unwrap()
        );
    }

    #[test]
    fn slow_harmonic_scales_durations() {
        let m = MtdppModel::scaled_lomax(5.0, 0.5, vec![0.5, 0.3, 0.2]).unwrap();
        let c = 0.7;
        let sm = SeasonalModel { inner: m.clone(), seasonal: SeasonalParams::from_blocks(&[0.0], &[c], 1e12).unwrap() };
        let a = simulate_seasonal(&sm, StopRule::Count(200), 4).unwrap();
        let b = simulate_mtdpp(&m, StopRule::Count(200), 4).unwrap();
        for (x, z) in a.pattern.durations().iter().zip(b.pattern.durations()) {
            assert!((x / z - c.exp()).abs() < 1e-8);
        }
    }

    #[test]
    fn seasonal_step_satisfies_fixed_point() {
        let s = SeasonalParams::from_blocks(&[0.8, -0.3], &[0.5, 0.2], 10.0).unwrap();
        for &(t, z) in &[(0.0, 0.5), (3.3, 2.0), (7.9, 0.01)] {
            let x = solve_seasonal_step(&s, t, z).unwrap();
            assert!((x - s.mu(t + x) * z).abs() < 1e-9 * x.max(1.0));
        }
    }

    #[test]
    fn sim_spec_round_trip() {
        let spec = SimSpec {
            model: ProcessModel::Mtdpp(MtdppModel::burr(2.0, 1.0, 6.0, vec![0.5, 0.3, 0.2]).unwrap()),
            stop: StopRule::Count(10),
            seed: 1,
            seasonal: Some(SeasonalParams::flat(1, 365.0).unwrap()),
        };
        let js = serde_json::to_string(&spec).unwrap();
        assert_eq!(serde_json::from_str::<SimSpec>(&js).unwrap(), spec);
    }
}
