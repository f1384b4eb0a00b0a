//! Property checks shared by the proptest suite and the acceptance harness.
//!
//! Each check takes generated inputs and fails through `prop_assert!`, so it
//! runs under both `proptest!` and a hand-driven `TestRunner`.

#![allow(dead_code)]

use proptest::prelude::*;
use proptest::test_runner::{Config, RngAlgorithm, TestCaseError, TestRng, TestRunner};
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use mtdpp::dist::{
    burr_conditional_params, burr_survival, dirichlet_sample, hrt_copula_cdf, trunc_gamma_sample, BurrParams,
    Component, Exponential, GammaTruncation, LomaxParams,
};
use mtdpp::evaluate::crps;
use mtdpp::mcmc::{run_mcmc, McmcConfig, ModelSpec, PriorSpec};
use mtdpp::numeric::{format_exact, integrate, integrate_to_infinity};
use mtdpp::process::{
    conditional_duration_density, conditional_intensity, conditional_survival, full_log_likelihood,
    intensity_log_likelihood, DurationModel, MtdcppModel, MtdppModel, PointPattern,
};
use mtdpp::simulate::{simulate, simulate_mtdpp, StopRule};

pub type CheckResult = Result<(), TestCaseError>;

pub fn component() -> impl Strategy<Value = Component> {
    prop_oneof![
        (0.1..5.0f64, 1.5..20.0f64).prop_map(|(b, a)| Component::Lomax(LomaxParams::new(b, a).unwrap())),
        (0.5..4.0f64, 0.2..5.0f64, 1.2..10.0f64)
            .prop_map(|(g, l, p)| Component::Burr(BurrParams::new(g, l, p).unwrap())),
        (0.1..5.0f64).prop_map(|r| Component::Exponential(Exponential::new(r).unwrap())),
    ]
}

fn simplex(len: usize) -> impl Strategy<Value = Vec<f64>> {
    prop::collection::vec(0.05..1.0f64, len).prop_map(|v| {
        let s: f64 = v.iter().sum();
        v.into_iter().map(|x| x / s).collect()
    })
}

/// Valid MTDPP of order 1..=4 from any of the three families.
pub fn mtdpp_model() -> impl Strategy<Value = MtdppModel> {
    (1usize..=4).prop_flat_map(|order| {
        prop_oneof![
            (1.5..10.0f64, 0.1..3.0f64, simplex(order))
                .prop_map(|(a, p, w)| MtdppModel::scaled_lomax(a, p, w).unwrap()),
            (0.6..3.5f64, 0.3..3.0f64, 1.5..8.0f64, simplex(order))
                .prop_map(|(g, l, k, w)| MtdppModel::burr(g, l, k, w).unwrap()),
            (prop::collection::vec(0.1..3.0f64, order), prop::collection::vec(1.5..8.0f64, order), simplex(order))
                .prop_map(|(p, a, w)| MtdppModel::lomax(p, a, w).unwrap()),
        ]
    })
}

pub fn mtdcpp_model() -> impl Strategy<Value = MtdcppModel> {
    (0.0..=1.0f64, 0.1..3.0f64, mtdpp_model()).prop_map(|(pi0, mu, inner)| {
        let order = inner.order();
        let lomax = MtdppModel::lomax(vec![0.5; order], vec![3.0; order], inner.weights().to_vec()).unwrap();
        MtdcppModel::new(pi0, mu, lomax).unwrap()
    })
}

/// Pattern of `1..=max_events` events with spacings in `[0.05, 3)`.
pub fn pattern(max_events: usize) -> impl Strategy<Value = PointPattern> {
    (prop::collection::vec(0.05..3.0f64, 1..=max_events), 0.05..3.0f64).prop_map(|(gaps, tail)| {
        let mut t = 0.0;
        let times: Vec<f64> = gaps.iter().map(|g| {
            t += g;
            t
        })
        .collect();
        let horizon = t + tail;
        PointPattern::new(times, horizon).unwrap()
    })
}

fn close(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(f64::MIN_POSITIVE)
}

pub fn check_normalization(c: &Component) -> CheckResult {
    let split = c.quantile(0.5);
    let total = integrate(|x| c.pdf(x), 0.0, split, 1e-12) + integrate_to_infinity(|x| c.pdf(x), split, 1e-12);
    prop_assert!((total - 1.0).abs() < 1e-6, "{c:?} integrates to {total}");
    Ok(())
}

pub fn check_survival_hazard(c: &Component, log10_x: f64) -> CheckResult {
    let x = 10f64.powf(log10_x);
    let s = 1.0 - integrate(|t| c.pdf(t), 0.0, x, 1e-13);
    prop_assert!((c.survival(x) - s).abs() < 1e-8, "{c:?} survival at {x}: {} vs {s}", c.survival(x));
    let h = c.pdf(x) / c.survival(x);
    if h.is_finite() {
        prop_assert!((c.hazard(x) - h).abs() <= 1e-8 * h.max(1.0), "{c:?} hazard at {x}");
    }
    Ok(())
}

pub fn check_quantile_round_trip(c: &Component, u: f64) -> CheckResult {
    let x = c.quantile(u);
    prop_assert!(close(c.cdf(x), u, 1e-10), "{c:?}: cdf(quantile({u})) = {}", c.cdf(x));
    Ok(())
}

pub fn check_copula_two_increasing(a: f64) -> CheckResult {
    let grid: Vec<f64> = (0..50).map(|i| i as f64 / 49.0).collect();
    let c = |u: f64, v: f64| hrt_copula_cdf(u, v, a).unwrap();
    for i in 0..49 {
        for j in 0..49 {
            let mass = c(grid[i + 1], grid[j + 1]) - c(grid[i], grid[j + 1]) - c(grid[i + 1], grid[j]) + c(grid[i], grid[j]);
            prop_assert!(mass >= -1e-12, "a = {a}: cell ({i}, {j}) mass {mass}");
        }
    }
    for &u in &grid {
        prop_assert_eq!(c(u, 1.0), u);
        prop_assert_eq!(c(1.0, u), u);
        prop_assert_eq!(c(u, 0.0), 0.0);
    }
    Ok(())
}

/// Compares the Burr conditional CDF with a central difference of the copula
/// in its first argument; margins are drawn away from 0 and 1, where the
/// difference quotient is ill-conditioned.
pub fn check_conditional_coherence(gamma: f64, lambda: f64, psi: f64, ux: f64, uy: f64) -> CheckResult {
    let m = BurrParams::new(gamma, lambda, psi).unwrap();
    let margin = Component::Burr(m);
    let (x, y) = (margin.quantile(ux), margin.quantile(uy));
    let fx = 1.0 - burr_survival(x, &m).unwrap();
    let fy = 1.0 - burr_survival(y, &m).unwrap();
    let h = 1e-6;
    let d = (hrt_copula_cdf(fx + h, fy, psi).unwrap() - hrt_copula_cdf(fx - h, fy, psi).unwrap()) / (2.0 * h);
    let cond = burr_conditional_params(x, &m).unwrap();
    let c = 1.0 - burr_survival(y, &cond).unwrap();
    prop_assert!((c - d).abs() < 1e-5, "({x}, {y}): {c} vs {d}");
    Ok(())
}

pub fn check_trunc_gamma_support(shape: f64, rate: f64, lower: f64, seed: u64) -> CheckResult {
    let t = GammaTruncation::new(shape, rate, lower).unwrap();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    for _ in 0..20 {
        let x = trunc_gamma_sample(&t, &mut rng).unwrap();
        prop_assert!(x.is_finite() && x >= lower && (lower > 0.0 || x > 0.0), "draw {x} below {lower}");
    }
    Ok(())
}

pub fn check_dirichlet_simplex(shapes: &[f64], seed: u64) -> CheckResult {
    let w = dirichlet_sample(shapes, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
    prop_assert!(w.iter().all(|&v| (0.0..=1.0).contains(&v)));
    prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
    Ok(())
}

pub fn check_mixture_normalization<M: DurationModel>(model: &M, lags: &[f64]) -> CheckResult {
    let m = model.mixture(lags);
    let split = m.quantile(0.5);
    let total = integrate(|x| m.density(x), 0.0, split, 1e-12) + integrate_to_infinity(|x| m.density(x), split, 1e-12);
    prop_assert!((total - 1.0).abs() < 1e-6, "mixture integrates to {total}");
    Ok(())
}

pub fn check_local_weights<M: DurationModel>(model: &M, lags: &[f64], x: f64) -> CheckResult {
    let w = model.mixture(lags).local_weights(x);
    prop_assert!(w.iter().all(|&v| v >= 0.0));
    prop_assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12, "sum {}", w.iter().sum::<f64>());
    Ok(())
}

pub fn check_hazard_ratio<M: DurationModel>(model: &M, pattern: &PointPattern, frac: f64) -> CheckResult {
    let last = pattern.last_time();
    let t = last + frac * (pattern.horizon() - last);
    let elapsed = t - last;
    let n = pattern.len();
    let history = pattern.history(n + 1, model.order());
    let lambda = conditional_intensity(model, t, pattern).unwrap();
    let s = conditional_survival(model, elapsed, &history, n + 1).unwrap();
    let f = conditional_duration_density(model, elapsed, &history, n + 1).unwrap();
    prop_assert!(close(lambda * s, f, 1e-10), "{} vs {f}", lambda * s);
    Ok(())
}

pub fn check_likelihood_forms<M: DurationModel>(model: &M, pattern: &PointPattern) -> CheckResult {
    let direct = full_log_likelihood(model, pattern).unwrap();
    let quad = intensity_log_likelihood(model, pattern, 1e-12).unwrap();
    prop_assert!(close(direct, quad, 1e-4) || (direct - quad).abs() < 1e-8, "{direct} vs {quad}");
    Ok(())
}

pub fn check_seeded_simulation(model: &MtdppModel, seed: u64) -> CheckResult {
    let a = simulate_mtdpp(model, StopRule::Count(50), seed).unwrap();
    let b = simulate(model, StopRule::Count(50), seed).unwrap();
    prop_assert_eq!(a, b);
    Ok(())
}

pub fn check_seeded_mcmc(seed: u64) -> CheckResult {
    let model = MtdppModel::burr(2.0, 1.0, 6.0, vec![0.6, 0.4]).unwrap();
    let pattern = simulate_mtdpp(&model, StopRule::Count(60), seed).unwrap().pattern;
    let config = McmcConfig { iterations: 200, burn_in: 50, thin: 5, seed, ..McmcConfig::default() };
    let spec = ModelSpec::Burr { order: 2 };
    let a = run_mcmc(&pattern, &spec, &PriorSpec::default(), &config).unwrap();
    let b = run_mcmc(&pattern, &spec, &PriorSpec::default(), &config).unwrap();
    prop_assert_eq!(a, b);
    Ok(())
}

pub fn check_crps_permutation(mut draws: Vec<f64>, actual: f64, rotate: usize) -> CheckResult {
    let before = crps(&draws, actual);
    draws.reverse();
    let len = draws.len();
    draws.rotate_left(rotate % len);
    let after = crps(&draws, actual);
    prop_assert!((before - after).abs() <= 1e-12 * before.abs().max(1.0));
    prop_assert!(before >= -1e-12);
    Ok(())
}

pub fn check_exact_format(v: f64) -> CheckResult {
    prop_assert_eq!(format_exact(v).parse::<f64>().unwrap(), v);
    Ok(())
}

/// Named property with its case count, for the acceptance harness.
pub struct Property {
    pub name: &'static str,
    pub run: fn(u32) -> Result<(), String>,
}

/// Run `check` on `cases` inputs from a fixed-seed generator.
pub fn drive_deterministic<S: Strategy>(
    cases: u32,
    strategy: S,
    check: impl Fn(S::Value) -> CheckResult,
) -> Result<(), String> {
    let config = Config { cases, failure_persistence: None, ..Config::default() };
    let mut runner = TestRunner::new_with_rng(config, TestRng::deterministic_rng(RngAlgorithm::ChaCha));
    runner.run(&strategy, check).map_err(|e| e.to_string())
}

use drive_deterministic as drive;

pub fn all_properties() -> Vec<Property> {
    vec![
        Property { name: "component normalization", run: |n| drive(n, component(), |c| check_normalization(&c)) },
        Property {
            name: "survival/hazard consistency",
            run: |n| drive(n, (component(), -3.0..2.0f64), |(c, x)| check_survival_hazard(&c, x)),
        },
        Property {
            name: "quantile round trip",
            run: |n| drive(n, (component(), 1e-6..(1.0 - 1e-6)), |(c, u)| check_quantile_round_trip(&c, u)),
        },
        Property { name: "copula 2-increasing", run: |n| drive(n.min(40), 0.1..10.0f64, check_copula_two_increasing) },
        Property {
            name: "conditional/marginal coherence",
            run: |n| {
                drive(n, (0.5..3.0f64, 0.3..3.0f64, 1.0..8.0f64, 0.02..0.98f64, 0.02..0.98f64), |(g, l, p, ux, uy)| {
                    check_conditional_coherence(g, l, p, ux, uy)
                })
            },
        },
        Property {
            name: "truncated-gamma support",
            run: |n| {
                drive(n, (0.5..50.0f64, 0.1..10.0f64, 0.0..30.0f64, any::<u64>()), |(a, b, lo, s)| {
                    check_trunc_gamma_support(a, b, lo, s)
                })
            },
        },
        Property {
            name: "dirichlet simplex",
            run: |n| drive(n, (prop::collection::vec(1e-3..20.0f64, 1..16), any::<u64>()), |(s, seed)| check_dirichlet_simplex(&s, seed)),
        },
        Property {
            name: "mixture normalization",
            run: |n| {
                drive(n, (mtdpp_model(), prop::collection::vec(0.01..5.0f64, 0..4)), |(m, lags)| {
                    check_mixture_normalization(&m, &lags)
                })
            },
        },
        Property {
            name: "cluster mixture normalization",
            run: |n| {
                drive(n, (mtdcpp_model(), prop::collection::vec(0.01..5.0f64, 0..4)), |(m, lags)| {
                    check_mixture_normalization(&m, &lags)
                })
            },
        },
        Property {
            name: "local weights simplex",
            run: |n| {
                drive(n, (mtdpp_model(), prop::collection::vec(0.01..5.0f64, 4), 0.0..20.0f64), |(m, lags, x)| {
                    check_local_weights(&m, &lags, x)
                })
            },
        },
        Property {
            name: "hazard ratio identity",
            run: |n| drive(n, (mtdpp_model(), pattern(6), 0.01..1.0f64), |(m, p, f)| check_hazard_ratio(&m, &p, f)),
        },
        Property {
            name: "likelihood forms agree",
            run: |n| drive(n, (mtdpp_model(), pattern(5)), |(m, p)| check_likelihood_forms(&m, &p)),
        },
        Property {
            name: "seeded simulation",
            run: |n| drive(n.min(30), (mtdpp_model(), any::<u64>()), |(m, s)| check_seeded_simulation(&m, s)),
        },
        Property { name: "seeded mcmc", run: |n| drive(n.min(5), any::<u64>(), check_seeded_mcmc) },
        Property {
            name: "crps permutation invariance",
            run: |n| {
                drive(n, (prop::collection::vec(-10.0..10.0f64, 1..50), -10.0..10.0f64, any::<usize>()), |(d, y, r)| {
                    check_crps_permutation(d, y, r)
                })
            },
        },
        Property {
            name: "exact number format",
            run: |n| drive(n, any::<f64>().prop_filter("finite", |v| v.is_finite()), check_exact_format),
        },
    ]
}
