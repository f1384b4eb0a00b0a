use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use statrs::distribution::{ContinuousCDF, Gamma as GammaDist, Normal};

use super::*;
use crate::numeric::ks_test;
use crate::process::{DurationModel, MtdppModel};
use crate::simulate::{simulate_mtdpp, StopRule};

fn burr_data(n: usize, seed: u64) -> PointPattern {
    let m = MtdppModel::burr(2.0, 1.0, 6.0, vec![0.5, 0.3, 0.2]).unwrap();
    simulate_mtdpp(&m, StopRule::Count(n), seed).unwrap().pattern
}

fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

#[test]
fn kappa_conditional_shape_counts_observed_durations() {
    let p = burr_data(60, 1);
    let mut s = BurrSampler::new(&p, 3, &PriorSpec::default(), &McmcConfig::default()).unwrap();
    s.step_configs(&mut rng(1)).unwrap();
    let t = s.kappa_conditional();
    assert_eq!(t.shape, 6.0 + (60 - 3) as f64);
    assert_eq!(t.lower, 1.0);
}

#[test]
fn zero_step_keeps_gamma_and_lambda() {
    let p = burr_data(40, 2);
    let config = McmcConfig { steps: StepSizes { gamma: 0.0, lambda: 0.0, ..Default::default() }, ..Default::default() };
    let mut s = BurrSampler::new(&p, 2, &PriorSpec::default(), &config).unwrap();
    let (g, l) = (s.gamma, s.lambda);
    let mut r = rng(2);
    for _ in 0..50 {
        s.step(&mut r).unwrap();
    }
    assert_eq!((s.gamma, s.lambda), (g, l));
}

#[test]
fn degenerate_weights_fix_labels() {
    let p = burr_data(50, 3);
    let mut s = BurrSampler::new(&p, 3, &PriorSpec::default(), &McmcConfig::default()).unwrap();
    s.set_state(2.0, 1.0, 6.0, vec![0.0, 1.0, 0.0]);
    s.step_configs(&mut rng(3)).unwrap();
    assert!(s.alloc.labels.iter().all(|&l| l == 2));
    assert_eq!(s.alloc.counts[2], 50 - 3 + 1);
}

#[test]
fn tied_components_split_evenly() {
    // Equal lagged durations make both components identical.
    let times: Vec<f64> = (1..=40).map(|i| i as f64).collect();
    let p = PointPattern::new(times, 40.5).unwrap();
    let mut s = BurrSampler::new(&p, 2, &PriorSpec::default(), &McmcConfig::default()).unwrap();
    s.set_state(1.5, 1.0, 3.0, vec![0.5, 0.5]);
    let mut r = rng(4);
    let mut ones = 0usize;
    let draws = 2000;
    for _ in 0..draws {
        s.step_configs(&mut r).unwrap();
        ones += s.alloc.counts[1];
    }
    let total = (draws * s.alloc.labels.len()) as f64;
    let f = ones as f64 / total;
    assert!((f - 0.5).abs() < 4.0 * (0.25 / total).sqrt(), "{f}");
}

#[test]
fn configuration_probabilities_match_direct_ratio() {
    let p = PointPattern::new(vec![0.4, 1.5, 1.9, 3.2], 3.5).unwrap();
    let model = MtdppModel::burr(1.5, 0.8, 3.0, vec![0.6, 0.4]).unwrap();
    let mut s = BurrSampler::new(&p, 2, &PriorSpec::default(), &McmcConfig::default()).unwrap();
    s.set_state(1.5, 0.8, 3.0, vec![0.6, 0.4]);
    let x = p.durations();
    let expected: Vec<f64> = (3..=5)
        .map(|i| {
            let mix = model.mixture(&p.history(i, 2));
            let terms: Vec<f64> = mix
                .weights()
                .iter()
                .zip(mix.components())
                .map(|(w, c)| if i <= 4 { w * c.pdf(x[i - 1]) } else { w * c.survival(p.censored_tail()) })
                .collect();
            terms[0] / (terms[0] + terms[1])
        })
        .collect();
    let mut r = rng(5);
    let mut hits = [0usize; 3];
    let draws = 40_000;
    for _ in 0..draws {
        s.step_configs(&mut r).unwrap();
        for (h, &l) in hits.iter_mut().zip(&s.alloc.labels) {
            *h += usize::from(l == 1);
        }
    }
    for (h, e) in hits.iter().zip(expected) {
        let f = *h as f64 / draws as f64;
        assert!((f - e).abs() < 4.0 * (e * (1.0 - e) / draws as f64).sqrt(), "{f} vs {e}");
    }
}

#[test]
fn empty_counts_give_prior_dirichlet() {
    let p = burr_data(30, 6);
    let prior = PriorSpec { cdp: Some(CdpPrior::new(5.0, 1.0, 3.0).unwrap()), ..Default::default() };
    let mut s = BurrSampler::new(&p, 3, &prior, &McmcConfig::default()).unwrap();
    s.alloc.counts = vec![0; 4];
    let a = prior.cdp.unwrap().base_increments(3).unwrap();
    let mut r = rng(6);
    let mut sums = [0.0; 3];
    let draws = 50_000;
    for _ in 0..draws {
        s.step_weights(&mut r).unwrap();
        for (acc, w) in sums.iter_mut().zip(&s.weights) {
            *acc += w;
        }
    }
    for (acc, m) in sums.iter().zip(a) {
        assert!((acc / draws as f64 - m).abs() < 0.005);
    }
}

#[test]
fn all_immigrant_labels_give_pi0_count_identity() {
    let p = burr_data(30, 7);
    let mut s = ClusterSampler::new(&p, 2, None, &PriorSpec::default(), &McmcConfig::default()).unwrap();
    s.alloc.labels.iter_mut().for_each(|l| *l = 0);
    s.alloc.recount();
    let (a, b) = s.pi0_conditional();
    assert_eq!((a, b), (5.0 + (30 - 2 + 1) as f64, 5.0));
}

#[test]
fn mu_conditional_on_three_durations() {
    let p = PointPattern::new(vec![0.5, 1.7, 2.4], 2.8).unwrap();
    let mut s = ClusterSampler::new(&p, 1, None, &PriorSpec::default(), &McmcConfig::default()).unwrap();
    // Labels for x_2 = 1.2, x_3 = 0.7, tail 0.4.
    s.alloc.labels = vec![0, 1, 0];
    s.alloc.recount();
    let (shape, rate) = s.mu_conditional();
    assert_eq!(shape, 2.0);
    assert!((rate - 2.6).abs() < 1e-15);
    s.set_state(0.5, 0.2, 5.0, 0.1, vec![1.0]);
    let t = s.alpha_conditional();
    assert_eq!(t.shape, 7.0);
    assert!((t.rate - (1.0 + (0.7f64 / (0.1 + 1.2)).ln_1p())).abs() < 1e-15);
}

#[test]
fn alpha_stays_above_one() {
    let p = burr_data(200, 8);
    let mut s = ScaledLomaxSampler::new(&p, 2, None, &PriorSpec::default(), &McmcConfig {
        steps: StepSizes { alpha: 3.0, ..Default::default() },
        adapt: false,
        ..Default::default()
    })
    .unwrap();
    let mut r = rng(8);
    for _ in 0..500 {
        s.step(&mut r).unwrap();
        assert!(s.alpha > 1.0);
    }
}

fn thinned<F: FnMut(&mut ChaCha8Rng) -> f64>(mut f: F, burn: usize, keep: usize, thin: usize, seed: u64) -> Vec<f64> {
    let mut r = rng(seed);
    for _ in 0..burn {
        f(&mut r);
    }
    (0..keep)
        .map(|_| {
            let mut v = 0.0;
            for _ in 0..thin {
                v = f(&mut r);
            }
            v
        })
        .collect()
}

#[test]
fn burr_blocks_recover_prior_without_likelihood() {
    let p = burr_data(40, 9);
    let config = McmcConfig { steps: StepSizes { gamma: 1.0, lambda: 1.0, ..Default::default() }, adapt: false, ..Default::default() };
    let mut s = BurrSampler::new(&p, 2, &PriorSpec::default(), &config).unwrap();
    s.options.likelihood = false;
    let mut s2 = s.clone();
    let unit = GammaDist::new(1.0, 1.0).unwrap();
    let g = thinned(|r| { s.step(r).unwrap(); s.gamma }, 1000, 2000, 50, 10);
    assert!(ks_test(&g, |x| unit.cdf(x)).passes(0.01));
    let l = thinned(|r| { s2.step(r).unwrap(); s2.lambda }, 1000, 2000, 50, 11);
    assert!(ks_test(&l, |x| unit.cdf(x)).passes(0.01));
    // κ is an exact draw from its truncated Ga(6, 1) prior.
    let k = thinned(|r| { s2.step_kappa(r).unwrap(); s2.kappa }, 0, 3000, 1, 12);
    let g6 = GammaDist::new(6.0, 1.0).unwrap();
    let tail = 1.0 - g6.cdf(1.0);
    assert!(ks_test(&k, |x| (g6.cdf(x) - g6.cdf(1.0)) / tail).passes(0.01));
}

#[test]
fn scaled_lomax_blocks_recover_prior_without_likelihood() {
    let p = burr_data(40, 13);
    let prior = PriorSpec { beta: NormalPrior { mean: 0.3, sd: 0.5 }, ..Default::default() };
    let config = McmcConfig {
        steps: StepSizes { alpha: 0.8, phi: 1.0, beta: 1.0, ..Default::default() },
        adapt: false,
        ..Default::default()
    };
    let h = Harmonics { count: 1, period: 10.0 };
    let mut s = ScaledLomaxSampler::new(&p, 2, Some(h), &prior, &config).unwrap();
    s.options.likelihood = false;
    let draws: Vec<(f64, f64, f64)> = {
        let mut r = rng(14);
        for _ in 0..1000 {
            s.step(&mut r).unwrap();
        }
        (0..2000)
            .map(|_| {
                for _ in 0..20 {
                    s.step(&mut r).unwrap();
                }
                (s.alpha, s.phi, s.beta[0])
            })
            .collect()
    };
    let g6 = GammaDist::new(6.0, 1.0).unwrap();
    let tail = 1.0 - g6.cdf(1.0);
    let alpha: Vec<f64> = draws.iter().map(|d| d.0).collect();
    assert!(ks_test(&alpha, |x| (g6.cdf(x) - g6.cdf(1.0)) / tail).passes(0.01));
    let unit = GammaDist::new(1.0, 1.0).unwrap();
    let phi: Vec<f64> = draws.iter().map(|d| d.1).collect();
    assert!(ks_test(&phi, |x| unit.cdf(x)).passes(0.01));
    let nrm = Normal::new(0.3, 0.5).unwrap();
    let beta: Vec<f64> = draws.iter().map(|d| d.2).collect();
    assert!(ks_test(&beta, |x| nrm.cdf(x)).passes(0.01));
}

#[test]
fn cluster_phi_recovers_prior_without_likelihood() {
    let p = burr_data(40, 15);
    let config = McmcConfig { steps: StepSizes { phi: 1.0, ..Default::default() }, adapt: false, ..Default::default() };
    let mut s = ClusterSampler::new(&p, 2, None, &PriorSpec::default(), &config).unwrap();
    s.options.likelihood = false;
    let unit = GammaDist::new(1.0, 1.0).unwrap();
    let phi = thinned(|r| { s.step(r).unwrap(); s.phi }, 1000, 2000, 20, 16);
    assert!(ks_test(&phi, |x| unit.cdf(x)).passes(0.01));
}

#[test]
fn likelihood_touches_each_duration_once_per_evaluation() {
    let p = burr_data(300, 17);
    let mut s = BurrSampler::new(&p, 4, &PriorSpec::default(), &McmcConfig::default()).unwrap();
    let mut r = rng(17);
    s.step_configs(&mut r).unwrap();
    let before = s.evaluations;
    s.step_gamma(&mut r).unwrap();
    // Current and proposed state: two passes over durations L+1..n+1.
    assert_eq!(s.evaluations - before, 2 * (300 - 4 + 1));
    let before = s.evaluations;
    s.step_lambda(&mut r).unwrap();
    assert_eq!(s.evaluations - before, 2 * (300 - 4 + 1));
}

#[test]
fn allocated_likelihood_matches_component_densities() {
    let p = burr_data(25, 18);
    let model = MtdppModel::burr(1.7, 0.9, 4.0, vec![0.2, 0.5, 0.3]).unwrap();
    let mut s = BurrSampler::new(&p, 3, &PriorSpec::default(), &McmcConfig::default()).unwrap();
    s.set_state(1.7, 0.9, 4.0, vec![0.2, 0.5, 0.3]);
    s.step_configs(&mut rng(18)).unwrap();
    let x = p.durations();
    let mut direct = 0.0;
    for (k, &lag) in s.alloc.labels.iter().enumerate() {
        let i = 3 + 1 + k;
        let h = p.history(i, 3);
        let c = model.component(lag, h[lag - 1]);
        direct += if i <= 25 { c.ln_pdf(x[i - 1]) } else { c.ln_survival(p.censored_tail()) };
    }
    assert!((s.allocated_log_likelihood() - direct).abs() < 1e-10);
}

#[test]
fn flat_harmonics_match_plain_likelihood() {
    let p = burr_data(80, 19);
    let h = Harmonics { count: 2, period: 30.0 };
    let mut a = ScaledLomaxSampler::new(&p, 3, Some(h), &PriorSpec::default(), &McmcConfig::default()).unwrap();
    let mut b = ScaledLomaxSampler::new(&p, 3, None, &PriorSpec::default(), &McmcConfig::default()).unwrap();
    a.set_state(4.0, 0.3, vec![0.0; 4], vec![0.5, 0.3, 0.2]);
    b.set_state(4.0, 0.3, vec![], vec![0.5, 0.3, 0.2]);
    a.step_configs(&mut rng(20)).unwrap();
    b.step_configs(&mut rng(20)).unwrap();
    assert_eq!(a.alloc, b.alloc);
    assert_eq!(a.allocated_log_likelihood(), b.allocated_log_likelihood());
}

#[test]
fn seasonal_likelihood_matches_process_module() {
    let p = burr_data(60, 21);
    let h = Harmonics { count: 1, period: 9.0 };
    let mut s = ScaledLomaxSampler::new(&p, 2, Some(h), &PriorSpec::default(), &McmcConfig::default()).unwrap();
    s.set_state(4.0, 0.3, vec![0.4, -0.2], vec![1.0, 0.0]);
    s.step_configs(&mut rng(22)).unwrap();
    assert!(s.alloc.labels.iter().all(|&l| l == 1));
    let model = s.seasonal_model().unwrap().unwrap();
    let ll = model.conditional_log_likelihood(&p).unwrap();
    assert!((s.allocated_log_likelihood() - ll).abs() < 1e-9 * ll.abs());
}

#[test]
fn run_is_reproducible_and_respects_supports() {
    let p = burr_data(150, 23);
    let config = McmcConfig { iterations: 400, burn_in: 100, thin: 3, seed: 5, ..Default::default() };
    for spec in [
        ModelSpec::Burr { order: 3 },
        ModelSpec::ScaledLomax { order: 2, harmonics: Some(Harmonics { count: 1, period: 20.0 }) },
        ModelSpec::LomaxMtdcpp { order: 3 },
        ModelSpec::Poisson { order: 1 },
    ] {
        let a = run_mcmc(&p, &spec, &PriorSpec::default(), &config).unwrap();
        let b = run_mcmc(&p, &spec, &PriorSpec::default(), &config).unwrap();
        assert_eq!(a, b);
        assert_eq!(a.rows(), 100);
        for r in 0..a.rows() {
            let w = a.weights(r);
            assert!(w.iter().all(|&v| v >= 0.0));
            assert!((w.iter().sum::<f64>() - 1.0).abs() < 1e-12);
            for name in ["kappa", "alpha"] {
                if let Some(v) = a.value(r, name) {
                    assert!(v > 1.0);
                }
            }
            a.model_at(r).unwrap();
        }
        let m: f64 = a.columns().iter().filter(|c| c.starts_with("m_")).map(|c| a.value(0, c).unwrap()).sum();
        assert_eq!(m as usize, 150 - spec.order() + 1);
    }
}

#[test]
fn poisson_fit_pins_pi0() {
    let p = burr_data(100, 24);
    let config = McmcConfig { iterations: 200, burn_in: 50, thin: 1, ..Default::default() };
    let s = run_mcmc(&p, &ModelSpec::Poisson { order: 1 }, &PriorSpec::default(), &config).unwrap();
    assert!(s.column("pi0").unwrap().iter().all(|&v| v == 1.0));
    let mean = p.durations().iter().sum::<f64>() / 100.0;
    let mu = s.summary("mu").unwrap().mean;
    assert!((mu * mean - 1.0).abs() < 0.25, "{mu}");
}

#[test]
fn samples_round_trip_through_files() {
    let p = burr_data(80, 25);
    let config = McmcConfig { iterations: 60, burn_in: 10, thin: 5, ..Default::default() };
    let s = run_mcmc(&p, &ModelSpec::Burr { order: 2 }, &PriorSpec::default(), &config).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("draws.csv");
    s.write(&path).unwrap();
    assert!(PosteriorSamples::sidecar_path(&path).exists());
    assert_eq!(PosteriorSamples::read(&path).unwrap(), s);
}

#[test]
fn different_seeds_give_different_hashes() {
    let spec = ModelSpec::Burr { order: 2 };
    let prior = PriorSpec::default();
    let a = config_hash(&(&spec, &prior, &McmcConfig::default())).unwrap();
    let b = config_hash(&(&spec, &prior, &McmcConfig { seed: 99, ..Default::default() })).unwrap();
    assert_ne!(a, b);
    assert_eq!(a.len(), 16);
}

