use crate::dist::Component;
use crate::numeric::{bisect, log_sum_exp};

/// A finite mixture of duration components with nonnegative weights summing to one.
#[derive(Debug, Clone, PartialEq)]
pub struct Mixture {
    weights: Vec<f64>,
    components: Vec<Component>,
}

impl Mixture {
    /// Weights and components must have equal, nonzero length.
    pub fn new(weights: Vec<f64>, components: Vec<Component>) -> Self {
        assert_eq!(weights.len(), components.len());
        assert!(!weights.is_empty());
        Self { weights, components }
    }

    pub fn single(component: Component) -> Self {
        Self { weights: vec![1.0], components: vec![component] }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    pub fn components(&self) -> &[Component] {
        &self.components
    }

    pub fn len(&self) -> usize {
        self.weights.len()
    }

    pub fn is_empty(&self) -> bool {
        self.weights.is_empty()
    }

    /// `ln w_l + term_l` for every component with positive weight; zero
    /// weights contribute `-inf` without evaluating the term.
    fn weighted_terms(&self, term: impl Fn(&Component) -> f64) -> Vec<f64> {
        self.weights
            .iter()
            .zip(&self.components)
            .map(|(&w, c)| if w > 0.0 { w.ln() + term(c) } else { f64::NEG_INFINITY })
            .collect()
    }

    pub fn ln_density(&self, x: f64) -> f64 {
        log_sum_exp(&self.weighted_terms(|c| c.ln_pdf(x)))
    }

    pub fn density(&self, x: f64) -> f64 {
        self.ln_density(x).exp()
    }

    pub fn ln_survival(&self, x: f64) -> f64 {
        log_sum_exp(&self.weighted_terms(|c| c.ln_survival(x)))
    }

    pub fn survival(&self, x: f64) -> f64 {
        self.ln_survival(x).exp()
    }

    pub fn cdf(&self, x: f64) -> f64 {
        -self.ln_survival(x).exp_m1()
    }

    /// Survival-reweighted mixture weights `w_l S_l(x) / S*(x)`.
    pub fn local_weights(&self, x: f64) -> Vec<f64> {
        let terms = self.weighted_terms(|c| c.ln_survival(x));
        let total = log_sum_exp(&terms);
        if total == f64::NEG_INFINITY {
            // Every component survival underflowed; fall back to the
            // component with the heaviest log tail.
            let best = terms
                .iter()
                .enumerate()
                .max_by(|a, b| a.1.total_cmp(b.1))
                .map(|(i, _)| i)
                .unwrap_or(0);
            let mut out = vec![0.0; terms.len()];
            out[best] = 1.0;
            return out;
        }
        terms.iter().map(|&t| (t - total).exp()).collect()
    }

    /// Mixture hazard `Σ w*_l(x) h_l(x)`.
    pub fn hazard(&self, x: f64) -> f64 {
        self.local_weights(x)
            .iter()
            .zip(&self.components)
            .map(|(&w, c)| if w > 0.0 { w * c.hazard(x) } else { 0.0 })
            .sum()
    }

    /// Index of the component selected by `u ∈ [0, 1)` against `weights`.
    pub fn select(weights: &[f64], u: f64) -> usize {
        let mut acc = 0.0;
        let mut last_positive = 0;
        for (i, &w) in weights.iter().enumerate() {
            if w > 0.0 {
                last_positive = i;
                acc += w;
                if u < acc {
                    return i;
                }
            }
        }
        last_positive
    }

    /// Draw `(component index, duration)` from two independent uniforms.
    pub fn sample_with(&self, u_select: f64, u_value: f64) -> (usize, f64) {
        let k = Self::select(&self.weights, u_select);
        (k, self.components[k].quantile(u_value))
    }

    /// Draw conditional on exceeding `floor`: the component is chosen from
    /// the local weights at `floor`, then drawn from its truncated law.
    pub fn sample_above(&self, floor: f64, u_select: f64, u_value: f64) -> (usize, f64) {
        let k = Self::select(&self.local_weights(floor), u_select);
        (k, self.components[k].sample_above(floor, u_value))
    }

    /// Mixture quantile by bisection on the CDF; `u ∈ [0, 1)`.
    pub fn quantile(&self, u: f64) -> f64 {
        if u <= 0.0 {
            return 0.0;
        }
        if self.len() == 1 {
            return self.components[0].quantile(u);
        }
        // The mixture quantile lies between the component quantiles.
        let qs: Vec<f64> = self
            .weights
            .iter()
            .zip(&self.components)
            .filter(|(&w, _)| w > 0.0)
            .map(|(_, c)| c.quantile(u))
            .collect();
        let lo = qs.iter().copied().fold(f64::INFINITY, f64::min);
        let hi = qs.iter().copied().fold(0.0, f64::max);
        if hi <= lo {
            return lo;
        }
        let target = (-u).ln_1p();
        bisect(|x| target - self.ln_survival(x), lo, hi, 1e-14, 200)
    }

    pub fn mean(&self) -> Option<f64> {
        let mut total = 0.0;
        for (&w, c) in self.weights.iter().zip(&self.components) {
            if w > 0.0 {
                total += w * c.mean()?;
            }
        }
        Some(total)
    }
}
