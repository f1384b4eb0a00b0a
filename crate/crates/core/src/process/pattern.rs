use crate::error::{Error, Result};

/// Minimum admissible spacing between consecutive events.
pub const MIN_SPACING: f64 = 1e-12;

/// Observed event times `0 < t_1 < … < t_n < T` on the window `(0, T]`.
#[derive(Debug, Clone, PartialEq)]
pub struct PointPattern {
    times: Vec<f64>,
    horizon: f64,
    durations: Vec<f64>,
}

impl PointPattern {
    /// Validates ordering and spacing; durations are derived with `t_0 = 0`.
    pub fn new(times: Vec<f64>, horizon: f64) -> Result<Self> {
        if !(horizon.is_finite() && horizon > 0.0) {
            return Err(Error::Data(format!("horizon must be finite and positive, got {horizon}")));
        }
        let mut prev = 0.0;
        let mut durations = Vec::with_capacity(times.len());
        for (i, &t) in times.iter().enumerate() {
            if !t.is_finite() {
                return Err(Error::Data(format!("event {} has non-finite time {t}", i + 1)));
            }
            let d = t - prev;
            if d < MIN_SPACING {
                return Err(Error::Data(format!(
                    "event {} at time {t} is not strictly after the previous event at {prev} (spacing {d:e})",
                    i + 1
                )));
            }
            durations.push(d);
            prev = t;
        }
        if horizon - prev < MIN_SPACING {
            return Err(Error::Data(format!(
                "horizon {horizon} must exceed the last event time {prev}"
            )));
        }
        Ok(Self { times, horizon, durations })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn horizon(&self) -> f64 {
        self.horizon
    }

    /// `x_i = t_i - t_{i-1}` for `i = 1..n`.
    pub fn durations(&self) -> &[f64] {
        &self.durations
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn last_time(&self) -> f64 {
        self.times.last().copied().unwrap_or(0.0)
    }

    /// Censored tail `T - t_n`.
    pub fn censored_tail(&self) -> f64 {
        self.horizon - self.last_time()
    }

    /// Lagged durations seen by duration `i` (1-based, `1..=n+1`), most
    /// recent first: `x_{i-1}, x_{i-2}, …`, at most `order` of them.
    pub fn history(&self, i: usize, order: usize) -> Vec<f64> {
        let available = i.saturating_sub(1).min(self.durations.len());
        let take = available.min(order);
        self.durations[available - take..available].iter().rev().copied().collect()
    }

    /// Number of events strictly before `t`.
    pub fn count_before(&self, t: f64) -> usize {
        self.times.partition_point(|&s| s < t)
    }

    /// A copy truncated to the events strictly before `t`, with horizon `t`.
    pub fn prefix(&self, t: f64) -> Result<Self> {
        let n = self.count_before(t);
        Self::new(self.times[..n].to_vec(), t)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn durations_and_tail() {
        let p = PointPattern::new(vec![1.0, 1.5, 4.0], 5.0).unwrap();
        assert_eq!(p.durations(), &[1.0, 0.5, 2.5]);
        assert_eq!(p.censored_tail(), 1.0);
        assert_eq!(p.history(4, 2), vec![2.5, 0.5]);
        assert_eq!(p.history(2, 3), vec![1.0]);
        assert!(p.history(1, 3).is_empty());
        assert_eq!(p.count_before(1.5), 1);
        assert_eq!(p.count_before(1.6), 2);
    }

    #[test]
    fn rejects_bad_patterns() {
        assert!(PointPattern::new(vec![1.0, 1.0], 2.0).is_err());
        assert!(PointPattern::new(vec![1.0, 0.5], 2.0).is_err());
        assert!(PointPattern::new(vec![0.0], 2.0).is_err());
        assert!(PointPattern::new(vec![1.0, 1.0 + 1e-13], 2.0).is_err());
        assert!(PointPattern::new(vec![1.0], 1.0).is_err());
        assert!(PointPattern::new(vec![], 0.0).is_err());
        assert!(PointPattern::new(vec![], 1.0).is_ok());
    }
}
