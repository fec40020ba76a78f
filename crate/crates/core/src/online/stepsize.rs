//! Decaying stochastic-approximation stepsizes.

/// `eps_k = a / (b + k)^exponent`. For `a > 0`, `b >= 1` and an exponent in
/// `(0.5, 1]`, the partial sums of `eps` diverge while the partial sums of
/// `eps^2` stay bounded.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct StepsizeSchedule {
    pub a: f64,
    pub b: f64,
    pub exponent: f64,
}

impl Default for StepsizeSchedule {
    fn default() -> Self {
        Self {
            a: 1.0,
            b: 1.0,
            exponent: 0.85,
        }
    }
}

impl StepsizeSchedule {
    pub fn stepsize(&self, k: usize) -> f64 {
        self.a / (self.b + k as f64).powf(self.exponent)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn hand_values() {
        let s = StepsizeSchedule {
            a: 1.0,
            b: 1.0,
            exponent: 1.0,
        };
        assert_eq!(s.stepsize(0), 1.0);
        let s = StepsizeSchedule::default();
        let want = 100f64.powf(-0.85);
        assert!((s.stepsize(99) - want).abs() < 1e-12);
        assert!((want - 0.0200).abs() < 5e-4);
    }

    #[test]
    fn strictly_decreasing() {
        let s = StepsizeSchedule::default();
        for k in 0..1000 {
            assert!(s.stepsize(k + 1) < s.stepsize(k));
        }
    }

    #[test]
    fn partial_sum_probes() {
        let s = StepsizeSchedule::default();
        let mut sum = 0.0;
        let mut sum_sq = 0.0;
        for k in 0..1_000_000 {
            let e = s.stepsize(k);
            sum += e;
            sum_sq += e * e;
        }
        assert!(sum > 10.0, "sum of eps is only {sum}");
        assert!(sum_sq < 10.0, "sum of eps^2 is {sum_sq}");
    }
}
