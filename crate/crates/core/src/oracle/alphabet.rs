//! Finite CSI alphabet for exact conditional expectations.
//!
//! The unit-mean exponential gain distribution is split into equal-probability
//! bins; each level is the conditional mean of its bin (closed form for the
//! exponential). This keeps the alphabet mean at exactly 1 for any size.

/// A discrete gain distribution: `levels[m]` with `probs[m]`, i.i.d. per
/// (user, subband).
#[derive(Debug, Clone, PartialEq)]
pub struct CsiAlphabet {
    pub levels: Vec<f64>,
    pub probs: Vec<f64>,
}

impl CsiAlphabet {
    pub fn len(&self) -> usize {
        self.levels.len()
    }

    pub fn is_empty(&self) -> bool {
        self.levels.is_empty()
    }

    pub fn mean(&self) -> f64 {
        self.levels
            .iter()
            .zip(&self.probs)
            .map(|(l, p)| l * p)
            .sum()
    }

    /// Panics unless probabilities sum to 1 and levels are increasing and
    /// nonnegative.
    pub fn check_invariants(&self) {
        let total: f64 = self.probs.iter().sum();
        assert!(
            (total - 1.0).abs() < 1e-12,
            "alphabet probabilities sum to {total}, not 1"
        );
        assert!(self.levels[0] >= 0.0, "negative gain level");
        for w in self.levels.windows(2) {
            assert!(w[0] < w[1], "levels must be strictly increasing");
        }
    }

    /// Cumulative probability strictly below level `j`.
    pub fn cdf_below(&self, j: usize) -> f64 {
        self.probs[..j].iter().sum()
    }

    /// Cumulative probability up to and including level `j`.
    pub fn cdf_through(&self, j: usize) -> f64 {
        self.probs[..=j].iter().sum()
    }
}

/// Builds the `m`-level equal-probability exponential alphabet.
///
/// Bin boundaries are `b_j = -ln(1 - j/m)`; the conditional mean over
/// `[b_j, b_{j+1})` is
/// `((b_j + 1) e^{-b_j} - (b_{j+1} + 1) e^{-b_{j+1}}) / (e^{-b_j} - e^{-b_{j+1}})`,
/// and the last (unbounded) bin has mean `b_{m-1} + 1` by memorylessness.
pub fn build_csi_alphabet(m_levels: usize) -> CsiAlphabet {
    assert!(m_levels >= 1, "alphabet needs at least one level");
    let m = m_levels as f64;
    let prob = 1.0 / m;
    let mut levels = Vec::with_capacity(m_levels);
    for j in 0..m_levels {
        let lo = -(1.0 - j as f64 / m).ln();
        let mean = if j + 1 == m_levels {
            lo + 1.0
        } else {
            let hi = -(1.0 - (j + 1) as f64 / m).ln();
            let num = (lo + 1.0) * (-lo).exp() - (hi + 1.0) * (-hi).exp();
            let den = (-lo).exp() - (-hi).exp();
            num / den
        };
        levels.push(mean);
    }
    let alphabet = CsiAlphabet {
        levels,
        probs: vec![prob; m_levels],
    };
    alphabet.check_invariants();
    alphabet
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::LN_2;

    #[test]
    fn degenerate_alphabet_is_the_mean() {
        let a = build_csi_alphabet(1);
        assert_eq!(a.levels, vec![1.0]);
        assert_eq!(a.probs, vec![1.0]);
    }

    #[test]
    fn two_level_alphabet_hand_values() {
        let a = build_csi_alphabet(2);
        // Boundary ln 2; conditional means 1 -/+ ln 2.
        assert!((a.levels[0] - (1.0 - LN_2)).abs() < 1e-12);
        assert!((a.levels[1] - (1.0 + LN_2)).abs() < 1e-12);
        assert_eq!(a.probs, vec![0.5, 0.5]);
    }

    #[test]
    fn alphabet_mean_is_one_for_any_size() {
        for m in [1, 2, 3, 4, 8, 16, 64] {
            let a = build_csi_alphabet(m);
            assert!(
                (a.mean() - 1.0).abs() < 1e-9,
                "mean for m = {m} is {}",
                a.mean()
            );
        }
    }

    #[test]
    fn cdf_helpers() {
        let a = build_csi_alphabet(4);
        assert_eq!(a.cdf_below(0), 0.0);
        assert!((a.cdf_below(2) - 0.5).abs() < 1e-15);
        assert!((a.cdf_through(3) - 1.0).abs() < 1e-15);
    }
}
