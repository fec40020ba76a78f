//! Regenerative-period accumulators and the potential update they drive.

use crate::error::OnlineError;

/// Per-state visit counts and running sums within one regenerative period.
#[derive(Debug, Clone)]
pub struct RegenAccumulators {
    /// Running per-stage reward sum per tracked state.
    pub s_g: Vec<f64>,
    /// Running next-state-potential sum per tracked state.
    pub s_v: Vec<f64>,
    /// Visit count per tracked state.
    pub l: Vec<u64>,
    unvisited: usize,
}

impl RegenAccumulators {
    pub fn new(states: usize) -> Self {
        Self {
            s_g: vec![0.0; states],
            s_v: vec![0.0; states],
            l: vec![0; states],
            unvisited: states,
        }
    }

    /// Zeroes everything for the next period.
    pub fn reset(&mut self) {
        self.s_g.fill(0.0);
        self.s_v.fill(0.0);
        self.l.fill(0);
        self.unvisited = self.l.len();
    }

    /// Records one slot spent in state `i`: the observed reward and the
    /// current estimate of the successor state's potential.
    pub fn record(&mut self, i: usize, reward: f64, next_potential: f64) {
        self.s_g[i] += reward;
        self.s_v[i] += next_potential;
        if self.l[i] == 0 {
            self.unvisited -= 1;
        }
        self.l[i] += 1;
    }

    /// True when every tracked state has been visited at least once, i.e. the
    /// current slot closes a regenerative period.
    pub fn all_visited(&self) -> bool {
        self.unvisited == 0
    }

    /// Number of still-unvisited states.
    pub fn unvisited(&self) -> usize {
        self.unvisited
    }
}

/// The noisy Bellman residuals observed this period:
/// `Y(i) = S_g(i)/l(i) - (S_g(I)/l(I) + S_v(I)/l(I) - V(I)) + S_v(i)/l(i) - V(i)`.
pub fn period_residuals(
    table: &[f64],
    acc: &RegenAccumulators,
    reference: usize,
) -> Result<Vec<f64>, OnlineError> {
    if let Some(state) = acc.l.iter().position(|&l| l == 0) {
        return Err(OnlineError::UnvisitedState { state });
    }
    let ref_term =
        acc.s_g[reference] / acc.l[reference] as f64 + acc.s_v[reference] / acc.l[reference] as f64
            - table[reference];
    Ok((0..table.len())
        .map(|i| {
            let li = acc.l[i] as f64;
            acc.s_g[i] / li - ref_term + acc.s_v[i] / li - table[i]
        })
        .collect())
}

/// Applies one stochastic-approximation step `V(i) += eps * Y(i)` in place.
/// Returns the max-norm of the applied change. Every tracked state must have
/// been visited this period.
pub fn potential_update(
    table: &mut [f64],
    acc: &RegenAccumulators,
    reference: usize,
    eps: f64,
) -> Result<f64, OnlineError> {
    let y = period_residuals(table, acc, reference)?;
    let mut max_change = 0.0f64;
    for (v, yi) in table.iter_mut().zip(&y) {
        let change = eps * yi;
        *v += change;
        max_change = max_change.max(change.abs());
    }
    Ok(max_change)
}
