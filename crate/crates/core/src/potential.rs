//! Potential (relative value) tables, joint and per-user-decomposed.

use crate::state::StateSpace;

/// Potential over the joint queue state space, `(N_Q + 1)^K` entries.
#[derive(Debug, Clone, PartialEq)]
pub struct JointTable {
    pub space: StateSpace,
    pub values: Vec<f64>,
}

impl JointTable {
    pub fn zeros(space: StateSpace) -> Self {
        Self {
            space,
            values: vec![0.0; space.len()],
        }
    }

    pub fn value(&self, idx: usize) -> f64 {
        self.values[idx]
    }

    /// `V(Q) - V(Q with q_k lowered by one)`, zero when user k's queue is
    /// already empty.
    pub fn increment(&self, q: &[u32], k: usize) -> f64 {
        let idx = self.space.index(q);
        let down = self.space.death(idx, k);
        self.values[idx] - self.values[down]
    }
}

/// One potential vector per user, `K x (N_Q + 1)` entries total.
#[derive(Debug, Clone, PartialEq)]
pub struct PerUserTable {
    /// values[k][q] for user k at backlog q.
    pub values: Vec<Vec<f64>>,
}

impl PerUserTable {
    pub fn zeros(k: usize, n_q: usize) -> Self {
        Self {
            values: vec![vec![0.0; n_q + 1]; k],
        }
    }

    /// `V_k(q) - V_k(q - 1)`, zero at q = 0.
    pub fn increment(&self, k: usize, q: u32) -> f64 {
        let v = &self.values[k];
        v[q as usize] - v[q.saturating_sub(1) as usize]
    }

    pub fn entries(&self) -> usize {
        self.values.iter().map(Vec::len).sum()
    }
}

/// A potential estimate in either representation.
#[derive(Debug, Clone, PartialEq)]
pub enum PotentialTable {
    Joint(JointTable),
    PerUser(PerUserTable),
}

impl PotentialTable {
    /// The backlog-reduction increment used by the allocator's water level.
    pub fn increment(&self, q: &[u32], k: usize) -> f64 {
        match self {
            PotentialTable::Joint(t) => t.increment(q, k),
            PotentialTable::PerUser(t) => t.increment(k, q[k]),
        }
    }
}
