//! Mixed-radix indexing of the joint queue state space.

/// Enumerates the `(N_Q + 1)^K` joint queue states. The all-empty state has
/// index 0 and serves as the reference state everywhere.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct StateSpace {
    pub k: usize,
    pub n_q: usize,
}

impl StateSpace {
    pub fn new(k: usize, n_q: usize) -> Self {
        Self { k, n_q }
    }

    pub fn len(&self) -> usize {
        (self.n_q + 1).pow(self.k as u32)
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    /// Index of the all-empty reference state.
    pub const REFERENCE: usize = 0;

    /// Maps per-user queue lengths to a flat index (user 0 is the least
    /// significant digit).
    pub fn index(&self, q: &[u32]) -> usize {
        debug_assert_eq!(q.len(), self.k);
        let base = self.n_q + 1;
        let mut idx = 0usize;
        for &qk in q.iter().rev() {
            debug_assert!((qk as usize) <= self.n_q);
            idx = idx * base + qk as usize;
        }
        idx
    }

    /// Inverse of [`index`](Self::index).
    pub fn queue_of(&self, mut idx: usize) -> Vec<u32> {
        let base = self.n_q + 1;
        let mut q = vec![0u32; self.k];
        for slot in q.iter_mut() {
            *slot = (idx % base) as u32;
            idx /= base;
        }
        q
    }

    /// Index of the state with user `k`'s queue raised by one (saturating at
    /// `N_Q`).
    pub fn birth(&self, idx: usize, user: usize) -> usize {
        let mut q = self.queue_of(idx);
        if (q[user] as usize) < self.n_q {
            q[user] += 1;
        }
        self.index(&q)
    }

    /// Index of the state with user `k`'s queue lowered by one (saturating at
    /// zero).
    pub fn death(&self, idx: usize, user: usize) -> usize {
        let mut q = self.queue_of(idx);
        q[user] = q[user].saturating_sub(1);
        self.index(&q)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn round_trip_all_states() {
        let sp = StateSpace::new(3, 2);
        assert_eq!(sp.len(), 27);
        for idx in 0..sp.len() {
            let q = sp.queue_of(idx);
            assert_eq!(sp.index(&q), idx);
        }
    }

    #[test]
    fn reference_is_all_empty() {
        let sp = StateSpace::new(2, 5);
        assert_eq!(sp.queue_of(StateSpace::REFERENCE), vec![0, 0]);
    }

    #[test]
    fn birth_and_death_saturate() {
        let sp = StateSpace::new(2, 1);
        let full = sp.index(&[1, 1]);
        assert_eq!(sp.birth(full, 0), full);
        assert_eq!(sp.death(StateSpace::REFERENCE, 1), StateSpace::REFERENCE);
        let mid = sp.index(&[1, 0]);
        assert_eq!(sp.death(mid, 0), StateSpace::REFERENCE);
        assert_eq!(sp.birth(StateSpace::REFERENCE, 0), mid);
    }
}
