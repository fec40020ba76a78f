//! Online stochastic value iteration over regenerative periods: the joint
//! form and the reduced-complexity per-user form.

pub mod algorithm1;
pub mod algorithm2;
pub mod learner;
pub mod stepsize;

pub use algorithm1::{collect_y_samples, run_algorithm1, JointRun};
pub use algorithm2::{run_algorithm2, DecomposedRun};
pub use learner::{period_residuals, potential_update, RegenAccumulators};
pub use stepsize::StepsizeSchedule;

use crate::config::{SolverOptions, SystemConfig};

/// Stepsize and stopping parameters for an online run.
#[derive(Debug, Clone)]
pub struct RunOptions {
    pub schedule: StepsizeSchedule,
    /// Stop when the max-norm table change of an update falls below this.
    pub delta_v: f64,
    pub max_periods: usize,
    /// Abort if one regenerative period spans more slots than this.
    pub max_period_slots: u64,
    /// Cap on the joint state space accepted by the joint learner.
    pub state_space_cap: usize,
}

impl RunOptions {
    pub fn from_solver(opts: &SolverOptions) -> Self {
        Self {
            schedule: StepsizeSchedule {
                a: opts.stepsize_a,
                b: opts.stepsize_b,
                exponent: opts.stepsize_exponent,
            },
            delta_v: opts.delta_v,
            max_periods: opts.max_periods,
            max_period_slots: opts.max_period_slots,
            state_space_cap: opts.state_space_cap,
        }
    }
}

/// Why a run ended.
#[derive(Debug, Clone, PartialEq)]
pub enum StopReason {
    /// Every tracked table's latest update fell below `delta_v`.
    Stabilized { period: usize },
    /// The period budget ran out first; the trace tells the story.
    MaxPeriods { last_delta: f64 },
}

impl StopReason {
    pub fn stabilized(&self) -> bool {
        matches!(self, StopReason::Stabilized { .. })
    }
}

/// One regenerative-period boundary in a learning run.
#[derive(Debug, Clone, PartialEq)]
pub struct TraceRecord {
    /// This learner's period index (per user in decomposed mode).
    pub period: usize,
    /// Updated user, or `None` for a joint update.
    pub user: Option<usize>,
    /// Cumulative slots when the period closed.
    pub slots_elapsed: u64,
    pub epsilon: f64,
    /// Max-norm of the applied table change.
    pub table_delta: f64,
    /// Mean over all table entries after the update.
    pub avg_potential: f64,
    /// Per-slot reward averaged from the start of the run.
    pub running_avg_reward: f64,
    pub running_avg_power: f64,
    /// Weighted Little's-law delay averaged from the start of the run.
    pub running_avg_weighted_delay: f64,
}

/// Cumulative-from-start averages shared by both learners.
#[derive(Debug, Clone)]
pub(crate) struct RunningAverages {
    slots: u64,
    reward: f64,
    power: f64,
    queue: Vec<f64>,
    admitted: Vec<u64>,
}

impl RunningAverages {
    pub fn new(k: usize) -> Self {
        Self {
            slots: 0,
            reward: 0.0,
            power: 0.0,
            queue: vec![0.0; k],
            admitted: vec![0; k],
        }
    }

    pub fn record(
        &mut self,
        queue_before: &[u32],
        reward: f64,
        power: f64,
        admitted: impl Iterator<Item = u32>,
    ) {
        self.slots += 1;
        self.reward += reward;
        self.power += power;
        for (slot, &q) in self.queue.iter_mut().zip(queue_before) {
            *slot += q as f64;
        }
        for (tot, a) in self.admitted.iter_mut().zip(admitted) {
            *tot += a as u64;
        }
    }

    pub fn avg_reward(&self) -> f64 {
        self.reward / self.slots.max(1) as f64
    }

    pub fn avg_power(&self) -> f64 {
        self.power / self.slots.max(1) as f64
    }

    /// Weighted Little's-law delay over the run so far.
    pub fn weighted_delay(&self, config: &SystemConfig) -> f64 {
        let slots = self.slots.max(1) as f64;
        (0..config.k)
            .map(|k| {
                if self.admitted[k] == 0 {
                    return 0.0;
                }
                let avg_q = self.queue[k] / slots;
                let lambda_eff = self.admitted[k] as f64 / (slots * config.tau);
                config.beta[k] * avg_q / lambda_eff
            })
            .sum()
    }
}
