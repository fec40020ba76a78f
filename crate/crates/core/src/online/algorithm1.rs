//! Joint-table online value iteration.
//!
//! One learner owns one simulated system. Within a period the policy is the
//! greedy water-filling allocator against a frozen snapshot of the table;
//! at each period boundary (every joint state visited) the table takes one
//! stochastic-approximation step and the snapshot refreshes.

use crate::config::SystemConfig;
use crate::error::{OnlineError, OracleError};
use crate::harness::sim::SlotSim;
use crate::policy::allocate_optimal;
use crate::potential::{JointTable, PotentialTable};
use crate::state::StateSpace;

use super::learner::{period_residuals, potential_update, RegenAccumulators};
use super::{RunOptions, RunningAverages, StopReason, TraceRecord};

/// The outcome of a joint learning run.
#[derive(Debug, Clone)]
pub struct JointRun {
    pub table: JointTable,
    pub trace: Vec<TraceRecord>,
    pub stop: StopReason,
    pub slots: u64,
}

fn mean(values: &[f64]) -> f64 {
    values.iter().sum::<f64>() / values.len() as f64
}

/// Runs the joint learner until the table stabilizes or a budget runs out.
pub fn run_algorithm1(config: &SystemConfig, opts: &RunOptions) -> Result<JointRun, OnlineError> {
    let space = StateSpace::new(config.k, config.n_q);
    let states = space.len();
    if states > opts.state_space_cap {
        return Err(OracleError::StateSpaceTooLarge {
            states,
            cap: opts.state_space_cap,
        }
        .into());
    }

    let mut sim = SlotSim::new(config, config.rng_seed);
    let mut learn = vec![0.0f64; states];
    let mut snapshot = PotentialTable::Joint(JointTable {
        space,
        values: learn.clone(),
    });
    let mut acc = RegenAccumulators::new(states);
    let mut averages = RunningAverages::new(config.k);
    let mut trace = Vec::new();
    let mut period = 0usize;
    let mut period_start = 0u64;

    loop {
        if sim.slot - period_start > opts.max_period_slots {
            return Err(OnlineError::PeriodBudgetExhausted {
                period,
                max_slots: opts.max_period_slots,
                unvisited: acc.unvisited(),
            });
        }
        let channel = sim.draw_channel();
        let state_now = space.index(&sim.queue.q);
        let action = allocate_optimal(&channel, &sim.queue, &snapshot, config);
        let power = action.total_power();
        let queue_before: Vec<u32> = sim.queue.q.clone();
        let step = sim.step(&channel, &action);
        averages.record(
            &queue_before,
            step.reward,
            power,
            step.outcome
                .arrivals
                .iter()
                .zip(&step.outcome.dropped)
                .map(|(a, d)| a - d),
        );
        let state_next = space.index(&sim.queue.q);
        acc.record(state_now, step.reward, learn[state_next]);

        if acc.all_visited() {
            let eps = opts.schedule.stepsize(period);
            let delta = potential_update(&mut learn, &acc, StateSpace::REFERENCE, eps)?;
            snapshot = PotentialTable::Joint(JointTable {
                space,
                values: learn.clone(),
            });
            trace.push(TraceRecord {
                period,
                user: None,
                slots_elapsed: sim.slot,
                epsilon: eps,
                table_delta: delta,
                avg_potential: mean(&learn),
                running_avg_reward: averages.avg_reward(),
                running_avg_power: averages.avg_power(),
                running_avg_weighted_delay: averages.weighted_delay(config),
            });
            acc.reset();
            period += 1;
            period_start = sim.slot;
            let finish = |stop: StopReason, trace: Vec<TraceRecord>| JointRun {
                table: JointTable {
                    space,
                    values: learn.clone(),
                },
                trace,
                stop,
                slots: sim.slot,
            };
            if delta < opts.delta_v {
                return Ok(finish(StopReason::Stabilized { period }, trace));
            }
            if period >= opts.max_periods {
                return Ok(finish(StopReason::MaxPeriods { last_delta: delta }, trace));
            }
        }
    }
}

/// Runs the system under a frozen joint table and collects the raw period
/// residuals `Y` for `periods` regenerative periods, without updating
/// anything. Used to check that the residuals are centered at a solved table.
pub fn collect_y_samples(
    config: &SystemConfig,
    table: &JointTable,
    periods: usize,
    max_period_slots: u64,
) -> Result<Vec<Vec<f64>>, OnlineError> {
    let space = table.space;
    let snapshot = PotentialTable::Joint(table.clone());
    let mut sim = SlotSim::new(config, config.rng_seed);
    let mut acc = RegenAccumulators::new(space.len());
    let mut samples = Vec::with_capacity(periods);
    let mut period_start = 0u64;
    while samples.len() < periods {
        if sim.slot - period_start > max_period_slots {
            return Err(OnlineError::PeriodBudgetExhausted {
                period: samples.len(),
                max_slots: max_period_slots,
                unvisited: acc.unvisited(),
            });
        }
        let channel = sim.draw_channel();
        let state_now = space.index(&sim.queue.q);
        let action = allocate_optimal(&channel, &sim.queue, &snapshot, config);
        let step = sim.step(&channel, &action);
        let state_next = space.index(&sim.queue.q);
        acc.record(state_now, step.reward, table.values[state_next]);
        if acc.all_visited() {
            samples.push(period_residuals(&table.values, &acc, StateSpace::REFERENCE)?);
            acc.reset();
            period_start = sim.slot;
        }
    }
    Ok(samples)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::online::StepsizeSchedule;

    fn tiny_config() -> SystemConfig {
        SystemConfig {
            k: 1,
            n_f: 1,
            n_q: 1,
            tau: 0.005,
            lambda: vec![20.0],
            mean_packet_bits: vec![62_500.0],
            beta: vec![1.0],
            p_0: 1.0,
            gamma: 0.01,
            subband_bandwidth: 2.5e6,
            rng_seed: 11,
            csi_levels: 8,
        }
    }

    fn options() -> RunOptions {
        RunOptions {
            schedule: StepsizeSchedule::default(),
            delta_v: 1e-3,
            max_periods: 20_000,
            max_period_slots: 1_000_000,
            state_space_cap: 4096,
        }
    }

    #[test]
    fn zero_arrivals_never_close_a_period() {
        let mut cfg = tiny_config();
        cfg.lambda = vec![0.0];
        let mut opts = options();
        opts.max_period_slots = 2_000;
        let err = run_algorithm1(&cfg, &opts).unwrap_err();
        assert!(matches!(err, OnlineError::PeriodBudgetExhausted { .. }));
    }

    #[test]
    fn joint_state_cap_is_enforced() {
        let mut cfg = tiny_config();
        cfg.k = 2;
        cfg.n_q = 100;
        cfg.lambda = vec![20.0; 2];
        cfg.mean_packet_bits = vec![62_500.0; 2];
        cfg.beta = vec![1.0; 2];
        let err = run_algorithm1(&cfg, &options()).unwrap_err();
        assert!(matches!(
            err,
            OnlineError::Oracle(OracleError::StateSpaceTooLarge { .. })
        ));
    }

    #[test]
    fn runs_are_deterministic_per_seed() {
        let cfg = tiny_config();
        let mut opts = options();
        opts.max_periods = 50;
        opts.delta_v = 0.0; // never stabilize; run the full 50 periods
        let a = run_algorithm1(&cfg, &opts).unwrap();
        let b = run_algorithm1(&cfg, &opts).unwrap();
        assert_eq!(a.trace, b.trace);
        assert_eq!(a.table.values, b.table.values);
        assert!(matches!(a.stop, StopReason::MaxPeriods { .. }));
    }

    #[test]
    fn reference_entry_never_moves() {
        let cfg = tiny_config();
        let mut opts = options();
        opts.max_periods = 200;
        opts.delta_v = 0.0;
        let run = run_algorithm1(&cfg, &opts).unwrap();
        assert_eq!(run.table.values[0], 0.0);
        assert!(run.table.values[1].abs() > 0.0, "table never learned");
    }
}
