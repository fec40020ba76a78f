//! Driving one frozen policy through warmup plus a measurement window.

use crate::config::SystemConfig;

use super::metrics::{Metrics, MetricsAccumulator};
use super::policy::Policy;
use super::sim::SlotSim;

/// Slot budget of a replication.
#[derive(Debug, Clone, Copy)]
pub struct RunParams {
    pub warmup_slots: u64,
    pub measure_slots: u64,
}

/// Simulates `warmup + measure` slots under a frozen policy; metrics cover
/// the measurement window only.
pub fn run_replication(
    policy: &Policy,
    config: &SystemConfig,
    params: &RunParams,
    seed: u64,
) -> Metrics {
    let mut sim = SlotSim::new(config, seed);
    let mut acc = MetricsAccumulator::new(config.k);
    let mut sojourn_slots_start = vec![0.0; config.k];
    let mut sojourn_count_start = vec![0u64; config.k];
    let total = params.warmup_slots + params.measure_slots;
    let mut queue_before = vec![0u32; config.k];
    for t in 0..total {
        if t == params.warmup_slots {
            sojourn_slots_start.copy_from_slice(&sim.sojourn_slots);
            sojourn_count_start.copy_from_slice(&sim.sojourn_count);
        }
        let channel = sim.draw_channel();
        let hol = sim.hol_delays();
        let action = policy.decide(sim.slot, &channel, &sim.queue, &hol, config);
        queue_before.copy_from_slice(&sim.queue.q);
        let power = action.total_power();
        let step = sim.step(&channel, &action);
        if t >= params.warmup_slots {
            acc.record(
                config,
                &queue_before,
                step.reward,
                power,
                &step.outcome.arrivals,
                &step.outcome.dropped,
            );
        }
    }
    let sojourn_slots: Vec<f64> = sim
        .sojourn_slots
        .iter()
        .zip(&sojourn_slots_start)
        .map(|(a, b)| a - b)
        .collect();
    let sojourn_count: Vec<u64> = sim
        .sojourn_count
        .iter()
        .zip(&sojourn_count_start)
        .map(|(a, b)| a - b)
        .collect();
    acc.finish(config, &sojourn_slots, &sojourn_count, sim.checksum())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config_single_user() -> SystemConfig {
        SystemConfig {
            k: 1,
            n_f: 1,
            n_q: 50,
            tau: 0.005,
            lambda: vec![20.0], // lambda * tau = 0.1
            mean_packet_bits: vec![62_500.0],
            beta: vec![1.0],
            p_0: 1.0,
            gamma: 1.0,
            subband_bandwidth: 2.5e6,
            rng_seed: 0,
            csi_levels: 2,
        }
    }

    /// Service rate whose per-slot completion probability is `p`, given
    /// exponential packet sizes: solves 1 - exp(-R tau / N) = p.
    fn rate_for_completion_prob(cfg: &SystemConfig, p: f64) -> f64 {
        -(1.0 - p).ln() * cfg.mean_packet_bits[0] / cfg.tau
    }

    #[test]
    fn zero_arrivals_give_zero_metrics() {
        let mut cfg = config_single_user();
        cfg.lambda = vec![0.0];
        let policy = Policy::FixedRate { rates: vec![1e6] };
        let params = RunParams {
            warmup_slots: 100,
            measure_slots: 1_000,
        };
        let m = run_replication(&policy, &cfg, &params, 3);
        assert_eq!(m.avg_queue[0], 0.0);
        assert_eq!(m.avg_delay_littles[0], 0.0);
        assert_eq!(m.avg_delay_sojourn[0], 0.0);
        assert_eq!(m.avg_power, 0.0);
    }

    #[test]
    fn single_queue_matches_birth_death_mean() {
        // Arrival prob ~0.1 per slot, completion prob 0.2: the slotted
        // birth-death chain has mean queue close to rho/(1-rho) = 1 at
        // rho = 0.5.
        let cfg = config_single_user();
        let rate = rate_for_completion_prob(&cfg, 0.2);
        let policy = Policy::FixedRate { rates: vec![rate] };
        let params = RunParams {
            warmup_slots: 50_000,
            measure_slots: 1_000_000,
        };
        let m = run_replication(&policy, &cfg, &params, 11);
        assert!(
            (m.avg_queue[0] - 1.0).abs() < 0.1,
            "avg queue {} not within 10% of 1.0",
            m.avg_queue[0]
        );
    }

    #[test]
    fn littles_law_readings_agree_on_stable_runs() {
        let cfg = config_single_user();
        let rate = rate_for_completion_prob(&cfg, 0.2);
        let policy = Policy::FixedRate { rates: vec![rate] };
        let params = RunParams {
            warmup_slots: 50_000,
            measure_slots: 1_000_000,
        };
        let m = run_replication(&policy, &cfg, &params, 11);
        let rel = (m.avg_delay_littles[0] - m.avg_delay_sojourn[0]).abs() / m.avg_delay_littles[0];
        assert!(
            rel < 0.05,
            "littles {} vs sojourn {} differ by {:.1}%",
            m.avg_delay_littles[0],
            m.avg_delay_sojourn[0],
            100.0 * rel
        );
    }

    #[test]
    fn same_seed_same_streams_across_policies() {
        let cfg = config_single_user();
        let idle = Policy::FixedRate { rates: vec![0.0] };
        let busy = Policy::FixedRate {
            rates: vec![rate_for_completion_prob(&cfg, 0.3)],
        };
        let params = RunParams {
            warmup_slots: 100,
            measure_slots: 5_000,
        };
        let a = run_replication(&idle, &cfg, &params, 9);
        let b = run_replication(&busy, &cfg, &params, 9);
        assert_eq!(a.stream_checksum, b.stream_checksum);
        assert_ne!(a.avg_queue, b.avg_queue);
    }

    #[test]
    fn warmup_doubling_leaves_stationary_metrics_alone() {
        let cfg = config_single_user();
        let rate = rate_for_completion_prob(&cfg, 0.25);
        let policy = Policy::FixedRate { rates: vec![rate] };
        let short = RunParams {
            warmup_slots: 20_000,
            measure_slots: 400_000,
        };
        let long = RunParams {
            warmup_slots: 40_000,
            measure_slots: 400_000,
        };
        let a = run_replication(&policy, &cfg, &short, 21);
        let b = run_replication(&policy, &cfg, &long, 21);
        let rel = (a.avg_queue[0] - b.avg_queue[0]).abs() / a.avg_queue[0];
        assert!(rel < 0.05, "warmup shift moved avg queue by {rel:.3}");
    }
}
