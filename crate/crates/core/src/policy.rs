//! Closed-form power control and subcarrier assignment.
//!
//! Power on an owned subband is multi-level water-filling
//! `p = (level - 1/gain)^+`, where the level scales with the queue-dependent
//! potential increment. Subband ownership goes to the user with the largest
//! nonnegative surplus metric, or, under the CSI-only rule, simply to the
//! strongest channel.
//!
//! The allocator works in natural log internally; the conversion from the
//! bits/second rate law into nats is folded once into the scaled increment
//! (see [`rate_scale`]), so the allocator minimizes exactly the per-slot
//! objective implied by the simulator's rate.

use crate::config::SystemConfig;
use crate::model::{Action, ChannelState, QueueState, LN_2};
use crate::potential::PotentialTable;

/// Converts a potential increment into the allocator's nat-domain scale for
/// user `k`: `tau * W_s / (mean_packet_bits_k * ln 2)`.
pub fn rate_scale(config: &SystemConfig, k: usize) -> f64 {
    config.tau * config.subband_bandwidth / (config.mean_packet_bits[k] * LN_2)
}

/// Scaled potential increments for every user at the given queue state,
/// clamped below at zero so early (possibly negative) online estimates still
/// yield a well-defined water level.
pub fn scaled_increments(
    config: &SystemConfig,
    table: &PotentialTable,
    queue: &QueueState,
) -> Vec<f64> {
    (0..config.k)
        .map(|k| (table.increment(&queue.q, k) * rate_scale(config, k)).max(0.0))
        .collect()
}

/// Water-filling power for one subband: `(water_level - 1/gain)^+`.
/// A zero gain draws no power.
pub fn waterfill_power(gain: f64, water_level: f64) -> f64 {
    if gain <= 0.0 {
        return 0.0;
    }
    (water_level - 1.0 / gain).max(0.0)
}

/// Surplus of serving one subband: `d * ln(1 + gain * p*) - gamma * p*` with
/// `p* = (d/gamma - 1/gain)^+`. Always nonnegative; zero exactly when the
/// optimal power is zero.
pub fn subcarrier_metric(gain: f64, delta_v_scaled: f64, gamma: f64) -> f64 {
    let p = waterfill_power(gain, delta_v_scaled.max(0.0) / gamma);
    if p <= 0.0 {
        return 0.0;
    }
    delta_v_scaled * (1.0 + gain * p).ln() - gamma * p
}

/// Decides one subband given the K gains on it: returns (winner, power).
pub trait SubbandRule {
    fn decide(&self, gains: &[f64]) -> (usize, f64);
}

/// Surplus-maximizing assignment with queue-adaptive water levels.
#[derive(Debug, Clone)]
pub struct SurplusRule {
    /// Scaled potential increments per user (clamped at 0).
    pub deltas: Vec<f64>,
    pub gamma: f64,
}

impl SubbandRule for SurplusRule {
    fn decide(&self, gains: &[f64]) -> (usize, f64) {
        let mut best = 0usize;
        let mut best_metric = f64::NEG_INFINITY;
        for (k, &g) in gains.iter().enumerate() {
            let x = subcarrier_metric(g, self.deltas[k], self.gamma);
            if x > best_metric {
                best = k;
                best_metric = x;
            }
        }
        let p = waterfill_power(gains[best], self.deltas[best] / self.gamma);
        (best, p)
    }
}

/// Best-channel assignment; power still follows the winner's water level.
#[derive(Debug, Clone)]
pub struct BestGainRule {
    pub deltas: Vec<f64>,
    pub gamma: f64,
}

impl SubbandRule for BestGainRule {
    fn decide(&self, gains: &[f64]) -> (usize, f64) {
        let mut best = 0usize;
        for (k, &g) in gains.iter().enumerate() {
            if g > gains[best] {
                best = k;
            }
        }
        let p = waterfill_power(gains[best], self.deltas[best] / self.gamma);
        (best, p)
    }
}

/// Flat water level shared by all users; used by the reference schedulers.
#[derive(Debug, Clone)]
pub struct FlatLevelRule {
    pub level: f64,
}

impl SubbandRule for FlatLevelRule {
    fn decide(&self, gains: &[f64]) -> (usize, f64) {
        let mut best = 0usize;
        for (k, &g) in gains.iter().enumerate() {
            if g > gains[best] {
                best = k;
            }
        }
        (best, waterfill_power(gains[best], self.level))
    }
}

fn apply_rule(config: &SystemConfig, channel: &ChannelState, rule: &impl SubbandRule) -> Action {
    let mut action = Action {
        power: vec![vec![0.0; config.n_f]; config.k],
        assigned: vec![vec![false; config.n_f]; config.k],
    };
    let mut column = vec![0.0; config.k];
    for n in 0..config.n_f {
        for k in 0..config.k {
            column[k] = channel.gain[k][n];
        }
        let (winner, power) = rule.decide(&column);
        action.assigned[winner][n] = true;
        action.power[winner][n] = power;
    }
    action
}

/// Full queue- and channel-aware allocation: each subband goes to the user
/// with the largest surplus metric (ties to the lowest index; an all-zero
/// column is parked on its argmax with zero power), with water-filling power.
pub fn allocate_optimal(
    channel: &ChannelState,
    queue: &QueueState,
    table: &PotentialTable,
    config: &SystemConfig,
) -> Action {
    let rule = SurplusRule {
        deltas: scaled_increments(config, table, queue),
        gamma: config.gamma,
    };
    apply_rule(config, channel, &rule)
}

/// Channel-only assignment (strongest gain wins each subband) with the
/// winner's per-user water-filling power.
pub fn allocate_csi_only(
    channel: &ChannelState,
    queue: &QueueState,
    table: &PotentialTable,
    config: &SystemConfig,
) -> Action {
    let rule = BestGainRule {
        deltas: scaled_increments(config, table, queue),
        gamma: config.gamma,
    };
    apply_rule(config, channel, &rule)
}

/// The per-slot objective the allocator minimizes, for a given action:
/// `gamma * sum p - sum_k d_k * sum_n s_kn * ln(1 + p_kn * gain_kn)`.
/// Used by the brute-force optimality checks.
pub fn allocation_objective(
    config: &SystemConfig,
    channel: &ChannelState,
    action: &Action,
    deltas: &[f64],
    gamma: f64,
) -> f64 {
    let mut obj = gamma * action.total_power();
    for k in 0..config.k {
        for n in 0..config.n_f {
            if action.assigned[k][n] && action.power[k][n] > 0.0 {
                obj -= deltas[k] * (1.0 + action.power[k][n] * channel.gain[k][n]).ln();
            }
        }
    }
    obj
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::potential::PerUserTable;

    fn config(k: usize, n_f: usize) -> SystemConfig {
        SystemConfig {
            k,
            n_f,
            n_q: 4,
            tau: 1.0,
            lambda: vec![20.0; k],
            mean_packet_bits: vec![1.0; k],
            beta: vec![1.0; k],
            p_0: 1.0,
            gamma: 1.0,
            subband_bandwidth: LN_2, // makes rate_scale exactly 1
            rng_seed: 0,
            csi_levels: 2,
        }
    }

    #[test]
    fn rate_scale_hand_value() {
        let mut cfg = config(1, 1);
        cfg.tau = 0.005;
        cfg.subband_bandwidth = 2.5e6;
        cfg.mean_packet_bits = vec![62_500.0];
        let expected = 0.005 * 2.5e6 / (62_500.0 * LN_2);
        assert!((rate_scale(&cfg, 0) - expected).abs() < 1e-12);
    }

    #[test]
    fn waterfill_hand_values() {
        assert!((waterfill_power(2.0, 2.0) - 1.5).abs() < 1e-15);
        assert_eq!(waterfill_power(5.0, 0.0), 0.0);
        assert_eq!(waterfill_power(2.0, 0.5), 0.0); // boundary: level == 1/gain
        assert_eq!(waterfill_power(0.0, 10.0), 0.0);
    }

    #[test]
    fn metric_hand_values() {
        assert_eq!(subcarrier_metric(1.0, 0.0, 1.0), 0.0);
        let x = subcarrier_metric(1.0, 2.0, 1.0);
        assert!((x - (2.0 * LN_2 - 1.0)).abs() < 1e-12, "x = {x}");
        // 1/gain = 4 exceeds the water level 2: no power, no surplus.
        assert_eq!(subcarrier_metric(0.25, 2.0, 1.0), 0.0);
    }

    #[test]
    fn metric_is_nonnegative() {
        for &g in &[0.0, 0.01, 0.5, 1.0, 10.0] {
            for &d in &[-1.0, 0.0, 0.3, 2.0, 50.0] {
                for &gamma in &[0.1, 1.0, 3.0] {
                    assert!(subcarrier_metric(g, d, gamma) >= 0.0);
                }
            }
        }
    }

    fn table_with_deltas(cfg: &SystemConfig, deltas: &[f64]) -> (PotentialTable, QueueState) {
        // Queue of 1 packet per user; V_k = (0, delta) realizes the increments.
        let mut t = PerUserTable::zeros(cfg.k, cfg.n_q);
        for (k, &d) in deltas.iter().enumerate() {
            for q in 1..=cfg.n_q {
                t.values[k][q] = d * q as f64;
            }
        }
        let queue = QueueState {
            q: vec![1; cfg.k],
            hol_residual_bits: vec![1.0; cfg.k],
        };
        (PotentialTable::PerUser(t), queue)
    }

    #[test]
    fn optimal_allocation_composes_metric_and_power() {
        let cfg = config(2, 1);
        let (table, queue) = table_with_deltas(&cfg, &[2.0, 0.0]);
        let ch = ChannelState {
            gain: vec![vec![1.0], vec![1.0]],
        };
        let act = allocate_optimal(&ch, &queue, &table, &cfg);
        act.check_invariants();
        assert!(act.assigned[0][0]);
        assert!((act.power[0][0] - 1.0).abs() < 1e-12);
        assert_eq!(act.power[1][0], 0.0);
    }

    #[test]
    fn empty_queues_draw_no_power() {
        let cfg = config(3, 2);
        let table = PotentialTable::PerUser(PerUserTable::zeros(3, cfg.n_q));
        let queue = QueueState::empty(3);
        let ch = ChannelState {
            gain: vec![vec![1.0, 2.0], vec![0.3, 0.6], vec![2.0, 0.1]],
        };
        let act = allocate_optimal(&ch, &queue, &table, &cfg);
        act.check_invariants();
        assert_eq!(act.total_power(), 0.0);
    }

    #[test]
    fn csi_only_picks_strongest_channel() {
        let cfg = config(2, 1);
        let (table, queue) = table_with_deltas(&cfg, &[5.0, 0.0]);
        let ch = ChannelState {
            gain: vec![vec![0.5], vec![2.0]],
        };
        let act = allocate_csi_only(&ch, &queue, &table, &cfg);
        act.check_invariants();
        assert!(act.assigned[1][0]);
        // Winner's queue has delta 0: zero power despite winning.
        assert_eq!(act.total_power(), 0.0);
    }

    #[test]
    fn single_user_rules_coincide() {
        let cfg = config(1, 3);
        let (table, queue) = table_with_deltas(&cfg, &[1.7]);
        let ch = ChannelState {
            gain: vec![vec![0.2, 1.4, 3.0]],
        };
        let a = allocate_optimal(&ch, &queue, &table, &cfg);
        let b = allocate_csi_only(&ch, &queue, &table, &cfg);
        assert_eq!(a, b);
    }

    #[test]
    fn scale_invariance_of_level_and_assignment() {
        let cfg = config(2, 2);
        let (table, queue) = table_with_deltas(&cfg, &[1.3, 0.4]);
        let ch = ChannelState {
            gain: vec![vec![0.9, 2.0], vec![1.1, 0.2]],
        };
        let base = allocate_optimal(&ch, &queue, &table, &cfg);

        let mut scaled_cfg = cfg.clone();
        scaled_cfg.gamma *= 3.5;
        let (scaled_table, _) = table_with_deltas(&cfg, &[1.3 * 3.5, 0.4 * 3.5]);
        let scaled = allocate_optimal(&ch, &queue, &scaled_table, &scaled_cfg);

        assert_eq!(base.assigned, scaled.assigned);
        for k in 0..2 {
            for n in 0..2 {
                assert!((base.power[k][n] - scaled.power[k][n]).abs() < 1e-12);
            }
        }
    }

    #[test]
    fn ties_break_to_lowest_index() {
        let cfg = config(2, 1);
        let (table, queue) = table_with_deltas(&cfg, &[2.0, 2.0]);
        let ch = ChannelState {
            gain: vec![vec![1.0], vec![1.0]],
        };
        let a = allocate_optimal(&ch, &queue, &table, &cfg);
        assert!(a.assigned[0][0]);
        let b = allocate_csi_only(&ch, &queue, &table, &cfg);
        assert!(b.assigned[0][0]);
    }
}
