//! Reference schedulers: M-LWDF and Round Robin, both power-matched through
//! the same gamma calibration as the proposed policy.

use crate::config::SystemConfig;
use crate::model::{Action, ChannelState, QueueState};
use crate::policy::waterfill_power;

/// Which reference scheduler to run.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum BaselineKind {
    Mlwdf,
    RoundRobin,
}

/// M-LWDF: each subband goes to the backlogged user maximizing
/// `beta_k * hol_delay_k * r_kn`, where `r_kn` is the achievable rate on the
/// subband at the reference power `P_0 / N_F`. The winner water-fills at the
/// flat level `1 / gamma`; users with empty queues transmit nothing.
pub fn mlwdf_allocate(
    channel: &ChannelState,
    queue: &QueueState,
    hol_delay: &[f64],
    config: &SystemConfig,
) -> Action {
    let reference_power = config.p_0 / config.n_f as f64;
    let level = 1.0 / config.gamma;
    let mut action = Action {
        power: vec![vec![0.0; config.n_f]; config.k],
        assigned: vec![vec![false; config.n_f]; config.k],
    };
    for n in 0..config.n_f {
        let mut winner = 0usize;
        let mut best = f64::NEG_INFINITY;
        for k in 0..config.k {
            let metric = if queue.q[k] == 0 {
                0.0
            } else {
                let r = (1.0 + reference_power * channel.gain[k][n]).log2();
                config.beta[k] * hol_delay[k] * r
            };
            if metric > best {
                winner = k;
                best = metric;
            }
        }
        action.assigned[winner][n] = true;
        if queue.q[winner] > 0 {
            action.power[winner][n] = waterfill_power(channel.gain[winner][n], level);
        }
    }
    action
}

/// Round Robin: user `slot mod K` owns every subband this slot and
/// water-fills them at the flat level `1 / gamma`; an empty queue transmits
/// nothing.
pub fn round_robin_allocate(
    slot: u64,
    channel: &ChannelState,
    queue: &QueueState,
    config: &SystemConfig,
) -> Action {
    let user = (slot % config.k as u64) as usize;
    let level = 1.0 / config.gamma;
    let mut action = Action {
        power: vec![vec![0.0; config.n_f]; config.k],
        assigned: vec![vec![false; config.n_f]; config.k],
    };
    for n in 0..config.n_f {
        action.assigned[user][n] = true;
        if queue.q[user] > 0 {
            action.power[user][n] = waterfill_power(channel.gain[user][n], level);
        }
    }
    action
}

#[cfg(test)]
mod tests {
    use super::*;

    fn config(k: usize, n_f: usize) -> SystemConfig {
        SystemConfig {
            k,
            n_f,
            n_q: 10,
            tau: 0.005,
            lambda: vec![20.0; k],
            mean_packet_bits: vec![1000.0; k],
            beta: vec![1.0; k],
            p_0: 4.0,
            gamma: 1.0,
            subband_bandwidth: 1.0,
            rng_seed: 0,
            csi_levels: 2,
        }
    }

    fn backlogged(k: usize, packets: &[u32]) -> QueueState {
        QueueState {
            q: packets.to_vec(),
            hol_residual_bits: packets.iter().map(|&q| if q > 0 { 10.0 } else { 0.0 }).collect(),
        }
    }

    #[test]
    fn mlwdf_idles_on_empty_queues() {
        let cfg = config(2, 3);
        let ch = ChannelState {
            gain: vec![vec![1.0; 3], vec![2.0; 3]],
        };
        let act = mlwdf_allocate(&ch, &QueueState::empty(2), &[0.0, 0.0], &cfg);
        act.check_invariants();
        assert_eq!(act.total_power(), 0.0);
    }

    #[test]
    fn mlwdf_single_backlogged_user_wins_everything() {
        let cfg = config(2, 3);
        let ch = ChannelState {
            gain: vec![vec![0.1; 3], vec![5.0; 3]],
        };
        let queue = backlogged(2, &[3, 0]);
        let act = mlwdf_allocate(&ch, &queue, &[0.5, 0.0], &cfg);
        act.check_invariants();
        for n in 0..3 {
            assert!(act.assigned[0][n]);
        }
    }

    #[test]
    fn mlwdf_prefers_stronger_channel_at_equal_delay() {
        let cfg = config(2, 1);
        let ch = ChannelState {
            gain: vec![vec![4.0], vec![1.0]],
        };
        let queue = backlogged(2, &[1, 1]);
        let act = mlwdf_allocate(&ch, &queue, &[0.2, 0.2], &cfg);
        assert!(act.assigned[0][0]);
    }

    #[test]
    fn round_robin_alternates_users() {
        let cfg = config(2, 2);
        let ch = ChannelState {
            gain: vec![vec![1.0; 2]; 2],
        };
        let queue = backlogged(2, &[1, 1]);
        for t in 0..6u64 {
            let act = round_robin_allocate(t, &ch, &queue, &cfg);
            act.check_invariants();
            let expected = (t % 2) as usize;
            assert!(act.assigned[expected].iter().all(|&s| s));
        }
    }

    #[test]
    fn round_robin_waterfills_hand_value() {
        let mut cfg = config(1, 2);
        cfg.gamma = 1.0 / 1.5; // flat level 1.5
        let ch = ChannelState {
            gain: vec![vec![1.0, 4.0]],
        };
        let queue = backlogged(1, &[2]);
        let act = round_robin_allocate(0, &ch, &queue, &cfg);
        assert!((act.power[0][0] - 0.5).abs() < 1e-12);
        assert!((act.power[0][1] - 1.25).abs() < 1e-12);
    }

    #[test]
    fn round_robin_empty_user_transmits_nothing() {
        let cfg = config(2, 2);
        let ch = ChannelState {
            gain: vec![vec![1.0; 2]; 2],
        };
        let queue = backlogged(2, &[0, 5]);
        let act = round_robin_allocate(0, &ch, &queue, &cfg); // user 0's turn, empty
        act.check_invariants();
        assert_eq!(act.total_power(), 0.0);
    }
}
