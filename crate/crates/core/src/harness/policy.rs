//! Frozen scheduling policies the harness can replicate and compare.

use std::fmt;
use std::str::FromStr;

use crate::baselines::{mlwdf_allocate, round_robin_allocate};
use crate::config::SystemConfig;
use crate::model::{Action, ChannelState, QueueState};
use crate::policy::{allocate_csi_only, allocate_optimal};
use crate::potential::{PerUserTable, PotentialTable};

/// Policy family, before any tables are attached.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum PolicyKind {
    /// Surplus-rule allocator on a joint potential table.
    Joint,
    /// Best-gain allocator on per-user potential tables.
    Decomposed,
    Mlwdf,
    RoundRobin,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 4] = [
        PolicyKind::Joint,
        PolicyKind::Decomposed,
        PolicyKind::Mlwdf,
        PolicyKind::RoundRobin,
    ];

    pub fn name(&self) -> &'static str {
        match self {
            PolicyKind::Joint => "joint",
            PolicyKind::Decomposed => "decomposed",
            PolicyKind::Mlwdf => "mlwdf",
            PolicyKind::RoundRobin => "round_robin",
        }
    }

    /// Whether the policy carries solved potential tables (and therefore
    /// needs a re-solve whenever gamma moves).
    pub fn needs_tables(&self) -> bool {
        matches!(self, PolicyKind::Joint | PolicyKind::Decomposed)
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "joint" => Ok(PolicyKind::Joint),
            "decomposed" => Ok(PolicyKind::Decomposed),
            "mlwdf" => Ok(PolicyKind::Mlwdf),
            "round_robin" => Ok(PolicyKind::RoundRobin),
            other => Err(format!(
                "unknown policy '{other}' (expected joint, decomposed, mlwdf, or round_robin)"
            )),
        }
    }
}

/// A fully specified stationary policy.
#[derive(Debug, Clone)]
pub enum Policy {
    Joint { table: PotentialTable },
    Decomposed { table: PerUserTable },
    Mlwdf,
    RoundRobin,
    /// Serves user k at a fixed rate whenever backlogged (test support):
    /// subband k carries the power that realizes exactly `rates[k]`.
    FixedRate { rates: Vec<f64> },
}

impl Policy {
    pub fn kind_name(&self) -> &'static str {
        match self {
            Policy::Joint { .. } => "joint",
            Policy::Decomposed { .. } => "decomposed",
            Policy::Mlwdf => "mlwdf",
            Policy::RoundRobin => "round_robin",
            Policy::FixedRate { .. } => "fixed_rate",
        }
    }

    /// Chooses this slot's action.
    pub fn decide(
        &self,
        slot: u64,
        channel: &ChannelState,
        queue: &QueueState,
        hol_delay: &[f64],
        config: &SystemConfig,
    ) -> Action {
        match self {
            Policy::Joint { table } => allocate_optimal(channel, queue, table, config),
            Policy::Decomposed { table } => {
                let table = PotentialTable::PerUser(table.clone());
                allocate_csi_only(channel, queue, &table, config)
            }
            Policy::Mlwdf => mlwdf_allocate(channel, queue, hol_delay, config),
            Policy::RoundRobin => round_robin_allocate(slot, channel, queue, config),
            Policy::FixedRate { rates } => {
                assert!(
                    config.n_f >= config.k,
                    "fixed-rate policy needs one subband per user"
                );
                let mut action = Action::idle(config.k, config.n_f);
                for n in 0..config.n_f {
                    for row in action.assigned.iter_mut() {
                        row[n] = false;
                    }
                }
                for k in 0..config.k {
                    action.assigned[k][k] = true;
                    if queue.q[k] > 0 && rates[k] > 0.0 {
                        let g = channel.gain[k][k];
                        if g > 0.0 {
                            let snr = (rates[k] / config.subband_bandwidth).exp2() - 1.0;
                            action.power[k][k] = snr / g;
                        }
                    }
                }
                // Park the leftover subbands on user 0.
                for n in config.k..config.n_f {
                    action.assigned[0][n] = true;
                }
                action
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::instantaneous_rate;

    #[test]
    fn policy_names_round_trip() {
        for kind in PolicyKind::ALL {
            assert_eq!(kind.name().parse::<PolicyKind>().unwrap(), kind);
        }
        assert!("bogus".parse::<PolicyKind>().is_err());
    }

    #[test]
    fn fixed_rate_policy_realizes_its_rate() {
        let cfg = SystemConfig {
            k: 2,
            n_f: 3,
            n_q: 5,
            tau: 0.005,
            lambda: vec![20.0; 2],
            mean_packet_bits: vec![1000.0; 2],
            beta: vec![1.0; 2],
            p_0: 4.0,
            gamma: 1.0,
            subband_bandwidth: 1000.0,
            rng_seed: 0,
            csi_levels: 2,
        };
        let policy = Policy::FixedRate {
            rates: vec![800.0, 2500.0],
        };
        let channel = ChannelState {
            gain: vec![vec![0.7, 2.0, 1.0], vec![1.9, 0.4, 1.0]],
        };
        let queue = QueueState {
            q: vec![1, 3],
            hol_residual_bits: vec![10.0, 10.0],
        };
        let action = policy.decide(0, &channel, &queue, &[0.0, 0.0], &cfg);
        action.check_invariants();
        for k in 0..2 {
            let r = instantaneous_rate(&cfg, &channel, &action, k);
            let want = [800.0, 2500.0][k];
            assert!((r - want).abs() < 1e-9, "user {k}: rate {r}, want {want}");
        }
    }
}
