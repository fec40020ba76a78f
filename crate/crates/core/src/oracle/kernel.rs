//! The reduced birth-death transition kernel over joint queue states.

use rand::Rng;

use crate::config::SystemConfig;
use crate::error::OracleError;
use crate::model::QueueState;
use crate::policy::{scaled_increments, BestGainRule, SurplusRule};
use crate::potential::PotentialTable;
use crate::state::StateSpace;

use super::alphabet::CsiAlphabet;
use super::stats::{subband_stats, ConditionalStats};

/// Conditional stats supplied directly per joint state, bypassing the CSI
/// expectation. Used for fixed (potential-independent) policies.
#[derive(Debug, Clone, PartialEq)]
pub struct FixedStats {
    /// Expected per-stage reward per joint state.
    pub g_bar: Vec<f64>,
    /// Expected packet service rate per joint state per user, packets/second.
    pub mu_bar: Vec<Vec<f64>>,
}

/// The conditional action rule a solver evaluates states under.
#[derive(Debug, Clone)]
pub enum KernelPolicy<'a> {
    /// Surplus-maximizing assignment with water levels from a potential table.
    Optimal { table: &'a PotentialTable },
    /// Best-gain assignment with water levels from a potential table.
    CsiOnly { table: &'a PotentialTable },
    /// Caller-supplied conditional stats.
    Fixed(&'a FixedStats),
}

/// Evaluates one joint state's conditional stats under a policy.
pub fn state_stats(
    policy: &KernelPolicy,
    space: &StateSpace,
    state_index: usize,
    alphabet: &CsiAlphabet,
    config: &SystemConfig,
) -> Result<ConditionalStats, OracleError> {
    if let KernelPolicy::Fixed(f) = policy {
        return Ok(ConditionalStats {
            g_bar: f.g_bar[state_index],
            mu_bar: f.mu_bar[state_index].clone(),
            expected_power: 0.0,
        });
    }
    let q = space.queue_of(state_index);
    let queue = QueueState {
        hol_residual_bits: q.iter().map(|&x| if x > 0 { 1.0 } else { 0.0 }).collect(),
        q,
    };
    let per_subband = match policy {
        KernelPolicy::Optimal { table } => {
            let rule = SurplusRule {
                deltas: scaled_increments(config, table, &queue),
                gamma: config.gamma,
            };
            subband_stats(&rule, alphabet, config.k)?
        }
        KernelPolicy::CsiOnly { table } => {
            let rule = BestGainRule {
                deltas: scaled_increments(config, table, &queue),
                gamma: config.gamma,
            };
            subband_stats(&rule, alphabet, config.k)?
        }
        KernelPolicy::Fixed(_) => unreachable!(),
    };
    let n_f = config.n_f as f64;
    let expected_power = n_f * per_subband.expected_power;
    let backlog: f64 = (0..config.k)
        .map(|k| config.beta[k] * queue.q[k] as f64 / config.lambda[k])
        .sum();
    Ok(ConditionalStats {
        g_bar: backlog + config.gamma * expected_power,
        mu_bar: (0..config.k)
            .map(|k| {
                n_f * config.subband_bandwidth * per_subband.expected_log2[k]
                    / config.mean_packet_bits[k]
            })
            .collect(),
        expected_power,
    })
}

/// Slot-level transition kernel restricted to one-packet moves: per state and
/// user, a birth mass `lambda_k tau` (folded into the self-loop at the buffer
/// cap), a death mass `mu_bar_k tau` (zero from an empty queue), and the
/// self-loop remainder.
#[derive(Debug, Clone)]
pub struct ReducedKernel {
    pub space: StateSpace,
    /// Effective birth mass per (state, user); zero at the cap.
    pub birth: Vec<Vec<f64>>,
    /// Effective death mass per (state, user); zero from empty.
    pub death: Vec<Vec<f64>>,
    pub self_loop: Vec<f64>,
    /// Conditional per-stage reward per state, for chain simulation.
    pub g_bar: Vec<f64>,
}

impl ReducedKernel {
    /// Transition row as (target state, probability) pairs, self-loop last.
    pub fn row(&self, state: usize) -> Vec<(usize, f64)> {
        let mut out = Vec::new();
        let q = self.space.queue_of(state);
        for k in 0..self.space.k {
            if self.birth[state][k] > 0.0 {
                out.push((self.space.birth(state, k), self.birth[state][k]));
            }
            let _ = q;
            if self.death[state][k] > 0.0 {
                out.push((self.space.death(state, k), self.death[state][k]));
            }
        }
        out.push((state, self.self_loop[state]));
        out
    }
}

/// Checks the small-slot regime and splits the masses for one state.
/// Returns (birth, death, self_loop) with cap/empty folding applied.
pub fn split_masses(
    config: &SystemConfig,
    q: &[u32],
    mu_bar: &[f64],
    state_index: usize,
) -> Result<(Vec<f64>, Vec<f64>, f64), OracleError> {
    let mut raw_total = 0.0;
    let mut birth = vec![0.0; config.k];
    let mut death = vec![0.0; config.k];
    for k in 0..config.k {
        let b = config.lambda[k] * config.tau;
        let d = mu_bar[k] * config.tau;
        raw_total += b + d;
        if (q[k] as usize) < config.n_q {
            birth[k] = b;
        }
        if q[k] > 0 {
            death[k] = d;
        }
    }
    if raw_total > 1.0 + 1e-12 {
        return Err(OracleError::InvalidRegime {
            state_index,
            mass: raw_total,
        });
    }
    let off_diagonal: f64 = birth.iter().sum::<f64>() + death.iter().sum::<f64>();
    Ok((birth, death, 1.0 - off_diagonal))
}

/// Builds the kernel for every joint state under the given policy.
pub fn build_kernel(
    policy: &KernelPolicy,
    alphabet: &CsiAlphabet,
    config: &SystemConfig,
) -> Result<ReducedKernel, OracleError> {
    let space = StateSpace::new(config.k, config.n_q);
    let states = space.len();
    let mut birth = Vec::with_capacity(states);
    let mut death = Vec::with_capacity(states);
    let mut self_loop = Vec::with_capacity(states);
    let mut g_bar = Vec::with_capacity(states);
    for idx in 0..states {
        let stats = state_stats(policy, &space, idx, alphabet, config)?;
        let q = space.queue_of(idx);
        let (b, d, s) = split_masses(config, &q, &stats.mu_bar, idx)?;
        birth.push(b);
        death.push(d);
        self_loop.push(s);
        g_bar.push(stats.g_bar);
    }
    Ok(ReducedKernel {
        space,
        birth,
        death,
        self_loop,
        g_bar,
    })
}

/// Simulates the kernel's Markov chain and returns the time-average reward.
/// Used to cross-check solver output against a long-run sample path.
pub fn simulate_kernel_chain<R: Rng>(kernel: &ReducedKernel, slots: u64, rng: &mut R) -> f64 {
    let mut state = StateSpace::REFERENCE;
    let mut total = 0.0;
    for _ in 0..slots {
        total += kernel.g_bar[state];
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut next = state;
        for (target, p) in kernel.row(state) {
            acc += p;
            if u < acc {
                next = target;
                break;
            }
        }
        state = next;
    }
    total / slots as f64
}
