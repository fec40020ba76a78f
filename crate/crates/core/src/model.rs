//! State types, random processes, the physical-layer rate law, the slot-level
//! queue update, and the per-stage reward.

use rand::Rng;
use rand_distr::{Distribution, Exp1, Poisson};

use crate::config::SystemConfig;

/// Natural log of 2; converts between nats and bits.
pub const LN_2: f64 = std::f64::consts::LN_2;

/// Realized channel power gains |H|^2, one per (user, subband).
#[derive(Debug, Clone, PartialEq)]
pub struct ChannelState {
    /// gain[k][n] for user k on subband n.
    pub gain: Vec<Vec<f64>>,
}

impl ChannelState {
    pub fn users(&self) -> usize {
        self.gain.len()
    }
}

/// Per-user backlogs plus the unserved bits of each head-of-line packet.
#[derive(Debug, Clone, PartialEq)]
pub struct QueueState {
    /// Packets waiting per user, each in 0..=N_Q.
    pub q: Vec<u32>,
    /// Remaining bits of the head-of-line packet; 0 exactly when the queue is
    /// empty.
    pub hol_residual_bits: Vec<f64>,
}

impl QueueState {
    /// All queues empty.
    pub fn empty(k: usize) -> Self {
        Self {
            q: vec![0; k],
            hol_residual_bits: vec![0.0; k],
        }
    }

    pub fn check_invariants(&self, n_q: usize) {
        for k in 0..self.q.len() {
            assert!(
                (self.q[k] as usize) <= n_q,
                "queue {k} holds {} packets, above the cap {n_q}",
                self.q[k]
            );
            assert_eq!(
                self.q[k] > 0,
                self.hol_residual_bits[k] > 0.0,
                "queue {k}: HOL residual must be positive exactly when packets are queued"
            );
        }
    }
}

/// A power matrix and an exclusive subcarrier assignment.
#[derive(Debug, Clone, PartialEq)]
pub struct Action {
    /// p[k][n] >= 0.
    pub power: Vec<Vec<f64>>,
    /// s[k][n]; every subband is assigned to exactly one user.
    pub assigned: Vec<Vec<bool>>,
}

impl Action {
    /// All-zero power; every subband parked on user 0.
    pub fn idle(k: usize, n_f: usize) -> Self {
        let mut assigned = vec![vec![false; n_f]; k];
        for n in 0..n_f {
            assigned[0][n] = true;
        }
        Self {
            power: vec![vec![0.0; n_f]; k],
            assigned,
        }
    }

    pub fn total_power(&self) -> f64 {
        self.power.iter().flatten().sum()
    }

    /// Panics unless exactly one user owns each subband and power is
    /// nonnegative and only spent on owned subbands.
    pub fn check_invariants(&self) {
        let n_f = self.assigned[0].len();
        for n in 0..n_f {
            let owners = self.assigned.iter().filter(|row| row[n]).count();
            assert_eq!(owners, 1, "subband {n} must have exactly one owner, has {owners}");
        }
        for (k, row) in self.power.iter().enumerate() {
            for (n, &p) in row.iter().enumerate() {
                assert!(p >= 0.0, "negative power {p} for user {k} subband {n}");
                assert!(
                    p == 0.0 || self.assigned[k][n],
                    "user {k} spends power on unassigned subband {n}"
                );
            }
        }
    }
}

/// What happened in one slot.
#[derive(Debug, Clone, PartialEq)]
pub struct SlotOutcome {
    /// Packets that finished service, per user.
    pub served_packets: Vec<u32>,
    /// Packets that arrived (admitted + dropped), per user.
    pub arrivals: Vec<u32>,
    /// Arrivals lost to a full buffer, per user.
    pub dropped: Vec<u32>,
    /// Total transmit power spent this slot.
    pub power_spent: f64,
    /// Scheduled service rate per user, bits/second.
    pub rate: Vec<f64>,
}

/// Draws one slot's channel gains: i.i.d. unit-mean exponential per
/// (user, subband), one stream per user.
pub fn sample_csi<R: Rng>(config: &SystemConfig, rngs: &mut [R]) -> ChannelState {
    debug_assert_eq!(rngs.len(), config.k);
    let gain = rngs
        .iter_mut()
        .map(|rng| (0..config.n_f).map(|_| rng.sample::<f64, _>(Exp1)).collect())
        .collect();
    ChannelState { gain }
}

/// Draws one slot's packet arrivals: Poisson(lambda_k * tau) per user.
pub fn sample_arrivals<R: Rng>(config: &SystemConfig, rngs: &mut [R]) -> Vec<u32> {
    debug_assert_eq!(rngs.len(), config.k);
    config
        .lambda
        .iter()
        .zip(rngs.iter_mut())
        .map(|(&lambda, rng)| {
            let mean = lambda * config.tau;
            if mean <= 0.0 {
                0
            } else {
                Poisson::new(mean).expect("positive Poisson mean").sample(rng) as u32
            }
        })
        .collect()
}

/// Draws one packet size for user `k`: exponential with the user's mean size.
pub fn sample_packet_bits<R: Rng>(config: &SystemConfig, k: usize, rng: &mut R) -> f64 {
    let x: f64 = rng.sample(Exp1);
    // Exp1 can return exactly 0.0 in principle; keep packet sizes strictly positive.
    let x = x.max(f64::MIN_POSITIVE);
    x * config.mean_packet_bits[k]
}

/// Scheduled data rate of user `k` in bits/second:
/// `W_s * sum_n s[k][n] * log2(1 + p[k][n] * gain[k][n])`.
pub fn instantaneous_rate(
    config: &SystemConfig,
    channel: &ChannelState,
    action: &Action,
    k: usize,
) -> f64 {
    let mut sum = 0.0;
    for n in 0..config.n_f {
        if action.assigned[k][n] {
            sum += (1.0 + action.power[k][n] * channel.gain[k][n]).log2();
        }
    }
    config.subband_bandwidth * sum
}

/// Advances one queue by one slot: drains `rate * tau` bits from successive
/// head-of-line packets, then appends arrivals, dropping any overflow beyond
/// `N_Q`. Packet sizes are sampled lazily as packets reach the head of line.
fn step_one_queue<R: Rng>(
    config: &SystemConfig,
    k: usize,
    q: &mut u32,
    hol: &mut f64,
    rate: f64,
    arrivals: u32,
    rng: &mut R,
) -> (u32, u32) {
    let mut budget = rate * config.tau;
    let mut served = 0u32;
    while *q > 0 && budget >= *hol {
        budget -= *hol;
        *q -= 1;
        served += 1;
        *hol = if *q > 0 {
            sample_packet_bits(config, k, rng)
        } else {
            0.0
        };
    }
    if *q > 0 {
        *hol -= budget;
    }

    let room = config.n_q as u32 - *q;
    let admitted = arrivals.min(room);
    let dropped = arrivals - admitted;
    if *q == 0 && admitted > 0 {
        *hol = sample_packet_bits(config, k, rng);
    }
    *q += admitted;
    (served, dropped)
}

/// Advances all queues by one slot. Service happens first, then arrivals
/// (the scheduler acts before the slot's arrivals appear).
pub fn queue_step<R: Rng>(
    queue: &QueueState,
    rates: &[f64],
    arrivals: &[u32],
    config: &SystemConfig,
    packet_rngs: &mut [R],
) -> (QueueState, SlotOutcome) {
    let mut next = queue.clone();
    let mut served_packets = vec![0u32; config.k];
    let mut dropped = vec![0u32; config.k];
    for k in 0..config.k {
        let (served, drop) = step_one_queue(
            config,
            k,
            &mut next.q[k],
            &mut next.hol_residual_bits[k],
            rates[k],
            arrivals[k],
            &mut packet_rngs[k],
        );
        served_packets[k] = served;
        dropped[k] = drop;
    }
    next.check_invariants(config.n_q);
    let outcome = SlotOutcome {
        served_packets,
        arrivals: arrivals.to_vec(),
        dropped,
        power_spent: 0.0,
        rate: rates.to_vec(),
    };
    (next, outcome)
}

/// Per-stage reward: weighted backlog plus priced transmit power,
/// `sum_k beta_k * Q_k / lambda_k + gamma * sum_{k,n} p_{k,n}`.
pub fn per_stage_reward(queue: &QueueState, action: &Action, config: &SystemConfig) -> f64 {
    let backlog: f64 = (0..config.k)
        .map(|k| config.beta[k] * queue.q[k] as f64 / config.lambda[k])
        .sum();
    backlog + config.gamma * action.total_power()
}
