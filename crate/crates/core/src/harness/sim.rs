//! The slot-level physical simulation owned by one replication or learner.

use std::collections::VecDeque;

use rand_chacha::ChaCha8Rng;

use crate::config::SystemConfig;
use crate::model::{
    instantaneous_rate, per_stage_reward, queue_step, sample_arrivals, sample_csi, Action,
    ChannelState, QueueState, SlotOutcome,
};
use crate::rng::{stream, StreamKind};

/// One simulated downlink: queues, random streams, per-packet timestamps, and
/// cumulative counters. The slot loop is: draw the channel, let the policy
/// decide an action, then [`step`](SlotSim::step).
pub struct SlotSim {
    pub config: SystemConfig,
    fading_rngs: Vec<ChaCha8Rng>,
    arrival_rngs: Vec<ChaCha8Rng>,
    packet_rngs: Vec<ChaCha8Rng>,
    pub queue: QueueState,
    /// Arrival slot of every admitted packet still queued, per user (FIFO).
    arrival_slots: Vec<VecDeque<u64>>,
    /// Current slot index (number of completed slots).
    pub slot: u64,
    /// Rolling checksum over the consumed fading and arrival draws.
    checksum: u64,
    /// Cumulative waiting slots of departed packets, per user.
    pub sojourn_slots: Vec<f64>,
    /// Cumulative departed packet count, per user.
    pub sojourn_count: Vec<u64>,
}

/// The per-slot results the caller needs.
pub struct SlotStep {
    /// Per-stage reward at the pre-action queue state.
    pub reward: f64,
    pub outcome: SlotOutcome,
}

fn fold(checksum: &mut u64, bits: u64) {
    *checksum = checksum
        .rotate_left(7)
        .wrapping_mul(0x100000001b3)
        .wrapping_add(bits ^ 0xcbf29ce484222325);
}

impl SlotSim {
    pub fn new(config: &SystemConfig, seed: u64) -> Self {
        let k = config.k;
        Self {
            config: config.clone(),
            fading_rngs: (0..k).map(|u| stream(seed, u, StreamKind::Fading)).collect(),
            arrival_rngs: (0..k).map(|u| stream(seed, u, StreamKind::Arrival)).collect(),
            packet_rngs: (0..k)
                .map(|u| stream(seed, u, StreamKind::PacketSize))
                .collect(),
            queue: QueueState::empty(k),
            arrival_slots: vec![VecDeque::new(); k],
            slot: 0,
            checksum: 0,
            sojourn_slots: vec![0.0; k],
            sojourn_count: vec![0; k],
        }
    }

    /// Draws this slot's channel gains.
    pub fn draw_channel(&mut self) -> ChannelState {
        let ch = sample_csi(&self.config, &mut self.fading_rngs);
        for row in &ch.gain {
            for &g in row {
                fold(&mut self.checksum, g.to_bits());
            }
        }
        ch
    }

    /// Seconds the head-of-line packet of each user has waited so far.
    pub fn hol_delays(&self) -> Vec<f64> {
        (0..self.config.k)
            .map(|k| match self.arrival_slots[k].front() {
                Some(&t) => (self.slot.saturating_sub(t)) as f64 * self.config.tau,
                None => 0.0,
            })
            .collect()
    }

    /// Applies the action: service, then arrivals, then bookkeeping.
    /// Asserts the action and queue invariants every slot.
    pub fn step(&mut self, channel: &ChannelState, action: &Action) -> SlotStep {
        action.check_invariants();
        let reward = per_stage_reward(&self.queue, action, &self.config);
        let rates: Vec<f64> = (0..self.config.k)
            .map(|k| instantaneous_rate(&self.config, channel, action, k))
            .collect();
        let arrivals = sample_arrivals(&self.config, &mut self.arrival_rngs);
        for &a in &arrivals {
            fold(&mut self.checksum, a as u64);
        }
        let (next, mut outcome) = queue_step(
            &self.queue,
            &rates,
            &arrivals,
            &self.config,
            &mut self.packet_rngs,
        );
        outcome.power_spent = action.total_power();

        for k in 0..self.config.k {
            for _ in 0..outcome.served_packets[k] {
                let arrived = self.arrival_slots[k]
                    .pop_front()
                    .expect("served a packet with no recorded arrival");
                self.sojourn_slots[k] += (self.slot - arrived) as f64;
                self.sojourn_count[k] += 1;
            }
            let admitted = outcome.arrivals[k] - outcome.dropped[k];
            for _ in 0..admitted {
                self.arrival_slots[k].push_back(self.slot);
            }
            debug_assert_eq!(self.arrival_slots[k].len(), next.q[k] as usize);
        }

        self.queue = next;
        self.slot += 1;
        SlotStep { reward, outcome }
    }

    pub fn checksum(&self) -> u64 {
        self.checksum
    }
}
