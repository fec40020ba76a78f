//! Replication metrics: time-average backlog, both delay readings, power,
//! and drop rates.

use crate::config::SystemConfig;

/// Measurement-window statistics of one replication.
#[derive(Debug, Clone, PartialEq)]
pub struct Metrics {
    /// Measured slots (warmup excluded).
    pub slots: u64,
    /// Time-average packets in queue, per user.
    pub avg_queue: Vec<f64>,
    /// Little's-law delay `avg_queue / lambda_eff` in seconds, per user,
    /// where `lambda_eff` counts only admitted packets.
    pub avg_delay_littles: Vec<f64>,
    /// Mean measured per-packet sojourn in seconds, per user.
    pub avg_delay_sojourn: Vec<f64>,
    /// `sum_k beta_k * avg_delay_littles_k`.
    pub weighted_delay: f64,
    /// Time-average total transmit power.
    pub avg_power: f64,
    /// Dropped / offered, per user.
    pub drop_rate: Vec<f64>,
    /// Time-average per-stage reward (weighted backlog plus priced power).
    pub avg_stage_reward: f64,
    /// Checksum over the consumed fading and arrival streams; equal across
    /// policies under the same seed.
    pub stream_checksum: u64,
    /// Soft diagnostics (e.g. sustained near-full buffers).
    pub warnings: Vec<String>,
}

impl Metrics {
    /// Recomputes the weighted delay from its per-user components.
    pub fn recompute_weighted_delay(&self, config: &SystemConfig) -> f64 {
        self.avg_delay_littles
            .iter()
            .zip(&config.beta)
            .map(|(d, b)| b * d)
            .sum()
    }
}

/// Accumulates raw sums over the measurement window.
#[derive(Debug, Clone)]
pub(crate) struct MetricsAccumulator {
    slots: u64,
    queue_sum: Vec<f64>,
    power_sum: f64,
    reward_sum: f64,
    offered: Vec<u64>,
    dropped: Vec<u64>,
    near_full_slots: Vec<u64>,
}

impl MetricsAccumulator {
    pub fn new(k: usize) -> Self {
        Self {
            slots: 0,
            queue_sum: vec![0.0; k],
            power_sum: 0.0,
            reward_sum: 0.0,
            offered: vec![0; k],
            dropped: vec![0; k],
            near_full_slots: vec![0; k],
        }
    }

    pub fn record(
        &mut self,
        config: &SystemConfig,
        queue_before: &[u32],
        reward: f64,
        power: f64,
        arrivals: &[u32],
        dropped: &[u32],
    ) {
        self.slots += 1;
        self.power_sum += power;
        self.reward_sum += reward;
        let near_full = 0.9 * config.n_q as f64;
        for k in 0..queue_before.len() {
            self.queue_sum[k] += queue_before[k] as f64;
            self.offered[k] += arrivals[k] as u64;
            self.dropped[k] += dropped[k] as u64;
            if queue_before[k] as f64 > near_full {
                self.near_full_slots[k] += 1;
            }
        }
    }

    /// Finalizes the window. Sojourn sums are passed as (slots, count) deltas
    /// over the window, per user.
    pub fn finish(
        self,
        config: &SystemConfig,
        sojourn_slots: &[f64],
        sojourn_count: &[u64],
        checksum: u64,
    ) -> Metrics {
        let slots = self.slots.max(1) as f64;
        let k = config.k;
        let avg_queue: Vec<f64> = self.queue_sum.iter().map(|s| s / slots).collect();
        let mut avg_delay_littles = vec![0.0; k];
        let mut drop_rate = vec![0.0; k];
        let mut warnings = Vec::new();
        for u in 0..k {
            let admitted = self.offered[u] - self.dropped[u];
            if admitted > 0 {
                let lambda_eff = admitted as f64 / (slots * config.tau);
                avg_delay_littles[u] = avg_queue[u] / lambda_eff;
            }
            if self.offered[u] > 0 {
                drop_rate[u] = self.dropped[u] as f64 / self.offered[u] as f64;
            }
            if self.near_full_slots[u] * 2 > self.slots {
                warnings.push(format!(
                    "user {u}: queue above 0.9*N_Q for {:.0}% of measured slots; likely unstable",
                    100.0 * self.near_full_slots[u] as f64 / slots
                ));
            }
        }
        let avg_delay_sojourn: Vec<f64> = (0..k)
            .map(|u| {
                if sojourn_count[u] == 0 {
                    0.0
                } else {
                    sojourn_slots[u] / sojourn_count[u] as f64 * config.tau
                }
            })
            .collect();
        let weighted_delay = avg_delay_littles
            .iter()
            .zip(&config.beta)
            .map(|(d, b)| b * d)
            .sum();
        Metrics {
            slots: self.slots,
            avg_queue,
            avg_delay_littles,
            avg_delay_sojourn,
            weighted_delay,
            avg_power: self.power_sum / slots,
            drop_rate,
            avg_stage_reward: self.reward_sum / slots,
            stream_checksum: checksum,
            warnings,
        }
    }
}
