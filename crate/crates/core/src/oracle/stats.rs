//! Conditional per-stage reward and service rates over the CSI alphabet.
//!
//! Three exact routes, from general to specialized:
//!   * [`conditional_stats`] enumerates the full product measure over all
//!     `K * N_F` symbols for an arbitrary action rule;
//!   * [`subband_stats`] enumerates one subband's `m^K` gain columns for a
//!     per-subband rule and scales by `N_F` (subbands are i.i.d. and treated
//!     identically by every rule here);
//!   * [`winner_marginal_stats`] evaluates the best-gain winner distribution
//!     for one user in closed form, O(m) per user, which is what makes the
//!     per-user solvers linear in K.
//! The first route is the reference; the other two must agree with it on
//! small instances (see tests).

use rand::Rng;

use crate::config::SystemConfig;
use crate::error::OracleError;
use crate::model::{instantaneous_rate, Action, ChannelState, QueueState};
use crate::policy::SubbandRule;

use super::alphabet::CsiAlphabet;

/// Hard cap on exact enumeration size.
pub const ENUMERATION_CAP: u128 = 1_000_000;

/// Conditional expectations at one queue state.
#[derive(Debug, Clone, PartialEq)]
pub struct ConditionalStats {
    /// Expected per-stage reward `E[g | Q]`.
    pub g_bar: f64,
    /// Expected packet service rate `E[R_k | Q] / mean_packet_bits_k`,
    /// packets/second, per user.
    pub mu_bar: Vec<f64>,
    /// Expected total transmit power `E[sum p | Q]`.
    pub expected_power: f64,
}

fn backlog_reward(queue: &QueueState, config: &SystemConfig) -> f64 {
    (0..config.k)
        .map(|k| config.beta[k] * queue.q[k] as f64 / config.lambda[k])
        .sum()
}

/// Exact expectation over the full `m^(K*N_F)` CSI product measure for an
/// arbitrary action rule. Errors out above [`ENUMERATION_CAP`] terms; use
/// [`conditional_stats_mc`] then.
pub fn conditional_stats<F>(
    queue: &QueueState,
    action_rule: F,
    alphabet: &CsiAlphabet,
    config: &SystemConfig,
) -> Result<ConditionalStats, OracleError>
where
    F: Fn(&ChannelState, &QueueState) -> Action,
{
    let m = alphabet.len();
    let symbols = config.k * config.n_f;
    let terms = (m as u128).checked_pow(symbols as u32).unwrap_or(u128::MAX);
    if terms > ENUMERATION_CAP {
        return Err(OracleError::EnumerationTooLarge {
            terms,
            cap: ENUMERATION_CAP,
        });
    }

    let mut digits = vec![0usize; symbols];
    let mut channel = ChannelState {
        gain: vec![vec![0.0; config.n_f]; config.k],
    };
    let mut expected_power = 0.0;
    let mut expected_rate = vec![0.0; config.k];
    for _ in 0..terms {
        let mut prob = 1.0;
        for (s, &d) in digits.iter().enumerate() {
            channel.gain[s / config.n_f][s % config.n_f] = alphabet.levels[d];
            prob *= alphabet.probs[d];
        }
        let action = action_rule(&channel, queue);
        expected_power += prob * action.total_power();
        for k in 0..config.k {
            expected_rate[k] += prob * instantaneous_rate(config, &channel, &action, k);
        }
        // Increment the mixed-radix counter.
        for d in digits.iter_mut() {
            *d += 1;
            if *d < m {
                break;
            }
            *d = 0;
        }
    }

    Ok(ConditionalStats {
        g_bar: backlog_reward(queue, config) + config.gamma * expected_power,
        mu_bar: expected_rate
            .iter()
            .zip(&config.mean_packet_bits)
            .map(|(r, n)| r / n)
            .collect(),
        expected_power,
    })
}

/// Monte Carlo estimate of the same expectations, with standard errors.
#[derive(Debug, Clone)]
pub struct McConditionalStats {
    pub stats: ConditionalStats,
    pub g_bar_stderr: f64,
    pub mu_bar_stderr: Vec<f64>,
    pub samples: usize,
}

/// Samples CSI matrices from the alphabet's product measure. The explicit
/// sample count is the caller's opt-in for instances too large to enumerate.
pub fn conditional_stats_mc<F, R>(
    queue: &QueueState,
    action_rule: F,
    alphabet: &CsiAlphabet,
    config: &SystemConfig,
    samples: usize,
    rng: &mut R,
) -> McConditionalStats
where
    F: Fn(&ChannelState, &QueueState) -> Action,
    R: Rng,
{
    assert!(samples >= 2, "need at least two samples for a standard error");
    let mut channel = ChannelState {
        gain: vec![vec![0.0; config.n_f]; config.k],
    };
    let mut power_sum = 0.0;
    let mut power_sq = 0.0;
    let mut rate_sum = vec![0.0; config.k];
    let mut rate_sq = vec![0.0; config.k];
    for _ in 0..samples {
        for k in 0..config.k {
            for n in 0..config.n_f {
                let u: f64 = rng.gen();
                let mut j = 0;
                let mut acc = alphabet.probs[0];
                while u > acc && j + 1 < alphabet.len() {
                    j += 1;
                    acc += alphabet.probs[j];
                }
                channel.gain[k][n] = alphabet.levels[j];
            }
        }
        let action = action_rule(&channel, queue);
        let p = action.total_power();
        power_sum += p;
        power_sq += p * p;
        for k in 0..config.k {
            let r = instantaneous_rate(config, &channel, &action, k);
            rate_sum[k] += r;
            rate_sq[k] += r * r;
        }
    }
    let n = samples as f64;
    let mean_power = power_sum / n;
    let var_power = ((power_sq / n) - mean_power * mean_power).max(0.0) / (n - 1.0);
    let mut mu_bar = Vec::with_capacity(config.k);
    let mut mu_stderr = Vec::with_capacity(config.k);
    for k in 0..config.k {
        let mean_r = rate_sum[k] / n;
        let var_r = ((rate_sq[k] / n) - mean_r * mean_r).max(0.0) / (n - 1.0);
        mu_bar.push(mean_r / config.mean_packet_bits[k]);
        mu_stderr.push(var_r.sqrt() / config.mean_packet_bits[k]);
    }
    McConditionalStats {
        stats: ConditionalStats {
            g_bar: backlog_reward(queue, config) + config.gamma * mean_power,
            mu_bar,
            expected_power: mean_power,
        },
        g_bar_stderr: config.gamma * var_power.sqrt(),
        mu_bar_stderr: mu_stderr,
        samples,
    }
}

/// Per-subband expectations for a per-subband rule: expected power and, per
/// user, the expected `log2(1 + p * gain)` surplus on one subband.
#[derive(Debug, Clone, PartialEq)]
pub struct SubbandStats {
    pub expected_power: f64,
    pub expected_log2: Vec<f64>,
}

/// Enumerates one subband's `m^K` gain columns. Errors out above
/// [`ENUMERATION_CAP`] terms.
pub fn subband_stats(
    rule: &impl SubbandRule,
    alphabet: &CsiAlphabet,
    users: usize,
) -> Result<SubbandStats, OracleError> {
    let m = alphabet.len();
    let terms = (m as u128).checked_pow(users as u32).unwrap_or(u128::MAX);
    if terms > ENUMERATION_CAP {
        return Err(OracleError::EnumerationTooLarge {
            terms,
            cap: ENUMERATION_CAP,
        });
    }
    let mut digits = vec![0usize; users];
    let mut gains = vec![0.0; users];
    let mut expected_power = 0.0;
    let mut expected_log2 = vec![0.0; users];
    for _ in 0..terms {
        let mut prob = 1.0;
        for (k, &d) in digits.iter().enumerate() {
            gains[k] = alphabet.levels[d];
            prob *= alphabet.probs[d];
        }
        let (winner, power) = rule.decide(&gains);
        expected_power += prob * power;
        if power > 0.0 {
            expected_log2[winner] += prob * (1.0 + power * gains[winner]).log2();
        }
        for d in digits.iter_mut() {
            *d += 1;
            if *d < m {
                break;
            }
            *d = 0;
        }
    }
    Ok(SubbandStats {
        expected_power,
        expected_log2,
    })
}

/// Probability that user `k` (0-based) wins a subband with gain level `j`
/// under the best-gain rule with lowest-index tie-breaking: all earlier users
/// must be strictly below level `j`, all later users at or below it.
pub fn best_gain_win_prob(alphabet: &CsiAlphabet, users: usize, k: usize, j: usize) -> f64 {
    let below = alphabet.cdf_below(j);
    let through = alphabet.cdf_through(j);
    alphabet.probs[j] * below.powi(k as i32) * through.powi((users - 1 - k) as i32)
}

/// One user's per-subband expectations under the best-gain rule with water
/// level `level`: `(expected power, expected log2 rate term)`. O(m).
pub fn winner_marginal_stats(
    alphabet: &CsiAlphabet,
    users: usize,
    k: usize,
    level: f64,
) -> (f64, f64) {
    let mut power = 0.0;
    let mut log2_term = 0.0;
    for j in 0..alphabet.len() {
        let w = best_gain_win_prob(alphabet, users, k, j);
        if w == 0.0 {
            continue;
        }
        let v = alphabet.levels[j];
        let p = crate::policy::waterfill_power(v, level);
        if p > 0.0 {
            power += w * p;
            log2_term += w * (1.0 + p * v).log2();
        }
    }
    (power, log2_term)
}
