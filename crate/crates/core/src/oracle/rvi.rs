//! Relative value iteration on the reduced-state average-reward problem.

use crate::config::SystemConfig;
use crate::error::OracleError;
use crate::par;
use crate::policy::{rate_scale, BestGainRule, SurplusRule};
use crate::state::StateSpace;

use super::alphabet::CsiAlphabet;
use super::kernel::split_masses;
use super::stats::subband_stats;

/// Converged average reward and potentials, pinned to zero at the all-empty
/// reference state.
#[derive(Debug, Clone)]
pub struct SolveResult {
    /// Average reward per stage.
    pub theta: f64,
    /// Potential per joint state; `v_tilde[0] = 0`.
    pub v_tilde: Vec<f64>,
    pub iterations: usize,
    /// Final span of the Bellman residual.
    pub residual: f64,
    /// Residual span after each iteration, for convergence diagnostics.
    pub span_history: Vec<f64>,
}

/// Stopping parameters for the iteration.
#[derive(Debug, Clone, Copy)]
pub struct RviOptions {
    pub epsilon: f64,
    pub max_iters: usize,
    pub state_space_cap: usize,
}

impl Default for RviOptions {
    fn default() -> Self {
        Self {
            epsilon: 1e-8,
            max_iters: 200_000,
            state_space_cap: 4096,
        }
    }
}

/// How the per-state minimization in the Bellman operator is realized.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum RviRule {
    /// Greedy surplus rule against the current iterate (full optimization).
    Optimal,
    /// Best-gain assignment; only power adapts to the current iterate.
    CsiOnly,
}

/// Clamped, rate-scaled potential increments at a state, read off a flat
/// joint potential vector.
fn deltas_at(config: &SystemConfig, space: &StateSpace, v: &[f64], idx: usize) -> Vec<f64> {
    (0..config.k)
        .map(|k| ((v[idx] - v[space.death(idx, k)]) * rate_scale(config, k)).max(0.0))
        .collect()
}

fn iterate<F>(config: &SystemConfig, opts: &RviOptions, stats_for: F) -> Result<SolveResult, OracleError>
where
    F: Fn(usize, &[f64]) -> Result<(f64, Vec<f64>), OracleError> + Sync,
{
    let space = StateSpace::new(config.k, config.n_q);
    let states = space.len();
    if states > opts.state_space_cap {
        return Err(OracleError::StateSpaceTooLarge {
            states,
            cap: opts.state_space_cap,
        });
    }
    let mut v = vec![0.0; states];
    let mut span_history = Vec::new();
    let mut theta;
    for iter in 0..opts.max_iters {
        let backups = par::map_indices(states, |idx| -> Result<f64, OracleError> {
            let (g_bar, mu_bar) = stats_for(idx, &v)?;
            let q = space.queue_of(idx);
            let (birth, death, self_loop) = split_masses(config, &q, &mu_bar, idx)?;
            let mut t = g_bar + self_loop * v[idx];
            for k in 0..config.k {
                if birth[k] > 0.0 {
                    t += birth[k] * v[space.birth(idx, k)];
                }
                if death[k] > 0.0 {
                    t += death[k] * v[space.death(idx, k)];
                }
            }
            Ok(t)
        });
        let t: Vec<f64> = backups.into_iter().collect::<Result<_, _>>()?;
        let mut max_diff = f64::NEG_INFINITY;
        let mut min_diff = f64::INFINITY;
        for i in 0..states {
            let d = t[i] - v[i];
            max_diff = max_diff.max(d);
            min_diff = min_diff.min(d);
        }
        let span = max_diff - min_diff;
        span_history.push(span);
        theta = t[StateSpace::REFERENCE] - v[StateSpace::REFERENCE];
        for i in 0..states {
            v[i] = t[i] - theta;
        }
        debug_assert!(v[StateSpace::REFERENCE].abs() < 1e-9);
        if span < opts.epsilon {
            return Ok(SolveResult {
                theta,
                v_tilde: v,
                iterations: iter + 1,
                residual: span,
                span_history,
            });
        }
    }
    Err(OracleError::NonConvergence {
        iterations: opts.max_iters,
        residual: *span_history.last().unwrap_or(&f64::INFINITY),
    })
}

/// Solves the reduced-state problem with the per-CSI-symbol closed-form rule
/// (either the full surplus rule or the best-gain rule) realizing the inner
/// minimization.
pub fn relative_value_iteration(
    config: &SystemConfig,
    alphabet: &CsiAlphabet,
    rule: RviRule,
    opts: &RviOptions,
) -> Result<SolveResult, OracleError> {
    let space = StateSpace::new(config.k, config.n_q);
    let n_f = config.n_f as f64;
    let stats_for = |idx: usize, v: &[f64]| -> Result<(f64, Vec<f64>), OracleError> {
        let deltas = deltas_at(config, &space, v, idx);
        let per_subband = match rule {
            RviRule::Optimal => subband_stats(
                &SurplusRule {
                    deltas,
                    gamma: config.gamma,
                },
                alphabet,
                config.k,
            )?,
            RviRule::CsiOnly => subband_stats(
                &BestGainRule {
                    deltas,
                    gamma: config.gamma,
                },
                alphabet,
                config.k,
            )?,
        };
        let q = space.queue_of(idx);
        let backlog: f64 = (0..config.k)
            .map(|k| config.beta[k] * q[k] as f64 / config.lambda[k])
            .sum();
        let g_bar = backlog + config.gamma * n_f * per_subband.expected_power;
        let mu_bar = (0..config.k)
            .map(|k| {
                n_f * config.subband_bandwidth * per_subband.expected_log2[k]
                    / config.mean_packet_bits[k]
            })
            .collect();
        Ok((g_bar, mu_bar))
    };
    iterate(config, opts, stats_for)
}

/// Policy evaluation: solves for the average reward and potentials of a fixed
/// policy given directly as per-state conditional stats.
pub fn evaluate_fixed_policy(
    config: &SystemConfig,
    fixed: &super::kernel::FixedStats,
    opts: &RviOptions,
) -> Result<SolveResult, OracleError> {
    let stats_for = |idx: usize, _v: &[f64]| -> Result<(f64, Vec<f64>), OracleError> {
        Ok((fixed.g_bar[idx], fixed.mu_bar[idx].clone()))
    };
    iterate(config, opts, stats_for)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::oracle::alphabet::build_csi_alphabet;
    use crate::oracle::kernel::FixedStats;

    fn config_k1() -> SystemConfig {
        SystemConfig {
            k: 1,
            n_f: 1,
            n_q: 1,
            tau: 0.005,
            lambda: vec![20.0],
            mean_packet_bits: vec![1000.0],
            beta: vec![1.0],
            p_0: 1.0,
            gamma: 1.0,
            subband_bandwidth: 1.0,
            rng_seed: 0,
            csi_levels: 2,
        }
    }

    #[test]
    fn two_state_fixed_policy_matches_closed_form() {
        // Birth 0.1, death 0.2: stationary (2/3, 1/3); theta = c/3.
        let cfg = config_k1();
        let c = 1.7;
        let fixed = FixedStats {
            g_bar: vec![0.0, c],
            mu_bar: vec![vec![0.0], vec![0.2 / cfg.tau]],
        };
        let opts = RviOptions {
            epsilon: 1e-12,
            ..Default::default()
        };
        let result = evaluate_fixed_policy(&cfg, &fixed, &opts).unwrap();
        assert!(
            (result.theta - c / 3.0).abs() < 1e-8,
            "theta = {}, want {}",
            result.theta,
            c / 3.0
        );
        assert_eq!(result.v_tilde[0], 0.0);
    }

    #[test]
    fn zero_rewards_solve_to_zero() {
        let cfg = config_k1();
        let fixed = FixedStats {
            g_bar: vec![0.0, 0.0],
            mu_bar: vec![vec![0.0], vec![0.2 / cfg.tau]],
        };
        let result = evaluate_fixed_policy(&cfg, &fixed, &RviOptions::default()).unwrap();
        assert!(result.theta.abs() < 1e-12);
        assert!(result.v_tilde.iter().all(|v| v.abs() < 1e-9));
    }

    #[test]
    fn residual_span_is_monotone() {
        let cfg = config_k1();
        let alphabet = build_csi_alphabet(4);
        let opts = RviOptions {
            epsilon: 1e-10,
            ..Default::default()
        };
        let result = relative_value_iteration(&cfg, &alphabet, RviRule::Optimal, &opts).unwrap();
        for w in result.span_history.windows(2) {
            assert!(
                w[1] <= w[0] + 1e-12,
                "span increased: {} -> {}",
                w[0],
                w[1]
            );
        }
    }

    #[test]
    fn state_space_cap_is_enforced() {
        let mut cfg = config_k1();
        cfg.k = 4;
        cfg.n_q = 10;
        cfg.lambda = vec![20.0; 4];
        cfg.mean_packet_bits = vec![1000.0; 4];
        cfg.beta = vec![1.0; 4];
        let alphabet = build_csi_alphabet(2);
        let err = relative_value_iteration(&cfg, &alphabet, RviRule::Optimal, &RviOptions::default())
            .unwrap_err();
        assert!(matches!(err, OracleError::StateSpaceTooLarge { .. }));
    }
}
