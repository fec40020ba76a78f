//! Calibrating the power-price multiplier to meet the average power budget.
//!
//! Average transmit power is nonincreasing in gamma (larger price, lower
//! water levels), so a bracketing search plus geometric bisection suffices.
//! Every probe re-solves the policy's potentials at the trial gamma and
//! measures long-run power by simulation under a fixed probe seed, so the
//! map from gamma to power is deterministic and smooth enough to bisect.

use crate::config::{SolverOptions, SystemConfig};
use crate::error::CalibrationError;
use crate::harness::policy::{Policy, PolicyKind};
use crate::harness::replication::{run_replication, RunParams};
use crate::oracle::{
    build_csi_alphabet, relative_value_iteration, solve_all_users, RviOptions, RviRule,
};
use crate::potential::{JointTable, PerUserTable, PotentialTable};
use crate::rng::derive_seed;
use crate::state::StateSpace;

/// Builds a ready-to-run policy at the config's current gamma, re-solving
/// potentials where the policy carries them.
pub fn prepare_policy(
    kind: PolicyKind,
    config: &SystemConfig,
    opts: &SolverOptions,
) -> Result<Policy, CalibrationError> {
    match kind {
        PolicyKind::Joint => {
            let alphabet = build_csi_alphabet(config.csi_levels);
            let rvi_opts = RviOptions {
                epsilon: opts.rvi_epsilon,
                max_iters: opts.rvi_max_iters,
                state_space_cap: opts.state_space_cap,
            };
            let solve = relative_value_iteration(config, &alphabet, RviRule::Optimal, &rvi_opts)?;
            Ok(Policy::Joint {
                table: PotentialTable::Joint(JointTable {
                    space: StateSpace::new(config.k, config.n_q),
                    values: solve.v_tilde,
                }),
            })
        }
        PolicyKind::Decomposed => {
            let alphabet = build_csi_alphabet(config.csi_levels);
            let solves = solve_all_users(&alphabet, config, 10_000)?;
            Ok(Policy::Decomposed {
                table: PerUserTable {
                    values: solves.into_iter().map(|s| s.v).collect(),
                },
            })
        }
        PolicyKind::Mlwdf => Ok(Policy::Mlwdf),
        PolicyKind::RoundRobin => Ok(Policy::RoundRobin),
    }
}

/// A calibrated multiplier and the policy solved at it.
#[derive(Debug, Clone)]
pub struct Calibration {
    pub gamma: f64,
    pub achieved_power: f64,
    pub policy: Policy,
    /// Whether the relative power tolerance was met within the probe budget.
    pub converged: bool,
    pub probes: usize,
}

const GAMMA_FLOOR: f64 = 1e-9;
const GAMMA_CEIL: f64 = 1e12;

/// Finds gamma such that the policy's long-run average power matches the
/// config's `P_0` within `opts.calib_tolerance`, rebuilding the policy at
/// every trial gamma.
pub fn calibrate_gamma(
    kind: PolicyKind,
    config: &SystemConfig,
    opts: &SolverOptions,
) -> Result<Calibration, CalibrationError> {
    let target = config.p_0;
    let probe_seed = derive_seed(config.rng_seed, 0xCA11B, 0);
    let params = RunParams {
        warmup_slots: opts.calib_warmup_slots,
        measure_slots: opts.calib_measure_slots,
    };
    let probes = std::cell::Cell::new(0usize);
    let eval = |gamma: f64| -> Result<(f64, Policy), CalibrationError> {
        let mut cfg = config.clone();
        cfg.gamma = gamma;
        let policy = prepare_policy(kind, &cfg, opts)?;
        let metrics = run_replication(&policy, &cfg, &params, probe_seed);
        probes.set(probes.get() + 1);
        Ok((metrics.avg_power, policy))
    };
    let within =
        |power: f64| -> bool { (power - target).abs() / target <= opts.calib_tolerance };

    // Bracket: power(lo) >= target >= power(hi).
    let mut hi = 1.0;
    let (mut hi_power, mut hi_policy) = eval(hi)?;
    while hi_power > target && hi < GAMMA_CEIL {
        hi *= 4.0;
        let (p, pol) = eval(hi)?;
        hi_power = p;
        hi_policy = pol;
    }
    if within(hi_power) {
        return Ok(Calibration {
            gamma: hi,
            achieved_power: hi_power,
            policy: hi_policy,
            converged: true,
            probes: probes.get(),
        });
    }
    let mut lo = hi / 4.0;
    let mut lo_power;
    loop {
        let (p, pol) = eval(lo)?;
        lo_power = p;
        if within(lo_power) {
            return Ok(Calibration {
                gamma: lo,
                achieved_power: lo_power,
                policy: pol,
                converged: true,
                probes: probes.get(),
            });
        }
        if lo_power >= target {
            break;
        }
        if lo <= GAMMA_FLOOR {
            return Err(CalibrationError::BracketNotFound {
                target,
                achieved: lo_power,
                gamma_min: lo,
            });
        }
        lo /= 4.0;
    }

    // Geometric bisection between lo (power above target) and hi (below).
    let mut best = None::<Calibration>;
    for _ in 0..opts.calib_max_iters {
        let mid = (lo * hi).sqrt();
        let (power, policy) = eval(mid)?;
        let err = (power - target).abs() / target;
        let better = match &best {
            None => true,
            Some(b) => err < (b.achieved_power - target).abs() / target,
        };
        if better {
            best = Some(Calibration {
                gamma: mid,
                achieved_power: power,
                policy,
                converged: within(power),
                probes: probes.get(),
            });
        }
        if within(power) {
            break;
        }
        if power > target {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let mut cal = best.expect("at least one bisection probe");
    cal.probes = probes.get();
    Ok(cal)
}
