//! Error types shared across the crate.

use thiserror::Error;

/// Configuration loading and validation failures.
#[derive(Debug, Error)]
pub enum ConfigError {
    #[error("cannot read config file {path}: {source}")]
    Io {
        path: String,
        #[source]
        source: std::io::Error,
    },
    #[error("cannot parse config file {path}: {message}")]
    Parse { path: String, message: String },
    #[error("invalid config: {0}")]
    Invalid(String),
}

/// Offline solver failures.
#[derive(Debug, Error)]
pub enum OracleError {
    #[error("joint state space has {states} states, exceeding the cap of {cap}")]
    StateSpaceTooLarge { states: usize, cap: usize },
    #[error(
        "exact CSI enumeration needs {terms} terms (> {cap}); \
         use the Monte Carlo estimator with an explicit sample count"
    )]
    EnumerationTooLarge { terms: u128, cap: u128 },
    #[error(
        "per-slot transition mass {mass:.6} exceeds 1 at state {state_index}; \
         the small-slot birth-death approximation does not hold for this config"
    )]
    InvalidRegime { state_index: usize, mass: f64 },
    #[error("relative value iteration did not converge in {iterations} iterations (residual span {residual:.3e})")]
    NonConvergence { iterations: usize, residual: f64 },
    #[error("per-user policy iteration for user {user} did not converge in {iterations} iterations (last delta {delta:.3e})")]
    PolicyIterationDiverged {
        user: usize,
        iterations: usize,
        delta: f64,
    },
}

/// Online learning failures.
#[derive(Debug, Error)]
pub enum OnlineError {
    #[error(
        "regenerative period exceeded {max_slots} slots with {unvisited} state(s) still unvisited \
         (period {period}); the chain is not exciting every state under the current policy"
    )]
    PeriodBudgetExhausted {
        period: usize,
        max_slots: u64,
        unvisited: usize,
    },
    #[error("potential update requires every state visited; state {state} has no visits")]
    UnvisitedState { state: usize },
    #[error("stopped after {max_periods} periods without reaching stability (last delta {last_delta:.3e})")]
    MaxPeriodsExhausted { max_periods: usize, last_delta: f64 },
    #[error(transparent)]
    Oracle(#[from] OracleError),
}

/// Lagrange-multiplier calibration failures.
#[derive(Debug, Error)]
pub enum CalibrationError {
    #[error(
        "power budget {target:.4} is unreachable: average power is {achieved:.4} \
         even at the smallest multiplier {gamma_min:.3e}"
    )]
    BracketNotFound {
        target: f64,
        achieved: f64,
        gamma_min: f64,
    },
    #[error(transparent)]
    Oracle(#[from] OracleError),
}
