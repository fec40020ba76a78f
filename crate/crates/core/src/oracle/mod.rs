//! Exact offline ground truth: quantized-CSI conditional expectations, the
//! reduced birth-death kernel, relative value iteration on the joint state
//! space, and the per-user Poisson solves with the additivity check.

pub mod alphabet;
pub mod kernel;
pub mod poisson;
pub mod rvi;
pub mod stats;

pub use alphabet::{build_csi_alphabet, CsiAlphabet};
pub use kernel::{build_kernel, simulate_kernel_chain, FixedStats, KernelPolicy, ReducedKernel};
pub use poisson::{
    per_user_poisson_solve, solve_all_users, verify_additivity, AdditivityReport, PerUserSolve,
};
pub use rvi::{evaluate_fixed_policy, relative_value_iteration, RviOptions, RviRule, SolveResult};
pub use stats::{
    conditional_stats, conditional_stats_mc, ConditionalStats, McConditionalStats,
};
