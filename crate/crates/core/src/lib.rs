//! Queue-aware power and subcarrier allocation for a K-user OFDMA downlink.
//!
//! The crate contains:
//! * a slot-level simulator of the downlink queues over i.i.d. Rayleigh
//!   fading with Poisson arrivals and exponential packet sizes ([`model`]);
//! * the closed-form multi-level water-filling allocator whose water level
//!   tracks queue-dependent potential increments ([`policy`]);
//! * exact offline solvers over a quantized CSI alphabet: relative value
//!   iteration on the joint backlog space and per-user birth-death Poisson
//!   solves, with the additive-decomposition check ([`oracle`]);
//! * online learning of the potentials over regenerative periods, in joint
//!   and per-user-decomposed form ([`online`]);
//! * M-LWDF and Round Robin reference schedulers ([`baselines`]);
//! * an experiment harness for replications, SNR sweeps, paired comparisons,
//!   and power-budget calibration ([`harness`], [`calibrate`]).
//!
//! Heavy inner loops (Bellman backups, alphabet enumeration, sweep cells) run
//! on rayon when the default `parallel` feature is on, and fall back to
//! sequential loops without it; both paths produce identical results.

pub mod baselines;
pub mod calibrate;
pub mod config;
pub mod error;
pub mod harness;
pub mod model;
pub mod online;
pub mod oracle;
pub mod par;
pub mod policy;
pub mod potential;
pub mod rng;
pub mod state;

pub use config::{load_config, parse_config, SolverOptions, SystemConfig};
pub use model::{Action, ChannelState, QueueState, SlotOutcome};
pub use potential::{JointTable, PerUserTable, PotentialTable};
pub use state::StateSpace;
