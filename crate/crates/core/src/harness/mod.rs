//! Experiment harness: slot simulation, frozen policies, metrics,
//! replications, and sweeps.

pub mod metrics;
pub mod policy;
pub mod replication;
pub mod sim;
pub mod sweep;

pub use metrics::Metrics;
pub use policy::{Policy, PolicyKind};
pub use replication::{run_replication, RunParams};
pub use sim::SlotSim;
pub use sweep::{
    paired_weighted_delay, parse_sweep_table, sign_test_p, sweep, sweep_table,
    sweep_table_header, ExperimentSpec, PairedComparison, SweepCell, SweepRow,
};
