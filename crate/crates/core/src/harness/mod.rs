//! Experiment configuration, execution and reporting.

mod config;
mod report;
mod run;
mod sweep;

pub use config::{
    DataSource, ExperimentConfig, FileSource, NeighborRule, Scheme, TestPolicy, ValidationPolicy,
};
pub use report::{
    emit_report, AgentSummary, OutputFormat, PointRecord, ReplicationSummary, Report,
    SchemeSummary, Stat, Timings,
};
pub use run::{replication_seed, run_experiment};
pub use sweep::{emit_sweep, run_sweep, SweepAxis, SweepResult, SweepRow};
