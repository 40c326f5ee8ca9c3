//! Experiment orchestration: configuration, per-iteration drivers,
//! metrics, CSV output and heterogeneity sweeps.

mod config;
mod driver;
mod metrics;
mod output;
mod predict;
mod sweep;

pub use config::{
    DatasetKind, ExperimentConfig, LipschitzKind, MobilitySettings, Mode, OmegaPolicy, RegimeName, Topology, REALISTIC_CODED_DIVIDER,
    SYNTHETIC_CODED_DIVIDER,
};
pub use driver::{
    beta_star_at, plan_for_policy, resolve_dataset, run_experiment, run_experiment_with, run_iteration_baseline, run_iteration_d2dcfl,
    DataSource, IterationOutcome, RunContext, RunMode, RunOutput, RunSummary, Simulation, StopRule,
};
pub use metrics::{comm_efficiency, normalized_error, r_squared, time_to_error, time_to_r2, MetricsRecord, CSV_COLUMNS};
pub use predict::{analytic_prediction, AnalyticPrediction};
pub use output::{summary_lines, write_csv, write_sweep_csv};
pub use sweep::{sweep, SweepRow, SweepTarget, SWEEP_COLUMNS};
