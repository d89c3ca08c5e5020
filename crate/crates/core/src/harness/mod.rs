//! Experiment configuration, orchestration and CSV output.

pub mod config;
pub mod experiment;
pub mod table;
pub mod verify;

pub use config::{parse_config, ExperimentConfig, LevelSpec, Problem};
pub use experiment::{run_experiment, run_sweep, ExperimentResult, LevelReport, SweepResult};
pub use table::{emit_csv, emit_sweep, render_meta, ConvergenceTable};
pub use verify::{run_self_checks, CheckOutcome};
