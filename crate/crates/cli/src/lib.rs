//! Experiment orchestration behind the `hlvfair` binary: dataset validation,
//! synthetic data, training runs with evaluation reports, configuration
//! sweeps and temperature sweeps. Every command is deterministic given its
//! spec and writes its files atomically.

mod error;
pub mod output;
pub mod run;
pub mod spec;
pub mod sweep;
pub mod temp;
pub mod validate;

pub use error::CliError;
pub use run::{cmd_run, load_runs, report_tests, Report, ReportRow, RunOutputs};
pub use spec::{EvalSpec, ExperimentSpec, SweepSettings, TrainTemplate};
pub use sweep::cmd_sweep;
pub use temp::cmd_temp_sweep;
pub use validate::{cmd_synth, cmd_validate};
