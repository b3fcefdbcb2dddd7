//! Configuration, presets, experiment runs, baselines and the validation suite.

pub mod config;
pub mod experiment;
pub mod metrics;
pub mod presets;
pub mod random;
pub mod report;
pub mod seeds;
pub mod verify;

pub use config::{Experiment, RunConfig};
pub use experiment::{baseline_dda, compare_baselines, delay_sweep, run_experiment, BaselineWeights, ExperimentOutput};
pub use metrics::{read_records, MetricsRecord, MetricsTable, Summary};
pub use presets::Preset;
pub use report::{constants_report, ConstantsReport};
pub use verify::{verify, VerifyReport};
