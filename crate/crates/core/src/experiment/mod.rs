//! Experiment files, bundled presets, multi-seed runs and their outputs.

mod compare;
mod config;
mod presets;
mod runner;

pub use compare::{compare_policies, ComparisonRow, ComparisonTable};
pub use config::{parse_config, parse_config_str, ExperimentSpec, ModelKind};
pub use presets::{load_preset, preset_names, preset_text, PRESETS};
pub use runner::{
    aggregate, csv_header, run_all, run_experiment, write_aggregate_csv, write_run_csv, AggregateColumn,
    AggregateReport, ExperimentOutput, RunOptions,
};
