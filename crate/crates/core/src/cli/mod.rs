//! Config-driven experiment runner: TOML configs, built-in presets, artifact
//! writing and report comparison.

mod compare;
mod config;
mod presets;
mod run;

pub use compare::{compare_runs, load_report, ComparisonRow, RunComparison};
pub use config::ExperimentConfig;
pub use presets::{list_presets, preset, PRESETS};
pub use run::{run_experiment, ExperimentRun, CONFIG_ECHO, HISTORY_CSV, MODEL_BIN, REPORT_JSON};
