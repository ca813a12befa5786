//! Benchmark harness: runs the two-view against three-view comparison over
//! configured scenes and sweeps and writes CSV or JSON reports.
//!
//! Per trial a fresh scene is generated. The two-view methods triangulate
//! every observation pair of every track (or only the first pair), so a
//! track seen by all three cameras yields three two-view points; the
//! n-view method needs a track seen by every camera and yields one.

mod config;
mod metrics;
mod report;
mod runner;

pub use config::{
    builtin_sweep, override_seed, parse_config, parse_config_str, validate_all, ExperimentConfig,
    Sweep, TwoViewPolicy, ANGLE_LEFT_DEG, ANGLE_RIGHT_DEG, DEFAULT_TRIALS,
};
pub use metrics::{dispersion, mean_std, pairwise_disagreement};
pub use report::{
    read_json_report, trials_path, write_csv, write_report, write_trials_csv, ExperimentReport,
    MethodSummary, ReportFormat, TrialMetrics, CSV_HEADER, TRIALS_HEADER,
};
pub use runner::{
    run_experiment, run_experiment_with, run_sweep, run_trial, trial_scene, trial_seed, RunOptions,
};
