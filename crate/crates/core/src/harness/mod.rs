//! The workflows behind the `ddde` command line: label a signal directory,
//! train the surrogates, run the optimizer once or over the strategy/F/Cr
//! grid, and compare the results against the history.

mod config;
mod experiment;
mod grid;
mod ingest;
mod optimize;
mod report;
mod train;

pub use config::{HarnessConfig, Paths};
pub use experiment::{
    cmd_experiment, experiment_outputs, quantile, run_experiment, write_boxplot_csv, write_experiment,
    write_results_csv, Experiment, ExperimentConfig, RunRecord, BOXPLOT_FILE, CONVERGENCE_FILE, RESULTS_FILE,
};
pub use grid::{experiment_grid, grid_entry, BoostGrid, ForestGrid, GridEntry, GRID_CR, GRID_F};
pub use ingest::cmd_ingest;
pub use optimize::{cmd_optimize, optimize_outputs, optimize_product, InitInfo};
pub use report::{
    build_report, cmd_report, median_decision, read_results_csv, report_outputs, write_report, ComparisonReport,
    ProductComparison, ResultRow, REPORT_CSV, REPORT_JSON,
};
pub use train::{
    cmd_train, train_outputs, train_surrogates, Candidate, ClassifierReport, RegressorReport, TrainConfig,
    TrainingReport, MODELS_FILE, TRAINING_REPORT_FILE,
};
