//! Config-driven experiments comparing flat and hierarchical classification,
//! with CSV output.

mod config;
mod report;
mod runner;

pub use config::{
    DatasetSpec, ExperimentConfig, FlatSpec, HierarchySpec, MeasurementSpec, MNIST_DIR_ENV,
};
pub use report::{emit_csv, emit_summary_csv, rows_to_csv, CSV_HEADER};
pub use runner::{
    evaluate_flat, evaluate_tree, run_experiment, summarize, Evaluation, ExperimentResult, Method,
    ResultRow, SummaryRow,
};
