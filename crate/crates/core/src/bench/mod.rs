//! Benchmark harness: point-file I/O, the seeded experiment runner and
//! result-table output.

pub mod experiment;
pub mod io;
pub mod table;

pub use experiment::{
    run_experiment, Algorithm, DataSource, ExperimentConfig, ExperimentOutput, TrialRecord, Variant,
};
pub use io::{load_centers, load_points, load_truth, save_centers, save_points};
pub use table::{emit_table, ResultRow, TableFormat};
