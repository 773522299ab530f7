//! Experiment grid: every model and feature-set pairing plus the four
//! hybrids, evaluated on the test and validation splits.

mod config;
mod grid;
mod report;

pub use config::{HybridConfig, RunConfig, CONFIG_SCHEMA_VERSION};
pub use grid::{
    grid_cells, majority_baseline, parse_only, run_cell, run_grid, CellFeatures, CellModel, CellSpec, ExperimentCell,
    GridRun,
};
pub use report::{emit_report, format_percent, ReportFormat, CSV_HEADER};
