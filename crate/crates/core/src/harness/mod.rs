//! Bundled datasets, contamination simulations, table reproduction and
//! report export.

pub mod datasets;
mod report;
mod simulation;
mod tables;

pub use datasets::{dataset_names, load_dataset, Dataset};
pub use report::{export_report, import_report, Format, Report};
pub use simulation::{
    efficiency_ratio, run_simulation, Cell, Estimator, Replication, Scheme, SimulationPlan, SimulationReport,
};
pub use tables::{reproduce_table, table_ids, Comparison, TableReport};

/// Schema version written into every exported report.
pub const REPORT_VERSION: u32 = 1;
