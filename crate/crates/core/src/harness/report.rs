//! JSON and CSV serialization of reports.

use serde::de::DeserializeOwned;
use serde::Serialize;

use super::simulation::SimulationReport;
use super::tables::TableReport;
use crate::diagnostics::csv_bytes;
use crate::error::{Result, WleError};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Format {
    Json,
    Csv,
}

impl Format {
    pub fn parse(s: &str) -> Result<Self> {
        match s.to_ascii_lowercase().as_str() {
            "json" => Ok(Format::Json),
            "csv" => Ok(Format::Csv),
            other => Err(WleError::UnknownFormat(other.to_owned())),
        }
    }
}

/// A report with a JSON form (complete, round-trips) and a flat CSV form
/// for plotting.
pub trait Report: Serialize + DeserializeOwned {
    fn to_csv(&self) -> Result<Vec<u8>>;
}

impl Report for SimulationReport {
    fn to_csv(&self) -> Result<Vec<u8>> {
        #[derive(Serialize)]
        struct Row<'a> {
            epsilon: f64,
            estimator: String,
            mse: Option<f64>,
            mc_se: f64,
            failures: usize,
            mean_root_count: f64,
            scheme: &'a str,
        }
        let scheme = self.plan.scheme.to_string();
        csv_bytes(self.cells.iter().map(|c| Row {
            epsilon: c.epsilon,
            estimator: c.estimator.to_string(),
            mse: c.mse,
            mc_se: c.mc_se,
            failures: c.failures,
            mean_root_count: c.mean_root_count,
            scheme: &scheme,
        }))
    }
}

impl Report for TableReport {
    fn to_csv(&self) -> Result<Vec<u8>> {
        csv_bytes(&self.rows)
    }
}

pub fn export_report<R: Report>(report: &R, format: Format) -> Result<Vec<u8>> {
    match format {
        Format::Json => Ok(serde_json::to_vec_pretty(report)?),
        Format::Csv => report.to_csv(),
    }
}

/// Reads a report back. Only the JSON form carries the whole structure.
pub fn import_report<R: Report>(bytes: &[u8], format: Format) -> Result<R> {
    match format {
        Format::Json => Ok(serde_json::from_slice(bytes)?),
        Format::Csv => Err(WleError::InvalidConfig("csv reports are export-only".into())),
    }
}
