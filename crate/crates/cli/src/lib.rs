//! The tensorlint driver: wires the frontend, pointer analysis and tensor
//! analysis together and renders reports.

pub mod report;
pub mod run;

pub use report::{Report, ReportFormat};
pub use run::{run, RunConfig, RunError};
