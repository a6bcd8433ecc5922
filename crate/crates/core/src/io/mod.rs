pub mod config;
pub mod data;
pub mod report;

pub use config::{Mode, RunConfig, SCHEMA_VERSION};
pub use data::{case_study, load_historical_csv, parse_historical_csv, HistoricalTable, CASE_STUDY_CSV};
pub use report::{emit_report, parse_oc_csv, render, render_records, DesignReport, FitReport, Format, OcRow, Report};
