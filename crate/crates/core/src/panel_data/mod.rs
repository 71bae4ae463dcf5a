//! Data model and ingestion for monthly time-series cross-section data.
//!
//! Wide files (`date,<series>,...`) load into a [`TimeSeriesMatrix`]; fund
//! metadata loads into [`FundMeta`] records that can be filtered; the
//! [`to_panel`] reshape turns funds, treatment and controls into the long
//! [`PanelTable`] consumed by the learners.

mod meta;
mod month;
mod panel;
mod resample;
mod tscs;

pub use meta::{filter_funds, load_fund_catalog, AssetClass, FilterCriteria, FundMeta, Management};
pub use month::{Month, ParseMonthError};
pub use panel::{to_panel, PanelRow, PanelTable};
pub use resample::{quarterly_to_monthly, ResampleMode};
pub use tscs::{load_tscs_csv, read_tscs_csv, CsvSchema, TimeSeriesMatrix};

use std::path::PathBuf;

#[derive(Debug, thiserror::Error)]
pub enum PanelError {
    #[error("i/o error on {path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
    #[error("csv error: {0}")]
    Csv(#[from] csv::Error),
    #[error("line {line}: expected {expected} fields, found {found}")]
    MalformedRow { line: u64, expected: usize, found: usize },
    #[error("line {line}: cannot parse `{value}` as YYYY-MM")]
    UnparseableTime { line: u64, value: String },
    #[error("line {line}: column `{column}` holds `{value}`, which is not a finite number")]
    InvalidNumber { line: u64, column: String, value: String },
    #[error("duplicate column `{0}`")]
    DuplicateColumn(String),
    #[error("time column `{0}` not found in header")]
    MissingTimeColumn(String),
    #[error("time index not strictly increasing at {at}")]
    NonMonotoneTime { at: String },
    #[error("time index has a gap between {from} and {to}")]
    TimeGap { from: String, to: String },
    #[error("value matrix shape does not match index: {0}")]
    ShapeMismatch(String),
    #[error("series spacing is not {expected} months at {at}")]
    IrregularSpacing { expected: i32, at: String },
    #[error("need at least {required} points, got {actual}")]
    TooFewPoints { required: usize, actual: usize },
    #[error("time indexes do not match: {0}")]
    IndexMismatch(String),
    #[error("observation ({unit}, {time}) appears twice")]
    DuplicateObservation { unit: String, time: String },
    #[error("unknown column `{0}`")]
    UnknownColumn(String),
    #[error("invalid fund metadata at line {line}: {message}")]
    InvalidMeta { line: u64, message: String },
    #[error("duplicate ticker `{0}` in catalog")]
    DuplicateTicker(String),
}
