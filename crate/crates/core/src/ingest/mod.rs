//! Reading, typing and cleaning decoded AIS CSV dumps.

mod clean;
mod fill;
mod reader;
mod record;
mod schema;

use thiserror::Error;

pub use clean::{clean, Cleaner, CleaningReport, CleaningRules, DropReason};
pub use fill::{fill_static, fill_static_by_mmsi};
pub use reader::{parse_csv, RawReader};
pub use record::{
    format_timestamp, parse_timestamp, to_cells, typify, AisRecord, MobileType, NavStatus,
    RawRecord, RowError, StaticInfo,
};
pub use schema::{Column, HeaderMap};

#[derive(Debug, Error)]
pub enum IngestError {
    #[error("input is missing required columns: {}", missing.join(", "))]
    Schema { missing: Vec<String> },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}
