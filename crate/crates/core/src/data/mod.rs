//! Dataset ingestion, histograms, share files and synthetic records.

mod records;
mod schema;
mod sharefile;

pub use records::{build_local_histogram, load_csv, read_records, sample_synthetic, write_csv, write_records, Record};
pub use schema::{Column, Schema};
pub use sharefile::{aggregate_shares, share_histogram, ShareFile, MAGIC, SHARE_FILE_VERSION};
