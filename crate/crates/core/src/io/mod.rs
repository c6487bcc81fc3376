//! Config files and run output.

pub mod config;
pub mod output;

pub use config::{parse_config, InitialData, Preset, RunConfig};
pub use output::{
    fmt_num, read_series, read_snapshots, write_series_header, write_snapshot, RunManifest, SeriesRow, Snapshot,
    FORMAT_VERSION, SERIES_HEADER,
};
