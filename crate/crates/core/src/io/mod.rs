//! Configuration files, field snapshots, time series and checkpoints.

pub mod config;
pub mod snapshot;
pub mod state;
pub mod timeseries;

pub use config::{Problem, RunConfig, OUTPUT_DIR_ENV};
pub use snapshot::FieldSnapshot;
pub use state::SavedState;
pub use timeseries::{append_timeseries, read_timeseries, write_table, TIMESERIES_HEADER};
