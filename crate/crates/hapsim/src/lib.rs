//! Std companion to `hapsim-core`: TOML scenario files, CSV import/export
//! and the experiment runner behind the `hapsim` binary.

pub mod config;
pub mod io;
pub mod runner;

pub use config::Config;
pub use runner::{
    calibrate_load, densify, run_sweep, run_table1, CalibrationReport, DensifyOutcome, SweepRecord,
    Table1Report, Variant,
};

#[derive(Debug, thiserror::Error)]
pub enum Error {
    #[error(transparent)]
    Core(#[from] hapsim_core::Error),

    #[error("reading {path}: {source}")]
    Io {
        path: String,
        source: std::io::Error,
    },

    #[error("parsing config: {0}")]
    Toml(#[from] toml::de::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error("bad variant {0:?}: expected baseline, densified or haps(<Mbps>)")]
    BadVariant(String),

    #[error(
        "calibration failed: target utilization {target:.3} outside [{low_util:.3}, {high_util:.3}] \
         reached with {low_count}..={high_count} active users"
    )]
    Calibration {
        target: f64,
        low_count: usize,
        low_util: f64,
        high_count: usize,
        high_util: f64,
    },

    #[error("densification did not reach full service after {rounds} rounds")]
    DensifyDiverged { rounds: usize },

    #[error("{0}")]
    Invalid(String),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
