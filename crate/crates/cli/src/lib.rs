//! Command-line front end: experiment manifests, dataset CSVs and JSON
//! reports around the `hetdp` library.

pub mod commands;
pub mod config;
pub mod dataset_csv;
pub mod error;
pub mod real;

pub use commands::{
    cmd_bench, cmd_gen, cmd_weights, load_data, to_json, write_trial_csv, BenchOptions,
    BenchOutput, BenchReport, WeightsReport, SCHEMA_VERSION,
};
pub use config::{resolve_seed, BenchmarkConfig, DataSource, SEED_ENV};
pub use dataset_csv::{ingest_csv, write_dataset};
pub use error::{CliError, Result};
