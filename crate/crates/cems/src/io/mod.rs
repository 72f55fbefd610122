//! Configuration and series ingestion, the bundled synthetic dataset,
//! and report emission.

pub mod bundled;
pub mod config;
pub mod report;

pub use config::{load_config, write_dataset, IoError};
