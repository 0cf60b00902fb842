//! Experiment harness for the csrx receiver model: TOML configuration,
//! pattern files, CSV output, and a rayon executor.

#![forbid(unsafe_code)]

pub mod config;
pub mod exec;
pub mod harness;
pub mod pattern_file;
pub mod report;

pub use config::Config;
pub use exec::Rayon;
