//! Experiment-harness library behind the `swell` binary: configuration,
//! initial-data generation, run persistence, and the study drivers.

pub mod config;
pub mod initial;
pub mod persist;
pub mod studies;
