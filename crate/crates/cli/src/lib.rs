//! Command-line front end for `photon-cumulants`: moments and cumulants of
//! Gaussian states stored as JSON, Haar Monte-Carlo sweeps driven by TOML
//! experiment files, and timing benchmarks. Tabular results go to CSV with a
//! JSON run manifest beside them.

pub mod commands;
pub mod config;
pub mod error;
pub mod output;
