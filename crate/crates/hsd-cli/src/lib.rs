//! Benchmark harness for hierarchical speculative document decoding: config
//! parsing, experiment execution and report emission. The `hsd` binary is a
//! thin wrapper over this library.

pub mod config;
pub mod report;
pub mod runner;
