//! Library half of the `csimeta` command-line driver: configuration schema,
//! provenance stamping, and the evaluation report format. The binary in
//! `main.rs` wires these to the pipeline crate.

pub mod config;
pub mod provenance;
pub mod report;
