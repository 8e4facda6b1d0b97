//! Evaluation harness for `fusetrack-core`: OTB-layout dataset loading,
//! scripted synthetic sequences, one-pass evaluation (precision, success,
//! frame rate) and report files. The `fusetrack` binary exposes it as a CLI.

pub mod config;
pub mod dataset;
mod error;
pub mod eval;
pub mod report;
pub mod synth;

pub use error::{BenchError, Result};
