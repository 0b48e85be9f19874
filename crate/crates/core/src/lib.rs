//! Detects pseudo-tested methods in cargo library projects: methods whose
//! body can be replaced by a trivial one without any test failing.

pub mod adapter;
pub mod cli;
pub mod coverage;
pub mod engine;
pub mod error;
pub mod metrics;
pub mod model;
pub mod mutation;
pub mod report;
pub mod stats;

pub use engine::{analyze, AnalysisConfig, AnalysisReport};
pub use error::{Error, Result};
