use std::path::PathBuf;

use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{}: not a cargo project (no Cargo.toml)", .0.display())]
    NotAProject(PathBuf),

    #[error("{}:{line}:{column}: cannot parse source: {message}", file.display())]
    Discovery {
        file: PathBuf,
        line: usize,
        column: usize,
        message: String,
    },

    #[error("structural analysis failed at bytes {start}..{end}: {message}")]
    StructuralAnalysis {
        start: usize,
        end: usize,
        message: String,
    },

    #[error("{}: source changed since discovery", .0.display())]
    StaleInventory(PathBuf),

    #[error("precondition violated: {0}")]
    Precondition(String),

    #[error("contract violation: {0}")]
    ContractViolation(String),

    #[error("environment error: {0}")]
    Environment(String),

    #[error("{}", describe_baseline(.failing_tests, *.flaky))]
    BaselineFailure {
        failing_tests: Vec<String>,
        flaky: bool,
    },

    #[error("{}: the test suite is empty", .0.display())]
    EmptySuite(PathBuf),

    #[error("instrumentation of {method} failed: {message}")]
    Instrumentation { method: String, message: String },

    #[error("corrupt probe log record at byte {offset}: {message}")]
    ProbeLog { offset: usize, message: String },

    #[error("correlation undefined: {0}")]
    UndefinedCorrelation(String),

    #[error("effect size undefined: {0}")]
    UndefinedEffect(String),

    #[error("report failed schema self-check: {0}")]
    Schema(String),

    #[error("analysis failed: {0}")]
    Analysis(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

fn describe_baseline(failing: &[String], flaky: bool) -> String {
    if flaky {
        format!(
            "baseline is flaky: results differ between two runs of the pristine suite ({})",
            failing.join(", ")
        )
    } else {
        format!("baseline is red: failing tests: {}", failing.join(", "))
    }
}
