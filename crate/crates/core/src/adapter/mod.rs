//! Everything specific to Cargo projects: method discovery, variant
//! synthesis, and building and running test suites in isolated copies.

mod discover;
mod exec;
mod patch;
mod process;
pub(crate) mod shape;
pub(crate) mod source;

pub use discover::{discover, MethodInventory};
pub use exec::{
    execute_suite, verify_baseline, Baseline, FailureKind, SuiteOutcome, SuiteStatus, Workspace,
    CARGO_OVERRIDE_ENV, TEST_ID_ENV,
};
pub(crate) use exec::{execute_suite_with, verify_baseline_in, ExecOptions};
pub use patch::{
    applicable_transformations, render_body, synthesize_variant, AppliedPatch, PatchOrigin,
    SourcePatch,
};
pub(crate) use patch::build_patch;
