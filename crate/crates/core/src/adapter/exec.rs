//! Building and running a project's test suite in an isolated copy.

use std::collections::{BTreeMap, BTreeSet};
use std::ffi::OsString;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Duration;

use serde::{Deserialize, Serialize};
use serde_json::Value;
use tempfile::TempDir;
use walkdir::WalkDir;

use super::patch::SourcePatch;
use super::process::{self, Exit};
use crate::error::{Error, Result};

/// Overrides the program used for `<cargo> test`; falls back to `$CARGO`,
/// then `cargo` on the path.
pub const CARGO_OVERRIDE_ENV: &str = "PSEUDOTEST_CARGO";
/// Set for every test process to the id of the test it runs.
pub const TEST_ID_ENV: &str = "PSEUDOTEST_TEST_ID";

const DEFAULT_BUILD_TIMEOUT: Duration = Duration::from_secs(900);
const EXCERPT_LIMIT: usize = 4000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SuiteStatus {
    AllPassed,
    Failures,
    Timeout,
    Crashed,
    CompileError,
}

/// How a failing test failed: an assertion in the test, or some other
/// panic on the way there.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FailureKind {
    Assertion,
    Exception,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SuiteOutcome {
    pub status: SuiteStatus,
    /// Tests that ran to completion and failed. Non-empty iff `status` is
    /// `Failures`.
    pub failing_tests: Vec<String>,
    pub failure_kinds: BTreeMap<String, FailureKind>,
    /// Tests whose process was killed by a signal or exited abnormally.
    pub crashed_tests: Vec<String>,
    pub timed_out_test: Option<String>,
    pub wall_time: Duration,
    pub log_excerpt: String,
    pub test_times: BTreeMap<String, Duration>,
}

impl SuiteOutcome {
    fn compile_error(log: String) -> Self {
        SuiteOutcome {
            status: SuiteStatus::CompileError,
            failing_tests: Vec::new(),
            failure_kinds: BTreeMap::new(),
            crashed_tests: Vec::new(),
            timed_out_test: None,
            wall_time: Duration::ZERO,
            log_excerpt: truncate(log),
            test_times: BTreeMap::new(),
        }
    }

    /// Every test that did not pass, in any way.
    pub fn broken_tests(&self) -> BTreeSet<String> {
        self.failing_tests
            .iter()
            .chain(&self.crashed_tests)
            .chain(&self.timed_out_test)
            .cloned()
            .collect()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Baseline {
    pub suite_green: bool,
    pub test_count: usize,
    pub nominal_suite_time: Duration,
    pub per_test_times: BTreeMap<String, Duration>,
}

impl Baseline {
    /// `max(per-test time) * factor + constant`.
    pub fn budget(&self, factor: f64, constant: Duration) -> Duration {
        let slowest = self.per_test_times.values().max().copied().unwrap_or_default();
        slowest.mul_f64(factor) + constant
    }
}

#[derive(Debug, Clone, Default)]
pub(crate) struct ExecOptions {
    pub build_timeout: Option<Duration>,
    pub extra_env: Vec<(String, OsString)>,
}

/// A private copy of a project with its own target directory.
pub struct Workspace {
    _dir: TempDir,
    root: PathBuf,
}

impl Workspace {
    /// Copy `project_root` (minus `target/` and VCS metadata) into a fresh
    /// temporary directory.
    pub fn create(project_root: &Path) -> Result<Workspace> {
        if !project_root.join("Cargo.toml").is_file() {
            return Err(Error::NotAProject(project_root.to_path_buf()));
        }
        let dir = tempfile::Builder::new().prefix("pseudotest-").tempdir()?;
        let root = dir.path().join("project");
        copy_tree(project_root, &root)?;
        Ok(Workspace { _dir: dir, root })
    }

    pub fn root(&self) -> &Path {
        &self.root
    }

    pub(crate) fn run_patched(
        &self,
        patch: &SourcePatch,
        selection: Option<&BTreeSet<String>>,
        budget: Duration,
        opts: &ExecOptions,
    ) -> Result<SuiteOutcome> {
        let applied = patch.apply(&self.root)?;
        let outcome = execute_suite_with(&self.root, selection, budget, opts);
        applied.restore()?;
        outcome
    }
}

fn copy_tree(from: &Path, to: &Path) -> Result<()> {
    let walker = WalkDir::new(from).sort_by_file_name().into_iter().filter_entry(|e| {
        let name = e.file_name().to_string_lossy();
        !(e.depth() == 1 && (name == "target" || name == ".git"))
    });
    for entry in walker {
        let entry = entry.map_err(|e| Error::Environment(e.to_string()))?;
        let rel = entry.path().strip_prefix(from).expect("walkdir stays under its root");
        let dest = to.join(rel);
        if entry.file_type().is_dir() {
            fs::create_dir_all(&dest)?;
        } else if entry.file_type().is_file() {
            fs::copy(entry.path(), &dest)?;
        }
    }
    Ok(())
}

pub(crate) fn cargo_program() -> OsString {
    std::env::var_os(CARGO_OVERRIDE_ENV)
        .or_else(|| std::env::var_os("CARGO"))
        .unwrap_or_else(|| "cargo".into())
}

#[derive(Debug, Clone)]
struct TestBinary {
    target: String,
    executable: PathBuf,
}

#[derive(Debug, Clone)]
struct TestCase {
    id: String,
    name: String,
    binary: usize,
}

/// Build the workspace's tests, then run the selected ones (all when
/// `selection` is `None`) one process per test, each under `budget`.
pub fn execute_suite(
    workspace: &Path,
    selection: Option<&BTreeSet<String>>,
    budget: Duration,
) -> Result<SuiteOutcome> {
    execute_suite_with(workspace, selection, budget, &ExecOptions::default())
}

pub(crate) fn execute_suite_with(
    workspace: &Path,
    selection: Option<&BTreeSet<String>>,
    budget: Duration,
    opts: &ExecOptions,
) -> Result<SuiteOutcome> {
    if !workspace.join("Cargo.toml").is_file() {
        return Err(Error::Environment(format!(
            "{} is not a project workspace",
            workspace.display()
        )));
    }
    let binaries = match build(workspace, opts)? {
        Ok(b) => b,
        Err(log) => return Ok(SuiteOutcome::compile_error(log)),
    };
    let tests = list_tests(workspace, &binaries)?;

    let mut out = SuiteOutcome {
        status: SuiteStatus::AllPassed,
        failing_tests: Vec::new(),
        failure_kinds: BTreeMap::new(),
        crashed_tests: Vec::new(),
        timed_out_test: None,
        wall_time: Duration::ZERO,
        log_excerpt: String::new(),
        test_times: BTreeMap::new(),
    };
    let mut log = String::new();
    for test in tests
        .iter()
        .filter(|t| selection.is_none_or(|s| s.contains(&t.id)))
    {
        let mut env = opts.extra_env.clone();
        env.push((TEST_ID_ENV.to_owned(), OsString::from(&test.id)));
        let exe = binaries[test.binary].executable.clone().into_os_string();
        let args = [test.name.as_str(), "--exact", "--test-threads=1"];
        let run = process::run(&exe, &args, workspace, &env, budget)?;
        out.wall_time += run.elapsed;
        out.test_times.insert(test.id.clone(), run.elapsed);

        match &run.exit {
            Exit::TimedOut => {
                log.push_str(&format!("{}: timed out after {:?}\n", test.id, budget));
                out.timed_out_test = Some(test.id.clone());
                break;
            }
            Exit::Status(_) if run.success() => {
                if !run.stdout.contains("running 1 test") {
                    return Err(Error::Environment(format!(
                        "test {} was not found in its binary",
                        test.id
                    )));
                }
            }
            Exit::Status(status) if run.signal().is_none() && status.code() == Some(101) => {
                let kind = failure_kind(&run.stdout);
                out.failing_tests.push(test.id.clone());
                out.failure_kinds.insert(test.id.clone(), kind);
                log.push_str(&format!("{}: failed ({kind:?})\n", test.id));
                log.push_str(&panic_excerpt(&run.stdout, &test.name));
            }
            Exit::Status(status) => {
                out.crashed_tests.push(test.id.clone());
                log.push_str(&format!("{}: crashed ({status})\n", test.id));
                log.push_str(run.stderr.lines().take(5).collect::<Vec<_>>().join("\n").as_str());
                log.push('\n');
            }
        }
    }

    out.status = if out.timed_out_test.is_some() {
        SuiteStatus::Timeout
    } else if !out.crashed_tests.is_empty() {
        SuiteStatus::Crashed
    } else if !out.failing_tests.is_empty() {
        SuiteStatus::Failures
    } else {
        SuiteStatus::AllPassed
    };
    if out.status != SuiteStatus::Failures {
        // Failures that co-occur with a hang or crash are kept in the log only.
        out.failing_tests.clear();
        out.failure_kinds.clear();
    }
    out.log_excerpt = truncate(log);
    Ok(out)
}

/// `Ok(Ok(binaries))` on success, `Ok(Err(log))` when the code does not
/// compile.
fn build(workspace: &Path, opts: &ExecOptions) -> Result<Result<Vec<TestBinary>, String>> {
    let target_dir = workspace.join("target");
    let env = [("CARGO_TARGET_DIR".to_owned(), target_dir.into_os_string())];
    let run = process::run(
        &cargo_program(),
        &["test", "--no-run", "--message-format=json"],
        workspace,
        &env,
        opts.build_timeout.unwrap_or(DEFAULT_BUILD_TIMEOUT),
    )?;
    if matches!(run.exit, Exit::TimedOut) {
        return Err(Error::Environment("build timed out".into()));
    }

    let mut binaries = Vec::new();
    let mut errors = String::new();
    for line in run.stdout.lines() {
        let Ok(msg) = serde_json::from_str::<Value>(line) else {
            continue;
        };
        match msg["reason"].as_str() {
            Some("compiler-artifact") if msg["profile"]["test"] == Value::Bool(true) => {
                if let (Some(exe), Some(name)) =
                    (msg["executable"].as_str(), msg["target"]["name"].as_str())
                {
                    binaries.push(TestBinary {
                        target: name.to_owned(),
                        executable: PathBuf::from(exe),
                    });
                }
            }
            Some("compiler-message") if msg["message"]["level"] == "error" => {
                if let Some(rendered) = msg["message"]["rendered"].as_str() {
                    errors.push_str(rendered);
                }
            }
            _ => {}
        }
    }
    if run.success() {
        binaries.sort_by(|a, b| a.target.cmp(&b.target).then(a.executable.cmp(&b.executable)));
        Ok(Ok(binaries))
    } else if errors.is_empty() {
        Ok(Err(run.stderr))
    } else {
        Ok(Err(errors))
    }
}

fn list_tests(workspace: &Path, binaries: &[TestBinary]) -> Result<Vec<TestCase>> {
    let mut tests = Vec::new();
    for (i, bin) in binaries.iter().enumerate() {
        let exe = bin.executable.clone().into_os_string();
        let all = list(workspace, &exe, &["--list", "--format", "terse"])?;
        let ignored: BTreeSet<String> =
            list(workspace, &exe, &["--list", "--format", "terse", "--ignored"])?
                .into_iter()
                .collect();
        for name in all.into_iter().filter(|n| !ignored.contains(n)) {
            tests.push(TestCase {
                id: format!("{}::{}", bin.target, name),
                name,
                binary: i,
            });
        }
    }
    tests.sort_by(|a, b| a.id.cmp(&b.id));
    Ok(tests)
}

fn list(workspace: &Path, exe: &OsString, args: &[&str]) -> Result<Vec<String>> {
    let run = process::run(exe, args, workspace, &[], Duration::from_secs(60))?;
    if !run.success() {
        return Err(Error::Environment(format!(
            "cannot list tests of {}: {}",
            exe.to_string_lossy(),
            run.stderr
        )));
    }
    Ok(run
        .stdout
        .lines()
        .filter_map(|l| l.strip_suffix(": test"))
        .map(str::to_owned)
        .collect())
}

fn failure_kind(stdout: &str) -> FailureKind {
    if stdout.contains("assertion failed") || stdout.contains("assertion `") {
        FailureKind::Assertion
    } else {
        FailureKind::Exception
    }
}

fn panic_excerpt(stdout: &str, name: &str) -> String {
    let marker = format!("---- {name} stdout ----");
    let Some(at) = stdout.find(&marker) else {
        return String::new();
    };
    let mut s: String = stdout[at + marker.len()..]
        .lines()
        .filter(|l| !l.trim().is_empty())
        .take(4)
        .collect::<Vec<_>>()
        .join("\n");
    s.push('\n');
    s
}

fn truncate(mut s: String) -> String {
    if s.len() > EXCERPT_LIMIT {
        let mut cut = EXCERPT_LIMIT;
        while !s.is_char_boundary(cut) {
            cut -= 1;
        }
        s.truncate(cut);
        s.push_str("\n[truncated]");
    }
    s
}

/// Check that the pristine suite builds and passes, twice, with identical
/// results.
pub fn verify_baseline(project_root: &Path, budget: Duration) -> Result<Baseline> {
    let ws = Workspace::create(project_root)?;
    verify_baseline_in(ws.root(), budget, &ExecOptions::default())
}

pub(crate) fn verify_baseline_in(root: &Path, budget: Duration, opts: &ExecOptions) -> Result<Baseline> {
    let first = execute_suite_with(root, None, budget, opts)?;
    if first.status == SuiteStatus::CompileError {
        return Err(Error::Environment(format!(
            "baseline does not build:\n{}",
            first.log_excerpt
        )));
    }
    let second = execute_suite_with(root, None, budget, opts)?;
    let (a, b) = (first.broken_tests(), second.broken_tests());
    if first.status != SuiteStatus::AllPassed || second.status != SuiteStatus::AllPassed {
        let flaky = a != b || first.status != second.status;
        return Err(Error::BaselineFailure {
            failing_tests: a.union(&b).cloned().collect(),
            flaky,
        });
    }
    if second.test_times.is_empty() {
        return Err(Error::EmptySuite(root.to_path_buf()));
    }
    Ok(Baseline {
        suite_green: true,
        test_count: second.test_times.len(),
        nominal_suite_time: second.wall_time,
        per_test_times: second.test_times,
    })
}
