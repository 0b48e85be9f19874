//! Method-entry coverage with per-test attribution.
//!
//! Every discovered method gets a probe call as the first statement of its
//! body. The probe appends one record per (method, test) pair to the file
//! named by [`PROBE_LOG_ENV`]; the test id comes from the runner, which
//! exports [`TEST_ID_ENV`](crate::adapter::TEST_ID_ENV) for each test
//! process it starts.
//!
//! Log format: a sequence of records, each a 4-byte little-endian length
//! followed by that many bytes of UTF-8 `method_id \x1f test_id`.

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::PathBuf;
use std::time::Duration;

use serde::{Deserialize, Serialize};

use crate::adapter::{
    execute_suite_with, ExecOptions, MethodInventory, SuiteOutcome, Workspace, TEST_ID_ENV,
};
use crate::adapter::source::sha256_hex;
use crate::error::{Error, Result};

pub const PROBE_LOG_ENV: &str = "PSEUDOTEST_PROBE_LOG";

const PROBE_MODULE: &str = "__pseudotest_probe";
const SEPARATOR: char = '\x1f';

#[derive(Debug, Clone, Default, PartialEq, Eq, Serialize, Deserialize)]
pub struct CoverageMap {
    pub covered: BTreeSet<String>,
    pub covering_tests: BTreeMap<String, BTreeSet<String>>,
    pub probe_log_digest: String,
}

impl CoverageMap {
    pub fn is_covered(&self, id: &str) -> bool {
        self.covered.contains(id)
    }

    pub fn tests_for(&self, id: &str) -> BTreeSet<String> {
        self.covering_tests.get(id).cloned().unwrap_or_default()
    }
}

/// A project copy whose methods report their own execution.
pub struct ProbedWorkspace {
    pub workspace: Workspace,
    pub probes: usize,
    /// Methods left without a probe (`const fn` cannot call the probe).
    pub unprobed: Vec<String>,
}

impl ProbedWorkspace {
    /// Run the suite once with probes enabled, returning the suite outcome
    /// and the raw probe log.
    pub fn run(&self, budget: Duration) -> Result<(SuiteOutcome, Vec<u8>)> {
        self.run_selected(None, budget)
    }

    pub fn run_selected(
        &self,
        selection: Option<&BTreeSet<String>>,
        budget: Duration,
    ) -> Result<(SuiteOutcome, Vec<u8>)> {
        let log_path = self.log_path();
        if log_path.exists() {
            fs::remove_file(&log_path)?;
        }
        let opts = ExecOptions {
            build_timeout: None,
            extra_env: vec![(PROBE_LOG_ENV.to_owned(), log_path.clone().into_os_string())],
        };
        let outcome = execute_suite_with(self.workspace.root(), selection, budget, &opts)?;
        let log = match fs::read(&log_path) {
            Ok(bytes) => bytes,
            Err(e) if e.kind() == std::io::ErrorKind::NotFound => Vec::new(),
            Err(e) => return Err(e.into()),
        };
        Ok((outcome, log))
    }

    fn log_path(&self) -> PathBuf {
        self.workspace.root().join("target").join("pseudotest-probe.log")
    }
}

/// Copy the project and prefix every method body with a probe.
pub fn instrument(inventory: &MethodInventory) -> Result<ProbedWorkspace> {
    inventory.check_all_fresh()?;
    let workspace = Workspace::create(&inventory.project_root)?;

    let mut by_file: BTreeMap<&PathBuf, Vec<_>> = BTreeMap::new();
    let mut unprobed = Vec::new();
    for m in &inventory.methods {
        if m.is_const {
            unprobed.push(m.id.clone());
        } else {
            by_file.entry(&m.file).or_default().push(m);
        }
    }

    let mut probes = 0;
    for (file, methods) in &by_file {
        let path = workspace.root().join(file);
        let mut text = fs::read_to_string(&path)?;
        let mut ordered = methods.clone();
        ordered.sort_by_key(|m| std::cmp::Reverse(m.span.start));
        for m in &ordered {
            let call = format!("crate::{PROBE_MODULE}::hit({:?});", m.id);
            text.insert_str(m.span.start + 1, &call);
            probes += 1;
        }
        if let Err(e) = syn::parse_file(&text) {
            return Err(Error::Instrumentation {
                method: ordered.last().map(|m| m.id.clone()).unwrap_or_default(),
                message: e.to_string(),
            });
        }
        fs::write(&path, text)?;
    }

    if let Some(root) = &inventory.crate_root {
        let path = workspace.root().join(root);
        let mut text = fs::read_to_string(&path)?;
        text.push_str(&probe_module_source());
        fs::write(&path, text)?;
    }

    Ok(ProbedWorkspace {
        workspace,
        probes,
        unprobed,
    })
}

fn probe_module_source() -> String {
    format!(
        r#"

#[doc(hidden)]
#[allow(dead_code, clippy::all)]
pub mod {PROBE_MODULE} {{
    use std::collections::HashSet;
    use std::io::Write;
    use std::sync::Mutex;

    static SEEN: Mutex<Option<HashSet<&'static str>>> = Mutex::new(None);

    pub fn hit(method: &'static str) {{
        let Some(path) = std::env::var_os("{PROBE_LOG_ENV}") else {{ return }};
        {{
            let mut seen = SEEN.lock().unwrap_or_else(|e| e.into_inner());
            if !seen.get_or_insert_with(HashSet::new).insert(method) {{
                return;
            }}
        }}
        let test = std::env::var("{TEST_ID_ENV}").unwrap_or_default();
        let payload = format!("{{}}\x1f{{}}", method, test);
        let mut record = (payload.len() as u32).to_le_bytes().to_vec();
        record.extend_from_slice(payload.as_bytes());
        if let Ok(mut f) = std::fs::OpenOptions::new().create(true).append(true).open(path) {{
            let _ = f.write_all(&record);
        }}
    }}
}}
"#
    )
}

/// Decode one record stream.
pub fn parse_probe_log(log: &[u8]) -> Result<Vec<(String, String)>> {
    let mut out = Vec::new();
    let mut at = 0;
    while at < log.len() {
        let header = log.get(at..at + 4).ok_or_else(|| Error::ProbeLog {
            offset: at,
            message: "truncated length prefix".into(),
        })?;
        let len = u32::from_le_bytes(header.try_into().expect("four bytes")) as usize;
        let body = log.get(at + 4..at + 4 + len).ok_or_else(|| Error::ProbeLog {
            offset: at,
            message: format!("record claims {len} bytes past end of log"),
        })?;
        let text = std::str::from_utf8(body).map_err(|e| Error::ProbeLog {
            offset: at + 4 + e.valid_up_to(),
            message: "invalid UTF-8".into(),
        })?;
        let (method, test) = text.split_once(SEPARATOR).ok_or_else(|| Error::ProbeLog {
            offset: at,
            message: "missing field separator".into(),
        })?;
        out.push((method.to_owned(), test.to_owned()));
        at += 4 + len;
    }
    Ok(out)
}

/// Build the coverage map from a completed probe log.
pub fn covered_methods(log: &[u8]) -> Result<CoverageMap> {
    let mut map = CoverageMap::default();
    for (method, test) in parse_probe_log(log)? {
        map.covered.insert(method.clone());
        let tests = map.covering_tests.entry(method).or_default();
        if !test.is_empty() {
            tests.insert(test);
        }
    }
    let mut canonical = String::new();
    for (method, tests) in &map.covering_tests {
        canonical.push_str(method);
        for t in tests {
            canonical.push(SEPARATOR);
            canonical.push_str(t);
        }
        canonical.push('\n');
    }
    map.probe_log_digest = sha256_hex(canonical.as_bytes());
    Ok(map)
}

#[cfg(test)]
pub(crate) fn encode_record(method: &str, test: &str) -> Vec<u8> {
    let payload = format!("{method}{SEPARATOR}{test}");
    let mut rec = (payload.len() as u32).to_le_bytes().to_vec();
    rec.extend_from_slice(payload.as_bytes());
    rec
}
