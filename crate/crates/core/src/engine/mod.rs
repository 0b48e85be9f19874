//! The analysis driver: baseline check, coverage, inclusion filtering,
//! extreme-variant runs and per-method classification.

mod pool;

use std::collections::BTreeSet;
use std::path::Path;
use std::time::{Duration, Instant};

use glob::Pattern;
use log::{info, warn};
use serde::{Deserialize, Serialize};

use crate::adapter::{
    applicable_transformations, discover, synthesize_variant, verify_baseline_in, ExecOptions,
    FailureKind, MethodInventory, SuiteOutcome, SuiteStatus, Workspace,
};
use crate::coverage::{covered_methods, instrument, CoverageMap};
use crate::error::{Error, Result};
use crate::metrics::{metrics_for, ProjectMetrics};
use crate::model::{
    is_method_under_analysis, Classification, ExclusionReason, InclusionDecision, Label,
    MethodDescriptor, TransformationSpec,
};
use crate::mutation::{mutants_for, synthesize_mutant, MutantOutcome, MutantSpec};

pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq)]
pub struct AnalysisConfig {
    pub jobs: usize,
    pub timeout_factor: f64,
    pub timeout_constant: Duration,
    /// Budget for each test of the two pristine baseline runs.
    pub baseline_budget: Duration,
    /// Run every test for every variant instead of only the covering ones.
    pub full_suite: bool,
    /// Stop a method's variants at the first detection.
    pub fast: bool,
    pub with_mutation_baseline: bool,
    pub include: Vec<String>,
    pub exclude: Vec<String>,
    /// Put wall-clock measurements in the report (makes it run-dependent).
    pub record_timings: bool,
}

impl Default for AnalysisConfig {
    fn default() -> Self {
        AnalysisConfig {
            jobs: std::thread::available_parallelism().map_or(1, usize::from),
            timeout_factor: 2.0,
            timeout_constant: Duration::from_secs(4),
            baseline_budget: Duration::from_secs(300),
            full_suite: false,
            fast: false,
            with_mutation_baseline: false,
            include: Vec::new(),
            exclude: Vec::new(),
            record_timings: false,
        }
    }
}

impl AnalysisConfig {
    pub fn validate(&self) -> Result<()> {
        if self.jobs == 0 {
            return Err(Error::Precondition("jobs must be at least 1".into()));
        }
        if !(self.timeout_factor.is_finite() && self.timeout_factor > 0.0) {
            return Err(Error::Precondition(format!(
                "timeout factor must be positive, got {}",
                self.timeout_factor
            )));
        }
        for p in self.include.iter().chain(&self.exclude) {
            Pattern::new(p).map_err(|e| Error::Precondition(format!("bad method glob `{p}`: {e}")))?;
        }
        Ok(())
    }

    fn echo(&self) -> ConfigEcho {
        ConfigEcho {
            timeout_factor: self.timeout_factor,
            timeout_constant_ms: self.timeout_constant.as_millis() as u64,
            full_suite: self.full_suite,
            fast: self.fast,
            with_mutation_baseline: self.with_mutation_baseline,
            include: self.include.clone(),
            exclude: self.exclude.clone(),
        }
    }
}

/// The settings that can change analysis results. Worker count and output
/// location are left out so they cannot make otherwise equal reports differ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigEcho {
    pub timeout_factor: f64,
    pub timeout_constant_ms: u64,
    pub full_suite: bool,
    pub fast: bool,
    pub with_mutation_baseline: bool,
    pub include: Vec<String>,
    pub exclude: Vec<String>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Detection {
    Undetected,
    DetectedFailure,
    DetectedTimeout,
    DetectedCrash,
    CompileError,
}

impl Detection {
    pub fn is_detected(self) -> bool {
        matches!(
            self,
            Detection::DetectedFailure | Detection::DetectedTimeout | Detection::DetectedCrash
        )
    }

    pub fn of(status: SuiteStatus) -> Detection {
        match status {
            SuiteStatus::AllPassed => Detection::Undetected,
            SuiteStatus::Failures => Detection::DetectedFailure,
            SuiteStatus::Timeout => Detection::DetectedTimeout,
            SuiteStatus::Crashed => Detection::DetectedCrash,
            SuiteStatus::CompileError => Detection::CompileError,
        }
    }
}

fn is_false(b: &bool) -> bool {
    !*b
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct VariantOutcome {
    pub method_id: String,
    #[serde(rename = "transformation")]
    pub spec: TransformationSpec,
    pub detection: Detection,
    /// Tests that failed, crashed or hit the budget.
    pub failing_tests: Vec<String>,
    /// `assertion` when at least one failing test failed on an assertion.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure_kind: Option<FailureKind>,
    /// Rerun once because the failing tests do not cover the method.
    #[serde(default, skip_serializing_if = "is_false")]
    pub retried: bool,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub duration_ms: Option<u64>,
}

impl VariantOutcome {
    fn from_suite(method_id: &str, spec: TransformationSpec, outcome: &SuiteOutcome, timed: bool) -> Self {
        let detection = Detection::of(outcome.status);
        let failure_kind = (detection == Detection::DetectedFailure).then(|| {
            if outcome.failure_kinds.values().any(|k| *k == FailureKind::Assertion) {
                FailureKind::Assertion
            } else {
                FailureKind::Exception
            }
        });
        VariantOutcome {
            method_id: method_id.to_owned(),
            spec,
            detection,
            failing_tests: outcome.broken_tests().into_iter().collect(),
            failure_kind,
            retried: false,
            duration_ms: timed.then_some(outcome.wall_time.as_millis() as u64),
        }
    }

    fn not_compiling(method_id: &str, spec: TransformationSpec) -> Self {
        VariantOutcome {
            method_id: method_id.to_owned(),
            spec,
            detection: Detection::CompileError,
            failing_tests: Vec::new(),
            failure_kind: None,
            retried: false,
            duration_ms: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MethodReport {
    pub id: String,
    pub classification: Label,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub classification_reason: Option<String>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub exclusion_reason: Option<ExclusionReason>,
    pub covering_tests: Vec<String>,
    pub variants: Vec<VariantOutcome>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mutants: Option<Vec<MutantOutcome>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub mutation_score: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct InventorySummary {
    pub n_methods: usize,
    pub n_files: usize,
    pub source_digest: String,
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Timings {
    pub total_ms: u64,
    pub baseline_ms: u64,
    pub coverage_ms: u64,
    pub variants_ms: u64,
    /// Per-test budget applied to every variant and mutant run.
    pub budget_ms: u64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub schema_version: u32,
    /// Directory name of the analyzed project.
    pub project: String,
    pub config: ConfigEcho,
    pub inventory: InventorySummary,
    pub summary: ProjectMetrics,
    /// One entry per discovered method, sorted by id.
    pub methods: Vec<MethodReport>,
    pub pseudo_tested: Vec<String>,
    pub coverage: CoverageMap,
    pub warnings: Vec<String>,
    pub timings: Option<Timings>,
}

impl AnalysisReport {
    pub fn method(&self, id: &str) -> Option<&MethodReport> {
        self.methods
            .binary_search_by(|m| m.id.as_str().cmp(id))
            .ok()
            .map(|i| &self.methods[i])
    }

    pub fn label(&self, id: &str) -> Option<Label> {
        self.method(id).map(|m| m.classification)
    }

    pub fn ids_with(&self, label: Label) -> Vec<&str> {
        self.methods
            .iter()
            .filter(|m| m.classification == label)
            .map(|m| m.id.as_str())
            .collect()
    }
}

/// Verdict for one method from its variant outcomes. Variants that did not
/// compile carry no evidence and are ignored.
pub fn classify_method(outcomes: &[VariantOutcome]) -> Result<Classification> {
    if let Some(first) = outcomes.first() {
        if let Some(other) = outcomes.iter().find(|o| o.method_id != first.method_id) {
            return Err(Error::ContractViolation(format!(
                "outcomes mix methods {} and {}",
                first.method_id, other.method_id
            )));
        }
    }
    let mut valid = outcomes.iter().filter(|o| o.detection != Detection::CompileError).peekable();
    if valid.peek().is_none() {
        return Ok(Classification::with_reason(
            Label::Unassessable,
            "no variant compiled",
        ));
    }
    Ok(match valid.find(|o| o.detection.is_detected()) {
        Some(o) => Classification::with_reason(
            Label::Required,
            format!("{} detected ({})", o.spec, detection_name(o.detection)),
        ),
        None => Classification::new(Label::PseudoTested),
    })
}

fn detection_name(d: Detection) -> &'static str {
    match d {
        Detection::Undetected => "undetected",
        Detection::DetectedFailure => "failure",
        Detection::DetectedTimeout => "timeout",
        Detection::DetectedCrash => "crash",
        Detection::CompileError => "compile error",
    }
}

/// Inclusion after the structural filters and the user's id globs.
pub fn inclusion(
    method: &MethodDescriptor,
    covered: bool,
    include: &[Pattern],
    exclude: &[Pattern],
) -> InclusionDecision {
    let decision = is_method_under_analysis(method, covered);
    if !decision.included {
        return decision;
    }
    let wanted = include.is_empty() || include.iter().any(|p| p.matches(&method.id));
    if !wanted || exclude.iter().any(|p| p.matches(&method.id)) {
        return InclusionDecision::excluded(ExclusionReason::UserFiltered);
    }
    decision
}

fn millis(d: Duration) -> u64 {
    d.as_millis() as u64
}

enum Unit<'a> {
    Variants {
        method: &'a MethodDescriptor,
        specs: Vec<TransformationSpec>,
        covering: BTreeSet<String>,
    },
    Mutant {
        spec: MutantSpec,
        index: usize,
        covering: BTreeSet<String>,
    },
}

enum UnitResult {
    Variants(Vec<VariantOutcome>, Vec<String>),
    Mutant(MutantOutcome),
}

struct Runner<'a> {
    inventory: &'a MethodInventory,
    config: &'a AnalysisConfig,
    budget: Duration,
    opts: ExecOptions,
}

impl Runner<'_> {
    fn selection<'s>(&self, covering: &'s BTreeSet<String>) -> Option<&'s BTreeSet<String>> {
        (!self.config.full_suite).then_some(covering)
    }

    fn variants(
        &self,
        ws: &Workspace,
        method: &MethodDescriptor,
        specs: &[TransformationSpec],
        covering: &BTreeSet<String>,
    ) -> Result<(Vec<VariantOutcome>, Vec<String>)> {
        let mut outcomes = Vec::new();
        let mut warnings = Vec::new();
        for &spec in specs {
            let (outcome, warning) = self.variant(ws, method, spec, covering)?;
            warnings.extend(warning);
            let stop = self.config.fast && outcome.detection.is_detected();
            outcomes.push(outcome);
            if stop {
                break;
            }
        }
        Ok((outcomes, warnings))
    }

    fn variant(
        &self,
        ws: &Workspace,
        method: &MethodDescriptor,
        spec: TransformationSpec,
        covering: &BTreeSet<String>,
    ) -> Result<(VariantOutcome, Option<String>)> {
        let patch = match synthesize_variant(self.inventory, &method.id, spec) {
            Ok(p) => p,
            Err(Error::Precondition(msg)) => {
                return Ok((VariantOutcome::not_compiling(&method.id, spec), Some(msg)));
            }
            Err(e) => return Err(e),
        };
        let timed = self.config.record_timings;
        let run = |ws: &Workspace| -> Result<VariantOutcome> {
            let suite = ws.run_patched(&patch, self.selection(covering), self.budget, &self.opts)?;
            Ok(VariantOutcome::from_suite(&method.id, spec, &suite, timed))
        };
        let first = run(ws)?;
        info!("{} {}: {}", method.id, spec, detection_name(first.detection));
        let off_target = first.detection.is_detected()
            && first.failing_tests.iter().all(|t| !covering.contains(t));
        if !off_target {
            return Ok((first, None));
        }
        let mut second = run(ws)?;
        second.retried = true;
        let note = format!(
            "{} {}: failing tests {} do not cover the method; retried once, {}",
            method.id,
            spec,
            first.failing_tests.join(", "),
            if second.detection.is_detected() {
                "detected again (possibly flaky)"
            } else {
                "undetected on retry (flaky)"
            }
        );
        warn!("{note}");
        Ok((second, Some(note)))
    }

    fn mutant(
        &self,
        ws: &Workspace,
        spec: &MutantSpec,
        index: usize,
        covering: &BTreeSet<String>,
    ) -> Result<MutantOutcome> {
        let detected = match synthesize_mutant(self.inventory, spec, index) {
            Ok(patch) => {
                let suite = ws.run_patched(&patch, self.selection(covering), self.budget, &self.opts)?;
                match Detection::of(suite.status) {
                    Detection::CompileError => None,
                    d => Some(d.is_detected()),
                }
            }
            Err(Error::Precondition(_)) => None,
            Err(e) => return Err(e),
        };
        Ok(MutantOutcome {
            mutant: spec.clone(),
            detected,
        })
    }
}

/// Run the whole analysis on the cargo project at `project_root`.
pub fn analyze(project_root: &Path, config: &AnalysisConfig) -> Result<AnalysisReport> {
    config.validate()?;
    let started = Instant::now();
    let inventory = discover(project_root)?;
    info!("discovered {} methods", inventory.methods.len());

    let pristine = Workspace::create(project_root)?;
    let baseline = verify_baseline_in(pristine.root(), config.baseline_budget, &ExecOptions::default())?;
    drop(pristine);
    let budget = baseline.budget(config.timeout_factor, config.timeout_constant);
    let baseline_time = started.elapsed();
    info!("baseline green: {} tests, budget {:?}", baseline.test_count, budget);

    let mut warnings = Vec::new();
    let probed = instrument(&inventory)?;
    for id in &probed.unprobed {
        warnings.push(format!("{id}: const fn cannot carry a coverage probe; reported as not covered"));
    }
    let (probe_run, log) = probed.run(budget)?;
    if probe_run.status != SuiteStatus::AllPassed || probe_run.test_times.len() != baseline.test_count {
        return Err(Error::Analysis(format!(
            "instrumented suite diverged from baseline ({:?}, {} of {} tests):\n{}",
            probe_run.status,
            probe_run.test_times.len(),
            baseline.test_count,
            probe_run.log_excerpt
        )));
    }
    drop(probed);
    let coverage = covered_methods(&log)?;
    if let Some(stray) = coverage.covered.iter().find(|id| inventory.get(id).is_none()) {
        return Err(Error::ContractViolation(format!("probe fired for unknown method {stray}")));
    }
    let coverage_time = started.elapsed() - baseline_time;

    let include: Vec<Pattern> = config.include.iter().map(|p| Pattern::new(p).expect("validated")).collect();
    let exclude: Vec<Pattern> = config.exclude.iter().map(|p| Pattern::new(p).expect("validated")).collect();
    let decisions: Vec<InclusionDecision> = inventory
        .methods
        .iter()
        .map(|m| inclusion(m, coverage.is_covered(&m.id), &include, &exclude))
        .collect();

    let mut units = Vec::new();
    for (m, d) in inventory.methods.iter().zip(&decisions) {
        if !d.included {
            continue;
        }
        let specs = applicable_transformations(m);
        if specs.is_empty() {
            warnings.push(format!(
                "{}: no extreme transformation can be written for return type `{}`",
                m.id,
                m.return_type.as_deref().unwrap_or("()")
            ));
            continue;
        }
        units.push(Unit::Variants {
            method: m,
            specs,
            covering: coverage.tests_for(&m.id),
        });
    }
    if config.with_mutation_baseline {
        for (m, d) in inventory.methods.iter().zip(&decisions) {
            if !d.included {
                continue;
            }
            let text = String::from_utf8(inventory.check_fresh(&m.file)?)
                .map_err(|_| Error::StaleInventory(m.file.clone()))?;
            for (index, spec) in mutants_for(m, &text).into_iter().enumerate() {
                units.push(Unit::Mutant {
                    spec,
                    index,
                    covering: coverage.tests_for(&m.id),
                });
            }
        }
    }

    let runner = Runner {
        inventory: &inventory,
        config,
        budget,
        opts: ExecOptions::default(),
    };
    let results = pool::run(
        config.jobs,
        &units,
        || Workspace::create(project_root),
        |ws, unit| match unit {
            Unit::Variants { method, specs, covering } => {
                let (o, w) = runner.variants(ws, method, specs, covering)?;
                Ok(UnitResult::Variants(o, w))
            }
            Unit::Mutant { spec, index, covering } => {
                Ok(UnitResult::Mutant(runner.mutant(ws, spec, *index, covering)?))
            }
        },
    )?;

    let mut variants_by_method: std::collections::BTreeMap<String, Vec<VariantOutcome>> = Default::default();
    let mut mutants_by_method: std::collections::BTreeMap<String, Vec<MutantOutcome>> = Default::default();
    for result in results {
        match result {
            UnitResult::Variants(outcomes, w) => {
                warnings.extend(w);
                if let Some(first) = outcomes.first() {
                    variants_by_method.insert(first.method_id.clone(), outcomes);
                }
            }
            UnitResult::Mutant(o) => {
                mutants_by_method.entry(o.mutant.method_id.clone()).or_default().push(o);
            }
        }
    }

    cache_guard(&runner, project_root, &inventory, &variants_by_method, &coverage)?;
    let variants_time = started.elapsed() - baseline_time - coverage_time;

    let mut methods = Vec::with_capacity(inventory.methods.len());
    for (m, d) in inventory.methods.iter().zip(&decisions) {
        let variants = variants_by_method.remove(&m.id).unwrap_or_default();
        let (classification, exclusion_reason) = match d.exclusion_reason {
            Some(ExclusionReason::NotCovered) => (Classification::new(Label::NotCovered), None),
            Some(reason) => (Classification::new(Label::Excluded), Some(reason)),
            None if variants.is_empty() => (
                Classification::with_reason(Label::Unassessable, "no applicable transformation"),
                None,
            ),
            None => (classify_method(&variants)?, None),
        };
        let mutants = config
            .with_mutation_baseline
            .then(|| mutants_by_method.remove(&m.id).unwrap_or_default())
            .filter(|_| d.included);
        let mutation_score = mutants.as_ref().and_then(|ms| {
            let scored: Vec<bool> = ms.iter().filter_map(|o| o.detected).collect();
            crate::mutation::method_mutation_score(&scored)
        });
        methods.push(MethodReport {
            id: m.id.clone(),
            classification: classification.label,
            classification_reason: classification.reason,
            exclusion_reason,
            covering_tests: coverage.tests_for(&m.id).into_iter().collect(),
            variants,
            mutants,
            mutation_score,
        });
    }
    methods.sort_by(|a, b| a.id.cmp(&b.id));

    let pseudo_tested = methods
        .iter()
        .filter(|m| m.classification == Label::PseudoTested)
        .map(|m| m.id.clone())
        .collect();
    let report = AnalysisReport {
        schema_version: SCHEMA_VERSION,
        project: project_name(project_root),
        config: config.echo(),
        inventory: InventorySummary {
            n_methods: inventory.methods.len(),
            n_files: inventory.file_digests.len(),
            source_digest: inventory.source_digest.clone(),
        },
        summary: metrics_for(&methods),
        methods,
        pseudo_tested,
        coverage,
        warnings,
        timings: config.record_timings.then(|| Timings {
            total_ms: millis(started.elapsed()),
            baseline_ms: millis(baseline_time),
            coverage_ms: millis(coverage_time),
            variants_ms: millis(variants_time),
            budget_ms: millis(budget),
        }),
    };
    check_invariants(&report)?;
    Ok(report)
}

fn project_name(root: &Path) -> String {
    let canonical = root.canonicalize().unwrap_or_else(|_| root.to_path_buf());
    canonical
        .file_name()
        .map(|n| n.to_string_lossy().into_owned())
        .unwrap_or_default()
}

/// Rebuild one variant from scratch in a fresh copy and insist on the same
/// verdict as the incrementally built worker copy gave.
fn cache_guard(
    runner: &Runner<'_>,
    project_root: &Path,
    inventory: &MethodInventory,
    variants: &std::collections::BTreeMap<String, Vec<VariantOutcome>>,
    coverage: &CoverageMap,
) -> Result<()> {
    let candidates: Vec<&VariantOutcome> = variants
        .values()
        .flatten()
        .filter(|v| v.detection != Detection::CompileError)
        .collect();
    if candidates.is_empty() {
        return Ok(());
    }
    let seed = u64::from_str_radix(&inventory.source_digest[..15], 16).unwrap_or(0);
    let sample = candidates[(seed % candidates.len() as u64) as usize];
    let method = inventory
        .get(&sample.method_id)
        .ok_or_else(|| Error::ContractViolation(format!("unknown method {}", sample.method_id)))?;
    let fresh = Workspace::create(project_root)?;
    let (again, _) = runner.variant(&fresh, method, sample.spec, &coverage.tests_for(&method.id))?;
    if again.detection != sample.detection {
        return Err(Error::Analysis(format!(
            "clean rebuild of {} {} gave {} but the cached build gave {}",
            method.id,
            sample.spec,
            detection_name(again.detection),
            detection_name(sample.detection)
        )));
    }
    info!("cache guard agreed on {} {}", method.id, sample.spec);
    Ok(())
}

/// Consistency of a finished report: one label per method, labels agree
/// with coverage, variants and exclusions, and the summary matches a
/// recount.
pub fn check_invariants(report: &AnalysisReport) -> Result<()> {
    let fail = |msg: String| Err(Error::ContractViolation(msg));
    if report.methods.len() != report.inventory.n_methods {
        return fail(format!(
            "{} method entries for {} discovered methods",
            report.methods.len(),
            report.inventory.n_methods
        ));
    }
    if report.methods.windows(2).any(|w| w[0].id >= w[1].id) {
        return fail("method entries are not sorted by unique id".into());
    }
    for key in report.coverage.covering_tests.keys() {
        if !report.coverage.covered.contains(key) {
            return fail(format!("{key} has covering tests but is not covered"));
        }
    }
    for m in &report.methods {
        let covered = report.coverage.is_covered(&m.id);
        match m.classification {
            Label::NotCovered => {
                if covered || !m.variants.is_empty() {
                    return fail(format!("{} is labelled not covered but has coverage or variants", m.id));
                }
            }
            Label::Excluded => {
                if !covered || m.exclusion_reason.is_none() || !m.variants.is_empty() {
                    return fail(format!("{} is excluded without coverage, reason, or with variants", m.id));
                }
            }
            Label::PseudoTested | Label::Required | Label::Unassessable => {
                if !covered {
                    return fail(format!("{} is {:?} but not covered", m.id, m.classification));
                }
                if m.exclusion_reason.is_some() {
                    return fail(format!("{} is analyzed and excluded at once", m.id));
                }
                let expected = if m.variants.is_empty() {
                    Label::Unassessable
                } else {
                    classify_method(&m.variants)?.label
                };
                if expected != m.classification {
                    return fail(format!(
                        "{} is labelled {:?} but its variants say {:?}",
                        m.id, m.classification, expected
                    ));
                }
            }
        }
    }
    let pseudo: Vec<&str> = report.ids_with(Label::PseudoTested);
    if pseudo != report.pseudo_tested.iter().map(String::as_str).collect::<Vec<_>>() {
        return fail("pseudo_tested list disagrees with method labels".into());
    }
    let recount = metrics_for(&report.methods);
    if recount != report.summary {
        return fail(format!("summary {:?} differs from recount {:?}", report.summary, recount));
    }
    Ok(())
}
