#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet};
use std::fs;
use std::path::{Path, PathBuf};

use pseudotest::coverage::CoverageMap;
use pseudotest::engine::{
    AnalysisConfig, AnalysisReport, ConfigEcho, Detection, InventorySummary, MethodReport,
    VariantOutcome, SCHEMA_VERSION,
};
use pseudotest::metrics::metrics_for;
use pseudotest::model::{ExclusionReason, Label, TransformationSpec};
use pseudotest::mutation::{MutantOutcome, MutantSpec, MutationOperator};

pub fn fixture(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures").join(name)
}

pub fn config(jobs: usize) -> AnalysisConfig {
    AnalysisConfig {
        jobs,
        ..AnalysisConfig::default()
    }
}

/// A minimal cargo library crate in a temporary directory.
pub fn scratch_crate(files: &[(&str, &str)]) -> tempfile::TempDir {
    let dir = tempfile::tempdir().unwrap();
    fs::write(
        dir.path().join("Cargo.toml"),
        "[package]\nname = \"scratch\"\nversion = \"0.1.0\"\nedition = \"2021\"\n\n[workspace]\n",
    )
    .unwrap();
    for (rel, text) in files {
        let path = dir.path().join(rel);
        fs::create_dir_all(path.parent().unwrap()).unwrap();
        fs::write(path, text).unwrap();
    }
    dir
}

/// Contents of every file under `root` except build output.
pub fn tree_digest(root: &Path) -> BTreeMap<PathBuf, Vec<u8>> {
    walkdir::WalkDir::new(root)
        .sort_by_file_name()
        .into_iter()
        .filter_entry(|e| e.file_name() != "target")
        .map(Result::unwrap)
        .filter(|e| e.file_type().is_file())
        .map(|e| (e.path().strip_prefix(root).unwrap().to_path_buf(), fs::read(e.path()).unwrap()))
        .collect()
}

/// Method entry with a label and outcomes consistent with it.
pub fn synthetic_method(id: String, label: Label, mutants: Option<(u64, u64)>) -> MethodReport {
    let test = "lib::tests::t".to_owned();
    let variant = |detection| VariantOutcome {
        method_id: id.clone(),
        spec: TransformationSpec::strip_body(),
        detection,
        failing_tests: if detection == Detection::DetectedFailure { vec![test.clone()] } else { Vec::new() },
        failure_kind: None,
        retried: false,
        duration_ms: None,
    };
    let (variants, exclusion_reason, covering) = match label {
        Label::PseudoTested => (vec![variant(Detection::Undetected)], None, vec![test.clone()]),
        Label::Required => (vec![variant(Detection::DetectedFailure)], None, vec![test.clone()]),
        Label::Unassessable => (vec![variant(Detection::CompileError)], None, vec![test.clone()]),
        Label::Excluded => (Vec::new(), Some(ExclusionReason::GetterOrSetter), vec![test.clone()]),
        Label::NotCovered => (Vec::new(), None, Vec::new()),
    };
    let mutants = mutants.map(|(detected, total)| {
        (0..total)
            .map(|i| MutantOutcome {
                mutant: MutantSpec {
                    method_id: id.clone(),
                    operator: MutationOperator::RemoveCall,
                    site: pseudotest::model::ByteSpan::new(i as usize, i as usize + 1),
                    replacement: String::new(),
                },
                detected: Some(i < detected),
            })
            .collect::<Vec<_>>()
    });
    let mutation_score = mutants.as_ref().and_then(|ms| {
        let d: Vec<bool> = ms.iter().filter_map(|m| m.detected).collect();
        pseudotest::mutation::method_mutation_score(&d)
    });
    MethodReport {
        id,
        classification: label,
        classification_reason: None,
        exclusion_reason,
        covering_tests: covering,
        variants,
        mutants,
        mutation_score,
    }
}

/// A consistent report from per-method labels.
pub fn synthetic_report(mut methods: Vec<MethodReport>) -> AnalysisReport {
    methods.sort_by(|a, b| a.id.cmp(&b.id));
    let mut coverage = CoverageMap::default();
    for m in &methods {
        if m.classification != Label::NotCovered {
            coverage.covered.insert(m.id.clone());
            coverage
                .covering_tests
                .insert(m.id.clone(), m.covering_tests.iter().cloned().collect::<BTreeSet<_>>());
        }
    }
    coverage.probe_log_digest = "0".repeat(64);
    let pseudo_tested = methods
        .iter()
        .filter(|m| m.classification == Label::PseudoTested)
        .map(|m| m.id.clone())
        .collect();
    AnalysisReport {
        schema_version: SCHEMA_VERSION,
        project: "synthetic".into(),
        config: ConfigEcho {
            timeout_factor: 2.0,
            timeout_constant_ms: 4000,
            full_suite: false,
            fast: false,
            with_mutation_baseline: methods.iter().any(|m| m.mutants.is_some()),
            include: Vec::new(),
            exclude: Vec::new(),
        },
        inventory: InventorySummary {
            n_methods: methods.len(),
            n_files: 1,
            source_digest: "0".repeat(64),
        },
        summary: metrics_for(&methods),
        methods,
        pseudo_tested,
        coverage,
        warnings: Vec::new(),
        timings: None,
    }
}

/// Report with the given per-project counts.
pub fn report_from_counts(n_methods: usize, n_covered: usize, n_mua: usize, n_pseudo: usize) -> AnalysisReport {
    let methods = (0..n_methods)
        .map(|i| {
            let label = if i < n_pseudo {
                Label::PseudoTested
            } else if i < n_mua {
                Label::Required
            } else if i < n_covered {
                Label::Excluded
            } else {
                Label::NotCovered
            };
            synthetic_method(format!("m{i:06}/0"), label, None)
        })
        .collect();
    synthetic_report(methods)
}

/// Published per-project rows: project, #METH, #COV, C_RATE, #MUA, #PSEUDO, PS_RATE.
pub const STUDY_ROWS: [(&str, usize, usize, u32, usize, usize, u32); 21] = [
    ("authzforce", 697, 325, 47, 291, 13, 4),
    ("aws-sdk-java", 177_449, 2314, 1, 1800, 224, 12),
    ("commons-cli", 237, 181, 76, 141, 2, 1),
    ("commons-codec", 536, 449, 84, 426, 12, 3),
    ("commons-collections", 2729, 1270, 47, 1232, 40, 3),
    ("commons-io", 875, 664, 76, 641, 29, 5),
    ("commons-lang", 2421, 1939, 80, 1889, 47, 2),
    ("flink-core", 4133, 1886, 46, 1814, 100, 6),
    ("gson", 624, 499, 80, 477, 10, 2),
    ("jaxen", 958, 616, 64, 569, 11, 2),
    ("jfreechart", 7289, 3639, 50, 3496, 476, 14),
    ("jgit", 6137, 3702, 60, 2539, 296, 12),
    ("joda-time", 3374, 2783, 82, 2526, 82, 3),
    ("jopt-simple", 298, 265, 89, 256, 2, 1),
    ("jsoup", 1110, 844, 76, 751, 28, 4),
    ("sat4j-core", 2218, 613, 28, 585, 143, 24),
    ("pdfbox", 8164, 2418, 30, 2241, 473, 21),
    ("scifio", 3269, 895, 27, 158, 72, 46),
    ("spoon", 4470, 2976, 67, 2938, 213, 7),
    ("urbanairship", 2933, 2140, 73, 1989, 28, 1),
    ("xwiki-rendering", 5002, 2232, 45, 2049, 239, 12),
];
