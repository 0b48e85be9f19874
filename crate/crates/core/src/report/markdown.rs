use std::fmt::Write;

use crate::engine::{AnalysisReport, Detection};
use crate::metrics::percent;
use crate::model::Label;

pub(super) fn label_name(label: Label) -> &'static str {
    match label {
        Label::PseudoTested => "pseudo-tested",
        Label::Required => "required",
        Label::NotCovered => "not covered",
        Label::Excluded => "excluded",
        Label::Unassessable => "unassessable",
    }
}

/// Score as a percentage with one decimal.
pub fn score(s: Option<f64>) -> String {
    match s {
        Some(x) => format!("{:.1}%", x * 100.0),
        None => "n/a".to_owned(),
    }
}

fn code(s: &str) -> String {
    format!("`{}`", s.replace('`', "'"))
}

pub fn to_markdown(report: &AnalysisReport) -> String {
    let s = &report.summary;
    let mut out = String::new();
    let _ = writeln!(out, "# Pseudo-tested methods in {}\n", report.project);
    out.push_str("| Project | #METH | #COV | C_RATE | #MUA | #PSEUDO | PS_RATE | MS_pseudo | MS_req |\n");
    out.push_str("|---|---:|---:|---:|---:|---:|---:|---:|---:|\n");
    let _ = writeln!(
        out,
        "| {} | {} | {} | {} | {} | {} | {} | {} | {} |\n",
        report.project,
        s.n_methods,
        s.n_covered,
        percent(s.c_rate),
        s.n_mua,
        s.n_pseudo,
        percent(s.ps_rate),
        score(s.ms_pseudo),
        score(s.ms_req),
    );

    out.push_str("## Methods under analysis\n\n");
    out.push_str("| Method | Classification | Variants | Detected by |\n");
    out.push_str("|---|---|---|---|\n");
    for m in report.methods.iter().filter(|m| {
        matches!(m.classification, Label::PseudoTested | Label::Required | Label::Unassessable)
    }) {
        let variants: Vec<String> = m
            .variants
            .iter()
            .map(|v| {
                let mark = match v.detection {
                    Detection::Undetected => "survived",
                    Detection::DetectedFailure => "failure",
                    Detection::DetectedTimeout => "timeout",
                    Detection::DetectedCrash => "crash",
                    Detection::CompileError => "no build",
                };
                format!("{} ({mark})", v.spec)
            })
            .collect();
        let mut detecting: Vec<&str> = m
            .variants
            .iter()
            .flat_map(|v| v.failing_tests.iter().map(String::as_str))
            .collect();
        detecting.sort_unstable();
        detecting.dedup();
        let _ = writeln!(
            out,
            "| {} | {} | {} | {} |",
            code(&m.id),
            label_name(m.classification),
            variants.join(", "),
            detecting.join(", ")
        );
    }
    out.push('\n');

    if !report.pseudo_tested.is_empty() {
        out.push_str("## Pseudo-tested methods\n\n");
        for m in report.methods.iter().filter(|m| m.classification == Label::PseudoTested) {
            let tests: Vec<String> = m.covering_tests.iter().map(|t| code(t)).collect();
            let _ = writeln!(out, "- {} covered by {}", code(&m.id), tests.join(", "));
        }
        out.push('\n');
    }

    let excluded: Vec<_> = report
        .methods
        .iter()
        .filter(|m| matches!(m.classification, Label::Excluded | Label::NotCovered))
        .collect();
    if !excluded.is_empty() {
        out.push_str("## Not analyzed\n\n");
        for m in excluded {
            let why = match m.exclusion_reason {
                Some(r) => serde_json::to_value(r)
                    .ok()
                    .and_then(|v| v.as_str().map(str::to_owned))
                    .unwrap_or_default(),
                None => "not covered".to_owned(),
            };
            let _ = writeln!(out, "- {}: {}", code(&m.id), why.replace('_', " "));
        }
        out.push('\n');
    }

    if !report.warnings.is_empty() {
        out.push_str("## Warnings\n\n");
        for w in &report.warnings {
            let _ = writeln!(out, "- {w}");
        }
        out.push('\n');
    }
    out
}
