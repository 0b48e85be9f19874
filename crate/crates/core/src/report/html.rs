use std::fmt::Write;

use super::markdown::{label_name, score};
use crate::engine::AnalysisReport;
use crate::metrics::percent;
use crate::model::Label;

const STYLE: &str = "body{font-family:sans-serif;margin:2em;color:#222}\
table{border-collapse:collapse;margin-bottom:1.5em}\
th,td{border:1px solid #bbb;padding:.3em .6em;text-align:left}\
td.n{text-align:right}\
tr.pseudo_tested td{background:#fde8e8}\
tr.required td{background:#e8f6e8}\
code{font-size:.95em}";

fn esc(s: &str) -> String {
    let mut out = String::with_capacity(s.len());
    for c in s.chars() {
        match c {
            '&' => out.push_str("&amp;"),
            '<' => out.push_str("&lt;"),
            '>' => out.push_str("&gt;"),
            '"' => out.push_str("&quot;"),
            '\'' => out.push_str("&#39;"),
            c => out.push(c),
        }
    }
    out
}

fn css_class(label: Label) -> &'static str {
    match label {
        Label::PseudoTested => "pseudo_tested",
        Label::Required => "required",
        Label::NotCovered => "not_covered",
        Label::Excluded => "excluded",
        Label::Unassessable => "unassessable",
    }
}

/// A single page with inline styles and no external references.
pub fn to_html(report: &AnalysisReport) -> String {
    let s = &report.summary;
    let title = format!("Pseudo-tested methods in {}", esc(&report.project));
    let mut out = String::new();
    let _ = write!(
        out,
        "<!DOCTYPE html>\n<html lang=\"en\">\n<head>\n<meta charset=\"utf-8\">\n<title>{title}</title>\n<style>{STYLE}</style>\n</head>\n<body>\n<h1>{title}</h1>\n"
    );
    out.push_str("<table id=\"summary\">\n<tr><th>#METH</th><th>#COV</th><th>C_RATE</th><th>#MUA</th><th>#PSEUDO</th><th>PS_RATE</th><th>MS_pseudo</th><th>MS_req</th></tr>\n");
    let _ = writeln!(
        out,
        "<tr><td class=\"n\">{}</td><td class=\"n\">{}</td><td class=\"n\">{}</td><td class=\"n\">{}</td><td class=\"n\">{}</td><td class=\"n\">{}</td><td class=\"n\">{}</td><td class=\"n\">{}</td></tr>\n</table>",
        s.n_methods,
        s.n_covered,
        percent(s.c_rate),
        s.n_mua,
        s.n_pseudo,
        percent(s.ps_rate),
        score(s.ms_pseudo),
        score(s.ms_req)
    );

    let with_ms = report.methods.iter().any(|m| m.mutants.is_some());
    out.push_str("<h2>Methods</h2>\n<table id=\"methods\">\n<tr><th>Method</th><th>Classification</th><th>Variants</th><th>Covering tests</th>");
    out.push_str(if with_ms { "<th>MS</th></tr>\n" } else { "</tr>\n" });
    for m in &report.methods {
        let variants: Vec<String> = m
            .variants
            .iter()
            .map(|v| {
                let d = serde_json::to_value(v.detection)
                    .ok()
                    .and_then(|x| x.as_str().map(str::to_owned))
                    .unwrap_or_default();
                format!("{}: {}", esc(v.spec.label()), esc(&d))
            })
            .collect();
        let tests: Vec<String> = m.covering_tests.iter().map(|t| esc(t)).collect();
        let _ = write!(
            out,
            "<tr class=\"{}\"><td><code>{}</code></td><td>{}</td><td>{}</td><td>{}</td>",
            css_class(m.classification),
            esc(&m.id),
            label_name(m.classification),
            variants.join("<br>"),
            tests.join("<br>"),
        );
        if with_ms {
            let ms = if m.mutants.is_some() { score(m.mutation_score) } else { String::new() };
            let _ = write!(out, "<td class=\"n\">{ms}</td>");
        }
        out.push_str("</tr>\n");
    }
    out.push_str("</table>\n");

    if !report.warnings.is_empty() {
        out.push_str("<h2>Warnings</h2>\n<ul>\n");
        for w in &report.warnings {
            let _ = writeln!(out, "<li>{}</li>", esc(w));
        }
        out.push_str("</ul>\n");
    }
    out.push_str("</body>\n</html>\n");
    out
}
