//! Project-level counts and rates derived from per-method classifications.

use serde::{Deserialize, Serialize};

use crate::engine::{AnalysisReport, MethodReport};
use crate::model::Label;
use crate::stats::Tally;

/// Counts and rates for one analyzed project, at full precision.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct ProjectMetrics {
    pub n_methods: usize,
    pub n_covered: usize,
    pub c_rate: Option<f64>,
    /// Methods under analysis: covered and not excluded.
    pub n_mua: usize,
    pub n_pseudo: usize,
    pub ps_rate: Option<f64>,
    pub ms_pseudo: Option<f64>,
    pub ms_req: Option<f64>,
}

fn ratio(num: usize, den: usize) -> Option<f64> {
    (den > 0).then(|| num as f64 / den as f64)
}

impl ProjectMetrics {
    /// Metrics from raw counts, without mutation scores.
    pub fn from_counts(n_methods: usize, n_covered: usize, n_mua: usize, n_pseudo: usize) -> Self {
        ProjectMetrics {
            n_methods,
            n_covered,
            c_rate: ratio(n_covered, n_methods),
            n_mua,
            n_pseudo,
            ps_rate: ratio(n_pseudo, n_mua),
            ms_pseudo: None,
            ms_req: None,
        }
    }
}

pub fn project_metrics(report: &AnalysisReport) -> ProjectMetrics {
    metrics_for(&report.methods)
}

pub fn metrics_for(methods: &[MethodReport]) -> ProjectMetrics {
    let count = |pred: fn(Label) -> bool| methods.iter().filter(|m| pred(m.classification)).count();
    let n_covered = count(|l| l != Label::NotCovered);
    let n_mua = count(|l| matches!(l, Label::PseudoTested | Label::Required | Label::Unassessable));
    let n_pseudo = count(|l| l == Label::PseudoTested);
    let (pseudo, req) = mutation_tallies(methods);
    ProjectMetrics {
        ms_pseudo: pseudo.score(),
        ms_req: req.score(),
        ..ProjectMetrics::from_counts(methods.len(), n_covered, n_mua, n_pseudo)
    }
}

/// Mutants pooled over pseudo-tested methods and over required methods.
pub fn mutation_tallies(methods: &[MethodReport]) -> (Tally, Tally) {
    let mut pseudo = Tally::default();
    let mut req = Tally::default();
    for m in methods {
        let target = match m.classification {
            Label::PseudoTested => &mut pseudo,
            Label::Required => &mut req,
            _ => continue,
        };
        for outcome in m.mutants.iter().flatten() {
            if let Some(detected) = outcome.detected {
                target.generated += 1;
                target.detected += u64::from(detected);
            }
        }
    }
    (pseudo, req)
}

/// Whole-percent rendering, rounding halves up.
pub fn percent(rate: Option<f64>) -> String {
    match rate {
        Some(r) => format!("{}%", (r * 100.0 + 0.5 + 1e-9).floor() as i64),
        None => "n/a".to_owned(),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rates_follow_counts() {
        let m = ProjectMetrics::from_counts(400, 325, 291, 13);
        assert!((m.ps_rate.unwrap() - 13.0 / 291.0).abs() < 1e-12);
        assert_eq!(percent(m.ps_rate), "4%");
        let m = ProjectMetrics::from_counts(237, 181, 150, 3);
        assert!((m.c_rate.unwrap() - 0.764).abs() < 1e-3);
        assert_eq!(percent(m.c_rate), "76%");
    }

    #[test]
    fn empty_denominators_leave_rates_absent() {
        let m = ProjectMetrics::from_counts(5, 2, 0, 0);
        assert_eq!(m.ps_rate, None);
        let m = ProjectMetrics::from_counts(0, 0, 0, 0);
        assert_eq!(m.c_rate, None);
        assert_eq!(percent(m.c_rate), "n/a");
    }

    #[test]
    fn halves_round_up() {
        assert_eq!(percent(Some(0.125)), "13%");
        assert_eq!(percent(Some(0.124)), "12%");
        assert_eq!(percent(Some(0.145)), "15%");
    }
}
