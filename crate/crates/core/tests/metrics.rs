mod common;

use common::{report_from_counts, synthetic_method, synthetic_report, STUDY_ROWS};
use proptest::prelude::*;
use pseudotest::metrics::{mutation_tallies, percent, project_metrics, ProjectMetrics};
use pseudotest::model::Label;
use pseudotest::stats::pearson;

#[test]
fn published_rates_reproduce() {
    for (project, meth, cov, c_rate, mua, pseudo, ps_rate) in STUDY_ROWS {
        let m = ProjectMetrics::from_counts(meth, cov, mua, pseudo);
        assert_eq!(percent(m.c_rate), format!("{c_rate}%"), "{project} C_RATE");
        assert_eq!(percent(m.ps_rate), format!("{ps_rate}%"), "{project} PS_RATE");
    }
}

#[test]
fn published_rates_reproduce_through_reports() {
    // The largest row is expensive to materialize and adds nothing.
    for (project, meth, cov, c_rate, mua, pseudo, ps_rate) in STUDY_ROWS.iter().filter(|r| r.1 < 20_000) {
        let m = project_metrics(&report_from_counts(*meth, *cov, *mua, *pseudo));
        assert_eq!((m.n_methods, m.n_covered, m.n_mua, m.n_pseudo), (*meth, *cov, *mua, *pseudo));
        assert_eq!(percent(m.c_rate), format!("{c_rate}%"), "{project}");
        assert_eq!(percent(m.ps_rate), format!("{ps_rate}%"), "{project}");
    }
}

#[test]
fn coverage_and_pseudo_rates_correlate_negatively() {
    let pairs: Vec<(f64, f64)> = STUDY_ROWS
        .iter()
        .map(|r| {
            let m = ProjectMetrics::from_counts(r.1, r.2, r.4, r.5);
            (m.c_rate.unwrap(), m.ps_rate.unwrap())
        })
        .collect();
    let r = pearson(&pairs).unwrap();
    assert!((r.statistic + 0.67).abs() <= 0.05, "r = {}", r.statistic);
    assert!(r.p_value < 0.01, "p = {}", r.p_value);

    let rendered: Vec<(f64, f64)> = STUDY_ROWS.iter().map(|r| (f64::from(r.3), f64::from(r.6))).collect();
    let r2 = pearson(&rendered).unwrap();
    assert!((r2.statistic + 0.67).abs() <= 0.05);
    assert!(r2.p_value < 0.01);
}

#[test]
fn percent_rendering() {
    assert_eq!(percent(None), "n/a");
    assert_eq!(percent(Some(0.0)), "0%");
    assert_eq!(percent(Some(0.005)), "1%");
    assert_eq!(percent(Some(0.125)), "13%");
    assert_eq!(percent(Some(1.0)), "100%");
    assert_eq!(percent(Some(2.0 / 3.0)), "67%");
}

#[test]
fn pooled_mutation_scores() {
    let report = synthetic_report(vec![
        synthetic_method("a/0".into(), Label::PseudoTested, Some((2, 5))),
        synthetic_method("b/0".into(), Label::PseudoTested, Some((0, 1))),
        synthetic_method("c/0".into(), Label::Required, Some((3, 3))),
        synthetic_method("d/0".into(), Label::Excluded, None),
    ]);
    let m = project_metrics(&report);
    assert_eq!(m.ms_pseudo, Some(2.0 / 6.0));
    assert_eq!(m.ms_req, Some(1.0));
}

fn labels() -> impl Strategy<Value = Vec<(Label, Option<(u64, u64)>)>> {
    let label = prop_oneof![
        Just(Label::PseudoTested),
        Just(Label::Required),
        Just(Label::Unassessable),
        Just(Label::Excluded),
        Just(Label::NotCovered),
    ];
    let mutants = prop::option::of((0u64..6).prop_flat_map(|t| (0..=t, Just(t))));
    prop::collection::vec((label, mutants), 0..40)
}

proptest! {
    #[test]
    fn counts_match_a_recount(methods in labels()) {
        let report = synthetic_report(
            methods
                .iter()
                .enumerate()
                .map(|(i, (l, ms))| synthetic_method(format!("m{i:03}/0"), *l, *ms))
                .collect(),
        );
        let m = project_metrics(&report);
        let count = |f: &dyn Fn(Label) -> bool| methods.iter().filter(|(l, _)| f(*l)).count();
        prop_assert_eq!(m.n_methods, methods.len());
        prop_assert_eq!(m.n_covered, count(&|l| l != Label::NotCovered));
        prop_assert_eq!(m.n_mua, count(&|l| matches!(l, Label::PseudoTested | Label::Required | Label::Unassessable)));
        prop_assert_eq!(m.n_pseudo, count(&|l| l == Label::PseudoTested));
        prop_assert!(m.n_pseudo <= m.n_mua && m.n_mua <= m.n_covered && m.n_covered <= m.n_methods);

        // Brute-force pooled scores straight from the generated pairs.
        let pool = |want: Label| {
            let (d, t) = methods
                .iter()
                .filter(|(l, _)| *l == want)
                .filter_map(|(_, ms)| *ms)
                .fold((0u64, 0u64), |acc, (d, t)| (acc.0 + d, acc.1 + t));
            (t > 0).then(|| d as f64 / t as f64)
        };
        prop_assert_eq!(m.ms_pseudo, pool(Label::PseudoTested));
        prop_assert_eq!(m.ms_req, pool(Label::Required));
        let (p, r) = mutation_tallies(&report.methods);
        prop_assert_eq!(p.score(), m.ms_pseudo);
        prop_assert_eq!(r.score(), m.ms_req);
    }

    #[test]
    fn ps_rate_grows_with_pseudo_count(mua in 1usize..500, pseudo in 0usize..500) {
        let pseudo = pseudo.min(mua - 1);
        let lo = ProjectMetrics::from_counts(mua, mua, mua, pseudo);
        let hi = ProjectMetrics::from_counts(mua, mua, mua, pseudo + 1);
        prop_assert!(hi.ps_rate.unwrap() > lo.ps_rate.unwrap());
        prop_assert!((0.0..=1.0).contains(&hi.ps_rate.unwrap()));
    }
}

#[test]
fn empty_project_has_undefined_rates() {
    let m = project_metrics(&synthetic_report(Vec::new()));
    assert_eq!(m.c_rate, None);
    assert_eq!(m.ps_rate, None);
    assert_eq!(m.ms_pseudo, None);
    let m = ProjectMetrics::from_counts(4, 2, 0, 0);
    assert_eq!(percent(m.c_rate), "50%");
    assert_eq!(percent(m.ps_rate), "n/a");
}
