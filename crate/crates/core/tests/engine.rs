mod common;

use common::{config, fixture};
use pseudotest::engine::{check_invariants, AnalysisConfig, Detection};
use pseudotest::model::{ExclusionReason, Label};
use pseudotest::mutation::MutationOperator;
use pseudotest::report::to_json;
use pseudotest::{analyze, Error};

#[test]
fn vlist_classification() {
    let report = analyze(&fixture("vlist"), &config(2)).unwrap();
    check_invariants(&report).unwrap();
    assert_eq!(report.pseudo_tested, ["VList::incrementVersion/0"]);
    assert_eq!(report.label("VList::add/1"), Some(Label::Required));
    assert_eq!(report.label("VList::size/0"), Some(Label::Required));
    let size = report.method("VList::size/0").unwrap();
    let labels: Vec<&str> = size.variants.iter().map(|v| v.spec.label()).collect();
    assert_eq!(labels, ["int_zero", "int_one"]);
    assert_eq!(size.variants[0].detection, Detection::DetectedFailure);
    assert_eq!(size.variants[1].detection, Detection::Undetected);
    assert!(report.timings.is_none());
}

#[test]
fn asserting_the_effect_makes_the_method_required() {
    // Same code, one extra assertion on the version counter.
    let weak = analyze(&fixture("vlist"), &config(2)).unwrap();
    let strong = analyze(&fixture("vlist_asserted"), &config(2)).unwrap();
    for m in &weak.methods {
        if m.classification == Label::Required {
            assert_eq!(strong.label(&m.id), Some(Label::Required), "{}", m.id);
        }
    }
    assert_eq!(strong.label("VList::incrementVersion/0"), Some(Label::Required));
    assert!(strong.pseudo_tested.is_empty());
}

#[test]
fn well_specified_project_has_no_pseudo_tested_methods() {
    let report = analyze(&fixture("specified"), &config(4)).unwrap();
    check_invariants(&report).unwrap();
    assert!(report.pseudo_tested.is_empty(), "{:?}", report.pseudo_tested);
    assert_eq!(report.summary.n_mua, 9);
    assert!(report.methods.iter().all(|m| m.classification == Label::Required));
}

#[test]
fn guard_method_with_mutation_baseline() {
    let cfg = AnalysisConfig {
        with_mutation_baseline: true,
        ..config(2)
    };
    let report = analyze(&fixture("guard"), &cfg).unwrap();
    check_invariants(&report).unwrap();
    let guard = report.method("AnyOfAny::checkNumberOfArgs/1").unwrap();
    assert_eq!(guard.classification, Label::PseudoTested);
    let mutants = guard.mutants.as_ref().unwrap();
    assert_eq!(mutants.len(), 5);
    let detected: Vec<MutationOperator> = mutants
        .iter()
        .filter(|m| m.detected == Some(true))
        .map(|m| m.mutant.operator)
        .collect();
    assert_eq!(detected.len(), 2);
    assert!(mutants.iter().all(|m| m.detected.is_some()));
    assert_eq!(guard.mutation_score, Some(0.4));
    assert_eq!(report.summary.ms_pseudo, Some(0.4));
    assert_eq!(report.label("AnyOfAny::evaluate/1"), Some(Label::Required));
}

#[test]
fn timeouts_count_as_detection() {
    let cfg = AnalysisConfig {
        record_timings: true,
        ..config(1)
    };
    let report = analyze(&fixture("hang"), &cfg).unwrap();
    let tick = report.method("Countdown::tick/0").unwrap();
    assert_eq!(tick.classification, Label::Required);
    assert_eq!(tick.variants[0].detection, Detection::DetectedTimeout);
    let budget = report.timings.as_ref().unwrap().budget_ms;
    let took = tick.variants[0].duration_ms.unwrap();
    assert!(took as f64 <= budget as f64 * 1.5, "{took} ms against a {budget} ms budget");
    assert!(took >= budget, "stopped before the budget: {took} < {budget}");
}

#[test]
fn crashes_count_as_detection() {
    let report = analyze(&fixture("recursion"), &config(2)).unwrap();
    let stop = report.method("should_stop/1").unwrap();
    assert_eq!(stop.classification, Label::Required);
    let by_label = |l: &str| stop.variants.iter().find(|v| v.spec.label() == l).unwrap().detection;
    assert_eq!(by_label("false_val"), Detection::DetectedCrash);
    assert_eq!(by_label("true_val"), Detection::DetectedFailure);
}

#[test]
fn exclusions_and_coverage() {
    let report = analyze(&fixture("coverage_mix"), &config(4)).unwrap();
    check_invariants(&report).unwrap();
    let reason = |id: &str| report.method(id).unwrap().exclusion_reason;
    assert_eq!(report.label("geometry::shapes::Rect::describe/0"), Some(Label::NotCovered));
    assert_eq!(reason("geometry::shapes::Rect::width/0"), Some(ExclusionReason::GetterOrSetter));
    assert_eq!(reason("geometry::shapes::Rect::reset/0"), Some(ExclusionReason::EmptyUnit));
    assert_eq!(report.pseudo_tested, ["geometry::shapes::Rect::scale/1"]);
    assert_eq!(report.label("geometry::shapes::Rect::area/0"), Some(Label::Required));
    assert_eq!(report.summary.n_mua, 2);
    assert_eq!(report.summary.n_covered, 8);
    for m in &report.methods {
        if matches!(m.classification, Label::Excluded | Label::NotCovered) {
            assert!(m.variants.is_empty(), "{}", m.id);
        }
    }
}

#[test]
fn include_and_exclude_filters() {
    let cfg = AnalysisConfig {
        exclude: vec!["VList::incrementVersion/*".into()],
        ..config(2)
    };
    let report = analyze(&fixture("vlist"), &cfg).unwrap();
    assert_eq!(report.label("VList::incrementVersion/0"), Some(Label::Excluded));
    assert_eq!(
        report.method("VList::incrementVersion/0").unwrap().exclusion_reason,
        Some(ExclusionReason::UserFiltered)
    );
    assert!(report.pseudo_tested.is_empty());

    let cfg = AnalysisConfig {
        include: vec!["*::size/*".into()],
        ..config(2)
    };
    let report = analyze(&fixture("vlist"), &cfg).unwrap();
    assert_eq!(report.summary.n_mua, 1);
    assert_eq!(report.label("VList::size/0"), Some(Label::Required));
}

#[test]
fn fast_mode_stops_at_the_first_detection() {
    let cfg = AnalysisConfig {
        fast: true,
        ..config(2)
    };
    let report = analyze(&fixture("specified"), &cfg).unwrap();
    let full = analyze(&fixture("specified"), &config(2)).unwrap();
    for (f, s) in report.methods.iter().zip(&full.methods) {
        assert_eq!(f.classification, s.classification, "{}", f.id);
        let first = s.variants.iter().position(|v| v.detection.is_detected()).unwrap();
        assert_eq!(f.variants.len(), first + 1, "{}", f.id);
    }
}

#[test]
fn full_suite_agrees_with_covering_tests() {
    for name in ["vlist", "coverage_mix"] {
        let full = AnalysisConfig {
            full_suite: true,
            ..config(2)
        };
        let a = analyze(&fixture(name), &config(2)).unwrap();
        let b = analyze(&fixture(name), &full).unwrap();
        for (x, y) in a.methods.iter().zip(&b.methods) {
            assert_eq!(x.classification, y.classification, "{name} {}", x.id);
            let dx: Vec<_> = x.variants.iter().map(|v| v.detection).collect();
            let dy: Vec<_> = y.variants.iter().map(|v| v.detection).collect();
            assert_eq!(dx, dy, "{name} {}", x.id);
        }
    }
}

#[test]
fn schedule_does_not_change_the_report() {
    for name in ["specified", "coverage_mix"] {
        let one = to_json(&analyze(&fixture(name), &config(1)).unwrap()).unwrap();
        let many = to_json(&analyze(&fixture(name), &config(4)).unwrap()).unwrap();
        assert_eq!(one, many, "{name}");
    }
}

#[test]
fn trivial_project_has_nothing_under_analysis() {
    let report = analyze(&fixture("trivial"), &config(1)).unwrap();
    assert_eq!(report.summary.n_mua, 0);
    assert_eq!(report.summary.ps_rate, None);
}

#[test]
fn unusable_projects_are_rejected() {
    assert!(matches!(
        analyze(&fixture("failing"), &config(1)),
        Err(Error::BaselineFailure { flaky: false, .. })
    ));
    assert!(matches!(
        analyze(&fixture("flaky"), &config(1)),
        Err(Error::BaselineFailure { flaky: true, .. })
    ));
    let nothing = tempfile::tempdir().unwrap();
    assert!(matches!(analyze(nothing.path(), &config(1)), Err(Error::NotAProject(_))));
    assert!(matches!(analyze(&fixture("vlist"), &config(0)), Err(Error::Precondition(_))));
    let bad_glob = AnalysisConfig {
        include: vec!["[".into()],
        ..config(1)
    };
    assert!(matches!(analyze(&fixture("vlist"), &bad_glob), Err(Error::Precondition(_))));
}
