use std::path::{Path, PathBuf};
use std::time::Instant;

use depgraph::microeval::{extract_suite, load_suite, run_suite, Mode, Tag};
use depgraph::NormalizationProfile;

fn manifest() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures/minisuite/manifest.txt")
}

#[test]
fn cleaned_recall_is_complete() {
    let start = Instant::now();
    let suite = load_suite(&manifest()).unwrap();
    let report = run_suite(&suite, Mode::Cleaned, &NormalizationProfile::default()).unwrap();
    for (case, src, tgt) in &report.missed {
        eprintln!("missed {case}: {src} -> {tgt}");
    }
    assert_eq!(report.total.correct, report.total.expected);
    assert!(start.elapsed().as_secs_f64() < 10.0);
}

#[test]
fn initial_recall_misses_exactly_the_dynamic_edges() {
    let suite = load_suite(&manifest()).unwrap();
    let report = run_suite(&suite, Mode::Initial, &NormalizationProfile::default()).unwrap();
    assert_eq!(report.total.expected, suite.edge_count());
    assert_eq!(
        report.total.expected - report.total.correct,
        suite.count_tag(Tag::Dynamic)
    );
}

#[test]
fn dynamic_cases_emit_no_edges() {
    let suite = load_suite(&manifest()).unwrap();
    let graphs = extract_suite(&suite, false).unwrap();
    let dynamic: Vec<_> = suite.cases.iter().filter(|c| c.category == "dynamic").collect();
    assert!(!dynamic.is_empty());
    for case in dynamic {
        assert_eq!(graphs[&case.id].edge_count(), 0, "{}", case.id);
    }
}

#[test]
fn covers_the_feature_categories() {
    let suite = load_suite(&manifest()).unwrap();
    let categories: std::collections::BTreeSet<_> = suite.cases.iter().map(|c| c.category.as_str()).collect();
    assert!(categories.len() >= 13, "{categories:?}");
}
