//! Acceptance checks. Prints one PASS/FAIL line per criterion and exits
//! non-zero when any criterion fails.

#[path = "../../core/tests/common/mod.rs"]
mod common;

use std::cell::Cell;
use std::collections::{BTreeMap, BTreeSet};
use std::path::{Path, PathBuf};
use std::time::{Duration, Instant};

use depgraph::macroeval::{compare, percent, OverlapReport, RegionTable, ToolEdgeList};
use depgraph::microeval::{
    clean_suite, cleanup_tags, evaluate_recall, extract_suite, load_suite, run_suite, ExpectedEdge, Mode,
    Tag, TestCase, TestSuite,
};
use depgraph::model::write_edges_csv_string;
use depgraph::resolver::{
    c3_linearize, propagate_fixpoint_ordered, AssignmentGraph, IterationOrder, MroError,
};
use depgraph::{
    read_edges_csv, DependencyEdge, DependencyGraph, EdgeKind, EntityKind, EntityRef, NormalizationProfile,
};
use depgraph_cli::{cmd_extract, ExtractArgs, EXIT_OK};
use proptest::prelude::*;
use proptest::test_runner::{Config, TestRunner};

use common::*;

const RECALL_TOLERANCE: f64 = 0.005;
const PERCENT_TOLERANCE: i64 = 1;

type Outcome = Result<String, String>;
type Criterion = (&'static str, fn() -> Outcome, Duration);

fn fixtures() -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("../../fixtures")
}

fn ensure(ok: bool, message: impl Into<String>) -> Result<(), String> {
    if ok {
        Ok(())
    } else {
        Err(message.into())
    }
}

/// A suite with `static_`, `external` and `dynamic` edges spread over cases
/// of ten edges each.
fn tagged_suite(static_: usize, external: usize, dynamic: usize) -> TestSuite {
    let tags = std::iter::repeat(Tag::Static)
        .take(static_)
        .chain(std::iter::repeat(Tag::External).take(external))
        .chain(std::iter::repeat(Tag::Dynamic).take(dynamic));
    let mut suite = TestSuite::default();
    for (i, tag) in tags.enumerate() {
        if i % 10 == 0 {
            suite.cases.push(TestCase {
                id: format!("case{}", i / 10),
                category: format!("cat{}", i / 40),
                source_dir: PathBuf::new(),
                expected: Vec::new(),
            });
        }
        suite.cases.last_mut().unwrap().expected.push(ExpectedEdge {
            source: "main".into(),
            target: format!("main.f{i}"),
            tag,
        });
    }
    suite
}

/// An actual graph containing the first `found` static edges of `suite`.
fn found_graph(suite: &TestSuite, found: usize) -> DependencyGraph {
    let mut g = DependencyGraph::new();
    let statics = suite
        .cases
        .iter()
        .flat_map(|c| &c.expected)
        .filter(|e| e.tag == Tag::Static);
    for e in statics.take(found) {
        let src = EntityRef::internal(&e.source, EntityKind::Module, "main.py", None).unwrap();
        let tgt = EntityRef::internal(&e.target, EntityKind::Function, "main.py", None).unwrap();
        g.add_edge(DependencyEdge::new(src, tgt, EdgeKind::Call, 1).unwrap());
    }
    g
}

fn cleanup_arithmetic() -> Outcome {
    let mut parts = Vec::new();
    for (name, total, external, dynamic, cleaned) in [("Judge", 112, 11, 6, 95), ("PyCG", 223, 15, 45, 163)] {
        let suite = tagged_suite(total - external - dynamic, external, dynamic);
        ensure(
            suite.edge_count() == total,
            format!("{name}: fixture has {} edges", suite.edge_count()),
        )?;
        let out = clean_suite(&suite, &cleanup_tags());
        let got = out.suite.edge_count();
        ensure(
            got == cleaned
                && out.removed_edges[&Tag::External] == external
                && out.removed_edges[&Tag::Dynamic] == dynamic,
            format!("{name}: {total} - {external} - {dynamic} gave {got}, want {cleaned}"),
        )?;
        parts.push(format!("{name} {total}-{external}-{dynamic}={got}"));
    }
    Ok(parts.join(", "))
}

fn recall_arithmetic() -> Outcome {
    let profile = NormalizationProfile::default();
    let judge = tagged_suite(95, 11, 6);
    let pycg = tagged_suite(163, 15, 45);
    let checks = [
        (
            "Judge initial",
            evaluate_recall(&found_graph(&judge, 95), &judge, &profile, Mode::Initial),
            0.85,
        ),
        (
            "PyCG initial",
            evaluate_recall(&found_graph(&pycg, 151), &pycg, &profile, Mode::Initial),
            0.68,
        ),
        (
            "PyCG cleaned",
            evaluate_recall(
                &found_graph(&pycg, 151),
                &clean_suite(&pycg, &cleanup_tags()).suite,
                &profile,
                Mode::Cleaned,
            ),
            0.93,
        ),
    ];
    let mut parts = Vec::new();
    for (name, report, want) in checks {
        let r = report.total.recall();
        ensure(
            (r - want).abs() <= RECALL_TOLERANCE,
            format!(
                "{name}: {}/{} = {r:.4}, want {want}",
                report.total.correct, report.total.expected
            ),
        )?;
        parts.push(format!(
            "{name} {}/{}={r:.3}",
            report.total.correct, report.total.expected
        ));
    }
    Ok(parts.join(", "))
}

fn load_regions(file: &str) -> Result<OverlapReport, String> {
    let text = std::fs::read_to_string(fixtures().join("regions").join(file)).map_err(|e| e.to_string())?;
    let table: RegionTable = serde_json::from_str(&text).map_err(|e| e.to_string())?;
    table.into_report().map_err(|e| e.to_string())
}

fn ratio_arithmetic() -> Outcome {
    let mut parts = Vec::new();
    for (file, union, total, shared, unique, want) in [
        ("thealgorithms_python.json", 1733, 1405, 761, 644, [81, 44, 37]),
        ("google_guava.json", 9249, 8382, 6592, 1790, [91, 71, 19]),
    ] {
        let report = load_regions(file)?;
        let t = &report.tools[0];
        ensure(
            report.union_size == union && (t.total, t.shared, t.unique) == (total, shared, unique),
            format!("{file}: region fixture does not reproduce the published counts"),
        )?;
        let got = [t.total_ratio, t.shared_ratio, t.unique_ratio]
            .map(|r| percent((r * 1e9).round() as usize, 1_000_000_000));
        for (g, w) in got.iter().zip(want) {
            ensure(
                (*g as i64 - w as i64).abs() <= PERCENT_TOLERANCE,
                format!("{file}: got {got:?}%, want {want:?}%"),
            )?;
        }
        parts.push(format!(
            "{} {}/{}/{} of {} -> {:?}%",
            t.name, total, shared, unique, union, got
        ));
    }
    Ok(parts.join("; "))
}

fn overlap_oracle() -> Outcome {
    let mut runner = TestRunner::new(Config {
        cases: 500,
        failure_persistence: None,
        ..Config::default()
    });
    let instances = Cell::new(0);
    runner
        .run(&tool_sets(), |sets| {
            instances.set(instances.get() + 1);
            let lists: Vec<ToolEdgeList> = sets
                .iter()
                .enumerate()
                .map(|(i, s)| ToolEdgeList::new(format!("T{i}"), s.iter().map(|e| format!("e{e}"))))
                .collect();
            let report = compare(&lists).unwrap();
            let oracle = brute_regions(&sets);
            let union: BTreeSet<u32> = sets.iter().flatten().copied().collect();
            prop_assert_eq!(report.regions.iter().map(|r| r.count).sum::<usize>(), union.len());
            for region in &report.regions {
                let members: Vec<usize> = region.tools.iter().map(|t| t[1..].parse().unwrap()).collect();
                prop_assert_eq!(region.count, oracle.get(&members).copied().unwrap_or(0));
            }
            for t in &report.tools {
                prop_assert_eq!(t.total, t.shared + t.unique);
            }
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok(format!(
        "{} random instances agree with per-element classification",
        instances.get()
    ))
}

fn resolver_suite() -> Outcome {
    let suite = load_suite(&fixtures().join("minisuite/manifest.txt")).map_err(|e| e.to_string())?;
    let categories: BTreeSet<&str> = suite.cases.iter().map(|c| c.category.as_str()).collect();
    let named = [
        "returns",
        "lambdas",
        "classes",
        "args",
        "decorators",
        "mro",
        "dicts",
        "exceptions",
        "imports",
        "assignments",
        "direct_calls",
        "builtins",
        "generators",
        "functions",
    ];
    let covered = named.iter().filter(|c| categories.contains(*c)).count();
    ensure(
        covered >= 12,
        format!("only {covered} of the named categories covered"),
    )?;
    let report =
        run_suite(&suite, Mode::Cleaned, &NormalizationProfile::default()).map_err(|e| e.to_string())?;
    ensure(
        report.total.correct == report.total.expected,
        format!(
            "cleaned recall {}/{}; missed {:?}",
            report.total.correct, report.total.expected, report.missed
        ),
    )?;
    let graphs = extract_suite(&suite, false).map_err(|e| e.to_string())?;
    let dynamic: Vec<&TestCase> = suite
        .cases
        .iter()
        .filter(|c| c.expected.iter().any(|e| e.tag == Tag::Dynamic))
        .collect();
    for case in &dynamic {
        let n = graphs[&case.id].edge_count();
        ensure(n == 0, format!("dynamic case {} emits {n} edges", case.id))?;
    }
    Ok(format!(
        "{covered} categories, cleaned recall {}/{} = 1.00, {} dynamic cases with 0 edges",
        report.total.correct,
        report.total.expected,
        dynamic.len()
    ))
}

fn fixpoint_properties() -> Outcome {
    // Termination on the bundled fixtures: extraction fails if the budget runs out.
    let suite = load_suite(&fixtures().join("minisuite/manifest.txt")).map_err(|e| e.to_string())?;
    extract_suite(&suite, true).map_err(|e| e.to_string())?;
    depgraph::extract_project(&fixtures().join("project"), &Default::default()).map_err(|e| e.to_string())?;

    let mut runner = TestRunner::new(Config {
        cases: 256,
        failure_persistence: None,
        ..Config::default()
    });
    let instances = Cell::new(0);
    runner
        .run(&random_graph(), |g| {
            instances.set(instances.get() + 1);
            let mut graph = AssignmentGraph::new();
            for n in 0..g.nodes {
                graph.node(n);
            }
            for &(a, b) in &g.edges {
                graph.add_edge(a, b);
            }
            for &(n, v) in &g.seeds {
                graph.seed(n, v);
            }
            let asc = propagate_fixpoint_ordered(&graph, 10_000, IterationOrder::Ascending).unwrap();
            let desc = propagate_fixpoint_ordered(&graph, 10_000, IterationOrder::Descending).unwrap();
            let expected = closure_values(g.nodes, &g.edges, &g.seeds);
            for (n, values) in expected.iter().enumerate() {
                prop_assert_eq!(asc.values(&n).unwrap(), values);
                prop_assert_eq!(desc.values(&n).unwrap(), values);
            }
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok(format!(
        "fixtures terminate; {} random graphs match seed reachability in both orders",
        instances.get()
    ))
}

fn c3_linearization() -> Outcome {
    let bases: BTreeMap<&str, Vec<&str>> = [
        ("D", vec!["B", "C"]),
        ("B", vec!["A"]),
        ("C", vec!["A"]),
        ("A", vec![]),
    ]
    .into();
    let mro = c3_linearize(&"D", |c| bases[c].clone()).map_err(|e| e.to_string())?;
    ensure(mro == ["D", "B", "C", "A"], format!("diamond gave {mro:?}"))?;

    let bad: BTreeMap<&str, Vec<&str>> = [("X", vec![]), ("Y", vec!["X"]), ("Z", vec!["X", "Y"])].into();
    ensure(
        matches!(
            c3_linearize(&"Z", |c| bad[c].clone()),
            Err(MroError::Inconsistent { .. })
        ),
        "inconsistent hierarchy was linearized",
    )?;

    let mut runner = TestRunner::new(Config {
        cases: 200,
        failure_persistence: None,
        ..Config::default()
    });
    let (hierarchies, inconsistent) = (Cell::new(0), Cell::new(0));
    runner
        .run(&random_hierarchy(), |h| {
            hierarchies.set(hierarchies.get() + 1);
            for class in 0..h.len() {
                let ours = c3_linearize(&class, |c| h[*c].clone()).ok();
                let oracle = naive_c3(&h, class);
                prop_assert_eq!(&ours, &oracle);
                match ours {
                    Some(mro) => {
                        prop_assert!(is_subsequence(&h[class], &mro));
                        for &b in &h[class] {
                            prop_assert!(is_subsequence(&naive_c3(&h, b).unwrap(), &mro));
                        }
                    }
                    None => inconsistent.set(inconsistent.get() + 1),
                }
            }
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok(format!(
        "diamond [D, B, C, A]; inconsistent order rejected; {} random hierarchies match the naive merge ({} classes unlinearizable)",
        hierarchies.get(),
        inconsistent.get()
    ))
}

fn arb_graph() -> impl Strategy<Value = DependencyGraph> {
    let kind = prop::sample::select(EdgeKind::ALL.to_vec());
    prop::collection::vec((0usize..15, 0usize..15, kind, 0u32..100, any::<bool>()), 0..40).prop_map(|rows| {
        let mut g = DependencyGraph::new();
        for (s, t, kind, line, external) in rows {
            let src =
                EntityRef::internal(format!("pkg.m{s}"), EntityKind::Function, "pkg/m.py", None).unwrap();
            let tgt = if external {
                EntityRef::external(format!("ext.f{t}"), EntityKind::Unknown).unwrap()
            } else {
                EntityRef::internal(format!("pkg.m{t}"), EntityKind::Function, "pkg/m.py", None).unwrap()
            };
            // Kind combinations the model rejects, e.g. inheriting from a function.
            if let Ok(edge) = DependencyEdge::new(src, tgt, kind, line) {
                g.add_edge(edge);
            }
        }
        g
    })
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut outputs = Vec::new();
    for i in 0..2 {
        let out = dir.path().join(format!("run{i}.csv"));
        let args = ExtractArgs {
            root: fixtures().join("project"),
            out: Some(out.clone()),
            ..Default::default()
        };
        let code = cmd_extract(&args, &mut std::io::sink(), &mut std::io::sink());
        ensure(code == EXIT_OK, format!("extract exited with {code}"))?;
        outputs.push(std::fs::read(&out).map_err(|e| e.to_string())?);
    }
    ensure(outputs[0] == outputs[1], "two runs differ")?;
    let golden = std::fs::read(fixtures().join("project.expected.csv")).map_err(|e| e.to_string())?;
    ensure(
        outputs[0] == golden,
        "output differs from the hand-derived edge list",
    )?;

    let mut runner = TestRunner::new(Config {
        cases: 256,
        failure_persistence: None,
        ..Config::default()
    });
    runner
        .run(&arb_graph(), |g| {
            let back = read_edges_csv(write_edges_csv_string(&g).as_bytes()).unwrap();
            prop_assert_eq!(back, g);
            Ok(())
        })
        .map_err(|e| e.to_string())?;
    Ok(format!(
        "2 runs byte-identical ({} bytes, matches golden); 256 random graphs round-trip",
        outputs[0].len()
    ))
}

fn main() {
    let criteria: [Criterion; 8] = [
        ("1 cleanup arithmetic", cleanup_arithmetic, Duration::from_secs(1)),
        ("2 recall arithmetic", recall_arithmetic, Duration::from_secs(1)),
        (
            "3 macro ratio arithmetic",
            ratio_arithmetic,
            Duration::from_secs(1),
        ),
        ("4 overlap oracle", overlap_oracle, Duration::from_secs(5)),
        ("5 resolver mini-suite", resolver_suite, Duration::from_secs(10)),
        (
            "6 fixpoint properties",
            fixpoint_properties,
            Duration::from_secs(5),
        ),
        ("7 C3 linearization", c3_linearization, Duration::from_secs(2)),
        ("8 determinism", determinism, Duration::from_secs(60)),
    ];
    let mut failed = 0;
    for (name, check, limit) in criteria {
        let start = Instant::now();
        let outcome = check();
        let elapsed = start.elapsed();
        let outcome = match outcome {
            Ok(detail) if elapsed > limit => Err(format!("{detail}; took {elapsed:.2?}, limit {limit:?}")),
            other => other,
        };
        match outcome {
            Ok(detail) => println!("PASS [{name}] {detail} ({elapsed:.2?})"),
            Err(why) => {
                failed += 1;
                println!("FAIL [{name}] {why} ({elapsed:.2?})");
            }
        }
    }
    if failed > 0 {
        println!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
