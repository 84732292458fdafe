//! Recall against feature-tagged ground-truth suites.
//!
//! A suite is a manifest of small test cases, each a source directory plus
//! the edges it must produce. Every expected edge is tagged `static`,
//! `dynamic` (only known at run time) or `external` (target outside the
//! case). Cleaning a suite drops the dynamic and external edges; recall is
//! the share of expected edges found in the extracted graph.
//!
//! Manifest grammar, one item per line:
//!
//! ```text
//! # comment
//! [case <id>]
//! category = <name>
//! source = <directory, relative to the manifest>
//! <source name> -> <target name> [<tag>]
//! ```

use std::collections::{BTreeMap, BTreeSet, HashSet};
use std::fmt::{self, Write as _};
use std::path::{Path, PathBuf};
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::extractor::{extract_project, filter_edges, ExtractOptions};
use crate::model::{DependencyGraph, EdgeKind, NormalizationProfile};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum SuiteError {
    #[error("cannot read suite {path}: {message}")]
    Unreadable { path: String, message: String },
    #[error("manifest line {line}: {message}")]
    Syntax { line: usize, message: String },
    #[error("case {case}: unknown tag `{tag}` on line {line}")]
    UnknownTag { case: String, line: usize, tag: String },
    #[error("case {case} is defined twice")]
    DuplicateCase { case: String },
    #[error("case {case}: missing `{field}`")]
    MissingField { case: String, field: &'static str },
    #[error("case {case}: source directory {path} does not exist")]
    MissingSource { case: String, path: String },
    #[error("suite has no cases")]
    Empty,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Tag {
    Static,
    Dynamic,
    External,
}

impl Tag {
    pub fn as_str(self) -> &'static str {
        match self {
            Tag::Static => "static",
            Tag::Dynamic => "dynamic",
            Tag::External => "external",
        }
    }
}

impl FromStr for Tag {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "static" => Ok(Tag::Static),
            "dynamic" => Ok(Tag::Dynamic),
            "external" => Ok(Tag::External),
            other => Err(other.to_string()),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ExpectedEdge {
    pub source: String,
    pub target: String,
    pub tag: Tag,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TestCase {
    pub id: String,
    pub category: String,
    pub source_dir: PathBuf,
    pub expected: Vec<ExpectedEdge>,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct TestSuite {
    pub cases: Vec<TestCase>,
}

impl TestSuite {
    pub fn edge_count(&self) -> usize {
        self.cases.iter().map(|c| c.expected.len()).sum()
    }

    pub fn count_tag(&self, tag: Tag) -> usize {
        self.cases
            .iter()
            .flat_map(|c| &c.expected)
            .filter(|e| e.tag == tag)
            .count()
    }
}

/// Parses a manifest. Source directories are joined to `base` but not
/// checked.
pub fn parse_manifest(text: &str, base: &Path) -> Result<TestSuite, SuiteError> {
    struct Partial {
        id: String,
        category: Option<String>,
        source: Option<String>,
        expected: Vec<ExpectedEdge>,
    }
    fn finish(p: Partial, base: &Path) -> Result<TestCase, SuiteError> {
        let category = p
            .category
            .filter(|c| !c.is_empty())
            .ok_or(SuiteError::MissingField {
                case: p.id.clone(),
                field: "category",
            })?;
        let source = p.source.ok_or(SuiteError::MissingField {
            case: p.id.clone(),
            field: "source",
        })?;
        Ok(TestCase {
            id: p.id,
            category,
            source_dir: base.join(source),
            expected: p.expected,
        })
    }

    let mut cases = Vec::new();
    let mut seen = HashSet::new();
    let mut current: Option<Partial> = None;
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let trimmed = raw.trim();
        if trimmed.is_empty() || trimmed.starts_with('#') {
            continue;
        }
        let syntax = |message: &str| SuiteError::Syntax {
            line,
            message: message.to_string(),
        };
        if let Some(header) = trimmed.strip_prefix('[') {
            let id = header
                .strip_suffix(']')
                .and_then(|h| h.strip_prefix("case"))
                .map(str::trim)
                .filter(|id| !id.is_empty())
                .ok_or_else(|| syntax("expected `[case <id>]`"))?;
            if let Some(done) = current.take() {
                cases.push(finish(done, base)?);
            }
            if !seen.insert(id.to_string()) {
                return Err(SuiteError::DuplicateCase { case: id.to_string() });
            }
            current = Some(Partial {
                id: id.to_string(),
                category: None,
                source: None,
                expected: Vec::new(),
            });
            continue;
        }
        let case = current
            .as_mut()
            .ok_or_else(|| syntax("entry before the first `[case ...]`"))?;
        if let Some((lhs, rhs)) = trimmed.split_once("->") {
            let rhs = rhs.trim();
            let (target, tag) = match rhs.rfind('[') {
                Some(open) if rhs.ends_with(']') => (rhs[..open].trim(), &rhs[open + 1..rhs.len() - 1]),
                _ => return Err(syntax("edge needs a `[tag]`")),
            };
            let tag = tag.trim().parse::<Tag>().map_err(|tag| SuiteError::UnknownTag {
                case: case.id.clone(),
                line,
                tag,
            })?;
            let source = lhs.trim();
            if source.is_empty() || target.is_empty() {
                return Err(syntax("edge with an empty name"));
            }
            case.expected.push(ExpectedEdge {
                source: source.to_string(),
                target: target.to_string(),
                tag,
            });
        } else if let Some((key, value)) = trimmed.split_once('=') {
            let value = value.trim().to_string();
            match key.trim() {
                "category" => case.category = Some(value),
                "source" => case.source = Some(value),
                other => return Err(syntax(&format!("unknown key `{other}`"))),
            }
        } else {
            return Err(syntax("expected `key = value` or `source -> target [tag]`"));
        }
    }
    if let Some(done) = current.take() {
        cases.push(finish(done, base)?);
    }
    Ok(TestSuite { cases })
}

/// Loads a manifest and checks that every source directory exists.
pub fn load_suite(manifest: &Path) -> Result<TestSuite, SuiteError> {
    let text = std::fs::read_to_string(manifest).map_err(|err| SuiteError::Unreadable {
        path: manifest.display().to_string(),
        message: err.to_string(),
    })?;
    let base = manifest.parent().unwrap_or_else(|| Path::new("."));
    let suite = parse_manifest(&text, base)?;
    if suite.cases.is_empty() {
        return Err(SuiteError::Empty);
    }
    for case in &suite.cases {
        if !case.source_dir.is_dir() {
            return Err(SuiteError::MissingSource {
                case: case.id.clone(),
                path: case.source_dir.display().to_string(),
            });
        }
    }
    Ok(suite)
}

/// A suite after cleanup, with what was taken out.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CleanedSuite {
    pub suite: TestSuite,
    pub removed_edges: BTreeMap<Tag, usize>,
    /// Cases left without expected edges, which are dropped.
    pub removed_cases: Vec<String>,
}

/// Drops expected edges carrying one of `drop`, and cases left empty.
pub fn clean_suite(suite: &TestSuite, drop: &BTreeSet<Tag>) -> CleanedSuite {
    let mut removed_edges: BTreeMap<Tag, usize> = drop.iter().map(|t| (*t, 0)).collect();
    let mut removed_cases = Vec::new();
    let mut cases = Vec::new();
    for case in &suite.cases {
        let mut kept = case.clone();
        kept.expected.retain(|e| {
            if drop.contains(&e.tag) {
                *removed_edges.entry(e.tag).or_insert(0) += 1;
                false
            } else {
                true
            }
        });
        if kept.expected.is_empty() && !case.expected.is_empty() {
            removed_cases.push(case.id.clone());
        } else {
            cases.push(kept);
        }
    }
    CleanedSuite {
        suite: TestSuite { cases },
        removed_edges,
        removed_cases,
    }
}

/// The tags removed by the standard cleanup.
pub fn cleanup_tags() -> BTreeSet<Tag> {
    [Tag::Dynamic, Tag::External].into()
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Initial,
    Cleaned,
}

impl FromStr for Mode {
    type Err = String;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "initial" => Ok(Mode::Initial),
            "cleaned" => Ok(Mode::Cleaned),
            other => Err(format!("unknown mode `{other}`, expected initial or cleaned")),
        }
    }
}

/// Counts for one category or the whole suite.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct RecallRow {
    pub cases: usize,
    pub expected: usize,
    pub correct: usize,
}

impl RecallRow {
    /// Correct over expected; 1.0 when nothing is expected.
    pub fn recall(&self) -> f64 {
        if self.expected == 0 {
            1.0
        } else {
            self.correct as f64 / self.expected as f64
        }
    }

    /// Whether the recall is 1.0 only because nothing was expected.
    pub fn is_vacuous(&self) -> bool {
        self.expected == 0
    }

    fn add(&mut self, other: &RecallRow) {
        self.cases += other.cases;
        self.expected += other.expected;
        self.correct += other.correct;
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RecallReport {
    pub mode: Mode,
    pub categories: BTreeMap<String, RecallRow>,
    pub total: RecallRow,
    /// Expected edges that were not found, as `(case, source, target)`.
    pub missed: Vec<(String, String, String)>,
}

/// Source of actual edges for each case.
pub trait ActualEdges {
    fn graph_for(&self, case: &str) -> Option<&DependencyGraph>;
}

/// One graph for every case.
impl ActualEdges for DependencyGraph {
    fn graph_for(&self, _case: &str) -> Option<&DependencyGraph> {
        Some(self)
    }
}

/// A graph per case id.
impl ActualEdges for BTreeMap<String, DependencyGraph> {
    fn graph_for(&self, case: &str) -> Option<&DependencyGraph> {
        self.get(case)
    }
}

/// An expected edge is correct when its normalized name pair occurs among
/// the actual edges of its case. Edge kinds are ignored.
pub fn evaluate_recall(
    actual: &impl ActualEdges,
    suite: &TestSuite,
    profile: &NormalizationProfile,
    mode: Mode,
) -> RecallReport {
    let mut categories: BTreeMap<String, RecallRow> = BTreeMap::new();
    let mut missed = Vec::new();
    for case in &suite.cases {
        let keys: HashSet<String> = actual
            .graph_for(&case.id)
            .map(|g| {
                g.edges()
                    .map(|e| profile.key_for(e.source().qualified_name(), e.target().qualified_name(), None))
                    .collect()
            })
            .unwrap_or_default();
        let row = categories.entry(case.category.clone()).or_default();
        row.cases += 1;
        for edge in &case.expected {
            row.expected += 1;
            if keys.contains(&profile.key_for(&edge.source, &edge.target, None)) {
                row.correct += 1;
            } else {
                missed.push((case.id.clone(), edge.source.clone(), edge.target.clone()));
            }
        }
    }
    let mut total = RecallRow::default();
    for row in categories.values() {
        total.add(row);
    }
    RecallReport {
        mode,
        categories,
        total,
        missed,
    }
}

/// Extracts every case of `suite`, keyed by case id.
pub fn extract_suite(
    suite: &TestSuite,
    include_external: bool,
) -> crate::Result<BTreeMap<String, DependencyGraph>> {
    let options = ExtractOptions::default();
    let mut graphs = BTreeMap::new();
    for case in &suite.cases {
        let graph = extract_project(&case.source_dir, &options)?.graph;
        let graph = if include_external {
            graph
        } else {
            let all: BTreeSet<EdgeKind> = EdgeKind::ALL.into_iter().collect();
            filter_edges(&graph, false, &all)?
        };
        graphs.insert(case.id.clone(), graph);
    }
    Ok(graphs)
}

/// Extracts and scores `suite` in `mode`. Cleaned mode scores the cleaned
/// suite against graphs without external edges.
pub fn run_suite(
    suite: &TestSuite,
    mode: Mode,
    profile: &NormalizationProfile,
) -> crate::Result<RecallReport> {
    match mode {
        Mode::Initial => {
            let graphs = extract_suite(suite, true)?;
            Ok(evaluate_recall(&graphs, suite, profile, mode))
        }
        Mode::Cleaned => {
            let cleaned = clean_suite(suite, &cleanup_tags());
            let graphs = extract_suite(&cleaned.suite, false)?;
            Ok(evaluate_recall(&graphs, &cleaned.suite, profile, mode))
        }
    }
}

struct Ratio(f64, bool);

impl fmt::Display for Ratio {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:.2}{}", self.0, if self.1 { "*" } else { "" })
    }
}

/// Per-category table. With two reports, the second is the cleaned run and
/// its columns carry a `*`. A trailing `*` on a recall marks a category
/// with no expected edges.
pub fn render_recall_table(first: &RecallReport, cleaned: Option<&RecallReport>) -> String {
    let mut rows: Vec<Vec<String>> = Vec::new();
    let header: Vec<&str> = match cleaned {
        Some(_) => vec![
            "Category",
            "Cases",
            "Edges",
            "Edges*",
            "Corrects",
            "Corrects*",
            "Recall",
            "Recall*",
        ],
        None => vec!["Category", "Cases", "Edges", "Corrects", "Recall"],
    };
    let mut names: BTreeSet<&String> = first.categories.keys().collect();
    if let Some(c) = cleaned {
        names.extend(c.categories.keys());
    }
    let mut emit = |name: &str, a: RecallRow, b: Option<RecallRow>| {
        let mut row = vec![name.to_string(), a.cases.to_string(), a.expected.to_string()];
        match b {
            Some(b) => {
                row.push(b.expected.to_string());
                row.push(a.correct.to_string());
                row.push(b.correct.to_string());
                row.push(Ratio(a.recall(), a.is_vacuous()).to_string());
                row.push(Ratio(b.recall(), b.is_vacuous()).to_string());
            }
            None => {
                row.push(a.correct.to_string());
                row.push(Ratio(a.recall(), a.is_vacuous()).to_string());
            }
        }
        rows.push(row);
    };
    for name in names {
        let a = first.categories.get(name).copied().unwrap_or_default();
        let b = cleaned.map(|c| c.categories.get(name).copied().unwrap_or_default());
        emit(name, a, b);
    }
    emit("Total", first.total, cleaned.map(|c| c.total));

    let widths: Vec<usize> = (0..header.len())
        .map(|i| {
            rows.iter()
                .map(|r| r[i].len())
                .chain([header[i].len()])
                .max()
                .unwrap_or(0)
        })
        .collect();
    let mut out = String::new();
    let line = |cells: Vec<String>, out: &mut String| {
        let padded: Vec<String> = cells
            .iter()
            .enumerate()
            .map(|(i, c)| {
                if i == 0 {
                    format!("{c:<w$}", w = widths[i])
                } else {
                    format!("{c:>w$}", w = widths[i])
                }
            })
            .collect();
        let _ = writeln!(out, "| {} |", padded.join(" | "));
    };
    line(header.iter().map(|h| h.to_string()).collect(), &mut out);
    let rule: Vec<String> = widths
        .iter()
        .enumerate()
        .map(|(i, w)| {
            if i == 0 {
                "-".repeat(*w)
            } else {
                format!("{}:", "-".repeat(w - 1))
            }
        })
        .collect();
    let _ = writeln!(out, "|-{}-|", rule.join("-|-"));
    for row in rows {
        line(row, &mut out);
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{DependencyEdge, EntityKind, EntityRef};

    const TWO_CASES: &str = "\
[case a]
category = calls
source = a
main -> main.f [static]
main -> main.g [dynamic]
main -> os.path [external]

[case b]
category = calls
source = b
main -> main.h [static]
main.h -> main.f [static]
";

    fn graph(pairs: &[(&str, &str)]) -> DependencyGraph {
        let mut g = DependencyGraph::new();
        for (s, t) in pairs {
            let s = EntityRef::internal(*s, EntityKind::Function, "m.py", None).unwrap();
            let t = EntityRef::internal(*t, EntityKind::Function, "m.py", None).unwrap();
            g.add_edge(DependencyEdge::new(s, t, EdgeKind::Call, 1).unwrap());
        }
        g
    }

    #[test]
    fn parses_cases_and_edges() {
        let suite = parse_manifest(TWO_CASES, Path::new("/x")).unwrap();
        assert_eq!(suite.cases.len(), 2);
        assert_eq!(suite.edge_count(), 5);
        assert_eq!(suite.cases[0].source_dir, Path::new("/x/a"));
    }

    #[test]
    fn rejects_unknown_tag_and_duplicates() {
        let bad = "[case a]\ncategory = c\nsource = a\nx -> y [weird]\n";
        assert!(matches!(
            parse_manifest(bad, Path::new(".")),
            Err(SuiteError::UnknownTag { case, .. }) if case == "a"
        ));
        let dup = "[case a]\ncategory = c\nsource = a\n[case a]\ncategory = c\nsource = a\n";
        assert_eq!(
            parse_manifest(dup, Path::new(".")),
            Err(SuiteError::DuplicateCase { case: "a".into() })
        );
        let missing = "[case a]\nsource = a\n";
        assert!(matches!(
            parse_manifest(missing, Path::new(".")),
            Err(SuiteError::MissingField { .. })
        ));
    }

    #[test]
    fn cleanup_counts() {
        let suite = parse_manifest(TWO_CASES, Path::new(".")).unwrap();
        let cleaned = clean_suite(&suite, &cleanup_tags());
        assert_eq!(cleaned.suite.edge_count(), 3);
        assert_eq!(cleaned.removed_edges[&Tag::Dynamic], 1);
        assert_eq!(cleaned.removed_edges[&Tag::External], 1);
        let same = clean_suite(&suite, &BTreeSet::new());
        assert_eq!(same.suite, suite);
    }

    #[test]
    fn empty_cases_are_dropped() {
        let text = "[case d]\ncategory = dynamic\nsource = d\nmain -> main.f [dynamic]\n";
        let suite = parse_manifest(text, Path::new(".")).unwrap();
        let cleaned = clean_suite(&suite, &cleanup_tags());
        assert!(cleaned.suite.cases.is_empty());
        assert_eq!(cleaned.removed_cases, ["d"]);
        let report = evaluate_recall(
            &DependencyGraph::new(),
            &cleaned.suite,
            &Default::default(),
            Mode::Cleaned,
        );
        assert_eq!(report.total.recall(), 1.0);
        assert!(report.total.is_vacuous());
    }

    #[test]
    fn recall_per_case() {
        let suite = parse_manifest(TWO_CASES, Path::new(".")).unwrap();
        let mut graphs = BTreeMap::new();
        graphs.insert("a".to_string(), graph(&[("main", "main.f")]));
        graphs.insert("b".to_string(), graph(&[("main", "main.h"), ("main", "main.f")]));
        let r = evaluate_recall(&graphs, &suite, &Default::default(), Mode::Initial);
        assert_eq!(r.total.correct, 2);
        assert_eq!(r.total.expected, 5);
        assert_eq!(r.missed.len(), 3);
        let table = render_recall_table(&r, None);
        assert!(table.contains("| Total "));
    }

    #[test]
    fn exact_match_gives_full_recall() {
        let suite = parse_manifest(TWO_CASES, Path::new(".")).unwrap();
        let all: Vec<(&str, &str)> = suite
            .cases
            .iter()
            .flat_map(|c| c.expected.iter().map(|e| (e.source.as_str(), e.target.as_str())))
            .collect();
        let r = evaluate_recall(&graph(&all), &suite, &Default::default(), Mode::Initial);
        assert!(r.categories.values().all(|row| row.recall() == 1.0));
    }
}
