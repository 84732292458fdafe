//! Overlap analysis between the edge lists of several tools.
//!
//! Every tool's output is normalized to a set of canonical keys. Each key
//! of the union belongs to exactly one Venn region (the set of tools that
//! report it), so region counts partition the union. Per-tool totals,
//! shared and unique counts, and their ratios to the union size are all
//! derived from the regions.

mod config;

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::path::Path;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::NormalizationProfile;

pub use config::{load_comparison, run_comparison, ComparisonConfig, ToolConfig};

/// Share of unmappable rows above which a tool's output is rejected.
pub const MAX_UNMAPPABLE_SHARE: f64 = 0.10;
/// Version of the JSON report layout.
pub const REPORT_SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum MacroError {
    #[error("comparison config {path}: {message}")]
    Config { path: String, message: String },
    #[error("tool {tool}: cannot read {path}: {message}")]
    Unreadable {
        tool: String,
        path: String,
        message: String,
    },
    #[error("tool {tool}: {message}")]
    Format { tool: String, message: String },
    #[error("tool {tool}: {unmappable} of {rows} rows could not be mapped to edges")]
    TooManyUnmappable {
        tool: String,
        unmappable: usize,
        rows: usize,
    },
    #[error("a comparison needs at least 2 tools, got {0}")]
    TooFewTools(usize),
    #[error("at most 5 tools can be compared, got {0}")]
    TooManyTools(usize),
    #[error("tool name {0} is used twice")]
    DuplicateTool(String),
}

/// Layout of a tool's raw output.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum RawFormat {
    /// The native edge CSV.
    CoreCsv,
    /// Any delimited file with a source and a target column.
    PairsCsv {
        source: Column,
        target: Column,
        kind: Option<Column>,
        has_header: bool,
        delimiter: u8,
    },
    /// A JSON object mapping each source name to a list of target names.
    AdjacencyJson,
}

/// A column by header name or zero-based index.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Column {
    Name(String),
    Index(usize),
}

impl Column {
    /// Numbers are indices, anything else a header name.
    pub fn parse(s: &str) -> Column {
        match s.trim().parse::<usize>() {
            Ok(i) => Column::Index(i),
            Err(_) => Column::Name(s.trim().to_string()),
        }
    }

    fn resolve(&self, header: Option<&csv::StringRecord>) -> Option<usize> {
        match self {
            Column::Index(i) => Some(*i),
            Column::Name(n) => header?.iter().position(|h| h.trim() == n),
        }
    }
}

/// One tool's normalized, deduplicated keys.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ToolEdgeList {
    pub tool_name: String,
    pub keys: BTreeSet<String>,
    /// Data rows (or adjacency entries) read.
    pub rows: usize,
    pub unmappable: usize,
}

impl ToolEdgeList {
    pub fn new(tool_name: impl Into<String>, keys: impl IntoIterator<Item = String>) -> Self {
        let keys: BTreeSet<String> = keys.into_iter().collect();
        ToolEdgeList {
            tool_name: tool_name.into(),
            rows: keys.len(),
            keys,
            unmappable: 0,
        }
    }
}

/// Reads `path` and normalizes it as tool `tool`.
pub fn load_tool_output(
    tool: &str,
    path: &Path,
    format: &RawFormat,
    profile: &NormalizationProfile,
) -> Result<ToolEdgeList, MacroError> {
    let raw = std::fs::read_to_string(path).map_err(|err| MacroError::Unreadable {
        tool: tool.to_string(),
        path: path.display().to_string(),
        message: err.to_string(),
    })?;
    normalize_tool_output(tool, &raw, format, profile)
}

/// Maps every row of `raw` to a canonical key. Rows without a usable
/// source and target are counted as unmappable; more than
/// [`MAX_UNMAPPABLE_SHARE`] of them is an error.
pub fn normalize_tool_output(
    tool: &str,
    raw: &str,
    format: &RawFormat,
    profile: &NormalizationProfile,
) -> Result<ToolEdgeList, MacroError> {
    let format_err = |message: String| MacroError::Format {
        tool: tool.to_string(),
        message,
    };
    let mut keys = BTreeSet::new();
    let mut rows = 0usize;
    let mut unmappable = 0usize;
    let mut add = |src: Option<&str>, tgt: Option<&str>, kind: Option<&str>| {
        rows += 1;
        let src = src.map(str::trim).filter(|s| !s.is_empty());
        let tgt = tgt.map(str::trim).filter(|s| !s.is_empty());
        match (src, tgt) {
            (Some(s), Some(t))
                if !profile.normalize_name(s).is_empty() && !profile.normalize_name(t).is_empty() =>
            {
                keys.insert(profile.key_for(s, t, kind.map(str::trim).filter(|k| !k.is_empty())));
            }
            _ => unmappable += 1,
        }
    };
    match format {
        RawFormat::CoreCsv | RawFormat::PairsCsv { .. } => {
            let (source, target, kind, has_header, delimiter) = match format {
                RawFormat::PairsCsv {
                    source,
                    target,
                    kind,
                    has_header,
                    delimiter,
                } => (
                    source.clone(),
                    target.clone(),
                    kind.clone(),
                    *has_header,
                    *delimiter,
                ),
                _ => (
                    Column::Name("source_name".into()),
                    Column::Name("target_name".into()),
                    Some(Column::Name("edge_kind".into())),
                    true,
                    b',',
                ),
            };
            let mut reader = csv::ReaderBuilder::new()
                .has_headers(has_header)
                .delimiter(delimiter)
                .flexible(true)
                .from_reader(raw.as_bytes());
            let header = if has_header {
                Some(reader.headers().map_err(|e| format_err(e.to_string()))?.clone())
            } else {
                None
            };
            let column = |c: &Column| {
                c.resolve(header.as_ref())
                    .ok_or_else(|| format_err(format!("no column {c:?} in header")))
            };
            let (s, t) = (column(&source)?, column(&target)?);
            let k = kind.as_ref().map(column).transpose()?;
            for record in reader.records() {
                match record {
                    Ok(r) => add(r.get(s), r.get(t), k.and_then(|k| r.get(k))),
                    Err(_) => add(None, None, None),
                }
            }
        }
        RawFormat::AdjacencyJson => {
            let value: serde_json::Value =
                serde_json::from_str(raw).map_err(|e| format_err(e.to_string()))?;
            let map = value
                .as_object()
                .ok_or_else(|| format_err("expected a JSON object of name lists".into()))?;
            for (src, targets) in map {
                match targets.as_array() {
                    Some(list) => {
                        for t in list {
                            add(Some(src), t.as_str(), None);
                        }
                    }
                    None => add(None, None, None),
                }
            }
        }
    }
    if rows > 0 && unmappable as f64 > MAX_UNMAPPABLE_SHARE * rows as f64 {
        return Err(MacroError::TooManyUnmappable {
            tool: tool.to_string(),
            unmappable,
            rows,
        });
    }
    if unmappable > 0 {
        log::warn!("tool {tool}: {unmappable} of {rows} rows skipped as unmappable");
    }
    Ok(ToolEdgeList {
        tool_name: tool.to_string(),
        keys,
        rows,
        unmappable,
    })
}

/// Edges reported by exactly the tools in `tools`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Region {
    pub tools: Vec<String>,
    pub count: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ToolStats {
    pub name: String,
    pub total: usize,
    /// Also reported by at least one other tool.
    pub shared: usize,
    pub unique: usize,
    pub total_ratio: f64,
    pub shared_ratio: f64,
    pub unique_ratio: f64,
    pub unmappable: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OverlapReport {
    pub schema_version: u32,
    pub title: Option<String>,
    pub union_size: usize,
    /// All 2^n - 1 regions, ordered by tool bitmask (first tool = lowest bit).
    pub regions: Vec<Region>,
    /// `k_shared[k - 1]` is the number of edges reported by exactly k tools.
    pub k_shared: Vec<usize>,
    pub tools: Vec<ToolStats>,
    /// Set when the union is empty and every ratio is 0.
    pub degenerate: bool,
}

impl OverlapReport {
    /// Builds a report from region counts keyed by tool bitmask. Missing
    /// masks count as empty regions. Ratios are left at 0.
    pub fn from_regions(names: &[String], counts: &BTreeMap<u32, usize>) -> Result<Self, MacroError> {
        check_tools(names)?;
        let n = names.len();
        let mut regions = Vec::new();
        let mut k_shared = vec![0; n];
        let mut tools: Vec<ToolStats> = names
            .iter()
            .map(|name| ToolStats {
                name: name.clone(),
                total: 0,
                shared: 0,
                unique: 0,
                total_ratio: 0.0,
                shared_ratio: 0.0,
                unique_ratio: 0.0,
                unmappable: 0,
            })
            .collect();
        let mut union_size = 0;
        for mask in 1u32..(1 << n) {
            let count = counts.get(&mask).copied().unwrap_or(0);
            let members: Vec<usize> = (0..n).filter(|i| mask & (1 << i) != 0).collect();
            union_size += count;
            k_shared[members.len() - 1] += count;
            for &i in &members {
                tools[i].total += count;
                if members.len() > 1 {
                    tools[i].shared += count;
                } else {
                    tools[i].unique += count;
                }
            }
            regions.push(Region {
                tools: members.iter().map(|&i| names[i].clone()).collect(),
                count,
            });
        }
        Ok(OverlapReport {
            schema_version: REPORT_SCHEMA_VERSION,
            title: None,
            union_size,
            regions,
            k_shared,
            tools,
            degenerate: union_size == 0,
        })
    }

    pub fn tool_names(&self) -> Vec<String> {
        self.tools.iter().map(|t| t.name.clone()).collect()
    }

    /// Count of the region whose members are exactly `tools`.
    pub fn region(&self, tools: &[&str]) -> usize {
        let wanted: BTreeSet<&str> = tools.iter().copied().collect();
        self.regions
            .iter()
            .find(|r| r.tools.iter().map(String::as_str).collect::<BTreeSet<_>>() == wanted)
            .map_or(0, |r| r.count)
    }

    /// Edges reported by two or more tools.
    pub fn shared_total(&self) -> usize {
        self.k_shared.iter().skip(1).sum()
    }
}

/// Region counts given by tool names, e.g. rebuilt from a published table.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct RegionTable {
    pub title: Option<String>,
    pub tools: Vec<String>,
    pub regions: Vec<Region>,
}

impl RegionTable {
    /// The full report, ratios included.
    pub fn into_report(self) -> Result<OverlapReport, MacroError> {
        let mut counts = BTreeMap::new();
        for region in &self.regions {
            let mut mask = 0u32;
            for name in &region.tools {
                let i = self
                    .tools
                    .iter()
                    .position(|t| t == name)
                    .ok_or_else(|| MacroError::Format {
                        tool: name.clone(),
                        message: "region names a tool that is not listed".into(),
                    })?;
                mask |= 1 << i;
            }
            if mask == 0 {
                continue;
            }
            *counts.entry(mask).or_insert(0) += region.count;
        }
        let mut report = OverlapReport::from_regions(&self.tools, &counts)?;
        report.title = self.title;
        Ok(compute_ratios(report))
    }
}

fn check_tools(names: &[String]) -> Result<(), MacroError> {
    if names.len() < 2 {
        return Err(MacroError::TooFewTools(names.len()));
    }
    if names.len() > 5 {
        return Err(MacroError::TooManyTools(names.len()));
    }
    let mut seen = BTreeSet::new();
    for n in names {
        if !seen.insert(n) {
            return Err(MacroError::DuplicateTool(n.clone()));
        }
    }
    Ok(())
}

/// Partitions the union of all keys by membership bitmask.
pub fn compute_regions(lists: &[ToolEdgeList]) -> Result<OverlapReport, MacroError> {
    let names: Vec<String> = lists.iter().map(|l| l.tool_name.clone()).collect();
    check_tools(&names)?;
    let mut membership: BTreeMap<&str, u32> = BTreeMap::new();
    for (i, list) in lists.iter().enumerate() {
        for key in &list.keys {
            *membership.entry(key).or_insert(0) |= 1 << i;
        }
    }
    let mut counts = BTreeMap::new();
    for mask in membership.values() {
        *counts.entry(*mask).or_insert(0) += 1;
    }
    let mut report = OverlapReport::from_regions(&names, &counts)?;
    for (stats, list) in report.tools.iter_mut().zip(lists) {
        stats.unmappable = list.unmappable;
    }
    Ok(report)
}

/// Fills the per-tool ratios, all relative to the union size. A tool's
/// shared and unique ratios add up to its total ratio, not to one.
pub fn compute_ratios(mut report: OverlapReport) -> OverlapReport {
    let union = report.union_size;
    report.degenerate = union == 0;
    let ratio = |count: usize| {
        if union == 0 {
            0.0
        } else {
            count as f64 / union as f64
        }
    };
    for t in &mut report.tools {
        t.total_ratio = ratio(t.total);
        t.shared_ratio = ratio(t.shared);
        t.unique_ratio = ratio(t.unique);
    }
    report
}

/// Regions and ratios in one step.
pub fn compare(lists: &[ToolEdgeList]) -> Result<OverlapReport, MacroError> {
    compute_regions(lists).map(compute_ratios)
}

/// `count` as a whole percentage of `union`, rounded half up.
pub fn percent(count: usize, union: usize) -> usize {
    if union == 0 {
        0
    } else {
        (200 * count + union) / (2 * union)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReportStyle {
    Markdown,
    Json,
}

const COUNT_WORDS: [&str; 6] = ["", "One", "Two", "Three", "Four", "Five"];

/// The report as a markdown table in the layout of a results row, or as
/// JSON with exact counts and ratios.
pub fn render_report(report: &OverlapReport, style: ReportStyle) -> String {
    match style {
        ReportStyle::Json => {
            let mut s = serde_json::to_string_pretty(report).expect("report serializes");
            s.push('\n');
            s
        }
        ReportStyle::Markdown => render_markdown(report),
    }
}

fn render_markdown(report: &OverlapReport) -> String {
    let union = report.union_size;
    let n = report.tools.len();
    let cell = |count: usize| format!("{count}({}%)", percent(count, union));
    let mut header = vec![
        "Project".to_string(),
        "Total Edges".to_string(),
        "All shared".to_string(),
    ];
    let mut row = vec![
        report.title.clone().unwrap_or_else(|| "-".into()),
        union.to_string(),
        cell(report.k_shared[n - 1]),
    ];
    for (word, count) in COUNT_WORDS[2..n].iter().zip(&report.k_shared[1..]) {
        header.push(format!("{word} Shared"));
        row.push(cell(*count));
    }
    header.push("Shared".into());
    row.push(cell(report.shared_total()));
    for (group, pick) in [
        ("Total", (|t: &ToolStats| t.total) as fn(&ToolStats) -> usize),
        ("Shared", |t: &ToolStats| t.shared),
        ("Unique", |t: &ToolStats| t.unique),
    ] {
        for t in &report.tools {
            header.push(format!("{group} {}", t.name));
            row.push(cell(pick(t)));
        }
    }
    let mut out = String::new();
    let _ = writeln!(out, "| {} |", header.join(" | "));
    let _ = writeln!(out, "|{}", "---|".repeat(header.len()));
    let _ = writeln!(out, "| {} |", row.join(" | "));
    out.push('\n');
    let _ = writeln!(out, "| Region | Edges |");
    let _ = writeln!(out, "|---|---|");
    for r in &report.regions {
        let _ = writeln!(out, "| {} | {} |", r.tools.join(" & "), r.count);
    }
    let skipped: Vec<String> = report
        .tools
        .iter()
        .filter(|t| t.unmappable > 0)
        .map(|t| format!("{}: {}", t.name, t.unmappable))
        .collect();
    if !skipped.is_empty() {
        let _ = writeln!(out, "\nUnmappable rows skipped: {}", skipped.join(", "));
    }
    if report.degenerate {
        let _ = writeln!(out, "\nNo edges in any tool; all ratios are 0.");
    }
    out
}
