//! TOML description of a multi-tool comparison.
//!
//! ```toml
//! title = "guava"
//! json_out = "report.json"        # optional
//!
//! [[tool]]
//! name = "ours"
//! file = "ours.csv"
//! format = "core-csv"
//!
//! [[tool]]
//! name = "other"
//! file = "other.txt"
//! format = "pairs-csv"
//! profile = "java.profile"         # optional normalization profile
//! source_column = "caller"         # header name or zero-based index
//! target_column = "callee"
//! header = true
//! delimiter = ","
//! ```
//!
//! Relative paths are resolved against the config file's directory.

use std::path::{Path, PathBuf};

use serde::Deserialize;

use super::{compare, load_tool_output, Column, MacroError, OverlapReport, RawFormat, ToolEdgeList};
use crate::model::NormalizationProfile;

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ComparisonConfig {
    pub title: Option<String>,
    pub json_out: Option<PathBuf>,
    #[serde(rename = "tool")]
    pub tools: Vec<ToolConfig>,
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ToolConfig {
    pub name: String,
    pub file: PathBuf,
    pub format: String,
    pub profile: Option<PathBuf>,
    pub source_column: Option<ColumnSpec>,
    pub target_column: Option<ColumnSpec>,
    pub kind_column: Option<ColumnSpec>,
    pub header: Option<bool>,
    pub delimiter: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Eq, Deserialize)]
#[serde(untagged)]
pub enum ColumnSpec {
    Index(usize),
    Name(String),
}

impl From<&ColumnSpec> for Column {
    fn from(spec: &ColumnSpec) -> Column {
        match spec {
            ColumnSpec::Index(i) => Column::Index(*i),
            ColumnSpec::Name(n) => Column::parse(n),
        }
    }
}

impl ToolConfig {
    pub fn raw_format(&self) -> Result<RawFormat, String> {
        match self.format.as_str() {
            "core-csv" => Ok(RawFormat::CoreCsv),
            "adjacency-json" => Ok(RawFormat::AdjacencyJson),
            "pairs-csv" => {
                let delimiter = match self.delimiter.as_deref() {
                    None => b',',
                    Some("\\t") | Some("tab") => b'\t',
                    Some(d) if d.len() == 1 => d.as_bytes()[0],
                    Some(d) => return Err(format!("delimiter must be one ASCII character, got {d:?}")),
                };
                Ok(RawFormat::PairsCsv {
                    source: self.source_column.as_ref().map_or(Column::Index(0), Column::from),
                    target: self.target_column.as_ref().map_or(Column::Index(1), Column::from),
                    kind: self.kind_column.as_ref().map(Column::from),
                    has_header: self.header.unwrap_or(true),
                    delimiter,
                })
            }
            other => Err(format!(
                "unknown format {other:?}; expected core-csv, pairs-csv or adjacency-json"
            )),
        }
    }
}

/// Parses the config at `path` and makes its paths absolute.
pub fn load_comparison(path: &Path) -> Result<ComparisonConfig, MacroError> {
    let err = |message: String| MacroError::Config {
        path: path.display().to_string(),
        message,
    };
    let text = std::fs::read_to_string(path).map_err(|e| err(e.to_string()))?;
    let mut config: ComparisonConfig = toml::from_str(&text).map_err(|e| err(e.to_string()))?;
    let base = path.parent().unwrap_or(Path::new("."));
    config.json_out = config.json_out.map(|p| base.join(p));
    for tool in &mut config.tools {
        tool.file = base.join(&tool.file);
        tool.profile = tool.profile.as_ref().map(|p| base.join(p));
        tool.raw_format()
            .map_err(|m| err(format!("tool {}: {m}", tool.name)))?;
    }
    Ok(config)
}

/// Loads every tool's output and computes the report.
pub fn run_comparison(config: &ComparisonConfig) -> Result<OverlapReport, MacroError> {
    let mut lists: Vec<ToolEdgeList> = Vec::new();
    for tool in &config.tools {
        let profile = match &tool.profile {
            Some(p) => NormalizationProfile::load(p).map_err(|e| MacroError::Format {
                tool: tool.name.clone(),
                message: format!("profile {}: {e}", p.display()),
            })?,
            None => NormalizationProfile::default(),
        };
        let format = tool.raw_format().map_err(|message| MacroError::Format {
            tool: tool.name.clone(),
            message,
        })?;
        lists.push(load_tool_output(&tool.name, &tool.file, &format, &profile)?);
    }
    let mut report = compare(&lists)?;
    report.title = config.title.clone();
    Ok(report)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn loads_and_runs() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("a.json"), r#"{"m.f": ["m.g", "m.h"]}"#).unwrap();
        std::fs::write(dir.path().join("b.tsv"), "m.f\tm.g\n").unwrap();
        let cfg = dir.path().join("cmp.toml");
        std::fs::write(
            &cfg,
            "title = \"t\"\n\
             [[tool]]\nname = \"A\"\nfile = \"a.json\"\nformat = \"adjacency-json\"\n\
             [[tool]]\nname = \"B\"\nfile = \"b.tsv\"\nformat = \"pairs-csv\"\nheader = false\ndelimiter = \"\\t\"\nsource_column = 0\ntarget_column = 1\n",
        )
        .unwrap();
        let config = load_comparison(&cfg).unwrap();
        let report = run_comparison(&config).unwrap();
        assert_eq!(report.union_size, 2);
        assert_eq!(report.region(&["A", "B"]), 1);
        assert_eq!(report.title.as_deref(), Some("t"));
    }

    #[test]
    fn unknown_format_is_rejected() {
        let dir = tempfile::tempdir().unwrap();
        let cfg = dir.path().join("cmp.toml");
        std::fs::write(&cfg, "[[tool]]\nname = \"A\"\nfile = \"a\"\nformat = \"xml\"\n").unwrap();
        assert!(matches!(load_comparison(&cfg), Err(MacroError::Config { .. })));
    }
}
