//! The edge-list CSV format.
//!
//! ```text
//! source_file,source_name,source_kind,target_file,target_name,target_kind,edge_kind,line
//! ```
//!
//! Rows are sorted by `(source_name, target_name, edge_kind, line)`, fields
//! are quoted only when they need to be, and lines end in LF. Entity spans
//! are not part of the format.

use std::io::{Read, Write};

use thiserror::Error;

use super::{DependencyEdge, DependencyGraph, EdgeKind, EntityKind, EntityRef, ModelError};
use crate::config::{ConfigError, KvEntry};

pub const CSV_HEADER: [&str; 8] = [
    "source_file",
    "source_name",
    "source_kind",
    "target_file",
    "target_name",
    "target_kind",
    "edge_kind",
    "line",
];

#[derive(Debug, Error)]
pub enum CsvError {
    #[error("line {line}: {message}")]
    Row { line: u64, message: String },
    #[error("missing column `{0}` in header")]
    MissingColumn(String),
    #[error("csv: {0}")]
    Format(String),
    #[error("write failed: {0}")]
    Write(#[from] std::io::Error),
}

impl From<csv::Error> for CsvError {
    fn from(err: csv::Error) -> Self {
        match err.position() {
            Some(pos) => CsvError::Row {
                line: pos.line(),
                message: err.to_string(),
            },
            None => match err.into_kind() {
                csv::ErrorKind::Io(io) => CsvError::Write(io),
                other => CsvError::Format(format!("{other:?}")),
            },
        }
    }
}

pub fn write_edges_csv<W: Write>(graph: &DependencyGraph, sink: W) -> Result<(), CsvError> {
    let mut writer = csv::WriterBuilder::new()
        .terminator(csv::Terminator::Any(b'\n'))
        .quote_style(csv::QuoteStyle::Necessary)
        .from_writer(sink);
    writer.write_record(CSV_HEADER)?;
    let mut edges: Vec<&DependencyEdge> = graph.edges().collect();
    edges.sort_by(|a, b| {
        (
            a.source().qualified_name(),
            a.target().qualified_name(),
            a.kind().as_str(),
            a.line(),
        )
            .cmp(&(
                b.source().qualified_name(),
                b.target().qualified_name(),
                b.kind().as_str(),
                b.line(),
            ))
    });
    for edge in edges {
        let line = edge.line().to_string();
        writer.write_record([
            edge.source().file(),
            edge.source().qualified_name(),
            edge.source().kind().as_str(),
            edge.target().file(),
            edge.target().qualified_name(),
            edge.target().kind().as_str(),
            edge.kind().as_str(),
            line.as_str(),
        ])?;
    }
    writer.flush()?;
    Ok(())
}

pub fn write_edges_csv_string(graph: &DependencyGraph) -> String {
    let mut buf = Vec::new();
    write_edges_csv(graph, &mut buf).expect("writing to a Vec cannot fail");
    String::from_utf8(buf).expect("csv output is UTF-8")
}

/// Maps the columns of a third-party CSV onto edge fields. Only the two
/// name columns are required.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ColumnMapping {
    pub source_file: Option<String>,
    pub source_name: String,
    pub source_kind: Option<String>,
    pub target_file: Option<String>,
    pub target_name: String,
    pub target_kind: Option<String>,
    pub edge_kind: Option<String>,
    pub line: Option<String>,
}

impl Default for ColumnMapping {
    fn default() -> Self {
        ColumnMapping {
            source_file: Some(CSV_HEADER[0].into()),
            source_name: CSV_HEADER[1].into(),
            source_kind: Some(CSV_HEADER[2].into()),
            target_file: Some(CSV_HEADER[3].into()),
            target_name: CSV_HEADER[4].into(),
            target_kind: Some(CSV_HEADER[5].into()),
            edge_kind: Some(CSV_HEADER[6].into()),
            line: Some(CSV_HEADER[7].into()),
        }
    }
}

impl ColumnMapping {
    /// Keys are the field names of this struct, values are header names.
    /// Fields not mentioned are absent (except the two required names,
    /// which default to `source_name` / `target_name`).
    pub fn from_kv(entries: &[KvEntry]) -> Result<Self, ConfigError> {
        let mut mapping = ColumnMapping {
            source_file: None,
            source_name: CSV_HEADER[1].into(),
            source_kind: None,
            target_file: None,
            target_name: CSV_HEADER[4].into(),
            target_kind: None,
            edge_kind: None,
            line: None,
        };
        for entry in entries {
            let value = entry.value.clone();
            match entry.key.as_str() {
                "source_file" => mapping.source_file = Some(value),
                "source_name" => mapping.source_name = value,
                "source_kind" => mapping.source_kind = Some(value),
                "target_file" => mapping.target_file = Some(value),
                "target_name" => mapping.target_name = value,
                "target_kind" => mapping.target_kind = Some(value),
                "edge_kind" => mapping.edge_kind = Some(value),
                "line" => mapping.line = Some(value),
                _ => {
                    return Err(ConfigError::UnknownKey {
                        line: entry.line,
                        key: entry.key.clone(),
                    })
                }
            }
        }
        Ok(mapping)
    }
}

/// Counters collected while reading.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ReadReport {
    /// Rows whose `edge_kind` was not recognised and was read as `call`.
    pub unknown_edge_kinds: usize,
}

/// Reads a graph in the native format. `read(write(g)) == g` for graphs
/// whose nodes are all edge endpoints and carry no spans.
pub fn read_edges_csv<R: Read>(source: R) -> Result<DependencyGraph, CsvError> {
    read_edges_csv_with(source, &ColumnMapping::default()).map(|(graph, _)| graph)
}

pub fn read_edges_csv_with<R: Read>(
    source: R,
    mapping: &ColumnMapping,
) -> Result<(DependencyGraph, ReadReport), CsvError> {
    let mut reader = csv::ReaderBuilder::new()
        .has_headers(true)
        .flexible(true)
        .from_reader(source);
    let header = reader.headers()?.clone();
    let column = |name: &str| -> Result<usize, CsvError> {
        header
            .iter()
            .position(|h| h.trim() == name)
            .ok_or_else(|| CsvError::MissingColumn(name.to_string()))
    };
    let optional = |name: &Option<String>| -> Result<Option<usize>, CsvError> {
        name.as_deref().map(column).transpose()
    };
    let source_name = column(&mapping.source_name)?;
    let target_name = column(&mapping.target_name)?;
    let source_file = optional(&mapping.source_file)?;
    let source_kind = optional(&mapping.source_kind)?;
    let target_file = optional(&mapping.target_file)?;
    let target_kind = optional(&mapping.target_kind)?;
    let edge_kind = optional(&mapping.edge_kind)?;
    let line_col = optional(&mapping.line)?;

    let mut graph = DependencyGraph::new();
    let mut report = ReadReport::default();
    let mut record = csv::StringRecord::new();
    while reader.read_record(&mut record)? {
        let line = record.position().map(|p| p.line()).unwrap_or(0);
        if record.len() != header.len() {
            return Err(CsvError::Row {
                line,
                message: format!("expected {} fields, found {}", header.len(), record.len()),
            });
        }
        let row_err = |message: String| CsvError::Row { line, message };
        let field = |idx: Option<usize>| idx.map(|i| &record[i]).unwrap_or("");
        let entity_kind = |idx: Option<usize>| -> Result<EntityKind, CsvError> {
            match field(idx) {
                "" => Ok(EntityKind::Unknown),
                s => s.parse::<EntityKind>().or(Ok(EntityKind::Unknown)),
            }
        };
        let src_file = field(source_file);
        if src_file.is_empty() && source_file.is_some() {
            return Err(row_err("source_file must not be empty".into()));
        }
        // Third-party lists without a file column are treated as internal.
        let src_file = if source_file.is_none() { "?" } else { src_file };
        let source = EntityRef::with_file(
            record[source_name].trim(),
            entity_kind(source_kind)?,
            src_file,
            None,
        )
        .map_err(|e| row_err(e.to_string()))?;
        let target = EntityRef::with_file(
            record[target_name].trim(),
            entity_kind(target_kind)?,
            if target_file.is_none() {
                "?"
            } else {
                field(target_file)
            },
            None,
        )
        .map_err(|e| row_err(e.to_string()))?;
        let kind = match field(edge_kind) {
            "" => EdgeKind::Call,
            s => match s.parse::<EdgeKind>() {
                Ok(kind) => kind,
                Err(_) => {
                    report.unknown_edge_kinds += 1;
                    log::warn!("line {line}: unknown edge kind {s:?}, reading as call");
                    EdgeKind::Call
                }
            },
        };
        let line_no = match field(line_col) {
            "" => 0,
            s => s
                .trim()
                .parse::<u32>()
                .map_err(|e| row_err(format!("invalid line number {s:?}: {e}")))?,
        };
        let edge = DependencyEdge::new(source, target, kind, line_no)
            .map_err(|e: ModelError| row_err(e.to_string()))?;
        graph.add_edge(edge);
    }
    Ok((graph, report))
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn entity(name: &str, kind: EntityKind, file: &str) -> EntityRef {
        EntityRef::with_file(name, kind, file, None).unwrap()
    }

    fn call(src: &str, tgt: &str, line: u32) -> DependencyEdge {
        DependencyEdge::new(
            entity(src, EntityKind::Function, "m.src"),
            entity(tgt, EntityKind::Function, "m.src"),
            EdgeKind::Call,
            line,
        )
        .unwrap()
    }

    #[test]
    fn empty_graph_writes_header_only() {
        let out = write_edges_csv_string(&DependencyGraph::new());
        assert_eq!(
            out,
            "source_file,source_name,source_kind,target_file,target_name,target_kind,edge_kind,line\n"
        );
    }

    #[test]
    fn single_call_row() {
        let mut g = DependencyGraph::new();
        g.add_edge(call("m.f", "m.g", 3));
        let out = write_edges_csv_string(&g);
        assert_eq!(
            out.lines().nth(1).unwrap(),
            "m.src,m.f,function,m.src,m.g,function,call,3"
        );
        assert_eq!(out.lines().count(), 2);
    }

    #[test]
    fn five_edge_round_trip() {
        let mut g = DependencyGraph::new();
        g.add_edge(call("m.f", "m.g", 3));
        g.add_edge(call("m.g", "m.h", 4));
        g.add_edge(call("m.h", "m.f", 5));
        g.add_edge(
            DependencyEdge::new(
                entity("m.B", EntityKind::Class, "m.src"),
                entity("m.A", EntityKind::Class, "m.src"),
                EdgeKind::Inherit,
                7,
            )
            .unwrap(),
        );
        g.add_edge(
            DependencyEdge::new(
                entity("m", EntityKind::Module, "m.src"),
                entity("os", EntityKind::Module, ""),
                EdgeKind::Import,
                1,
            )
            .unwrap(),
        );
        let text = write_edges_csv_string(&g);
        let back = read_edges_csv(text.as_bytes()).unwrap();
        assert_eq!(back, g);
    }

    #[test]
    fn quoted_comma_is_preserved() {
        let mut g = DependencyGraph::new();
        g.add_edge(
            DependencyEdge::new(
                entity("m.f", EntityKind::Function, "dir,with,commas/m.py"),
                entity("m.g", EntityKind::Function, "m.py"),
                EdgeKind::Call,
                1,
            )
            .unwrap(),
        );
        let text = write_edges_csv_string(&g);
        assert!(text.contains("\"dir,with,commas/m.py\""));
        let back = read_edges_csv(text.as_bytes()).unwrap();
        assert_eq!(
            back.edges().next().unwrap().source().file(),
            "dir,with,commas/m.py"
        );
    }

    #[test]
    fn truncated_row_names_its_line() {
        let text = format!(
            "{}\nm.py,m.f,function,m.py,m.g,function,call,1\nm.py,m.f,function\n",
            CSV_HEADER.join(",")
        );
        match read_edges_csv(text.as_bytes()) {
            Err(CsvError::Row { line, .. }) => assert_eq!(line, 3),
            other => panic!("expected row error, got {other:?}"),
        }
    }

    #[test]
    fn unknown_edge_kind_reads_as_call() {
        let text = format!(
            "{}\nm.py,m.f,function,m.py,m.g,function,uses,1\n",
            CSV_HEADER.join(",")
        );
        let (g, report) = read_edges_csv_with(text.as_bytes(), &ColumnMapping::default()).unwrap();
        assert_eq!(report.unknown_edge_kinds, 1);
        assert_eq!(g.edges().next().unwrap().kind(), EdgeKind::Call);
    }

    #[test]
    fn third_party_mapping() {
        let entries = crate::config::parse_kv("source_name = caller\ntarget_name = callee").unwrap();
        let mapping = ColumnMapping::from_kv(&entries).unwrap();
        let text = "caller,callee,weight\na.f,b.g,1\n";
        let (g, _) = read_edges_csv_with(text.as_bytes(), &mapping).unwrap();
        let edge = g.edges().next().unwrap();
        assert_eq!(edge.source().qualified_name(), "a.f");
        assert_eq!(edge.target().qualified_name(), "b.g");
    }

    fn arb_graph() -> impl Strategy<Value = DependencyGraph> {
        let name = "[a-c]{1,2}(\\.[a-c,\"]{1,3}){0,2}";
        let file = prop::sample::select(vec!["", "a.py", "b/c.py", "x,y.py"]);
        let kind = prop::sample::select(EdgeKind::ALL.to_vec());
        prop::collection::vec((name, name, file, kind, 0u32..50), 0..25).prop_map(|rows| {
            let mut g = DependencyGraph::new();
            let mut kinds = std::collections::BTreeMap::new();
            for (src, tgt, file, kind, line) in rows {
                // One consistent kind per name, as any written graph has.
                let src_kind = *kinds.entry(src.clone()).or_insert(EntityKind::Class);
                let tgt_kind = *kinds.entry(tgt.clone()).or_insert(EntityKind::Class);
                let Ok(edge) = DependencyEdge::new(
                    entity(&src, src_kind, "s.py"),
                    entity(&tgt, tgt_kind, if src == tgt { "s.py" } else { file }),
                    kind,
                    line,
                ) else {
                    continue;
                };
                if g.node(&tgt).is_some_and(|n| n.file() != edge.target().file())
                    || g.node(&src).is_some_and(|n| n.file() != "s.py")
                {
                    continue;
                }
                g.add_edge(edge);
            }
            g
        })
    }

    proptest! {
        #[test]
        fn round_trip(g in arb_graph()) {
            let text = write_edges_csv_string(&g);
            let back = read_edges_csv(text.as_bytes()).unwrap();
            prop_assert_eq!(back, g);
        }

        #[test]
        fn output_independent_of_insertion_order(g in arb_graph()) {
            let mut edges: Vec<_> = g.edges().cloned().collect();
            edges.reverse();
            let mut h = DependencyGraph::new();
            for e in edges {
                h.add_edge(e);
            }
            prop_assert_eq!(write_edges_csv_string(&g), write_edges_csv_string(&h));
        }
    }
}
