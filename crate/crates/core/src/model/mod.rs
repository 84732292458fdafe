//! Graph data model, canonical edge identity and the CSV interchange format.

mod csv_io;
mod entity;
mod graph;
mod normalize;

use thiserror::Error;

pub use csv_io::{
    read_edges_csv, read_edges_csv_with, write_edges_csv, write_edges_csv_string, ColumnMapping, CsvError,
    ReadReport, CSV_HEADER,
};
pub use entity::{EntityKind, EntityRef, Span};
pub use graph::{DependencyEdge, DependencyGraph, EdgeKey, EdgeKind};
pub use normalize::{canonical_key, NormalizationProfile};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ModelError {
    #[error("qualified name is empty")]
    EmptyName,
    #[error("qualified name {0:?} contains whitespace")]
    WhitespaceInName(String),
    #[error("internal entity needs a project file")]
    MissingFile,
    #[error("unknown entity kind {0:?}")]
    UnknownEntityKind(String),
    #[error("unknown edge kind {0:?}")]
    UnknownEdgeKind(String),
    #[error("edge source {0} is external")]
    ExternalSource(String),
    #[error("inherit edge {from} -> {to} must connect a class to a class")]
    BadInherit { from: String, to: String },
    #[error("edge endpoint {0} is not a node")]
    DanglingEndpoint(String),
}
