//! Static dependency-graph extraction for Python source trees, plus the
//! tooling to evaluate extractors: per-feature recall against tagged
//! ground-truth suites, and exact overlap analysis between the edge lists
//! of several tools.
//!
//! The pipeline is:
//!
//! 1. [`frontend`] discovers and parses modules, builds scope trees and
//!    resolves import bindings.
//! 2. [`resolver`] builds an assignment graph over abstract values and
//!    propagates it to a fixpoint, using C3 linearization for class lookups.
//! 3. [`extractor`] walks the resolved project and emits a
//!    [`DependencyGraph`](model::DependencyGraph).
//! 4. [`microeval`] and [`macroeval`] score graphs against suites or
//!    against each other.

pub mod config;
pub mod error;
pub mod extractor;
pub mod frontend;
pub mod macroeval;
pub mod microeval;

pub mod model;
pub mod resolver;

pub use error::{Error, Result};
pub use extractor::{extract_loaded, extract_project, ExtractOptions, Extraction};
pub use model::{
    canonical_key, read_edges_csv, write_edges_csv, DependencyEdge, DependencyGraph, EdgeKind, EntityKind,
    EntityRef, NormalizationProfile, Span,
};
