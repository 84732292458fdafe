use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use super::{EntityKind, EntityRef, ModelError};

/// Kind of reference an edge records.
///
/// Variants are declared in lexicographic order of their names so that the
/// derived `Ord` agrees with the CSV sort order.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum EdgeKind {
    AttributeAccess,
    Call,
    Decorate,
    Exception,
    Import,
    Inherit,
    Instantiate,
}

impl EdgeKind {
    pub const ALL: [EdgeKind; 7] = [
        EdgeKind::AttributeAccess,
        EdgeKind::Call,
        EdgeKind::Decorate,
        EdgeKind::Exception,
        EdgeKind::Import,
        EdgeKind::Inherit,
        EdgeKind::Instantiate,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            EdgeKind::AttributeAccess => "attribute_access",
            EdgeKind::Call => "call",
            EdgeKind::Decorate => "decorate",
            EdgeKind::Exception => "exception",
            EdgeKind::Import => "import",
            EdgeKind::Inherit => "inherit",
            EdgeKind::Instantiate => "instantiate",
        }
    }
}

impl fmt::Display for EdgeKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for EdgeKind {
    type Err = ModelError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        EdgeKind::ALL
            .into_iter()
            .find(|k| k.as_str() == s)
            .ok_or_else(|| ModelError::UnknownEdgeKind(s.to_string()))
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct DependencyEdge {
    source: EntityRef,
    target: EntityRef,
    kind: EdgeKind,
    line: u32,
}

impl DependencyEdge {
    pub fn new(source: EntityRef, target: EntityRef, kind: EdgeKind, line: u32) -> Result<Self, ModelError> {
        if source.is_external() {
            return Err(ModelError::ExternalSource(source.qualified_name().to_string()));
        }
        if kind == EdgeKind::Inherit
            && (source.kind() != EntityKind::Class
                || !matches!(target.kind(), EntityKind::Class | EntityKind::Unknown))
        {
            return Err(ModelError::BadInherit {
                from: source.qualified_name().to_string(),
                to: target.qualified_name().to_string(),
            });
        }
        Ok(DependencyEdge {
            source,
            target,
            kind,
            line,
        })
    }

    pub fn source(&self) -> &EntityRef {
        &self.source
    }

    pub fn target(&self) -> &EntityRef {
        &self.target
    }

    pub fn kind(&self) -> EdgeKind {
        self.kind
    }

    pub fn line(&self) -> u32 {
        self.line
    }

    pub fn key(&self) -> EdgeKey {
        EdgeKey {
            source: self.source.qualified_name().to_string(),
            target: self.target.qualified_name().to_string(),
            kind: self.kind,
        }
    }

    pub(crate) fn set_target(&mut self, target: EntityRef) {
        self.target = target;
    }
}

/// Deduplication key: line numbers are metadata and never distinguish edges.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EdgeKey {
    pub source: String,
    pub target: String,
    pub kind: EdgeKind,
}

/// Nodes keyed by qualified name, edges keyed by [`EdgeKey`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct DependencyGraph {
    nodes: BTreeMap<String, EntityRef>,
    edges: BTreeMap<EdgeKey, DependencyEdge>,
}

impl DependencyGraph {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a node. An existing node of the same name is kept unless its
    /// kind is `unknown` and the new one is more specific.
    pub fn add_node(&mut self, entity: EntityRef) {
        match self.nodes.get_mut(entity.qualified_name()) {
            Some(existing) => {
                if existing.kind() == EntityKind::Unknown && entity.kind() != EntityKind::Unknown {
                    *existing = entity;
                }
            }
            None => {
                self.nodes.insert(entity.qualified_name().to_string(), entity);
            }
        }
    }

    /// Inserts an edge and its endpoints. Duplicates under the edge key keep
    /// the smallest line number.
    pub fn add_edge(&mut self, edge: DependencyEdge) {
        self.add_node(edge.source.clone());
        self.add_node(edge.target.clone());
        let key = edge.key();
        match self.edges.get_mut(&key) {
            Some(existing) => {
                if edge.line < existing.line {
                    existing.line = edge.line;
                }
            }
            None => {
                self.edges.insert(key, edge);
            }
        }
    }

    pub fn nodes(&self) -> impl Iterator<Item = &EntityRef> {
        self.nodes.values()
    }

    pub fn node(&self, qualified_name: &str) -> Option<&EntityRef> {
        self.nodes.get(qualified_name)
    }

    pub fn edges(&self) -> impl Iterator<Item = &DependencyEdge> {
        self.edges.values()
    }

    pub fn edge_count(&self) -> usize {
        self.edges.len()
    }

    pub fn node_count(&self) -> usize {
        self.nodes.len()
    }

    pub fn contains_edge(&self, key: &EdgeKey) -> bool {
        self.edges.contains_key(key)
    }

    pub fn count_by_kind(&self) -> BTreeMap<EdgeKind, usize> {
        let mut counts = BTreeMap::new();
        for edge in self.edges.values() {
            *counts.entry(edge.kind).or_insert(0) += 1;
        }
        counts
    }

    pub(crate) fn edges_mut(&mut self) -> impl Iterator<Item = &mut DependencyEdge> {
        self.edges.values_mut()
    }

    pub(crate) fn nodes_mut(&mut self) -> impl Iterator<Item = &mut EntityRef> {
        self.nodes.values_mut()
    }

    /// Keeps the edges accepted by `keep`. Nodes that lose every edge are
    /// dropped; nodes that never had one stay.
    pub(crate) fn retain_edges(&mut self, mut keep: impl FnMut(&DependencyEdge) -> bool) {
        let mut touched = std::collections::BTreeSet::new();
        for edge in self.edges.values() {
            touched.insert(edge.source.qualified_name().to_string());
            touched.insert(edge.target.qualified_name().to_string());
        }
        self.edges.retain(|_, e| keep(e));
        let mut used = std::collections::BTreeSet::new();
        for edge in self.edges.values() {
            used.insert(edge.source.qualified_name().to_string());
            used.insert(edge.target.qualified_name().to_string());
        }
        self.nodes
            .retain(|name, _| used.contains(name) || !touched.contains(name));
    }

    /// Merges another graph into this one.
    pub fn extend(&mut self, other: DependencyGraph) {
        for node in other.nodes.into_values() {
            self.add_node(node);
        }
        for edge in other.edges.into_values() {
            self.add_edge(edge);
        }
    }

    /// Checks the structural invariants: every edge endpoint is a node, and
    /// the stored endpoint matches the node entry.
    pub fn check_invariants(&self) -> Result<(), ModelError> {
        for edge in self.edges.values() {
            for end in [&edge.source, &edge.target] {
                if !self.nodes.contains_key(end.qualified_name()) {
                    return Err(ModelError::DanglingEndpoint(end.qualified_name().to_string()));
                }
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn f(name: &str) -> EntityRef {
        EntityRef::internal(name, EntityKind::Function, "m.py", None).unwrap()
    }

    #[test]
    fn dedup_ignores_line_and_keeps_smallest() {
        let mut g = DependencyGraph::new();
        g.add_edge(DependencyEdge::new(f("m.f"), f("m.g"), EdgeKind::Call, 9).unwrap());
        g.add_edge(DependencyEdge::new(f("m.f"), f("m.g"), EdgeKind::Call, 3).unwrap());
        g.add_edge(DependencyEdge::new(f("m.f"), f("m.g"), EdgeKind::Decorate, 3).unwrap());
        assert_eq!(g.edge_count(), 2);
        assert_eq!(g.edges().next().unwrap().line(), 3);
        g.check_invariants().unwrap();
    }

    #[test]
    fn external_source_is_rejected() {
        let ext = EntityRef::external("os.getcwd", EntityKind::Function).unwrap();
        assert!(matches!(
            DependencyEdge::new(ext, f("m.g"), EdgeKind::Call, 1),
            Err(ModelError::ExternalSource(_))
        ));
    }

    #[test]
    fn inherit_requires_class_endpoints() {
        let class = EntityRef::internal("m.B", EntityKind::Class, "m.py", None).unwrap();
        let base = EntityRef::internal("m.A", EntityKind::Class, "m.py", None).unwrap();
        assert!(DependencyEdge::new(class.clone(), base, EdgeKind::Inherit, 1).is_ok());
        assert!(DependencyEdge::new(f("m.f"), class.clone(), EdgeKind::Inherit, 1).is_err());
        assert!(DependencyEdge::new(class, f("m.g"), EdgeKind::Inherit, 1).is_err());
    }

    #[test]
    fn edge_kind_order_matches_names() {
        let mut names: Vec<_> = EdgeKind::ALL.iter().map(|k| k.as_str()).collect();
        names.sort();
        let by_ord: Vec<_> = EdgeKind::ALL.iter().map(|k| k.as_str()).collect();
        assert_eq!(names, by_ord);
    }
}
