//! Turning a resolved project into a [`DependencyGraph`].

use std::collections::BTreeSet;
use std::path::Path;

use thiserror::Error;

use crate::config::ProjectConfig;
use crate::error::Result;
use crate::frontend::{Diagnostic, ImportTarget, Project};
use crate::model::{DependencyEdge, DependencyGraph, EdgeKind, EntityKind, EntityRef};
use crate::resolver::{
    resolve, ClassRef, DefKind, HigherOrderTable, Owner, Resolution, ResolverOptions, ScopeRef, SolveStats,
    TargetRef,
};

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum ExtractError {
    #[error("no edge kinds selected")]
    EmptyKinds,
}

/// What to extract.
#[derive(Debug, Clone)]
pub struct ExtractOptions {
    pub config: ProjectConfig,
    pub max_iters: usize,
    /// Keep edges whose target lies outside the project.
    pub include_external: bool,
    /// Edge kinds to keep; all of them by default.
    pub kinds: BTreeSet<EdgeKind>,
}

impl Default for ExtractOptions {
    fn default() -> Self {
        ExtractOptions {
            config: ProjectConfig::default(),
            max_iters: 1000,
            include_external: true,
            kinds: EdgeKind::ALL.into_iter().collect(),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Extraction {
    pub graph: DependencyGraph,
    /// Files skipped, unresolved imports and hierarchy problems.
    pub diagnostics: Vec<Diagnostic>,
    pub modules: usize,
    pub stats: SolveStats,
}

/// Discovers, parses, resolves and extracts the project under `root`.
pub fn extract_project(root: &Path, options: &ExtractOptions) -> Result<Extraction> {
    let project = Project::load(root, &options.config)?;
    extract_loaded(&project, options)
}

/// Like [`extract_project`] for a project already in memory.
pub fn extract_loaded(project: &Project, options: &ExtractOptions) -> Result<Extraction> {
    let higher_order = match &options.config.builtins_file {
        Some(path) => HigherOrderTable::load(path)?,
        None => HigherOrderTable::default(),
    };
    let resolver_options = ResolverOptions {
        max_iters: options.max_iters,
        higher_order,
    };
    let resolution = resolve(project, &resolver_options)?;
    let graph = extract_edges(&resolution);
    let modules: BTreeSet<String> = resolution
        .program()
        .modules
        .iter()
        .map(|m| m.name.clone())
        .collect();
    let graph = classify_external(graph, &modules);
    let graph = filter_edges(&graph, options.include_external, &options.kinds)?;
    let mut diagnostics = project.diagnostics.clone();
    diagnostics.extend(resolution.diagnostics().iter().cloned());
    Ok(Extraction {
        graph,
        diagnostics,
        modules: project.modules.len(),
        stats: resolution.stats(),
    })
}

/// Every module and definition as a node, every resolved reference as an
/// edge. Sources are the innermost named scope of the reference.
pub fn extract_edges(resolution: &Resolution) -> DependencyGraph {
    let program = resolution.program();
    let mut graph = DependencyGraph::new();
    for module in &program.modules {
        if let Ok(entity) = EntityRef::internal(&module.name, EntityKind::Module, &module.file, None) {
            graph.add_node(entity);
        }
    }
    for (id, def) in program.defs.iter().enumerate() {
        let file = &program.module(def.module).file;
        let name = resolution.def_name(id as u32);
        if let Ok(entity) = EntityRef::internal(name, def.entity_kind(), file, Some(def.span)) {
            graph.add_node(entity);
        }
    }

    let mut add = |source: &EntityRef, target: &TargetRef, kind: EdgeKind, line: u32| {
        let Some(target) = target_entity(resolution, target) else {
            return;
        };
        if let Ok(edge) = DependencyEdge::new(source.clone(), target, kind, line) {
            graph.add_edge(edge);
        }
    };

    for edge in resolution.edges() {
        let Some(source) = source_entity(resolution, edge.source) else {
            continue;
        };
        add(&source, &edge.target, edge.kind, edge.line);
    }

    for (id, def) in program.defs.iter().enumerate() {
        if def.kind != DefKind::Class {
            continue;
        }
        let id = id as u32;
        let source = ScopeRef {
            module: def.module,
            scope: def.scope,
        };
        let Some(source) = source_entity(resolution, source) else {
            continue;
        };
        for base in resolution.bases(id) {
            let target = match base {
                ClassRef::Project(b) => TargetRef::Def(*b),
                ClassRef::External(n) => TargetRef::External(n.clone()),
            };
            add(&source, &target, EdgeKind::Inherit, def.span.start_line);
        }
    }

    for (m, bindings) in program.imports.bindings.iter().enumerate() {
        let Some(tree) = program.module(m as u32).tree.as_ref() else {
            continue;
        };
        for binding in bindings {
            let source = ScopeRef {
                module: m as u32,
                scope: tree.named_scope(binding.scope),
            };
            let Some(source) = source_entity(resolution, source) else {
                continue;
            };
            let targets = match &binding.imported {
                ImportTarget::Module(i) => vec![TargetRef::Module(*i as u32)],
                ImportTarget::Member { module, name } => {
                    let defs = program.defs_bound_as(*module as u32, crate::frontend::ScopeTree::ROOT, name);
                    if defs.is_empty() {
                        vec![TargetRef::Member {
                            owner: Owner::Module(*module as u32),
                            name: name.clone(),
                        }]
                    } else {
                        defs.iter().map(|d| TargetRef::Def(*d)).collect()
                    }
                }
                ImportTarget::External(n) => vec![TargetRef::External(n.clone())],
                ImportTarget::Unresolved(_) => Vec::new(),
            };
            for t in &targets {
                add(&source, t, EdgeKind::Import, binding.line);
            }
        }
    }
    graph
}

fn source_entity(resolution: &Resolution, source: ScopeRef) -> Option<EntityRef> {
    let file = &resolution.program().module(source.module).file;
    let span = resolution
        .program()
        .scope_def(source.module, source.scope)
        .map(|d| resolution.program().def(d).span);
    EntityRef::internal(
        resolution.source_name(source),
        resolution.source_kind(source),
        file,
        span,
    )
    .ok()
}

fn target_entity(resolution: &Resolution, target: &TargetRef) -> Option<EntityRef> {
    let name = resolution.target_name(target);
    let kind = resolution.target_kind(target);
    let span = match target {
        TargetRef::Def(d) => Some(resolution.program().def(*d).span),
        _ => None,
    };
    match resolution.target_file(target) {
        Some(file) => EntityRef::internal(name, kind, file, span).ok(),
        None => EntityRef::external(name, kind).ok(),
    }
}

/// Whether `name` is `module` or lies inside it.
fn in_module(name: &str, modules: &BTreeSet<String>) -> bool {
    let mut prefix = name;
    loop {
        if modules.contains(prefix) {
            return true;
        }
        match prefix.rfind('.') {
            Some(i) => prefix = &prefix[..i],
            None => return false,
        }
    }
}

/// Marks every target that does not belong to one of `modules` as external.
pub fn classify_external(mut graph: DependencyGraph, modules: &BTreeSet<String>) -> DependencyGraph {
    for edge in graph.edges_mut() {
        let target = edge.target();
        if !target.is_external() && !in_module(target.qualified_name(), modules) {
            let external = target.clone().into_external();
            edge.set_target(external);
        }
    }
    for node in graph.nodes_mut() {
        if !node.is_external() && !in_module(node.qualified_name(), modules) {
            *node = node.clone().into_external();
        }
    }
    graph
}

/// Edges of the selected kinds, without external targets unless asked
/// for. Nodes that lose all their edges are dropped.
pub fn filter_edges(
    graph: &DependencyGraph,
    include_external: bool,
    kinds: &BTreeSet<EdgeKind>,
) -> Result<DependencyGraph, ExtractError> {
    if kinds.is_empty() {
        return Err(ExtractError::EmptyKinds);
    }
    let mut out = graph.clone();
    out.retain_edges(|e| kinds.contains(&e.kind()) && (include_external || !e.target().is_external()));
    Ok(out)
}
