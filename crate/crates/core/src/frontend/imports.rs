//! Import resolution.
//!
//! Absolute names resolve against project modules first; a name that is not
//! a project module is also tried relative to the importing module's own
//! package, which matches how scripts run from their directory see their
//! siblings. Anything else is external. Directory prefixes of project modules
//! that have no `__init__` file become empty namespace packages.

use std::collections::{BTreeSet, HashMap};

use super::ast::*;
use super::scope::{ScopeId, ScopeTree};
use super::{Diagnostic, Severity, SourceModule};

/// What an import name refers to.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ImportTarget {
    /// A project module, by index into [`ImportTable::module_names`].
    Module(usize),
    /// A name defined in a project module.
    Member { module: usize, name: String },
    /// A module or member outside the project, by dotted name.
    External(String),
    /// A relative import that points outside the project or at a missing
    /// module.
    Unresolved(String),
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ImportBinding {
    /// Scope of the import statement.
    pub scope: ScopeId,
    /// Name bound in `scope`; `None` for star imports.
    pub local_name: Option<String>,
    /// Value bound to `local_name`.
    pub bound: ImportTarget,
    /// What the statement imports; for `import a.b` this is `a.b` while the
    /// bound value is `a`.
    pub imported: ImportTarget,
    pub line: u32,
}

#[derive(Debug, Clone, Default)]
pub struct ImportTable {
    /// Per project module, in the order of the input slice.
    pub bindings: Vec<Vec<ImportBinding>>,
    /// Names of all modules: the input modules first, then namespace
    /// packages.
    pub module_names: Vec<String>,
    pub diagnostics: Vec<Diagnostic>,
    index: HashMap<String, usize>,
    packages: Vec<bool>,
}

impl ImportTable {
    pub fn module_index(&self, name: &str) -> Option<usize> {
        self.index.get(name).copied()
    }

    pub fn is_package(&self, module: usize) -> bool {
        self.packages[module]
    }

    /// Qualified name a target refers to.
    pub fn target_name(&self, target: &ImportTarget) -> String {
        match target {
            ImportTarget::Module(m) => self.module_names[*m].clone(),
            ImportTarget::Member { module, name } => qualify(&self.module_names[*module], name),
            ImportTarget::External(name) | ImportTarget::Unresolved(name) => name.clone(),
        }
    }

    /// Copies the public module-level names of star-imported project modules
    /// into the importing modules, transitively.
    pub fn apply_star_imports(&self, trees: &mut [ScopeTree]) {
        let stars: Vec<(usize, usize)> = self
            .bindings
            .iter()
            .enumerate()
            .flat_map(|(m, bs)| {
                bs.iter().filter_map(move |b| match (&b.local_name, &b.bound) {
                    (None, ImportTarget::Module(src)) if b.scope == ScopeTree::ROOT => Some((m, *src)),
                    _ => None,
                })
            })
            .collect();
        let mut changed = true;
        while changed {
            changed = false;
            for &(into, from) in &stars {
                if from >= trees.len() || from == into {
                    continue;
                }
                let names: Vec<String> = trees[from]
                    .scope(ScopeTree::ROOT)
                    .bindings
                    .iter()
                    .filter(|n| !n.starts_with('_'))
                    .cloned()
                    .collect();
                for name in names {
                    changed |= trees[into].add_global_binding(&name);
                }
            }
        }
    }

    fn resolve_absolute(&self, name: &str, importer: usize) -> Option<usize> {
        if let Some(idx) = self.module_index(name) {
            return Some(idx);
        }
        let package = self.package_of(importer);
        if package.is_empty() {
            return None;
        }
        self.module_index(&qualify(&package, name))
    }

    /// Package that relative imports in `module` start from.
    fn package_of(&self, module: usize) -> String {
        let name = &self.module_names[module];
        if self.packages[module] {
            name.clone()
        } else {
            name.rsplit_once('.')
                .map(|(p, _)| p.to_string())
                .unwrap_or_default()
        }
    }
}

fn qualify(prefix: &str, name: &str) -> String {
    if prefix.is_empty() {
        name.to_string()
    } else {
        format!("{prefix}.{name}")
    }
}

/// Resolves every import statement of every module.
pub fn resolve_imports(modules: &[SourceModule], trees: &[ScopeTree]) -> ImportTable {
    let mut table = ImportTable::default();
    for module in modules {
        if !table.index.contains_key(&module.name) {
            table.index.insert(module.name.clone(), table.module_names.len());
        }
        table.module_names.push(module.name.clone());
        table.packages.push(module.is_package);
    }
    let mut namespaces = BTreeSet::new();
    for module in modules {
        let mut prefix = module.name.as_str();
        while let Some((parent, _)) = prefix.rsplit_once('.') {
            if !table.index.contains_key(parent) {
                namespaces.insert(parent.to_string());
            }
            prefix = parent;
        }
    }
    for ns in namespaces {
        table.index.insert(ns.clone(), table.module_names.len());
        table.module_names.push(ns);
        table.packages.push(true);
    }

    for (idx, module) in modules.iter().enumerate() {
        let mut out = Vec::new();
        let mut diags = Vec::new();
        let mut walker = Walker {
            table: &table,
            tree: &trees[idx],
            importer: idx,
            file: &module.file,
            out: &mut out,
            diags: &mut diags,
        };
        walker.block(ScopeTree::ROOT, &module.body);
        table.bindings.push(out);
        table.diagnostics.extend(diags);
    }
    table
}

struct Walker<'a> {
    table: &'a ImportTable,
    tree: &'a ScopeTree,
    importer: usize,
    file: &'a str,
    out: &'a mut Vec<ImportBinding>,
    diags: &'a mut Vec<Diagnostic>,
}

impl Walker<'_> {
    fn block(&mut self, scope: ScopeId, stmts: &[Stmt]) {
        for stmt in stmts {
            match &stmt.kind {
                StmtKind::FunctionDef(def) => {
                    if let Some(inner) = self.tree.scope_of_node(def.id) {
                        self.block(inner, &def.body);
                    }
                }
                StmtKind::ClassDef(def) => {
                    if let Some(inner) = self.tree.scope_of_node(def.id) {
                        self.block(inner, &def.body);
                    }
                }
                StmtKind::Import(names) => {
                    for n in names {
                        self.import(scope, n);
                    }
                }
                StmtKind::ImportFrom { module, level, names } => {
                    for n in names {
                        self.import_from(scope, module.as_deref(), *level, n);
                    }
                }
                _ => {
                    for block in child_blocks(stmt) {
                        self.block(scope, block);
                    }
                }
            }
        }
    }

    fn import(&mut self, scope: ScopeId, n: &ImportName) {
        let imported = match self.table.resolve_absolute(&n.name, self.importer) {
            Some(m) => ImportTarget::Module(m),
            None => ImportTarget::External(n.name.clone()),
        };
        let (local, bound) = match &n.alias {
            Some(alias) => (alias.clone(), imported.clone()),
            None => {
                let head = n.name.split('.').next().unwrap_or(&n.name).to_string();
                let bound = if head == n.name {
                    imported.clone()
                } else {
                    match &imported {
                        // `import pkg.mod` binds `pkg`, resolved the same way
                        // `pkg.mod` was.
                        ImportTarget::Module(m) => {
                            let full = &self.table.module_names[*m];
                            let prefix_len = full.len() - n.name.len();
                            let head_full = format!("{}{}", &full[..prefix_len], head);
                            self.table
                                .module_index(&head_full)
                                .map(ImportTarget::Module)
                                .unwrap_or_else(|| ImportTarget::External(head.clone()))
                        }
                        _ => ImportTarget::External(head.clone()),
                    }
                };
                (head, bound)
            }
        };
        self.out.push(ImportBinding {
            scope,
            local_name: Some(local),
            bound,
            imported,
            line: n.span.start_line,
        });
    }

    fn import_from(&mut self, scope: ScopeId, module: Option<&str>, level: u32, n: &ImportName) {
        let line = n.span.start_line;
        let base = if level == 0 {
            let name = module.unwrap_or_default();
            match self.table.resolve_absolute(name, self.importer) {
                Some(m) => Ok(Some(m)),
                None => Err(ImportTarget::External(name.to_string())),
            }
        } else {
            self.relative_base(module, level, line)
        };
        let target = match base {
            Ok(Some(m)) if n.name == "*" => ImportTarget::Module(m),
            Ok(Some(m)) => {
                let full = qualify(&self.table.module_names[m], &n.name);
                match self.table.module_index(&full) {
                    Some(sub) => ImportTarget::Module(sub),
                    None => ImportTarget::Member {
                        module: m,
                        name: n.name.clone(),
                    },
                }
            }
            // `from . import x` at the top level: the root is not a module,
            // so `x` must itself be one.
            Ok(None) => match self.table.module_index(&n.name) {
                Some(m) if n.name != "*" => ImportTarget::Module(m),
                _ => {
                    self.diagnose(line, format!("cannot resolve relative import of {}", n.name));
                    ImportTarget::Unresolved(n.name.clone())
                }
            },
            Err(ImportTarget::External(name)) if n.name != "*" => {
                ImportTarget::External(qualify(&name, &n.name))
            }
            Err(ImportTarget::Unresolved(name)) if n.name != "*" => {
                if name.ends_with('.') {
                    ImportTarget::Unresolved(format!("{name}{}", n.name))
                } else {
                    ImportTarget::Unresolved(qualify(&name, &n.name))
                }
            }
            Err(other) => other,
        };
        let local_name = if n.name == "*" {
            None
        } else {
            Some(n.alias.clone().unwrap_or_else(|| n.name.clone()))
        };
        self.out.push(ImportBinding {
            scope,
            local_name,
            bound: target.clone(),
            imported: target,
            line,
        });
    }

    /// Module a relative import starts from; `Ok(None)` is the project root.
    fn relative_base(
        &mut self,
        module: Option<&str>,
        level: u32,
        line: u32,
    ) -> Result<Option<usize>, ImportTarget> {
        let package = self.table.package_of(self.importer);
        let mut parts: Vec<&str> = if package.is_empty() {
            Vec::new()
        } else {
            package.split('.').collect()
        };
        let written = format!("{}{}", ".".repeat(level as usize), module.unwrap_or_default());
        for _ in 1..level {
            if parts.pop().is_none() {
                self.diagnose(
                    line,
                    format!("relative import {written} goes above the project root"),
                );
                return Err(ImportTarget::Unresolved(written));
            }
        }
        if let Some(m) = module {
            parts.extend(m.split('.'));
        }
        if parts.is_empty() {
            return Ok(None);
        }
        let name = parts.join(".");
        match self.table.module_index(&name) {
            Some(m) => Ok(Some(m)),
            None => {
                self.diagnose(line, format!("cannot resolve relative import {written}"));
                Err(ImportTarget::Unresolved(name))
            }
        }
    }

    fn diagnose(&mut self, line: u32, message: String) {
        self.diags.push(Diagnostic {
            severity: Severity::Warning,
            file: self.file.to_string(),
            line,
            message,
        });
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::Project;

    fn table(files: &[(&str, &str)]) -> (Project, ImportTable) {
        let project = Project::from_sources(files.iter().copied()).unwrap();
        let trees: Vec<_> = project.modules.iter().map(ScopeTree::build).collect();
        let table = resolve_imports(&project.modules, &trees);
        (project, table)
    }

    fn bound_names(t: &ImportTable, module: usize) -> Vec<(String, String)> {
        t.bindings[module]
            .iter()
            .map(|b| {
                (
                    b.local_name.clone().unwrap_or_else(|| "*".into()),
                    t.target_name(&b.bound),
                )
            })
            .collect()
    }

    #[test]
    fn relative_import_two_levels_up() {
        let (p, t) = table(&[
            ("a/__init__.py", ""),
            ("a/pkg/__init__.py", "def f(): pass\n"),
            ("a/b/__init__.py", ""),
            ("a/b/c.py", "from ..pkg import f as g\n"),
        ]);
        let c = p.modules.iter().position(|m| m.name == "a.b.c").unwrap();
        let b = &t.bindings[c][0];
        assert_eq!(b.local_name.as_deref(), Some("g"));
        assert_eq!(t.target_name(&b.bound), "a.pkg.f");
        assert!(matches!(b.bound, ImportTarget::Member { .. }));
    }

    #[test]
    fn every_import_shape() {
        let src = "\
import os
import os.path
import os.path as osp
import pkg
import pkg.mod
import pkg.mod as pm
from pkg import mod
from pkg.mod import f
from pkg.mod import f as g
from pkg import *
from os import getcwd
from os.path import join as j
from . import sibling
from .sibling import h
from .missing import z
from ... import far
";
        let (p, t) = table(&[
            ("main.py", src),
            ("sibling.py", "def h(): pass\n"),
            ("pkg/__init__.py", ""),
            ("pkg/mod.py", "def f(): pass\n"),
        ]);
        let main = p.modules.iter().position(|m| m.name == "main").unwrap();
        let got = bound_names(&t, main);
        let expected = [
            ("os", "os"),
            ("os", "os"),
            ("osp", "os.path"),
            ("pkg", "pkg"),
            ("pkg", "pkg"),
            ("pm", "pkg.mod"),
            ("mod", "pkg.mod"),
            ("f", "pkg.mod.f"),
            ("g", "pkg.mod.f"),
            ("*", "pkg"),
            ("getcwd", "os.getcwd"),
            ("j", "os.path.join"),
            ("sibling", "sibling"),
            ("h", "sibling.h"),
            ("z", "missing.z"),
            ("far", "...far"),
        ];
        let expected: Vec<(String, String)> = expected
            .iter()
            .map(|(a, b)| (a.to_string(), b.to_string()))
            .collect();
        assert_eq!(got, expected);
        assert!(matches!(t.bindings[main][1].imported, ImportTarget::External(ref n) if n == "os.path"));
        assert!(matches!(t.bindings[main][12].bound, ImportTarget::Module(_)));
        assert!(matches!(t.bindings[main][14].bound, ImportTarget::Unresolved(_)));
        assert!(matches!(t.bindings[main][15].bound, ImportTarget::Unresolved(_)));
        assert_eq!(t.diagnostics.len(), 2);
    }

    #[test]
    fn namespace_packages_and_star_imports() {
        let (p, t) = table(&[
            ("main.py", "from ns.impl import *\n"),
            ("ns/impl.py", "def work(): pass\n_hidden = 1\n"),
        ]);
        assert!(t.module_index("ns").is_some());
        let mut trees: Vec<_> = p.modules.iter().map(ScopeTree::build).collect();
        t.apply_star_imports(&mut trees);
        let main = p.modules.iter().position(|m| m.name == "main").unwrap();
        let root = trees[main].scope(ScopeTree::ROOT);
        assert!(root.bindings.contains("work"));
        assert!(!root.bindings.contains("_hidden"));
    }

    #[test]
    fn sibling_fallback_for_scripts() {
        let (p, t) = table(&[("app/main.py", "import helpers\n"), ("app/helpers.py", "")]);
        let main = p.modules.iter().position(|m| m.name == "app.main").unwrap();
        assert_eq!(t.target_name(&t.bindings[main][0].bound), "app.helpers");
    }
}
