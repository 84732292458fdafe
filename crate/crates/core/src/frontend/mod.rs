//! Module discovery, parsing, scopes and import bindings.

pub mod ast;
mod discover;
mod imports;
mod lower;
mod scope;

use std::fmt;
use std::path::{Path, PathBuf};

use rayon::prelude::*;
use rustpython_parser::{ast as py, Parse};
use thiserror::Error;

pub use discover::{discover_modules, DiscoveryError, ModuleFile};
pub use imports::{resolve_imports, ImportBinding, ImportTable, ImportTarget};
pub use scope::{Scope, ScopeId, ScopeKind, ScopeTree};

use crate::config::ProjectConfig;
use crate::error::Error;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
#[error("{}:{line}:{col}: {message}", path.display())]
pub struct ParseError {
    pub path: PathBuf,
    pub line: u32,
    pub col: u32,
    pub message: String,
}

/// A parsed module.
#[derive(Debug, Clone, PartialEq)]
pub struct SourceModule {
    pub name: String,
    /// Project-relative path, `/`-separated.
    pub file: String,
    pub is_package: bool,
    pub body: Vec<ast::Stmt>,
    /// Number of node ids handed out; ids are `0..node_count`.
    pub node_count: u32,
    /// Constructs that were kept as opaque statements.
    pub opaque_count: usize,
}

/// Parses one module's source text.
pub fn parse_module(file: &ModuleFile, source: &str) -> Result<SourceModule, ParseError> {
    parse_source(&file.module_name, &file.relative, file.is_package, source).map_err(|mut e| {
        e.path = file.path.clone();
        e
    })
}

/// Parses source text given directly, e.g. in tests.
pub fn parse_source(
    name: &str,
    file: &str,
    is_package: bool,
    source: &str,
) -> Result<SourceModule, ParseError> {
    let suite = py::Suite::parse(source, file).map_err(|err| {
        let (line, col) = lower::LineIndex::new(source).position(usize::from(err.offset));
        ParseError {
            path: PathBuf::from(file),
            line,
            col,
            message: err.error.to_string(),
        }
    })?;
    let mut lowerer = lower::Lowerer::new(source);
    let body = lowerer.lower_suite(&suite);
    let opaque_count = ast::count_opaque(&body);
    Ok(SourceModule {
        name: name.to_string(),
        file: file.to_string(),
        is_package,
        body,
        node_count: lowerer.node_count(),
        opaque_count,
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord)]
pub enum Severity {
    Warning,
    Error,
}

/// A problem that did not stop the analysis.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord)]
pub struct Diagnostic {
    pub severity: Severity,
    pub file: String,
    pub line: u32,
    pub message: String,
}

impl fmt::Display for Diagnostic {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let level = match self.severity {
            Severity::Warning => "warning",
            Severity::Error => "error",
        };
        write!(f, "{level}: {}:{}: {}", self.file, self.line, self.message)
    }
}

/// Every module of a project that parsed, plus diagnostics for the rest.
#[derive(Debug, Clone, Default)]
pub struct Project {
    pub root: PathBuf,
    pub modules: Vec<SourceModule>,
    pub diagnostics: Vec<Diagnostic>,
}

impl Project {
    /// Discovers and parses the project under `root`. Files that cannot be
    /// read or parsed are reported as diagnostics and skipped.
    pub fn load(root: &Path, config: &ProjectConfig) -> Result<Project, Error> {
        let files = discover_modules(root, config)?;
        let results: Vec<Result<SourceModule, Diagnostic>> = files
            .par_iter()
            .map(|file| {
                let text = std::fs::read(&file.path).map_err(|err| Diagnostic {
                    severity: Severity::Error,
                    file: file.relative.clone(),
                    line: 0,
                    message: format!("cannot read file: {err}"),
                })?;
                let text = String::from_utf8_lossy(&text);
                parse_module(file, &text).map_err(|err| Diagnostic {
                    severity: Severity::Error,
                    file: file.relative.clone(),
                    line: err.line,
                    message: format!("syntax error at column {}: {}", err.col, err.message),
                })
            })
            .collect();
        let mut project = Project {
            root: root.to_path_buf(),
            ..Default::default()
        };
        for result in results {
            match result {
                Ok(module) => project.modules.push(module),
                Err(diag) => project.diagnostics.push(diag),
            }
        }
        Ok(project)
    }

    /// Builds a project from in-memory `(relative path, source)` pairs.
    pub fn from_sources<'a>(
        sources: impl IntoIterator<Item = (&'a str, &'a str)>,
    ) -> Result<Project, ParseError> {
        let mut project = Project::default();
        let mut sources: Vec<_> = sources.into_iter().collect();
        sources.sort();
        for (relative, text) in sources {
            let ext = relative.rsplit_once('.').map(|(_, e)| e).unwrap_or("py");
            let (name, is_package) = discover::module_name_for(relative, ext);
            project
                .modules
                .push(parse_source(&name, relative, is_package, text)?);
        }
        Ok(project)
    }
}

#[cfg(test)]
mod tests {
    use super::ast::*;
    use super::*;

    #[test]
    fn syntax_error_has_position() {
        let err = parse_source("m", "m.py", false, "def f(:\n    pass\n").unwrap_err();
        assert_eq!(err.line, 1);
        assert!(err.col >= 6);
    }

    #[test]
    fn match_statement_is_opaque_but_keeps_calls() {
        let src = "match x:\n    case 1:\n        f()\n";
        let module = parse_source("m", "m.py", false, src).unwrap();
        assert_eq!(module.opaque_count, 1);
        match &module.body[0].kind {
            StmtKind::Opaque { construct, body, .. } => {
                assert_eq!(*construct, "match");
                assert!(matches!(body[0].kind, StmtKind::Expr(_)));
            }
            other => panic!("unexpected {other:?}"),
        }
    }

    #[test]
    fn node_ids_are_unique() {
        let src = "def f(a=g()):\n    return [h(x) for x in a]\nclass C(B): pass\n";
        let module = parse_source("m", "m.py", false, src).unwrap();
        let mut seen = std::collections::HashSet::new();
        fn walk_expr(e: &Expr, seen: &mut std::collections::HashSet<NodeId>) {
            assert!(seen.insert(e.id));
            for c in e.children() {
                walk_expr(c, seen);
            }
        }
        for stmt in &module.body {
            match &stmt.kind {
                StmtKind::FunctionDef(def) => {
                    assert!(seen.insert(def.id));
                    for p in def.params.iter() {
                        walk_expr(p.default.as_ref().unwrap(), &mut seen);
                    }
                    if let StmtKind::Return(Some(e)) = &def.body[0].kind {
                        walk_expr(e, &mut seen);
                    }
                }
                StmtKind::ClassDef(def) => {
                    assert!(seen.insert(def.id));
                    walk_expr(&def.bases[0], &mut seen);
                }
                _ => {}
            }
        }
        assert!(seen.iter().all(|&id| id < module.node_count));
    }

    #[test]
    fn lambda_position_is_one_based() {
        let module = parse_source("m", "m.py", false, "f = lambda x: x\n").unwrap();
        let StmtKind::Assign { value, .. } = &module.body[0].kind else {
            panic!()
        };
        assert_eq!((value.span.start_line, value.span.start_col), (1, 5));
    }
}
