//! Project-wide tables of modules and definitions.

use std::collections::HashMap;

use super::value::{DefId, ModuleId};
use crate::frontend::ast::*;
use crate::frontend::{resolve_imports, Diagnostic, ImportTable, Project, ScopeId, ScopeTree};
use crate::model::{EntityKind, Span};

#[derive(Debug, Clone)]
pub struct ModuleInfo {
    pub name: String,
    /// Project-relative file; the directory for namespace packages.
    pub file: String,
    pub is_package: bool,
    /// `None` for namespace packages, which have no source.
    pub tree: Option<ScopeTree>,
    /// Definition that opens each scope, indexed by scope id.
    pub scope_defs: Vec<Option<DefId>>,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum DefKind {
    Function,
    Lambda,
    Class,
}

/// How a decorator changes attribute access on a class member.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum MethodKind {
    #[default]
    Plain,
    Static,
    ClassMethod,
    /// A property getter: reading the attribute calls it.
    Property,
    /// A property setter or deleter: never called by a plain read.
    PropertyAccessor,
}

#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct ParamInfo {
    pub positional: Vec<String>,
    pub vararg: Option<String>,
    pub kwonly: Vec<String>,
    pub kwarg: Option<String>,
}

impl ParamInfo {
    fn from_params(params: &Parameters) -> Self {
        ParamInfo {
            positional: params.positional.iter().map(|p| p.name.clone()).collect(),
            vararg: params.vararg.as_ref().map(|p| p.name.clone()),
            kwonly: params.kwonly.iter().map(|p| p.name.clone()).collect(),
            kwarg: params.kwarg.as_ref().map(|p| p.name.clone()),
        }
    }
}

#[derive(Debug, Clone)]
pub struct Def {
    pub kind: DefKind,
    pub name: String,
    pub module: ModuleId,
    /// Scope the definition opens.
    pub scope: ScopeId,
    /// Scope the definition's name is bound in.
    pub parent: ScopeId,
    pub node: NodeId,
    pub span: Span,
    pub params: ParamInfo,
    pub is_generator: bool,
    pub method_kind: MethodKind,
}

impl Def {
    pub fn entity_kind(&self) -> EntityKind {
        match self.kind {
            DefKind::Function => EntityKind::Function,
            DefKind::Lambda => EntityKind::Lambda,
            DefKind::Class => EntityKind::Class,
        }
    }
}

#[derive(Debug, Clone)]
pub struct Program {
    pub modules: Vec<ModuleInfo>,
    pub defs: Vec<Def>,
    pub imports: ImportTable,
    pub diagnostics: Vec<Diagnostic>,
    by_binding: HashMap<(ModuleId, ScopeId, String), Vec<DefId>>,
}

impl Program {
    pub fn build(project: &Project) -> Program {
        let mut trees: Vec<ScopeTree> = project.modules.iter().map(ScopeTree::build).collect();
        let imports = resolve_imports(&project.modules, &trees);
        imports.apply_star_imports(&mut trees);

        let mut program = Program {
            modules: Vec::new(),
            defs: Vec::new(),
            diagnostics: imports.diagnostics.clone(),
            imports,
            by_binding: HashMap::new(),
        };
        for (idx, (module, tree)) in project.modules.iter().zip(trees).enumerate() {
            let mut info = ModuleInfo {
                name: module.name.clone(),
                file: module.file.clone(),
                is_package: module.is_package,
                scope_defs: vec![None; tree.len()],
                tree: Some(tree),
            };
            let mut collector = DefCollector {
                module: idx as ModuleId,
                info: &mut info,
                defs: &mut program.defs,
                by_binding: &mut program.by_binding,
            };
            collector.block(ScopeTree::ROOT, &module.body);
            program.modules.push(info);
        }
        for name in &program.imports.module_names[project.modules.len()..] {
            program.modules.push(ModuleInfo {
                name: name.clone(),
                file: name.replace('.', "/"),
                is_package: true,
                tree: None,
                scope_defs: Vec::new(),
            });
        }
        program
    }

    pub fn def(&self, id: DefId) -> &Def {
        &self.defs[id as usize]
    }

    pub fn module(&self, id: ModuleId) -> &ModuleInfo {
        &self.modules[id as usize]
    }

    pub fn module_index(&self, name: &str) -> Option<ModuleId> {
        self.imports.module_index(name).map(|m| m as ModuleId)
    }

    /// Definitions whose name is bound as `name` in the given scope.
    pub fn defs_bound_as(&self, module: ModuleId, scope: ScopeId, name: &str) -> &[DefId] {
        self.by_binding
            .get(&(module, scope, name.to_string()))
            .map(Vec::as_slice)
            .unwrap_or_default()
    }

    /// Qualified name of a scope's entity.
    pub fn scope_name(&self, module: ModuleId, scope: ScopeId) -> &str {
        match &self.module(module).tree {
            Some(tree) => &tree.scope(scope).name,
            None => &self.module(module).name,
        }
    }

    /// Definition opening `scope`, if it is not the module scope.
    pub fn scope_def(&self, module: ModuleId, scope: ScopeId) -> Option<DefId> {
        self.module(module)
            .scope_defs
            .get(scope as usize)
            .copied()
            .flatten()
    }

    /// Innermost function or lambda enclosing `scope`.
    pub fn enclosing_function(&self, module: ModuleId, mut scope: ScopeId) -> Option<DefId> {
        let tree = self.module(module).tree.as_ref()?;
        loop {
            if let Some(def) = self.scope_def(module, scope) {
                if self.def(def).kind != DefKind::Class {
                    return Some(def);
                }
                return None;
            }
            scope = tree.scope(scope).parent?;
        }
    }
}

struct DefCollector<'a> {
    module: ModuleId,
    info: &'a mut ModuleInfo,
    defs: &'a mut Vec<Def>,
    by_binding: &'a mut HashMap<(ModuleId, ScopeId, String), Vec<DefId>>,
}

impl DefCollector<'_> {
    fn tree(&self) -> &ScopeTree {
        self.info.tree.as_ref().expect("source module has a tree")
    }

    fn add(
        &mut self,
        kind: DefKind,
        node: NodeId,
        parent: ScopeId,
        span: Span,
        params: ParamInfo,
    ) -> Option<(DefId, ScopeId)> {
        let scope = self.tree().scope_of_node(node)?;
        let id = self.defs.len() as DefId;
        self.defs.push(Def {
            kind,
            name: self.tree().scope(scope).name.clone(),
            module: self.module,
            scope,
            parent,
            node,
            span,
            params,
            is_generator: false,
            method_kind: MethodKind::Plain,
        });
        self.info.scope_defs[scope as usize] = Some(id);
        Some((id, scope))
    }

    fn bind(&mut self, scope: ScopeId, name: &str, def: DefId) {
        self.by_binding
            .entry((self.module, scope, name.to_string()))
            .or_default()
            .push(def);
    }

    fn block(&mut self, scope: ScopeId, stmts: &[Stmt]) {
        for stmt in stmts {
            self.stmt(scope, stmt);
        }
    }

    fn stmt(&mut self, scope: ScopeId, stmt: &Stmt) {
        match &stmt.kind {
            StmtKind::FunctionDef(def) => {
                for e in &def.decorators {
                    self.expr(scope, e);
                }
                for p in def.params.iter() {
                    if let Some(d) = &p.default {
                        self.expr(scope, d);
                    }
                }
                let params = ParamInfo::from_params(&def.params);
                if let Some((id, inner)) = self.add(DefKind::Function, def.id, scope, stmt.span, params) {
                    self.defs[id as usize].method_kind = method_kind(&def.decorators);
                    self.defs[id as usize].is_generator = contains_yield(&def.body);
                    self.bind(scope, &def.name, id);
                    self.block(inner, &def.body);
                }
            }
            StmtKind::ClassDef(def) => {
                for e in def.decorators.iter().chain(&def.bases) {
                    self.expr(scope, e);
                }
                for k in &def.keywords {
                    self.expr(scope, &k.value);
                }
                if let Some((id, inner)) =
                    self.add(DefKind::Class, def.id, scope, stmt.span, ParamInfo::default())
                {
                    self.bind(scope, &def.name, id);
                    self.block(inner, &def.body);
                }
            }
            _ => {
                for_each_stmt_expr(stmt, |e| self.expr(scope, e));
                for block in child_blocks(stmt) {
                    self.block(scope, block);
                }
            }
        }
    }

    fn expr(&mut self, scope: ScopeId, expr: &Expr) {
        match &expr.kind {
            ExprKind::Lambda(lambda) => {
                for p in lambda.params.iter() {
                    if let Some(d) = &p.default {
                        self.expr(scope, d);
                    }
                }
                let params = ParamInfo::from_params(&lambda.params);
                if let Some((_, inner)) = self.add(DefKind::Lambda, expr.id, scope, expr.span, params) {
                    self.expr(inner, &lambda.body);
                }
            }
            ExprKind::Comprehension(_) => {
                let inner = self.tree().scope_of_node(expr.id).unwrap_or(scope);
                for child in expr.children() {
                    self.expr(inner, child);
                }
            }
            _ => {
                for child in expr.children() {
                    self.expr(scope, child);
                }
            }
        }
    }
}

/// Calls `f` on the expressions a statement evaluates directly, not counting
/// nested blocks.
pub(crate) fn for_each_stmt_expr<'a>(stmt: &'a Stmt, mut f: impl FnMut(&'a Expr)) {
    match &stmt.kind {
        StmtKind::Assign { targets, value } => {
            f(value);
            targets.iter().for_each(f);
        }
        StmtKind::AugAssign { target, value } => {
            f(value);
            f(target);
        }
        StmtKind::Declare { target } => f(target),
        StmtKind::Return(v) => v.iter().for_each(f),
        StmtKind::Delete(ts) => ts.iter().for_each(f),
        StmtKind::For { target, iter, .. } => {
            f(iter);
            f(target);
        }
        StmtKind::While { test, .. } | StmtKind::If { test, .. } => f(test),
        StmtKind::With { items, .. } => {
            for item in items {
                f(&item.context);
                item.target.iter().for_each(&mut f);
            }
        }
        StmtKind::Raise { exc, cause } => exc.iter().chain(cause).for_each(f),
        StmtKind::Try { handlers, .. } => {
            for h in handlers {
                h.class.iter().for_each(&mut f);
            }
        }
        StmtKind::Assert { test, msg } => {
            f(test);
            msg.iter().for_each(f);
        }
        StmtKind::Expr(e) => f(e),
        StmtKind::Opaque { exprs, .. } => exprs.iter().for_each(f),
        StmtKind::FunctionDef(_)
        | StmtKind::ClassDef(_)
        | StmtKind::Import(_)
        | StmtKind::ImportFrom { .. }
        | StmtKind::Global(_)
        | StmtKind::Nonlocal(_)
        | StmtKind::Pass
        | StmtKind::Break
        | StmtKind::Continue => {}
    }
}

fn method_kind(decorators: &[Expr]) -> MethodKind {
    for d in decorators {
        match &d.kind {
            ExprKind::Name(n) if n == "staticmethod" => return MethodKind::Static,
            ExprKind::Name(n) if n == "classmethod" => return MethodKind::ClassMethod,
            ExprKind::Name(n) if n == "property" || n == "cached_property" => return MethodKind::Property,
            ExprKind::Attribute { attr, .. } if attr == "cached_property" => return MethodKind::Property,
            ExprKind::Attribute { attr, .. } if attr == "setter" || attr == "deleter" || attr == "getter" => {
                return MethodKind::PropertyAccessor
            }
            _ => {}
        }
    }
    MethodKind::Plain
}

/// Whether a function body yields, ignoring nested definitions.
fn contains_yield(body: &[Stmt]) -> bool {
    fn expr_yields(e: &Expr) -> bool {
        match &e.kind {
            ExprKind::Yield(_) | ExprKind::YieldFrom(_) => true,
            ExprKind::Lambda(_) => false,
            _ => e.children().into_iter().any(expr_yields),
        }
    }
    body.iter().any(|stmt| match &stmt.kind {
        StmtKind::FunctionDef(_) | StmtKind::ClassDef(_) => false,
        _ => {
            let mut found = false;
            for_each_stmt_expr(stmt, |e| found |= expr_yields(e));
            found || child_blocks(stmt).into_iter().any(contains_yield)
        }
    })
}
