//! Lexical scopes and name lookup.
//!
//! Lookup follows the usual local, enclosing, global order. Class bodies are
//! a scope of their own, but functions nested in a class do not see the
//! class's names.

use std::collections::{BTreeSet, HashMap};

use super::ast::*;
use super::SourceModule;
use crate::model::Span;

pub type ScopeId = u32;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum ScopeKind {
    Module,
    Class,
    Function,
    Lambda,
    Comprehension,
}

impl ScopeKind {
    /// Whether the scope gets its own entity in the graph.
    pub fn is_named(self) -> bool {
        matches!(self, ScopeKind::Module | ScopeKind::Class | ScopeKind::Function)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Scope {
    pub kind: ScopeKind,
    /// Qualified name. Comprehensions share the name of their parent.
    pub name: String,
    pub parent: Option<ScopeId>,
    /// Defining node; `None` for the module scope.
    pub node: Option<NodeId>,
    pub span: Option<Span>,
    pub bindings: BTreeSet<String>,
    pub globals: BTreeSet<String>,
    pub nonlocals: BTreeSet<String>,
    pub children: Vec<ScopeId>,
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ScopeTree {
    scopes: Vec<Scope>,
    by_node: HashMap<NodeId, ScopeId>,
    /// Number of `from m import *` statements.
    star_imports: usize,
}

impl ScopeTree {
    pub const ROOT: ScopeId = 0;

    pub fn build(module: &SourceModule) -> ScopeTree {
        let mut tree = ScopeTree {
            scopes: vec![Scope {
                kind: ScopeKind::Module,
                name: module.name.clone(),
                parent: None,
                node: None,
                span: None,
                bindings: BTreeSet::new(),
                globals: BTreeSet::new(),
                nonlocals: BTreeSet::new(),
                children: Vec::new(),
            }],
            by_node: HashMap::new(),
            star_imports: 0,
        };
        tree.block(Self::ROOT, &module.body);
        tree
    }

    pub fn scope(&self, id: ScopeId) -> &Scope {
        &self.scopes[id as usize]
    }

    pub fn len(&self) -> usize {
        self.scopes.len()
    }

    pub fn is_empty(&self) -> bool {
        self.scopes.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (ScopeId, &Scope)> {
        self.scopes.iter().enumerate().map(|(i, s)| (i as ScopeId, s))
    }

    /// Scope opened by a definition, lambda or comprehension node.
    pub fn scope_of_node(&self, node: NodeId) -> Option<ScopeId> {
        self.by_node.get(&node).copied()
    }

    pub fn has_star_imports(&self) -> bool {
        self.star_imports > 0
    }

    /// Adds a module-level binding, e.g. one introduced by a star import.
    pub fn add_global_binding(&mut self, name: &str) -> bool {
        self.scopes[Self::ROOT as usize].bindings.insert(name.to_string())
    }

    /// Innermost enclosing scope that has its own entity.
    pub fn named_scope(&self, mut id: ScopeId) -> ScopeId {
        while !self.scope(id).kind.is_named() {
            id = self.scope(id).parent.unwrap_or(Self::ROOT);
        }
        id
    }

    /// Scope whose binding `name` refers to when used in `from`, or `None`
    /// when no enclosing scope binds it (a builtin or an undefined name).
    pub fn lookup(&self, from: ScopeId, name: &str) -> Option<ScopeId> {
        let start = self.scope(from);
        if start.globals.contains(name) {
            return Some(Self::ROOT);
        }
        if start.nonlocals.contains(name) {
            return self.enclosing_function_binding(start.parent, name);
        }
        if start.bindings.contains(name) {
            return Some(from);
        }
        let mut current = start.parent;
        while let Some(id) = current {
            let scope = self.scope(id);
            if scope.kind != ScopeKind::Class || id == from {
                if scope.globals.contains(name) {
                    return Some(Self::ROOT);
                }
                if scope.bindings.contains(name) {
                    return Some(id);
                }
            }
            current = scope.parent;
        }
        None
    }

    fn enclosing_function_binding(&self, mut current: Option<ScopeId>, name: &str) -> Option<ScopeId> {
        while let Some(id) = current {
            let scope = self.scope(id);
            match scope.kind {
                ScopeKind::Module => return None,
                ScopeKind::Class => {}
                _ => {
                    if scope.bindings.contains(name) {
                        return Some(id);
                    }
                }
            }
            current = scope.parent;
        }
        None
    }

    fn push(&mut self, parent: ScopeId, kind: ScopeKind, name: String, node: NodeId, span: Span) -> ScopeId {
        let id = self.scopes.len() as ScopeId;
        self.scopes.push(Scope {
            kind,
            name,
            parent: Some(parent),
            node: Some(node),
            span: Some(span),
            bindings: BTreeSet::new(),
            globals: BTreeSet::new(),
            nonlocals: BTreeSet::new(),
            children: Vec::new(),
        });
        self.scopes[parent as usize].children.push(id);
        self.by_node.insert(node, id);
        id
    }

    fn bind(&mut self, scope: ScopeId, name: &str) {
        self.scopes[scope as usize].bindings.insert(name.to_string());
    }

    fn child_name(&self, parent: ScopeId, name: &str) -> String {
        format!("{}.{}", self.scope(parent).name, name)
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
                self.param_defaults(scope, &def.params);
                self.bind(scope, &def.name);
                let name = self.child_name(scope, &def.name);
                let inner = self.push(scope, ScopeKind::Function, name, def.id, stmt.span);
                for p in def.params.iter() {
                    self.bind(inner, &p.name);
                }
                self.block(inner, &def.body);
            }
            StmtKind::ClassDef(def) => {
                for e in def.decorators.iter().chain(&def.bases) {
                    self.expr(scope, e);
                }
                for k in &def.keywords {
                    self.expr(scope, &k.value);
                }
                self.bind(scope, &def.name);
                let name = self.child_name(scope, &def.name);
                let inner = self.push(scope, ScopeKind::Class, name, def.id, stmt.span);
                self.block(inner, &def.body);
            }
            StmtKind::Assign { targets, value } => {
                self.expr(scope, value);
                for t in targets {
                    self.target(scope, t);
                }
            }
            StmtKind::AugAssign { target, value } => {
                self.expr(scope, value);
                self.target(scope, target);
            }
            StmtKind::Declare { target } => self.target(scope, target),
            StmtKind::Return(value) => {
                if let Some(v) = value {
                    self.expr(scope, v);
                }
            }
            StmtKind::Delete(targets) => {
                for t in targets {
                    self.target(scope, t);
                }
            }
            StmtKind::For {
                target,
                iter,
                body,
                orelse,
            } => {
                self.expr(scope, iter);
                self.target(scope, target);
                self.block(scope, body);
                self.block(scope, orelse);
            }
            StmtKind::While { test, body, orelse } | StmtKind::If { test, body, orelse } => {
                self.expr(scope, test);
                self.block(scope, body);
                self.block(scope, orelse);
            }
            StmtKind::With { items, body } => {
                for item in items {
                    self.expr(scope, &item.context);
                    if let Some(t) = &item.target {
                        self.target(scope, t);
                    }
                }
                self.block(scope, body);
            }
            StmtKind::Raise { exc, cause } => {
                for e in exc.iter().chain(cause) {
                    self.expr(scope, e);
                }
            }
            StmtKind::Try {
                body,
                handlers,
                orelse,
                finalbody,
            } => {
                self.block(scope, body);
                for h in handlers {
                    if let Some(class) = &h.class {
                        self.expr(scope, class);
                    }
                    if let Some(name) = &h.name {
                        self.bind(scope, name);
                    }
                    self.block(scope, &h.body);
                }
                self.block(scope, orelse);
                self.block(scope, finalbody);
            }
            StmtKind::Assert { test, msg } => {
                self.expr(scope, test);
                if let Some(m) = msg {
                    self.expr(scope, m);
                }
            }
            StmtKind::Import(names) => {
                for n in names {
                    let bound = n
                        .alias
                        .as_deref()
                        .unwrap_or_else(|| n.name.split('.').next().unwrap_or(&n.name));
                    self.bind(scope, bound);
                }
            }
            StmtKind::ImportFrom { names, .. } => {
                for n in names {
                    if n.name == "*" {
                        self.star_imports += 1;
                    } else {
                        self.bind(scope, n.alias.as_deref().unwrap_or(&n.name));
                    }
                }
            }
            StmtKind::Global(names) => {
                let s = &mut self.scopes[scope as usize];
                s.globals.extend(names.iter().cloned());
                if scope != Self::ROOT {
                    for n in names {
                        self.bind(Self::ROOT, n);
                    }
                }
            }
            StmtKind::Nonlocal(names) => {
                self.scopes[scope as usize]
                    .nonlocals
                    .extend(names.iter().cloned());
            }
            StmtKind::Expr(e) => self.expr(scope, e),
            StmtKind::Pass | StmtKind::Break | StmtKind::Continue => {}
            StmtKind::Opaque { exprs, body, .. } => {
                for e in exprs {
                    self.expr(scope, e);
                }
                self.block(scope, body);
            }
        }
    }

    fn param_defaults(&mut self, scope: ScopeId, params: &Parameters) {
        for p in params.iter() {
            if let Some(d) = &p.default {
                self.expr(scope, d);
            }
        }
    }

    /// Binds the names in an assignment target and visits the expressions
    /// evaluated while assigning.
    fn target(&mut self, scope: ScopeId, target: &Expr) {
        match &target.kind {
            ExprKind::Name(name) => self.bind(scope, name),
            ExprKind::Sequence(elts) => {
                for e in elts {
                    self.target(scope, e);
                }
            }
            ExprKind::Starred(inner) => self.target(scope, inner),
            _ => self.expr(scope, target),
        }
    }

    fn expr(&mut self, scope: ScopeId, expr: &Expr) {
        match &expr.kind {
            ExprKind::Lambda(lambda) => {
                self.param_defaults(scope, &lambda.params);
                let name = self.child_name(
                    scope,
                    &format!("<lambda:{}:{}>", expr.span.start_line, expr.span.start_col),
                );
                let inner = self.push(scope, ScopeKind::Lambda, name, expr.id, expr.span);
                for p in lambda.params.iter() {
                    self.bind(inner, &p.name);
                }
                self.expr(inner, &lambda.body);
            }
            ExprKind::Comprehension(comp) => {
                let name = self.scope(scope).name.clone();
                let inner = self.push(scope, ScopeKind::Comprehension, name, expr.id, expr.span);
                for (i, clause) in comp.clauses.iter().enumerate() {
                    // The first iterable is evaluated in the enclosing scope.
                    self.expr(if i == 0 { scope } else { inner }, &clause.iter);
                    self.target(inner, &clause.target);
                    for cond in &clause.ifs {
                        self.expr(inner, cond);
                    }
                }
                self.expr(inner, &comp.element);
                if let Some(v) = &comp.value {
                    self.expr(inner, v);
                }
            }
            ExprKind::NamedExpr { target, value } => {
                self.expr(scope, value);
                let mut owner = scope;
                while self.scope(owner).kind == ScopeKind::Comprehension {
                    owner = self.scope(owner).parent.unwrap_or(Self::ROOT);
                }
                self.target(owner, target);
            }
            _ => {
                for child in expr.children() {
                    self.expr(scope, child);
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::frontend::parse_source;

    fn tree(src: &str) -> (SourceModule, ScopeTree) {
        let module = parse_source("m", "m.py", false, src).unwrap();
        let tree = ScopeTree::build(&module);
        (module, tree)
    }

    fn find(tree: &ScopeTree, name: &str) -> ScopeId {
        tree.iter()
            .find(|(_, s)| s.name == name && s.kind != ScopeKind::Comprehension)
            .map(|(id, _)| id)
            .unwrap_or_else(|| panic!("no scope {name}"))
    }

    #[test]
    fn method_skips_class_scope() {
        let (_, t) = tree("x = 1\nclass C:\n    x = 2\n    def m(self):\n        return x\n");
        let m = find(&t, "m.C.m");
        assert_eq!(t.lookup(m, "x"), Some(ScopeTree::ROOT));
        let c = find(&t, "m.C");
        assert_eq!(t.lookup(c, "x"), Some(c));
    }

    #[test]
    fn closures_see_enclosing_function() {
        let (_, t) = tree("def outer():\n    v = 1\n    def inner():\n        return v\n");
        let inner = find(&t, "m.outer.inner");
        assert_eq!(t.lookup(inner, "v"), Some(find(&t, "m.outer")));
        assert_eq!(t.lookup(inner, "len"), None);
    }

    #[test]
    fn global_and_nonlocal() {
        let src = "h = None\ndef f():\n    global h\n    h = 1\n\
                   def g():\n    n = 0\n    def k():\n        nonlocal n\n        n = 1\n";
        let (_, t) = tree(src);
        assert_eq!(t.lookup(find(&t, "m.f"), "h"), Some(ScopeTree::ROOT));
        assert_eq!(t.lookup(find(&t, "m.g.k"), "n"), Some(find(&t, "m.g")));
    }

    #[test]
    fn lambda_names_and_named_scope() {
        let (_, t) = tree("def f():\n    return lambda: g()\n");
        let lam = find(&t, "m.f.<lambda:2:12>");
        assert_eq!(t.scope(lam).kind, ScopeKind::Lambda);
        assert_eq!(t.named_scope(lam), find(&t, "m.f"));
    }

    #[test]
    fn comprehension_targets_are_local() {
        let (m, t) = tree("r = [x for x in y]\n");
        let StmtKind::Assign { value, .. } = &m.body[0].kind else {
            panic!()
        };
        let comp = t.scope_of_node(value.id).unwrap();
        assert_eq!(t.lookup(comp, "x"), Some(comp));
        assert_eq!(t.lookup(ScopeTree::ROOT, "x"), None);
        assert_eq!(t.named_scope(comp), ScopeTree::ROOT);
    }
}
