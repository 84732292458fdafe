//! Static reference resolution.
//!
//! Values (functions, classes, instances, modules, external names) flow
//! along an [`AssignmentGraph`] built from the whole project. Once the graph
//! reaches its fixpoint, every call, attribute access, raise and decorator
//! application is resolved against the values reaching it. Attribute lookups
//! on classes follow the C3 linearization of the hierarchy.
//!
//! The analysis is flow- and context-insensitive: one value set per
//! binding, parameter, attribute and container slot.

mod builtins;
mod graph;
mod mro;
mod program;
mod solve;
mod value;

use std::collections::{BTreeMap, BTreeSet};

pub use builtins::{is_builtin, CallbackArgs, HigherOrderTable, BUILTIN_NAMES};
pub use graph::{
    propagate_fixpoint, propagate_fixpoint_ordered, AssignmentGraph, FixpointError, IterationOrder, Solution,
    ValueId, ValueSet,
};
pub use mro::{c3_linearize, MroError};
pub use program::{Def, DefKind, MethodKind, ModuleInfo, ParamInfo, Program};
pub use solve::{ClassRef, Owner, ResolvedEdge, ResolverOptions, ScopeRef, Slot, SolveStats, TargetRef};
pub use value::{AbstractValue, ContainerKind, DefId, ModuleId, Receiver, Site};

use crate::frontend::{Diagnostic, Project, ScopeTree};
use crate::model::{EdgeKind, EntityKind};
use solve::Solver;

/// Resolves every reference in `project`.
pub fn resolve(project: &Project, options: &ResolverOptions) -> Result<Resolution, FixpointError> {
    let program = Program::build(project);
    let mut solver = Solver::new(program, options.clone());
    solver.build(project);
    solver.solve()?;
    let classes: Vec<DefId> = (0..solver.program.defs.len() as DefId)
        .filter(|&d| solver.program.def(d).kind == DefKind::Class)
        .collect();
    let mros = classes.into_iter().map(|c| (c, solver.mro(c))).collect();
    let mut diagnostics = solver.program.diagnostics.clone();
    diagnostics.extend(solver.diagnostics.iter().cloned());
    Ok(Resolution {
        solver,
        mros,
        diagnostics,
    })
}

/// The solved project.
pub struct Resolution {
    solver: Solver,
    mros: BTreeMap<DefId, Vec<ClassRef>>,
    diagnostics: Vec<Diagnostic>,
}

impl Resolution {
    pub fn program(&self) -> &Program {
        &self.solver.program
    }

    /// Every resolved reference, sorted.
    pub fn edges(&self) -> impl Iterator<Item = &ResolvedEdge> {
        self.solver.edges.iter()
    }

    pub fn diagnostics(&self) -> &[Diagnostic] {
        &self.diagnostics
    }

    pub fn stats(&self) -> SolveStats {
        self.solver.stats
    }

    /// Linearization used for lookups on `class`. Starts with `class`.
    pub fn mro(&self, class: DefId) -> &[ClassRef] {
        self.mros.get(&class).map(Vec::as_slice).unwrap_or_default()
    }

    /// Direct bases of `class` as resolved, in declaration order.
    pub fn bases(&self, class: DefId) -> &[ClassRef] {
        self.solver.bases_of(class)
    }

    /// Definition with the given qualified name, e.g. `pkg.mod.Class.method`.
    pub fn def_by_name(&self, qualified: &str) -> Option<DefId> {
        (0..self.program().defs.len() as DefId).find(|&d| self.def_name(d) == qualified)
    }

    pub fn def_name(&self, def: DefId) -> &str {
        let d = self.program().def(def);
        self.program().scope_name(d.module, d.scope)
    }

    /// Qualified name of the scope an edge comes from.
    pub fn source_name(&self, source: ScopeRef) -> &str {
        self.program().scope_name(source.module, source.scope)
    }

    pub fn source_kind(&self, source: ScopeRef) -> EntityKind {
        match self.program().scope_def(source.module, source.scope) {
            Some(d) => self.program().def(d).entity_kind(),
            None => EntityKind::Module,
        }
    }

    pub fn target_name(&self, target: &TargetRef) -> String {
        match target {
            TargetRef::Def(d) => self.def_name(*d).to_string(),
            TargetRef::Module(m) => self.program().module(*m).name.clone(),
            TargetRef::Member { owner, name } => {
                let base = match owner {
                    Owner::Class(c) => self.def_name(*c),
                    Owner::Module(m) => &self.program().module(*m).name,
                };
                format!("{base}.{name}")
            }
            TargetRef::External(n) => n.clone(),
        }
    }

    pub fn target_kind(&self, target: &TargetRef) -> EntityKind {
        match target {
            TargetRef::Def(d) => self.program().def(*d).entity_kind(),
            TargetRef::Module(_) => EntityKind::Module,
            TargetRef::Member {
                owner: Owner::Class(_),
                ..
            } => EntityKind::Attribute,
            TargetRef::Member {
                owner: Owner::Module(_),
                ..
            } => EntityKind::Variable,
            TargetRef::External(_) => EntityKind::Unknown,
        }
    }

    /// File of a project target, `None` for external ones.
    pub fn target_file(&self, target: &TargetRef) -> Option<&str> {
        let module = match target {
            TargetRef::Def(d) => self.program().def(*d).module,
            TargetRef::Module(m) => *m,
            TargetRef::Member {
                owner: Owner::Class(c),
                ..
            } => self.program().def(*c).module,
            TargetRef::Member {
                owner: Owner::Module(m),
                ..
            } => *m,
            TargetRef::External(_) => return None,
        };
        Some(&self.program().module(module).file)
    }

    fn at(&self, module: &str, line: u32, column: u32) -> impl Iterator<Item = &(TargetRef, EdgeKind)> {
        self.program()
            .module_index(module)
            .and_then(|m| self.solver.by_position.get(&(m, line, column)))
            .into_iter()
            .flatten()
    }

    /// Targets of the call whose expression starts at `line`:`column`
    /// (1-based) in `module`: called functions and methods with kind
    /// `Call`, instantiated classes with kind `Instantiate`. Unresolved
    /// callees give nothing.
    pub fn resolve_call(&self, module: &str, line: u32, column: u32) -> BTreeSet<(TargetRef, EdgeKind)> {
        self.at(module, line, column)
            .filter(|(_, k)| matches!(k, EdgeKind::Call | EdgeKind::Instantiate))
            .cloned()
            .collect()
    }

    /// Entities defining the attribute read or written by the expression
    /// starting at `line`:`column` in `module`.
    pub fn resolve_attribute(&self, module: &str, line: u32, column: u32) -> BTreeSet<TargetRef> {
        self.at(module, line, column)
            .filter(|(_, k)| *k == EdgeKind::AttributeAccess)
            .map(|(t, _)| t.clone())
            .collect()
    }

    /// Values bound to `name` at the top level of `module`.
    pub fn module_binding(&self, module: &str, name: &str) -> Vec<AbstractValue> {
        let Some(m) = self.program().module_index(module) else {
            return Vec::new();
        };
        self.values_of(&Slot::Binding {
            module: m,
            scope: ScopeTree::ROOT,
            name: name.to_string(),
        })
    }

    pub fn values_of(&self, slot: &Slot) -> Vec<AbstractValue> {
        self.solver.values_of(slot).into_iter().cloned().collect()
    }

    /// Readable form of a value, for diagnostics and tests.
    pub fn describe(&self, value: &AbstractValue) -> String {
        match value {
            AbstractValue::Function(d) => format!("function {}", self.def_name(*d)),
            AbstractValue::Class(d) => format!("class {}", self.def_name(*d)),
            AbstractValue::Instance(d) => format!("instance {}", self.def_name(*d)),
            AbstractValue::Module(m) => format!("module {}", self.program().module(*m).name),
            AbstractValue::External(n) => format!("external {n}"),
            AbstractValue::BoundMethod { func, .. } => format!("bound {}", self.def_name(*func)),
            AbstractValue::Super { after, .. } => format!("super after {}", self.def_name(*after)),
            AbstractValue::Container { kind, .. } => format!("{kind:?}").to_lowercase(),
            AbstractValue::ContainerMethod { method, .. } => format!("container method {method}"),
            AbstractValue::Generator(d) => format!("generator {}", self.def_name(*d)),
            AbstractValue::Unknown => "unknown".to_string(),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn solve(files: &[(&str, &str)]) -> Resolution {
        let project = Project::from_sources(files.iter().copied()).unwrap();
        resolve(&project, &ResolverOptions::default()).unwrap()
    }

    fn edges(r: &Resolution) -> BTreeSet<(String, String, EdgeKind)> {
        r.edges()
            .map(|e| {
                (
                    r.source_name(e.source).to_string(),
                    r.target_name(&e.target),
                    e.kind,
                )
            })
            .collect()
    }

    fn has(r: &Resolution, src: &str, tgt: &str, kind: EdgeKind) -> bool {
        edges(r).contains(&(src.to_string(), tgt.to_string(), kind))
    }

    #[test]
    fn assignment_chain() {
        let r = solve(&[("main.py", "def f():\n    pass\ng = f\nh = g\nh()\n")]);
        assert!(has(&r, "main", "main.f", EdgeKind::Call));
        assert_eq!(r.module_binding("main", "h").len(), 1);
    }

    #[test]
    fn constructor_calls_initializer() {
        let r = solve(&[(
            "main.py",
            "class C:\n    def __init__(self):\n        pass\nC()\n",
        )]);
        assert!(has(&r, "main", "main.C", EdgeKind::Instantiate));
        assert!(has(&r, "main", "main.C.__init__", EdgeKind::Call));
        let at = r.resolve_call("main", 4, 1);
        assert_eq!(at.len(), 2);
    }

    #[test]
    fn diamond_lookup_follows_c3() {
        let src = "\
class A:
    def m(self):
        pass
class B(A):
    pass
class C(A):
    def m(self):
        pass
class D(B, C):
    pass
D().m()
";
        let r = solve(&[("main.py", src)]);
        assert!(has(&r, "main", "main.C.m", EdgeKind::Call));
        assert!(!has(&r, "main", "main.A.m", EdgeKind::Call));
        let d = r.def_by_name("main.D").unwrap();
        let names: Vec<String> = r
            .mro(d)
            .iter()
            .map(|c| match c {
                ClassRef::Project(k) => r.def_name(*k).to_string(),
                ClassRef::External(n) => n.clone(),
            })
            .collect();
        assert_eq!(names, ["main.D", "main.B", "main.C", "main.A"]);
    }

    #[test]
    fn dict_constant_keys() {
        let r = solve(&[(
            "main.py",
            "def f():\n    pass\ndef g():\n    pass\nd = {\"k\": f, \"j\": g}\nd[\"k\"]()\n",
        )]);
        assert!(has(&r, "main", "main.f", EdgeKind::Call));
        assert!(!has(&r, "main", "main.g", EdgeKind::Call));
    }

    #[test]
    fn unknown_receiver_gives_nothing() {
        let r = solve(&[("main.py", "def f(x):\n    return x.attr\n")]);
        assert!(r.resolve_attribute("main", 2, 12).is_empty());
        assert!(edges(&r).is_empty());
    }

    #[test]
    fn module_alias_attribute() {
        let r = solve(&[
            ("pkg/__init__.py", ""),
            ("pkg/mod.py", "def f():\n    pass\n"),
            ("main.py", "import pkg.mod as m\nm.f()\nx = m.f\n"),
        ]);
        assert!(has(&r, "main", "pkg.mod.f", EdgeKind::Call));
        let attr = r.resolve_attribute("main", 3, 5);
        let names: Vec<String> = attr.iter().map(|t| r.target_name(t)).collect();
        assert_eq!(names, ["pkg.mod.f"]);
    }

    #[test]
    fn unresolved_decorator_is_identity() {
        let src = "from somewhere import deco\n@deco\ndef f():\n    pass\n@unknown_name\ndef g():\n    pass\nf()\ng()\n";
        let r = solve(&[("main.py", src)]);
        assert!(has(&r, "main", "main.f", EdgeKind::Call));
        assert!(has(&r, "main", "main.g", EdgeKind::Call));
        assert!(has(&r, "main.f", "somewhere.deco", EdgeKind::Decorate));
    }

    #[test]
    fn inconsistent_hierarchy_warns() {
        let src =
            "class A: pass\nclass B: pass\nclass X(A, B): pass\nclass Y(B, A): pass\nclass Z(X, Y): pass\n";
        let r = solve(&[("main.py", src)]);
        assert!(r.diagnostics().iter().any(|d| d.message.contains("Z")));
    }

    #[test]
    fn recursion_terminates() {
        let src = "def f(x):\n    return f(x)\ny = f(f)\nclass N:\n    def nxt(self):\n        return self.nxt().nxt()\n";
        let r = solve(&[("main.py", src)]);
        assert!(has(&r, "main.f", "main.f", EdgeKind::Call));
    }
}
