//! Constraint generation and solving.
//!
//! Plain assignments become edges of the assignment graph. Everything whose
//! effect depends on what a value turns out to be (calls, attribute access,
//! subscripts, iteration) becomes a constraint on one input node. After each
//! propagation, constraints are applied to the values that are new on their
//! input; applying one may add edges, seeds and further constraints. This
//! repeats until nothing changes.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::fmt;
use std::rc::Rc;

use super::builtins::{builtin_result, is_builtin, BuiltinResult, HigherOrderTable};
use super::graph::{AssignmentGraph, FixpointError, IterationOrder, Propagator, ValueId};
use super::mro::c3_linearize;
use super::program::{DefKind, MethodKind, Program};
use super::value::{AbstractValue, ContainerKind, DefId, ModuleId, Receiver, Site, ValueTable};
use crate::frontend::ast::*;
use crate::frontend::{Diagnostic, ImportTarget, Project, ScopeId, ScopeKind, ScopeTree, Severity};
use crate::model::EdgeKind;

/// Longest dotted name built by attribute access on external values.
const MAX_EXTERNAL_DEPTH: usize = 8;
/// Upper bound on solver rounds; each round runs one propagation.
const MAX_ROUNDS: usize = 100_000;

/// Node of the assignment graph.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub enum Slot {
    /// A name bound in a scope. For class scopes this is also the class
    /// attribute.
    Binding {
        module: ModuleId,
        scope: ScopeId,
        name: String,
    },
    Return(DefId),
    InstanceAttr(DefId, String),
    Elements(Site),
    DictKey(Site, Option<String>),
    /// Intermediate value of an expression.
    Temp(Site),
    /// Holds exactly one value.
    Value(ValueId),
}

/// A named scope of a module, used as edge source.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ScopeRef {
    pub module: ModuleId,
    pub scope: ScopeId,
}

/// Owner of an attribute that is not itself a definition.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum Owner {
    Class(DefId),
    Module(ModuleId),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum TargetRef {
    Def(DefId),
    Module(ModuleId),
    Member { owner: Owner, name: String },
    External(String),
}

#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ResolvedEdge {
    pub source: ScopeRef,
    pub kind: EdgeKind,
    pub target: TargetRef,
    pub line: u32,
}

/// A class in a linearization.
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub enum ClassRef {
    Project(DefId),
    External(String),
}

#[derive(Clone)]
struct NamedClass {
    class: ClassRef,
    name: String,
}

impl PartialEq for NamedClass {
    fn eq(&self, other: &Self) -> bool {
        self.class == other.class
    }
}

impl Eq for NamedClass {}

impl std::hash::Hash for NamedClass {
    fn hash<H: std::hash::Hasher>(&self, state: &mut H) {
        self.class.hash(state)
    }
}

impl fmt::Display for NamedClass {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.name)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
struct Ctx {
    site: Site,
    source: ScopeRef,
    line: u32,
    col: u32,
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Arg {
    Pos(Option<usize>),
    Star(Option<usize>),
}

#[derive(Debug, Clone, Default, PartialEq, Eq, Hash)]
struct CallSpec {
    args: Vec<Arg>,
    keywords: Vec<(String, Option<usize>)>,
    double_star: Vec<usize>,
    first_str: Option<String>,
}

impl CallSpec {
    fn positional(&self, i: usize) -> Option<usize> {
        match self.args.get(i) {
            Some(Arg::Pos(slot)) => *slot,
            _ => None,
        }
    }

    fn keyword(&self, name: &str) -> Option<usize> {
        self.keywords
            .iter()
            .find(|(k, _)| k == name)
            .and_then(|(_, s)| *s)
    }
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
enum Rule {
    Call {
        ctx: Ctx,
        spec: Rc<CallSpec>,
        result: Option<usize>,
        decorates: Option<DefId>,
    },
    AttrLoad {
        ctx: Ctx,
        attr: String,
        result: usize,
        record: bool,
    },
    AttrStore {
        ctx: Ctx,
        attr: String,
        value: Option<usize>,
    },
    SubLoad {
        ctx: Ctx,
        key: Option<String>,
        result: usize,
    },
    SubStore {
        ctx: Ctx,
        key: Option<String>,
        value: Option<usize>,
    },
    Iterate {
        ctx: Ctx,
        next_only: bool,
        result: usize,
    },
    WithEnter {
        ctx: Ctx,
        result: usize,
    },
    Raise {
        ctx: Ctx,
        instantiate: bool,
    },
    Except {
        ctx: Ctx,
        bind: Option<usize>,
    },
    Super {
        class: DefId,
        result: usize,
    },
    /// Reads a class attribute through a class or instance.
    Bind {
        ctx: Ctx,
        receiver: Receiver,
        instance_access: bool,
        result: usize,
    },
    Spread {
        targets: Vec<usize>,
    },
}

#[derive(Debug, Clone, PartialEq, Eq, Hash)]
struct Constraint {
    input: usize,
    rule: Rule,
}

/// Knobs for the solver.
#[derive(Debug, Clone)]
pub struct ResolverOptions {
    /// Iteration budget for each propagation to a fixpoint.
    pub max_iters: usize,
    pub higher_order: HigherOrderTable,
}

impl Default for ResolverOptions {
    fn default() -> Self {
        ResolverOptions {
            max_iters: 1000,
            higher_order: HigherOrderTable::default(),
        }
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq)]
pub struct SolveStats {
    pub rounds: usize,
    pub iterations: usize,
    pub nodes: usize,
    pub edges: usize,
    pub values: usize,
    pub constraints: usize,
}

pub(crate) struct Solver {
    pub(crate) program: Program,
    prop: Propagator<Slot>,
    pub(crate) values: ValueTable,
    constraints: Vec<Constraint>,
    constraint_index: HashMap<Constraint, u32>,
    by_input: HashMap<usize, Vec<u32>>,
    dirty: BTreeSet<u32>,
    processed: HashSet<(u32, ValueId)>,
    class_bases: BTreeMap<DefId, Vec<usize>>,
    bases: HashMap<DefId, Vec<ClassRef>>,
    mro_cache: HashMap<DefId, Vec<ClassRef>>,
    mro_reported: HashSet<DefId>,
    dynamic_class_attrs: HashSet<(DefId, String)>,
    lookup_dirty: bool,
    dict_keys: HashMap<Site, BTreeSet<Option<String>>>,
    dict_views: HashMap<Site, Vec<usize>>,
    fallbacks: BTreeSet<u32>,
    pub(crate) edges: BTreeSet<ResolvedEdge>,
    /// Targets by (module, line, column) of the referencing expression.
    pub(crate) by_position: BTreeMap<(ModuleId, u32, u32), BTreeSet<(TargetRef, EdgeKind)>>,
    pub(crate) diagnostics: Vec<Diagnostic>,
    options: ResolverOptions,
    pub(crate) stats: SolveStats,
}

impl Solver {
    pub(crate) fn new(program: Program, options: ResolverOptions) -> Self {
        Solver {
            program,
            prop: Propagator::new(AssignmentGraph::new()),
            values: ValueTable::default(),
            constraints: Vec::new(),
            constraint_index: HashMap::new(),
            by_input: HashMap::new(),
            dirty: BTreeSet::new(),
            processed: HashSet::new(),
            class_bases: BTreeMap::new(),
            bases: HashMap::new(),
            mro_cache: HashMap::new(),
            mro_reported: HashSet::new(),
            dynamic_class_attrs: HashSet::new(),
            lookup_dirty: false,
            dict_keys: HashMap::new(),
            dict_views: HashMap::new(),
            fallbacks: BTreeSet::new(),
            edges: BTreeSet::new(),
            by_position: BTreeMap::new(),
            diagnostics: Vec::new(),
            options,
            stats: SolveStats::default(),
        }
    }

    // ----- graph helpers -----

    fn node(&mut self, slot: Slot) -> usize {
        self.prop.node(slot)
    }

    fn value_node(&mut self, value: AbstractValue) -> usize {
        let id = self.values.intern(value);
        let node = self.prop.node(Slot::Value(id));
        self.prop.seed(node, id);
        node
    }

    fn seed(&mut self, node: usize, value: AbstractValue) {
        let id = self.values.intern(value);
        self.prop.seed(node, id);
    }

    fn edge(&mut self, from: usize, to: usize) {
        if from != to {
            self.prop.add_edge(from, to);
        }
    }

    fn temp(&mut self, site: Site) -> usize {
        self.node(Slot::Temp(site))
    }

    fn binding(&mut self, module: ModuleId, scope: ScopeId, name: &str) -> usize {
        self.node(Slot::Binding {
            module,
            scope,
            name: name.to_string(),
        })
    }

    fn add_constraint(&mut self, input: usize, rule: Rule) {
        let c = Constraint { input, rule };
        if self.constraint_index.contains_key(&c) {
            return;
        }
        let id = self.constraints.len() as u32;
        self.constraints.push(c.clone());
        self.constraint_index.insert(c, id);
        self.by_input.entry(input).or_default().push(id);
        self.dirty.insert(id);
    }

    fn record(&mut self, ctx: &Ctx, kind: EdgeKind, target: TargetRef) {
        self.note(ctx, kind, target.clone());
        self.edges.insert(ResolvedEdge {
            source: ctx.source,
            kind,
            target,
            line: ctx.line,
        });
    }

    /// Remembers a target for position queries without emitting an edge.
    fn note(&mut self, ctx: &Ctx, kind: EdgeKind, target: TargetRef) {
        self.by_position
            .entry((ctx.site.module, ctx.line, ctx.col))
            .or_default()
            .insert((target, kind));
    }

    fn register_dict_key(&mut self, site: Site, key: Option<String>) -> usize {
        let node = self.node(Slot::DictKey(site, key.clone()));
        if self.dict_keys.entry(site).or_default().insert(key) {
            // Loads with unknown keys and views must see the new key.
            self.lookup_dirty = true;
            let views = self.dict_views.get(&site).cloned().unwrap_or_default();
            for view in views {
                self.edge(node, view);
            }
        }
        node
    }

    fn dict_key_nodes(&mut self, site: Site) -> Vec<usize> {
        let keys: Vec<Option<String>> = self
            .dict_keys
            .get(&site)
            .map(|k| k.iter().cloned().collect())
            .unwrap_or_default();
        keys.into_iter()
            .map(|k| self.node(Slot::DictKey(site, k)))
            .collect()
    }

    // ----- solving -----

    pub(crate) fn solve(&mut self) -> Result<(), FixpointError> {
        let mut rounds = 0;
        loop {
            rounds += 1;
            if rounds > MAX_ROUNDS {
                return Err(FixpointError::BudgetExceeded {
                    iterations: self.stats.iterations,
                });
            }
            self.stats.iterations += self.prop.run(self.options.max_iters, IterationOrder::Ascending)?;
            let changed = self.prop.take_changed();
            let hierarchy_changed = self.refresh_hierarchy(&changed);
            if hierarchy_changed || std::mem::take(&mut self.lookup_dirty) {
                self.mro_cache.clear();
                self.processed.clear();
                self.dirty.extend(0..self.constraints.len() as u32);
            }
            for node in changed {
                if let Some(cs) = self.by_input.get(&node) {
                    self.dirty.extend(cs.iter().copied());
                }
            }
            if self.dirty.is_empty() {
                if self.prop.has_pending() {
                    continue;
                }
                if self.apply_decorator_fallbacks() {
                    continue;
                }
                break;
            }
            let dirty = std::mem::take(&mut self.dirty);
            for c in dirty {
                let input = self.constraints[c as usize].input;
                let vals: Vec<ValueId> = self.prop.values(input).iter().copied().collect();
                for v in vals {
                    if self.processed.insert((c, v)) {
                        let rule = self.constraints[c as usize].rule.clone();
                        let value = self.values.get(v).clone();
                        self.apply(input, &rule, value);
                    }
                }
            }
        }
        self.stats.rounds = rounds;
        self.stats.nodes = self.prop.graph.node_count();
        self.stats.edges = self.prop.graph.edge_count();
        self.stats.values = self.values.len();
        self.stats.constraints = self.constraints.len();
        Ok(())
    }

    /// Decorators whose value never resolved leave the definition as is.
    fn apply_decorator_fallbacks(&mut self) -> bool {
        let mut any = false;
        for id in 0..self.constraints.len() as u32 {
            let c = &self.constraints[id as usize];
            let Rule::Call {
                decorates: Some(_),
                spec,
                result: Some(result),
                ..
            } = &c.rule
            else {
                continue;
            };
            if !self.prop.values(c.input).is_empty() || self.fallbacks.contains(&id) {
                continue;
            }
            let (result, arg) = (*result, spec.positional(0));
            self.fallbacks.insert(id);
            if let Some(arg) = arg {
                self.edge(arg, result);
                any = true;
            }
        }
        any
    }

    fn refresh_hierarchy(&mut self, changed: &BTreeSet<usize>) -> bool {
        let mut any = false;
        let classes: Vec<(DefId, Vec<usize>)> = self
            .class_bases
            .iter()
            .filter(|(c, nodes)| !self.bases.contains_key(c) || nodes.iter().any(|n| changed.contains(n)))
            .map(|(c, nodes)| (*c, nodes.clone()))
            .collect();
        for (class, nodes) in classes {
            let mut refs = Vec::new();
            for node in nodes {
                for &v in self.prop.values(node) {
                    let r = match self.values.get(v) {
                        AbstractValue::Class(k) => ClassRef::Project(*k),
                        AbstractValue::External(n) => ClassRef::External(n.clone()),
                        _ => continue,
                    };
                    if !refs.contains(&r) {
                        refs.push(r);
                    }
                }
            }
            if self.bases.get(&class) != Some(&refs) {
                self.bases.insert(class, refs);
                any = true;
            }
        }
        any
    }

    pub(crate) fn bases_of(&self, class: DefId) -> &[ClassRef] {
        self.bases.get(&class).map(Vec::as_slice).unwrap_or_default()
    }

    /// Bases that take part in lookups; `object` contributes nothing.
    fn mro_bases(&self, class: DefId) -> impl DoubleEndedIterator<Item = ClassRef> + '_ {
        self.bases_of(class)
            .iter()
            .filter(|b| !matches!(b, ClassRef::External(n) if n == "builtins.object"))
            .cloned()
    }

    fn class_name(&self, class: &ClassRef) -> String {
        match class {
            ClassRef::Project(d) => self.program.def(*d).name.clone(),
            ClassRef::External(n) => n.clone(),
        }
    }

    /// Linearization of a project class. Falls back to depth-first order when
    /// the hierarchy has no consistent linearization.
    pub(crate) fn mro(&mut self, class: DefId) -> Vec<ClassRef> {
        if let Some(m) = self.mro_cache.get(&class) {
            return m.clone();
        }
        let start = NamedClass {
            class: ClassRef::Project(class),
            name: self.program.def(class).name.clone(),
        };
        let result = c3_linearize(&start, |n: &NamedClass| match &n.class {
            ClassRef::Project(d) => self
                .mro_bases(*d)
                .map(|b| NamedClass {
                    name: self.class_name(&b),
                    class: b,
                })
                .collect(),
            ClassRef::External(_) => Vec::new(),
        });
        let mro = match result {
            Ok(list) => list.into_iter().map(|n| n.class).collect(),
            Err(err) => {
                if self.mro_reported.insert(class) {
                    let def = self.program.def(class);
                    self.diagnostics.push(Diagnostic {
                        severity: Severity::Warning,
                        file: self.program.module(def.module).file.clone(),
                        line: def.span.start_line,
                        message: format!("{err}; using depth-first order"),
                    });
                }
                self.dfs_order(class)
            }
        };
        self.mro_cache.insert(class, mro.clone());
        mro
    }

    fn dfs_order(&self, class: DefId) -> Vec<ClassRef> {
        let mut out = Vec::new();
        let mut stack = vec![ClassRef::Project(class)];
        while let Some(c) = stack.pop() {
            if out.contains(&c) {
                continue;
            }
            if let ClassRef::Project(d) = &c {
                stack.extend(self.mro_bases(*d).rev());
            }
            out.push(c);
        }
        out
    }

    fn class_defines(&self, class: DefId, attr: &str) -> bool {
        let def = self.program.def(class);
        let bound = self
            .program
            .module(def.module)
            .tree
            .as_ref()
            .is_some_and(|t| t.scope(def.scope).bindings.contains(attr));
        bound || self.dynamic_class_attrs.contains(&(class, attr.to_string()))
    }

    /// Where `attr` is found on `class`: externals that come before the first
    /// project class defining it (any of them might define it), then that
    /// class. With `after`, the search starts behind that class.
    pub(crate) fn lookup(&mut self, class: DefId, attr: &str, after: Option<DefId>) -> Vec<ClassRef> {
        let mro = self.mro(class);
        let start = match after {
            Some(a) => match mro.iter().position(|c| *c == ClassRef::Project(a)) {
                Some(p) => p + 1,
                None => return Vec::new(),
            },
            None => 0,
        };
        let mut found = Vec::new();
        for c in &mro[start..] {
            match c {
                ClassRef::Project(k) => {
                    if self.class_defines(*k, attr) {
                        found.push(c.clone());
                        break;
                    }
                }
                ClassRef::External(_) => found.push(c.clone()),
            }
        }
        found
    }

    /// First project class along the linearization that defines `attr`.
    pub(crate) fn lookup_project(&mut self, class: DefId, attr: &str) -> Option<DefId> {
        self.mro(class).into_iter().find_map(|c| match c {
            ClassRef::Project(k) if self.class_defines(k, attr) => Some(k),
            _ => None,
        })
    }

    /// The function definitions bound as `attr` directly in class `owner`.
    fn methods_named(&self, owner: DefId, attr: &str) -> Vec<DefId> {
        let def = self.program.def(owner);
        self.program
            .defs_bound_as(def.module, def.scope, attr)
            .iter()
            .copied()
            .filter(|d| self.program.def(*d).kind != DefKind::Class)
            .collect()
    }

    fn member_target(&self, owner: Owner, attr: &str) -> Vec<TargetRef> {
        let defs = match owner {
            Owner::Class(c) => {
                let def = self.program.def(c);
                self.program.defs_bound_as(def.module, def.scope, attr).to_vec()
            }
            Owner::Module(m) => self.program.defs_bound_as(m, ScopeTree::ROOT, attr).to_vec(),
        };
        if defs.is_empty() {
            vec![TargetRef::Member {
                owner,
                name: attr.to_string(),
            }]
        } else {
            defs.into_iter().map(TargetRef::Def).collect()
        }
    }

    fn submodule(&self, module: ModuleId, attr: &str) -> Option<ModuleId> {
        let name = format!("{}.{}", self.program.module(module).name, attr);
        self.program.module_index(&name)
    }

    // ----- applying constraints -----

    fn apply(&mut self, input: usize, rule: &Rule, value: AbstractValue) {
        match rule {
            Rule::Call {
                ctx,
                spec,
                result,
                decorates,
            } => self.apply_call(input, ctx, spec, *result, *decorates, value),
            Rule::AttrLoad {
                ctx,
                attr,
                result,
                record,
            } => self.apply_attr_load(ctx, attr, *result, *record, value),
            Rule::AttrStore { ctx, attr, value: v } => self.apply_attr_store(ctx, attr, *v, value),
            Rule::SubLoad { ctx, key, result } => self.apply_sub_load(ctx, key, *result, value),
            Rule::SubStore { ctx, key, value: v } => self.apply_sub_store(ctx, key, *v, value),
            Rule::Iterate {
                ctx,
                next_only,
                result,
            } => self.apply_iterate(ctx, *next_only, *result, value),
            Rule::WithEnter { ctx, result } => self.apply_with(ctx, *result, value),
            Rule::Raise { ctx, instantiate } => self.apply_raise(ctx, *instantiate, value),
            Rule::Except { ctx, bind } => self.apply_except(ctx, *bind, value),
            Rule::Super { class, result } => {
                let of = match value {
                    AbstractValue::Instance(x) => Receiver::Instance(x),
                    AbstractValue::Class(x) => Receiver::Class(x),
                    _ => return,
                };
                self.seed(*result, AbstractValue::Super { after: *class, of });
            }
            Rule::Bind {
                ctx,
                receiver,
                instance_access,
                result,
            } => self.apply_bind(ctx, *receiver, *instance_access, *result, value),
            Rule::Spread { targets } => {
                if let AbstractValue::Container {
                    site,
                    kind: ContainerKind::Sequence,
                } = value
                {
                    let elems = self.node(Slot::Elements(site));
                    for &t in targets {
                        self.edge(elems, t);
                    }
                }
            }
        }
    }

    fn apply_call(
        &mut self,
        input: usize,
        ctx: &Ctx,
        spec: &Rc<CallSpec>,
        result: Option<usize>,
        decorates: Option<DefId>,
        value: AbstractValue,
    ) {
        let _ = input;
        let decorate = |this: &mut Self, target: TargetRef| {
            if let Some(d) = decorates {
                let def = this.program.def(d);
                let source = ScopeRef {
                    module: def.module,
                    scope: def.scope,
                };
                let line = def.span.start_line;
                this.edges.insert(ResolvedEdge {
                    source,
                    kind: EdgeKind::Decorate,
                    target,
                    line,
                });
            }
        };
        match value {
            AbstractValue::Function(f) => {
                self.record(ctx, EdgeKind::Call, TargetRef::Def(f));
                decorate(self, TargetRef::Def(f));
                self.connect_call(f, None, spec, result, ctx);
            }
            AbstractValue::BoundMethod { func, receiver } => {
                self.record(ctx, EdgeKind::Call, TargetRef::Def(func));
                decorate(self, TargetRef::Def(func));
                self.connect_call(func, Some(receiver), spec, result, ctx);
            }
            AbstractValue::Class(c) => {
                self.record(ctx, EdgeKind::Instantiate, TargetRef::Def(c));
                decorate(self, TargetRef::Def(c));
                if let Some(r) = result {
                    self.seed(r, AbstractValue::Instance(c));
                }
                self.call_init(c, spec, ctx);
            }
            AbstractValue::Instance(c) => {
                for found in self.lookup(c, "__call__", None) {
                    match found {
                        ClassRef::Project(owner) => {
                            for f in self.methods_named(owner, "__call__") {
                                self.record(ctx, EdgeKind::Call, TargetRef::Def(f));
                                decorate(self, TargetRef::Def(f));
                                self.connect_call(f, Some(Receiver::Instance(c)), spec, result, ctx);
                            }
                        }
                        ClassRef::External(n) => {
                            let target = TargetRef::External(format!("{n}.__call__"));
                            self.record(ctx, EdgeKind::Call, target);
                        }
                    }
                }
            }
            AbstractValue::External(name) => {
                self.record(ctx, EdgeKind::Call, TargetRef::External(name.clone()));
                decorate(self, TargetRef::External(name.clone()));
                if decorates.is_some() {
                    if let (Some(arg), Some(r)) = (spec.positional(0), result) {
                        self.edge(arg, r);
                    }
                } else if let Some(builtin) = name.strip_prefix("builtins.") {
                    self.apply_builtin(builtin, ctx, spec, result);
                }
            }
            AbstractValue::ContainerMethod { site, kind, method } => {
                self.apply_container_method(site, kind, &method, ctx, spec, result);
            }
            AbstractValue::Module(_)
            | AbstractValue::Super { .. }
            | AbstractValue::Container { .. }
            | AbstractValue::Generator(_)
            | AbstractValue::Unknown => {}
        }
    }

    fn call_init(&mut self, class: DefId, spec: &Rc<CallSpec>, ctx: &Ctx) {
        if let Some(owner) = self.lookup_project(class, "__init__") {
            for f in self.methods_named(owner, "__init__") {
                self.record(ctx, EdgeKind::Call, TargetRef::Def(f));
                self.connect_call(f, Some(Receiver::Instance(class)), spec, None, ctx);
            }
        }
    }

    /// Calls a project function or lambda: arguments flow into parameters
    /// and the return value into `result`.
    fn connect_call(
        &mut self,
        func: DefId,
        receiver: Option<Receiver>,
        spec: &CallSpec,
        result: Option<usize>,
        ctx: &Ctx,
    ) {
        let def = self.program.def(func).clone();
        if def.kind == DefKind::Class {
            return;
        }
        let _ = ctx;
        let param = |this: &mut Self, name: &str| this.binding(def.module, def.scope, name);
        let positional: Vec<usize> = def.params.positional.iter().map(|p| param(self, p)).collect();
        let vararg_elems = def
            .params
            .vararg
            .as_ref()
            .map(|_| self.node(Slot::Elements(Site::new(def.module, def.node).with_tag(1))));
        let mut pos = 0;
        if let Some(r) = receiver {
            if let Some(&first) = positional.first() {
                self.seed(first, r.value());
                pos = 1;
            }
        }
        for arg in &spec.args {
            match arg {
                Arg::Pos(slot) => {
                    if let Some(slot) = *slot {
                        if let Some(&p) = positional.get(pos) {
                            self.edge(slot, p);
                        } else if let Some(v) = vararg_elems {
                            self.edge(slot, v);
                        }
                    }
                    pos += 1;
                }
                Arg::Star(slot) => {
                    if let Some(slot) = *slot {
                        let mut targets: Vec<usize> = positional.iter().skip(pos).copied().collect();
                        targets.extend(vararg_elems);
                        self.add_constraint(slot, Rule::Spread { targets });
                    }
                    pos = positional.len();
                }
            }
        }
        for (name, slot) in &spec.keywords {
            let Some(slot) = *slot else { continue };
            if def.params.positional.contains(name) || def.params.kwonly.contains(name) {
                let p = param(self, name);
                self.edge(slot, p);
            } else if def.params.kwarg.is_some() {
                let site = Site::new(def.module, def.node).with_tag(2);
                let key = self.register_dict_key(site, Some(name.clone()));
                self.edge(slot, key);
            }
        }
        if let Some(kwarg) = &def.params.kwarg {
            let kw = param(self, kwarg);
            for &slot in &spec.double_star {
                self.edge(slot, kw);
            }
        }
        if let Some(r) = result {
            if def.is_generator {
                self.seed(r, AbstractValue::Generator(func));
            } else {
                let ret = self.node(Slot::Return(func));
                self.edge(ret, r);
            }
        }
    }

    fn apply_builtin(&mut self, name: &str, ctx: &Ctx, spec: &Rc<CallSpec>, result: Option<usize>) {
        let callbacks = self.options.higher_order.get(name).cloned();
        let mut callback_results = Vec::new();
        if let Some(cb) = &callbacks {
            let mut callee_slots: Vec<usize> =
                cb.positions.iter().filter_map(|&p| spec.positional(p)).collect();
            callee_slots.extend(cb.keywords.iter().filter_map(|k| spec.keyword(k)));
            // Each callback gets one element of every other positional argument.
            let mut args = Vec::new();
            for (i, arg) in spec.args.iter().enumerate() {
                if cb.positions.contains(&i) {
                    continue;
                }
                if let Arg::Pos(Some(slot)) = arg {
                    let elem = self.temp(ctx.site.with_tag(40 + i.min(100) as u8));
                    self.add_constraint(
                        *slot,
                        Rule::Iterate {
                            ctx: *ctx,
                            next_only: false,
                            result: elem,
                        },
                    );
                    args.push(Arg::Pos(Some(elem)));
                }
            }
            let cb_spec = Rc::new(CallSpec {
                args,
                ..Default::default()
            });
            for (i, callee) in callee_slots.into_iter().enumerate() {
                let out = self.temp(ctx.site.with_tag(150 + i.min(100) as u8));
                self.add_constraint(
                    callee,
                    Rule::Call {
                        ctx: *ctx,
                        spec: cb_spec.clone(),
                        result: Some(out),
                        decorates: None,
                    },
                );
                callback_results.push(out);
            }
        }
        let Some(result) = result else { return };
        match builtin_result(name) {
            Some(BuiltinResult::Argument(i)) => {
                if let Some(arg) = spec.positional(i) {
                    self.edge(arg, result);
                }
            }
            Some(BuiltinResult::ElementOf(i)) => {
                if let Some(arg) = spec.positional(i) {
                    self.add_constraint(
                        arg,
                        Rule::Iterate {
                            ctx: *ctx,
                            next_only: name == "next",
                            result,
                        },
                    );
                }
            }
            Some(BuiltinResult::CallbackResults) => {
                let site = ctx.site.with_tag(30);
                self.seed(
                    result,
                    AbstractValue::Container {
                        site,
                        kind: ContainerKind::Sequence,
                    },
                );
                let elems = self.node(Slot::Elements(site));
                for out in callback_results {
                    self.edge(out, elems);
                }
            }
            None => {}
        }
    }

    fn apply_container_method(
        &mut self,
        site: Site,
        kind: ContainerKind,
        method: &str,
        ctx: &Ctx,
        spec: &CallSpec,
        result: Option<usize>,
    ) {
        match (kind, method) {
            (ContainerKind::Sequence, "append" | "add" | "appendleft") => {
                if let Some(arg) = spec.positional(0) {
                    let elems = self.node(Slot::Elements(site));
                    self.edge(arg, elems);
                }
            }
            (ContainerKind::Sequence, "insert") => {
                if let Some(arg) = spec.positional(1) {
                    let elems = self.node(Slot::Elements(site));
                    self.edge(arg, elems);
                }
            }
            (ContainerKind::Sequence, "extend" | "update") => {
                if let Some(arg) = spec.positional(0) {
                    let elems = self.node(Slot::Elements(site));
                    self.add_constraint(
                        arg,
                        Rule::Iterate {
                            ctx: *ctx,
                            next_only: false,
                            result: elems,
                        },
                    );
                }
            }
            (ContainerKind::Sequence, "pop" | "popleft") => {
                if let Some(r) = result {
                    let elems = self.node(Slot::Elements(site));
                    self.edge(elems, r);
                }
            }
            (_, "copy") => {
                if let Some(r) = result {
                    self.seed(r, AbstractValue::Container { site, kind });
                }
            }
            (ContainerKind::Dict, "get" | "pop" | "setdefault") => {
                let Some(r) = result else { return };
                let nodes = match &spec.first_str {
                    Some(k) => {
                        let key = self.register_dict_key(site, Some(k.clone()));
                        let any = self.register_dict_key(site, None);
                        vec![key, any]
                    }
                    None => self.dict_key_nodes(site),
                };
                for n in &nodes {
                    self.edge(*n, r);
                }
                if let Some(default) = spec.positional(1) {
                    self.edge(default, r);
                    if method == "setdefault" {
                        if let Some(&key) = nodes.first() {
                            self.edge(default, key);
                        }
                    }
                }
            }
            (ContainerKind::Dict, "values" | "items") => {
                let Some(r) = result else { return };
                let view = site.with_tag(if method == "values" { 3 } else { 4 });
                self.seed(
                    r,
                    AbstractValue::Container {
                        site: view,
                        kind: ContainerKind::Sequence,
                    },
                );
                let mut sink = self.node(Slot::Elements(view));
                if method == "items" {
                    // Each item is a pair whose elements are the values.
                    let pair = site.with_tag(5);
                    self.seed(
                        sink,
                        AbstractValue::Container {
                            site: pair,
                            kind: ContainerKind::Sequence,
                        },
                    );
                    sink = self.node(Slot::Elements(pair));
                }
                let views = self.dict_views.entry(site).or_default();
                if !views.contains(&sink) {
                    views.push(sink);
                    for key in self.dict_key_nodes(site) {
                        self.edge(key, sink);
                    }
                }
            }
            (ContainerKind::Dict, "update") => {
                // Only keyword arguments have known keys.
                for (name, slot) in &spec.keywords {
                    if let Some(slot) = *slot {
                        let key = self.register_dict_key(site, Some(name.clone()));
                        self.edge(slot, key);
                    }
                }
            }
            _ => {}
        }
    }

    fn access(&mut self, ctx: &Ctx, record: bool, target: TargetRef) {
        if record {
            self.record(ctx, EdgeKind::AttributeAccess, target);
        } else {
            self.note(ctx, EdgeKind::AttributeAccess, target);
        }
    }

    fn apply_attr_load(&mut self, ctx: &Ctx, attr: &str, result: usize, record: bool, value: AbstractValue) {
        match value {
            AbstractValue::Module(m) => {
                if self.program.module(m).tree.is_some() {
                    let b = self.binding(m, ScopeTree::ROOT, attr);
                    self.edge(b, result);
                }
                let sub = self.submodule(m, attr);
                if let Some(sub) = sub {
                    self.seed(result, AbstractValue::Module(sub));
                }
                let targets = match sub {
                    Some(sub) => vec![TargetRef::Module(sub)],
                    None => self.member_target(Owner::Module(m), attr),
                };
                for t in targets {
                    self.access(ctx, record, t);
                }
            }
            AbstractValue::Class(c) => {
                let receiver = Receiver::Class(c);
                self.load_class_attr(ctx, c, attr, None, receiver, false, result, record);
            }
            AbstractValue::Instance(c) => {
                let inst = self.node(Slot::InstanceAttr(c, attr.to_string()));
                self.edge(inst, result);
                let found =
                    self.load_class_attr(ctx, c, attr, None, Receiver::Instance(c), true, result, record);
                if !found {
                    let target = TargetRef::Member {
                        owner: Owner::Class(c),
                        name: attr.to_string(),
                    };
                    self.access(ctx, record, target);
                }
            }
            AbstractValue::Super { after, of } => {
                let instance = matches!(of, Receiver::Instance(_));
                self.load_class_attr(ctx, of.class(), attr, Some(after), of, instance, result, record);
            }
            AbstractValue::External(n) => {
                if let Some(name) = external_attr(&n, attr) {
                    self.access(ctx, record, TargetRef::External(name.clone()));
                    self.seed(result, AbstractValue::External(name));
                }
            }
            AbstractValue::Container { site, kind } => {
                self.seed(
                    result,
                    AbstractValue::ContainerMethod {
                        site,
                        kind,
                        method: attr.to_string(),
                    },
                );
            }
            AbstractValue::Function(_)
            | AbstractValue::BoundMethod { .. }
            | AbstractValue::ContainerMethod { .. }
            | AbstractValue::Generator(_)
            | AbstractValue::Unknown => {}
        }
    }

    /// Looks `attr` up along the class's linearization and feeds what it
    /// finds into `result`. Returns whether anything was found.
    #[allow(clippy::too_many_arguments)]
    fn load_class_attr(
        &mut self,
        ctx: &Ctx,
        class: DefId,
        attr: &str,
        after: Option<DefId>,
        receiver: Receiver,
        instance_access: bool,
        result: usize,
        record: bool,
    ) -> bool {
        let found = self.lookup(class, attr, after);
        for c in &found {
            match c {
                ClassRef::Project(owner) => {
                    let def = self.program.def(*owner).clone();
                    let slot = self.binding(def.module, def.scope, attr);
                    self.add_constraint(
                        slot,
                        Rule::Bind {
                            ctx: *ctx,
                            receiver,
                            instance_access,
                            result,
                        },
                    );
                    for t in self.member_target(Owner::Class(*owner), attr) {
                        self.access(ctx, record, t);
                    }
                }
                ClassRef::External(n) => {
                    if let Some(name) = external_attr(n, attr) {
                        self.access(ctx, record, TargetRef::External(name.clone()));
                        self.seed(result, AbstractValue::External(name));
                    }
                }
            }
        }
        !found.is_empty()
    }

    fn apply_bind(
        &mut self,
        ctx: &Ctx,
        receiver: Receiver,
        instance_access: bool,
        result: usize,
        value: AbstractValue,
    ) {
        let AbstractValue::Function(f) = value else {
            self.seed(result, value);
            return;
        };
        let bound = AbstractValue::BoundMethod { func: f, receiver };
        match self.program.def(f).method_kind {
            MethodKind::Static => self.seed(result, value),
            MethodKind::ClassMethod => self.seed(
                result,
                AbstractValue::BoundMethod {
                    func: f,
                    receiver: Receiver::Class(receiver.class()),
                },
            ),
            MethodKind::Property if instance_access => {
                self.record(ctx, EdgeKind::Call, TargetRef::Def(f));
                self.connect_call(f, Some(receiver), &CallSpec::default(), Some(result), ctx);
            }
            MethodKind::PropertyAccessor if instance_access => {}
            _ if instance_access => self.seed(result, bound),
            _ => self.seed(result, value),
        }
    }

    fn apply_attr_store(&mut self, ctx: &Ctx, attr: &str, v: Option<usize>, value: AbstractValue) {
        match value {
            AbstractValue::Instance(c) => {
                if let Some(v) = v {
                    let slot = self.node(Slot::InstanceAttr(c, attr.to_string()));
                    self.edge(v, slot);
                }
                let owner = self.lookup_project(c, attr).unwrap_or(c);
                for t in self.member_target(Owner::Class(owner), attr) {
                    self.record(ctx, EdgeKind::AttributeAccess, t);
                }
            }
            AbstractValue::Class(c) => {
                let def = self.program.def(c).clone();
                if let Some(v) = v {
                    let slot = self.binding(def.module, def.scope, attr);
                    self.edge(v, slot);
                }
                if !self.class_defines(c, attr) {
                    self.dynamic_class_attrs.insert((c, attr.to_string()));
                    self.lookup_dirty = true;
                }
                for t in self.member_target(Owner::Class(c), attr) {
                    self.record(ctx, EdgeKind::AttributeAccess, t);
                }
            }
            AbstractValue::Module(m) => {
                if let (Some(v), true) = (v, self.program.module(m).tree.is_some()) {
                    let slot = self.binding(m, ScopeTree::ROOT, attr);
                    self.edge(v, slot);
                }
                for t in self.member_target(Owner::Module(m), attr) {
                    self.record(ctx, EdgeKind::AttributeAccess, t);
                }
            }
            AbstractValue::External(n) => {
                if let Some(name) = external_attr(&n, attr) {
                    self.record(ctx, EdgeKind::AttributeAccess, TargetRef::External(name));
                }
            }
            _ => {}
        }
    }

    fn apply_sub_load(&mut self, ctx: &Ctx, key: &Option<String>, result: usize, value: AbstractValue) {
        match value {
            AbstractValue::Container {
                site,
                kind: ContainerKind::Dict,
            } => {
                let nodes = match key {
                    Some(k) => {
                        let a = self.register_dict_key(site, Some(k.clone()));
                        let b = self.register_dict_key(site, None);
                        vec![a, b]
                    }
                    None => self.dict_key_nodes(site),
                };
                for n in nodes {
                    self.edge(n, result);
                }
            }
            AbstractValue::Container {
                site,
                kind: ContainerKind::Sequence,
            } => {
                let elems = self.node(Slot::Elements(site));
                self.edge(elems, result);
            }
            AbstractValue::Instance(c) => {
                self.call_dunder(ctx, c, "__getitem__", Some(result));
            }
            _ => {}
        }
    }

    fn apply_sub_store(&mut self, ctx: &Ctx, key: &Option<String>, v: Option<usize>, value: AbstractValue) {
        match value {
            AbstractValue::Container {
                site,
                kind: ContainerKind::Dict,
            } => {
                let slot = self.register_dict_key(site, key.clone());
                if let Some(v) = v {
                    self.edge(v, slot);
                }
            }
            AbstractValue::Container {
                site,
                kind: ContainerKind::Sequence,
            } => {
                if let Some(v) = v {
                    let elems = self.node(Slot::Elements(site));
                    self.edge(v, elems);
                }
            }
            AbstractValue::Instance(c) => {
                self.call_dunder(ctx, c, "__setitem__", None);
            }
            _ => {}
        }
    }

    /// Implicit call of a special method on an instance of `class`.
    fn call_dunder(&mut self, ctx: &Ctx, class: DefId, name: &str, result: Option<usize>) -> bool {
        let Some(owner) = self.lookup_project(class, name) else {
            return false;
        };
        for f in self.methods_named(owner, name) {
            self.record(ctx, EdgeKind::Call, TargetRef::Def(f));
            self.connect_call(
                f,
                Some(Receiver::Instance(class)),
                &CallSpec::default(),
                result,
                ctx,
            );
        }
        true
    }

    fn apply_iterate(&mut self, ctx: &Ctx, next_only: bool, result: usize, value: AbstractValue) {
        match value {
            AbstractValue::Container {
                site,
                kind: ContainerKind::Sequence,
            } => {
                let elems = self.node(Slot::Elements(site));
                self.edge(elems, result);
            }
            AbstractValue::Generator(g) => {
                let ret = self.node(Slot::Return(g));
                self.edge(ret, result);
            }
            AbstractValue::Instance(c) => {
                if next_only {
                    self.call_dunder(ctx, c, "__next__", Some(result));
                } else {
                    let iter = self.temp(ctx.site.with_tag(10));
                    if self.call_dunder(ctx, c, "__iter__", Some(iter)) {
                        self.add_constraint(
                            iter,
                            Rule::Iterate {
                                ctx: *ctx,
                                next_only: true,
                                result,
                            },
                        );
                    }
                }
            }
            _ => {}
        }
    }

    fn apply_with(&mut self, ctx: &Ctx, result: usize, value: AbstractValue) {
        match value {
            AbstractValue::Instance(c) => {
                self.call_dunder(ctx, c, "__enter__", Some(result));
                self.call_dunder(ctx, c, "__exit__", None);
            }
            AbstractValue::Generator(g) => {
                let ret = self.node(Slot::Return(g));
                self.edge(ret, result);
            }
            _ => {}
        }
    }

    fn apply_raise(&mut self, ctx: &Ctx, instantiate: bool, value: AbstractValue) {
        match value {
            AbstractValue::Class(c) => {
                self.record(ctx, EdgeKind::Exception, TargetRef::Def(c));
                if instantiate {
                    self.record(ctx, EdgeKind::Instantiate, TargetRef::Def(c));
                    self.call_init(c, &Rc::new(CallSpec::default()), ctx);
                }
            }
            AbstractValue::Instance(c) => self.record(ctx, EdgeKind::Exception, TargetRef::Def(c)),
            AbstractValue::External(n) => self.record(ctx, EdgeKind::Exception, TargetRef::External(n)),
            _ => {}
        }
    }

    fn apply_except(&mut self, ctx: &Ctx, bind: Option<usize>, value: AbstractValue) {
        match value {
            AbstractValue::Class(c) => {
                self.record(ctx, EdgeKind::Exception, TargetRef::Def(c));
                if let Some(b) = bind {
                    self.seed(b, AbstractValue::Instance(c));
                }
            }
            AbstractValue::External(n) => self.record(ctx, EdgeKind::Exception, TargetRef::External(n)),
            _ => {}
        }
    }

    // ----- queries on the current state -----

    pub(crate) fn values_of(&self, slot: &Slot) -> Vec<&AbstractValue> {
        match self.prop.graph.index_of(slot) {
            Some(n) => self.prop.values(n).iter().map(|&v| self.values.get(v)).collect(),
            None => Vec::new(),
        }
    }

    // ----- constraint generation -----

    pub(crate) fn build(&mut self, project: &Project) {
        for (idx, module) in project.modules.iter().enumerate() {
            let mut walker = Walker {
                s: self,
                module: idx as ModuleId,
            };
            walker.block(ScopeTree::ROOT, &module.body);
            walker.imports();
        }
    }
}

fn external_attr(base: &str, attr: &str) -> Option<String> {
    if base.split('.').count() >= MAX_EXTERNAL_DEPTH {
        None
    } else {
        Some(format!("{base}.{attr}"))
    }
}

struct Walker<'a> {
    s: &'a mut Solver,
    module: ModuleId,
}

impl Walker<'_> {
    fn tree(&self) -> &ScopeTree {
        self.s.program.modules[self.module as usize]
            .tree
            .as_ref()
            .expect("source module has a tree")
    }

    fn ctx(&self, scope: ScopeId, expr: &Expr) -> Ctx {
        Ctx {
            site: Site::new(self.module, expr.id),
            source: ScopeRef {
                module: self.module,
                scope: self.tree().named_scope(scope),
            },
            line: expr.span.start_line,
            col: expr.span.start_col,
        }
    }

    fn site(&self, expr: &Expr) -> Site {
        Site::new(self.module, expr.id)
    }

    fn def_of_node(&self, node: NodeId) -> Option<DefId> {
        let scope = self.tree().scope_of_node(node)?;
        self.s.program.scope_def(self.module, scope)
    }

    fn name_binding(&mut self, scope: ScopeId, name: &str) -> Option<usize> {
        let owner = self.tree().lookup(scope, name)?;
        Some(self.s.binding(self.module, owner, name))
    }

    fn return_node(&mut self, scope: ScopeId) -> Option<usize> {
        let f = self.s.program.enclosing_function(self.module, scope)?;
        Some(self.s.node(Slot::Return(f)))
    }

    fn imports(&mut self) {
        let bindings = self.s.program.imports.bindings[self.module as usize].clone();
        for b in bindings {
            match &b.local_name {
                Some(local) => {
                    let Some(target) = self.name_binding(b.scope, local) else {
                        continue;
                    };
                    match &b.bound {
                        ImportTarget::Module(m) => {
                            let v = self.s.value_node(AbstractValue::Module(*m as ModuleId));
                            self.s.edge(v, target);
                        }
                        ImportTarget::Member { module, name } => {
                            let m = *module as ModuleId;
                            if self.s.program.module(m).tree.is_some() {
                                let src = self.s.binding(m, ScopeTree::ROOT, name);
                                self.s.edge(src, target);
                            }
                        }
                        ImportTarget::External(n) => {
                            let v = self.s.value_node(AbstractValue::External(n.clone()));
                            self.s.edge(v, target);
                        }
                        ImportTarget::Unresolved(_) => {}
                    }
                }
                None => {
                    let ImportTarget::Module(src) = b.bound else {
                        continue;
                    };
                    let src = src as ModuleId;
                    let names: Vec<String> = match &self.s.program.module(src).tree {
                        Some(t) => t
                            .scope(ScopeTree::ROOT)
                            .bindings
                            .iter()
                            .filter(|n| !n.starts_with('_'))
                            .cloned()
                            .collect(),
                        None => Vec::new(),
                    };
                    for n in names {
                        let from = self.s.binding(src, ScopeTree::ROOT, &n);
                        let to = self.s.binding(self.module, ScopeTree::ROOT, &n);
                        self.s.edge(from, to);
                    }
                }
            }
        }
    }

    fn block(&mut self, scope: ScopeId, stmts: &[Stmt]) {
        for stmt in stmts {
            self.stmt(scope, stmt);
        }
    }

    fn stmt(&mut self, scope: ScopeId, stmt: &Stmt) {
        match &stmt.kind {
            StmtKind::FunctionDef(def) => self.function_def(scope, def),
            StmtKind::ClassDef(def) => self.class_def(scope, def),
            StmtKind::Assign { targets, value } => {
                if let [target] = targets.as_slice() {
                    if let (ExprKind::Sequence(ts), ExprKind::Sequence(vs)) = (&target.kind, &value.kind) {
                        let plain = |es: &[Expr]| es.iter().all(|e| !matches!(e.kind, ExprKind::Starred(_)));
                        if ts.len() == vs.len() && plain(ts) && plain(vs) {
                            for (t, v) in ts.iter().zip(vs) {
                                let slot = self.eval(scope, v);
                                self.assign(scope, t, slot);
                            }
                            return;
                        }
                    }
                }
                let slot = self.eval(scope, value);
                for t in targets {
                    self.assign(scope, t, slot);
                }
            }
            StmtKind::AugAssign { target, value } => {
                let slot = self.eval(scope, value);
                self.assign(scope, target, slot);
            }
            StmtKind::Declare { .. } | StmtKind::Global(_) | StmtKind::Nonlocal(_) => {}
            StmtKind::Return(value) => {
                if let Some(v) = value {
                    let slot = self.eval(scope, v);
                    if let (Some(slot), Some(ret)) = (slot, self.return_node(scope)) {
                        self.s.edge(slot, ret);
                    }
                }
            }
            StmtKind::Delete(targets) => {
                for t in targets {
                    for child in t.children() {
                        self.eval(scope, child);
                    }
                }
            }
            StmtKind::For {
                target,
                iter,
                body,
                orelse,
            } => {
                let elems = self.iterate(scope, iter);
                self.assign(scope, target, elems);
                self.block(scope, body);
                self.block(scope, orelse);
            }
            StmtKind::While { test, body, orelse } | StmtKind::If { test, body, orelse } => {
                self.eval(scope, test);
                self.block(scope, body);
                self.block(scope, orelse);
            }
            StmtKind::With { items, body } => {
                for item in items {
                    let ctx_slot = self.eval(scope, &item.context);
                    let result = self.s.temp(self.site(&item.context).with_tag(1));
                    if let Some(c) = ctx_slot {
                        let ctx = self.ctx(scope, &item.context);
                        self.s.add_constraint(c, Rule::WithEnter { ctx, result });
                    }
                    if let Some(t) = &item.target {
                        self.assign(scope, t, Some(result));
                    }
                }
                self.block(scope, body);
            }
            StmtKind::Raise { exc, cause } => {
                if let Some(exc) = exc {
                    let ctx = self.ctx(scope, exc);
                    match &exc.kind {
                        ExprKind::Call { func, .. } => {
                            self.eval(scope, exc);
                            if let Some(callee) = self.callee(scope, func) {
                                self.s.add_constraint(
                                    callee,
                                    Rule::Raise {
                                        ctx,
                                        instantiate: false,
                                    },
                                );
                            }
                        }
                        _ => {
                            if let Some(slot) = self.eval(scope, exc) {
                                self.s.add_constraint(
                                    slot,
                                    Rule::Raise {
                                        ctx,
                                        instantiate: true,
                                    },
                                );
                            }
                        }
                    }
                }
                if let Some(c) = cause {
                    self.eval(scope, c);
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
                    let bind = h.name.as_ref().and_then(|n| self.name_binding(scope, n));
                    if let Some(class) = &h.class {
                        let classes: Vec<&Expr> = match &class.kind {
                            ExprKind::Sequence(elts) => elts.iter().collect(),
                            _ => vec![class],
                        };
                        for c in classes {
                            let ctx = self.ctx(scope, c);
                            if let Some(slot) = self.eval(scope, c) {
                                self.s.add_constraint(slot, Rule::Except { ctx, bind });
                            }
                        }
                    }
                    self.block(scope, &h.body);
                }
                self.block(scope, orelse);
                self.block(scope, finalbody);
            }
            StmtKind::Assert { test, msg } => {
                self.eval(scope, test);
                if let Some(m) = msg {
                    self.eval(scope, m);
                }
            }
            StmtKind::Import(_) | StmtKind::ImportFrom { .. } => {}
            StmtKind::Expr(e) => {
                self.eval(scope, e);
            }
            StmtKind::Pass | StmtKind::Break | StmtKind::Continue => {}
            StmtKind::Opaque { exprs, body, .. } => {
                for e in exprs {
                    self.eval(scope, e);
                }
                self.block(scope, body);
            }
        }
    }

    /// Wires parameter defaults and `*args` / `**kwargs` containers.
    fn params(&mut self, scope: ScopeId, def_id: DefId, params: &Parameters) {
        let def = self.s.program.def(def_id).clone();
        for p in params.iter() {
            if let Some(d) = &p.default {
                if let Some(slot) = self.eval(scope, d) {
                    let b = self.s.binding(self.module, def.scope, &p.name);
                    self.s.edge(slot, b);
                }
            }
        }
        if let Some(v) = &params.vararg {
            let b = self.s.binding(self.module, def.scope, &v.name);
            let site = Site::new(self.module, def.node).with_tag(1);
            self.s.seed(
                b,
                AbstractValue::Container {
                    site,
                    kind: ContainerKind::Sequence,
                },
            );
        }
        if let Some(k) = &params.kwarg {
            let b = self.s.binding(self.module, def.scope, &k.name);
            let site = Site::new(self.module, def.node).with_tag(2);
            self.s.seed(
                b,
                AbstractValue::Container {
                    site,
                    kind: ContainerKind::Dict,
                },
            );
        }
    }

    /// Applies decorators bottom-up to `initial` and binds the result.
    fn decorate(
        &mut self,
        scope: ScopeId,
        def_id: DefId,
        node: NodeId,
        decorators: &[Expr],
        initial: AbstractValue,
        name: &str,
    ) {
        let mut current = self.s.value_node(initial);
        let dec_slots: Vec<Option<usize>> = decorators.iter().map(|d| self.eval(scope, d)).collect();
        for (i, (dec, slot)) in decorators.iter().zip(dec_slots).enumerate().rev() {
            let Some(slot) = slot else { continue };
            let result = self
                .s
                .temp(Site::new(self.module, node).with_tag(100 + i.min(100) as u8));
            let ctx = self.ctx(scope, dec);
            let spec = Rc::new(CallSpec {
                args: vec![Arg::Pos(Some(current))],
                ..Default::default()
            });
            self.s.add_constraint(
                slot,
                Rule::Call {
                    ctx,
                    spec,
                    result: Some(result),
                    decorates: Some(def_id),
                },
            );
            current = result;
        }
        if let Some(b) = self.name_binding(scope, name) {
            self.s.edge(current, b);
        }
    }

    fn function_def(&mut self, scope: ScopeId, def: &FunctionDef) {
        let Some(id) = self.def_of_node(def.id) else {
            return;
        };
        self.params(scope, id, &def.params);
        self.decorate(
            scope,
            id,
            def.id,
            &def.decorators,
            AbstractValue::Function(id),
            &def.name,
        );
        let inner = self.s.program.def(id).scope;
        self.block(inner, &def.body);
    }

    fn class_def(&mut self, scope: ScopeId, def: &ClassDef) {
        let Some(id) = self.def_of_node(def.id) else {
            return;
        };
        let mut base_nodes = Vec::new();
        for b in &def.bases {
            if let Some(slot) = self.eval(scope, b) {
                base_nodes.push(slot);
            }
        }
        for k in &def.keywords {
            self.eval(scope, &k.value);
        }
        self.s.class_bases.insert(id, base_nodes);
        self.decorate(
            scope,
            id,
            def.id,
            &def.decorators,
            AbstractValue::Class(id),
            &def.name,
        );
        let inner = self.s.program.def(id).scope;
        self.block(inner, &def.body);
    }

    /// Node receiving one element of `iter` per iteration.
    fn iterate(&mut self, scope: ScopeId, iter: &Expr) -> Option<usize> {
        let slot = self.eval(scope, iter)?;
        let result = self.s.temp(self.site(iter).with_tag(1));
        let ctx = self.ctx(scope, iter);
        self.s.add_constraint(
            slot,
            Rule::Iterate {
                ctx,
                next_only: false,
                result,
            },
        );
        Some(result)
    }

    fn assign(&mut self, scope: ScopeId, target: &Expr, value: Option<usize>) {
        match &target.kind {
            ExprKind::Name(name) => {
                if let (Some(v), Some(b)) = (value, self.name_binding(scope, name)) {
                    self.s.edge(v, b);
                }
            }
            ExprKind::Attribute { value: obj, attr } => {
                if let Some(o) = self.eval(scope, obj) {
                    let ctx = self.ctx(scope, target);
                    self.s.add_constraint(
                        o,
                        Rule::AttrStore {
                            ctx,
                            attr: attr.clone(),
                            value,
                        },
                    );
                }
            }
            ExprKind::Subscript { value: obj, index } => {
                let key = str_const(index);
                self.eval(scope, index);
                if let Some(o) = self.eval(scope, obj) {
                    let ctx = self.ctx(scope, target);
                    self.s.add_constraint(o, Rule::SubStore { ctx, key, value });
                }
            }
            ExprKind::Sequence(elts) => {
                let elems = value.map(|v| {
                    let result = self.s.temp(self.site(target).with_tag(1));
                    let ctx = self.ctx(scope, target);
                    self.s.add_constraint(
                        v,
                        Rule::Iterate {
                            ctx,
                            next_only: false,
                            result,
                        },
                    );
                    result
                });
                for e in elts {
                    match &e.kind {
                        ExprKind::Starred(inner) => {
                            let site = self.site(e);
                            let list = self.s.value_node(AbstractValue::Container {
                                site,
                                kind: ContainerKind::Sequence,
                            });
                            if let Some(el) = elems {
                                let dst = self.s.node(Slot::Elements(site));
                                self.s.edge(el, dst);
                            }
                            self.assign(scope, inner, Some(list));
                        }
                        _ => self.assign(scope, e, elems),
                    }
                }
            }
            ExprKind::Starred(inner) => self.assign(scope, inner, value),
            _ => {
                self.eval(scope, target);
            }
        }
    }

    /// Node of the callee of a call; attribute callees are not recorded as
    /// attribute accesses, the call covers them.
    fn callee(&mut self, scope: ScopeId, func: &Expr) -> Option<usize> {
        match &func.kind {
            ExprKind::Attribute { value, attr } => self.attribute(scope, func, value, attr, false),
            _ => self.eval(scope, func),
        }
    }

    fn attribute(
        &mut self,
        scope: ScopeId,
        expr: &Expr,
        obj: &Expr,
        attr: &str,
        record: bool,
    ) -> Option<usize> {
        let o = self.eval(scope, obj)?;
        let result = self.s.temp(self.site(expr));
        let ctx = self.ctx(scope, expr);
        self.s.add_constraint(
            o,
            Rule::AttrLoad {
                ctx,
                attr: attr.to_string(),
                result,
                record,
            },
        );
        Some(result)
    }

    fn eval(&mut self, scope: ScopeId, expr: &Expr) -> Option<usize> {
        match &expr.kind {
            ExprKind::Name(name) => match self.name_binding(scope, name) {
                Some(b) => Some(b),
                None if is_builtin(name) => Some(
                    self.s
                        .value_node(AbstractValue::External(format!("builtins.{name}"))),
                ),
                None => None,
            },
            ExprKind::Attribute { value, attr } => self.attribute(scope, expr, value, attr, true),
            ExprKind::Call { func, args, keywords } => self.call(scope, expr, func, args, keywords),
            ExprKind::Lambda(lambda) => {
                let id = self.def_of_node(expr.id)?;
                self.params(scope, id, &lambda.params);
                let inner = self.s.program.def(id).scope;
                if let Some(body) = self.eval(inner, &lambda.body) {
                    let ret = self.s.node(Slot::Return(id));
                    self.s.edge(body, ret);
                }
                Some(self.s.value_node(AbstractValue::Function(id)))
            }
            ExprKind::Dict(entries) => {
                let site = self.site(expr);
                for entry in entries {
                    let value = self.eval(scope, &entry.value);
                    let key = match &entry.key {
                        Some(k) => {
                            self.eval(scope, k);
                            Some(str_const(k))
                        }
                        None => None,
                    };
                    if let (Some(key), Some(v)) = (key, value) {
                        let slot = self.s.register_dict_key(site, key);
                        self.s.edge(v, slot);
                    }
                }
                Some(self.s.value_node(AbstractValue::Container {
                    site,
                    kind: ContainerKind::Dict,
                }))
            }
            ExprKind::Subscript { value, index } => {
                let key = str_const(index);
                self.eval(scope, index);
                let obj = self.eval(scope, value)?;
                let result = self.s.temp(self.site(expr));
                let ctx = self.ctx(scope, expr);
                self.s.add_constraint(obj, Rule::SubLoad { ctx, key, result });
                Some(result)
            }
            ExprKind::Str(_) | ExprKind::Constant => None,
            ExprKind::Sequence(elts) => {
                let site = self.site(expr);
                let elems = self.s.node(Slot::Elements(site));
                for e in elts {
                    let slot = match &e.kind {
                        ExprKind::Starred(inner) => self.iterate(scope, inner),
                        _ => self.eval(scope, e),
                    };
                    if let Some(slot) = slot {
                        self.s.edge(slot, elems);
                    }
                }
                Some(self.s.value_node(AbstractValue::Container {
                    site,
                    kind: ContainerKind::Sequence,
                }))
            }
            ExprKind::Comprehension(comp) => {
                let inner = self.tree().scope_of_node(expr.id).unwrap_or(scope);
                for (i, clause) in comp.clauses.iter().enumerate() {
                    let elems = self.iterate(if i == 0 { scope } else { inner }, &clause.iter);
                    self.assign(inner, &clause.target, elems);
                    for cond in &clause.ifs {
                        self.eval(inner, cond);
                    }
                }
                let site = self.site(expr);
                let element = self.eval(inner, &comp.element);
                let value = comp.value.as_ref().and_then(|v| self.eval(inner, v));
                let kind = if comp.kind == ComprehensionKind::Dict {
                    ContainerKind::Dict
                } else {
                    ContainerKind::Sequence
                };
                let pool = match kind {
                    ContainerKind::Dict => {
                        let slot = self.s.register_dict_key(site, None);
                        value.map(|v| (v, slot))
                    }
                    ContainerKind::Sequence => {
                        let slot = self.s.node(Slot::Elements(site));
                        element.map(|e| (e, slot))
                    }
                };
                if let Some((from, to)) = pool {
                    self.s.edge(from, to);
                }
                Some(self.s.value_node(AbstractValue::Container { site, kind }))
            }
            ExprKind::Yield(value) => {
                if let Some(v) = value {
                    let slot = self.eval(scope, v);
                    if let (Some(slot), Some(ret)) = (slot, self.return_node(scope)) {
                        self.s.edge(slot, ret);
                    }
                }
                None
            }
            ExprKind::YieldFrom(value) => {
                let elems = self.iterate(scope, value);
                if let (Some(e), Some(ret)) = (elems, self.return_node(scope)) {
                    self.s.edge(e, ret);
                }
                None
            }
            ExprKind::Await(v) | ExprKind::Starred(v) => self.eval(scope, v),
            ExprKind::NamedExpr { target, value } => {
                let slot = self.eval(scope, value);
                let mut owner = scope;
                while self.tree().scope(owner).kind == ScopeKind::Comprehension {
                    owner = self.tree().scope(owner).parent.unwrap_or(ScopeTree::ROOT);
                }
                self.assign(owner, target, slot);
                slot
            }
            ExprKind::IfExp { test, body, orelse } => {
                self.eval(scope, test);
                let parts = [self.eval(scope, body), self.eval(scope, orelse)];
                self.merge(expr, &parts)
            }
            ExprKind::BoolOp(values) => {
                let parts: Vec<Option<usize>> = values.iter().map(|v| self.eval(scope, v)).collect();
                self.merge(expr, &parts)
            }
            ExprKind::Operation(operands) => {
                for o in operands {
                    self.eval(scope, o);
                }
                None
            }
        }
    }

    fn merge(&mut self, expr: &Expr, parts: &[Option<usize>]) -> Option<usize> {
        let present: Vec<usize> = parts.iter().flatten().copied().collect();
        if present.is_empty() {
            return None;
        }
        let result = self.s.temp(self.site(expr));
        for p in present {
            self.s.edge(p, result);
        }
        Some(result)
    }

    fn call(
        &mut self,
        scope: ScopeId,
        expr: &Expr,
        func: &Expr,
        args: &[Expr],
        keywords: &[Keyword],
    ) -> Option<usize> {
        let callee = self.callee(scope, func);
        let mut spec = CallSpec {
            first_str: args.first().and_then(str_const),
            ..Default::default()
        };
        for a in args {
            match &a.kind {
                ExprKind::Starred(inner) => {
                    let slot = self.eval(scope, inner);
                    spec.args.push(Arg::Star(slot));
                }
                _ => {
                    let slot = self.eval(scope, a);
                    spec.args.push(Arg::Pos(slot));
                }
            }
        }
        for k in keywords {
            let slot = self.eval(scope, &k.value);
            match &k.name {
                Some(name) => spec.keywords.push((name.clone(), slot)),
                None => spec.double_star.extend(slot),
            }
        }
        let result = self.s.temp(self.site(expr));
        if let ExprKind::Name(n) = &func.kind {
            if n == "super" && self.tree().lookup(scope, n).is_none() {
                self.super_call(scope, &spec, result);
            }
        }
        if let Some(callee) = callee {
            let ctx = self.ctx(scope, expr);
            self.s.add_constraint(
                callee,
                Rule::Call {
                    ctx,
                    spec: Rc::new(spec),
                    result: Some(result),
                    decorates: None,
                },
            );
        }
        Some(result)
    }

    /// `super()` in a method, or `super(C, obj)`.
    fn super_call(&mut self, scope: ScopeId, spec: &CallSpec, result: usize) {
        let Some(func) = self.s.program.enclosing_function(self.module, scope) else {
            return;
        };
        let def = self.s.program.def(func).clone();
        let Some(class) = self.s.program.scope_def(self.module, def.parent) else {
            return;
        };
        if self.s.program.def(class).kind != DefKind::Class {
            return;
        }
        let receiver = match spec.positional(1) {
            Some(slot) => Some(slot),
            None => def
                .params
                .positional
                .first()
                .map(|p| self.s.binding(self.module, def.scope, p)),
        };
        if let Some(r) = receiver {
            self.s.add_constraint(r, Rule::Super { class, result });
        }
    }
}

fn str_const(expr: &Expr) -> Option<String> {
    match &expr.kind {
        ExprKind::Str(s) => Some(s.clone()),
        _ => None,
    }
}
