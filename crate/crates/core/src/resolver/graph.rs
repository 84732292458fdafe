//! Assignment graphs and their least fixpoint.
//!
//! A node holds a set of abstract values. An edge `a -> b` says every value
//! of `a` is also a value of `b`. Seeds give nodes their initial values. The
//! least fixpoint gives each node exactly the seeds that reach it.

use std::collections::{BTreeMap, BTreeSet, HashMap, HashSet};
use std::hash::Hash;

use thiserror::Error;

/// Index into a value table.
pub type ValueId = u32;

pub type ValueSet = BTreeSet<ValueId>;

#[derive(Debug, Clone, Error, PartialEq, Eq)]
pub enum FixpointError {
    #[error("no fixpoint after {iterations} iterations")]
    BudgetExceeded { iterations: usize },
}

/// Directed graph over keys of type `K` with seed values.
#[derive(Debug, Clone)]
pub struct AssignmentGraph<K> {
    keys: Vec<K>,
    index: HashMap<K, usize>,
    succ: Vec<Vec<usize>>,
    edge_set: HashSet<(usize, usize)>,
    seeds: Vec<ValueSet>,
}

impl<K> Default for AssignmentGraph<K> {
    fn default() -> Self {
        AssignmentGraph {
            keys: Vec::new(),
            index: HashMap::new(),
            succ: Vec::new(),
            edge_set: HashSet::new(),
            seeds: Vec::new(),
        }
    }
}

impl<K: Clone + Eq + Hash> AssignmentGraph<K> {
    pub fn new() -> Self {
        Self::default()
    }

    /// Index of `key`, adding it if needed.
    pub fn node(&mut self, key: K) -> usize {
        if let Some(&idx) = self.index.get(&key) {
            return idx;
        }
        let idx = self.keys.len();
        self.keys.push(key.clone());
        self.index.insert(key, idx);
        self.succ.push(Vec::new());
        self.seeds.push(ValueSet::new());
        idx
    }

    pub fn index_of(&self, key: &K) -> Option<usize> {
        self.index.get(key).copied()
    }

    pub fn key(&self, idx: usize) -> &K {
        &self.keys[idx]
    }

    /// Adds `from -> to`; returns false if the edge already existed.
    pub fn add_edge(&mut self, from: K, to: K) -> bool {
        let (a, b) = (self.node(from), self.node(to));
        self.add_edge_idx(a, b)
    }

    pub(crate) fn add_edge_idx(&mut self, a: usize, b: usize) -> bool {
        if self.edge_set.insert((a, b)) {
            self.succ[a].push(b);
            true
        } else {
            false
        }
    }

    /// Adds `value` to the seeds of `key`; returns false if already there.
    pub fn seed(&mut self, key: K, value: ValueId) -> bool {
        let idx = self.node(key);
        self.seeds[idx].insert(value)
    }

    pub fn node_count(&self) -> usize {
        self.keys.len()
    }

    pub fn edge_count(&self) -> usize {
        self.edge_set.len()
    }

    pub fn successors(&self, idx: usize) -> &[usize] {
        &self.succ[idx]
    }

    pub fn seeds(&self, idx: usize) -> &ValueSet {
        &self.seeds[idx]
    }
}

/// Order in which nodes with pending values are processed within one
/// iteration. The fixpoint does not depend on it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum IterationOrder {
    #[default]
    Ascending,
    Descending,
}

/// Values of every node at the fixpoint.
#[derive(Debug, Clone)]
pub struct Solution<K> {
    index: HashMap<K, usize>,
    values: Vec<ValueSet>,
    /// Iterations used; one iteration moves new values across one edge.
    pub iterations: usize,
}

impl<K: Eq + Hash> Solution<K> {
    pub fn values(&self, key: &K) -> Option<&ValueSet> {
        self.index.get(key).map(|&i| &self.values[i])
    }
}

/// Propagates seeds along edges until nothing changes. Fails if new values
/// are still moving after `max_iters` iterations.
pub fn propagate_fixpoint<K: Clone + Eq + Hash>(
    graph: &AssignmentGraph<K>,
    max_iters: usize,
) -> Result<Solution<K>, FixpointError> {
    propagate_fixpoint_ordered(graph, max_iters, IterationOrder::Ascending)
}

pub fn propagate_fixpoint_ordered<K: Clone + Eq + Hash>(
    graph: &AssignmentGraph<K>,
    max_iters: usize,
    order: IterationOrder,
) -> Result<Solution<K>, FixpointError> {
    let mut prop = Propagator::new(graph.clone());
    let iterations = prop.run(max_iters, order)?;
    Ok(Solution {
        index: prop.graph.index,
        values: prop.values,
        iterations,
    })
}

/// Incremental propagation: edges and seeds may be added between runs and
/// only the new values move.
#[derive(Debug, Clone)]
pub(crate) struct Propagator<K> {
    pub(crate) graph: AssignmentGraph<K>,
    values: Vec<ValueSet>,
    pending: BTreeMap<usize, ValueSet>,
    changed: BTreeSet<usize>,
}

impl<K: Clone + Eq + Hash> Propagator<K> {
    pub(crate) fn new(graph: AssignmentGraph<K>) -> Self {
        let mut pending = BTreeMap::new();
        for (idx, seeds) in graph.seeds.iter().enumerate() {
            if !seeds.is_empty() {
                pending.insert(idx, seeds.clone());
            }
        }
        let values = vec![ValueSet::new(); graph.node_count()];
        Propagator {
            graph,
            values,
            pending,
            changed: BTreeSet::new(),
        }
    }

    pub(crate) fn node(&mut self, key: K) -> usize {
        let idx = self.graph.node(key);
        if idx == self.values.len() {
            self.values.push(ValueSet::new());
        }
        idx
    }

    pub(crate) fn add_edge(&mut self, a: usize, b: usize) -> bool {
        if !self.graph.add_edge_idx(a, b) {
            return false;
        }
        if !self.values[a].is_empty() {
            let vals = self.values[a].clone();
            self.pending.entry(b).or_default().extend(vals);
        }
        true
    }

    pub(crate) fn seed(&mut self, idx: usize, value: ValueId) -> bool {
        if !self.graph.seeds[idx].insert(value) {
            return false;
        }
        self.pending.entry(idx).or_default().insert(value);
        true
    }

    pub(crate) fn values(&self, idx: usize) -> &ValueSet {
        &self.values[idx]
    }

    pub(crate) fn has_pending(&self) -> bool {
        !self.pending.is_empty()
    }

    /// Nodes whose values grew since the last call.
    pub(crate) fn take_changed(&mut self) -> BTreeSet<usize> {
        std::mem::take(&mut self.changed)
    }

    /// Runs to the fixpoint; returns the number of iterations used.
    pub(crate) fn run(&mut self, max_iters: usize, order: IterationOrder) -> Result<usize, FixpointError> {
        let mut iterations = 0;
        while !self.pending.is_empty() {
            if iterations == max_iters {
                return Err(FixpointError::BudgetExceeded { iterations });
            }
            iterations += 1;
            let batch = std::mem::take(&mut self.pending);
            let items: Box<dyn Iterator<Item = (usize, ValueSet)>> = match order {
                IterationOrder::Ascending => Box::new(batch.into_iter()),
                IterationOrder::Descending => Box::new(batch.into_iter().rev()),
            };
            for (node, delta) in items {
                let fresh: ValueSet = delta.difference(&self.values[node]).copied().collect();
                if fresh.is_empty() {
                    continue;
                }
                self.values[node].extend(fresh.iter().copied());
                self.changed.insert(node);
                for &next in &self.graph.succ[node] {
                    self.pending
                        .entry(next)
                        .or_default()
                        .extend(fresh.iter().copied());
                }
            }
        }
        Ok(iterations)
    }
}
