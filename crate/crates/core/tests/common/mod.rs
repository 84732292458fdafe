//! Independent reference implementations used as test oracles, and the
//! generators that feed them.

#![allow(dead_code)]

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use proptest::prelude::*;

/// Per-element membership classification: for each subset of tools, the
/// elements found in exactly those tools. Subsets are listed as sorted
/// tool indices.
pub fn brute_regions(sets: &[BTreeSet<u32>]) -> BTreeMap<Vec<usize>, usize> {
    let universe: BTreeSet<u32> = sets.iter().flatten().copied().collect();
    let mut out = BTreeMap::new();
    for e in universe {
        let members: Vec<usize> = (0..sets.len()).filter(|&i| sets[i].contains(&e)).collect();
        *out.entry(members).or_insert(0) += 1;
    }
    out
}

/// 2 to 4 tool sets over a universe of at most 200 elements.
pub fn tool_sets() -> impl Strategy<Value = Vec<BTreeSet<u32>>> {
    (2usize..=4, 1u32..=200).prop_flat_map(|(n, universe)| {
        prop::collection::vec(prop::collection::btree_set(0..universe, 0..=universe as usize), n)
    })
}

/// Nodes reachable from `start` (including itself) by breadth-first search.
pub fn reachable(n: usize, edges: &[(usize, usize)], start: usize) -> BTreeSet<usize> {
    let mut succ = vec![Vec::new(); n];
    for &(a, b) in edges {
        succ[a].push(b);
    }
    let mut seen = BTreeSet::from([start]);
    let mut queue = VecDeque::from([start]);
    while let Some(x) = queue.pop_front() {
        for &y in &succ[x] {
            if seen.insert(y) {
                queue.push_back(y);
            }
        }
    }
    seen
}

/// Values each node holds in the least fixpoint: the seeds of every node
/// that reaches it.
pub fn closure_values(n: usize, edges: &[(usize, usize)], seeds: &[(usize, u32)]) -> Vec<BTreeSet<u32>> {
    let mut out = vec![BTreeSet::new(); n];
    for &(node, value) in seeds {
        for r in reachable(n, edges, node) {
            out[r].insert(value);
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct RandomGraph {
    pub nodes: usize,
    pub edges: Vec<(usize, usize)>,
    pub seeds: Vec<(usize, u32)>,
}

/// Graphs of up to 30 nodes, cycles and self loops allowed.
pub fn random_graph() -> impl Strategy<Value = RandomGraph> {
    (1usize..=30).prop_flat_map(|n| {
        (
            prop::collection::vec((0..n, 0..n), 0..=n * 3),
            prop::collection::vec((0..n, 0u32..20), 0..=n),
        )
            .prop_map(move |(edges, seeds)| RandomGraph {
                nodes: n,
                edges,
                seeds,
            })
    })
}

/// Class `i` may only inherit from classes with a smaller index, so every
/// hierarchy is acyclic. Some are not linearizable.
pub fn random_hierarchy() -> impl Strategy<Value = Vec<Vec<usize>>> {
    (1usize..=9).prop_flat_map(|n| {
        (0..n)
            .map(|i| {
                if i == 0 {
                    Just(Vec::new()).boxed()
                } else {
                    prop::sample::subsequence((0..i).collect::<Vec<_>>(), 0..=i.min(3))
                        .prop_shuffle()
                        .boxed()
                }
            })
            .collect::<Vec<_>>()
    })
}

/// Textbook C3 without memoization: the head of the first list that
/// appears in no other list's tail is taken, until all lists are empty.
pub fn naive_c3(bases: &[Vec<usize>], class: usize) -> Option<Vec<usize>> {
    let mut lists: Vec<Vec<usize>> = Vec::new();
    for &b in &bases[class] {
        lists.push(naive_c3(bases, b)?);
    }
    lists.push(bases[class].clone());
    let mut out = vec![class];
    loop {
        lists.retain(|l| !l.is_empty());
        if lists.is_empty() {
            return Some(out);
        }
        let head = lists
            .iter()
            .map(|l| l[0])
            .find(|&h| lists.iter().all(|l| !l[1..].contains(&h)))?;
        out.push(head);
        for l in &mut lists {
            if l[0] == head {
                l.remove(0);
            }
        }
    }
}

/// Whether `sub` appears in `seq` in the same relative order.
pub fn is_subsequence(sub: &[usize], seq: &[usize]) -> bool {
    let mut it = seq.iter();
    sub.iter().all(|x| it.any(|y| y == x))
}
