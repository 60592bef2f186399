// SPDX-License-Identifier: Apache-2.0

use std::collections::{BTreeSet, HashMap};

use crate::node::{NodeKind, Op};

use super::{DataFlowGraph, EdgeSet};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub struct TrimReport {
    pub removed: usize,
    /// The input had no root, so the result is empty.
    pub no_roots: bool,
}

/// Removes pass-through signal chains, duplicate constants under one parent,
/// and every weakly connected component except the largest rooted one.
///
/// Pass-through contraction, applied to a fixed point over signal nodes `u`
/// with exactly one child `w` that is also a signal:
/// - `w` has the same name as `u`, or `w` is a leaf and `u` is not a root:
///   `u` is dropped and its parents point at `w` (a root moves to `w`).
/// - otherwise, if `w` is not a root, has `u` as its only parent and has
///   children of its own, `w` is dropped and `u` takes over its children.
pub fn trim(g: &DataFlowGraph) -> (DataFlowGraph, TrimReport) {
    let n = g.len();
    let mut work = Work::new(g);
    work.contract();
    work.dedup_constants();

    let mut keep = work.alive.clone();
    let roots: Vec<usize> = work.roots.iter().copied().filter(|&r| work.alive[r]).collect();
    let component = work.largest_rooted_component(&roots);
    let no_roots = component.is_none();
    match component {
        Some(c) => {
            for (i, k) in keep.iter_mut().enumerate() {
                *k = *k && c[i];
            }
        }
        None => keep.iter_mut().for_each(|k| *k = false),
    }

    // grouped by source, child order kept
    let mut edges = EdgeSet::default();
    for (s, children) in work.succ.iter().enumerate() {
        for &d in children {
            edges.insert(s, d);
        }
    }
    let mut staged = g.clone();
    staged.edges = edges.edges;
    staged.roots = roots;
    let out = staged.retain(&keep);
    let removed = n - out.len();
    (out, TrimReport { removed, no_roots })
}

struct Work<'a> {
    g: &'a DataFlowGraph,
    alive: Vec<bool>,
    succ: Vec<Vec<usize>>,
    pred: Vec<BTreeSet<usize>>,
    roots: Vec<usize>,
    is_root: Vec<bool>,
}

impl<'a> Work<'a> {
    fn new(g: &'a DataFlowGraph) -> Self {
        let n = g.len();
        let mut succ = vec![Vec::new(); n];
        let mut pred = vec![BTreeSet::new(); n];
        for &(s, d) in &g.edges {
            if !succ[s].contains(&d) {
                succ[s].push(d);
                pred[d].insert(s);
            }
        }
        let mut roots = Vec::new();
        let mut is_root = vec![false; n];
        for &r in &g.roots {
            if !is_root[r] {
                is_root[r] = true;
                roots.push(r);
            }
        }
        Work { g, alive: vec![true; n], succ, pred, roots, is_root }
    }

    fn is_signal(&self, i: usize) -> bool {
        self.g.nodes[i].kind == NodeKind::Signal
    }

    /// Points `p`'s edge to `old` at `new`, in the same child position.
    fn redirect(&mut self, p: usize, old: usize, new: usize) {
        let pos = self.succ[p].iter().position(|&x| x == old).expect("edge exists");
        if p == new || self.succ[p].contains(&new) {
            self.succ[p].remove(pos);
        } else {
            self.succ[p][pos] = new;
            self.pred[new].insert(p);
        }
        self.pred[old].remove(&p);
    }

    fn remove(&mut self, u: usize) {
        for d in std::mem::take(&mut self.succ[u]) {
            self.pred[d].remove(&u);
        }
        for p in std::mem::take(&mut self.pred[u]) {
            self.succ[p].retain(|&x| x != u);
        }
        self.alive[u] = false;
    }

    fn contract(&mut self) {
        let mut changed = true;
        while changed {
            changed = false;
            for u in 0..self.g.len() {
                if self.alive[u] && self.try_contract(u) {
                    changed = true;
                }
            }
        }
    }

    fn try_contract(&mut self, u: usize) -> bool {
        if !self.is_signal(u) || self.succ[u].len() != 1 {
            return false;
        }
        let w = self.succ[u][0];
        if w == u || !self.is_signal(w) {
            return false;
        }
        let same_name = self.g.nodes[u].name == self.g.nodes[w].name;
        let w_leaf = self.succ[w].is_empty();
        if same_name || (w_leaf && !self.is_root[u]) {
            if self.is_root[u] && !same_name {
                return false;
            }
            let parents: Vec<usize> = self.pred[u].iter().copied().collect();
            for p in parents {
                self.redirect(p, u, w);
            }
            self.remove(u);
            if self.is_root[u] {
                self.is_root[u] = false;
                if self.is_root[w] {
                    self.roots.retain(|&r| r != u);
                } else {
                    self.is_root[w] = true;
                    for r in &mut self.roots {
                        if *r == u {
                            *r = w;
                        }
                    }
                }
            }
            return true;
        }
        if !self.is_root[w] && !w_leaf && self.pred[w].len() == 1 {
            let children = self.succ[w].clone();
            self.remove(w);
            for c in children {
                if c != u && !self.succ[u].contains(&c) {
                    self.succ[u].push(c);
                    self.pred[c].insert(u);
                }
            }
            return true;
        }
        false
    }

    /// Drops repeated constants with the same literal under one parent.
    /// Part-select bounds are exempt: `[3:3]` needs both children.
    fn dedup_constants(&mut self) {
        for p in 0..self.g.len() {
            if !self.alive[p] || self.g.nodes[p].op == Some(Op::PartSelect) {
                continue;
            }
            let mut seen: HashMap<&str, usize> = HashMap::new();
            let mut dupes = Vec::new();
            for &c in &self.succ[p] {
                let node = &self.g.nodes[c];
                if node.kind == NodeKind::Constant && self.succ[c].is_empty() && self.pred[c].len() == 1 {
                    if seen.contains_key(node.name.as_str()) {
                        dupes.push(c);
                    } else {
                        seen.insert(&node.name, c);
                    }
                }
            }
            for c in dupes {
                self.remove(c);
            }
        }
    }

    /// Membership mask of the largest weakly connected component containing a
    /// root; ties go to the component with the smallest node id.
    fn largest_rooted_component(&self, roots: &[usize]) -> Option<Vec<bool>> {
        let n = self.g.len();
        let mut comp = vec![usize::MAX; n];
        let mut sizes = Vec::new();
        for start in 0..n {
            if !self.alive[start] || comp[start] != usize::MAX {
                continue;
            }
            let id = sizes.len();
            let mut size = 0;
            let mut stack = vec![start];
            comp[start] = id;
            while let Some(v) = stack.pop() {
                size += 1;
                for &m in self.succ[v].iter().chain(self.pred[v].iter()) {
                    if comp[m] == usize::MAX {
                        comp[m] = id;
                        stack.push(m);
                    }
                }
            }
            sizes.push(size);
        }
        let best = roots.iter().map(|&r| comp[r]).max_by(|&a, &b| sizes[a].cmp(&sizes[b]).then(b.cmp(&a)))?;
        Some(comp.iter().map(|&c| c == best).collect())
    }
}
