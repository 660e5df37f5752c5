//! Graph types and the chordal-graph machinery the rest of the crate builds on.
//!
//! Node ids are dense zero-based indices. File formats use one-based ids; the
//! conversion happens in [`io`] only.

mod chordal;
pub mod io;
pub(crate) mod meek;
mod orient;

use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub use chordal::{
    build_clique_tree, chordality_peo, is_perfect_elimination_order, maximal_cliques, mcs_order,
    CliqueTree,
};
pub use meek::{chain_components, chain_components_within, meek_closure, skeleton_and_vstructures, ChainComponent};
pub use orient::{adversarial_orientation, enumerate_amos, orient_by_order, DEFAULT_AMO_CAP};

pub type NodeId = usize;
pub type NodeSet = BTreeSet<NodeId>;

/// A v-structure `i -> j <- k` stored as `(i, j, k)` with `i < k`.
pub type VStructure = (NodeId, NodeId, NodeId);

fn check_node(v: NodeId, p: usize) -> Result<()> {
    if v >= p {
        Err(Error::NodeOutOfRange { node: v, p })
    } else {
        Ok(())
    }
}

/// Simple undirected graph on `0..p`.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct UndirectedGraph {
    adj: Vec<NodeSet>,
}

impl UndirectedGraph {
    pub fn empty(p: usize) -> Self {
        UndirectedGraph {
            adj: vec![NodeSet::new(); p],
        }
    }

    pub fn from_edges(p: usize, edges: &[(NodeId, NodeId)]) -> Result<Self> {
        let mut g = Self::empty(p);
        for &(a, b) in edges {
            check_node(a, p)?;
            check_node(b, p)?;
            if a == b {
                return Err(Error::SelfLoop(a));
            }
            if !g.adj[a].insert(b) {
                return Err(Error::DuplicateEdge(a.min(b), a.max(b)));
            }
            g.adj[b].insert(a);
        }
        Ok(g)
    }

    /// Complete graph on `m` nodes.
    pub fn complete(m: usize) -> Self {
        let mut g = Self::empty(m);
        for a in 0..m {
            for b in (a + 1)..m {
                g.adj[a].insert(b);
                g.adj[b].insert(a);
            }
        }
        g
    }

    /// Path `0 - 1 - ... - (n-1)`.
    pub fn path(n: usize) -> Self {
        let edges: Vec<_> = (1..n).map(|i| (i - 1, i)).collect();
        Self::from_edges(n, &edges).expect("path edges are valid")
    }

    pub(crate) fn add_edge_unchecked(&mut self, a: NodeId, b: NodeId) {
        debug_assert_ne!(a, b);
        self.adj[a].insert(b);
        self.adj[b].insert(a);
    }

    pub fn p(&self) -> usize {
        self.adj.len()
    }

    pub fn neighbors(&self, v: NodeId) -> &NodeSet {
        &self.adj[v]
    }

    pub fn degree(&self, v: NodeId) -> usize {
        self.adj[v].len()
    }

    pub fn has_edge(&self, a: NodeId, b: NodeId) -> bool {
        a < self.p() && self.adj[a].contains(&b)
    }

    /// Edges as `(a, b)` with `a < b`, in lexicographic order.
    pub fn edges(&self) -> Vec<(NodeId, NodeId)> {
        let mut out = Vec::new();
        for (a, ns) in self.adj.iter().enumerate() {
            for &b in ns.range((a + 1)..) {
                out.push((a, b));
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.adj.iter().map(|s| s.len()).sum::<usize>() / 2
    }

    pub fn is_clique(&self, nodes: &NodeSet) -> bool {
        let v: Vec<_> = nodes.iter().copied().collect();
        for (i, &a) in v.iter().enumerate() {
            for &b in &v[i + 1..] {
                if !self.has_edge(a, b) {
                    return false;
                }
            }
        }
        true
    }

    /// Connected components of the graph with `removed` deleted, each sorted,
    /// listed by smallest member.
    pub fn components_without(&self, removed: &NodeSet) -> Vec<Vec<NodeId>> {
        let p = self.p();
        let mut seen = vec![false; p];
        for &r in removed {
            if r < p {
                seen[r] = true;
            }
        }
        let mut comps = Vec::new();
        let mut queue = VecDeque::new();
        for s in 0..p {
            if seen[s] {
                continue;
            }
            seen[s] = true;
            queue.push_back(s);
            let mut comp = Vec::new();
            while let Some(v) = queue.pop_front() {
                comp.push(v);
                for &w in &self.adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        queue.push_back(w);
                    }
                }
            }
            comp.sort_unstable();
            comps.push(comp);
        }
        comps
    }

    pub fn connected_components(&self) -> Vec<Vec<NodeId>> {
        self.components_without(&NodeSet::new())
    }

    pub fn is_connected(&self) -> bool {
        self.p() <= 1 || self.connected_components().len() == 1
    }

    /// Induced subgraph on `nodes`, relabelled to `0..nodes.len()` in ascending
    /// order. Returns the subgraph and the local-to-original id map.
    pub fn induced(&self, nodes: &NodeSet) -> (UndirectedGraph, Vec<NodeId>) {
        let map: Vec<NodeId> = nodes.iter().copied().collect();
        let mut local = vec![usize::MAX; self.p()];
        for (i, &v) in map.iter().enumerate() {
            local[v] = i;
        }
        let mut g = UndirectedGraph::empty(map.len());
        for (i, &v) in map.iter().enumerate() {
            for &w in &self.adj[v] {
                let j = local[w];
                if j != usize::MAX {
                    g.adj[i].insert(j);
                }
            }
        }
        (g, map)
    }
}

/// Directed acyclic graph on `0..p`. Acyclicity is checked on construction.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Dag {
    parents: Vec<Vec<NodeId>>,
    children: Vec<Vec<NodeId>>,
    topo: Vec<NodeId>,
}

impl Dag {
    pub fn from_edges(p: usize, edges: &[(NodeId, NodeId)]) -> Result<Self> {
        let mut parents = vec![Vec::new(); p];
        let mut children = vec![Vec::new(); p];
        let mut seen = BTreeSet::new();
        for &(a, b) in edges {
            check_node(a, p)?;
            check_node(b, p)?;
            if a == b {
                return Err(Error::SelfLoop(a));
            }
            if !seen.insert((a.min(b), a.max(b))) {
                return Err(Error::DuplicateEdge(a.min(b), a.max(b)));
            }
            parents[b].push(a);
            children[a].push(b);
        }
        for v in parents.iter_mut().chain(children.iter_mut()) {
            v.sort_unstable();
        }
        let topo = kahn(&parents, &children).ok_or(Error::Cycle)?;
        Ok(Dag {
            parents,
            children,
            topo,
        })
    }

    pub fn empty(p: usize) -> Self {
        Dag::from_edges(p, &[]).expect("empty graph is acyclic")
    }

    pub fn p(&self) -> usize {
        self.parents.len()
    }

    pub fn parents(&self, v: NodeId) -> &[NodeId] {
        &self.parents[v]
    }

    pub fn children(&self, v: NodeId) -> &[NodeId] {
        &self.children[v]
    }

    pub fn has_edge(&self, a: NodeId, b: NodeId) -> bool {
        a < self.p() && self.children[a].binary_search(&b).is_ok()
    }

    pub fn adjacent(&self, a: NodeId, b: NodeId) -> bool {
        self.has_edge(a, b) || self.has_edge(b, a)
    }

    /// Edges `(a, b)` meaning `a -> b`, sorted.
    pub fn edges(&self) -> Vec<(NodeId, NodeId)> {
        let mut out = Vec::new();
        for (a, ch) in self.children.iter().enumerate() {
            for &b in ch {
                out.push((a, b));
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.children.iter().map(Vec::len).sum()
    }

    /// A topological order (smallest available node first).
    pub fn topological_order(&self) -> &[NodeId] {
        &self.topo
    }

    /// Proper ancestors of `v`.
    pub fn ancestors(&self, v: NodeId) -> NodeSet {
        self.reach(std::iter::once(v), &self.parents)
    }

    /// Proper descendants of every node in `from` (nodes of `from` are
    /// included only if they descend from another member).
    pub fn descendants_of<I: IntoIterator<Item = NodeId>>(&self, from: I) -> NodeSet {
        self.reach(from, &self.children)
    }

    fn reach<I: IntoIterator<Item = NodeId>>(&self, from: I, next: &[Vec<NodeId>]) -> NodeSet {
        let mut out = NodeSet::new();
        let mut stack: Vec<NodeId> = Vec::new();
        for s in from {
            stack.extend(next[s].iter().copied());
        }
        while let Some(v) = stack.pop() {
            if out.insert(v) {
                stack.extend(next[v].iter().copied());
            }
        }
        out
    }

    /// Members of `set` with no ancestor in `set`.
    pub fn sources_of(&self, set: &NodeSet) -> NodeSet {
        let below = self.descendants_of(set.iter().copied());
        set.iter().copied().filter(|v| !below.contains(v)).collect()
    }

    pub fn skeleton(&self) -> UndirectedGraph {
        let mut g = UndirectedGraph::empty(self.p());
        for (a, b) in self.edges() {
            g.add_edge_unchecked(a, b);
        }
        g
    }

    /// Induced subgraph on `nodes`, keeping the original ids (other nodes
    /// become isolated).
    pub fn restrict(&self, nodes: &NodeSet) -> Dag {
        let edges: Vec<_> = self
            .edges()
            .into_iter()
            .filter(|(a, b)| nodes.contains(a) && nodes.contains(b))
            .collect();
        Dag::from_edges(self.p(), &edges).expect("subgraph of a DAG is a DAG")
    }
}

fn kahn(parents: &[Vec<NodeId>], children: &[Vec<NodeId>]) -> Option<Vec<NodeId>> {
    let p = parents.len();
    let mut indeg: Vec<usize> = parents.iter().map(Vec::len).collect();
    let mut ready: BTreeSet<NodeId> = (0..p).filter(|&v| indeg[v] == 0).collect();
    let mut order = Vec::with_capacity(p);
    while let Some(v) = ready.pop_first() {
        order.push(v);
        for &c in &children[v] {
            indeg[c] -= 1;
            if indeg[c] == 0 {
                ready.insert(c);
            }
        }
    }
    (order.len() == p).then_some(order)
}

/// Partially directed graph: every adjacent pair is either directed or
/// undirected, never both.
#[derive(Debug, Clone, PartialEq, Eq, Hash)]
pub struct Pdag {
    pa: Vec<NodeSet>,
    ch: Vec<NodeSet>,
    ne: Vec<NodeSet>,
}

impl Pdag {
    pub fn empty(p: usize) -> Self {
        Pdag {
            pa: vec![NodeSet::new(); p],
            ch: vec![NodeSet::new(); p],
            ne: vec![NodeSet::new(); p],
        }
    }

    pub fn from_edges(
        p: usize,
        directed: &[(NodeId, NodeId)],
        undirected: &[(NodeId, NodeId)],
    ) -> Result<Self> {
        let mut g = Pdag::empty(p);
        for &(a, b) in directed.iter().chain(undirected) {
            check_node(a, p)?;
            check_node(b, p)?;
            if a == b {
                return Err(Error::SelfLoop(a));
            }
            if g.adjacent(a, b) {
                return Err(Error::DuplicateEdge(a.min(b), a.max(b)));
            }
            g.ne[a].insert(b);
            g.ne[b].insert(a);
        }
        for &(a, b) in directed {
            g.orient(a, b)?;
        }
        if !g.directed_part_acyclic() {
            return Err(Error::Cycle);
        }
        Ok(g)
    }

    /// Skeleton of `dag` with every edge undirected.
    pub fn undirected_skeleton(dag: &Dag) -> Self {
        let mut g = Pdag::empty(dag.p());
        for (a, b) in dag.edges() {
            g.ne[a].insert(b);
            g.ne[b].insert(a);
        }
        g
    }

    pub fn from_undirected(g: &UndirectedGraph) -> Self {
        Pdag {
            pa: vec![NodeSet::new(); g.p()],
            ch: vec![NodeSet::new(); g.p()],
            ne: g.adj.clone(),
        }
    }

    pub fn from_dag(dag: &Dag) -> Self {
        let mut g = Pdag::empty(dag.p());
        for (a, b) in dag.edges() {
            g.ch[a].insert(b);
            g.pa[b].insert(a);
        }
        g
    }

    pub fn p(&self) -> usize {
        self.pa.len()
    }

    pub fn parents(&self, v: NodeId) -> &NodeSet {
        &self.pa[v]
    }

    pub fn children(&self, v: NodeId) -> &NodeSet {
        &self.ch[v]
    }

    /// Undirected neighbours.
    pub fn neighbors(&self, v: NodeId) -> &NodeSet {
        &self.ne[v]
    }

    pub fn has_directed(&self, a: NodeId, b: NodeId) -> bool {
        self.ch[a].contains(&b)
    }

    pub fn has_undirected(&self, a: NodeId, b: NodeId) -> bool {
        self.ne[a].contains(&b)
    }

    pub fn adjacent(&self, a: NodeId, b: NodeId) -> bool {
        self.ne[a].contains(&b) || self.ch[a].contains(&b) || self.pa[a].contains(&b)
    }

    /// Turns `a - b` into `a -> b`. Orienting an edge that is already `a -> b`
    /// is a no-op; the reverse orientation or a missing edge is an error.
    pub fn orient(&mut self, a: NodeId, b: NodeId) -> Result<bool> {
        if self.ch[a].contains(&b) {
            return Ok(false);
        }
        if !self.ne[a].remove(&b) {
            return Err(Error::CannotOrient(a, b));
        }
        self.ne[b].remove(&a);
        self.ch[a].insert(b);
        self.pa[b].insert(a);
        Ok(true)
    }

    pub fn directed_edges(&self) -> Vec<(NodeId, NodeId)> {
        let mut out = Vec::new();
        for (a, ch) in self.ch.iter().enumerate() {
            out.extend(ch.iter().map(|&b| (a, b)));
        }
        out
    }

    /// Undirected edges as `(a, b)` with `a < b`.
    pub fn undirected_edges(&self) -> Vec<(NodeId, NodeId)> {
        let mut out = Vec::new();
        for (a, ns) in self.ne.iter().enumerate() {
            out.extend(ns.range((a + 1)..).map(|&b| (a, b)));
        }
        out
    }

    pub fn is_fully_directed(&self) -> bool {
        self.ne.iter().all(NodeSet::is_empty)
    }

    pub fn skeleton(&self) -> UndirectedGraph {
        let mut g = UndirectedGraph::empty(self.p());
        for v in 0..self.p() {
            for &w in self.ne[v].iter().chain(&self.ch[v]) {
                g.add_edge_unchecked(v, w);
            }
        }
        g
    }

    /// Undirected part restricted to `nodes`, relabelled like
    /// [`UndirectedGraph::induced`].
    pub fn undirected_induced(&self, nodes: &NodeSet) -> (UndirectedGraph, Vec<NodeId>) {
        let und = UndirectedGraph {
            adj: self.ne.clone(),
        };
        und.induced(nodes)
    }

    /// Induced subgraph on `nodes`; other nodes keep their ids but lose all
    /// edges.
    pub fn restrict(&self, nodes: &NodeSet) -> Pdag {
        let keep = |s: &NodeSet| -> NodeSet { s.intersection(nodes).copied().collect() };
        let mut g = Pdag::empty(self.p());
        for &v in nodes {
            if v >= self.p() {
                continue;
            }
            g.pa[v] = keep(&self.pa[v]);
            g.ch[v] = keep(&self.ch[v]);
            g.ne[v] = keep(&self.ne[v]);
        }
        g
    }

    pub fn directed_part_acyclic(&self) -> bool {
        let parents: Vec<Vec<NodeId>> = self.pa.iter().map(|s| s.iter().copied().collect()).collect();
        let children: Vec<Vec<NodeId>> = self.ch.iter().map(|s| s.iter().copied().collect()).collect();
        kahn(&parents, &children).is_some()
    }

    /// The DAG this graph denotes, if every edge is directed.
    pub fn to_dag(&self) -> Option<Dag> {
        if !self.is_fully_directed() {
            return None;
        }
        Dag::from_edges(self.p(), &self.directed_edges()).ok()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn dag_rejects_cycles_and_self_loops() {
        assert_eq!(Dag::from_edges(3, &[(0, 1), (1, 2), (2, 0)]), Err(Error::Cycle));
        assert_eq!(Dag::from_edges(2, &[(1, 1)]), Err(Error::SelfLoop(1)));
        assert!(matches!(
            Dag::from_edges(2, &[(0, 5)]),
            Err(Error::NodeOutOfRange { node: 5, p: 2 })
        ));
    }

    #[test]
    fn ancestors_descendants_and_sources() {
        let g = Dag::from_edges(5, &[(0, 1), (1, 2), (3, 2), (2, 4)]).unwrap();
        assert_eq!(g.ancestors(4), NodeSet::from([0, 1, 2, 3]));
        assert_eq!(g.descendants_of([1]), NodeSet::from([2, 4]));
        assert_eq!(g.sources_of(&NodeSet::from([1, 3, 4])), NodeSet::from([1, 3]));
        assert_eq!(g.topological_order(), &[0, 1, 3, 2, 4]);
    }

    #[test]
    fn pdag_orientation_rules() {
        let mut g = Pdag::from_edges(3, &[(0, 1)], &[(1, 2)]).unwrap();
        assert!(g.orient(1, 2).unwrap());
        assert!(!g.orient(1, 2).unwrap());
        assert_eq!(g.orient(1, 0), Err(Error::CannotOrient(1, 0)));
        assert!(g.is_fully_directed());
        assert!(Pdag::from_edges(2, &[(0, 1)], &[(0, 1)]).is_err());
    }

    #[test]
    fn components_after_removal() {
        let g = UndirectedGraph::path(5);
        let comps = g.components_without(&NodeSet::from([2]));
        assert_eq!(comps, vec![vec![0, 1], vec![3, 4]]);
        let (sub, map) = g.induced(&NodeSet::from([1, 2, 4]));
        assert_eq!(map, vec![1, 2, 4]);
        assert_eq!(sub.edges(), vec![(0, 1)]);
    }
}
