use std::collections::BTreeSet;

use serde::{Deserialize, Serialize};

use super::{NodeId, NodeSet, UndirectedGraph};
use crate::error::{Error, Result};

/// Maximum cardinality search. Nodes in `prefix` are visited first, in the
/// given order; afterwards the unvisited node with the most visited
/// neighbours is taken, smallest id on ties.
///
/// The prefix is only a legal MCS start when each prefix node is adjacent to
/// all earlier ones, which holds for any ordering of a clique.
pub(crate) fn mcs_with_prefix(g: &UndirectedGraph, prefix: &[NodeId]) -> Vec<NodeId> {
    let p = g.p();
    let mut weight = vec![0usize; p];
    let mut done = vec![false; p];
    // buckets[w] holds unvisited nodes of weight w
    let mut buckets: Vec<BTreeSet<NodeId>> = vec![BTreeSet::new(); p + 1];
    buckets[0].extend(0..p);
    let mut top = 0usize;
    let mut order = Vec::with_capacity(p);

    let mut visit = |v: NodeId,
                     weight: &mut Vec<usize>,
                     done: &mut Vec<bool>,
                     buckets: &mut Vec<BTreeSet<NodeId>>,
                     top: &mut usize| {
        buckets[weight[v]].remove(&v);
        done[v] = true;
        order.push(v);
        for &w in g.neighbors(v) {
            if !done[w] {
                buckets[weight[w]].remove(&w);
                weight[w] += 1;
                buckets[weight[w]].insert(w);
                *top = (*top).max(weight[w]);
            }
        }
    };

    for &v in prefix {
        visit(v, &mut weight, &mut done, &mut buckets, &mut top);
    }
    for _ in prefix.len()..p {
        while top > 0 && buckets[top].is_empty() {
            top -= 1;
        }
        let v = *buckets[top].first().expect("an unvisited node remains");
        visit(v, &mut weight, &mut done, &mut buckets, &mut top);
    }
    order
}

/// MCS visit order, smallest id first on ties.
pub fn mcs_order(g: &UndirectedGraph) -> Vec<NodeId> {
    mcs_with_prefix(g, &[])
}

/// Whether `order` is a perfect elimination ordering: every node's
/// neighbours that come later in `order` form a clique.
pub fn is_perfect_elimination_order(g: &UndirectedGraph, order: &[NodeId]) -> bool {
    let p = g.p();
    if order.len() != p {
        return false;
    }
    let mut pos = vec![usize::MAX; p];
    for (i, &v) in order.iter().enumerate() {
        if v >= p || pos[v] != usize::MAX {
            return false;
        }
        pos[v] = i;
    }
    // Each node's later neighbours minus the earliest one must be adjacent to
    // that earliest one; this is enough by induction.
    for &v in order {
        let later: Vec<NodeId> = g.neighbors(v).iter().copied().filter(|&w| pos[w] > pos[v]).collect();
        let Some(&f) = later.iter().min_by_key(|&&w| pos[w]) else {
            continue;
        };
        for &w in &later {
            if w != f && !g.has_edge(f, w) {
                return false;
            }
        }
    }
    true
}

/// A perfect elimination ordering if `g` is chordal, otherwise `None`.
pub fn chordality_peo(g: &UndirectedGraph) -> Option<Vec<NodeId>> {
    let mut peo = mcs_order(g);
    peo.reverse();
    is_perfect_elimination_order(g, &peo).then_some(peo)
}

/// Maximal cliques of a chordal graph, each sorted, listed in lexicographic
/// order.
pub fn maximal_cliques(g: &UndirectedGraph) -> Result<Vec<NodeSet>> {
    let peo = chordality_peo(g).ok_or(Error::NotChordal)?;
    Ok(cliques_from_peo(g, &peo))
}

pub(crate) fn cliques_from_peo(g: &UndirectedGraph, peo: &[NodeId]) -> Vec<NodeSet> {
    let p = g.p();
    let mut pos = vec![0usize; p];
    for (i, &v) in peo.iter().enumerate() {
        pos[v] = i;
    }
    let later: Vec<NodeSet> = (0..p)
        .map(|v| g.neighbors(v).iter().copied().filter(|&w| pos[w] > pos[v]).collect())
        .collect();
    // C_v = {v} + later(v) is swallowed by C_w exactly when w's earliest
    // later neighbour is v and w has one more later neighbour than v.
    let mut absorbed = vec![false; p];
    for w in 0..p {
        if let Some(&f) = later[w].iter().min_by_key(|&&u| pos[u]) {
            if later[w].len() == later[f].len() + 1 {
                absorbed[f] = true;
            }
        }
    }
    let mut cliques: Vec<NodeSet> = (0..p)
        .filter(|&v| !absorbed[v])
        .map(|v| {
            let mut c = later[v].clone();
            c.insert(v);
            c
        })
        .collect();
    cliques.sort();
    cliques
}

/// Tree over the maximal cliques of a connected chordal graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct CliqueTree {
    pub cliques: Vec<NodeSet>,
    /// Tree edges as `(i, j)` clique indices with `i < j`, sorted.
    pub edges: Vec<(usize, usize)>,
}

impl CliqueTree {
    pub fn len(&self) -> usize {
        self.cliques.len()
    }

    pub fn is_empty(&self) -> bool {
        self.cliques.is_empty()
    }

    pub fn neighbors(&self, c: usize) -> Vec<usize> {
        self.edges
            .iter()
            .filter_map(|&(a, b)| {
                if a == c {
                    Some(b)
                } else if b == c {
                    Some(a)
                } else {
                    None
                }
            })
            .collect()
    }

    /// Sizes (in cliques) of the subtrees left after deleting clique `c`.
    pub fn subtree_sizes_without(&self, c: usize) -> Vec<usize> {
        let r = self.len();
        let mut adj = vec![Vec::new(); r];
        for &(a, b) in &self.edges {
            adj[a].push(b);
            adj[b].push(a);
        }
        let mut seen = vec![false; r];
        seen[c] = true;
        let mut sizes = Vec::new();
        for &start in &adj[c] {
            let mut stack = vec![start];
            seen[start] = true;
            let mut n = 0;
            while let Some(v) = stack.pop() {
                n += 1;
                for &w in &adj[v] {
                    if !seen[w] {
                        seen[w] = true;
                        stack.push(w);
                    }
                }
            }
            sizes.push(n);
        }
        sizes
    }

    /// Running-intersection check: for each graph node, the cliques holding
    /// it induce a connected subtree.
    pub fn has_running_intersection(&self) -> bool {
        if self.edges.len() + 1 != self.cliques.len().max(1) {
            return false;
        }
        let mut count: std::collections::BTreeMap<NodeId, (usize, usize)> = Default::default();
        for c in &self.cliques {
            for &v in c {
                count.entry(v).or_default().0 += 1;
            }
        }
        for &(a, b) in &self.edges {
            for &v in self.cliques[a].intersection(&self.cliques[b]) {
                count.entry(v).or_default().1 += 1;
            }
        }
        count.values().all(|&(n, e)| e + 1 == n)
    }

    /// The direct pairwise form of the clique-intersection property, for
    /// cross-checking [`Self::has_running_intersection`].
    pub fn pairwise_intersection_holds(&self) -> bool {
        let r = self.len();
        for a in 0..r {
            for b in (a + 1)..r {
                let shared: NodeSet = self.cliques[a].intersection(&self.cliques[b]).copied().collect();
                for c in self.path(a, b) {
                    if !shared.is_subset(&self.cliques[c]) {
                        return false;
                    }
                }
            }
        }
        true
    }

    /// Clique indices on the tree path from `a` to `b`, inclusive.
    pub fn path(&self, a: usize, b: usize) -> Vec<usize> {
        let r = self.len();
        let mut prev = vec![usize::MAX; r];
        let mut stack = vec![a];
        prev[a] = a;
        while let Some(v) = stack.pop() {
            for w in self.neighbors(v) {
                if prev[w] == usize::MAX {
                    prev[w] = v;
                    stack.push(w);
                }
            }
        }
        let mut out = vec![b];
        let mut cur = b;
        while cur != a {
            cur = prev[cur];
            out.push(cur);
        }
        out.reverse();
        out
    }
}

/// Maximum-weight spanning tree over the maximal cliques, weight = size of the
/// intersection. Ties go to the lexicographically smallest clique pair.
pub fn build_clique_tree(g: &UndirectedGraph) -> Result<CliqueTree> {
    let cliques = maximal_cliques(g)?;
    if !g.is_connected() {
        return Err(Error::Disconnected);
    }
    let r = cliques.len();
    let mut cand = Vec::new();
    for i in 0..r {
        for j in (i + 1)..r {
            let w = cliques[i].intersection(&cliques[j]).count();
            if w > 0 {
                cand.push((std::cmp::Reverse(w), i, j));
            }
        }
    }
    cand.sort_unstable();
    let mut parent: Vec<usize> = (0..r).collect();
    fn find(parent: &mut [usize], mut x: usize) -> usize {
        while parent[x] != x {
            parent[x] = parent[parent[x]];
            x = parent[x];
        }
        x
    }
    let mut edges = Vec::with_capacity(r.saturating_sub(1));
    for (_, i, j) in cand {
        let (ri, rj) = (find(&mut parent, i), find(&mut parent, j));
        if ri != rj {
            parent[ri] = rj;
            edges.push((i, j));
        }
    }
    edges.sort_unstable();
    let tree = CliqueTree { cliques, edges };
    assert!(
        tree.has_running_intersection(),
        "maximum-weight spanning tree over cliques must be a clique tree"
    );
    Ok(tree)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn fix_b() -> UndirectedGraph {
        UndirectedGraph::from_edges(4, &[(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)]).unwrap()
    }

    fn cycle(n: usize) -> UndirectedGraph {
        let edges: Vec<_> = (0..n).map(|i| (i, (i + 1) % n)).collect();
        UndirectedGraph::from_edges(n, &edges).unwrap()
    }

    // Definition-level check: later neighbours of each node are pairwise adjacent.
    fn peo_by_definition(g: &UndirectedGraph, order: &[NodeId]) -> bool {
        let pos: Vec<usize> = {
            let mut pos = vec![0; g.p()];
            for (i, &v) in order.iter().enumerate() {
                pos[v] = i;
            }
            pos
        };
        order.iter().all(|&v| {
            let later: NodeSet = g.neighbors(v).iter().copied().filter(|&w| pos[w] > pos[v]).collect();
            g.is_clique(&later)
        })
    }

    #[test]
    fn four_cycle_is_not_chordal() {
        assert!(chordality_peo(&cycle(4)).is_none());
        assert_eq!(maximal_cliques(&cycle(4)), Err(Error::NotChordal));
    }

    #[test]
    fn fix_b_peo_is_valid() {
        let g = fix_b();
        let peo = chordality_peo(&g).unwrap();
        assert!(peo_by_definition(&g, &peo));
    }

    #[test]
    fn cliques_of_small_graphs() {
        assert_eq!(maximal_cliques(&UndirectedGraph::complete(4)).unwrap(), vec![NodeSet::from([0, 1, 2, 3])]);
        assert_eq!(
            maximal_cliques(&UndirectedGraph::path(3)).unwrap(),
            vec![NodeSet::from([0, 1]), NodeSet::from([1, 2])]
        );
        assert_eq!(
            maximal_cliques(&fix_b()).unwrap(),
            vec![NodeSet::from([0, 1, 2]), NodeSet::from([1, 2, 3])]
        );
        let single = UndirectedGraph::empty(1);
        assert_eq!(maximal_cliques(&single).unwrap(), vec![NodeSet::from([0])]);
    }

    #[test]
    fn path_clique_tree_is_a_path() {
        let t = build_clique_tree(&UndirectedGraph::path(6)).unwrap();
        assert_eq!(t.len(), 5);
        assert_eq!(t.edges, vec![(0, 1), (1, 2), (2, 3), (3, 4)]);
        assert!(t.pairwise_intersection_holds());
    }

    #[test]
    fn disconnected_graph_rejected() {
        let g = UndirectedGraph::from_edges(4, &[(0, 1), (2, 3)]).unwrap();
        assert_eq!(build_clique_tree(&g), Err(Error::Disconnected));
    }

    #[test]
    fn prefix_mcs_starts_with_prefix() {
        let g = fix_b();
        let order = mcs_with_prefix(&g, &[3, 1]);
        assert_eq!(&order[..2], &[3, 1]);
        let mut peo = order.clone();
        peo.reverse();
        assert!(peo_by_definition(&g, &peo));
    }
}
