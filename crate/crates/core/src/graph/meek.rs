use std::collections::{BTreeSet, VecDeque};

use serde::{Deserialize, Serialize};

use super::{Dag, NodeId, NodeSet, Pdag, UndirectedGraph, VStructure};
use crate::error::{Error, Result};

/// Skeleton plus the set of unshielded colliders `i -> j <- k`, `i < k`.
pub fn skeleton_and_vstructures(dag: &Dag) -> (UndirectedGraph, BTreeSet<VStructure>) {
    let skel = dag.skeleton();
    let mut vs = BTreeSet::new();
    for j in 0..dag.p() {
        let pa = dag.parents(j);
        for (x, &i) in pa.iter().enumerate() {
            for &k in &pa[x + 1..] {
                if !skel.has_edge(i, k) {
                    vs.insert((i, j, k));
                }
            }
        }
    }
    (skel, vs)
}

/// Whether `a -> b` is forced, given `a - b` is currently undirected.
fn forced(g: &Pdag, a: NodeId, b: NodeId) -> bool {
    // R1: c -> a, c not adjacent to b
    if g.parents(a).iter().any(|&c| c != b && !g.adjacent(c, b)) {
        return true;
    }
    // R2: a -> c -> b
    if g.children(a).iter().any(|c| g.parents(b).contains(c)) {
        return true;
    }
    // R3: a - c -> b and a - d -> b with c, d not adjacent
    let mids: Vec<NodeId> = g
        .neighbors(a)
        .iter()
        .copied()
        .filter(|c| g.parents(b).contains(c))
        .collect();
    for (x, &c) in mids.iter().enumerate() {
        for &d in &mids[x + 1..] {
            if !g.adjacent(c, d) {
                return true;
            }
        }
    }
    // R4: a - c -> d -> b, a adjacent to d, c not adjacent to b
    for &d in g.parents(b) {
        if !g.adjacent(a, d) {
            continue;
        }
        if g
            .parents(d)
            .iter()
            .any(|&c| c != b && g.has_undirected(a, c) && !g.adjacent(c, b))
        {
            return true;
        }
    }
    false
}

/// Applies the four Meek rules until nothing changes.
pub fn meek_closure(g: &Pdag) -> Result<Pdag> {
    if !g.directed_part_acyclic() {
        return Err(Error::Cycle);
    }
    let mut out = g.clone();
    meek_in_place(&mut out);
    Ok(out)
}

/// Worklist form. A new `a -> b` can only complete a rule premise for an
/// undirected edge at `a` or `b`, or (as the middle of R4) for an edge
/// between a neighbour of `a` and a child of `b`.
pub(crate) fn meek_in_place(g: &mut Pdag) {
    let mut queue: VecDeque<(NodeId, NodeId)> = g.undirected_edges().into_iter().collect();
    let mut queued: BTreeSet<(NodeId, NodeId)> = queue.iter().copied().collect();
    while let Some((x, y)) = queue.pop_front() {
        queued.remove(&(x, y));
        if !g.has_undirected(x, y) {
            continue;
        }
        let orient = if forced(g, x, y) {
            Some((x, y))
        } else if forced(g, y, x) {
            Some((y, x))
        } else {
            None
        };
        let Some((a, b)) = orient else { continue };
        g.orient(a, b).expect("edge was undirected");
        let mut push = |u: NodeId, w: NodeId| {
            let e = (u.min(w), u.max(w));
            if queued.insert(e) {
                queue.push_back(e);
            }
        };
        for v in [a, b] {
            for &w in g.neighbors(v) {
                push(v, w);
            }
        }
        for &y in g.children(b) {
            for &x in g.neighbors(y) {
                if g.neighbors(a).contains(&x) {
                    push(x, y);
                }
            }
        }
    }
}

/// A connected component of the undirected part of a chain graph.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ChainComponent {
    pub nodes: NodeSet,
    /// Some directed edge enters the component from outside.
    pub has_incoming: bool,
}

pub fn chain_components(g: &Pdag) -> Vec<ChainComponent> {
    let all: NodeSet = (0..g.p()).collect();
    chain_components_within(g, &all)
}

/// Chain components of `g` restricted to `within`; only directed edges whose
/// tail lies in `within` count as incoming. Listed by smallest member.
pub fn chain_components_within(g: &Pdag, within: &NodeSet) -> Vec<ChainComponent> {
    let mut seen = NodeSet::new();
    let mut out = Vec::new();
    for &s in within {
        if !seen.insert(s) {
            continue;
        }
        let mut nodes = NodeSet::from([s]);
        let mut stack = vec![s];
        while let Some(v) = stack.pop() {
            for &w in g.neighbors(v) {
                if within.contains(&w) && seen.insert(w) {
                    nodes.insert(w);
                    stack.push(w);
                }
            }
        }
        let has_incoming = nodes
            .iter()
            .any(|&v| g.parents(v).iter().any(|u| within.contains(u) && !nodes.contains(u)));
        out.push(ChainComponent { nodes, has_incoming });
    }
    out
}
