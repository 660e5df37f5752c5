use super::chordal::mcs_with_prefix;
use super::{chordality_peo, Dag, NodeId, NodeSet, UndirectedGraph};
use crate::error::{Error, Result};

pub const DEFAULT_AMO_CAP: usize = 10;

/// Orients every edge from the endpoint earlier in `order` to the later one.
pub fn orient_by_order(g: &UndirectedGraph, order: &[NodeId]) -> Dag {
    let mut pos = vec![0usize; g.p()];
    for (i, &v) in order.iter().enumerate() {
        pos[v] = i;
    }
    let edges: Vec<_> = g
        .edges()
        .into_iter()
        .map(|(a, b)| if pos[a] < pos[b] { (a, b) } else { (b, a) })
        .collect();
    Dag::from_edges(g.p(), &edges).expect("orientation by a total order is acyclic")
}

/// Every acyclic orientation of `g` without v-structures.
///
/// Each orientation is produced once, from its lexicographically smallest
/// topological order. Errors if `g` is not chordal or has more than `cap`
/// nodes.
pub fn enumerate_amos(g: &UndirectedGraph, cap: usize) -> Result<Vec<Dag>> {
    if g.p() > cap {
        return Err(Error::CapExceeded {
            what: "orientation enumeration",
            limit: cap,
            got: g.p(),
        });
    }
    if chordality_peo(g).is_none() {
        return Err(Error::NotChordal);
    }
    let mut st = AmoSearch {
        g,
        order: Vec::with_capacity(g.p()),
        placed: vec![false; g.p()],
        // pending[u]: u still needs a neighbour placed at or after the step
        // where it was passed over by a larger node
        pending: vec![false; g.p()],
        out: Vec::new(),
    };
    st.dfs();
    Ok(st.out)
}

struct AmoSearch<'a> {
    g: &'a UndirectedGraph,
    order: Vec<NodeId>,
    placed: Vec<bool>,
    pending: Vec<bool>,
    out: Vec<Dag>,
}

impl AmoSearch<'_> {
    fn dfs(&mut self) {
        let p = self.g.p();
        if self.order.len() == p {
            self.out.push(orient_by_order(self.g, &self.order));
            return;
        }
        for v in 0..p {
            if self.placed[v] || self.pending[v] {
                continue;
            }
            let earlier: NodeSet = self
                .g
                .neighbors(v)
                .iter()
                .copied()
                .filter(|&w| self.placed[w])
                .collect();
            if !self.g.is_clique(&earlier) {
                continue;
            }
            let saved = self.pending.clone();
            for u in 0..p {
                if self.placed[u] || u == v {
                    continue;
                }
                if self.g.has_edge(u, v) {
                    self.pending[u] = false;
                } else if u < v {
                    self.pending[u] = true;
                }
            }
            self.placed[v] = true;
            self.order.push(v);
            self.dfs();
            self.order.pop();
            self.placed[v] = false;
            self.pending = saved;
        }
    }
}

/// An orientation without v-structures whose topological order starts with
/// `perm`, an ordering of the maximal clique `clique`.
pub fn adversarial_orientation(g: &UndirectedGraph, clique: &NodeSet, perm: &[NodeId]) -> Result<Dag> {
    if chordality_peo(g).is_none() {
        return Err(Error::NotChordal);
    }
    if clique.is_empty() || !clique.iter().all(|&v| v < g.p()) || !g.is_clique(clique) {
        return Err(Error::NotMaximalClique);
    }
    let extendable = (0..g.p())
        .filter(|v| !clique.contains(v))
        .any(|v| clique.iter().all(|&c| g.has_edge(v, c)));
    if extendable {
        return Err(Error::NotMaximalClique);
    }
    let as_set: NodeSet = perm.iter().copied().collect();
    if perm.len() != clique.len() || &as_set != clique {
        return Err(Error::InvalidPermutation);
    }
    let order = mcs_with_prefix(g, perm);
    Ok(orient_by_order(g, &order))
}
