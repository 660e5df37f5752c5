use std::collections::VecDeque;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Dag, NodeId, NodeSet};

pub const ER_EDGE_PROB: f64 = 0.2;
pub const BA_ATTACH: usize = 2;

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum GraphType {
    ErdosRenyi,
    BarabasiAlbert,
    RootedTree,
    MoralizedEr,
}

impl GraphType {
    pub const ALL: [GraphType; 4] = [
        GraphType::ErdosRenyi,
        GraphType::BarabasiAlbert,
        GraphType::RootedTree,
        GraphType::MoralizedEr,
    ];

    pub fn name(self) -> &'static str {
        match self {
            GraphType::ErdosRenyi => "erdos_renyi",
            GraphType::BarabasiAlbert => "barabasi_albert",
            GraphType::RootedTree => "rooted_tree",
            GraphType::MoralizedEr => "moralized_er",
        }
    }
}

impl fmt::Display for GraphType {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for GraphType {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        GraphType::ALL
            .into_iter()
            .find(|t| t.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown graph type `{s}`")))
    }
}

pub fn gen_graph(kind: GraphType, p: usize, seed: u64) -> Result<Dag> {
    if p < 2 {
        return Err(Error::InvalidArgument(format!("graphs need p >= 2, got {p}")));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let edges = match kind {
        GraphType::ErdosRenyi => erdos_renyi(p, &mut rng),
        GraphType::BarabasiAlbert => barabasi_albert(p, &mut rng),
        GraphType::RootedTree => rooted_tree(p, &mut rng),
        GraphType::MoralizedEr => moralized_er(p, &mut rng),
    };
    Dag::from_edges(p, &edges)
}

/// Each pair joined with probability 0.2, oriented along a random order.
fn erdos_renyi(p: usize, rng: &mut ChaCha8Rng) -> Vec<(NodeId, NodeId)> {
    let mut order: Vec<NodeId> = (0..p).collect();
    order.shuffle(rng);
    let mut edges = Vec::new();
    for a in 0..p {
        for b in (a + 1)..p {
            if rng.gen_bool(ER_EDGE_PROB) {
                edges.push((order[a], order[b]));
            }
        }
    }
    edges
}

/// Preferential attachment: start from `m` isolated nodes; each new node
/// links to `m` distinct earlier nodes drawn with probability proportional to
/// degree. Edges are then oriented along a uniformly random order, as for ER.
fn barabasi_albert(p: usize, rng: &mut ChaCha8Rng) -> Vec<(NodeId, NodeId)> {
    let m = BA_ATTACH.min(p - 1);
    let mut targets: Vec<NodeId> = (0..m).collect();
    let mut repeated: Vec<NodeId> = Vec::new();
    let mut edges = Vec::new();
    for source in m..p {
        for &t in &targets {
            edges.push((t, source));
        }
        repeated.extend(targets.iter().copied());
        repeated.extend(std::iter::repeat_n(source, m));
        let mut next = NodeSet::new();
        while next.len() < m {
            next.insert(repeated[rng.gen_range(0..repeated.len())]);
        }
        targets = next.into_iter().collect();
    }
    let mut rank: Vec<usize> = (0..p).collect();
    rank.shuffle(rng);
    edges
        .into_iter()
        .map(|(a, b)| if rank[a] < rank[b] { (a, b) } else { (b, a) })
        .collect()
}

/// Uniform labelled tree from a random sequence code, oriented away from a
/// uniformly drawn root.
fn rooted_tree(p: usize, rng: &mut ChaCha8Rng) -> Vec<(NodeId, NodeId)> {
    let mut adj = vec![Vec::new(); p];
    if p == 2 {
        adj[0].push(1);
        adj[1].push(0);
    } else {
        let code: Vec<NodeId> = (0..p - 2).map(|_| rng.gen_range(0..p)).collect();
        let mut degree = vec![1usize; p];
        for &c in &code {
            degree[c] += 1;
        }
        let mut leaves: NodeSet = (0..p).filter(|&v| degree[v] == 1).collect();
        for &c in &code {
            let leaf = leaves.pop_first().expect("a leaf exists");
            adj[leaf].push(c);
            adj[c].push(leaf);
            degree[c] -= 1;
            if degree[c] == 1 {
                leaves.insert(c);
            }
        }
        let a = leaves.pop_first().expect("two leaves remain");
        let b = leaves.pop_first().expect("two leaves remain");
        adj[a].push(b);
        adj[b].push(a);
    }
    let root = rng.gen_range(0..p);
    let mut seen = vec![false; p];
    seen[root] = true;
    let mut queue = VecDeque::from([root]);
    let mut edges = Vec::new();
    while let Some(v) = queue.pop_front() {
        for &w in &adj[v] {
            if !seen[w] {
                seen[w] = true;
                edges.push((v, w));
                queue.push_back(w);
            }
        }
    }
    edges
}

/// An Erdos-Renyi DAG whose nodes are eliminated from the last in order to
/// the first, each time joining all remaining earlier neighbours. This marries
/// co-parents and adds the fill needed to make the skeleton chordal; every
/// node's parents then form a clique, so the order orientation has no
/// v-structures.
fn moralized_er(p: usize, rng: &mut ChaCha8Rng) -> Vec<(NodeId, NodeId)> {
    let mut order: Vec<NodeId> = (0..p).collect();
    order.shuffle(rng);
    // parents by position in `order`
    let mut earlier: Vec<NodeSet> = vec![NodeSet::new(); p];
    for b in 0..p {
        for a in 0..b {
            if rng.gen_bool(ER_EDGE_PROB) {
                earlier[b].insert(a);
            }
        }
    }
    for b in (0..p).rev() {
        let pa: Vec<usize> = earlier[b].iter().copied().collect();
        for (x, &hi) in pa.iter().enumerate().rev() {
            for &lo in &pa[..x] {
                earlier[hi].insert(lo);
            }
        }
    }
    let mut edges = Vec::new();
    for (b, pa) in earlier.iter().enumerate() {
        for &a in pa {
            edges.push((order[a], order[b]));
        }
    }
    edges
}
