//! What a strategy may learn from shift experiments, and brute-force oracles
//! for checking it.
//!
//! A shift experiment on targets `I` reveals the orientation of every edge
//! cut by `I` and, because the sources of `I` are the nodes whose means move
//! by exactly their shift value, the edges cut by the source set as well.

use std::collections::BTreeSet;

use serde::Serialize;

use crate::error::{Error, Result};
use crate::graph::{chain_components_within, meek::meek_in_place, skeleton_and_vstructures, Dag, NodeId, NodeSet, Pdag};
use crate::scm::{MeanVector, ShiftIntervention};

pub const BRUTE_FORCE_CAP: usize = 8;

/// Skeleton with the v-structures of `dag` oriented.
pub(crate) fn skeleton_with_vstructures(dag: &Dag) -> Pdag {
    let mut g = Pdag::undirected_skeleton(dag);
    for (i, j, k) in skeleton_and_vstructures(dag).1 {
        let _ = g.orient(i, j);
        let _ = g.orient(k, j);
    }
    g
}

/// Orients, as in `dag`, every undirected edge with exactly one endpoint in
/// `set`. Returns whether anything changed.
pub(crate) fn orient_cut(g: &mut Pdag, dag: &Dag, set: &NodeSet) -> bool {
    let mut changed = false;
    for &v in set {
        for &c in dag.children(v) {
            if !set.contains(&c) && g.has_undirected(v, c) {
                g.orient(v, c).expect("edge is undirected");
                changed = true;
            }
        }
        for &u in dag.parents(v) {
            if !set.contains(&u) && g.has_undirected(u, v) {
                g.orient(u, v).expect("edge is undirected");
                changed = true;
            }
        }
    }
    changed
}

/// The sets whose cut edges a list of shift experiments reveals: each target
/// set together with its source set in `dag`.
pub fn augmented_family(dag: &Dag, interventions: &[NodeSet]) -> Vec<NodeSet> {
    let mut out = Vec::new();
    for i in interventions {
        out.push(i.clone());
        out.push(dag.sources_of(i));
    }
    out
}

fn essential_from_family(dag: &Dag, family: &[NodeSet]) -> Pdag {
    let mut g = skeleton_with_vstructures(dag);
    for s in family {
        orient_cut(&mut g, dag, s);
    }
    meek_in_place(&mut g);
    g
}

/// Essential graph of the shift-interventional equivalence class of
/// `true_dag` under the given experiments. The observational experiment is
/// implicit.
pub fn shift_essential_graph(true_dag: &Dag, interventions: &[NodeSet]) -> Pdag {
    essential_from_family(true_dag, &augmented_family(true_dag, interventions))
}

/// Interventional essential graph without the source-set refinement.
pub fn interventional_essential_graph(true_dag: &Dag, interventions: &[NodeSet]) -> Pdag {
    essential_from_family(true_dag, interventions)
}

pub fn observational_essential_graph(dag: &Dag) -> Pdag {
    essential_from_family(dag, &[])
}

/// `T = {i : |current_i - q_i| > eps}`.
pub fn unmatched_set(current: &[f64], q: &[f64], eps: f64) -> NodeSet {
    assert_eq!(current.len(), q.len(), "mean vectors differ in length");
    (0..q.len()).filter(|&i| (current[i] - q[i]).abs() > eps).collect()
}

/// Nodes of `T` that the essential graph already shows to be sources of the
/// subgraph induced by `T`.
pub fn identified_sources(essential: &Pdag, t: &NodeSet) -> NodeSet {
    chain_components_within(essential, t)
        .into_iter()
        .filter(|c| c.nodes.len() == 1 && !c.has_incoming)
        .flat_map(|c| c.nodes)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct FaithfulnessCheck {
    pub faithful: bool,
    /// An edge `j -> i` with `j` in `T` and `i` affected but outside `T`.
    pub witness: Option<(NodeId, NodeId)>,
}

/// Whether every node outside `t` is neither a target nor downstream of one.
pub fn check_mean_faithfulness(true_dag: &Dag, t: &NodeSet, true_matching: &ShiftIntervention) -> FaithfulnessCheck {
    let targets = true_matching.targets();
    let mut affected = true_dag.descendants_of(targets.iter().copied());
    affected.extend(targets.iter().copied());
    // the topologically first affected node missing from T has a parent in T
    let first = true_dag
        .topological_order()
        .iter()
        .copied()
        .find(|v| affected.contains(v) && !t.contains(v));
    match first {
        None => FaithfulnessCheck {
            faithful: true,
            witness: None,
        },
        Some(i) => FaithfulnessCheck {
            faithful: false,
            witness: true_dag.parents(i).iter().copied().find(|j| t.contains(j)).map(|j| (j, i)),
        },
    }
}

fn cut_orientations(dag: &Dag, set: &NodeSet) -> BTreeSet<(NodeId, NodeId)> {
    dag.edges()
        .into_iter()
        .filter(|(a, b)| set.contains(a) != set.contains(b))
        .collect()
}

/// Every DAG that shift experiments on `interventions` cannot tell apart from
/// `dag`, by exhaustive search over topological orders.
pub fn brute_force_shift_mec(dag: &Dag, interventions: &[NodeSet]) -> Result<Vec<Dag>> {
    let p = dag.p();
    if p > BRUTE_FORCE_CAP {
        return Err(Error::CapExceeded {
            what: "brute-force equivalence class",
            limit: BRUTE_FORCE_CAP,
            got: p,
        });
    }
    let (skel, vs) = skeleton_and_vstructures(dag);
    let family = augmented_family(dag, interventions);
    let cuts: Vec<_> = family.iter().map(|s| cut_orientations(dag, s)).collect();
    let sources: Vec<_> = interventions.iter().map(|i| dag.sources_of(i)).collect();

    let mut seen = BTreeSet::new();
    let mut out = Vec::new();
    let mut order: Vec<NodeId> = (0..p).collect();
    permutations(&mut order, 0, &mut |ord| {
        let cand = crate::graph::orient_by_order(&skel, ord);
        if !seen.insert(cand.edges()) {
            return;
        }
        if skeleton_and_vstructures(&cand).1 != vs {
            return;
        }
        if family.iter().zip(&cuts).any(|(s, c)| &cut_orientations(&cand, s) != c) {
            return;
        }
        if interventions.iter().zip(&sources).any(|(i, s)| &cand.sources_of(i) != s) {
            return;
        }
        out.push(cand);
    });
    out.sort_by_key(Dag::edges);
    Ok(out)
}

fn permutations(v: &mut Vec<NodeId>, k: usize, f: &mut impl FnMut(&[NodeId])) {
    if k == v.len() {
        f(v);
        return;
    }
    for i in k..v.len() {
        v.swap(k, i);
        permutations(v, k + 1, f);
        v.swap(k, i);
    }
}

/// Directed edges shared by every member of a class.
pub fn shared_directed_edges(members: &[Dag]) -> BTreeSet<(NodeId, NodeId)> {
    let mut it = members.iter();
    let Some(first) = it.next() else {
        return BTreeSet::new();
    };
    let mut shared: BTreeSet<_> = first.edges().into_iter().collect();
    for d in it {
        shared.retain(|&(a, b)| d.has_edge(a, b));
    }
    shared
}

/// What a strategy knows at a point of the active loop.
#[derive(Debug, Clone, PartialEq)]
pub struct BeliefState {
    pub essential: Pdag,
    pub performed: Vec<NodeSet>,
    pub partial_matching: ShiftIntervention,
    pub baseline_mean: MeanVector,
    pub q_mean: MeanVector,
}

#[derive(Serialize)]
struct BeliefJson<'a> {
    essential: BeliefEdges,
    performed: Vec<Vec<NodeId>>,
    partial_matching: std::collections::BTreeMap<NodeId, f64>,
    baseline_mean: &'a [f64],
    q_mean: &'a [f64],
}

#[derive(Serialize)]
struct BeliefEdges {
    p: usize,
    directed: Vec<(NodeId, NodeId)>,
    undirected: Vec<(NodeId, NodeId)>,
}

impl BeliefState {
    /// JSON dump with one-based ids.
    pub fn to_json(&self) -> String {
        let one = |(a, b): (NodeId, NodeId)| (a + 1, b + 1);
        let j = BeliefJson {
            essential: BeliefEdges {
                p: self.essential.p(),
                directed: self.essential.directed_edges().into_iter().map(one).collect(),
                undirected: self.essential.undirected_edges().into_iter().map(one).collect(),
            },
            performed: self.performed.iter().map(|s| s.iter().map(|v| v + 1).collect()).collect(),
            partial_matching: self.partial_matching.iter().map(|(v, a)| (v + 1, a)).collect(),
            baseline_mean: &self.baseline_mean,
            q_mean: &self.q_mean,
        };
        serde_json::to_string(&j).expect("belief state serializes")
    }
}
