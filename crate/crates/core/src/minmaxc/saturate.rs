use std::collections::HashMap;

use super::paths::{dag_path_counts, simple_path_counts_budgeted, PathCounts, PathMode};
use super::{Method, SeparatorChoice, DEFAULT_PATH_BUDGET, DEFAULT_PATH_CAP};
use crate::graph::{NodeId, NodeSet, UndirectedGraph};

const SEARCH_TOL: f64 = 1e-9;
const SEARCH_ITERS: usize = 60;
// strict-improvement margin so that ties go to the lowest node id
const TIE_MARGIN: f64 = 1e-12;

/// `f^_i(A) = sum_j m_ij(V - A) / m_ij(V)` from precomputed counts.
pub fn surrogate_value(full: &PathCounts, reduced: &PathCounts, i: NodeId) -> f64 {
    full.universe
        .iter()
        .map(|&j| {
            let m = full.get(i, j);
            if m == 0.0 {
                0.0
            } else {
                reduced.get(i, j) / m
            }
        })
        .sum()
}

/// Surrogate vector over all nodes of `g` in the given mode.
pub fn surrogate_vector(g: &UndirectedGraph, a: &NodeSet, mode: PathMode) -> Vec<f64> {
    Surrogate::with_mode(g, mode).values(a)
}

/// Cached evaluator of the surrogate objective on one component.
pub struct Surrogate<'a> {
    g: &'a UndirectedGraph,
    mode: PathMode,
    full: PathCounts,
    cache: HashMap<Vec<NodeId>, Vec<f64>>,
}

impl<'a> Surrogate<'a> {
    /// Exhaustive counting when the component is small and its path count
    /// fits the budget, otherwise directed counting. The mode is fixed here
    /// for every later evaluation.
    pub fn new(g: &'a UndirectedGraph) -> Self {
        let all: NodeSet = (0..g.p()).collect();
        if g.p() <= DEFAULT_PATH_CAP {
            if let Some(full) = simple_path_counts_budgeted(g, &all, DEFAULT_PATH_BUDGET) {
                return Self::from_counts(g, full);
            }
        }
        Self::from_counts(g, dag_path_counts(g, &all))
    }

    pub fn with_mode(g: &'a UndirectedGraph, mode: PathMode) -> Self {
        let all: NodeSet = (0..g.p()).collect();
        let full = match mode {
            PathMode::Dfs => simple_path_counts_budgeted(g, &all, u64::MAX).expect("unbounded budget"),
            PathMode::Dag => dag_path_counts(g, &all),
        };
        Self::from_counts(g, full)
    }

    fn from_counts(g: &'a UndirectedGraph, full: PathCounts) -> Self {
        Surrogate {
            g,
            mode: full.mode,
            full,
            cache: HashMap::new(),
        }
    }

    pub fn mode(&self) -> PathMode {
        self.mode
    }

    /// `f^_i(A)` for every node `i`.
    pub fn values(&mut self, a: &NodeSet) -> Vec<f64> {
        let key: Vec<NodeId> = a.iter().copied().collect();
        if let Some(v) = self.cache.get(&key) {
            return v.clone();
        }
        let rest: NodeSet = (0..self.g.p()).filter(|v| !a.contains(v)).collect();
        let reduced = match self.mode {
            PathMode::Dfs => simple_path_counts_budgeted(self.g, &rest, u64::MAX).expect("unbounded budget"),
            PathMode::Dag => dag_path_counts(self.g, &rest),
        };
        let out: Vec<f64> = (0..self.g.p()).map(|i| surrogate_value(&self.full, &reduced, i)).collect();
        self.cache.insert(key, out.clone());
        out
    }

    pub fn max_value(&mut self, a: &NodeSet) -> f64 {
        self.values(a).into_iter().fold(0.0, f64::max)
    }
}

/// Greedy cover of `sum_i min(F_i(A), tau_i)` with `F_i(A) = f^_i(0) - f^_i(A)`.
/// Returns the set and whether the full cover `sum_i tau_i` was reached.
fn greedy_cover(sur: &mut Surrogate, base: &[f64], c: f64, s: usize) -> (NodeSet, bool) {
    let tau: Vec<f64> = base.iter().map(|&b| (b - c).max(0.0)).collect();
    let goal: f64 = tau.iter().sum();
    let cover = |vals: &[f64]| -> f64 {
        vals.iter()
            .zip(base)
            .zip(&tau)
            .map(|((&v, &b), &t)| (b - v).min(t))
            .sum()
    };
    let mut a = NodeSet::new();
    let mut current = 0.0;
    while current < goal - SEARCH_TOL && a.len() < s {
        let mut best: Option<(NodeId, f64)> = None;
        for x in 0..sur.g.p() {
            if a.contains(&x) {
                continue;
            }
            let mut cand = a.clone();
            cand.insert(x);
            let cov = cover(&sur.values(&cand));
            if best.is_none_or(|(_, b)| cov > b + TIE_MARGIN) {
                best = Some((x, cov));
            }
        }
        match best {
            Some((x, cov)) if cov > current + TIE_MARGIN => {
                a.insert(x);
                current = cov;
            }
            _ => break,
        }
    }
    (a, current >= goal - SEARCH_TOL)
}

/// Robust minimisation of `max_i f^_i(A)` subject to `|A| <= s`, by
/// bisection on the level `c` with a greedy feasibility test. Levels that the
/// greedy can only reach with more than `s` nodes count as infeasible.
pub fn saturate(g: &UndirectedGraph, s: usize) -> SeparatorChoice {
    assert!(s >= 1, "sparsity must be at least 1");
    let m = g.p();
    let mut sur = Surrogate::new(g);
    let mode = sur.mode();
    if m <= s {
        return SeparatorChoice {
            nodes: (0..m).collect(),
            objective: 0.0,
            method: Method::Saturate,
            path_mode: Some(mode),
        };
    }
    let base = sur.values(&NodeSet::new());
    let mut lo = 0.0;
    let mut hi = base.iter().copied().fold(0.0, f64::max);
    let mut best = NodeSet::new();
    for _ in 0..SEARCH_ITERS {
        if hi - lo <= SEARCH_TOL {
            break;
        }
        let mid = 0.5 * (lo + hi);
        let (a, ok) = greedy_cover(&mut sur, &base, mid, s);
        if ok {
            hi = mid;
            best = a;
        } else {
            lo = mid;
        }
    }
    if best.is_empty() {
        // every level was met by the empty set; take the best single node
        let mut pick = (0, f64::INFINITY);
        for x in 0..m {
            let v = sur.max_value(&NodeSet::from([x]));
            if v < pick.1 - TIE_MARGIN {
                pick = (x, v);
            }
        }
        best.insert(pick.0);
    }
    let objective = sur.max_value(&best);
    SeparatorChoice {
        nodes: best,
        objective,
        method: Method::Saturate,
        path_mode: Some(mode),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::minmaxc::{brute_force_minmaxc, exact_objective};

    #[test]
    fn triangle_surrogate() {
        let g = UndirectedGraph::complete(3);
        let v = surrogate_vector(&g, &NodeSet::from([1]), PathMode::Dfs);
        assert!((v[0] - 1.5).abs() < 1e-12);
        assert!(v[0] <= exact_objective(&g, &NodeSet::from([1])).per_node[0] as f64);
        assert_eq!(v[1], 0.0);
    }

    #[test]
    fn path_of_five_picks_middle() {
        let g = UndirectedGraph::path(5);
        let c = saturate(&g, 1);
        assert_eq!(c.nodes, NodeSet::from([2]));
        assert_eq!(c.nodes, brute_force_minmaxc(&g, 1).unwrap().nodes);
        assert_eq!(c.path_mode, Some(PathMode::Dfs));
    }

    #[test]
    fn small_component_taken_whole() {
        let g = UndirectedGraph::complete(3);
        assert_eq!(saturate(&g, 3).nodes, NodeSet::from([0, 1, 2]));
    }

    #[test]
    fn cardinality_respected_on_dense_graphs() {
        let g = UndirectedGraph::complete(12);
        let c = saturate(&g, 2);
        assert!(!c.nodes.is_empty() && c.nodes.len() <= 2);
        assert_eq!(c.path_mode, Some(PathMode::Dag));
    }
}
