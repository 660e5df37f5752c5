use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{mcs_order, orient_by_order, NodeSet, UndirectedGraph};

/// Largest component handled by exhaustive path enumeration.
pub const DEFAULT_PATH_CAP: usize = 25;
/// Path extensions allowed when counting over the whole component before
/// falling back to directed counting.
pub const DEFAULT_PATH_BUDGET: u64 = 200_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PathMode {
    /// Simple undirected paths, by depth-first enumeration.
    Dfs,
    /// Directed paths in one fixed acyclic orientation without v-structures.
    Dag,
}

/// Pairwise path counts restricted to `universe`.
#[derive(Debug, Clone, PartialEq)]
pub struct PathCounts {
    pub universe: NodeSet,
    pub mode: PathMode,
    counts: Vec<Vec<f64>>,
}

impl PathCounts {
    /// `m_ij`; 1 on the diagonal inside the universe, 0 for absent endpoints.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        if !self.universe.contains(&i) || !self.universe.contains(&j) {
            return 0.0;
        }
        if i == j {
            1.0
        } else {
            self.counts[i][j]
        }
    }
}

/// Exact simple-path counts in the subgraph induced by `universe`.
pub fn simple_path_counts(g: &UndirectedGraph, universe: &NodeSet) -> Result<PathCounts> {
    if universe.len() > DEFAULT_PATH_CAP {
        return Err(Error::CapExceeded {
            what: "simple path counting",
            limit: DEFAULT_PATH_CAP,
            got: universe.len(),
        });
    }
    Ok(simple_path_counts_budgeted(g, universe, u64::MAX).expect("unbounded budget"))
}

/// As [`simple_path_counts`], but gives up with `None` after `budget` path
/// extensions. The node cap is the caller's concern here.
pub fn simple_path_counts_budgeted(g: &UndirectedGraph, universe: &NodeSet, budget: u64) -> Option<PathCounts> {
    let p = g.p();
    let nodes: Vec<usize> = universe.iter().copied().filter(|&v| v < p).collect();
    if nodes.len() > 64 {
        return None;
    }
    let mut local = vec![usize::MAX; p];
    for (x, &v) in nodes.iter().enumerate() {
        local[v] = x;
    }
    let adj: Vec<u64> = nodes
        .iter()
        .map(|&v| {
            g.neighbors(v)
                .iter()
                .filter(|&&w| local[w] != usize::MAX)
                .fold(0u64, |m, &w| m | 1 << local[w])
        })
        .collect();
    let n = nodes.len();
    let mut counts = vec![vec![0.0; p]; p];
    let mut work = 0u64;
    let mut row = vec![0u64; n];
    for s in 0..n {
        row.iter_mut().for_each(|c| *c = 0);
        if !extend(&adj, s, 1 << s, &mut row, &mut work, budget) {
            return None;
        }
        for t in 0..n {
            counts[nodes[s]][nodes[t]] = row[t] as f64;
        }
    }
    Some(PathCounts {
        universe: universe.clone(),
        mode: PathMode::Dfs,
        counts,
    })
}

fn extend(adj: &[u64], v: usize, visited: u64, row: &mut [u64], work: &mut u64, budget: u64) -> bool {
    let mut next = adj[v] & !visited;
    while next != 0 {
        let w = next.trailing_zeros() as usize;
        next &= next - 1;
        *work += 1;
        if *work > budget {
            return false;
        }
        row[w] += 1;
        if !extend(adj, w, visited | 1 << w, row, work, budget) {
            return false;
        }
    }
    true
}

/// Directed path counts in the orientation of `g` given by its maximum
/// cardinality search order, restricted to `universe`. `m_ij` is the count in
/// whichever direction is nonzero.
pub fn dag_path_counts(g: &UndirectedGraph, universe: &NodeSet) -> PathCounts {
    let p = g.p();
    let order = mcs_order(g);
    let dag = orient_by_order(g, &order);
    let mut counts = vec![vec![0.0; p]; p];
    // paths[s][v] = directed paths s -> ... -> v inside the universe
    for &s in universe {
        let mut paths = vec![0.0f64; p];
        paths[s] = 1.0;
        for &v in order.iter() {
            if paths[v] == 0.0 || !universe.contains(&v) {
                continue;
            }
            for &c in dag.children(v) {
                if universe.contains(&c) {
                    paths[c] += paths[v];
                }
            }
        }
        for &t in universe {
            if t != s && paths[t] > 0.0 {
                counts[s][t] = paths[t];
                counts[t][s] = paths[t];
            }
        }
    }
    PathCounts {
        universe: universe.clone(),
        mode: PathMode::Dag,
        counts,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    // Plain recursion over adjacency tests, independent of the bitmask walk.
    fn brute_count(g: &UndirectedGraph, s: usize, t: usize) -> usize {
        fn go(g: &UndirectedGraph, v: usize, t: usize, seen: &mut Vec<bool>) -> usize {
            if v == t {
                return 1;
            }
            let mut n = 0;
            for w in 0..g.p() {
                if g.has_edge(v, w) && !seen[w] {
                    seen[w] = true;
                    n += go(g, w, t, seen);
                    seen[w] = false;
                }
            }
            n
        }
        let mut seen = vec![false; g.p()];
        seen[s] = true;
        go(g, s, t, &mut seen)
    }

    #[test]
    fn small_counts() {
        let all = |n: usize| (0..n).collect::<NodeSet>();
        let tri = UndirectedGraph::complete(3);
        assert_eq!(simple_path_counts(&tri, &all(3)).unwrap().get(0, 2), 2.0);
        let path = UndirectedGraph::path(3);
        assert_eq!(simple_path_counts(&path, &all(3)).unwrap().get(0, 2), 1.0);
        let fix_b = UndirectedGraph::from_edges(4, &[(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)]).unwrap();
        let c = simple_path_counts(&fix_b, &all(4)).unwrap();
        assert_eq!(c.get(0, 3), brute_count(&fix_b, 0, 3) as f64);
        assert_eq!(c.get(0, 3), 4.0);
        for i in 0..4 {
            for j in 0..4 {
                let want = if i == j { 1.0 } else { brute_count(&fix_b, i, j) as f64 };
                assert_eq!(c.get(i, j), want);
            }
        }
    }

    #[test]
    fn universe_restricts_paths() {
        let fix_b = UndirectedGraph::from_edges(4, &[(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)]).unwrap();
        let c = simple_path_counts(&fix_b, &NodeSet::from([0, 2, 3])).unwrap();
        assert_eq!(c.get(0, 3), 1.0);
        assert_eq!(c.get(1, 3), 0.0);
        assert_eq!(c.get(1, 1), 0.0);
    }

    #[test]
    fn budget_and_cap() {
        let k8 = UndirectedGraph::complete(8);
        let all: NodeSet = (0..8).collect();
        assert!(simple_path_counts_budgeted(&k8, &all, 100).is_none());
        assert!(simple_path_counts(&UndirectedGraph::path(26), &(0..26).collect()).is_err());
    }

    #[test]
    fn directed_counts_on_a_diamond() {
        let g = UndirectedGraph::from_edges(4, &[(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)]).unwrap();
        let c = dag_path_counts(&g, &(0..4).collect());
        assert_eq!(c.mode, PathMode::Dag);
        // search order 0, 1, 2, 3: paths 0-1-3, 0-2-3, 0-1-2-3
        assert_eq!(c.get(0, 3), 3.0);
        assert_eq!(c.get(3, 0), 3.0);
        assert_eq!(c.get(1, 2), 1.0);
    }
}
