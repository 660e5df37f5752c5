use rand::seq::SliceRandom;
use rand::Rng;

use super::{exact_objective, Method, SeparatorChoice};
use crate::error::Result;
use crate::graph::{build_clique_tree, maximal_cliques, CliqueTree, NodeSet, UndirectedGraph};

/// Index of the first clique (in the tree's order) whose removal leaves only
/// subtrees of at most `ceil((r - 1) / 2)` cliques.
pub fn central_clique(tree: &CliqueTree) -> usize {
    let r = tree.len();
    let limit = (r - 1).div_ceil(2);
    (0..r)
        .find(|&c| tree.subtree_sizes_without(c).iter().all(|&n| n <= limit))
        .expect("every tree has a centroid")
}

/// A node `k` of clique `c` such that `k` together with the subtrees (of the
/// tree minus `c`) that touch the clique only at `k`, plus the largest other
/// subtree adjacent to `k`, spans at most `ceil((r - 1) / 2)` maximal cliques.
/// Leaving `k` out of the exploration keeps the halving guarantee.
pub fn spared_node(g: &UndirectedGraph, tree: &CliqueTree, c: usize) -> Result<usize> {
    let k_set = &tree.cliques[c];
    let limit = (tree.len() - 1).div_ceil(2);
    let mut adj = vec![Vec::new(); tree.len()];
    for &(a, b) in &tree.edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    // graph nodes of each subtree left after deleting clique `c`
    let mut seen = vec![false; tree.len()];
    seen[c] = true;
    let mut parts: Vec<(NodeSet, usize)> = Vec::new();
    for &start in &adj[c] {
        let mut nodes = NodeSet::new();
        let mut count = 0;
        let mut stack = vec![start];
        seen[start] = true;
        while let Some(x) = stack.pop() {
            count += 1;
            nodes.extend(tree.cliques[x].difference(k_set));
            for &y in &adj[x] {
                if !seen[y] {
                    seen[y] = true;
                    stack.push(y);
                }
            }
        }
        parts.push((nodes, count));
    }
    let touches = |part: &NodeSet, k: usize| part.iter().any(|&v| g.has_edge(v, k));
    let mut best: Option<(usize, usize)> = None;
    for &k in k_set {
        let mut nodes = NodeSet::from([k]);
        let mut other: Option<&(NodeSet, usize)> = None;
        for part in &parts {
            let only_k = k_set.iter().all(|&j| j == k || !touches(&part.0, j));
            if only_k {
                nodes.extend(&part.0);
            } else if touches(&part.0, k) && other.map_or(true, |o| part.1 > o.1) {
                other = Some(part);
            }
        }
        if let Some(o) = other {
            nodes.extend(&o.0);
        }
        let (local, _) = g.induced(&nodes);
        let count = if nodes.len() == 1 { 0 } else { maximal_cliques(&local)?.len() };
        if count <= limit {
            return Ok(k);
        }
        if best.map_or(true, |b| count < b.1) {
            best = Some((k, count));
        }
    }
    Ok(best.expect("cliques are nonempty").0)
}

/// The explorations for one halving step: the whole component when it has
/// at most `s` nodes, the central clique when it fits, and otherwise the
/// central clique minus its spared node, shuffled and cut into disjoint
/// chunks of at most `s` nodes.
pub fn clique_tree_plan<R: Rng>(g: &UndirectedGraph, s: usize, rng: &mut R) -> Result<Vec<NodeSet>> {
    assert!(s >= 1, "sparsity must be at least 1");
    if g.p() <= s {
        return Ok(vec![(0..g.p()).collect()]);
    }
    let tree = build_clique_tree(g)?;
    let k = central_clique(&tree);
    let limit = (tree.len() - 1).div_ceil(2);
    assert!(
        tree.subtree_sizes_without(k).iter().all(|&n| n <= limit),
        "central clique must split the tree evenly"
    );
    let clique = &tree.cliques[k];
    if clique.len() <= s {
        return Ok(vec![clique.clone()]);
    }
    let spared = spared_node(g, &tree, k)?;
    let mut rest: Vec<usize> = clique.iter().copied().filter(|&v| v != spared).collect();
    rest.shuffle(rng);
    Ok(rest.chunks(s).map(|c| c.iter().copied().collect()).collect())
}

/// First exploration of [`clique_tree_plan`]: a random `s`-subset of the
/// central clique that avoids its spared node.
pub fn clique_tree_policy<R: Rng>(g: &UndirectedGraph, s: usize, rng: &mut R) -> Result<SeparatorChoice> {
    let nodes = clique_tree_plan(g, s, rng)?.swap_remove(0);
    Ok(SeparatorChoice {
        objective: exact_objective(g, &nodes).max as f64,
        nodes,
        method: Method::CliqueTree,
        path_mode: None,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn chain_of_cliques(r: usize) -> UndirectedGraph {
        // r copies of K4, consecutive ones sharing a node
        let p = 3 * r + 1;
        let mut edges = Vec::new();
        for c in 0..r {
            let base = 3 * c;
            for a in base..base + 4 {
                for b in (a + 1)..base + 4 {
                    edges.push((a, b));
                }
            }
        }
        UndirectedGraph::from_edges(p, &edges).unwrap()
    }

    #[test]
    fn two_cliques_either_is_central() {
        let g = chain_of_cliques(2);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        let c = clique_tree_policy(&g, 4, &mut rng).unwrap();
        assert!(c.nodes == NodeSet::from([0, 1, 2, 3]) || c.nodes == NodeSet::from([3, 4, 5, 6]));
    }

    #[test]
    fn whole_clique_when_small() {
        let g = UndirectedGraph::complete(4);
        let mut rng = ChaCha8Rng::seed_from_u64(0);
        assert_eq!(clique_tree_policy(&g, 4, &mut rng).unwrap().nodes, NodeSet::from([0, 1, 2, 3]));
    }

    #[test]
    fn star_center_is_chosen() {
        let g = UndirectedGraph::from_edges(5, &[(0, 1), (0, 2), (0, 3), (0, 4)]).unwrap();
        let tree = build_clique_tree(&g).unwrap();
        assert_eq!(tree.len(), 4);
        // every maximal clique holds the centre and the leaf is the spared node
        for seed in 0..20 {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            assert_eq!(clique_tree_policy(&g, 1, &mut rng).unwrap().nodes, NodeSet::from([0]));
        }
    }

    #[test]
    fn path_of_four_spares_an_inner_end() {
        let g = UndirectedGraph::path(4);
        let tree = build_clique_tree(&g).unwrap();
        let c = central_clique(&tree);
        assert_eq!(tree.cliques[c], NodeSet::from([1, 2]));
        // either end of the middle edge leaves one clique on its side
        let k = spared_node(&g, &tree, c).unwrap();
        assert!(k == 1 || k == 2);
    }

    #[test]
    fn plan_covers_all_but_one_clique_node() {
        let g = chain_of_cliques(3);
        let mut rng = ChaCha8Rng::seed_from_u64(4);
        let plan = clique_tree_plan(&g, 1, &mut rng).unwrap();
        assert_eq!(plan.len(), 3);
        let covered: NodeSet = plan.iter().flatten().copied().collect();
        assert_eq!(covered.len(), 3);
        assert!(covered.is_subset(&NodeSet::from([3, 4, 5, 6])));
        assert!(plan.iter().all(|a| a.len() == 1));
        let plan = clique_tree_plan(&g, 2, &mut rng).unwrap();
        assert_eq!(plan.iter().map(|a| a.len()).collect::<Vec<_>>(), vec![2, 1]);
    }

    #[test]
    fn central_clique_of_long_chain() {
        let g = chain_of_cliques(5);
        let tree = build_clique_tree(&g).unwrap();
        let k = central_clique(&tree);
        assert_eq!(tree.cliques[k], NodeSet::from([6, 7, 8, 9]));
    }
}
