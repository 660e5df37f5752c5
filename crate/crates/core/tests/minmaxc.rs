use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use shiftmatch::graph::{io, maximal_cliques, NodeSet, UndirectedGraph};
use shiftmatch::minmaxc::{brute_force_minmaxc, clique_tree_policy, exact_objective, saturate};

fn fixture() -> UndirectedGraph {
    let text = include_str!("golden/separator_divergence.txt");
    match io::parse(text).unwrap() {
        io::GraphFile::Undirected(g) => g,
        other => panic!("fixture parsed as {other:?}"),
    }
}

#[test]
fn saturate_leaves_the_clique_tree_behind() {
    let g = fixture();
    let cliques = maximal_cliques(&g).unwrap();
    let inside = |a: &NodeSet| cliques.iter().any(|c| a.is_subset(c));
    let best = brute_force_minmaxc(&g, 2).unwrap();
    assert!(!inside(&best.nodes), "optimal separator {:?} sits in one clique", best.nodes);

    let sat = saturate(&g, 2);
    assert_eq!(sat.nodes.len(), 2);
    assert!(!inside(&sat.nodes));
    assert_eq!(exact_objective(&g, &sat.nodes).max as f64, best.objective);

    for seed in 0..20 {
        let ct = clique_tree_policy(&g, 2, &mut ChaCha8Rng::seed_from_u64(seed)).unwrap();
        assert!(inside(&ct.nodes));
        assert!(ct.objective >= best.objective);
    }
}

#[test]
fn fixture_is_a_branching_tree_of_cliques() {
    let g = fixture();
    let tree = shiftmatch::graph::build_clique_tree(&g).unwrap();
    assert_eq!(tree.len(), 5);
    // removing an inner clique separates at least two subtrees
    let inner = (0..tree.len()).find(|&c| tree.neighbors(c).len() >= 2).unwrap();
    assert!(tree.subtree_sizes_without(inner).len() >= 2);
    let c = &tree.cliques[inner];
    let comps = g.components_without(c);
    assert!(comps.len() >= 2);
}
