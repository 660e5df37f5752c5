use super::active::{commit, guard};
use super::env::Environment;
use super::trace::{Purpose, Step, Trace};
use super::{PolicyKind, EXPLORE_SHIFT};
use crate::equivalence::unmatched_set;
use crate::graph::{chain_components, maximal_cliques, mcs_order, Dag, NodeSet, UndirectedGraph};
use crate::scm::ProblemInstance;
use crate::EPS;

/// Greedy colouring in maximum cardinality search order; optimal on chordal
/// graphs. Colours are `0..k`.
pub fn greedy_coloring(g: &UndirectedGraph) -> Vec<usize> {
    let mut color = vec![usize::MAX; g.p()];
    for v in mcs_order(g) {
        let used: NodeSet = g
            .neighbors(v)
            .iter()
            .filter(|&&w| color[w] != usize::MAX)
            .map(|&w| color[w])
            .collect();
        color[v] = (0..).find(|c| !used.contains(c)).expect("a free colour exists");
    }
    color
}

/// Commit rounds on the sources of the unmatched subgraph of a known DAG.
fn upstream_search(env: &mut Environment, dag: &Dag, trace: &mut Trace) {
    loop {
        let t = unmatched_set(env.baseline_mean(), env.q_mean(), EPS);
        if t.is_empty() {
            break;
        }
        let sources: NodeSet = t
            .iter()
            .copied()
            .filter(|&i| dag.parents(i).iter().all(|k| !t.contains(k)))
            .collect();
        commit(env, trace, &sources);
    }
    trace.final_matching = env.partial_matching().clone();
}

/// Upstream search with the true graph in hand.
pub fn oracle_baseline(instance: &ProblemInstance) -> Trace {
    let mut env = Environment::new(instance.clone());
    let mut trace = Trace::new(PolicyKind::Oracle, 0);
    upstream_search(&mut env, instance.scm.dag(), &mut trace);
    trace
}

/// Learns the whole graph first, then searches upstream. Each chain
/// component is coloured and every colour class but the last is intervened
/// on, split into blocks of at most `s` consecutive node ids.
pub fn coloring_baseline(instance: &ProblemInstance, s: usize) -> Trace {
    assert!(s >= 1, "sparsity must be at least 1");
    let mut env = Environment::new(instance.clone());
    let mut trace = Trace::new(PolicyKind::Coloring, s);
    while !env.essential().is_fully_directed() {
        let comps: Vec<_> = chain_components(env.essential())
            .into_iter()
            .filter(|c| c.nodes.len() > 1)
            .collect();
        for comp in comps {
            let (local, map) = env.essential().undirected_induced(&comp.nodes);
            let cliques = maximal_cliques(&local).expect("chain components are chordal");
            let r_c = cliques.len();
            let m_c = cliques.iter().map(|c| c.len()).max().unwrap_or(0);
            let color = greedy_coloring(&local);
            let k = color.iter().max().map_or(0, |c| c + 1);
            for c in 0..k.saturating_sub(1) {
                let class: Vec<usize> = (0..local.p()).filter(|&x| color[x] == c).map(|x| map[x]).collect();
                for block in class.chunks(s) {
                    let targets: NodeSet = block.iter().copied().collect();
                    env.perform_explore(&targets, EXPLORE_SHIFT);
                    let mut shifts = env.partial_matching().clone();
                    for &v in &targets {
                        shifts.add(v, EXPLORE_SHIFT);
                    }
                    trace.push(Step {
                        step: 0,
                        purpose: Purpose::Explore,
                        targets,
                        shifts,
                        component_size: Some(local.p()),
                        r_c: Some(r_c),
                        m_c: Some(m_c),
                        episode: None,
                        path_mode: None,
                    });
                    guard(&env, &trace);
                }
            }
        }
    }
    let dag = env.essential().to_dag().expect("fully directed essential graph is a DAG");
    upstream_search(&mut env, &dag, &mut trace);
    trace
}
