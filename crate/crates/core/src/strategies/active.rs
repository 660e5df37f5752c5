use std::collections::VecDeque;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::env::Environment;
use super::trace::{Episode, Purpose, Step, Trace};
use super::PolicyKind;
use crate::equivalence::{identified_sources, unmatched_set};
use crate::graph::{chain_components_within, maximal_cliques, NodeSet, UndirectedGraph};
use crate::minmaxc::{clique_tree_plan, clique_tree_policy, exact_objective, saturate, Method, SeparatorChoice};
use crate::scm::ProblemInstance;
use crate::EPS;

/// Shift value put on every exploration target.
pub const EXPLORE_SHIFT: f64 = 1.0;

/// Uniform random subset of `min(s, |component|)` nodes.
pub fn upstream_rand_policy<R: Rng>(component: &NodeSet, s: usize, rng: &mut R) -> NodeSet {
    let nodes: Vec<usize> = component.iter().copied().collect();
    let k = s.min(nodes.len());
    sample(rng, nodes.len(), k).into_iter().map(|x| nodes[x]).collect()
}

/// Runs one of the active policies on a chain component given as its own
/// graph.
pub fn select_targets<R: Rng>(policy: PolicyKind, component: &UndirectedGraph, s: usize, rng: &mut R) -> SeparatorChoice {
    match policy {
        PolicyKind::CliqueTree => clique_tree_policy(component, s, rng).expect("chain components are chordal and connected"),
        PolicyKind::Supermodular => saturate(component, s),
        PolicyKind::UpstreamRand => {
            let nodes = upstream_rand_policy(&(0..component.p()).collect(), s, rng);
            SeparatorChoice {
                objective: exact_objective(component, &nodes).max as f64,
                nodes,
                method: Method::Random,
                path_mode: None,
            }
        }
        other => panic!("{other} does not select exploration targets"),
    }
}

pub(crate) fn guard(env: &Environment, trace: &Trace) {
    let p = env.p();
    if env.experiments() > p * (p + 1) {
        panic!(
            "run exceeded {} experiments on {p} nodes; trace follows\n{}",
            p * (p + 1),
            trace.to_jsonl()
        );
    }
}

/// The active matching loop: explore inside an unresolved chain component
/// until some source of the unmatched set is identified, then fix the shift
/// on every identified source and perform the updated partial matching.
/// CliqueTree plays out every chunk of a halving step before choosing a new
/// central clique, even if earlier chunks already shrank the component.
pub fn run_active_matching(instance: &ProblemInstance, policy: PolicyKind, s: usize, seed: u64) -> Trace {
    assert!(s >= 1, "sparsity must be at least 1");
    assert!(policy.is_active(), "{policy} is not an active policy");
    let mut env = Environment::new(instance.clone());
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut trace = Trace::new(policy, s);
    loop {
        let t = unmatched_set(env.baseline_mean(), env.q_mean(), EPS);
        if t.is_empty() {
            break;
        }
        let mut sources = identified_sources(env.essential(), &t);
        let mut previous: Option<NodeSet> = None;
        let mut episode: Option<usize> = None;
        // remaining chunks of a clique-tree halving step, in global ids
        let mut pending: VecDeque<NodeSet> = VecDeque::new();
        while sources.is_empty() {
            let comps = chain_components_within(env.essential(), &t);
            let mut free = comps.into_iter().filter(|c| !c.has_incoming);
            // stay inside the piece explored last; otherwise lowest node first
            let chosen = match &previous {
                Some(prev) => {
                    let free: Vec<_> = free.collect();
                    let inside = free.iter().position(|c| c.nodes.is_subset(prev)).unwrap_or(0);
                    free.into_iter().nth(inside)
                }
                None => free.next(),
            }
            .expect("a chain graph has a component without incoming edges");
            let (local, map) = env.essential().undirected_induced(&chosen.nodes);
            let cliques = maximal_cliques(&local).expect("chain components are chordal");
            let r_c = cliques.len();
            let m_c = cliques.iter().map(|c| c.len()).max().unwrap_or(0);
            let ep = *episode.get_or_insert_with(|| {
                trace.episodes.push(Episode {
                    component_size: local.p(),
                    r_c,
                    m_c,
                    explores: 0,
                });
                trace.episodes.len() - 1
            });

            let (targets, path_mode) = if policy == PolicyKind::CliqueTree {
                if pending.is_empty() {
                    let plan = clique_tree_plan(&local, s, &mut rng).expect("chain components are chordal and connected");
                    pending.extend(plan.into_iter().map(|a| a.iter().map(|&x| map[x]).collect::<NodeSet>()));
                }
                (pending.pop_front().expect("plans are nonempty"), None)
            } else {
                let choice = select_targets(policy, &local, s, &mut rng);
                (choice.nodes.iter().map(|&x| map[x]).collect(), choice.path_mode)
            };
            assert!(
                !targets.is_empty() && targets.len() <= s && targets.is_subset(&t),
                "policy returned an invalid target set"
            );
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
                episode: Some(ep),
                path_mode,
            });
            trace.episodes[ep].explores += 1;
            guard(&env, &trace);
            previous = Some(chosen.nodes);
            sources = identified_sources(env.essential(), &t);
        }
        commit(&mut env, &mut trace, &sources);
    }
    trace.final_matching = env.partial_matching().clone();
    trace
}

/// Adds `q_i - current_i` on each of `sources` and performs the result.
pub(crate) fn commit(env: &mut Environment, trace: &mut Trace, sources: &NodeSet) {
    let mut partial = env.partial_matching().clone();
    for &i in sources {
        partial.add(i, env.q_mean()[i] - env.baseline_mean()[i]);
    }
    env.perform_matching(partial.clone());
    trace.push(Step {
        step: 0,
        purpose: Purpose::Commit,
        targets: sources.clone(),
        shifts: partial,
        component_size: None,
        r_c: None,
        m_c: None,
        episode: None,
        path_mode: None,
    });
    guard(env, trace);
}
