//! Self-checks behind `shiftmatch verify`: brute-force equivalence-class
//! agreement, optimizer properties and the clique worst-case counts.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;
use std::time::{Duration, Instant};

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;

use crate::bench::{gen_graph, GraphType};
use crate::equivalence::{brute_force_shift_mec, shared_directed_edges, shift_essential_graph};
use crate::error::{Error, Result};
use crate::graph::{adversarial_orientation, Dag, NodeId, NodeSet, UndirectedGraph};
use crate::minmaxc::{brute_force_minmaxc, clique_tree_plan, exact_objective, saturate, PathMode, Surrogate};
use crate::scm::{LinearScm, ProblemInstance, ShiftIntervention};
use crate::strategies::{run_active_matching, select_targets, PolicyKind};

const TOL: f64 = 1e-9;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "snake_case")]
pub enum Suite {
    Mec,
    Minmaxc,
    Bounds,
    All,
}

impl FromStr for Suite {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "mec" => Ok(Suite::Mec),
            "minmaxc" => Ok(Suite::Minmaxc),
            "bounds" => Ok(Suite::Bounds),
            "all" => Ok(Suite::All),
            _ => Err(Error::InvalidArgument(format!("unknown suite `{s}`"))),
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Suite::Mec => "mec",
            Suite::Minmaxc => "minmaxc",
            Suite::Bounds => "bounds",
            Suite::All => "all",
        })
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct CheckResult {
    pub name: String,
    pub passed: bool,
    /// Counts on success, the first counterexample on failure.
    pub detail: String,
    pub elapsed: Duration,
}

#[derive(Debug, Clone, Default, Serialize)]
pub struct Report {
    pub checks: Vec<CheckResult>,
}

impl Report {
    pub fn passed(&self) -> bool {
        self.checks.iter().all(|c| c.passed)
    }

    fn run(&mut self, name: &str, f: impl FnOnce() -> std::result::Result<String, String>) {
        let start = Instant::now();
        let (passed, detail) = match f() {
            Ok(d) => (true, d),
            Err(d) => (false, d),
        };
        self.checks.push(CheckResult {
            name: name.to_string(),
            passed,
            detail,
            elapsed: start.elapsed(),
        });
    }

    pub fn render(&self) -> String {
        let mut out = String::new();
        for c in &self.checks {
            out.push_str(&format!(
                "{} {} ({:.1} ms): {}\n",
                if c.passed { "PASS" } else { "FAIL" },
                c.name,
                c.elapsed.as_secs_f64() * 1e3,
                c.detail
            ));
        }
        let failed = self.checks.iter().filter(|c| !c.passed).count();
        out.push_str(&format!("{} checks, {} failed\n", self.checks.len(), failed));
        out
    }
}

pub fn run_verification(suite: Suite) -> Report {
    let mut report = Report::default();
    if matches!(suite, Suite::Mec | Suite::All) {
        mec_suite(&mut report);
    }
    if matches!(suite, Suite::Minmaxc | Suite::All) {
        minmaxc_suite(&mut report);
    }
    if matches!(suite, Suite::Bounds | Suite::All) {
        bounds_suite(&mut report);
    }
    report
}

fn permutations(n: usize) -> Vec<Vec<usize>> {
    fn go(cur: &mut Vec<usize>, used: &mut Vec<bool>, out: &mut Vec<Vec<usize>>) {
        if cur.len() == used.len() {
            out.push(cur.clone());
            return;
        }
        for v in 0..used.len() {
            if !used[v] {
                used[v] = true;
                cur.push(v);
                go(cur, used, out);
                cur.pop();
                used[v] = false;
            }
        }
    }
    let mut out = Vec::new();
    go(&mut Vec::new(), &mut vec![false; n], &mut out);
    out
}

/// One representative of every isomorphism class of connected DAGs on `p`
/// nodes: the labelling whose sorted edge list is smallest.
pub fn connected_dags_up_to_isomorphism(p: usize) -> Vec<Dag> {
    let pairs: Vec<(usize, usize)> = (0..p).flat_map(|a| ((a + 1)..p).map(move |b| (a, b))).collect();
    let perms = permutations(p);
    let total = 3usize.pow(pairs.len() as u32);
    let mut out = Vec::new();
    for code in 0..total {
        let mut c = code;
        let mut edges = Vec::new();
        for &(a, b) in &pairs {
            match c % 3 {
                1 => edges.push((a, b)),
                2 => edges.push((b, a)),
                _ => {}
            }
            c /= 3;
        }
        let Ok(dag) = Dag::from_edges(p, &edges) else {
            continue;
        };
        if !dag.skeleton().is_connected() {
            continue;
        }
        let mut own = edges.clone();
        own.sort_unstable();
        let canonical = perms.iter().all(|perm| {
            let mut e: Vec<_> = edges.iter().map(|&(a, b)| (perm[a], perm[b])).collect();
            e.sort_unstable();
            own <= e
        });
        if canonical {
            out.push(dag);
        }
    }
    out
}

/// Every family of at most `max_sets` distinct nonempty target sets.
pub fn intervention_families(p: usize, max_sets: usize) -> Vec<Vec<NodeSet>> {
    let sets: Vec<NodeSet> = (1u32..(1 << p))
        .map(|m| (0..p).filter(|&v| m >> v & 1 == 1).collect())
        .collect();
    let mut out: Vec<Vec<NodeSet>> = vec![vec![]];
    let mut frontier: Vec<(usize, Vec<NodeSet>)> = vec![(0, vec![])];
    for _ in 0..max_sets {
        let mut next = Vec::new();
        for (start, fam) in &frontier {
            for (i, s) in sets.iter().enumerate().skip(*start) {
                let mut f = fam.clone();
                f.push(s.clone());
                out.push(f.clone());
                next.push((i + 1, f));
            }
        }
        frontier = next;
    }
    out
}

/// Compares the shift essential graph with the brute-force class on every
/// connected DAG of `p` nodes (up to isomorphism) and every family of at
/// most two target sets. Returns the number of pairs checked.
pub fn mec_agreement(p: usize) -> std::result::Result<usize, String> {
    let families = intervention_families(p, 2);
    let mut checked = 0;
    for dag in connected_dags_up_to_isomorphism(p) {
        for fam in &families {
            let eg = shift_essential_graph(&dag, fam);
            let members = brute_force_shift_mec(&dag, fam).map_err(|e| e.to_string())?;
            let want = shared_directed_edges(&members);
            let got: std::collections::BTreeSet<_> = eg.directed_edges().into_iter().collect();
            if got != want {
                return Err(format!(
                    "dag {:?} family {:?}: essential graph {:?}, class shares {:?}",
                    dag.edges(),
                    fam,
                    got,
                    want
                ));
            }
            checked += 1;
        }
    }
    Ok(checked)
}

fn mec_suite(report: &mut Report) {
    for p in 2..=5 {
        report.run(&format!("mec_agreement_p{p}"), || {
            mec_agreement(p).map(|n| format!("{n} (dag, family) pairs agree"))
        });
    }
}

/// Connected chordal graph grown by attaching each new node to a clique of
/// the graph so far.
pub fn random_chordal_graph<R: Rng>(p: usize, rng: &mut R) -> UndirectedGraph {
    let mut g = UndirectedGraph::empty(p);
    for v in 1..p {
        let u = rng.gen_range(0..v);
        let mut clique = vec![u];
        let mut nbrs: Vec<NodeId> = g.neighbors(u).iter().copied().filter(|&w| w < v).collect();
        nbrs.shuffle(rng);
        for w in nbrs {
            if rng.gen_bool(0.5) && clique.iter().all(|&c| g.has_edge(c, w)) {
                clique.push(w);
            }
        }
        for c in clique {
            g.add_edge_unchecked(c, v);
        }
    }
    g
}

/// `r` copies of K4 in a row, consecutive copies sharing one node.
pub fn chain_of_cliques(r: usize) -> UndirectedGraph {
    let mut edges = Vec::new();
    for c in 0..r {
        let base = 3 * c;
        for a in base..base + 4 {
            for b in (a + 1)..base + 4 {
                edges.push((a, b));
            }
        }
    }
    UndirectedGraph::from_edges(3 * r + 1, &edges).expect("valid edges")
}

pub fn fix_b() -> UndirectedGraph {
    UndirectedGraph::from_edges(4, &[(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)]).expect("valid edges")
}

fn surrogate_table(g: &UndirectedGraph) -> Vec<Vec<f64>> {
    let mut sur = Surrogate::with_mode(g, PathMode::Dfs);
    (0u32..(1 << g.p()))
        .map(|m| sur.values(&(0..g.p()).filter(|&v| m >> v & 1 == 1).collect()))
        .collect()
}

/// Exhaustive check of monotone decrease and supermodularity of every
/// `f^_i` over all `A <= B` and `x` outside `B`. Returns the triple count.
pub fn surrogate_shape_check(g: &UndirectedGraph) -> std::result::Result<usize, String> {
    let p = g.p();
    let table = surrogate_table(g);
    let mut triples = 0;
    for b in 0u32..(1 << p) {
        // walk the subsets a of b
        let mut a = b;
        loop {
            for i in 0..p {
                if table[a as usize][i] < table[b as usize][i] - TOL {
                    return Err(format!("not decreasing at i={i}, A={a:#b}, B={b:#b}"));
                }
            }
            for x in (0..p).filter(|&x| b >> x & 1 == 0) {
                let (ax, bx) = ((a | 1 << x) as usize, (b | 1 << x) as usize);
                for i in 0..p {
                    let da = table[ax][i] - table[a as usize][i];
                    let db = table[bx][i] - table[b as usize][i];
                    if da > db + TOL {
                        return Err(format!("not supermodular at i={i}, x={x}, A={a:#b}, B={b:#b}: {da} > {db}"));
                    }
                }
                triples += 1;
            }
            if a == 0 {
                break;
            }
            a = (a - 1) & b;
        }
    }
    Ok(triples)
}

/// Lower bound `f^ <= f` everywhere, with equality when `tight`.
pub fn surrogate_bound_check(g: &UndirectedGraph, tight: bool) -> std::result::Result<(), String> {
    let table = surrogate_table(g);
    for (m, vals) in table.iter().enumerate() {
        let a: NodeSet = (0..g.p()).filter(|&v| m >> v & 1 == 1).collect();
        let f = exact_objective(g, &a).per_node;
        for i in 0..g.p() {
            let exact = f[i] as f64;
            if vals[i] > exact + TOL || (tight && (vals[i] - exact).abs() > TOL) {
                return Err(format!("i={i}, A={a:?}: surrogate {} vs exact {exact}", vals[i]));
            }
        }
    }
    Ok(())
}

fn random_tree(p: usize, seed: u64) -> UndirectedGraph {
    gen_graph(GraphType::RootedTree, p, seed)
        .expect("p >= 2")
        .skeleton()
}

fn minmaxc_suite(report: &mut Report) {
    report.run("fix_b_values", || {
        let g = fix_b();
        let f = |a: &[usize]| exact_objective(&g, &a.iter().copied().collect()).per_node[0] as i64;
        let got = [f(&[]), f(&[1]), f(&[2]), f(&[1, 2])];
        let margins = (f(&[1]) - f(&[]), f(&[1, 2]) - f(&[2]));
        if got == [4, 3, 3, 1] && margins == (-1, -2) {
            Ok(format!("f_1 = {got:?}, margins {} > {}", margins.0, margins.1))
        } else {
            Err(format!("f_1 = {got:?}, margins {margins:?}"))
        }
    });
    report.run("surrogate_shape", || {
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut triples = 0;
        for _ in 0..40 {
            let p = rng.gen_range(3..=8);
            let g = random_chordal_graph(p, &mut rng);
            triples += surrogate_shape_check(&g)?;
            surrogate_bound_check(&g, false)?;
        }
        Ok(format!("{triples} triples on 40 chordal graphs"))
    });
    report.run("surrogate_tight_on_trees", || {
        for seed in 0..40 {
            surrogate_bound_check(&random_tree(2 + seed as usize % 8, seed), true)?;
        }
        Ok("40 trees".into())
    });
    report.run("saturate_vs_brute_force", || {
        let mut rng = ChaCha8Rng::seed_from_u64(8);
        let mut close = 0;
        let n = 30;
        for _ in 0..n {
            let p = rng.gen_range(4..=12);
            let s = rng.gen_range(1..=3);
            let g = random_chordal_graph(p, &mut rng);
            let got = saturate(&g, s);
            if got.nodes.is_empty() || got.nodes.len() > s {
                return Err(format!("infeasible choice {:?} for S={s}", got.nodes));
            }
            let value = exact_objective(&g, &got.nodes).max as f64;
            let best = brute_force_minmaxc(&g, s).map_err(|e| e.to_string())?.objective;
            if value <= 1.5 * best + TOL {
                close += 1;
            }
        }
        if close * 10 >= n * 9 {
            Ok(format!("{close}/{n} within 1.5x of optimum"))
        } else {
            Err(format!("only {close}/{n} within 1.5x of optimum"))
        }
    });
}

/// K_m oriented against `policy`: each exploration set is placed after
/// everything the policy has not picked yet, so the source stays hidden in
/// the largest possible remainder. Returns the instance (target: the
/// source, shift 1) and the exploration sets the policy will use.
pub fn adversarial_clique_instance(
    m: usize,
    s: usize,
    policy: PolicyKind,
    seed: u64,
) -> Result<(ProblemInstance, Vec<NodeSet>)> {
    let g = UndirectedGraph::complete(m);
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut remaining: Vec<NodeId> = (0..m).collect();
    let mut picks: Vec<NodeSet> = Vec::new();
    let mut pending: Vec<NodeSet> = Vec::new();
    while remaining.len() > 1 {
        let local = UndirectedGraph::complete(remaining.len());
        let picked: NodeSet = if policy == PolicyKind::CliqueTree {
            // the run plays out a whole plan before replanning
            if pending.is_empty() {
                let plan = clique_tree_plan(&local, s, &mut rng)?;
                pending = plan.iter().rev().map(|a| a.iter().map(|&x| remaining[x]).collect()).collect();
            }
            pending.pop().expect("plans are nonempty")
        } else {
            let choice = select_targets(policy, &local, s, &mut rng);
            choice.nodes.iter().map(|&x| remaining[x]).collect()
        };
        remaining.retain(|v| !picked.contains(v));
        picks.push(picked);
    }
    let mut order = remaining.clone();
    for a in picks.iter().rev() {
        order.extend(a.iter().copied());
    }
    let dag = adversarial_orientation(&g, &(0..m).collect(), &order)?;
    let weights: BTreeMap<_, _> = dag.edges().into_iter().map(|e| (e, 0.5)).collect();
    let scm = LinearScm::new(dag, &weights, vec![0.0; m])?;
    let matching = ShiftIntervention::from_pairs([(order[0], 1.0)])?;
    Ok((ProblemInstance::new(scm, matching, seed), picks))
}

/// Runs `policy` on its adversarial K_m and returns its exploration count,
/// checking that the run followed the predicted exploration sets.
pub fn adversarial_clique_explores(m: usize, s: usize, policy: PolicyKind, seed: u64) -> std::result::Result<usize, String> {
    let (inst, picks) = adversarial_clique_instance(m, s, policy, seed).map_err(|e| e.to_string())?;
    let trace = run_active_matching(&inst, policy, s, seed);
    let explored: Vec<NodeSet> = trace
        .steps
        .iter()
        .filter(|st| st.purpose == crate::strategies::Purpose::Explore)
        .map(|st| st.targets.clone())
        .collect();
    if explored != picks {
        return Err(format!("m={m} S={s} {policy}: explored {explored:?}, predicted {picks:?}"));
    }
    if !trace.final_matching.approx_eq(&inst.true_matching, TOL) {
        return Err(format!("m={m} S={s} {policy}: wrong final matching"));
    }
    Ok(explored.len())
}

fn bounds_suite(report: &mut Report) {
    for policy in [PolicyKind::CliqueTree, PolicyKind::Supermodular] {
        report.run(&format!("clique_worst_case_{policy}"), || {
            let mut cases = 0;
            for m in 3usize..=8 {
                for s in 1..=3 {
                    let want = (m - 1).div_ceil(s);
                    let got = adversarial_clique_explores(m, s, policy, 0)?;
                    if got != want {
                        return Err(format!("K_{m}, S={s}: {got} explores, expected {want}"));
                    }
                    cases += 1;
                }
            }
            Ok(format!("{cases} (m, S) cases hit ceil((m-1)/S) exactly"))
        });
    }
    report.run("chain_of_cliques_upper_bound", || {
        let mut runs = 0;
        for r in [2, 4, 8] {
            let g = chain_of_cliques(r);
            let dag = crate::graph::orient_by_order(&g, &crate::graph::mcs_order(&g));
            let weights: BTreeMap<_, _> = dag.edges().into_iter().map(|e| (e, 0.5)).collect();
            let p = g.p();
            let scm = LinearScm::new(dag.clone(), &weights, vec![0.0; p]).map_err(|e| e.to_string())?;
            let source = dag.topological_order()[0];
            let inst = ProblemInstance::new(
                scm,
                ShiftIntervention::from_pairs([(source, 1.0)]).map_err(|e| e.to_string())?,
                0,
            );
            for policy in [PolicyKind::CliqueTree, PolicyKind::Supermodular] {
                let tr = run_active_matching(&inst, policy, 3, 0);
                for e in &tr.episodes {
                    if e.explores > e.upper_bound(3) {
                        return Err(format!("r={r} {policy}: {e:?} exceeds {}", e.upper_bound(3)));
                    }
                }
                runs += 1;
            }
        }
        Ok(format!("{runs} runs within the per-episode bound"))
    });
}
