//! Acceptance run: one PASS/FAIL line per criterion, nonzero exit on any
//! failure.

use std::collections::{BTreeMap, BTreeSet};
use std::time::{Duration, Instant};

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use shiftmatch::bench::{gen_graph, relative_rate, run_instances, run_to_dir, BenchConfig, GraphType, RunOptions};
use shiftmatch::equivalence::{interventional_essential_graph, shift_essential_graph};
use shiftmatch::graph::{adversarial_orientation, orient_by_order, Dag, NodeSet};
use shiftmatch::minmaxc::{brute_force_minmaxc, exact_objective, saturate};
use shiftmatch::par::{map_collect, Execution};
use shiftmatch::scm::{
    interventional_mean, observational_mean, sample_instance, sample_scm, sample_violating_instance, LinearScm,
    ProblemInstance, ShiftIntervention,
};
use shiftmatch::strategies::{coloring_baseline, run_active_matching, run_policy, PolicyKind, Purpose, Trace};
use shiftmatch::verify::{
    adversarial_clique_explores, chain_of_cliques, fix_b, mec_agreement, random_chordal_graph, surrogate_bound_check,
    surrogate_shape_check,
};

type Outcome = Result<String, String>;

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn within(elapsed: Duration, limit: Duration, what: &str) -> Result<(), String> {
    ensure(elapsed < limit, || format!("{what} took {elapsed:?}, limit {limit:?}"))
}

fn c1_mec_oracle() -> Outcome {
    let start = Instant::now();
    let mut pairs = 0;
    for p in 1..=5 {
        pairs += mec_agreement(p)?;
    }
    within(start.elapsed(), Duration::from_secs(300), "exhaustive comparison")?;
    Ok(format!("{pairs} (dag class, family) pairs, 0 mismatches"))
}

fn c2_refinement() -> Outcome {
    let dag = Dag::from_edges(3, &[(0, 1), (0, 2), (1, 2)]).unwrap();
    let fam = vec![NodeSet::from([1, 2])];
    let gen = interventional_essential_graph(&dag, &fam);
    let shift = shift_essential_graph(&dag, &fam);
    ensure(
        gen.has_directed(0, 1) && gen.has_directed(0, 2) && gen.has_undirected(1, 2),
        || format!("I-EG: directed {:?}, undirected {:?}", gen.directed_edges(), gen.undirected_edges()),
    )?;
    ensure(shift.has_directed(1, 2) && shift.is_fully_directed(), || {
        format!("shift-I-EG: undirected {:?}", shift.undirected_edges())
    })?;
    Ok("2-3 undirected in the I-EG, oriented 2->3 in the shift-I-EG".into())
}

fn exact_error(tr: &Trace, inst: &ProblemInstance) -> Option<f64> {
    tr.final_matching.max_abs_error(&inst.true_matching)
}

fn c3_exact_matching() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(3);
    let mut cases: Vec<(ProblemInstance, usize, bool)> = Vec::new();
    let mut seed = 0u64;
    while cases.len() < 1000 {
        seed += 1;
        let violating = cases.len() >= 900;
        let t = GraphType::ALL[cases.len() % 4];
        let p = rng.gen_range(2..=100);
        let dag = gen_graph(t, p, seed).unwrap();
        let s = rng.gen_range(1..=3);
        let inst = if violating {
            if dag.edge_count() == 0 {
                continue;
            }
            let k = rng.gen_range(2..=p);
            match sample_violating_instance(&dag, k, seed) {
                Ok(i) => i,
                Err(_) => continue,
            }
        } else {
            sample_instance(&dag, rng.gen_range(1..=p), seed).unwrap()
        };
        cases.push((inst, s, violating));
    }
    let errors = map_collect(Execution::Parallel, &cases, |(inst, s, _)| {
        PolicyKind::ALL
            .iter()
            .map(|&policy| (policy, exact_error(&run_policy(inst, policy, *s, inst.seed), inst)))
            .collect::<Vec<_>>()
    });
    let mut worst = 0.0f64;
    let mut failures = Vec::new();
    for ((inst, s, violating), errs) in cases.iter().zip(&errors) {
        let magnitude = inst.q_mean.iter().fold(0.0f64, |a, x| a.max(x.abs()));
        for &(policy, err) in errs {
            match err {
                Some(e) if e < 1e-9 => worst = worst.max(e),
                _ => failures.push(format!(
                    "{policy} S={s} p={} seed={} violating={violating} max|q|={magnitude:.1e}: error {err:?}",
                    inst.p(),
                    inst.seed
                )),
            }
        }
    }
    if !failures.is_empty() {
        return Err(format!("{} of {} runs off by >= 1e-9: {}", failures.len(), cases.len() * PolicyKind::ALL.len(), failures.join("; ")));
    }
    Ok(format!(
        "1000 instances (100 cancelling) x {} policies, max error {worst:.2e}",
        PolicyKind::ALL.len()
    ))
}

fn c4_source_identity() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(4);
    let mut checked = 0;
    for n in 0..1000u64 {
        let t = GraphType::ALL[n as usize % 4];
        let p = rng.gen_range(2..=60);
        let dag = gen_graph(t, p, n).unwrap();
        let scm = sample_scm(&dag, &mut rng);
        let k = rng.gen_range(1..=p);
        let targets = rand::seq::index::sample(&mut rng, p, k).into_vec();
        let shift =
            ShiftIntervention::from_pairs(targets.iter().map(|&v| (v, rng.gen_range(0.5..2.0) * if rng.gen_bool(0.5) { 1.0 } else { -1.0 })))
                .unwrap();
        let base = observational_mean(&scm);
        let moved = interventional_mean(&scm, &shift);
        for v in dag.sources_of(&shift.targets()) {
            let gap = (moved[v] - base[v] - shift.get(v).unwrap()).abs();
            ensure(gap < 1e-9, || format!("pair {n}, node {v}: gap {gap:e}"))?;
            checked += 1;
        }
    }
    Ok(format!("{checked} source targets over 1000 pairs within 1e-9"))
}

fn c5_clique_worst_case() -> Outcome {
    let mut cases = 0;
    for m in 3usize..=8 {
        for s in 1..=3 {
            let want = (m - 1).div_ceil(s);
            for (policy, seeds) in [(PolicyKind::CliqueTree, 0..10u64), (PolicyKind::Supermodular, 0..1)] {
                for seed in seeds {
                    let got = adversarial_clique_explores(m, s, policy, seed)?;
                    ensure(got == want, || format!("{policy} K_{m} S={s} seed={seed}: {got} != {want}"))?;
                    cases += 1;
                }
            }
        }
    }
    Ok(format!("{cases} adversarial runs, each exactly ceil((m-1)/S)"))
}

fn all_policies() -> Vec<PolicyKind> {
    PolicyKind::ALL.to_vec()
}

fn ba_config() -> BenchConfig {
    BenchConfig {
        graph_type: GraphType::BarabasiAlbert,
        p: 100,
        instances: 20,
        target_counts: vec![10, 50, 100],
        sparsity_values: vec![1],
        seed: 2021,
        policies: all_policies(),
        repeats: 5,
        record_timing: false,
    }
}

fn desk_configs() -> Vec<BenchConfig> {
    let mut out = Vec::new();
    for t in GraphType::ALL {
        for p in [10, 50] {
            out.push(BenchConfig {
                graph_type: t,
                p,
                instances: 5,
                target_counts: vec![(p / 5).max(1), p / 2],
                sparsity_values: vec![1, 2, 3],
                seed: 7,
                policies: all_policies(),
                repeats: 2,
                record_timing: false,
            });
        }
    }
    out
}

struct Bench {
    ba: Vec<shiftmatch::bench::InstanceResult>,
    desk: Vec<shiftmatch::bench::InstanceResult>,
    ba_elapsed: Duration,
}

fn run_bench() -> Bench {
    let start = Instant::now();
    let cfg = ba_config();
    let ids: Vec<usize> = (0..cfg.instances).collect();
    let ba = run_instances(&cfg, &ids, Execution::Parallel).unwrap();
    let ba_elapsed = start.elapsed();
    let mut desk = Vec::new();
    for cfg in desk_configs() {
        let ids: Vec<usize> = (0..cfg.instances).collect();
        desk.extend(run_instances(&cfg, &ids, Execution::Parallel).unwrap());
    }
    Bench { ba, desk, ba_elapsed }
}

fn c6_upper_bound(bench: &Bench) -> Outcome {
    let mut episodes = 0;
    let mut rand_over = 0;
    let mut rand_episodes = 0;
    for res in bench.ba.iter().chain(&bench.desk) {
        for (key, tr) in &res.traces {
            for e in &tr.episodes {
                let over = e.explores > e.upper_bound(key.s);
                match key.policy {
                    PolicyKind::CliqueTree | PolicyKind::Supermodular => {
                        ensure(!over, || {
                            format!("{} instance {} k={} S={}: {e:?}", key.policy, res.instance_id, key.k_targets, key.s)
                        })?;
                        episodes += 1;
                    }
                    PolicyKind::UpstreamRand => {
                        rand_episodes += 1;
                        rand_over += over as usize;
                    }
                    _ => {}
                }
            }
        }
    }
    Ok(format!(
        "{episodes} clique_tree/supermodular episodes within bound (upstream_rand, not bounded: {rand_over}/{rand_episodes} over)"
    ))
}

fn chain_instance(r: usize, middle_root: bool) -> ProblemInstance {
    let g = chain_of_cliques(r);
    let dag = if middle_root {
        let c = r / 2;
        let clique: NodeSet = (3 * c..3 * c + 4).collect();
        let perm: Vec<usize> = clique.iter().copied().collect();
        adversarial_orientation(&g, &clique, &perm).unwrap()
    } else {
        orient_by_order(&g, &shiftmatch::graph::mcs_order(&g))
    };
    let weights: BTreeMap<_, _> = dag.edges().into_iter().map(|e| (e, 0.5)).collect();
    let p = dag.p();
    let root = dag.topological_order()[0];
    let scm = LinearScm::new(dag, &weights, vec![0.0; p]).unwrap();
    ProblemInstance::new(scm, ShiftIntervention::from_pairs([(root, 1.0)]).unwrap(), 0)
}

fn c7_chain_gap() -> Outcome {
    let s = 3;
    let rs = [2usize, 4, 8, 16];
    let mut line = Vec::new();
    for middle in [false, true] {
        let mut coloring = Vec::new();
        let mut clique_max = Vec::new();
        for &r in &rs {
            let inst = chain_instance(r, middle);
            let col = coloring_baseline(&inst, s).explores_before_first_commit();
            let bound = shiftmatch::strategies::ceil_log2(r + 1);
            let mut worst = 0;
            for seed in 0..10 {
                let tr = run_active_matching(&inst, PolicyKind::CliqueTree, s, seed);
                ensure(tr.final_matching.approx_eq(&inst.true_matching, 1e-9), || format!("r={r}: wrong matching"))?;
                worst = worst.max(tr.explore_count());
            }
            ensure(worst <= bound, || format!("r={r} middle={middle}: clique_tree {worst} > {bound}"))?;
            coloring.push(col);
            clique_max.push(worst);
        }
        for w in 1..rs.len() {
            let (dr, dc) = (rs[w] - rs[w - 1], coloring[w] as isize - coloring[w - 1] as isize);
            // at least half an exploration per added clique
            ensure(2 * dc >= dr as isize, || format!("coloring {coloring:?} grows slower than linearly over r={rs:?}"))?;
        }
        for (i, &r) in rs.iter().enumerate().skip(1) {
            ensure(clique_max[i] < coloring[i], || format!("r={r}: clique_tree {} vs coloring {}", clique_max[i], coloring[i]))?;
        }
        line.push(format!(
            "{} root: clique_tree {clique_max:?}, coloring {coloring:?}",
            if middle { "middle" } else { "end" }
        ));
    }
    Ok(line.join("; "))
}

fn c8_surrogate() -> Outcome {
    let g = fix_b();
    let f = |a: &[usize]| exact_objective(&g, &a.iter().copied().collect()).per_node[0] as i64;
    let vals = [f(&[]), f(&[1]), f(&[2]), f(&[1, 2])];
    ensure(vals == [4, 3, 3, 1], || format!("f_1 values {vals:?}"))?;
    let (m1, m2) = (f(&[1]) - f(&[]), f(&[1, 2]) - f(&[2]));
    ensure(m1 == -1 && m2 == -2 && m1 > m2, || format!("margins {m1}, {m2}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(8);
    let mut triples = 0;
    for _ in 0..200 {
        let p = rng.gen_range(3..=10);
        let g = random_chordal_graph(p, &mut rng);
        triples += surrogate_shape_check(&g)?;
        surrogate_bound_check(&g, false)?;
    }
    ensure(triples >= 10_000, || format!("only {triples} triples"))?;
    for seed in 0..100u64 {
        let p = 2 + (seed as usize % 11);
        let tree = gen_graph(GraphType::RootedTree, p, seed).unwrap().skeleton();
        surrogate_bound_check(&tree, true)?;
    }
    Ok(format!("FIX-B 4,3,3,1 and -1 > -2; {triples} triples on 200 graphs; 100 trees tight"))
}

fn c9_saturate_quality() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(9);
    let mut close = 0;
    let mut worst: f64 = 1.0;
    for n in 0..100 {
        let p = rng.gen_range(4..=14);
        let s = rng.gen_range(1..=3);
        let g = random_chordal_graph(p, &mut rng);
        let got = saturate(&g, s);
        ensure(!got.nodes.is_empty() && got.nodes.len() <= s, || format!("graph {n}: infeasible {:?}", got.nodes))?;
        let value = exact_objective(&g, &got.nodes).max as f64;
        let best = brute_force_minmaxc(&g, s).unwrap().objective;
        let ratio = if best == 0.0 { 1.0 } else { value / best };
        worst = worst.max(ratio);
        if value <= 1.5 * best {
            close += 1;
        }
    }
    ensure(close >= 90, || format!("only {close}/100 within 1.5x"))?;
    for seed in 0..100u64 {
        let p = 2 + (seed as usize % 13);
        let tree = gen_graph(GraphType::RootedTree, p, seed).unwrap().skeleton();
        let got = exact_objective(&tree, &saturate(&tree, 1).nodes).max as f64;
        let best = brute_force_minmaxc(&tree, 1).unwrap().objective;
        ensure(got == best, || format!("tree seed {seed}: saturate {got}, optimum {best}"))?;
    }
    Ok(format!("{close}/100 within 1.5x (worst ratio {worst:.3}); 100 trees optimal at S=1"))
}

fn explore_targets(tr: &Trace) -> Vec<NodeSet> {
    tr.steps
        .iter()
        .filter(|s| s.purpose == Purpose::Explore)
        .map(|s| s.targets.clone())
        .collect()
}

fn c10_experiment_shape(bench: &Bench) -> Outcome {
    within(bench.ba_elapsed, Duration::from_secs(600), "BA p=100 suite")?;
    let rows: Vec<_> = bench.ba.iter().flat_map(|r| r.rows.clone()).collect();
    let mean_extra = |p: PolicyKind| {
        let xs: Vec<f64> = rows.iter().filter(|r| r.policy == p).map(|r| r.extra as f64).collect();
        xs.iter().sum::<f64>() / xs.len() as f64
    };
    let (col, rnd, ct) = (
        mean_extra(PolicyKind::Coloring),
        mean_extra(PolicyKind::UpstreamRand),
        mean_extra(PolicyKind::CliqueTree),
    );
    let mut problems = Vec::new();
    let mut parts = Vec::new();
    let a = format!("(a) mean extra coloring {col:.2}, upstream_rand {rnd:.2}, clique_tree {ct:.2}");
    if !(col > rnd && rnd >= ct) {
        problems.push(a.clone());
    }
    parts.push(a);

    let mut varying = Vec::new();
    for res in &bench.ba {
        let runs: Vec<&Trace> = res
            .traces
            .iter()
            .filter(|(k, _)| k.policy == PolicyKind::Coloring)
            .map(|(_, t)| t)
            .collect();
        let first = explore_targets(runs[0]);
        if !runs.iter().all(|t| explore_targets(t) == first) {
            varying.push(res.instance_id);
        }
    }
    let b = format!("(b) coloring exploration differs across k on instances {varying:?}");
    if varying.is_empty() {
        parts.push("(b) coloring exploration identical across k".into());
    } else {
        problems.push(b.clone());
        parts.push(b);
    }

    let at_full: Vec<_> = rows.iter().filter(|r| r.k_targets == 100).cloned().collect();
    let mut rates = Vec::new();
    for p in [PolicyKind::Supermodular, PolicyKind::CliqueTree] {
        let r = relative_rate(&at_full, p).map_err(|e| e.to_string())?;
        let line = format!("{p} {:+.4} (excluded {})", r.mean_rate, r.excluded);
        if r.mean_rate > 0.0 {
            problems.push(format!("(c) {line}"));
        }
        rates.push(line);
    }
    parts.push(format!("(c) k=100 rates {}", rates.join(", ")));
    let summary = format!("{}; {:.1} s", parts.join("; "), bench.ba_elapsed.as_secs_f64());
    if problems.is_empty() {
        Ok(summary)
    } else {
        Err(format!("violated {}; full: {summary}", problems.join(" | ")))
    }
}

fn c11_determinism() -> Outcome {
    let cfg = BenchConfig {
        graph_type: GraphType::ErdosRenyi,
        p: 30,
        instances: 4,
        target_counts: vec![5, 15],
        sparsity_values: vec![1, 2],
        seed: 11,
        policies: all_policies(),
        repeats: 3,
        record_timing: false,
    };
    let tmp = tempfile::tempdir().map_err(|e| e.to_string())?;
    let mut csvs = Vec::new();
    let mut traces = BTreeSet::new();
    for (name, exec) in [("a", Execution::Parallel), ("b", Execution::Parallel), ("c", Execution::Sequential)] {
        let dir = tmp.path().join(name);
        let rep = run_to_dir(&cfg, &dir, RunOptions { exec, ..Default::default() }).map_err(|e| e.to_string())?;
        csvs.push(std::fs::read(&rep.results_csv).map_err(|e| e.to_string())?);
        traces.insert(std::fs::read(dir.join("traces/instance_0002.jsonl")).map_err(|e| e.to_string())?);
    }
    ensure(csvs.windows(2).all(|w| w[0] == w[1]), || "results.csv differs between runs".into())?;
    ensure(traces.len() == 1, || "traces differ between runs".into())?;
    Ok(format!("3 runs, identical {}-byte results.csv and traces", csvs[0].len()))
}

fn main() {
    let mut failed = 0;
    let mut report = |n: usize, f: &dyn Fn() -> Outcome| {
        let start = Instant::now();
        let out = f();
        let secs = start.elapsed().as_secs_f64();
        match out {
            Ok(d) => println!("criterion {n:>2} PASS ({secs:.1} s): {d}"),
            Err(d) => {
                failed += 1;
                println!("criterion {n:>2} FAIL ({secs:.1} s): {d}");
            }
        }
    };
    report(1, &c1_mec_oracle);
    report(2, &c2_refinement);
    report(3, &c3_exact_matching);
    report(4, &c4_source_identity);
    report(5, &c5_clique_worst_case);
    let start = Instant::now();
    let bench = run_bench();
    println!("(benchmark suites ran in {:.1} s)", start.elapsed().as_secs_f64());
    report(6, &|| c6_upper_bound(&bench));
    report(7, &c7_chain_gap);
    report(8, &c8_surrogate);
    report(9, &c9_saturate_quality);
    report(10, &|| c10_experiment_shape(&bench));
    report(11, &c11_determinism);
    if failed > 0 {
        println!("{failed} criteria failed");
        std::process::exit(1);
    }
    println!("all criteria passed");
}
