use std::collections::BTreeMap;
use std::fs;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::generators::{gen_graph, GraphType, BA_ATTACH, ER_EDGE_PROB};
use super::metrics::{aggregate, aggregate_csv, parse_csv, rows_to_csv, summary_table, ResultRow, SCHEMA_VERSION};
use crate::error::{Error, Result};
use crate::par::{map_collect, Execution};
use crate::scm::{sample_matching, sample_scm, ProblemInstance, NOISE_MEAN_RANGE, SHIFT_RANGE, WEIGHT_RANGE};
use crate::strategies::{oracle_baseline, run_policy, PolicyKind, Trace};

pub const DEFAULT_REPEATS: usize = 5;
const MAX_TARGETS: usize = 100;
/// Instances computed between two checkpoints of `run_to_dir`.
const CHECKPOINT_BATCH: usize = 8;

fn default_repeats() -> usize {
    DEFAULT_REPEATS
}

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BenchConfig {
    pub graph_type: GraphType,
    pub p: usize,
    pub instances: usize,
    pub target_counts: Vec<usize>,
    pub sparsity_values: Vec<usize>,
    pub seed: u64,
    pub policies: Vec<PolicyKind>,
    /// Runs per instance for randomized policies; deterministic ones run once.
    #[serde(default = "default_repeats")]
    pub repeats: usize,
    /// Fill `wall_ms`. Off by default so output bytes depend on the seed only.
    #[serde(default)]
    pub record_timing: bool,
}

impl BenchConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: BenchConfig = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidArgument(m));
        if self.p < 2 {
            return bad(format!("p must be at least 2, got {}", self.p));
        }
        if self.instances == 0 {
            return bad("instances must be at least 1".into());
        }
        let kmax = self.p.min(MAX_TARGETS);
        if self.target_counts.is_empty() {
            return bad("target_counts is empty".into());
        }
        if let Some(k) = self.target_counts.iter().find(|&&k| k == 0 || k > kmax) {
            return bad(format!("target count {k} outside 1..={kmax}"));
        }
        if self.sparsity_values.is_empty() || self.sparsity_values.contains(&0) {
            return bad("sparsity_values must be nonempty and positive".into());
        }
        if self.policies.is_empty() {
            return bad("policies is empty".into());
        }
        if self.repeats == 0 {
            return bad("repeats must be at least 1".into());
        }
        Ok(())
    }

    fn sorted_unique(&self) -> (Vec<usize>, Vec<usize>, Vec<PolicyKind>) {
        let mut ks = self.target_counts.clone();
        ks.sort_unstable();
        ks.dedup();
        let mut ss = self.sparsity_values.clone();
        ss.sort_unstable();
        ss.dedup();
        let mut ps = self.policies.clone();
        ps.sort_unstable();
        ps.dedup();
        (ks, ss, ps)
    }
}

/// Hex SHA-256 of the compact JSON form of `config`.
pub fn config_hash(config: &BenchConfig) -> String {
    let text = serde_json::to_string(config).expect("config serializes");
    Sha256::digest(text.as_bytes()).iter().map(|b| format!("{b:02x}")).collect()
}

fn splitmix(mut x: u64) -> u64 {
    x = x.wrapping_add(0x9e37_79b9_7f4a_7c15);
    x = (x ^ (x >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    x = (x ^ (x >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    x ^ (x >> 31)
}

fn mix(parts: &[u64]) -> u64 {
    parts.iter().fold(0x5eed, |h, &x| splitmix(h ^ splitmix(x)))
}

fn type_tag(t: GraphType) -> u64 {
    GraphType::ALL.iter().position(|&x| x == t).expect("listed") as u64
}

/// Seed shared by every policy run on one instance.
pub fn instance_seed(config: &BenchConfig, instance_id: usize) -> u64 {
    mix(&[config.seed, type_tag(config.graph_type), config.p as u64, instance_id as u64])
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Serialize)]
pub struct RunKey {
    pub instance_id: usize,
    pub k_targets: usize,
    pub s: usize,
    pub policy: PolicyKind,
    pub repeat: usize,
}

#[derive(Debug, Clone)]
pub struct InstanceResult {
    pub instance_id: usize,
    pub seed: u64,
    pub rows: Vec<ResultRow>,
    pub traces: Vec<(RunKey, Trace)>,
}

impl InstanceResult {
    fn traces_jsonl(&self) -> String {
        let mut out = String::new();
        for (key, trace) in &self.traces {
            let head = serde_json::json!({
                "run": true,
                "instance_id": key.instance_id,
                "seed": self.seed,
                "k_targets": key.k_targets,
                "S": key.s,
                "policy": key.policy,
                "repeat": key.repeat,
            });
            out.push_str(&head.to_string());
            out.push('\n');
            out.push_str(&trace.to_jsonl());
        }
        out
    }
}

/// The DAG and model are fixed per instance; only the matching intervention
/// depends on `k`.
fn build_instances(config: &BenchConfig, instance_id: usize, ks: &[usize]) -> Result<Vec<ProblemInstance>> {
    let seed = instance_seed(config, instance_id);
    let dag = gen_graph(config.graph_type, config.p, mix(&[seed, 0]))?;
    let scm = sample_scm(&dag, &mut ChaCha8Rng::seed_from_u64(mix(&[seed, 1])));
    ks.iter()
        .map(|&k| {
            let s = mix(&[seed, 2, k as u64]);
            sample_matching(scm.clone(), k, s, &mut ChaCha8Rng::seed_from_u64(s))
        })
        .collect()
}

type Cell = (usize, usize, ProblemInstance);

fn run_cell(config: &BenchConfig, cell: &Cell, ss: &[usize], policies: &[PolicyKind]) -> (Vec<ResultRow>, Vec<(RunKey, Trace)>) {
    let (instance_id, k, inst) = cell;
    let seed = instance_seed(config, *instance_id);
    let oracle_total = oracle_baseline(inst).total_interventions;
    let mut rows = Vec::new();
    let mut traces = Vec::new();
    for &s in ss {
        for &policy in policies {
            let reps = if policy.is_randomized() { config.repeats } else { 1 };
            for repeat in 0..reps {
                let run_seed = mix(&[seed, 3, *k as u64, s as u64, repeat as u64]);
                let start = Instant::now();
                let trace = run_policy(inst, policy, s, run_seed);
                let wall_ms = if config.record_timing {
                    start.elapsed().as_millis() as u64
                } else {
                    0
                };
                rows.push(ResultRow {
                    graph_type: config.graph_type,
                    p: config.p,
                    instance_id: *instance_id,
                    seed,
                    policy,
                    s,
                    k_targets: *k,
                    total: trace.total_interventions,
                    oracle_total,
                    extra: trace.total_interventions as i64 - oracle_total as i64,
                    wall_ms,
                    repeat,
                });
                traces.push((
                    RunKey {
                        instance_id: *instance_id,
                        k_targets: *k,
                        s,
                        policy,
                        repeat,
                    },
                    trace,
                ));
            }
        }
    }
    (rows, traces)
}

fn row_key(r: &ResultRow) -> RunKey {
    RunKey {
        instance_id: r.instance_id,
        k_targets: r.k_targets,
        s: r.s,
        policy: r.policy,
        repeat: r.repeat,
    }
}

/// Runs the given instances. (instance, k) cells are spread over the pool;
/// results come back sorted by instance, then `k`, `S`, policy and repeat.
pub fn run_instances(config: &BenchConfig, ids: &[usize], exec: Execution) -> Result<Vec<InstanceResult>> {
    config.validate()?;
    let (ks, ss, policies) = config.sorted_unique();
    let mut cells: Vec<Cell> = Vec::new();
    for &id in ids {
        for (k, inst) in ks.iter().zip(build_instances(config, id, &ks)?) {
            cells.push((id, *k, inst));
        }
    }
    let outputs = map_collect(exec, &cells, |c| run_cell(config, c, &ss, &policies));
    let mut by_id: BTreeMap<usize, InstanceResult> = BTreeMap::new();
    for ((id, _, _), (rows, traces)) in cells.iter().zip(outputs) {
        let e = by_id.entry(*id).or_insert_with(|| InstanceResult {
            instance_id: *id,
            seed: instance_seed(config, *id),
            rows: Vec::new(),
            traces: Vec::new(),
        });
        e.rows.extend(rows);
        e.traces.extend(traces);
    }
    let mut out: Vec<InstanceResult> = by_id.into_values().collect();
    for r in &mut out {
        r.rows.sort_by_key(row_key);
        r.traces.sort_by_key(|(k, _)| *k);
    }
    Ok(out)
}

/// One row per (instance, policy, S, k, repeat), every policy sharing each
/// instance.
pub fn run_suite(config: &BenchConfig, exec: Execution) -> Result<Vec<ResultRow>> {
    let ids: Vec<usize> = (0..config.instances).collect();
    Ok(run_instances(config, &ids, exec)?
        .into_iter()
        .flat_map(|r| r.rows)
        .collect())
}

#[derive(Debug, Clone, Copy, Default)]
pub struct RunOptions {
    /// Wipe earlier results in the directory.
    pub force: bool,
    /// Keep finished instances from an interrupted run of the same config.
    pub resume: bool,
    pub exec: Execution,
}

#[derive(Debug, Clone)]
pub struct RunReport {
    pub rows: Vec<ResultRow>,
    pub computed: usize,
    pub reused: usize,
    pub results_csv: PathBuf,
}

fn write_atomic(path: &Path, contents: &str) -> Result<()> {
    let tmp = path.with_extension("tmp");
    fs::write(&tmp, contents)?;
    fs::rename(&tmp, path)?;
    Ok(())
}

fn part_path(dir: &Path, id: usize) -> PathBuf {
    dir.join("parts").join(format!("instance_{id:04}.csv"))
}

fn trace_path(dir: &Path, id: usize) -> PathBuf {
    dir.join("traces").join(format!("instance_{id:04}.jsonl"))
}

fn meta_json(config: &BenchConfig) -> String {
    let meta = serde_json::json!({
        "tool": "shiftmatch",
        "version": env!("CARGO_PKG_VERSION"),
        "schema": SCHEMA_VERSION,
        "config_sha256": config_hash(config),
        "config": config,
        "generators": {
            "erdos_renyi_edge_prob": ER_EDGE_PROB,
            "barabasi_albert_attach": BA_ATTACH,
            "barabasi_albert_orientation": "uniformly random node order",
            "moralized_er": "ER DAG over a random order, co-parents married and elimination fill added from the last node back, oriented by that order",
            "rooted_tree": "uniform labelled tree, uniform root, edges away from root",
        },
        "ranges": {
            "edge_weight_abs": WEIGHT_RANGE,
            "shift_abs": SHIFT_RANGE,
            "noise_mean": NOISE_MEAN_RANGE,
        },
    });
    serde_json::to_string_pretty(&meta).expect("meta serializes") + "\n"
}

/// A finished part is reusable only if its rows carry the keys this config
/// would produce.
fn load_part(path: &Path, config: &BenchConfig, id: usize) -> Option<Vec<ResultRow>> {
    let rows = parse_csv(&fs::read_to_string(path).ok()?).ok()?;
    let seed = instance_seed(config, id);
    let ok = !rows.is_empty() && rows.iter().all(|r| r.instance_id == id && r.seed == seed);
    ok.then_some(rows)
}

/// Runs the suite into `dir`, writing per-instance CSV parts and traces as
/// they finish, then the merged `results.csv`, `aggregate.csv`,
/// `summary.txt` and `meta.json`. Every file is written to a temporary name
/// and renamed into place.
pub fn run_to_dir(config: &BenchConfig, dir: &Path, opts: RunOptions) -> Result<RunReport> {
    config.validate()?;
    let meta = meta_json(config);
    let meta_path = dir.join("meta.json");
    let occupied = dir.exists() && fs::read_dir(dir)?.next().is_some();
    if occupied {
        if opts.force {
            for sub in ["parts", "traces"] {
                if dir.join(sub).exists() {
                    fs::remove_dir_all(dir.join(sub))?;
                }
            }
            for f in ["results.csv", "aggregate.csv", "summary.txt", "meta.json"] {
                if dir.join(f).exists() {
                    fs::remove_file(dir.join(f))?;
                }
            }
        } else if opts.resume {
            let old = fs::read_to_string(&meta_path)
                .map_err(|_| Error::InvalidArgument(format!("{} has no meta.json to resume from", dir.display())))?;
            if old != meta {
                return Err(Error::InvalidArgument(
                    "existing results were produced by a different config or version".into(),
                ));
            }
        } else {
            return Err(Error::InvalidArgument(format!(
                "{} is not empty; pass --force to overwrite or --resume to continue",
                dir.display()
            )));
        }
    }
    fs::create_dir_all(dir.join("parts"))?;
    fs::create_dir_all(dir.join("traces"))?;
    write_atomic(&meta_path, &meta)?;

    let mut done: BTreeMap<usize, Vec<ResultRow>> = BTreeMap::new();
    let mut todo = Vec::new();
    for id in 0..config.instances {
        match opts.resume.then(|| load_part(&part_path(dir, id), config, id)).flatten() {
            Some(rows) if trace_path(dir, id).exists() => {
                done.insert(id, rows);
            }
            _ => todo.push(id),
        }
    }
    let reused = done.len();
    for batch in todo.chunks(CHECKPOINT_BATCH) {
        for res in run_instances(config, batch, opts.exec)? {
            write_atomic(&trace_path(dir, res.instance_id), &res.traces_jsonl())?;
            write_atomic(&part_path(dir, res.instance_id), &rows_to_csv(&res.rows))?;
            done.insert(res.instance_id, res.rows);
        }
    }

    let rows: Vec<ResultRow> = done.into_values().flatten().collect();
    let results_csv = dir.join("results.csv");
    write_atomic(&results_csv, &rows_to_csv(&rows))?;
    write_atomic(&dir.join("aggregate.csv"), &aggregate_csv(&aggregate(&rows)))?;
    write_atomic(&dir.join("summary.txt"), &summary_table(&rows))?;
    Ok(RunReport {
        rows,
        computed: todo.len(),
        reused,
        results_csv,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn small(policies: Vec<PolicyKind>) -> BenchConfig {
        BenchConfig {
            graph_type: GraphType::ErdosRenyi,
            p: 8,
            instances: 3,
            target_counts: vec![2, 4],
            sparsity_values: vec![1, 2],
            seed: 11,
            policies,
            repeats: 2,
            record_timing: false,
        }
    }

    #[test]
    fn oracle_only_has_no_extra() {
        let rows = run_suite(&small(vec![PolicyKind::Oracle]), Execution::Sequential).unwrap();
        assert_eq!(rows.len(), 3 * 2 * 2);
        assert!(rows.iter().all(|r| r.extra == 0));
    }

    #[test]
    fn pairing_and_modes_agree() {
        let cfg = small(PolicyKind::ALL.to_vec());
        let a = run_suite(&cfg, Execution::Sequential).unwrap();
        let b = run_suite(&cfg, Execution::Parallel).unwrap();
        assert_eq!(a, b);
        // 3 deterministic policies once, 2 randomized twice
        assert_eq!(a.len(), 3 * 2 * 2 * (3 + 2 * 2));
        let keys = |p: PolicyKind| {
            a.iter()
                .filter(|r| r.policy == p)
                .map(|r| (r.instance_id, r.seed, r.k_targets, r.s))
                .collect::<std::collections::BTreeSet<_>>()
        };
        for p in PolicyKind::ALL {
            assert_eq!(keys(p), keys(PolicyKind::Oracle));
        }
        assert!(a.iter().all(|r| r.extra >= 0), "{a:?}");
    }

    #[test]
    fn config_validation() {
        let mut c = small(vec![PolicyKind::Oracle]);
        assert!(c.validate().is_ok());
        c.target_counts = vec![9];
        assert!(c.validate().is_err());
        c.target_counts = vec![1];
        c.instances = 0;
        assert!(c.validate().is_err());
        let text = r#"{"graph_type":"rooted_tree","p":5,"instances":1,"target_counts":[1],
            "sparsity_values":[1],"seed":0,"policies":["oracle"]}"#;
        let parsed = BenchConfig::from_json(text).unwrap();
        assert_eq!(parsed.repeats, DEFAULT_REPEATS);
        assert!(BenchConfig::from_json(&text.replace("\"seed\"", "\"bogus\":1,\"seed\"")).is_err());
    }

    #[test]
    fn directory_runs_resume_and_refuse() {
        let tmp = tempfile::tempdir().unwrap();
        let cfg = small(vec![PolicyKind::Oracle, PolicyKind::CliqueTree]);
        let first = run_to_dir(&cfg, tmp.path(), RunOptions::default()).unwrap();
        let bytes = fs::read(&first.results_csv).unwrap();
        assert!(run_to_dir(&cfg, tmp.path(), RunOptions::default()).is_err());

        fs::remove_file(part_path(tmp.path(), 1)).unwrap();
        let resumed = run_to_dir(
            &cfg,
            tmp.path(),
            RunOptions {
                resume: true,
                ..Default::default()
            },
        )
        .unwrap();
        assert_eq!((resumed.computed, resumed.reused), (1, 2));
        assert_eq!(fs::read(&resumed.results_csv).unwrap(), bytes);

        let mut other = cfg.clone();
        other.seed += 1;
        assert!(run_to_dir(&other, tmp.path(), RunOptions { resume: true, ..Default::default() }).is_err());
        let forced = run_to_dir(&cfg, tmp.path(), RunOptions { force: true, ..Default::default() }).unwrap();
        assert_eq!(forced.computed, 3);
        assert_eq!(fs::read(&forced.results_csv).unwrap(), bytes);
        assert!(trace_path(tmp.path(), 0).exists());
    }
}
