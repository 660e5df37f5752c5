//! Noiseless linear structural causal models.
//!
//! `X_j = b_j + a_j [j in I] + sum_k w_kj X_k`. Only means matter, so they are
//! computed exactly by forward substitution in topological order.

use std::collections::BTreeMap;

use rand::seq::index::sample;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::graph::{Dag, NodeId, NodeSet};
use crate::EPS;

pub type MeanVector = Vec<f64>;

pub const WEIGHT_RANGE: (f64, f64) = (0.25, 1.0);
pub const SHIFT_RANGE: (f64, f64) = (0.5, 2.0);
pub const NOISE_MEAN_RANGE: (f64, f64) = (-1.0, 1.0);
const MAX_RESAMPLES: usize = 1000;
// sampled mean changes are kept well clear of the comparison tolerance
const GAP_FLOOR: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct LinearScm {
    dag: Dag,
    /// `weights[j][x]` belongs to the edge `dag.parents(j)[x] -> j`.
    weights: Vec<Vec<f64>>,
    noise_mean: Vec<f64>,
}

impl LinearScm {
    pub fn new(dag: Dag, weights: &BTreeMap<(NodeId, NodeId), f64>, noise_mean: Vec<f64>) -> Result<Self> {
        let p = dag.p();
        if noise_mean.len() != p {
            return Err(Error::InvalidModel(format!(
                "noise mean has length {}, expected {p}",
                noise_mean.len()
            )));
        }
        if noise_mean.iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidModel("non-finite noise mean".into()));
        }
        if weights.len() != dag.edge_count() {
            return Err(Error::InvalidModel("weights must be given for exactly the DAG edges".into()));
        }
        let mut w = vec![Vec::new(); p];
        for j in 0..p {
            for &k in dag.parents(j) {
                let v = *weights
                    .get(&(k, j))
                    .ok_or_else(|| Error::InvalidModel(format!("missing weight for edge {k} -> {j}")))?;
                if !v.is_finite() || v == 0.0 {
                    return Err(Error::InvalidModel(format!("weight on {k} -> {j} must be finite and nonzero")));
                }
                w[j].push(v);
            }
        }
        Ok(LinearScm {
            dag,
            weights: w,
            noise_mean,
        })
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn p(&self) -> usize {
        self.dag.p()
    }

    pub fn noise_mean(&self) -> &[f64] {
        &self.noise_mean
    }

    pub fn weight(&self, k: NodeId, j: NodeId) -> Option<f64> {
        let x = self.dag.parents(j).binary_search(&k).ok()?;
        Some(self.weights[j][x])
    }

    pub fn weight_map(&self) -> BTreeMap<(NodeId, NodeId), f64> {
        let mut m = BTreeMap::new();
        for j in 0..self.p() {
            for (x, &k) in self.dag.parents(j).iter().enumerate() {
                m.insert((k, j), self.weights[j][x]);
            }
        }
        m
    }

    fn parent_term(&self, j: NodeId, mu: &[f64]) -> f64 {
        self.dag
            .parents(j)
            .iter()
            .zip(&self.weights[j])
            .map(|(&k, &w)| w * mu[k])
            .sum()
    }
}

/// Targets with their nonzero shift values.
#[derive(Debug, Clone, PartialEq, Default, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ShiftIntervention {
    shifts: BTreeMap<NodeId, f64>,
}

impl ShiftIntervention {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<I: IntoIterator<Item = (NodeId, f64)>>(pairs: I) -> Result<Self> {
        let mut s = Self::new();
        for (v, a) in pairs {
            if a == 0.0 || !a.is_finite() {
                return Err(Error::InvalidArgument(format!("shift on node {v} must be finite and nonzero")));
            }
            if s.shifts.insert(v, a).is_some() {
                return Err(Error::InvalidArgument(format!("node {v} shifted twice")));
            }
        }
        Ok(s)
    }

    /// Adds `a` to the shift on `v`, dropping the entry if it cancels.
    pub fn add(&mut self, v: NodeId, a: f64) {
        let e = self.shifts.entry(v).or_insert(0.0);
        *e += a;
        if *e == 0.0 {
            self.shifts.remove(&v);
        }
    }

    /// Composition of two shifts: values on shared targets add up.
    pub fn combined(&self, other: &ShiftIntervention) -> ShiftIntervention {
        let mut out = self.clone();
        for (&v, &a) in &other.shifts {
            out.add(v, a);
        }
        out
    }

    pub fn get(&self, v: NodeId) -> Option<f64> {
        self.shifts.get(&v).copied()
    }

    pub fn targets(&self) -> NodeSet {
        self.shifts.keys().copied().collect()
    }

    pub fn len(&self) -> usize {
        self.shifts.len()
    }

    pub fn is_empty(&self) -> bool {
        self.shifts.is_empty()
    }

    pub fn iter(&self) -> impl Iterator<Item = (NodeId, f64)> + '_ {
        self.shifts.iter().map(|(&v, &a)| (v, a))
    }

    /// Same targets, and every value within `tol`.
    pub fn approx_eq(&self, other: &ShiftIntervention, tol: f64) -> bool {
        self.targets() == other.targets() && self.iter().all(|(v, a)| (a - other.shifts[&v]).abs() < tol)
    }

    /// Largest absolute value difference, or `None` if the target sets differ.
    pub fn max_abs_error(&self, other: &ShiftIntervention) -> Option<f64> {
        (self.targets() == other.targets())
            .then(|| self.iter().map(|(v, a)| (a - other.shifts[&v]).abs()).fold(0.0, f64::max))
    }
}

pub fn observational_mean(scm: &LinearScm) -> MeanVector {
    interventional_mean(scm, &ShiftIntervention::new())
}

pub fn interventional_mean(scm: &LinearScm, shift: &ShiftIntervention) -> MeanVector {
    let mut mu = vec![0.0; scm.p()];
    for &j in scm.dag.topological_order() {
        mu[j] = scm.noise_mean[j] + shift.get(j).unwrap_or(0.0) + scm.parent_term(j, &mu);
    }
    mu
}

/// The unique shift intervention whose mean is `q`, built by a topological
/// sweep that fixes each mismatched node as it is reached.
pub fn solve_matching_known_dag(scm: &LinearScm, q: &[f64]) -> ShiftIntervention {
    assert_eq!(q.len(), scm.p(), "target mean has the wrong length");
    let mut mu = vec![0.0; scm.p()];
    let mut out = ShiftIntervention::new();
    for &j in scm.dag.topological_order() {
        let base = scm.noise_mean[j] + scm.parent_term(j, &mu);
        if (base - q[j]).abs() > EPS {
            let a = q[j] - base;
            out.shifts.insert(j, a);
            mu[j] = base + a;
        } else {
            mu[j] = base;
        }
    }
    out
}

/// Whether `mean` has the node set `T = targets + descendants(targets)` as its
/// changed set relative to `base`.
pub(crate) fn mean_faithful(dag: &Dag, targets: &NodeSet, base: &[f64], mean: &[f64]) -> bool {
    let mut affected = dag.descendants_of(targets.iter().copied());
    affected.extend(targets.iter().copied());
    (0..dag.p()).all(|i| ((mean[i] - base[i]).abs() > EPS) == affected.contains(&i))
}

#[derive(Debug, Clone, PartialEq)]
pub struct ProblemInstance {
    pub scm: LinearScm,
    pub true_matching: ShiftIntervention,
    pub q_mean: MeanVector,
    pub seed: u64,
}

impl ProblemInstance {
    pub fn new(scm: LinearScm, true_matching: ShiftIntervention, seed: u64) -> Self {
        let q_mean = interventional_mean(&scm, &true_matching);
        ProblemInstance {
            scm,
            true_matching,
            q_mean,
            seed,
        }
    }

    pub fn p(&self) -> usize {
        self.scm.p()
    }
}

fn signed(rng: &mut ChaCha8Rng, (lo, hi): (f64, f64)) -> f64 {
    let m = rng.gen_range(lo..=hi);
    if rng.gen_bool(0.5) {
        m
    } else {
        -m
    }
}

/// Random weights and noise means on `dag`.
pub fn sample_scm(dag: &Dag, rng: &mut ChaCha8Rng) -> LinearScm {
    let mut weights = BTreeMap::new();
    for e in dag.edges() {
        weights.insert(e, signed(rng, WEIGHT_RANGE));
    }
    let noise = (0..dag.p())
        .map(|_| rng.gen_range(NOISE_MEAN_RANGE.0..=NOISE_MEAN_RANGE.1))
        .collect();
    LinearScm::new(dag.clone(), &weights, noise).expect("sampled model is valid")
}

fn check_k(dag: &Dag, k: usize) -> Result<()> {
    if k == 0 || k > dag.p() {
        return Err(Error::InvalidArgument(format!(
            "k_targets must lie in 1..={}, got {k}",
            dag.p()
        )));
    }
    Ok(())
}

/// Random model and a random `k`-target matching intervention on `dag`.
/// Draws that break mean faithfulness are resampled.
pub fn sample_instance(dag: &Dag, k_targets: usize, seed: u64) -> Result<ProblemInstance> {
    check_k(dag, k_targets)?;
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scm = sample_scm(dag, &mut rng);
    sample_matching(scm, k_targets, seed, &mut rng)
}

/// Like [`sample_instance`] but keeps a given model.
pub fn sample_matching(scm: LinearScm, k_targets: usize, seed: u64, rng: &mut ChaCha8Rng) -> Result<ProblemInstance> {
    check_k(scm.dag(), k_targets)?;
    let base = observational_mean(&scm);
    for _ in 0..MAX_RESAMPLES {
        let targets = sample(rng, scm.p(), k_targets).into_vec();
        let shift = ShiftIntervention::from_pairs(targets.into_iter().map(|v| (v, signed(rng, SHIFT_RANGE))))?;
        let q = interventional_mean(&scm, &shift);
        let clear_gap = (0..scm.p()).all(|i| {
            let d = (q[i] - base[i]).abs();
            d <= EPS || d >= GAP_FLOOR
        });
        if clear_gap && mean_faithful(scm.dag(), &shift.targets(), &base, &q) {
            return Ok(ProblemInstance {
                scm,
                true_matching: shift,
                q_mean: q,
                seed,
            });
        }
    }
    Err(Error::InvalidModel(
        "could not draw a mean-faithful instance; the model may have cancelling paths".into(),
    ))
}

/// An instance where some target's own shift exactly cancels the mean change
/// arriving from an upstream target, so that target's mean is unchanged.
/// Needs a DAG with at least one edge and `k_targets >= 2`.
pub fn sample_violating_instance(dag: &Dag, k_targets: usize, seed: u64) -> Result<ProblemInstance> {
    check_k(dag, k_targets)?;
    if k_targets < 2 {
        return Err(Error::InvalidArgument("a cancelling instance needs at least two targets".into()));
    }
    let with_anc: Vec<NodeId> = (0..dag.p()).filter(|&j| !dag.parents(j).is_empty()).collect();
    if with_anc.is_empty() {
        return Err(Error::InvalidArgument("a cancelling instance needs at least one edge".into()));
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let scm = sample_scm(dag, &mut rng);
    let base = observational_mean(&scm);
    for _ in 0..MAX_RESAMPLES {
        let j = with_anc[rng.gen_range(0..with_anc.len())];
        let anc: Vec<NodeId> = dag.ancestors(j).into_iter().collect();
        let i = anc[rng.gen_range(0..anc.len())];
        let mut targets = NodeSet::from([i, j]);
        let rest: Vec<NodeId> = (0..dag.p()).filter(|v| !targets.contains(v)).collect();
        let extra = k_targets - 2;
        for x in sample(&mut rng, rest.len(), extra).into_iter() {
            targets.insert(rest[x]);
        }
        let mut shift = ShiftIntervention::new();
        for &v in &targets {
            if v != j {
                shift.add(v, signed(&mut rng, SHIFT_RANGE));
            }
        }
        let upstream = interventional_mean(&scm, &shift);
        let delta = upstream[j] - base[j];
        if delta.abs() < 0.1 {
            continue;
        }
        shift.add(j, -delta);
        let q = interventional_mean(&scm, &shift);
        if (q[j] - base[j]).abs() > EPS {
            continue;
        }
        return Ok(ProblemInstance {
            scm,
            true_matching: shift,
            q_mean: q,
            seed,
        });
    }
    Err(Error::InvalidModel("could not build a cancelling instance".into()))
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct InstanceFile {
    p: usize,
    edges: Vec<(usize, usize, f64)>,
    noise_mean: Vec<f64>,
    targets: BTreeMap<usize, f64>,
    q_mean: Vec<f64>,
    seed: u64,
}

/// Instance as JSON with one-based ids.
pub fn instance_to_json(inst: &ProblemInstance) -> String {
    let file = InstanceFile {
        p: inst.p(),
        edges: inst
            .scm
            .weight_map()
            .into_iter()
            .map(|((a, b), w)| (a + 1, b + 1, w))
            .collect(),
        noise_mean: inst.scm.noise_mean.clone(),
        targets: inst.true_matching.iter().map(|(v, a)| (v + 1, a)).collect(),
        q_mean: inst.q_mean.clone(),
        seed: inst.seed,
    };
    let mut s = serde_json::to_string_pretty(&file).expect("instance serializes");
    s.push('\n');
    s
}

/// Parses an instance and checks that `q_mean` is the mean under `targets`.
pub fn instance_from_json(text: &str) -> Result<ProblemInstance> {
    let f: InstanceFile = serde_json::from_str(text)?;
    let idx = |v: usize| -> Result<NodeId> {
        if v == 0 || v > f.p {
            Err(Error::InvalidModel(format!("node id {v} outside 1..={}", f.p)))
        } else {
            Ok(v - 1)
        }
    };
    let mut edges = Vec::new();
    let mut weights = BTreeMap::new();
    for &(a, b, w) in &f.edges {
        let e = (idx(a)?, idx(b)?);
        edges.push(e);
        weights.insert(e, w);
    }
    let dag = Dag::from_edges(f.p, &edges)?;
    let scm = LinearScm::new(dag, &weights, f.noise_mean)?;
    let mut pairs = Vec::new();
    for (&v, &a) in &f.targets {
        pairs.push((idx(v)?, a));
    }
    let shift = ShiftIntervention::from_pairs(pairs)?;
    if f.q_mean.len() != f.p {
        return Err(Error::InconsistentInstance("q_mean has the wrong length".into()));
    }
    let mu = interventional_mean(&scm, &shift);
    if let Some(i) = (0..f.p).find(|&i| (mu[i] - f.q_mean[i]).abs() > EPS) {
        return Err(Error::InconsistentInstance(format!(
            "q_mean[{}] = {} but the targets give {}",
            i + 1,
            f.q_mean[i],
            mu[i]
        )));
    }
    Ok(ProblemInstance {
        scm,
        true_matching: shift,
        q_mean: f.q_mean,
        seed: f.seed,
    })
}
