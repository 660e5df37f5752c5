use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use super::generators::GraphType;
use crate::error::{Error, Result};
use crate::strategies::PolicyKind;

pub const CSV_HEADER: &str = "schema,graph_type,p,instance_id,seed,policy,S,k_targets,total,oracle_total,extra,wall_ms,repeat";
pub const SCHEMA_VERSION: u32 = 1;

#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct ResultRow {
    pub graph_type: GraphType,
    pub p: usize,
    pub instance_id: usize,
    pub seed: u64,
    pub policy: PolicyKind,
    pub s: usize,
    pub k_targets: usize,
    pub total: usize,
    pub oracle_total: usize,
    pub extra: i64,
    pub wall_ms: u64,
    pub repeat: usize,
}

impl ResultRow {
    pub fn to_csv_line(&self) -> String {
        format!(
            "{SCHEMA_VERSION},{},{},{},{},{},{},{},{},{},{},{},{}",
            self.graph_type,
            self.p,
            self.instance_id,
            self.seed,
            self.policy,
            self.s,
            self.k_targets,
            self.total,
            self.oracle_total,
            self.extra,
            self.wall_ms,
            self.repeat
        )
    }

    fn from_fields(f: &[&str], line: usize) -> Result<Self> {
        let bad = |what: &str| Error::Parse {
            line,
            msg: format!("bad {what}"),
        };
        if f.len() != 13 {
            return Err(Error::Parse {
                line,
                msg: format!("expected 13 fields, got {}", f.len()),
            });
        }
        if f[0] != SCHEMA_VERSION.to_string() {
            return Err(bad("schema version"));
        }
        Ok(ResultRow {
            graph_type: f[1].parse().map_err(|_| bad("graph_type"))?,
            p: f[2].parse().map_err(|_| bad("p"))?,
            instance_id: f[3].parse().map_err(|_| bad("instance_id"))?,
            seed: f[4].parse().map_err(|_| bad("seed"))?,
            policy: f[5].parse().map_err(|_| bad("policy"))?,
            s: f[6].parse().map_err(|_| bad("S"))?,
            k_targets: f[7].parse().map_err(|_| bad("k_targets"))?,
            total: f[8].parse().map_err(|_| bad("total"))?,
            oracle_total: f[9].parse().map_err(|_| bad("oracle_total"))?,
            extra: f[10].parse().map_err(|_| bad("extra"))?,
            wall_ms: f[11].parse().map_err(|_| bad("wall_ms"))?,
            repeat: f[12].parse().map_err(|_| bad("repeat"))?,
        })
    }

    /// Columns that identify one paired comparison.
    pub fn pair_key(&self) -> (GraphType, usize, usize, u64, usize, usize) {
        (self.graph_type, self.p, self.instance_id, self.seed, self.s, self.k_targets)
    }
}

pub fn rows_to_csv(rows: &[ResultRow]) -> String {
    let mut out = String::from(CSV_HEADER);
    out.push('\n');
    for r in rows {
        out.push_str(&r.to_csv_line());
        out.push('\n');
    }
    out
}

pub fn parse_csv(text: &str) -> Result<Vec<ResultRow>> {
    let mut lines = text.lines().enumerate();
    match lines.next() {
        Some((_, h)) if h == CSV_HEADER => {}
        _ => {
            return Err(Error::Parse {
                line: 1,
                msg: "unexpected CSV header".into(),
            })
        }
    }
    lines
        .filter(|(_, l)| !l.trim().is_empty())
        .map(|(i, l)| ResultRow::from_fields(&l.split(',').collect::<Vec<_>>(), i + 1))
        .collect()
}

/// `extra` averaged over repeats, per paired key.
fn mean_extra_by_key(rows: &[ResultRow], policy: PolicyKind) -> BTreeMap<(GraphType, usize, usize, u64, usize, usize), f64> {
    let mut acc: BTreeMap<_, (f64, usize)> = BTreeMap::new();
    for r in rows.iter().filter(|r| r.policy == policy) {
        let e = acc.entry(r.pair_key()).or_default();
        e.0 += r.extra as f64;
        e.1 += 1;
    }
    acc.into_iter().map(|(k, (s, n))| (k, s / n as f64)).collect()
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct RateSummary {
    pub policy: PolicyKind,
    pub mean_rate: f64,
    pub groups: usize,
    /// Groups skipped because the random baseline needed no extra
    /// interventions.
    pub excluded: usize,
}

/// Mean of `(extra(policy) - extra(upstream_rand)) / extra(upstream_rand)`
/// over paired instances.
pub fn relative_rate(rows: &[ResultRow], policy: PolicyKind) -> Result<RateSummary> {
    let base = mean_extra_by_key(rows, PolicyKind::UpstreamRand);
    let strat = mean_extra_by_key(rows, policy);
    if base.is_empty() {
        return Err(Error::MissingPairing("no upstream_rand rows".into()));
    }
    if strat.keys().ne(base.keys()) {
        return Err(Error::MissingPairing(format!(
            "{policy} and upstream_rand cover different instances"
        )));
    }
    let mut sum = 0.0;
    let mut groups = 0;
    let mut excluded = 0;
    for (k, &b) in &base {
        if b == 0.0 {
            excluded += 1;
            continue;
        }
        sum += (strat[k] - b) / b;
        groups += 1;
    }
    Ok(RateSummary {
        policy,
        mean_rate: if groups == 0 { 0.0 } else { sum / groups as f64 },
        groups,
        excluded,
    })
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct Aggregate {
    pub graph_type: GraphType,
    pub p: usize,
    pub policy: PolicyKind,
    pub s: usize,
    pub k_targets: usize,
    pub runs: usize,
    pub mean_total: f64,
    pub mean_extra: f64,
    pub std_extra: f64,
}

pub fn aggregate(rows: &[ResultRow]) -> Vec<Aggregate> {
    let mut groups: BTreeMap<(GraphType, usize, usize, usize, PolicyKind), Vec<&ResultRow>> = BTreeMap::new();
    for r in rows {
        groups
            .entry((r.graph_type, r.p, r.s, r.k_targets, r.policy))
            .or_default()
            .push(r);
    }
    groups
        .into_iter()
        .map(|((graph_type, p, s, k_targets, policy), rs)| {
            let n = rs.len() as f64;
            let mean_total = rs.iter().map(|r| r.total as f64).sum::<f64>() / n;
            let mean_extra = rs.iter().map(|r| r.extra as f64).sum::<f64>() / n;
            let var = rs.iter().map(|r| (r.extra as f64 - mean_extra).powi(2)).sum::<f64>() / n;
            Aggregate {
                graph_type,
                p,
                policy,
                s,
                k_targets,
                runs: rs.len(),
                mean_total,
                mean_extra,
                std_extra: var.sqrt(),
            }
        })
        .collect()
}

pub fn aggregate_csv(aggs: &[Aggregate]) -> String {
    let mut out = String::from("graph_type,p,policy,S,k_targets,runs,mean_total,mean_extra,std_extra\n");
    for a in aggs {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{:.4},{:.4},{:.4}",
            a.graph_type, a.p, a.policy, a.s, a.k_targets, a.runs, a.mean_total, a.mean_extra, a.std_extra
        );
    }
    out
}

/// Plain-text table of the aggregates plus relative rates where an
/// upstream_rand pairing exists. The coloring policy is a coloring-style
/// approximation of that baseline and is labelled as such.
pub fn summary_table(rows: &[ResultRow]) -> String {
    let aggs = aggregate(rows);
    let mut out = String::new();
    let _ = writeln!(
        out,
        "{:<16} {:>5} {:<16} {:>3} {:>5} {:>5} {:>10} {:>10} {:>10}",
        "graph_type", "p", "policy", "S", "k", "runs", "total", "extra", "std_extra"
    );
    for a in &aggs {
        let label = if a.policy == PolicyKind::Coloring {
            "coloring-style".to_string()
        } else {
            a.policy.to_string()
        };
        let _ = writeln!(
            out,
            "{:<16} {:>5} {:<16} {:>3} {:>5} {:>5} {:>10.3} {:>10.3} {:>10.3}",
            a.graph_type.name(),
            a.p,
            label,
            a.s,
            a.k_targets,
            a.runs,
            a.mean_total,
            a.mean_extra,
            a.std_extra
        );
    }
    let present: std::collections::BTreeSet<PolicyKind> = rows.iter().map(|r| r.policy).collect();
    if present.contains(&PolicyKind::UpstreamRand) {
        let _ = writeln!(out, "\nrelative rate vs upstream_rand (mean over paired instances)");
        for policy in present.iter().copied().filter(|&p| p != PolicyKind::UpstreamRand) {
            match relative_rate(rows, policy) {
                Ok(r) => {
                    let _ = writeln!(
                        out,
                        "{:<16} {:>+9.4}  groups={} excluded={}",
                        policy.to_string(),
                        r.mean_rate,
                        r.groups,
                        r.excluded
                    );
                }
                Err(e) => {
                    let _ = writeln!(out, "{:<16} unavailable: {e}", policy.to_string());
                }
            }
        }
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;

    fn row(policy: PolicyKind, id: usize, extra: i64) -> ResultRow {
        ResultRow {
            graph_type: GraphType::BarabasiAlbert,
            p: 10,
            instance_id: id,
            seed: 1,
            policy,
            s: 1,
            k_targets: 3,
            total: 5 + extra as usize,
            oracle_total: 5,
            extra,
            wall_ms: 0,
            repeat: 0,
        }
    }

    #[test]
    fn rate_arithmetic() {
        let rows = vec![row(PolicyKind::UpstreamRand, 0, 3), row(PolicyKind::CliqueTree, 0, 2)];
        let r = relative_rate(&rows, PolicyKind::CliqueTree).unwrap();
        assert!((r.mean_rate + 1.0 / 3.0).abs() < 1e-12);
        let same = vec![row(PolicyKind::UpstreamRand, 0, 3), row(PolicyKind::Supermodular, 0, 3)];
        assert_eq!(relative_rate(&same, PolicyKind::Supermodular).unwrap().mean_rate, 0.0);
    }

    #[test]
    fn zero_baseline_excluded_and_pairing_required() {
        let rows = vec![
            row(PolicyKind::UpstreamRand, 0, 0),
            row(PolicyKind::CliqueTree, 0, 1),
            row(PolicyKind::UpstreamRand, 1, 2),
            row(PolicyKind::CliqueTree, 1, 1),
        ];
        let r = relative_rate(&rows, PolicyKind::CliqueTree).unwrap();
        assert_eq!((r.groups, r.excluded), (1, 1));
        assert!((r.mean_rate + 0.5).abs() < 1e-12);
        let unpaired = vec![row(PolicyKind::UpstreamRand, 0, 1), row(PolicyKind::CliqueTree, 1, 1)];
        assert!(matches!(
            relative_rate(&unpaired, PolicyKind::CliqueTree),
            Err(Error::MissingPairing(_))
        ));
    }

    #[test]
    fn csv_round_trip() {
        let rows = vec![row(PolicyKind::Oracle, 0, 0), row(PolicyKind::Coloring, 2, 4)];
        let text = rows_to_csv(&rows);
        assert!(text.starts_with(CSV_HEADER));
        assert_eq!(parse_csv(&text).unwrap(), rows);
        assert!(parse_csv("nope\n").is_err());
    }
}
