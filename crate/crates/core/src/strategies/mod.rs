//! The active matching loop, its target-selection policies, and the
//! baselines it is compared against.

mod active;
mod baselines;
mod env;
mod trace;

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::scm::ProblemInstance;

pub use active::{run_active_matching, select_targets, upstream_rand_policy, EXPLORE_SHIFT};
pub use baselines::{coloring_baseline, greedy_coloring, oracle_baseline};
pub use env::Environment;
pub use trace::{ceil_log2, Episode, Purpose, Step, Trace};

#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum PolicyKind {
    Oracle,
    Coloring,
    UpstreamRand,
    CliqueTree,
    Supermodular,
}

impl PolicyKind {
    pub const ALL: [PolicyKind; 5] = [
        PolicyKind::Oracle,
        PolicyKind::Coloring,
        PolicyKind::UpstreamRand,
        PolicyKind::CliqueTree,
        PolicyKind::Supermodular,
    ];

    pub fn name(self) -> &'static str {
        match self {
            PolicyKind::Oracle => "oracle",
            PolicyKind::Coloring => "coloring",
            PolicyKind::UpstreamRand => "upstream_rand",
            PolicyKind::CliqueTree => "clique_tree",
            PolicyKind::Supermodular => "supermodular",
        }
    }

    /// Whether repeated runs with different seeds can differ.
    pub fn is_randomized(self) -> bool {
        matches!(self, PolicyKind::UpstreamRand | PolicyKind::CliqueTree)
    }

    /// Whether the policy plugs into the active loop.
    pub fn is_active(self) -> bool {
        matches!(
            self,
            PolicyKind::UpstreamRand | PolicyKind::CliqueTree | PolicyKind::Supermodular
        )
    }
}

impl fmt::Display for PolicyKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for PolicyKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        PolicyKind::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown policy `{s}`")))
    }
}

/// Runs any policy on `instance`. `seed` drives the policy's own randomness.
pub fn run_policy(instance: &ProblemInstance, policy: PolicyKind, s: usize, seed: u64) -> Trace {
    match policy {
        PolicyKind::Oracle => oracle_baseline(instance),
        PolicyKind::Coloring => coloring_baseline(instance, s),
        _ => run_active_matching(instance, policy, s, seed),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn names_round_trip() {
        for k in PolicyKind::ALL {
            assert_eq!(k.name().parse::<PolicyKind>().unwrap(), k);
            assert_eq!(serde_json::to_string(&k).unwrap(), format!("\"{}\"", k.name()));
        }
        assert!("greedy".parse::<PolicyKind>().is_err());
    }
}
