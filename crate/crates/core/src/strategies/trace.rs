use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use super::PolicyKind;
use crate::graph::{NodeId, NodeSet};
use crate::minmaxc::PathMode;
use crate::scm::ShiftIntervention;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Purpose {
    Explore,
    Commit,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Step {
    /// One-based position in the run.
    pub step: usize,
    pub purpose: Purpose,
    /// Chosen exploration set, or the sources fixed by a commit.
    pub targets: NodeSet,
    /// Full shift intervention performed in this experiment.
    pub shifts: ShiftIntervention,
    /// Size, clique count and largest clique of the chain component the
    /// exploration set was drawn from.
    pub component_size: Option<usize>,
    pub r_c: Option<usize>,
    pub m_c: Option<usize>,
    pub episode: Option<usize>,
    pub path_mode: Option<PathMode>,
}

/// A stretch of exploration that ends once some source is identified.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Episode {
    pub component_size: usize,
    pub r_c: usize,
    pub m_c: usize,
    pub explores: usize,
}

impl Episode {
    /// `ceil(log2(r + 1)) * ceil((m - 1) / S)`.
    pub fn upper_bound(&self, s: usize) -> usize {
        ceil_log2(self.r_c + 1) * (self.m_c.saturating_sub(1)).div_ceil(s)
    }

    /// `ceil((m - 1) / S)`.
    pub fn lower_bound(&self, s: usize) -> usize {
        (self.m_c.saturating_sub(1)).div_ceil(s)
    }
}

pub fn ceil_log2(n: usize) -> usize {
    if n <= 1 {
        0
    } else {
        (usize::BITS - (n - 1).leading_zeros()) as usize
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    pub policy: PolicyKind,
    pub s: usize,
    pub steps: Vec<Step>,
    pub episodes: Vec<Episode>,
    pub total_interventions: usize,
    pub final_matching: ShiftIntervention,
}

impl Trace {
    pub(crate) fn new(policy: PolicyKind, s: usize) -> Self {
        Trace {
            policy,
            s,
            steps: Vec::new(),
            episodes: Vec::new(),
            total_interventions: 0,
            final_matching: ShiftIntervention::new(),
        }
    }

    pub(crate) fn push(&mut self, mut step: Step) {
        step.step = self.steps.len() + 1;
        self.steps.push(step);
        self.total_interventions = self.steps.len();
    }

    pub fn explore_count(&self) -> usize {
        self.steps.iter().filter(|s| s.purpose == Purpose::Explore).count()
    }

    pub fn commit_count(&self) -> usize {
        self.steps.iter().filter(|s| s.purpose == Purpose::Commit).count()
    }

    /// Exploration steps before the first commit.
    pub fn explores_before_first_commit(&self) -> usize {
        self.steps.iter().take_while(|s| s.purpose == Purpose::Explore).count()
    }

    /// JSON Lines: one record per step, then a summary record. Ids are
    /// one-based.
    pub fn to_jsonl(&self) -> String {
        let one_set = |s: &NodeSet| s.iter().map(|v| v + 1).collect::<Vec<_>>();
        let one_map = |s: &ShiftIntervention| s.iter().map(|(v, a)| (v + 1, a)).collect::<BTreeMap<NodeId, f64>>();
        let mut out = String::new();
        for st in &self.steps {
            let rec = serde_json::json!({
                "step": st.step,
                "purpose": st.purpose,
                "targets": one_set(&st.targets),
                "shifts": one_map(&st.shifts),
                "component_size": st.component_size,
                "r_C": st.r_c,
                "m_C": st.m_c,
                "episode": st.episode,
                "path_mode": st.path_mode,
            });
            out.push_str(&rec.to_string());
            out.push('\n');
        }
        let summary = serde_json::json!({
            "summary": true,
            "policy": self.policy,
            "S": self.s,
            "total_interventions": self.total_interventions,
            "explore": self.explore_count(),
            "commit": self.commit_count(),
            "episodes": self.episodes,
            "final_matching": one_map(&self.final_matching),
        });
        out.push_str(&summary.to_string());
        out.push('\n');
        out
    }
}
