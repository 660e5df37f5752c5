//! Choosing at most `S` intervention targets inside a chordal chain
//! component so that the largest piece left after cutting them out is small.
//!
//! All functions take the component as its own graph with nodes `0..m`.

mod brute;
mod clique_tree;
mod objective;
mod paths;
mod saturate;

use serde::{Deserialize, Serialize};

use crate::graph::NodeSet;

pub use brute::{brute_force_minmaxc, BRUTE_FORCE_MAX_NODES};
pub use clique_tree::{central_clique, clique_tree_plan, clique_tree_policy, spared_node};
pub use objective::{exact_objective, Objective};
pub use paths::{
    dag_path_counts, simple_path_counts, simple_path_counts_budgeted, PathCounts, PathMode, DEFAULT_PATH_BUDGET,
    DEFAULT_PATH_CAP,
};
pub use saturate::{saturate, surrogate_value, surrogate_vector, Surrogate};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Method {
    CliqueTree,
    Saturate,
    Brute,
    Random,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeparatorChoice {
    pub nodes: NodeSet,
    /// Exact objective for `clique_tree`, `brute` and `random`; the surrogate
    /// value for `saturate`.
    pub objective: f64,
    pub method: Method,
    /// Path-count mode used by `saturate`.
    pub path_mode: Option<PathMode>,
}
