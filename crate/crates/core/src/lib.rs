//! Causal mean matching with shift interventions.
//!
//! A hidden linear causal model is probed with shift interventions until the
//! unique intervention that moves its mean onto a desired target is found.
//! The crate holds the graph machinery, the simulator, the equivalence-class
//! computations, the target-selection optimizers, the active-learning loop
//! with its baselines, and the benchmark harness.

pub mod bench;
pub mod equivalence;
pub mod error;
pub mod graph;
pub mod minmaxc;
pub mod par;
pub mod scm;
pub mod strategies;
pub mod verify;

pub use error::{Error, Result};

/// Absolute tolerance for comparing means and shift values.
pub const EPS: f64 = 1e-9;
