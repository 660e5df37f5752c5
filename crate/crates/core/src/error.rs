use thiserror::Error;

use crate::graph::NodeId;

/// Errors raised anywhere in the library.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("node {node} out of range for graph with {p} nodes")]
    NodeOutOfRange { node: NodeId, p: usize },

    #[error("self-loop on node {0}")]
    SelfLoop(NodeId),

    #[error("edge {0} - {1} listed more than once")]
    DuplicateEdge(NodeId, NodeId),

    #[error("directed part contains a cycle")]
    Cycle,

    #[error("graph is not chordal")]
    NotChordal,

    #[error("graph is not connected")]
    Disconnected,

    #[error("{what}: size {got} exceeds the cap of {limit}")]
    CapExceeded {
        what: &'static str,
        limit: usize,
        got: usize,
    },

    #[error("node set is not a maximal clique")]
    NotMaximalClique,

    #[error("ordering does not permute the clique nodes")]
    InvalidPermutation,

    #[error("cannot orient {0} -> {1}: edge is absent or already oriented the other way")]
    CannotOrient(NodeId, NodeId),

    #[error("parse error on line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid model: {0}")]
    InvalidModel(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("instance is inconsistent: {0}")]
    InconsistentInstance(String),

    #[error("missing pairing: {0}")]
    MissingPairing(String),

    #[error("io error: {0}")]
    Io(String),
}

impl From<std::io::Error> for Error {
    fn from(e: std::io::Error) -> Self {
        Error::Io(e.to_string())
    }
}

impl From<serde_json::Error> for Error {
    fn from(e: serde_json::Error) -> Self {
        Error::Parse {
            line: e.line(),
            msg: e.to_string(),
        }
    }
}

pub type Result<T> = std::result::Result<T, Error>;
