//! Crate-wide error type.

use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    /// 1-indexed slice bounds violated (`1 <= p <= q+1` and `q <= len`).
    #[error("slice range {p}:{q} out of bounds for sequence of length {len}")]
    Range { p: usize, q: usize, len: usize },

    /// Malformed input file or inline definition; `field` names the offender.
    #[error("parse error in {field}: {msg}")]
    Parse { field: String, msg: String },

    /// Scoring context does not resolve against the model's knowledge.
    #[error("unknown scoring context: {0}")]
    Context(String),

    /// Prefix tree exceeds the packed-token budget even after the retry.
    #[error("prefix tree of {nodes} nodes exceeds max_tree_tokens={max}")]
    TreeSize { nodes: usize, max: usize },

    /// A metric is undefined on the given input (e.g. empty trace).
    #[error("metric undefined: {0}")]
    Metric(String),

    /// Invalid configuration value.
    #[error("config error: {0}")]
    Config(String),
}

impl Error {
    pub fn parse(field: impl Into<String>, msg: impl Into<String>) -> Self {
        Error::Parse { field: field.into(), msg: msg.into() }
    }
}
