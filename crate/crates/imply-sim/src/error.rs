use thiserror::Error;

/// Crate-wide error type.
#[derive(Debug, Error)]
pub enum Error {
    /// A physical parameter set violates one of its declared invariants.
    #[error("invalid parameters: {0}")]
    InvalidParams(String),

    /// A circuit configuration violates one of the drive-window relations.
    /// The message names the violated relation.
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    /// The nodal system has no unique solution; names the offending node.
    #[error("singular network at node {0}")]
    SingularNetwork(String),

    /// A plot overlay was built on different axes than the area it targets.
    #[error("axis mismatch: {0}")]
    AxisMismatch(String),

    /// A parameter document failed to parse.
    #[error("config parse error at line {line}: {msg}")]
    ConfigParse { line: usize, msg: String },

    #[error("unknown config key: {0}")]
    UnknownKey(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}

pub type Result<T> = std::result::Result<T, Error>;
