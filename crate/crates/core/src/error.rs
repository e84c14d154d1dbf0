use thiserror::Error;

/// Crate-wide error type. Input-shaped problems (bad vectors, malformed
/// files, impossible configs) are distinguished from structural problems
/// (tree invariant violations) so callers can map them to exit codes.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty feature vector")]
    EmptyVector,
    #[error("non-finite entry at component {index}")]
    NonFinite { index: usize },
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("zero vector cannot be normalized")]
    ZeroVector,
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error("coincident pivots: internal nodes require d(p1, p2) > 0")]
    DegeneratePivot,
    #[error("structural error: {0}")]
    Structural(String),
    #[error("degenerate partition: all points identical")]
    DegeneratePartition,
    #[error("bag labeled {bag} does not match profile {node}")]
    MisdirectedBag { bag: u64, node: u64 },
    #[error("oracle mirror out of sync: store holds {store} vectors, index accounts for {tree}")]
    InconsistentBaseline { store: usize, tree: usize },
    #[error("infeasible scene: {0}")]
    InfeasibleScene(String),
    #[error("{path}:{line}: {msg}")]
    Parse {
        path: String,
        line: u64,
        msg: String,
    },
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors caused by user input (files, flags, vectors) as
    /// opposed to internal invariant violations.
    pub fn is_input_error(&self) -> bool {
        !matches!(
            self,
            Error::DegeneratePivot
                | Error::Structural(_)
                | Error::DegeneratePartition
                | Error::MisdirectedBag { .. }
                | Error::InconsistentBaseline { .. }
        )
    }
}

pub type Result<T> = std::result::Result<T, Error>;
