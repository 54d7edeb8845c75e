use thiserror::Error;

pub type Result<T, E = FriError> = std::result::Result<T, E>;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum FriError {
    #[error("invalid graph family: {0}")]
    InvalidFamily(String),
    #[error("vertex index {index} out of range for a graph on {n} vertices")]
    IndexOutOfRange { index: u32, n: usize },
    #[error("self-loop at vertex {0}")]
    SelfLoop(u32),
    #[error("graph is not connected")]
    Disconnected,
    #[error("cannot parse vertex key `{0}`")]
    ParseKey(String),
    #[error("vertex `{0}` does not belong to this graph")]
    ForeignVertex(String),
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
    #[error("a walk must contain at least one vertex")]
    EmptyWalk,
    #[error("walks do not share a basepoint")]
    BasepointMismatch,
    #[error("walk of length {0} is too long for a linear-space probability; use the log-space variant")]
    WalkTooLong(usize),
    #[error("inner window is not contained in the outer window")]
    WindowNotNested,
    #[error("window must not be empty")]
    EmptyWindow,
    #[error("{0} is not an edge of the graph")]
    NotAnEdge(String),
    #[error("need at least {need} reports, got {got}")]
    TooFewReports { need: usize, got: usize },
    #[error("reports were produced with different parameters")]
    ParameterMismatch,
}
