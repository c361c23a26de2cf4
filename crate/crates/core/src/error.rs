use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("registry mismatch: {0}")]
    RegistryMismatch(String),

    #[error("unknown world kind `{0}`")]
    UnknownWorldKind(String),

    #[error("unknown agent rule `{0}`")]
    UnknownAgentRule(String),

    #[error("tick {tick}: {source}")]
    AtTick {
        tick: i64,
        #[source]
        source: Box<Error>,
    },

    #[error("time mismatch: expected t={expected}, found t={found}")]
    TimeMismatch { expected: i64, found: i64 },

    #[error("attention capacity exceeded: {requested} > {capacity}")]
    CapacityExceeded { requested: usize, capacity: usize },

    #[error("out of range: {0}")]
    OutOfRange(String),

    #[error("tick {0} is outside the trace")]
    IndexOutOfTrace(i64),

    #[error("loop report does not match the trace: {0}")]
    LoopMismatch(String),

    #[error("empty window")]
    EmptyWindow,

    #[error("action `{0}` has no encoding")]
    EncoderMismatch(String),

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("trace format: {0}")]
    TraceFormat(String),
}

impl Error {
    pub(crate) fn at_tick(self, tick: i64) -> Error {
        match self {
            e @ Error::AtTick { .. } => e,
            e => Error::AtTick {
                tick,
                source: Box::new(e),
            },
        }
    }
}
