use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("parse error: {0}")]
    Parse(String),

    #[error("configuration error: {0}")]
    Config(String),

    #[error("basis enumeration did not stabilize within length bound {bound}")]
    NotStabilized { bound: usize },

    #[error("orbit hom scan window exceeded for {context}")]
    ScanWindowExceeded { context: String },

    #[error("object {0} is not cluster tilting: {1}")]
    NotClusterTilting(String, String),

    #[error("splicing tower of {object} ended outside add M at stage {stage}")]
    SplicingFailure { object: String, stage: usize },

    #[error("equivalent characterizations disagree: {0}")]
    EquivalenceViolation(String),

    #[error("characterization mismatch: {0}")]
    CharacterizationMismatch(String),

    #[error("bar truncation length {0} too small (need at least 2)")]
    WindowTooSmall(usize),

    #[error("requested window exceeds resolution depth: {0}")]
    WindowTooDeep(String),

    #[error("generator degrees outside the allowed band: {0}")]
    ShapeError(String),

    #[error("naming calibration failed: {0}")]
    Calibration(String),

    #[error("internal invariant violated: {0}")]
    Invariant(String),

    #[error("unknown object name `{0}`")]
    UnknownObject(String),

    #[error("io error: {0}")]
    Io(#[from] std::io::Error),
}
