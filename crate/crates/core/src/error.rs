use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("invalid simulation config: {0}")]
    InvalidConfig(String),

    #[error("drive index {index} out of range (model has {len} drives)")]
    NoSuchDrive { index: usize, len: usize },

    #[error("dephasing rate {0} requires the Bloch-equation path")]
    DephasingNeedsBloch(f64),

    #[error("trajectory is empty")]
    EmptyTrajectory,

    #[error("no oscillation detected: {0}")]
    NoOscillation(String),

    #[error("domain error: {0}")]
    Domain(String),

    #[error("eigensolver failed: {0}")]
    Eigensolver(String),

    #[error("cell (rf #{row}, mw #{col}): {source}")]
    Cell {
        row: usize,
        col: usize,
        #[source]
        source: Box<Error>,
    },

    #[error("axis mismatch: {0}")]
    AxisMismatch(String),

    #[error("row {0} has zero mean")]
    ZeroRowMean(usize),

    #[error("malformed file: {0}")]
    Format(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),
}
