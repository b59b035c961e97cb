use thiserror::Error;

/// Errors raised while building tapes or resolving windows against them.
#[derive(Debug, Error)]
pub enum TapeError {
    #[error("row {row}: {field} must be positive, got {value}")]
    NonPositiveField {
        row: usize,
        field: &'static str,
        value: f64,
    },
    #[error("row {row}: {field} is not finite")]
    NonFinite { row: usize, field: &'static str },
    #[error("row {row}: value {value} does not match price * volume = {expected}")]
    ValueMismatch {
        row: usize,
        value: f64,
        expected: f64,
    },
    #[error("row {row}: time step {found} differs from spacing {expected}")]
    NonUniformSpacing {
        row: usize,
        expected: f64,
        found: f64,
    },
    #[error("row {row}: {message}")]
    Row { row: usize, message: String },
    #[error("tape is empty")]
    EmptyTape,
    #[error("header must contain time,price,volume[,value]; got {0:?}")]
    BadHeader(String),
    #[error("tick spacing must be positive and finite, got {0}")]
    InvalidEpsilon(f64),
    #[error("{prices} prices but {volumes} volumes")]
    LengthMismatch { prices: usize, volumes: usize },
    #[error("window needs at least 2 ticks, got {0}")]
    WindowTooShort(usize),
    #[error("return lag must be at least 1 tick")]
    ZeroLag,
    #[error("window start {start} has no price history for lag {lag}")]
    InsufficientHistory { start: usize, lag: usize },
    #[error("window {start}..{} exceeds tape length {len}", start + count)]
    WindowOutOfRange {
        start: usize,
        count: usize,
        len: usize,
    },
    #[error(transparent)]
    Csv(#[from] csv::Error),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Errors from the moment and correlation estimators.
#[derive(Debug, Error)]
pub enum StatsError {
    #[error("series is empty")]
    EmptySeries,
    #[error("moment order must be at least 1")]
    OrderZero,
    #[error("paired windows must have equal length, got {0} and {1}")]
    MismatchedWindows(usize, usize),
    #[error("second window starts after the first (shift would be negative)")]
    NegativeShift,
    #[error("paired windows belong to different tapes")]
    DifferentTapes,
    #[error(transparent)]
    Tape(#[from] TapeError),
}

/// Errors from characteristic-function fitting and density inversion.
#[derive(Debug, Error)]
pub enum CharFnError {
    #[error("approximation order must be at least 1")]
    OrderZero,
    #[error("moment {0} is not finite")]
    NonFiniteMoment(usize),
    #[error("damping requires b >= 0 and 2q > m (b = {b}, q = {q}, m = {m})")]
    InvalidDamping { b: f64, q: u32, m: usize },
    #[error("exponential form is not integrable without damping (set b > 0)")]
    NotIntegrable,
    #[error("|Q_m| = {edge_modulus:e} at the quadrature edge x = {extent}")]
    QuadratureDivergence { extent: f64, edge_modulus: f64 },
    #[error("variance must be positive, got {0}")]
    NonPositiveVariance(f64),
    #[error("invalid grid: {0}")]
    InvalidGrid(String),
}

/// Errors from the synthetic tape generator.
#[derive(Debug, Error)]
pub enum SynthError {
    #[error("invalid generator config: {0}")]
    InvalidConfig(String),
    #[error(transparent)]
    Tape(#[from] TapeError),
}

/// Errors from the reference oracle.
#[derive(Debug, Error)]
pub enum OracleError {
    #[error("unknown statistic {0:?}")]
    UnknownStatistic(String),
    #[error("window: {0}")]
    Window(String),
}
