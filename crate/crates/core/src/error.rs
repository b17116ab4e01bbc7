use alloc::string::String;

/// Every failure the engine can report.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("axis {axis} out of range for dimension {dim}")]
    AxisOutOfRange { axis: usize, dim: usize },

    #[error("jet shape mismatch: ({dim_a}, {order_a}) vs ({dim_b}, {order_b})")]
    JetMismatch {
        dim_a: usize,
        order_a: usize,
        dim_b: usize,
        order_b: usize,
    },

    #[error("division by a jet with zero constant term")]
    ZeroDivision,

    #[error("{func} is undefined at {value}")]
    Domain { func: &'static str, value: f64 },

    #[error("multi-index of order {requested} exceeds jet order {available}")]
    OrderOverflow { requested: usize, available: usize },

    #[error("jet order exhausted: {what} needs order {needed}, only {available} available")]
    OrderExhausted {
        what: &'static str,
        needed: usize,
        available: usize,
    },

    #[error("cannot contract slots {a} and {b}: both have the same variance")]
    SameVariance { a: usize, b: usize },

    #[error("invalid slot {slot} for a rank-{rank} tensor")]
    InvalidSlot { slot: usize, rank: usize },

    #[error("tensor shape mismatch: {0}")]
    Shape(String),

    #[error("metric is not symmetric positive definite at the base point")]
    NotPositiveDefinite,

    #[error("{what} is undefined in dimension {dim}")]
    Dimension { what: &'static str, dim: usize },

    #[error("geometry `{0}` has no potential function")]
    MissingPotential(String),

    #[error("unknown geometry `{0}`")]
    UnknownGeometry(String),

    #[error("unknown identity `{0}`")]
    UnknownIdentity(String),

    #[error("no positive definite metric after {attempts} attempts")]
    PositiveDefiniteUnattainable { attempts: usize },

    #[error("chart box is empty after shrinking by margin {margin}")]
    EmptyChart { margin: f64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("level {level} is below the minimum {min} of the potential")]
    EmptyRegion { level: f64, min: f64 },

    #[error("level {level} is not a regular value (min |grad f| = {min_grad:e})")]
    NotRegular { level: f64, min_grad: f64 },

    #[error("region does not fit inside the chart: {0}")]
    OutsideChart(String),

    #[error("no boundary parameterization for {0}")]
    BoundaryUnavailable(String),
}

pub type Result<T> = core::result::Result<T, Error>;
