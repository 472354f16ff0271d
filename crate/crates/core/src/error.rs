use thiserror::Error;

/// Errors reported by measure construction, evaluation and solving.
#[derive(Debug, Error)]
pub enum Error {
    #[error("empty input: a measure needs at least one point")]
    EmptyInput,

    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },

    #[error("weight count mismatch: {points} points but {weights} weights")]
    WeightCountMismatch { points: usize, weights: usize },

    #[error("nonpositive weight {value} at index {index}")]
    NonpositiveWeight { index: usize, value: f64 },

    #[error("non-finite coordinate at point {index}")]
    NonFiniteCoordinate { index: usize },

    #[error("direction is not a unit vector (norm {norm})")]
    NonUnitDirection { norm: f64 },

    #[error("direction must be nonzero")]
    ZeroDirection,

    #[error("alpha {alpha} outside {range}")]
    AlphaOutOfRange { alpha: f64, range: &'static str },

    #[error("measure is not concentrated on the given line")]
    NotOnLine,

    #[error("point does not lie on the measure's line")]
    PointOffLine,

    #[error("line direction undefined for a single-atom support")]
    LineDirectionUndefined,

    #[error("s_P u* + alpha u vanishes: minimizing direction undefined")]
    DegenerateDirection,

    #[error("parameter {name} out of range: {value}")]
    ParameterOutOfRange { name: &'static str, value: f64 },

    #[error("unknown builtin example `{0}` (expected one of a, b, c, d)")]
    UnknownExample(String),

    #[error("invalid sweep spec `{0}` (expected start:step:end inside [0,1))")]
    InvalidSweep(String),

    #[error("{0}")]
    Parse(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),
}
