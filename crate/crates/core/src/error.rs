use thiserror::Error;

/// Errors raised across the pipeline.
#[derive(Debug, Error)]
pub enum Error {
    #[error("invalid domain: {0}")]
    InvalidDomain(String),

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("matrix is not positive definite (pivot {pivot} = {value:e})")]
    NotPositiveDefinite { pivot: usize, value: f64 },

    #[error("inverse power iteration did not converge after {iterations} iterations (last relative change {change:e})")]
    EigenNotConverged { iterations: usize, change: f64 },

    #[error("alpha = {alpha} is not inside any working interval (t_{{k-1}}, t_k): {detail}")]
    AlphaOutOfRange { alpha: f64, detail: String },

    #[error("value {value} outside the range ({lo}, {hi}) of {what}")]
    OutOfRange {
        what: &'static str,
        value: f64,
        lo: f64,
        hi: f64,
    },

    #[error("family admissibility violated: {condition} (witness {witness})")]
    Admissibility { condition: String, witness: String },

    #[error("auxiliary solve failed at alpha = {alpha}: {reason}; trace: {trace:?}")]
    SolveFailed {
        alpha: f64,
        reason: String,
        trace: Vec<f64>,
    },

    #[error("barrier violated at alpha = {alpha}: min(u - z) = {margin:e} at node {node}")]
    BarrierViolated { alpha: f64, node: usize, margin: f64 },

    #[error("no bracket in interval {k}: increase samples or check (f4)/(f5)")]
    NoBracket { k: usize },

    #[error("interval {k}: found {found} fixed point(s), need at least two")]
    TooFewFixedPoints { k: usize, found: usize },

    #[error("bisection bracket lost in interval {k} on [{lo}, {hi}]")]
    BracketLost { k: usize, lo: f64, hi: f64 },

    #[error("fixed point at alpha = {alpha} has nonlocal residual {residual:e} above {limit:e}")]
    ResidualBreach {
        alpha: f64,
        residual: f64,
        limit: f64,
    },

    #[error("ordering violated between {left} and {right}")]
    Ordering { left: String, right: String },

    #[error("config: {0}")]
    Config(String),

    #[error(transparent)]
    Io(#[from] std::io::Error),

    #[error(transparent)]
    Json(#[from] serde_json::Error),

    #[error(transparent)]
    Csv(#[from] csv::Error),
}

pub type Result<T, E = Error> = std::result::Result<T, E>;
