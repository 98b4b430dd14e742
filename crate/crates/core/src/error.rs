//! Crate-wide error type.

use thiserror::Error;

/// Errors produced by construction, evaluation, and iteration.
#[derive(Debug, Clone, Error)]
pub enum Error {
    #[error("atom {index} at t = {location} lies outside [0, 1]")]
    AtomOutOfRange { index: usize, location: f64 },

    #[error("atom {index} at t = {location} does not strictly increase past its predecessor")]
    AtomNotIncreasing { index: usize, location: f64 },

    #[error("atom {index} at t = {location} has zero weight")]
    AtomZeroWeight { index: usize, location: f64 },

    #[error("density breakpoint {value} lies outside [0, 1]")]
    BreakpointOutOfRange { value: f64 },

    #[error("integration bounds are reversed: a = {a} > b = {b}")]
    ReversedInterval { a: f64, b: f64 },

    #[error("quadrature order must be positive")]
    ZeroQuadratureOrder,

    #[error("integrand returned a non-finite value at s = {at}")]
    NonFiniteSample { at: f64 },

    #[error(
        "refinement stalled before reaching relative tolerance {target:e}: \
         best value {value} with error estimate {estimate:e}"
    )]
    ToleranceNotMet {
        value: f64,
        estimate: f64,
        target: f64,
    },

    #[error("alpha must lie in (2,3], got {0}")]
    AlphaOutOfRange(f64),

    #[error("eta must lie in (0,1), got {0}")]
    EtaOutOfRange(f64),

    #[error("mu must be nonnegative, got {0}")]
    MuNegative(f64),

    #[error("beta must be nonnegative, got {0}")]
    BetaNegative(f64),

    #[error("argument {name} = {value} lies outside [0, 1]")]
    OutOfUnitInterval { name: &'static str, value: f64 },

    #[error("hypothesis H1 violated: Lambda = {0} is not below 1")]
    H1Violated(f64),

    #[error("grid nodes must be strictly increasing within [0,1] and include both endpoints")]
    InvalidGrid,

    #[error("grid has {nodes} nodes but {values} values")]
    GridLengthMismatch { nodes: usize, values: usize },

    #[error("interpolation degree must be at least 1")]
    ZeroDegree,

    #[error(
        "power iteration did not converge within {iterations} iterations: \
         best estimate r = {r} with residual {residual:e}"
    )]
    PowerIterationStalled {
        r: f64,
        residual: f64,
        iterations: usize,
    },

    #[error("matrix must be square with positive size, got {rows} rows and {len} entries")]
    BadMatrixShape { rows: usize, len: usize },

    #[error("matrix entry ({i}, {j}) is negative: {value}")]
    NegativeMatrixEntry { i: usize, j: usize, value: f64 },

    #[error("scale factor must be positive, got {0}")]
    NonPositiveScale(f64),

    #[error("Nystrom discretization needs at least 8 nodes, got {0}")]
    NystromTooCoarse(usize),

    #[error("envelope parameter {name} must be strictly positive, got {value}")]
    EnvelopeNotPositive { name: &'static str, value: f64 },

    #[error("syntax error at position {position}: {message}")]
    Syntax { position: usize, message: String },

    #[error("unknown variable `{name}` at position {position}")]
    UnknownVariable { name: String, position: usize },

    #[error("unknown function `{name}` at position {position}")]
    UnknownFunction { name: String, position: usize },

    #[error("missing binding for variable `{0}`")]
    MissingBinding(String),

    #[error("domain error evaluating {op}: {detail}")]
    EvalDomain { op: &'static str, detail: String },

    #[error("expression evaluated to a non-finite value")]
    NonFiniteResult,

    #[error("nonlinearity evaluation failed at (s, u(s)) = ({s}, {u}): {source}")]
    NonlinearityEval {
        s: f64,
        u: f64,
        #[source]
        source: Box<Error>,
    },
}

pub type Result<T> = std::result::Result<T, Error>;
