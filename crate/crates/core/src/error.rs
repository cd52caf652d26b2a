use thiserror::Error;

/// Errors raised across the library.
#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("matrix is not square: row {row} has {found} entries, expected {expected}")]
    NonSquare { row: usize, found: usize, expected: usize },
    #[error("matrix entry at ({row}, {col}) is {value}, expected 0 or 1")]
    NotBinary { row: usize, col: usize, value: String },
    #[error("symbol {symbol} has an empty {kind}")]
    EmptyRowOrColumn { symbol: usize, kind: &'static str },
    #[error("matrix is empty")]
    EmptyMatrix,
    #[error("matrix is not irreducible")]
    NotIrreducible,
    #[error("no convergence after {iterations} iterations (residual {residual:e})")]
    NoConvergence { iterations: usize, residual: f64 },
    #[error("integer overflow while {0}")]
    Overflow(&'static str),
    #[error("word {0:?} is not admissible")]
    InadmissibleWord(Vec<usize>),
    #[error("word of length {len} is shorter than potential depth {depth}")]
    WordTooShort { len: usize, depth: usize },
    #[error("finite window exhausted while evolving by {0}")]
    WindowExhausted(f64),
    #[error("bisection bracket failure: {0}")]
    BracketFailure(String),
    #[error("vertex {vertex} has degree {degree} < 3")]
    DegreeTooLow { vertex: usize, degree: usize },
    #[error("graph is not connected")]
    Disconnected,
    #[error("edge lengths are not all equal")]
    UnequalLengths,
    #[error("alpha {alpha} is not below systole/8 = {limit}")]
    AlphaTooLarge { alpha: f64, limit: f64 },
    #[error("geodesic endpoints coincide")]
    DegenerateEndpoints,
    #[error("point {0} lies outside the open unit disk")]
    OutsideDisk(String),
    #[error("endpoint pair misses a unit ball: {0}")]
    NotInPartial(String),
    #[error("point is not in the flow box: {0}")]
    NotInFlowBox(String),
    #[error("no return within the allowed window: {0}")]
    NoReturn(String),
    #[error("transition {from} -> {to} could not be certified by sampling")]
    UncertifiedTransition { from: usize, to: usize },
    #[error("invalid argument: {0}")]
    InvalidArgument(String),
    #[error("parse error at line {line}, column {col}: {msg}")]
    Parse { line: usize, col: usize, msg: String },
}

pub type Result<T> = std::result::Result<T, Error>;
