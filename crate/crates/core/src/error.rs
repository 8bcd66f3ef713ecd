//! Error types shared across the library.

use thiserror::Error;

/// Errors from search-space operations.
#[derive(Debug, Error, PartialEq, Eq)]
pub enum SpaceError {
    #[error("dimension mismatch: expected {expected}, got {got}")]
    DimensionMismatch { expected: usize, got: usize },
    #[error("categorical cardinality must be >= 2 (dimension {dim} has {card})")]
    CardinalityTooSmall { dim: usize, card: usize },
    #[error("continuous bound invalid on dimension {dim}: lower must be < upper")]
    InvalidBounds { dim: usize },
    #[error("search space must have at least one dimension")]
    EmptySpace,
    #[error("ordinal metric missing for dimension {dim}")]
    MissingOrdinalMetric { dim: usize },
    #[error("ordinal level table on dimension {dim} must list one value per level")]
    BadOrdinalLevels { dim: usize },
}

/// Errors from Gaussian-process construction and fitting.
#[derive(Debug, Error)]
pub enum GpError {
    #[error("need at least {needed} training points, have {have}")]
    TooFewPoints { needed: usize, have: usize },
    #[error("targets must be nonempty")]
    EmptyTargets,
    #[error("training inputs and targets differ in length ({inputs} vs {targets})")]
    LengthMismatch { inputs: usize, targets: usize },
    #[error(
        "Cholesky factorization failed at pivot {pivot} even with jitter up to {max_jitter:e}"
    )]
    Cholesky { pivot: usize, max_jitter: f64 },
    #[error("hyperparameter fit failed: no start produced a usable likelihood")]
    FitFailed,
    #[error("kernel choice incompatible with space: {0}")]
    Kernel(String),
    #[error("model has no cached factorization; call fit or refresh first")]
    NotFitted,
    #[error(transparent)]
    Space(#[from] SpaceError),
}

/// Ask/tell protocol violations.
#[derive(Debug, Error, PartialEq)]
pub enum ProtocolError {
    #[error("ask called twice without an intervening tell")]
    AskedTwice,
    #[error("tell called with no pending ask")]
    TellWithoutAsk,
    #[error("tell received points that differ from the last ask")]
    PointMismatch,
    #[error("tell received {got} values for {expected} pending points")]
    ArityMismatch { expected: usize, got: usize },
    #[error("objective value at position {index} is not finite")]
    NonFiniteValue { index: usize },
    #[error("evaluation budget exhausted")]
    BudgetExhausted,
}

/// Optimizer configuration problems.
#[derive(Debug, Error, PartialEq)]
pub enum ConfigError {
    #[error("n_init must be >= 2 (got {0})")]
    NInitTooSmall(usize),
    #[error("max_evals ({max_evals}) must be >= n_init ({n_init})")]
    BudgetTooSmall { max_evals: usize, n_init: usize },
    #[error("batch_size must be >= 1")]
    ZeroBatch,
    #[error("fit_every must be >= 1")]
    ZeroFitEvery,
    #[error("lambda must lie in [0, 1]")]
    LambdaOutOfRange,
    #[error("kernel choice {choice} incompatible with space: {reason}")]
    KernelMismatch { choice: String, reason: String },
    #[error("trust-region config invalid: {0}")]
    TrustRegion(String),
}

/// WCNF parse failures, tagged with the 1-based source line.
#[derive(Debug, Error, PartialEq)]
pub enum WcnfError {
    #[error("line {line}: malformed header (expected `p wcnf nvars nclauses [top]`)")]
    BadHeader { line: usize },
    #[error("line {line}: clause before header")]
    ClauseBeforeHeader { line: usize },
    #[error("line {line}: duplicate header")]
    DuplicateHeader { line: usize },
    #[error("line {line}: invalid weight `{token}` (must be a positive number)")]
    BadWeight { line: usize, token: String },
    #[error("line {line}: invalid literal `{token}`")]
    BadLiteral { line: usize, token: String },
    #[error("line {line}: literal {literal} out of range for {num_vars} variables")]
    LiteralOutOfRange {
        line: usize,
        literal: i64,
        num_vars: usize,
    },
    #[error("line {line}: clause not terminated by 0")]
    MissingTerminator { line: usize },
    #[error("line {line}: empty clause")]
    EmptyClause { line: usize },
    #[error("missing `p wcnf` header")]
    MissingHeader,
    #[error("header declares {declared} clauses but {found} were parsed")]
    ClauseCountMismatch { declared: usize, found: usize },
}

/// Record (de)serialization failures.
#[derive(Debug, Error, PartialEq)]
pub enum RecordError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("record header missing field `{0}`")]
    MissingField(&'static str),
}

/// Benchmark lookup failures.
#[derive(Debug, Error, PartialEq)]
pub enum BenchmarkError {
    #[error("unknown benchmark `{0}`")]
    Unknown(String),
    #[error("benchmark `{0}` requires a WCNF instance path")]
    MissingWcnf(String),
    #[error(transparent)]
    Wcnf(#[from] WcnfError),
    #[error("point shape mismatch: expected {expected_h} categorical / {expected_x} continuous dims, got {got_h}/{got_x}")]
    Shape {
        expected_h: usize,
        expected_x: usize,
        got_h: usize,
        got_x: usize,
    },
    #[error("dimension {dim}: level {level} out of range (cardinality {card})")]
    LevelOutOfRange {
        dim: usize,
        level: usize,
        card: usize,
    },
}
