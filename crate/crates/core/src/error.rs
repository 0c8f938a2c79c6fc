use std::path::PathBuf;

use thiserror::Error;

/// Errors produced by the compression pipeline and its diagnostics.
#[derive(Debug, Error)]
pub enum LrcpError {
    #[error("empty input: {0}")]
    EmptyInput(String),

    #[error("non-finite value {value} at row {row}, column {col}")]
    NonFiniteEntry { row: usize, col: usize, value: f64 },

    #[error("shape mismatch: data has {len} values, expected {rows}x{cols}")]
    ShapeMismatch {
        rows: usize,
        cols: usize,
        len: usize,
    },

    #[error("dimension mismatch: expected {expected}, got {actual}")]
    DimensionMismatch { expected: usize, actual: usize },

    #[error("rank mismatch: {left} vs {right}")]
    RankMismatch { left: usize, right: usize },

    #[error("invalid rank {rank}: must satisfy 1 <= rank < {limit}")]
    InvalidRank { rank: usize, limit: usize },

    #[error("basis is not orthonormal: max |B^T B - I| = {0:e}")]
    NotOrthonormal(f64),

    #[error("rank deficient: numerical rank {found} < {required} columns")]
    RankDeficient { found: usize, required: usize },

    #[error("exact SVD supports min(N, D) <= {limit}, got {min_dim}")]
    TooLargeForExact { min_dim: usize, limit: usize },

    #[error("SVD did not converge after {sweeps} sweeps")]
    DidNotConverge { sweeps: usize },

    #[error("budget {budget} exceeds token count {n_tokens} (or is zero)")]
    BudgetExceedsTokens { budget: usize, n_tokens: usize },

    #[error("index {index} out of range for {n_tokens} tokens")]
    IndexOutOfRange { index: usize, n_tokens: usize },

    #[error("duplicate retained index {0}")]
    DuplicateIndex(usize),

    #[error("invalid retain ratio {0}: must lie in (0, 1]")]
    InvalidRatio(f64),

    #[error("stage {stage} keeps zero tokens")]
    ZeroKeep { stage: usize },

    #[error("compression layer {layer} must be below the layer count {layers}")]
    InvalidLayer { layer: usize, layers: usize },

    #[error("stage {stage}: expected {expected} input rows, got {actual}")]
    StageShapeMismatch {
        stage: usize,
        expected: usize,
        actual: usize,
    },

    #[error("invalid component count {requested}: must lie in [1, {limit}]")]
    InvalidComponentCount { requested: usize, limit: usize },

    #[error("invalid variance percentage {0}: must lie in (0, 100]")]
    InvalidVariance(f64),

    #[error("spectrum of {components} components reaches only {reached:.6} of the {target:.6} target; recompute with more components")]
    InsufficientSpectrum {
        components: usize,
        reached: f64,
        target: f64,
    },

    #[error("dropout leaves {survivors} tokens, need more than rank {rank}")]
    TooFewSurvivors { survivors: usize, rank: usize },

    #[error("invalid drop ratio {0}: must lie in [0, 1)")]
    InvalidDropRatio(f64),

    #[error("keep {keep} must exceed rank {rank}")]
    KeepBelowRank { keep: usize, rank: usize },

    #[error("stage keeps must be strictly decreasing and at most the token count")]
    InvalidKeeps,

    #[error("invalid spectrum: {0}")]
    InvalidSpectrum(String),

    #[error("dimension {dim} too small for rank {rank} plus {outliers} orthogonal outliers")]
    DimensionTooSmall {
        dim: usize,
        rank: usize,
        outliers: usize,
    },

    #[error("{count} subsets exceed the enumeration bound {bound}")]
    TooManySubsets { count: u128, bound: u128 },

    #[error("malformed NPY header: {0}")]
    MalformedHeader(String),

    #[error("non-finite value {value} in {path} at {location}")]
    NonFiniteValue {
        path: PathBuf,
        location: String,
        value: f64,
    },

    #[error("I/O failure on {path}: {source}")]
    IoFailure {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },

    #[error("serialization failure: {0}")]
    Serialization(String),
}

pub type Result<T> = std::result::Result<T, LrcpError>;

impl LrcpError {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        LrcpError::IoFailure {
            path: path.into(),
            source,
        }
    }
}
