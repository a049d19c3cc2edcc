use thiserror::Error;

/// Errors produced anywhere in the crate.
#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("line {line}: node index {index} out of range [1, {n}]")]
    NodeOutOfRange { line: usize, index: i64, n: usize },

    #[error("line {line}: self-loop on node {node}")]
    SelfLoop { line: usize, node: usize },

    #[error("line {line}: duplicate edge {{{i}, {j}}}")]
    DuplicateEdge { line: usize, i: usize, j: usize },

    #[error("invalid graph: {0}")]
    InvalidGraph(String),

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("density {0} outside (0, 1]")]
    InvalidDensity(f64),

    #[error("weight range [{min}, {max}] contains no nonzero integer")]
    EmptyWeightRange { min: i64, max: i64 },

    #[error("invalid spin value {value} at index {index}")]
    InvalidSpin { index: usize, value: i64 },

    #[error("invalid solver configuration: {0}")]
    InvalidConfig(String),

    #[error("weight {weight} not representable with {slices} slices")]
    Unrepresentable { weight: i64, slices: usize },

    #[error("input value {value} at index {index} is not {expected}")]
    InvalidInput {
        index: usize,
        value: i64,
        expected: &'static str,
    },

    #[error("column {col} out of range (array has {cols} columns)")]
    ColumnOutOfRange { col: usize, cols: usize },

    #[error("empty temperature schedule")]
    EmptySchedule,

    #[error("i/o error on {path}: {msg}")]
    Io { path: String, msg: String },

    #[error("report error: {0}")]
    Report(String),
}

pub type Result<T> = std::result::Result<T, Error>;
