use thiserror::Error;

/// Errors produced by the library.
#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum Error {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },

    #[error("invalid dimensions: {0}")]
    Dimension(String),

    #[error("line {line}: duplicate shift {shift} in cell ({row}, {col})")]
    DuplicateShift {
        line: usize,
        row: usize,
        col: usize,
        shift: usize,
    },

    #[error("divisibility violated: {0}")]
    Divisibility(String),

    #[error("matrix has an all-zero row {0}")]
    ZeroRow(usize),

    #[error("matrix rows {0} and {1} are identical")]
    IdenticalRows(usize, usize),

    #[error("infeasible partition scheme: {0}")]
    Infeasible(String),

    #[error("scheme does not match matrix: {0}")]
    Mismatch(String),

    #[error("construction stuck at block column {column}, slot {slot}: no check node survives")]
    NoCandidate { column: usize, slot: usize },

    #[error("invalid construction spec: {0}")]
    InvalidSpec(String),

    #[error("decoder input: {0}")]
    DecoderInput(String),

    #[error("instance too large: {0}")]
    TooLarge(String),

    #[error("search budget exhausted before any scheme was evaluated")]
    BudgetExhausted,
}

pub type Result<T> = std::result::Result<T, Error>;
