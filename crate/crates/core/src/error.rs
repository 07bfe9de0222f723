use thiserror::Error;

/// Errors surfaced by the library.
///
/// `Format`/`Validation` map to bad user input, `Guard` to refused
/// over-budget computations, `Internal` to numerical self-check failures.
#[derive(Debug, Error)]
pub enum Error {
    #[error("i/o error: {0}")]
    Io(#[from] std::io::Error),

    #[error("json error: {0}")]
    Json(#[from] serde_json::Error),

    #[error("channel format error: {0}")]
    Format(String),

    #[error("row sum violation at (x1={x1}, x2={x2}): sum = {sum}")]
    RowSum { x1: usize, x2: usize, sum: f64 },

    #[error("dimension mismatch: {0}")]
    DimMismatch(String),

    #[error("validation error: {0}")]
    Validation(String),

    #[error("unknown variable: {0}")]
    UnknownVariable(String),

    #[error("variable subsets overlap: {0}")]
    OverlappingVariables(String),

    #[error("enumeration guard: {count} grid points exceed cap {cap}")]
    GridGuard { count: u128, cap: u64 },

    #[error("enumeration guard: {0}")]
    Guard(String),

    #[error("internal consistency: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
