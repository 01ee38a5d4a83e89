use thiserror::Error;

pub type Result<T, E = Error> = std::result::Result<T, E>;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("matrix is not Hermitian (deviation {deviation:.3e} exceeds {allowed:.3e})")]
    NotHermitian { deviation: f64, allowed: f64 },

    #[error("non-finite matrix entry at ({row}, {col})")]
    NonFinite { row: usize, col: usize },

    #[error("invalid map: {0}")]
    InvalidMap(String),

    #[error("parameter t = {0} is outside [0, 1)")]
    ParameterOutOfRange(f64),

    #[error("shape mismatch: expected {expected_rows}x{expected_cols}, found {rows}x{cols}")]
    Shape {
        expected_rows: usize,
        expected_cols: usize,
        rows: usize,
        cols: usize,
    },

    #[error("invalid density matrix: {0}")]
    InvalidDensity(String),

    #[error("matrix is singular")]
    Singular,

    #[error("{0}")]
    Domain(String),
}
