use thiserror::Error;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum Error {
    #[error("deformation parameter q = {0} must satisfy -1 < q < 1 and q != 0")]
    InvalidQ(f64),

    #[error("invalid half-integer: {0}")]
    InvalidHalfInt(String),

    #[error("q-binomial [{a} choose {b}] is undefined (need 0 <= b <= a)")]
    BinomialRange { a: i64, b: i64 },

    #[error("q-binomial base {0} must be positive and different from 1")]
    InvalidBase(f64),

    #[error("negative index {0}")]
    NegativeIndex(i64),

    #[error("dimension mismatch: {0}")]
    DimensionMismatch(String),

    #[error("matrix is not square ({rows}x{cols})")]
    NotSquare { rows: usize, cols: usize },

    #[error("matrix is not invertible")]
    Singular,

    #[error("index {index} is not in the range -{t}..{t} of the spin-{t} representation")]
    IndexOutOfRange { t: String, index: String },

    #[error("spectrum cannot be tiled by irreducible AN_q blocks: {0}")]
    SpectrumNotTileable(String),

    #[error("no unitary intertwiner found (residual {residual:e})")]
    NoIntertwiner { residual: f64 },

    #[error("{kind} relation check failed: {label} (normalized residual {residual:e})")]
    RelationFailure {
        kind: &'static str,
        label: String,
        residual: f64,
    },

    #[error("weight parameter out of range: {0}")]
    InvalidWeight(String),

    #[error("weight table has no entry for s = {0}")]
    TableMiss(String),

    #[error("invalid F matrix: {0}")]
    InvalidFMatrix(String),

    #[error("invalid word: {0}")]
    InvalidWord(String),

    #[error("character value must be non-zero")]
    ZeroCharacter,

    #[error("internal consistency error: {0}")]
    Internal(String),
}

pub type Result<T> = std::result::Result<T, Error>;
