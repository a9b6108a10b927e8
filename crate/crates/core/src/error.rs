use num_complex::Complex64;

/// Errors raised by the matrix-function kernels and the structured containers.
#[derive(Debug, Clone, PartialEq, thiserror::Error)]
pub enum Error {
    #[error("matrix is not square ({rows}x{cols})")]
    NonSquare { rows: usize, cols: usize },

    #[error("dimension mismatch in {context}: expected {expected}, found {found}")]
    DimensionMismatch {
        context: &'static str,
        expected: usize,
        found: usize,
    },

    #[error("function is not defined on the spectrum: eigenvalue {value} hits a singularity or branch cut")]
    SpectrumOnSingularity { value: f64 },

    #[error("scalar callbacks are only supported for symmetric arguments")]
    NonSymmetricWithScalarCallback,

    #[error("{context} requires a symmetric argument")]
    NonSymmetric { context: &'static str },

    #[error("shift {shift} makes the shifted matrix numerically singular")]
    SingularShift { shift: Complex64 },

    #[error("index range {start}..{end} is out of bounds for size {n}")]
    RangeOutOfBounds { start: usize, end: usize, n: usize },

    #[error("split index {split} is invalid for a matrix of size {n}")]
    InvalidSplitIndex { split: usize, n: usize },

    #[error("the SPD split variant requires a symmetric matrix")]
    SpdVariantOnNonsymmetric,

    #[error("operation requires an HSS tree of depth at least one")]
    DegenerateTree,

    #[error("cluster trees are not compatible: {0}")]
    TreeMismatch(&'static str),

    #[error("block size {s} is invalid: {reason}")]
    InvalidBlockSize { s: usize, reason: &'static str },

    #[error("fractional order alpha = {0} is outside (1, 2)")]
    AlphaOutOfRange(f64),

    #[error("pole sequence is not closed under complex conjugation")]
    PolesNotConjugateClosed,

    #[error("{method} did not converge within {iterations} iterations")]
    IterationLimit {
        method: &'static str,
        iterations: usize,
    },

    #[error("invalid parameter: {0}")]
    InvalidParameter(&'static str),

    #[error("matrix of size {n} exceeds the dense solver cap {cap}")]
    DenseCapExceeded { n: usize, cap: usize },

    #[error("non-finite values in {0}")]
    NonFinite(&'static str),
}

pub type Result<T> = core::result::Result<T, Error>;
