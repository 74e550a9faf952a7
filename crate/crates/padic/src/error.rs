use crate::valuation::Val;
use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Error)]
pub enum Error {
    #[error("{0} is not prime")]
    NotPrime(u64),

    #[error("working precision must be at least 1 digit")]
    InvalidPrecision,

    #[error("denominator is zero")]
    ZeroDenominator,

    #[error("division by zero")]
    DivisionByZero,

    /// The divisor is indistinguishable from zero at its certified precision,
    /// so no quotient digit can be certified.
    #[error("divisor is not certifiably nonzero at the current precision")]
    UncertifiedDivisor,

    #[error("operands belong to different contexts: Q_{lhs_p} at {lhs_n} digits vs Q_{rhs_p} at {rhs_n} digits")]
    ContextMismatch {
        lhs_p: u64,
        lhs_n: u32,
        rhs_p: u64,
        rhs_n: u32,
    },

    #[error("dimension mismatch: {0} vs {1}")]
    DimensionMismatch(usize, usize),

    #[error("binomial index out of range: m={m} exceeds j={j}")]
    BinomialIndex { j: u64, m: u64 },

    #[error("mu with valuation {got} lies outside the certified convergence ball (valuation >= {required} required)")]
    InadmissibleMu { required: i64, got: Val },

    #[error("target certificate exponent {requested} is not achievable at this working precision; best achievable is {achievable}")]
    Precision { requested: i64, achievable: Val },

    #[error("comparison is undecidable at the certified precision: {0}")]
    Undecidable(String),

    #[error("matrix I - mu*A is singular at mu = {mu}")]
    SingularResolvent { mu: String },

    #[error("internal consistency check failed: {0}")]
    EngineFault(String),

    #[error("invalid matrix file: {0}")]
    MatrixFile(String),

    #[error("io: {0}")]
    Io(#[from] std::io::Error),
}

impl Error {
    /// True for errors that indicate the requested certification could not be
    /// reached at the configured working precision (as opposed to bad input
    /// or an engine fault).
    pub fn is_precision(&self) -> bool {
        matches!(
            self,
            Error::Precision { .. } | Error::Undecidable(_) | Error::UncertifiedDivisor
        )
    }
}
