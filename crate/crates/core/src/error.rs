use thiserror::Error;

pub type Result<T> = std::result::Result<T, Error>;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum Error {
    #[error("modulus must be at least 2, got {0}")]
    InvalidModulus(u64),

    #[error("{x} is not a unit modulo {n} (gcd = {gcd})")]
    NotAUnit { x: u64, n: u64, gcd: u64 },

    #[error("invalid argument: {0}")]
    InvalidArgument(String),

    #[error("{value} is out of range: {expected}")]
    OutOfRange { value: u64, expected: String },

    #[error("{n} is even; pick an odd modulus (2 is a factor)")]
    EvenModulus { n: u64 },

    #[error("{n} is a prime power ({base}^{exponent}); order finding cannot split it")]
    PrimePower { n: u64, base: u64, exponent: u32 },

    /// Not a failure of the caller: `gcd(x, n)` already exposes a factor,
    /// so the quantum routine is never needed.
    #[error("gcd({x}, {n}) = {factor} already reveals a factor")]
    SharedFactor { x: u64, n: u64, factor: u64 },
}

impl Error {
    /// True when the "error" is really a lucky classical factorisation.
    pub fn is_accidental_success(&self) -> bool {
        matches!(self, Error::SharedFactor { .. })
    }
}
