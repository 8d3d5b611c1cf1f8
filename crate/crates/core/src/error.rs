use thiserror::Error;

/// Default cap on the number of points any exhaustive enumeration may visit.
pub const DEFAULT_BUDGET: u128 = 1 << 24;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum Error {
    #[error("invalid channel: {0}")]
    InvalidChannel(String),

    #[error(
        "erasure/error parameters violate dominance: eps/(q-1) = {flip} must be below 1-delta-eps = {direct}"
    )]
    Dominance { flip: f64, direct: f64 },

    #[error("invalid parameter: {0}")]
    InvalidParameter(String),

    #[error("{what} has {size} points, over the enumeration budget of {budget}")]
    BudgetExceeded { what: String, size: u128, budget: u128 },

    #[error("channel is not symmetric (rows are not permutations of each other)")]
    NotSymmetric,

    #[error("auxiliary distribution is not symmetry-preserving for this channel")]
    NotSymmetryPreserving,

    #[error("alphabet mismatch: {left} vs {right} symbols")]
    AlphabetMismatch { left: usize, right: usize },

    #[error("invalid Psi({e}) = {value}: must lie in [0, {max}]")]
    InvalidPsi { e: usize, value: u32, max: usize },

    #[error("codebook error: {0}")]
    Codebook(String),

    #[error("witness check failed: {0}")]
    Witness(String),

    #[error("parse error: {0}")]
    Parse(String),
}

pub type Result<T> = std::result::Result<T, Error>;

pub(crate) fn check_budget(what: &str, size: u128, budget: u128) -> Result<()> {
    if size > budget {
        Err(Error::BudgetExceeded { what: what.to_string(), size, budget })
    } else {
        Ok(())
    }
}

/// `base^exp` saturating at `u128::MAX`.
pub(crate) fn saturating_pow(base: usize, exp: usize) -> u128 {
    let mut acc: u128 = 1;
    for _ in 0..exp {
        acc = acc.saturating_mul(base as u128);
    }
    acc
}
