//! Exact error probabilities and meta-converse lower bounds for codes over
//! symmetric discrete channels, with checks for generalized perfect and
//! quasi-perfect codes.
//!
//! The crate is organised bottom-up:
//!
//! * [`channel`]: channel models, product extensions, auxiliary measures and
//!   the symmetry-preservation test;
//! * [`hypothesis`]: the Neyman–Pearson trade-off `alpha_beta`;
//! * [`geometry`]: ratio spectra, covering/packing radii and code
//!   classification;
//! * [`codes`]: codebooks, exact ML/MAP error probability, GF(2^m) and
//!   Reed–Solomon codes, decoders, Monte Carlo and exhaustive code search;
//! * [`bounds`]: the lower-bound evaluators;
//! * [`sourcecoding`]: excess-distortion lossy compression.

pub mod bounds;
pub mod channel;
pub mod codes;
pub mod error;
pub mod geometry;
pub mod hypothesis;
pub mod scalar;
pub mod sourcecoding;

pub use error::{Error, Result, DEFAULT_BUDGET};
pub use scalar::{Level, ProbValue, Rational, Scalar};
