//! Codebooks, exact error probabilities, Reed–Solomon codes over GF(2^m),
//! decoders, Monte Carlo simulation and exhaustive code search.

mod codebook;
mod gf;
mod rs;
mod search;
mod sim;

pub use codebook::{exhaustive_ml_decode, hamming, map_error_probability, ml_error_probability, Codebook};
pub use gf::Gf;
pub use rs::{DecodeOutcome, ReedSolomon};
pub use search::{
    best_code_search, best_lossy_code_search, canonical_codebooks, input_swap_symmetric, LossySearchResult, SearchResult,
    DEFAULT_CANDIDATE_BUDGET,
};
pub use sim::{ml_decide, run_trials, wilson, Decoder, TrialReport, Z95};
