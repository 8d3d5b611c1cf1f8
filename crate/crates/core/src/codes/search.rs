//! Exhaustive search over binary codebooks up to coordinate permutation and
//! per-coordinate relabeling.
//!
//! A binary code with `M` words and length `n` is a multiset of `n` columns,
//! each column being an `M`-bit pattern (bit `m` is the symbol of word `m`).
//! Reordering coordinates does not change a memoryless channel's error
//! probability, so only non-decreasing column sequences are visited. When
//! the channel treats both inputs alike up to an output relabeling, flipping a
//! column is free too, and only patterns with word 0 set to `0` are used.

use num_bigint::BigInt;
use rayon::prelude::*;

use crate::channel::{product_channel, Channel, DiscreteChannel};
use crate::error::{Error, Result, DEFAULT_BUDGET};
use crate::scalar::{binomial, Rational, Scalar};

use super::{ml_error_probability, Codebook};

/// Relative gap within which float prefilter candidates are re-evaluated
/// exactly.
const PREFILTER_RTOL: f64 = 1e-9;

/// Default cap on visited column multisets.
pub const DEFAULT_CANDIDATE_BUDGET: u64 = 2_000_000;

#[derive(Clone, Debug, PartialEq)]
pub struct SearchResult {
    pub code: Codebook,
    pub pe: Rational,
    /// False when the candidate budget cut the enumeration short.
    pub exact: bool,
    pub candidates: u64,
}

/// Column alphabet of the search.
fn column_patterns(m: usize, complement: bool) -> Vec<u32> {
    (0..1u32 << m).filter(|p| !complement || p & 1 == 0).collect()
}

/// Number of size-`n` multisets over `k` types.
fn multiset_count(n: usize, k: usize) -> u128 {
    let c = binomial((n + k - 1) as u64, (k - 1) as u64);
    u128::try_from(c).unwrap_or(u128::MAX)
}

/// Non-decreasing index sequences of length `n` over `0..k`, in
/// lexicographic order.
struct Multisets {
    k: usize,
    cur: Option<Vec<u8>>,
}

fn multisets(n: usize, k: usize) -> Multisets {
    Multisets { k, cur: Some(vec![0u8; n]) }
}

impl Iterator for Multisets {
    type Item = Vec<u8>;

    fn next(&mut self) -> Option<Vec<u8>> {
        let out = self.cur.take()?;
        if let Some(i) = (0..out.len()).rev().find(|&i| (out[i] as usize) < self.k - 1) {
            let mut next = out.clone();
            let v = next[i] + 1;
            for slot in next[i..].iter_mut() {
                *slot = v;
            }
            self.cur = Some(next);
        }
        Some(out)
    }
}

/// Column sequences with distinct rows, at most `limit` of them, and whether
/// the enumeration finished.
fn valid_columns(n: usize, m: usize, patterns: &[u32], limit: u64) -> (Vec<Vec<u32>>, bool) {
    let mut out = Vec::new();
    let mut iter = multisets(n, patterns.len());
    for idx in iter.by_ref() {
        let cols: Vec<u32> = idx.iter().map(|&i| patterns[i as usize]).collect();
        if columns_to_words(&cols, m).is_some() {
            out.push(cols);
            if out.len() as u64 >= limit {
                break;
            }
        }
    }
    // a cut exactly at the last valid candidate still reports unfinished
    let done = iter.cur.is_none();
    (out, done)
}

fn columns_to_words(columns: &[u32], m: usize) -> Option<Vec<Vec<u8>>> {
    let words: Vec<Vec<u8>> = (0..m).map(|r| columns.iter().map(|&c| (c >> r & 1) as u8).collect()).collect();
    for a in 0..m {
        for b in a + 1..m {
            if words[a] == words[b] {
                return None;
            }
        }
    }
    Some(words)
}

/// Whether swapping the two inputs of `ch` is undone by relabeling outputs:
/// the multiset of output pairs `(W(y|0), W(y|1))` equals its mirror image.
pub fn input_swap_symmetric<S: Scalar>(ch: &Channel<S>) -> bool {
    if ch.input_count() != 2 {
        return false;
    }
    let mut pairs: Vec<(S, S)> = (0..ch.output_count()).map(|y| (ch.prob(0, y), ch.prob(1, y))).collect();
    let mut swapped: Vec<(S, S)> = pairs.iter().map(|(a, b)| (b.clone(), a.clone())).collect();
    let cmp = |x: &(S, S), y: &(S, S)| x.0.total_cmp(&y.0).then(x.1.total_cmp(&y.1));
    pairs.sort_by(cmp);
    swapped.sort_by(cmp);
    pairs == swapped
}

/// All binary codebooks with `m` distinct words of length `n`, one per
/// column multiset (and per column-complement class when `complement`).
pub fn canonical_codebooks(n: usize, m: usize, complement: bool) -> Result<Vec<Codebook>> {
    check_shape(n, m)?;
    let patterns = column_patterns(m, complement);
    let total = multiset_count(n, patterns.len());
    crate::error::check_budget("column multisets", total, DEFAULT_BUDGET)?;
    let (cols, _) = valid_columns(n, m, &patterns, u64::MAX);
    Ok(cols
        .iter()
        .map(|c| Codebook::new(n, 2, columns_to_words(c, m).unwrap()).expect("distinct binary words"))
        .collect())
}

fn check_shape(n: usize, m: usize) -> Result<()> {
    if n == 0 || !(2..=8).contains(&m) {
        return Err(Error::InvalidParameter(format!("search needs n >= 1 and 2 <= M <= 8 (got n = {n}, M = {m})")));
    }
    if m > 1usize << n.min(20) {
        return Err(Error::InvalidParameter(format!("no binary code of length {n} has {m} distinct words")));
    }
    Ok(())
}

/// Minimum-error-probability binary code with `m` words of length `n` over
/// the memoryless channel `base`. Candidates are ranked in `f64`; those
/// within a relative `1e-9` of the best are re-evaluated exactly and the
/// first exact minimizer (enumeration order) is returned.
pub fn best_code_search(n: usize, m: usize, base: &Channel<Rational>, candidate_budget: u64) -> Result<SearchResult> {
    check_shape(n, m)?;
    if base.input_count() != 2 {
        return Err(Error::InvalidParameter("code search is implemented for binary-input channels".into()));
    }
    let complement = input_swap_symmetric(base);
    let patterns = column_patterns(m, complement);
    let (seqs, exact) = valid_columns(n, m, &patterns, candidate_budget);

    let float_ch = product_channel(&base.to_f64(), n, DEFAULT_BUDGET)?;
    let exact_ch = product_channel(base, n, DEFAULT_BUDGET)?;
    let scored: Vec<Option<(f64, Codebook)>> = seqs
        .par_iter()
        .map(|cols| {
            let words = columns_to_words(cols, m)?;
            let code = Codebook::new(n, 2, words).ok()?;
            let pe: f64 = ml_error_probability(&code, &float_ch).ok()?;
            Some((pe, code))
        })
        .collect();
    let best_f = scored
        .iter()
        .flatten()
        .map(|(p, _)| *p)
        .fold(f64::INFINITY, f64::min);
    if !best_f.is_finite() {
        return Err(Error::InvalidParameter(format!("no binary code with {m} distinct words of length {n}")));
    }
    let cutoff = best_f + PREFILTER_RTOL * best_f.abs().max(1e-300);
    let mut best: Option<(Rational, Codebook)> = None;
    for (pe_f, code) in scored.into_iter().flatten() {
        if pe_f > cutoff {
            continue;
        }
        let pe: Rational = ml_error_probability(&code, &exact_ch)?;
        if best.as_ref().is_none_or(|(b, _)| pe < *b) {
            best = Some((pe, code));
        }
    }
    let (pe, code) = best.expect("the float minimizer passes its own cutoff");
    Ok(SearchResult { code, pe, exact, candidates: seqs.len() as u64 })
}

/// Result of the excess-distortion search for the equiprobable binary source.
#[derive(Clone, Debug, PartialEq)]
pub struct LossySearchResult {
    pub code: Codebook,
    /// Number of the `2^n` source words left farther than `nD` from the code.
    pub uncovered: BigInt,
    pub excess: Rational,
    pub covering_radius: usize,
    pub min_distance: usize,
    pub exact: bool,
    pub candidates: u64,
    /// Whether some candidate is Hamming quasi-perfect (covering radius at
    /// most `ceil(d_min / 2)`).
    pub quasi_perfect_exists: bool,
}

struct LossyScore {
    uncovered: u128,
    covering_radius: usize,
    min_distance: usize,
}

/// Scores one code given by its column-pattern multiplicities, walking the
/// source types group by group: a source word is described by the number of
/// ones `j_p` it has among the `k_p` coordinates of each column pattern `p`.
fn lossy_score(groups: &[(u32, usize)], m: usize, radius: usize) -> LossyScore {
    let mut uncovered = 0u128;
    let mut covering = 0usize;
    let mut dist = vec![0usize; m];
    fn walk(
        groups: &[(u32, usize)],
        g: usize,
        dist: &mut [usize],
        weight: u128,
        radius: usize,
        uncovered: &mut u128,
        covering: &mut usize,
    ) {
        if g == groups.len() {
            let nearest = *dist.iter().min().unwrap();
            *covering = (*covering).max(nearest);
            if nearest > radius {
                *uncovered += weight;
            }
            return;
        }
        let (pattern, k) = groups[g];
        for j in 0..=k {
            for (r, d) in dist.iter_mut().enumerate() {
                *d += if pattern >> r & 1 == 1 { k - j } else { j };
            }
            let c = small_binomial(k, j);
            walk(groups, g + 1, dist, weight * c, radius, uncovered, covering);
            for (r, d) in dist.iter_mut().enumerate() {
                *d -= if pattern >> r & 1 == 1 { k - j } else { j };
            }
        }
    }
    walk(groups, 0, &mut dist, 1, radius, &mut uncovered, &mut covering);
    let mut min_distance = usize::MAX;
    for a in 0..m {
        for b in a + 1..m {
            let d: usize = groups.iter().filter(|(p, _)| (p >> a & 1) != (p >> b & 1)).map(|(_, k)| k).sum();
            min_distance = min_distance.min(d);
        }
    }
    LossyScore { uncovered, covering_radius: covering, min_distance }
}

fn small_binomial(n: usize, k: usize) -> u128 {
    let mut acc = 1u128;
    for i in 0..k.min(n - k) {
        acc = acc * (n - i) as u128 / (i + 1) as u128;
    }
    acc
}

/// Binary code with `m` words of length `n` minimizing the probability that
/// an equiprobable source word lies farther than `n * max_distortion` (in
/// Hamming distance) from every codeword.
pub fn best_lossy_code_search(n: usize, m: usize, max_distortion: &Rational, candidate_budget: u64) -> Result<LossySearchResult> {
    check_shape(n, m)?;
    if n > 64 {
        return Err(Error::InvalidParameter("lossy search supports n <= 64".into()));
    }
    if *max_distortion < <Rational as Scalar>::zero() {
        return Err(Error::InvalidParameter("distortion threshold must be non-negative".into()));
    }
    // largest integer distance r with r <= n D
    let scaled = max_distortion.clone() * Rational::from_i64(n as i64);
    let radius = scaled.floor().to_integer();
    let radius: usize = radius.try_into().unwrap_or(usize::MAX).min(n);

    let patterns = column_patterns(m, true);
    let (seqs, exact) = valid_columns(n, m, &patterns, candidate_budget);
    let scored: Vec<Option<(LossyScore, &Vec<u32>)>> = seqs
        .par_iter()
        .map(|cols| {
            let mut groups: Vec<(u32, usize)> = Vec::new();
            for &c in cols {
                match groups.last_mut() {
                    Some((p, k)) if *p == c => *k += 1,
                    _ => groups.push((c, 1)),
                }
            }
            Some((lossy_score(&groups, m, radius), cols))
        })
        .collect();
    let mut best: Option<(LossyScore, &Vec<u32>)> = None;
    let mut qp = false;
    for (score, cols) in scored.into_iter().flatten() {
        qp |= score.covering_radius <= score.min_distance.div_ceil(2);
        if best.as_ref().is_none_or(|(b, _)| score.uncovered < b.uncovered) {
            best = Some((score, cols));
        }
    }
    let (score, cols) =
        best.ok_or_else(|| Error::InvalidParameter(format!("no binary code with {m} distinct words of length {n}")))?;
    let code = Codebook::new(n, 2, columns_to_words(cols, m).expect("checked above"))?;
    let uncovered = BigInt::from(score.uncovered);
    let excess = Rational::new(uncovered.clone(), num_traits::pow(BigInt::from(2), n));
    Ok(LossySearchResult {
        code,
        uncovered,
        excess,
        covering_radius: score.covering_radius,
        min_distance: score.min_distance,
        exact,
        candidates: seqs.len() as u64,
        quasi_perfect_exists: qp,
    })
}
