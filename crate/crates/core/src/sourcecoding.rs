//! Lossy compression under an excess-distortion criterion.
//!
//! A code is a list of reconstruction symbols; the encoder maps each source
//! symbol to its closest codeword, and an excess-distortion event happens when
//! even the closest one is farther than `D`. For the equiprobable binary
//! memoryless source of length `n` (source and reconstruction symbols are
//! binary words, indexed as in [`Codebook::index_of`]) the distortion is the
//! normalized Hamming distance.
//!
//! Everything here is exact ([`Rational`]); the only float is the reported
//! tilt parameter `lambda*`.

use std::collections::BTreeMap;

use num_bigint::BigInt;
use num_integer::Integer;
use num_traits::ToPrimitive;
use rayon::prelude::*;

use crate::bounds::BoundReport;
use crate::channel::{product_channel, q_in_qc, Channel, DiscreteChannel, ProductChannel, UniformMeasure};
use crate::codes::Codebook;
use crate::error::{check_budget, Error, Result, DEFAULT_BUDGET};
use crate::geometry::{classify_qp, QPClassification};
use crate::hypothesis::alpha_beta;
use crate::scalar::{binomial, Rational, Scalar};

/// Cap on explicit alphabets handed to the hypothesis-testing routine.
const ALPHA_BETA_BUDGET: u128 = 1 << 20;

/// Source symbols per parallel work item.
const CHUNK: usize = 4096;

fn ratio(a: i64, b: i64) -> Rational {
    Rational::new(a.into(), b.into())
}

fn pow2(n: usize) -> BigInt {
    BigInt::from(1) << n
}

/// Source distribution.
#[derive(Clone, Debug, PartialEq)]
pub enum Source {
    /// Equiprobable over the given number of symbols.
    Uniform(usize),
    Explicit(Vec<Rational>),
}

impl Source {
    pub fn explicit(probs: Vec<Rational>) -> Result<Self> {
        if probs.is_empty() || probs.iter().any(|p| *p < <Rational as Scalar>::zero()) {
            return Err(Error::InvalidParameter("source probabilities must be non-negative".into()));
        }
        if Rational::total(probs.iter().cloned()) != <Rational as Scalar>::one() {
            return Err(Error::InvalidParameter("source probabilities must sum to 1".into()));
        }
        Ok(Source::Explicit(probs))
    }

    /// Equiprobable binary memoryless source of length `n`.
    pub fn bms(n: usize) -> Self {
        Source::Uniform(1 << n)
    }

    pub fn size(&self) -> usize {
        match self {
            Source::Uniform(k) => *k,
            Source::Explicit(p) => p.len(),
        }
    }

    pub fn prob(&self, v: usize) -> Rational {
        match self {
            Source::Uniform(k) => ratio(1, *k as i64),
            Source::Explicit(p) => p[v].clone(),
        }
    }

    pub fn probs(&self) -> Vec<Rational> {
        (0..self.size()).map(|v| self.prob(v)).collect()
    }
}

#[derive(Clone, Debug, PartialEq)]
pub enum DistortionMeasure {
    /// Normalized Hamming distance between binary words of length `n`.
    Hamming { n: usize },
    /// `d(v, w) = rows[v][w]`.
    Matrix(Vec<Vec<Rational>>),
}

/// Distortion measure and the threshold `D`.
#[derive(Clone, Debug, PartialEq)]
pub struct DistortionSpec {
    pub measure: DistortionMeasure,
    pub max_distortion: Rational,
    /// Common denominator of every distortion value.
    scale: BigInt,
    /// `floor(D * scale)`; `d(v, w) <= D` iff `d(v, w) * scale <= limit`.
    limit: BigInt,
}

impl DistortionSpec {
    pub fn hamming(n: usize, max_distortion: Rational) -> Result<Self> {
        if n == 0 || n > 62 {
            return Err(Error::InvalidParameter(format!("binary word length must lie in 1..=62 (got {n})")));
        }
        Self::build(DistortionMeasure::Hamming { n }, BigInt::from(n), max_distortion)
    }

    pub fn matrix(rows: Vec<Vec<Rational>>, max_distortion: Rational) -> Result<Self> {
        let width = rows.first().map_or(0, Vec::len);
        if width == 0 || rows.iter().any(|r| r.len() != width) {
            return Err(Error::InvalidParameter("distortion matrix must be non-empty and rectangular".into()));
        }
        if rows.iter().flatten().any(|d| *d < <Rational as Scalar>::zero()) {
            return Err(Error::InvalidParameter("distortions must be non-negative".into()));
        }
        let scale = rows.iter().flatten().fold(BigInt::from(1), |acc, d| acc.lcm(d.denom()));
        Self::build(DistortionMeasure::Matrix(rows), scale, max_distortion)
    }

    fn build(measure: DistortionMeasure, scale: BigInt, max_distortion: Rational) -> Result<Self> {
        if max_distortion < <Rational as Scalar>::zero() {
            return Err(Error::InvalidParameter("maximum distortion must be non-negative".into()));
        }
        let limit = (max_distortion.clone() * Rational::from_integer(scale.clone())).floor().to_integer();
        Ok(Self { measure, max_distortion, scale, limit })
    }

    pub fn source_size(&self) -> u128 {
        match &self.measure {
            DistortionMeasure::Hamming { n } => 1u128 << n,
            DistortionMeasure::Matrix(rows) => rows.len() as u128,
        }
    }

    pub fn reconstruction_size(&self) -> u128 {
        match &self.measure {
            DistortionMeasure::Hamming { n } => 1u128 << n,
            DistortionMeasure::Matrix(rows) => rows[0].len() as u128,
        }
    }

    pub fn distortion(&self, v: usize, w: usize) -> Rational {
        match &self.measure {
            DistortionMeasure::Hamming { n } => ratio((v ^ w).count_ones() as i64, *n as i64),
            DistortionMeasure::Matrix(rows) => rows[v][w].clone(),
        }
    }

    /// `d(v, w)` times the common denominator, an integer.
    fn scaled(&self, v: usize, w: usize) -> BigInt {
        match &self.measure {
            DistortionMeasure::Hamming { .. } => BigInt::from((v ^ w).count_ones()),
            DistortionMeasure::Matrix(rows) => {
                (rows[v][w].clone() * Rational::from_integer(self.scale.clone())).to_integer()
            }
        }
    }

    pub fn within(&self, v: usize, w: usize) -> bool {
        match &self.measure {
            DistortionMeasure::Hamming { .. } => BigInt::from((v ^ w).count_ones()) <= self.limit,
            DistortionMeasure::Matrix(rows) => rows[v][w] <= self.max_distortion,
        }
    }

    /// `floor(n D)` for the Hamming measure.
    pub fn hamming_radius(&self) -> Option<usize> {
        match self.measure {
            DistortionMeasure::Hamming { n } => Some(self.limit.to_usize().unwrap_or(usize::MAX).min(n)),
            DistortionMeasure::Matrix(_) => None,
        }
    }

    fn check(&self, source: &Source, code: &[usize]) -> Result<()> {
        if source.size() as u128 != self.source_size() {
            return Err(Error::AlphabetMismatch { left: source.size(), right: self.source_size() as usize });
        }
        check_budget("source alphabet", self.source_size(), DEFAULT_BUDGET)?;
        if code.is_empty() {
            return Err(Error::Codebook("empty code".into()));
        }
        if let Some(&w) = code.iter().find(|&&w| w as u128 >= self.reconstruction_size()) {
            return Err(Error::Codebook(format!("reconstruction symbol {w} out of range")));
        }
        Ok(())
    }
}

/// Number of binary words within Hamming distance `r` of a fixed word.
pub fn ball_volume(n: usize, r: usize) -> BigInt {
    (0..=r.min(n)).map(|i| binomial(n as u64, i as u64)).sum()
}

/// Reconstruction symbols of a binary codebook under the Hamming measure.
pub fn reconstructions(code: &Codebook) -> Result<Vec<usize>> {
    if code.q() != 2 {
        return Err(Error::Codebook("lossy codes over the binary source must be binary".into()));
    }
    Ok(code.input_indices())
}

/// `P[min_{w in C} d(V, w) > D]` by enumeration of the source alphabet.
pub fn excess_distortion(source: &Source, dist: &DistortionSpec, code: &[usize]) -> Result<Rational> {
    dist.check(source, code)?;
    let size = source.size();
    let uncovered = |v: usize| code.iter().all(|&w| !dist.within(v, w));
    match source {
        Source::Uniform(_) => {
            let count: u64 = (0..size.div_ceil(CHUNK))
                .into_par_iter()
                .map(|c| (c * CHUNK..((c + 1) * CHUNK).min(size)).filter(|&v| uncovered(v)).count() as u64)
                .sum();
            Ok(Rational::new(BigInt::from(count), BigInt::from(size)))
        }
        Source::Explicit(p) => {
            let parts: Vec<Rational> = (0..size.div_ceil(CHUNK))
                .into_par_iter()
                .map(|c| {
                    Rational::total((c * CHUNK..((c + 1) * CHUNK).min(size)).filter(|&v| uncovered(v)).map(|v| p[v].clone()))
                })
                .collect();
            Ok(Rational::total(parts))
        }
    }
}

/// Excess-distortion probability of a binary code for the equiprobable
/// binary source under normalized Hamming distortion.
pub fn bms_excess_distortion(code: &Codebook, max_distortion: &Rational) -> Result<Rational> {
    let dist = DistortionSpec::hamming(code.n(), max_distortion.clone())?;
    excess_distortion(&Source::bms(code.n()), &dist, &reconstructions(code)?)
}

/// Source symbols merged by their scaled distance profile to the codewords
/// and their probability; hypothesis tests cannot tell them apart.
struct Profiles {
    /// `(scaled distances to each codeword, P_V(v))` and multiplicity.
    groups: Vec<(Vec<BigInt>, Rational, u64)>,
}

fn profiles(source: &Source, dist: &DistortionSpec, code: &[usize]) -> Profiles {
    let size = source.size();
    let parts: Vec<BTreeMap<(Vec<BigInt>, Rational), u64>> = (0..size.div_ceil(CHUNK))
        .into_par_iter()
        .map(|c| {
            let mut map = BTreeMap::new();
            for v in c * CHUNK..((c + 1) * CHUNK).min(size) {
                let key = (code.iter().map(|&w| dist.scaled(v, w)).collect(), source.prob(v));
                *map.entry(key).or_insert(0u64) += 1;
            }
            map
        })
        .collect();
    let mut merged: BTreeMap<(Vec<BigInt>, Rational), u64> = BTreeMap::new();
    for part in parts {
        for (k, c) in part {
            *merged.entry(k).or_insert(0) += c;
        }
    }
    Profiles { groups: merged.into_iter().map(|((d, p), c)| (d, p, c)).collect() }
}

/// `alpha_{M max_w Q[d(V,w) <= D]}(P_V, Q)` for `Q` given as unnormalized
/// per-profile masses (per symbol).
fn profile_alpha(prof: &Profiles, dist: &DistortionSpec, m: usize, q_unnorm: &[Rational]) -> Result<Rational> {
    let zero = <Rational as Scalar>::zero();
    let one = <Rational as Scalar>::one();
    let p_agg: Vec<Rational> = prof.groups.iter().map(|(_, p, c)| p.clone() * Rational::from_i64(*c as i64)).collect();
    let q_agg: Vec<Rational> =
        prof.groups.iter().zip(q_unnorm).map(|((_, _, c), q)| q.clone() * Rational::from_i64(*c as i64)).collect();
    let z = Rational::total(q_agg.iter().cloned());
    if z == zero {
        return Err(Error::InvalidParameter("auxiliary distribution has no mass".into()));
    }
    let q_norm: Vec<Rational> = q_agg.iter().map(|q| q.clone() / z.clone()).collect();
    let ball_max = (0..m)
        .map(|i| {
            Rational::total(
                prof.groups.iter().zip(&q_norm).filter(|((d, _, _), _)| d[i] <= dist.limit).map(|(_, q)| q.clone()),
            )
        })
        .max()
        .unwrap_or(zero.clone());
    let beta = ball_max * Rational::from_i64(m as i64);
    if beta >= one {
        return Ok(zero);
    }
    Ok(alpha_beta(&p_agg, &q_norm, &beta)?.alpha)
}

/// Lower bound on the excess-distortion probability of `code`:
/// `alpha_{M max_{w in C} Q[d(V,w) <= D]}(P_V, Q)`, maximized over two
/// auxiliary measures: the uniform one and
/// `Q(v) ~ P_V(v) / sum_{w in C} t^{d(v,w) L}` with `t = 1 / (M |V| + 1)`
/// (`L` the common denominator of the distortions), which separates the
/// distance levels.
pub fn lossy_bound_code(source: &Source, dist: &DistortionSpec, code: &[usize]) -> Result<BoundReport<Rational>> {
    dist.check(source, code)?;
    check_budget("source alphabet", source.size() as u128, ALPHA_BETA_BUDGET)?;
    let m = code.len();
    let prof = profiles(source, dist, code);

    let uniform_q: Vec<Rational> = vec![<Rational as Scalar>::one(); prof.groups.len()];
    let uniform = profile_alpha(&prof, dist, m, &uniform_q)?;

    let t = ratio(1, (m * source.size() + 1) as i64);
    let tilted_q: Vec<Rational> = prof
        .groups
        .iter()
        .map(|(d, p, _)| {
            let denom = Rational::total(d.iter().map(|e| num_traits::pow(t.clone(), e.to_usize().unwrap_or(usize::MAX))));
            p.clone() / denom
        })
        .collect();
    let tilted = if tilted_q.iter().all(|q| *q == <Rational as Scalar>::zero()) {
        <Rational as Scalar>::zero()
    } else {
        profile_alpha(&prof, dist, m, &tilted_q)?
    };

    let (family, value) = if tilted > uniform { ("tilted", tilted.clone()) } else { ("uniform", uniform.clone()) };
    Ok(BoundReport::new("lossy_code", value)
        .with("family", family)
        .with("uniform", uniform.to_prob().to_string())
        .with("tilted", tilted.to_prob().to_string())
        .with("M", m.to_string())
        .with("D", dist.max_distortion.to_string()))
}

/// Relaxation of [`lossy_bound_code`] with the uniform auxiliary measure and
/// the ball measure maximized over all reconstruction symbols:
/// `alpha_{M max_w U[d(V,w) <= D]}(P_V, U)`. For the equiprobable binary
/// source it is `max(0, 1 - M Vol(n, floor(nD)) / 2^n)`.
pub fn lossy_bound_kostina(source: &Source, dist: &DistortionSpec, m: u64) -> Result<BoundReport<Rational>> {
    if m == 0 {
        return Err(Error::InvalidParameter("M must be at least 1".into()));
    }
    if source.size() as u128 != dist.source_size() {
        return Err(Error::AlphabetMismatch { left: source.size(), right: dist.source_size() as usize });
    }
    let zero = <Rational as Scalar>::zero();
    let one = <Rational as Scalar>::one();
    let size = source.size();
    let ball: BigInt = match &dist.measure {
        DistortionMeasure::Hamming { n } => ball_volume(*n, dist.hamming_radius().unwrap_or(*n)),
        DistortionMeasure::Matrix(rows) => {
            let width = rows[0].len();
            let best = (0..width).map(|w| (0..rows.len()).filter(|&v| dist.within(v, w)).count()).max().unwrap_or(0);
            BigInt::from(best)
        }
    };
    let beta = Rational::new(ball.clone() * BigInt::from(m), BigInt::from(size));
    let value = if beta >= one {
        zero
    } else {
        match source {
            Source::Uniform(_) => one - beta.clone(),
            Source::Explicit(p) => {
                check_budget("source alphabet", size as u128, ALPHA_BETA_BUDGET)?;
                let u = vec![ratio(1, size as i64); size];
                alpha_beta(p, &u, &beta)?.alpha
            }
        }
    };
    Ok(BoundReport::new("lossy_uniform", value)
        .with("beta", beta.to_prob().to_string())
        .with("ball", ball.to_string())
        .with("M", m.to_string())
        .with("D", dist.max_distortion.to_string()))
}

/// `max(0, 1 - M Vol(n, floor(nD)) / 2^n)` without enumerating the source.
pub fn bms_uniform_bound(n: usize, m: u64, max_distortion: &Rational) -> Result<Rational> {
    let dist = DistortionSpec::hamming(n, max_distortion.clone())?;
    let r = dist.hamming_radius().unwrap_or(n);
    let beta = Rational::new(ball_volume(n, r) * BigInt::from(m), pow2(n));
    let one = <Rational as Scalar>::one();
    Ok(if beta >= one { <Rational as Scalar>::zero() } else { one - beta })
}

/// Backward test channel of the equiprobable binary source under Hamming
/// distortion: `P(v|w)` is `BSC(D)^n`, and
/// `P(v|w) mu(v) = P_V(v) exp(-lambda* d(v,w))` with
/// `lambda* = n ln((1-D)/D)` and `mu = 2^-n (1-D)^-n` constant.
#[derive(Clone, Debug)]
pub struct TestChannel {
    pub n: usize,
    pub crossover: Rational,
    pub lambda_star: f64,
    /// Inputs are reconstruction words, outputs source words.
    pub pvw: ProductChannel<Rational>,
    pub mu: Rational,
    pub c_mu: Rational,
}

impl TestChannel {
    /// `exp(-lambda* d(v,w)) = (D/(1-D))^{d_H(v,w)}`.
    pub fn tilt(&self, v: usize, w: usize) -> Rational {
        let one = <Rational as Scalar>::one();
        let t = self.crossover.clone() / (one - self.crossover.clone());
        num_traits::pow(t, (v ^ w).count_ones() as usize)
    }

    /// `q~(v) = P_V(v) / (c_mu mu(v))`, uniform here.
    pub fn tilted_aux(&self) -> UniformMeasure {
        UniformMeasure { size: 1 << self.n }
    }

    pub fn tilted_aux_prob(&self, v: usize) -> Rational {
        Source::bms(self.n).prob(v) / (self.c_mu.clone() * self.mu.clone())
    }

    pub fn identity_holds(&self, v: usize, w: usize) -> bool {
        self.pvw.prob(w, v) * self.mu.clone() == Source::bms(self.n).prob(v) * self.tilt(v, w)
    }

    /// `-(1/lambda*) ln(gamma / c_mu)` for a ratio level `gamma`, exactly
    /// `k / n` when `gamma = 2^n D^k (1-D)^(n-k)`.
    pub fn zero_error_threshold(&self, gamma: &Rational) -> f64 {
        -(gamma.clone() / self.c_mu.clone()).to_prob().ln() / self.lambda_star
    }
}

pub fn bms_test_channel(n: usize, crossover: Rational) -> Result<TestChannel> {
    let zero = <Rational as Scalar>::zero();
    let half = ratio(1, 2);
    if crossover <= zero || crossover >= half {
        return Err(Error::InvalidParameter(format!("test-channel crossover D = {crossover} must lie in (0, 1/2)")));
    }
    if n == 0 || n > 24 {
        return Err(Error::InvalidParameter(format!("test channel length must lie in 1..=24 (got {n})")));
    }
    let one = <Rational as Scalar>::one();
    let bsc = Channel::bsc(crossover.clone())?;
    let pvw = product_channel(&bsc, n, DEFAULT_BUDGET)?;
    let comp = one.clone() - crossover.clone();
    let comp_n = num_traits::pow(comp.clone(), n);
    let mu = one / (Rational::from_integer(pow2(n)) * comp_n.clone());
    let c_mu = Rational::from_integer(pow2(n)) * comp_n;
    let lambda_star = n as f64 * (comp / crossover.clone()).to_prob().ln();
    Ok(TestChannel { n, crossover, lambda_star, pvw, mu, c_mu })
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum DistortionCase {
    /// Covering radius at most `nD`: no source word is left uncovered.
    ZeroError,
    /// Hamming balls of radius `floor(nD)` around the codewords are disjoint.
    DisjointBalls,
    Overlapping,
}

#[derive(Clone, Debug)]
pub struct Theorem3Report {
    pub classification: QPClassification<Rational>,
    pub covering_radius: usize,
    pub min_distance: Option<usize>,
    /// Smallest `D` with zero excess distortion: `covering_radius / n`.
    pub threshold: Rational,
    pub case: DistortionCase,
    pub excess: Rational,
    pub bound: BoundReport<Rational>,
    pub relaxed: BoundReport<Rational>,
    pub equality: bool,
    /// Failed consistency checks; empty when everything holds.
    pub violations: Vec<String>,
}

/// Quasi-perfect classification of a binary code for the test channel
/// `BSC(D)^n` with the tilted auxiliary measure, together with the exact
/// excess distortion, its lower bounds and the case split on `D`. Failed
/// checks are listed in `violations` rather than returned as errors.
pub fn theorem3_check(code: &Codebook, max_distortion: &Rational) -> Result<Theorem3Report> {
    let n = code.n();
    let dist = DistortionSpec::hamming(n, max_distortion.clone())?;
    let words = reconstructions(code)?;
    let source = Source::bms(n);
    let test = bms_test_channel(n, max_distortion.clone())?;
    let aux = test.tilted_aux();
    if !q_in_qc(&test.pvw, &aux)? {
        return Err(Error::NotSymmetryPreserving);
    }
    let classification = classify_qp(code, &test.pvw, &aux)?;
    let excess = excess_distortion(&source, &dist, &words)?;
    let bound = lossy_bound_code(&source, &dist, &words)?;
    let relaxed = lossy_bound_kostina(&source, &dist, words.len() as u64)?;

    let covering_radius = (0..1usize << n)
        .into_par_iter()
        .map(|v| words.iter().map(|&w| (v ^ w).count_ones() as usize).min().unwrap())
        .max()
        .unwrap_or(0);
    let min_distance = code.min_distance();
    let radius = dist.hamming_radius().unwrap_or(n);
    let threshold = ratio(covering_radius as i64, n as i64);
    let case = if threshold <= *max_distortion {
        DistortionCase::ZeroError
    } else if min_distance.is_none_or(|d| 2 * radius < d) {
        DistortionCase::DisjointBalls
    } else {
        DistortionCase::Overlapping
    };

    let zero = <Rational as Scalar>::zero();
    let one = <Rational as Scalar>::one();
    let mut violations = Vec::new();
    if classification.verdict.is_quasi_perfect() {
        if excess != bound.value {
            violations.push(format!("quasi-perfect code with excess {excess} above bound {}", bound.value));
        }
        let comp = one.clone() - max_distortion.clone();
        let expected = Rational::from_integer(pow2(n))
            * num_traits::pow(max_distortion.clone(), covering_radius)
            * num_traits::pow(comp, n - covering_radius);
        if classification.witness_gamma.finite() != Some(&expected) {
            violations.push("witness level differs from the covering-radius level".into());
        }
    }
    match case {
        DistortionCase::ZeroError if excess != zero => {
            violations.push(format!("covering radius within nD but excess {excess}"));
        }
        DistortionCase::DisjointBalls => {
            let covered = Rational::new(ball_volume(n, radius) * BigInt::from(words.len()), pow2(n));
            if excess != one.clone() - covered {
                violations.push("disjoint balls but excess differs from 1 - M Vol / 2^n".into());
            }
        }
        _ => {}
    }
    if relaxed.value > bound.value || bound.value > excess {
        violations.push("bound ordering violated".into());
    }
    let equality = excess == bound.value;
    let bound = bound.compare_with(&excess);
    Ok(Theorem3Report {
        classification,
        covering_radius,
        min_distance,
        threshold,
        case,
        excess,
        bound,
        relaxed,
        equality,
        violations,
    })
}
