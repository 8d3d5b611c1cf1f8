//! Discrete channels, auxiliary output measures and the symmetry tests that
//! decide which auxiliary measures keep a channel symmetric.
//!
//! Inputs and outputs are dense indices. A block of `n` channel uses is a
//! [`ProductChannel`], which evaluates `W^n(y|x) = prod_i W(y_i|x_i)` lazily
//! so that `|Y|^n` never has to be materialized; the first coordinate of a
//! block is its most significant base-`|X|` (or base-`|Y|`) digit.

use crate::error::{check_budget, saturating_pow, Error, Result, DEFAULT_BUDGET};
use crate::scalar::{binomial, Level, Scalar};

/// Finite-alphabet channel `W(y|x)` accessed by index.
pub trait DiscreteChannel<S: Scalar>: Sync {
    fn input_count(&self) -> usize;
    fn output_count(&self) -> usize;
    fn prob(&self, x: usize, y: usize) -> S;

    fn row(&self, x: usize) -> Vec<S> {
        (0..self.output_count()).map(|y| self.prob(x, y)).collect()
    }

    /// Sorted-row symmetry decision (rows are permutations of each other).
    fn symmetry(&self) -> SymmetryReport<S>;
}

/// Outcome of [`is_symmetric`]: the decision plus the sorted row it was
/// based on.
#[derive(Clone, Debug, PartialEq)]
pub struct SymmetryReport<S> {
    pub symmetric: bool,
    pub fingerprint: Vec<S>,
}

pub fn is_symmetric<S: Scalar, C: DiscreteChannel<S> + ?Sized>(ch: &C) -> SymmetryReport<S> {
    ch.symmetry()
}

/// Dense transition matrix, one row per input.
#[derive(Clone, Debug, PartialEq)]
pub struct Channel<S> {
    rows: Vec<Vec<S>>,
}

impl<S: Scalar> Channel<S> {
    pub fn new(rows: Vec<Vec<S>>) -> Result<Self> {
        let width = rows.first().map(Vec::len).unwrap_or(0);
        if rows.is_empty() || width == 0 {
            return Err(Error::InvalidChannel("empty alphabet".into()));
        }
        for (x, row) in rows.iter().enumerate() {
            if row.len() != width {
                return Err(Error::InvalidChannel(format!(
                    "row {x} has {} entries, expected {width}",
                    row.len()
                )));
            }
            if row.iter().any(|p| *p < S::zero()) {
                return Err(Error::InvalidChannel(format!("row {x} has a negative entry")));
            }
            let total = S::total(row.iter().cloned());
            if !row_sums_to_one(&total) {
                return Err(Error::InvalidChannel(format!(
                    "row {x} sums to {}, not 1",
                    total.to_prob()
                )));
            }
        }
        Ok(Self { rows })
    }

    pub fn rows(&self) -> &[Vec<S>] {
        &self.rows
    }

    /// Channel with the same transition law converted to another backend.
    pub fn convert<T: Scalar>(&self, f: impl Fn(&S) -> T) -> Channel<T> {
        Channel { rows: self.rows.iter().map(|r| r.iter().map(&f).collect()).collect() }
    }

    pub fn to_f64(&self) -> Channel<f64> {
        self.convert(|v| v.to_f64())
    }

    /// Binary symmetric channel with crossover `p`.
    pub fn bsc(p: S) -> Result<Self> {
        Self::new(vec![vec![S::one() - p.clone(), p.clone()], vec![p.clone(), S::one() - p]])
    }

    /// Noiseless channel on `k` symbols.
    pub fn noiseless(k: usize) -> Result<Self> {
        Self::new(
            (0..k)
                .map(|x| (0..k).map(|y| if x == y { S::one() } else { S::zero() }).collect())
                .collect(),
        )
    }
}

fn row_sums_to_one<S: Scalar>(total: &S) -> bool {
    if S::EXACT {
        *total == S::one()
    } else {
        (total.to_f64() - 1.0).abs() <= 1e-12
    }
}

fn sorted_desc<S: Scalar>(row: &[S]) -> Vec<S> {
    let mut v = row.to_vec();
    v.sort_by(|a, b| b.total_cmp(a));
    v
}

fn rows_match<S: Scalar>(a: &[S], b: &[S]) -> bool {
    a.len() == b.len() && a.iter().zip(b).all(|(x, y)| if S::EXACT { x == y } else { x.agrees(y) })
}

impl<S: Scalar> DiscreteChannel<S> for Channel<S> {
    fn input_count(&self) -> usize {
        self.rows.len()
    }
    fn output_count(&self) -> usize {
        self.rows[0].len()
    }
    fn prob(&self, x: usize, y: usize) -> S {
        self.rows[x][y].clone()
    }
    fn row(&self, x: usize) -> Vec<S> {
        self.rows[x].clone()
    }
    fn symmetry(&self) -> SymmetryReport<S> {
        let fingerprint = sorted_desc(&self.rows[0]);
        let symmetric = self.rows[1..].iter().all(|r| rows_match(&sorted_desc(r), &fingerprint));
        SymmetryReport { symmetric, fingerprint }
    }
}

/// `n` independent uses of a base channel.
#[derive(Clone, Debug)]
pub struct ProductChannel<S> {
    base: Channel<S>,
    n: usize,
    inputs: usize,
    outputs: usize,
}

/// Builds the `n`-fold memoryless extension of `ch`, refusing output spaces
/// above `budget` points.
pub fn product_channel<S: Scalar>(ch: &Channel<S>, n: usize, budget: u128) -> Result<ProductChannel<S>> {
    if n == 0 {
        return Err(Error::InvalidParameter("block length must be at least 1".into()));
    }
    let outputs = saturating_pow(ch.output_count(), n);
    let inputs = saturating_pow(ch.input_count(), n);
    check_budget(&format!("output space |Y|^{n}"), outputs, budget)?;
    check_budget(&format!("input space |X|^{n}"), inputs, budget)?;
    Ok(ProductChannel { base: ch.clone(), n, inputs: inputs as usize, outputs: outputs as usize })
}

impl<S: Scalar> ProductChannel<S> {
    pub fn base(&self) -> &Channel<S> {
        &self.base
    }

    pub fn block_length(&self) -> usize {
        self.n
    }

    /// Dense matrix of the block channel (only sensible for small blocks).
    pub fn materialize(&self) -> Result<Channel<S>> {
        check_budget("block transition matrix", (self.inputs as u128) * (self.outputs as u128), DEFAULT_BUDGET)?;
        Channel::new((0..self.inputs).map(|x| self.row(x)).collect())
    }
}

impl<S: Scalar> DiscreteChannel<S> for ProductChannel<S> {
    fn input_count(&self) -> usize {
        self.inputs
    }
    fn output_count(&self) -> usize {
        self.outputs
    }
    fn prob(&self, x: usize, y: usize) -> S {
        let bx = self.base.input_count();
        let by = self.base.output_count();
        let (mut x, mut y) = (x, y);
        let mut acc = S::one();
        for _ in 0..self.n {
            let p = &self.base.rows[x % bx][y % by];
            if p.is_zero() {
                return S::zero();
            }
            acc = acc * p.clone();
            x /= bx;
            y /= by;
        }
        acc
    }
    fn symmetry(&self) -> SymmetryReport<S> {
        // rows of W^n are permutations of each other iff those of W are
        let symmetric = self.base.symmetry().symmetric;
        SymmetryReport { symmetric, fingerprint: sorted_desc(&self.row(0)) }
    }
}

/// Splits a block index into `n` base-`radix` digits, most significant first.
pub fn decode_index(mut index: usize, radix: usize, n: usize) -> Vec<usize> {
    let mut digits = vec![0; n];
    for slot in digits.iter_mut().rev() {
        *slot = index % radix;
        index /= radix;
    }
    digits
}

/// Inverse of [`decode_index`].
pub fn encode_index(digits: &[usize], radix: usize) -> usize {
    digits.iter().fold(0, |acc, &d| acc * radix + d)
}

/// Extended likelihood ratio `w / q` with `0/0 = 0` and `w/0 = +inf`.
pub fn ratio_convention<S: Scalar>(w: &S, q: &S) -> Level<S> {
    if q.is_zero() {
        if w.is_zero() {
            Level::Finite(S::zero())
        } else {
            Level::Infinite
        }
    } else {
        Level::Finite(w.clone() / q.clone())
    }
}

/// q-ary symmetric erasure/error channel parameters.
#[derive(Clone, Debug, PartialEq)]
pub struct ErasureErrorParams<S> {
    pub q: usize,
    pub eps: S,
    pub delta: S,
}

impl<S: Scalar> ErasureErrorParams<S> {
    pub fn new(q: usize, eps: S, delta: S) -> Result<Self> {
        if q < 2 {
            return Err(Error::InvalidParameter(format!("alphabet size q = {q} must be at least 2")));
        }
        if eps < S::zero() || delta < S::zero() || !(eps < S::one()) || !(delta < S::one()) {
            return Err(Error::InvalidParameter("eps and delta must lie in [0, 1)".into()));
        }
        let direct = S::one() - delta.clone() - eps.clone();
        if direct < S::zero() {
            return Err(Error::InvalidParameter("delta + eps must not exceed 1".into()));
        }
        let p = Self { q, eps, delta };
        if !(p.flip_mass() < direct) {
            return Err(Error::Dominance { flip: p.flip_mass().to_f64(), direct: direct.to_f64() });
        }
        Ok(p)
    }

    /// Probability of each particular wrong symbol, `eps / (q-1)`.
    pub fn flip_mass(&self) -> S {
        self.eps.clone() / S::from_i64(self.q as i64 - 1)
    }

    /// Probability of the transmitted symbol, `1 - delta - eps`.
    pub fn direct_mass(&self) -> S {
        S::one() - self.delta.clone() - self.eps.clone()
    }

    /// `phi = (eps/(q-1)) / (1 - delta - eps)`.
    pub fn phi(&self) -> S {
        self.flip_mass() / self.direct_mass()
    }

    pub fn erasure_symbol(&self) -> usize {
        self.q
    }

    /// `W^n(y|x)` for an output with `e` erasures and `d` flips.
    pub fn block_likelihood(&self, n: usize, e: usize, d: usize) -> S {
        assert!(e + d <= n);
        self.delta.powi(e as u32) * self.flip_mass().powi(d as u32) * self.direct_mass().powi((n - e - d) as u32)
    }

    pub fn to_f64(&self) -> ErasureErrorParams<f64> {
        ErasureErrorParams { q: self.q, eps: self.eps.to_f64(), delta: self.delta.to_f64() }
    }
}

/// Single-use erasure/error channel: output alphabet is the `q` input symbols
/// followed by the erasure symbol.
pub fn erasure_error_channel<S: Scalar>(p: &ErasureErrorParams<S>) -> Channel<S> {
    let rows = (0..p.q)
        .map(|x| {
            (0..=p.q)
                .map(|y| {
                    if y == p.q {
                        p.delta.clone()
                    } else if y == x {
                        p.direct_mass()
                    } else {
                        p.flip_mass()
                    }
                })
                .collect()
        })
        .collect();
    Channel::new(rows).expect("erasure/error rows are stochastic by construction")
}

/// Auxiliary measure `Q` on a channel's output alphabet.
pub trait AuxMeasure<S: Scalar>: Sync {
    fn output_count(&self) -> usize;
    fn prob(&self, y: usize) -> S;

    /// True when the measure is known to be equiprobable.
    fn is_uniform(&self) -> bool {
        false
    }

    fn describe(&self) -> String;
}

/// Explicitly tabulated output distribution.
#[derive(Clone, Debug, PartialEq)]
pub struct OutputDistribution<S> {
    probs: Vec<S>,
    uniform: bool,
}

impl<S: Scalar> OutputDistribution<S> {
    pub fn new(probs: Vec<S>) -> Result<Self> {
        if probs.is_empty() {
            return Err(Error::InvalidParameter("empty distribution".into()));
        }
        if probs.iter().any(|p| *p < S::zero()) {
            return Err(Error::InvalidParameter("negative probability".into()));
        }
        let total = S::total(probs.iter().cloned());
        if !row_sums_to_one(&total) {
            return Err(Error::InvalidParameter(format!("distribution sums to {}", total.to_prob())));
        }
        let uniform = probs.iter().all(|p| p.same_level(&probs[0]));
        Ok(Self { probs, uniform })
    }

    pub fn uniform(k: usize) -> Self {
        let p = S::one() / S::from_i64(k as i64);
        Self { probs: vec![p; k], uniform: true }
    }

    pub fn probs(&self) -> &[S] {
        &self.probs
    }

    /// Output law of `ch` under input `x`.
    pub fn output_law<C: DiscreteChannel<S> + ?Sized>(ch: &C, x: usize) -> Result<Self> {
        Self::new(ch.row(x))
    }
}

impl<S: Scalar> AuxMeasure<S> for OutputDistribution<S> {
    fn output_count(&self) -> usize {
        self.probs.len()
    }
    fn prob(&self, y: usize) -> S {
        self.probs[y].clone()
    }
    fn is_uniform(&self) -> bool {
        self.uniform
    }
    fn describe(&self) -> String {
        if self.uniform {
            "uniform".into()
        } else {
            "explicit".into()
        }
    }
}

/// Equiprobable measure on `size` outputs without a table.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct UniformMeasure {
    pub size: usize,
}

impl<S: Scalar> AuxMeasure<S> for UniformMeasure {
    fn output_count(&self) -> usize {
        self.size
    }
    fn prob(&self, _y: usize) -> S {
        S::one() / S::from_i64(self.size as i64)
    }
    fn is_uniform(&self) -> bool {
        true
    }
    fn describe(&self) -> String {
        "uniform".into()
    }
}

/// Ratio-level table of one input: `(level, W-mass)` for levels carrying
/// channel mass, sorted descending and merged per [`Scalar::same_level`].
pub(crate) fn channel_mass_by_level<S: Scalar, C, Q>(ch: &C, q: &Q, x: usize) -> Vec<(Level<S>, S)>
where
    C: DiscreteChannel<S> + ?Sized,
    Q: AuxMeasure<S> + ?Sized,
{
    let mut pairs: Vec<(Level<S>, S)> = (0..ch.output_count())
        .filter_map(|y| {
            let w = ch.prob(x, y);
            if w.is_zero() {
                None
            } else {
                Some((ratio_convention(&w, &q.prob(y)), w))
            }
        })
        .collect();
    pairs.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut merged: Vec<(Level<S>, Vec<S>)> = Vec::new();
    for (level, w) in pairs {
        match merged.last_mut() {
            Some((l, ws)) if l.same_level(&level) => ws.push(w),
            _ => merged.push((level, vec![w])),
        }
    }
    merged.into_iter().map(|(l, ws)| (l, S::total(ws))).collect()
}

/// Whether `Q` keeps `ch` symmetric: `F_x(tau, Q) = sum_y W(y|x) 1[W(y|x) >= tau Q(y)]`
/// must not depend on `x`. Decided exactly by comparing, across inputs, the
/// channel mass carried by every ratio level.
pub fn q_in_qc<S: Scalar, C, Q>(ch: &C, q: &Q) -> Result<bool>
where
    C: DiscreteChannel<S> + ?Sized,
    Q: AuxMeasure<S> + ?Sized,
{
    if q.output_count() != ch.output_count() {
        return Err(Error::AlphabetMismatch { left: ch.output_count(), right: q.output_count() });
    }
    if !ch.symmetry().symmetric {
        return Err(Error::NotSymmetric);
    }
    if q.is_uniform() {
        return Ok(true);
    }
    check_budget(
        "symmetry-preservation check",
        (ch.input_count() as u128) * (ch.output_count() as u128),
        DEFAULT_BUDGET * 4,
    )?;
    let reference = channel_mass_by_level(ch, q, 0);
    for x in 1..ch.input_count() {
        let table = channel_mass_by_level(ch, q, x);
        let same = table.len() == reference.len()
            && table.iter().zip(&reference).all(|((la, wa), (lb, wb))| {
                la.same_level(lb) && if S::EXACT { wa == wb } else { wa.agrees(wb) }
            });
        if !same {
            return Ok(false);
        }
    }
    Ok(true)
}

/// `F_x(tau, Q)` by direct summation.
pub fn tail_mass<S: Scalar, C, Q>(ch: &C, q: &Q, x: usize, tau: &Level<S>) -> S
where
    C: DiscreteChannel<S> + ?Sized,
    Q: AuxMeasure<S> + ?Sized,
{
    S::total((0..ch.output_count()).filter_map(|y| {
        let w = ch.prob(x, y);
        let r = ratio_convention(&w, &q.prob(y));
        (r.total_cmp(tau) != std::cmp::Ordering::Less).then_some(w)
    }))
}

/// Per-erasure-count tilting exponents `Psi(0..=n)`.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Psi(pub Vec<u32>);

impl Psi {
    pub fn constant(n: usize, value: u32) -> Self {
        Psi(vec![value; n + 1])
    }

    pub fn validate(&self, n: usize) -> Result<()> {
        if self.0.len() != n + 1 {
            return Err(Error::InvalidParameter(format!(
                "Psi table has {} entries, expected n+1 = {}",
                self.0.len(),
                n + 1
            )));
        }
        for (e, &v) in self.0.iter().enumerate() {
            if v as usize > n - e {
                return Err(Error::InvalidPsi { e, value: v, max: n - e });
            }
        }
        Ok(())
    }

    pub fn render(&self) -> String {
        self.0.iter().map(u32::to_string).collect::<Vec<_>>().join(" ")
    }
}

/// Tilted auxiliary distribution on `(Y ∪ {e})^n` that depends on an output
/// only through its erasure count:
/// `Q*(y) = delta^e (eps/(q-1))^Psi(e) (1-delta-eps)^(n-e-Psi(e)) / c`.
#[derive(Clone, Debug)]
pub struct QStar<S> {
    pub n: usize,
    pub params: ErasureErrorParams<S>,
    pub psi: Psi,
    /// Normalizing constant.
    pub c: S,
    weights: Vec<S>,
}

impl<S: Scalar> QStar<S> {
    /// Unnormalized mass of one output with `e` erasures.
    pub fn weight(&self, e: usize) -> &S {
        &self.weights[e]
    }

    pub fn prob_by_erasures(&self, e: usize) -> S {
        self.weights[e].clone() / self.c.clone()
    }

    pub fn to_explicit(&self) -> Result<OutputDistribution<S>> {
        let size = saturating_pow(self.params.q + 1, self.n);
        check_budget("tilted output distribution", size, DEFAULT_BUDGET)?;
        OutputDistribution::new((0..size as usize).map(|y| AuxMeasure::prob(self, y)).collect())
    }

    fn erasures(&self, y: usize) -> usize {
        let radix = self.params.q + 1;
        let mut y = y;
        let mut e = 0;
        for _ in 0..self.n {
            if y % radix == self.params.q {
                e += 1;
            }
            y /= radix;
        }
        e
    }
}

impl<S: Scalar> AuxMeasure<S> for QStar<S> {
    fn output_count(&self) -> usize {
        saturating_pow(self.params.q + 1, self.n).min(usize::MAX as u128) as usize
    }
    fn prob(&self, y: usize) -> S {
        self.prob_by_erasures(self.erasures(y))
    }
    fn describe(&self) -> String {
        format!("qstar(psi={})", self.psi.render())
    }
}

/// Builds `Q*` for block length `n` and the exponent table `psi`.
///
/// With `eps = 0` the `0^0 = 1` convention makes this the limit distribution
/// supported on outputs whose `Psi(e_y) = 0`.
pub fn qstar_erasure<S: Scalar>(n: usize, p: &ErasureErrorParams<S>, psi: &Psi) -> Result<QStar<S>> {
    psi.validate(n)?;
    let weights: Vec<S> = (0..=n)
        .map(|e| {
            let k = psi.0[e] as usize;
            p.delta.powi(e as u32) * p.flip_mass().powi(k as u32) * p.direct_mass().powi((n - e - k) as u32)
        })
        .collect();
    // c = sum_e C(n,e) q^(n-e) (1-delta-eps)^(n-e) delta^e phi^Psi(e)
    let c = S::total((0..=n).map(|e| {
        let count = binomial(n as u64, e as u64) * num_bigint::BigInt::from(p.q).pow((n - e) as u32);
        S::from_bigint(&count) * weights[e].clone()
    }));
    if c.is_zero() {
        return Err(Error::InvalidParameter("tilted distribution has zero total mass".into()));
    }
    Ok(QStar { n, params: p.clone(), psi: psi.clone(), c, weights })
}
