//! Lower bounds on the error probability of codes over symmetric channels.
//!
//! * [`lemma3_bound`]: `Gamma(gamma) = gamma (Q_i(gamma) - 1/M) + sum_{tau <= gamma} tau Q_o(tau)`
//!   for one `gamma`;
//! * [`metaconverse_symmetric`]: its maximum over `gamma`, which equals
//!   `alpha_{1/M}(W(.|x), Q)`;
//! * [`erasure_error_bound`] / [`optimize_psi`] / [`mds_bound`]: closed forms
//!   for the q-ary erasure/error channel;
//! * [`jscc_bound`] / [`lemma4_error`]: joint source-channel coding.

use std::collections::BTreeMap;

use num_bigint::BigInt;

use crate::channel::{q_in_qc, AuxMeasure, DiscreteChannel, ErasureErrorParams, Psi};
use crate::codes::map_error_probability;
use crate::error::{Error, Result};
use crate::geometry::{classify_qp_source, spectrum, RatioSpectrum};
use crate::hypothesis::alpha_beta;
use crate::scalar::{binomial, Level, ProbValue, Scalar};

/// A bound value with the parameters that produced it.
#[derive(Clone, Debug, PartialEq)]
pub struct BoundReport<S> {
    pub name: String,
    /// Raw value; may be negative for a poorly chosen `gamma`.
    pub value: S,
    pub witness: BTreeMap<String, String>,
    /// Set when the bound has been compared with an exact error probability.
    pub attained: Option<bool>,
}

impl<S: Scalar> BoundReport<S> {
    pub(crate) fn new(name: &str, value: S) -> Self {
        Self { name: name.to_string(), value, witness: BTreeMap::new(), attained: None }
    }

    pub(crate) fn with(mut self, key: &str, value: impl Into<String>) -> Self {
        self.witness.insert(key.to_string(), value.into());
        self
    }

    /// Value clipped to `[0, 1]` for display.
    pub fn display_value(&self) -> ProbValue {
        if self.value < S::zero() {
            S::zero().to_prob()
        } else if self.value > S::one() {
            S::one().to_prob()
        } else {
            self.value.to_prob()
        }
    }

    /// Records whether `pe` meets the bound with equality.
    pub fn compare_with(mut self, pe: &S) -> Self {
        self.attained = Some(if S::EXACT { *pe == self.value } else { pe.agrees(&self.value) });
        self
    }
}

fn inv_m<S: Scalar>(m: u64) -> Result<S> {
    if m == 0 {
        return Err(Error::InvalidParameter("M must be at least 1".into()));
    }
    Ok(S::one() / S::from_bigint(&BigInt::from(m)))
}

fn symmetric_spectrum<S, C, Q>(ch: &C, q: &Q) -> Result<RatioSpectrum<S>>
where
    S: Scalar,
    C: DiscreteChannel<S> + ?Sized,
    Q: AuxMeasure<S> + ?Sized,
{
    if !q_in_qc(ch, q)? {
        return Err(Error::NotSymmetryPreserving);
    }
    spectrum(ch, q, 0)
}

fn gamma_expr<S: Scalar>(spec: &RatioSpectrum<S>, inv_m: &S, gamma: &S) -> S {
    let g = Level::Finite(gamma.clone());
    gamma.clone() * (spec.q_interior(&g) - inv_m.clone()) + spec.w_at_or_below(&g)
}

/// `Gamma(gamma)` for a symmetric channel and `Q` in the symmetry-preserving
/// set.
pub fn lemma3_bound<S, C, Q>(ch: &C, q: &Q, m: u64, gamma: &S) -> Result<BoundReport<S>>
where
    S: Scalar,
    C: DiscreteChannel<S> + ?Sized,
    Q: AuxMeasure<S> + ?Sized,
{
    if *gamma < S::zero() {
        return Err(Error::InvalidParameter("gamma must be non-negative".into()));
    }
    let spec = symmetric_spectrum(ch, q)?;
    let value = gamma_expr(&spec, &inv_m(m)?, gamma);
    Ok(BoundReport::new("lemma3", value)
        .with("gamma", gamma.to_prob().to_string())
        .with("Q", q.describe())
        .with("M", m.to_string()))
}

/// `max_gamma Gamma(gamma)` over the finite ratio levels and 0, checked
/// against `alpha_{1/M}(W(.|x0), Q)`.
pub fn metaconverse_symmetric<S, C, Q>(ch: &C, q: &Q, m: u64) -> Result<BoundReport<S>>
where
    S: Scalar,
    C: DiscreteChannel<S> + ?Sized,
    Q: AuxMeasure<S> + ?Sized,
{
    let spec = symmetric_spectrum(ch, q)?;
    let inv = inv_m::<S>(m)?;
    let mut candidates: Vec<S> = spec.finite_levels().cloned().collect();
    if !candidates.iter().any(Scalar::is_zero) {
        candidates.push(S::zero());
    }
    // descending, so ties keep the largest gamma
    let mut best: Option<(S, S)> = None;
    for g in candidates {
        let v = gamma_expr(&spec, &inv, &g);
        if best.as_ref().is_none_or(|(bv, _)| v > *bv) {
            best = Some((v, g));
        }
    }
    let (value, gamma) = best.expect("at least gamma = 0 is a candidate");

    let row = ch.row(0);
    let qv: Vec<S> = (0..q.output_count()).map(|y| q.prob(y)).collect();
    let np = alpha_beta(&row, &qv, &inv)?;
    let agree = if S::EXACT { np.alpha == value } else { np.alpha.agrees(&value) };
    if !agree {
        return Err(Error::Witness(format!(
            "level scan gives {} but alpha_1/M gives {}",
            value.to_prob(),
            np.alpha.to_prob()
        )));
    }
    Ok(BoundReport::new("metaconverse", value)
        .with("gamma", gamma.to_prob().to_string())
        .with("Q", q.describe())
        .with("M", m.to_string())
        .with("np_gamma", np.gamma.render(15))
        .with("np_theta", np.theta.to_prob().to_string()))
}

fn big_pow(base: usize, exp: usize) -> BigInt {
    num_traits::pow(BigInt::from(base), exp)
}

/// Per-erasure-count contribution to the erasure/error bound.
fn erasure_term<S: Scalar>(n: usize, e: usize, p: &ErasureErrorParams<S>, inv: &S, psi: u32) -> S {
    let phi = p.phi();
    let head = S::from_bigint(&binomial(n as u64, e as u64)) * p.delta.powi(e as u32) * p.direct_mass().powi((n - e) as u32);
    let tilted = S::total((0..=n - e).map(|d| {
        let mult = binomial((n - e) as u64, d as u64) * big_pow(p.q - 1, d);
        S::from_bigint(&mult) * phi.powi((d as u32).max(psi))
    }));
    let sub = S::from_bigint(&big_pow(p.q, n - e)) * phi.powi(psi) * inv.clone();
    head * (tilted - sub)
}

/// Closed-form bound for `n` uses of the q-ary erasure/error channel with
/// the tilted auxiliary distribution of exponent table `psi`.
pub fn erasure_error_bound<S: Scalar>(n: usize, p: &ErasureErrorParams<S>, m: u64, psi: &Psi) -> Result<BoundReport<S>> {
    psi.validate(n)?;
    let inv = inv_m::<S>(m)?;
    let value = S::total((0..=n).map(|e| erasure_term(n, e, p, &inv, psi.0[e])));
    let c = normalizer(n, p, psi);
    Ok(BoundReport::new("erasure_error", value)
        .with("psi", psi.render())
        .with("gamma", c.to_prob().to_string())
        .with("M", m.to_string()))
}

fn normalizer<S: Scalar>(n: usize, p: &ErasureErrorParams<S>, psi: &Psi) -> S {
    let phi = p.phi();
    S::total((0..=n).map(|e| {
        let mult = binomial(n as u64, e as u64) * big_pow(p.q, n - e);
        S::from_bigint(&mult)
            * p.direct_mass().powi((n - e) as u32)
            * p.delta.powi(e as u32)
            * phi.powi(psi.0[e])
    }))
}

/// Largest `k` with `q^k <= M`.
pub fn floor_log(q: usize, m: u64) -> usize {
    let mut k = 0;
    let mut pow = BigInt::from(q);
    while pow <= BigInt::from(m) {
        k += 1;
        pow *= q;
    }
    k
}

/// `Psi(e) = max(0, floor((ceil(n - log_q M) - e + 1) / 2))`, clamped to
/// `n - e`: about half the residual redundancy after `e` erasures.
pub fn psi_binary_rule(n: usize, q: usize, m: u64) -> Psi {
    let redundancy = n as i64 - floor_log(q, m) as i64;
    Psi((0..=n)
        .map(|e| {
            let v = ((redundancy - e as i64 + 1).max(0) / 2) as usize;
            v.min(n - e) as u32
        })
        .collect())
}

/// `Psi(e) = 0` exactly when `e > n - log_q M` (i.e. `q^(n-e) < M`), else 1.
pub fn psi_erasure_limit(n: usize, q: usize, m: u64) -> Psi {
    Psi((0..=n)
        .map(|e| {
            if big_pow(q, n - e) < BigInt::from(m) || e == n {
                0
            } else {
                1
            }
        })
        .collect())
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum PsiFamily {
    /// Independent scan of `Psi(e)` over `0..=n-e` for every `e`.
    Scan,
    /// [`psi_binary_rule`].
    Binary,
    /// [`psi_erasure_limit`].
    ErasureLimit,
    Fixed(Psi),
}

/// Best exponent table within a family. The bound is a sum of one term per
/// erasure count, so the per-`e` scan is optimal over integer tables; ties go
/// to the smallest exponent.
pub fn optimize_psi<S: Scalar>(n: usize, p: &ErasureErrorParams<S>, m: u64, family: &PsiFamily) -> Result<(Psi, BoundReport<S>)> {
    let psi = match family {
        PsiFamily::Binary => psi_binary_rule(n, p.q, m),
        PsiFamily::ErasureLimit => psi_erasure_limit(n, p.q, m),
        PsiFamily::Fixed(psi) => psi.clone(),
        PsiFamily::Scan => {
            let inv = inv_m::<S>(m)?;
            Psi((0..=n)
                .map(|e| {
                    let mut best = (erasure_term(n, e, p, &inv, 0), 0u32);
                    for k in 1..=(n - e) as u32 {
                        let v = erasure_term(n, e, p, &inv, k);
                        if v > best.0 && !v.agrees(&best.0) {
                            best = (v, k);
                        }
                    }
                    best.1
                })
                .collect())
        }
    };
    let report = erasure_error_bound(n, p, m, &psi)?;
    Ok((psi, report))
}

/// `sum_{e : q^(n-e) < M} C(n,e) delta^e (1-delta)^(n-e) (1 - q^(n-e)/M)`,
/// the bound for the pure q-ary erasure channel.
pub fn mds_bound<S: Scalar>(n: usize, q: usize, delta: &S, m: u64) -> Result<BoundReport<S>> {
    if *delta < S::zero() || *delta > S::one() {
        return Err(Error::InvalidParameter("delta must lie in [0, 1]".into()));
    }
    let inv = inv_m::<S>(m)?;
    let mbig = BigInt::from(m);
    let first = (0..=n).find(|&e| big_pow(q, n - e) < mbig);
    let value = match first {
        None => S::zero(),
        Some(first) => S::total((first..=n).map(|e| {
            S::from_bigint(&binomial(n as u64, e as u64))
                * delta.powi(e as u32)
                * (S::one() - delta.clone()).powi((n - e) as u32)
                * (S::one() - S::from_bigint(&big_pow(q, n - e)) * inv.clone())
        })),
    };
    Ok(BoundReport::new("mds", value)
        .with("first_e", first.map_or("none".to_string(), |e| e.to_string()))
        .with("M", m.to_string()))
}

fn jscc_objective<S: Scalar>(spec: &RatioSpectrum<S>, source: &[S], gamma: &S) -> S {
    let mut w = Vec::new();
    let mut qi = Vec::new();
    for pv in source.iter().filter(|p| !p.is_zero()) {
        let scaled = Level::Finite(gamma.clone() / pv.clone());
        w.push(pv.clone() * spec.w_at_or_below(&scaled));
        qi.push(spec.q_interior(&scaled));
    }
    S::total(w) + gamma.clone() * S::total(qi) - gamma.clone()
}

/// Joint source-channel bound: the maximum over `gamma'` of
/// `sum_v sum_{tau <= gamma'/P_V(v)} P_V(v) tau Q_o(tau) + gamma' sum_v Q_i(gamma'/P_V(v)) - gamma'`,
/// scanned over the breakpoints `P_V(v) tau` and 0.
pub fn jscc_bound<S, C, Q>(source: &[S], ch: &C, q: &Q) -> Result<BoundReport<S>>
where
    S: Scalar,
    C: DiscreteChannel<S> + ?Sized,
    Q: AuxMeasure<S> + ?Sized,
{
    check_source(source)?;
    let spec = symmetric_spectrum(ch, q)?;
    let mut grid: Vec<S> = vec![S::zero()];
    for pv in source.iter().filter(|p| !p.is_zero()) {
        grid.extend(spec.finite_levels().map(|t| pv.clone() * t.clone()));
    }
    grid.sort_by(|a, b| b.total_cmp(a));
    grid.dedup_by(|a, b| a.same_level(b));
    let mut best: Option<(S, S)> = None;
    for g in grid {
        let v = jscc_objective(&spec, source, &g);
        if best.as_ref().is_none_or(|(bv, _)| v > *bv) {
            best = Some((v, g));
        }
    }
    let (value, gamma) = best.expect("grid contains 0");
    Ok(BoundReport::new("jscc", value).with("gamma", gamma.to_prob().to_string()).with("Q", q.describe()))
}

fn check_source<S: Scalar>(source: &[S]) -> Result<()> {
    if source.is_empty() || source.iter().any(|p| *p < S::zero()) {
        return Err(Error::InvalidParameter("source must be a non-empty distribution".into()));
    }
    let total = S::total(source.iter().cloned());
    if !total.agrees(&S::one()) {
        return Err(Error::InvalidParameter(format!("source sums to {}", total.to_prob())));
    }
    Ok(())
}

/// Error probability of a quasi-perfect source-channel code from its
/// witness `gamma`, checked against direct MAP evaluation.
pub fn lemma4_error<S, C, Q>(encoder: &[usize], source: &[S], ch: &C, q: &Q, gamma: &S) -> Result<S>
where
    S: Scalar,
    C: DiscreteChannel<S> + ?Sized,
    Q: AuxMeasure<S> + ?Sized,
{
    check_source(source)?;
    let class = classify_qp_source(encoder, source, ch, q)?;
    let g = Level::Finite(gamma.clone());
    let r = &class.radii;
    let le = |a: &Level<S>, b: &Level<S>| a.same_level(b) || a.total_cmp(b) == std::cmp::Ordering::Less;
    if !(le(&r.nu, &g) && le(&g, &r.eta)) {
        return Err(Error::Witness(format!(
            "gamma = {} is outside [nu, eta] = [{}, {}]",
            gamma.to_prob(),
            r.nu.render(15),
            r.eta.render(15)
        )));
    }
    let spec = spectrum(ch, q, 0)?;
    let value = jscc_objective(&spec, source, gamma);
    let pe = map_error_probability(encoder, source, ch)?;
    let agree = if S::EXACT { pe == value } else { pe.agrees(&value) };
    if !agree {
        return Err(Error::Witness(format!("witness value {} differs from MAP error {}", value.to_prob(), pe.to_prob())));
    }
    Ok(value)
}
