//! Neyman–Pearson trade-off between two distributions on a finite alphabet.
//!
//! `alpha_beta(P0, P1, beta)` is the smallest `pi_{1|0}` (probability of
//! rejecting `P0` when it is true) among all randomized tests whose
//! `pi_{0|1}` does not exceed `beta`.

use std::cmp::Ordering;

use crate::channel::ratio_convention;
use crate::error::{Error, Result};
use crate::scalar::{Level, Scalar};

/// Randomized test: `accept[z]` is the probability of deciding for `P0`.
#[derive(Clone, Debug, PartialEq)]
pub struct BinaryTest<S> {
    pub accept: Vec<S>,
}

impl<S: Scalar> BinaryTest<S> {
    pub fn new(accept: Vec<S>) -> Result<Self> {
        if accept.iter().any(|t| *t < S::zero() || *t > S::one()) {
            return Err(Error::InvalidParameter("test probabilities must lie in [0, 1]".into()));
        }
        Ok(Self { accept })
    }
}

/// Optimal operating point and the NP test `(gamma, theta)` reaching it.
#[derive(Clone, Debug, PartialEq)]
pub struct NPPoint<S> {
    pub alpha: S,
    pub beta: S,
    /// Threshold on `P0/P1`.
    pub gamma: Level<S>,
    /// Acceptance probability on the threshold level.
    pub theta: S,
}

fn check_pair<S: Scalar>(p0: &[S], p1: &[S]) -> Result<()> {
    if p0.len() != p1.len() {
        return Err(Error::AlphabetMismatch { left: p0.len(), right: p1.len() });
    }
    Ok(())
}

fn check_beta<S: Scalar>(beta: &S) -> Result<()> {
    if *beta < S::zero() || *beta > S::one() {
        return Err(Error::InvalidParameter(format!("beta = {} outside [0, 1]", beta.to_prob())));
    }
    Ok(())
}

/// `(pi_{1|0}, pi_{0|1}) = (1 - sum T P0, sum T P1)`.
pub fn test_errors<S: Scalar>(p0: &[S], p1: &[S], t: &BinaryTest<S>) -> Result<(S, S)> {
    check_pair(p0, p1)?;
    if t.accept.len() != p0.len() {
        return Err(Error::AlphabetMismatch { left: p0.len(), right: t.accept.len() });
    }
    let acc0 = S::total(t.accept.iter().zip(p0).map(|(a, p)| a.clone() * p.clone()));
    let acc1 = S::total(t.accept.iter().zip(p1).map(|(a, p)| a.clone() * p.clone()));
    Ok((S::one() - acc0, acc1))
}

/// Ratio level of `P0/P1` with its pooled masses.
#[derive(Clone, Debug)]
struct LevelMass<S> {
    level: Level<S>,
    p0: S,
    p1: S,
}

/// Levels of `P0/P1` in descending order; symbols with `P0 = P1 = 0` are
/// dropped since no test can do anything with them.
fn ratio_levels<S: Scalar>(p0: &[S], p1: &[S]) -> Vec<LevelMass<S>> {
    let mut items: Vec<(Level<S>, S, S)> = p0
        .iter()
        .zip(p1)
        .filter(|(a, b)| !(a.is_zero() && b.is_zero()))
        .map(|(a, b)| (ratio_convention(a, b), a.clone(), b.clone()))
        .collect();
    items.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut grouped: Vec<(Level<S>, Vec<S>, Vec<S>)> = Vec::new();
    for (level, a, b) in items {
        match grouped.last_mut() {
            Some((l, va, vb)) if l.same_level(&level) => {
                va.push(a);
                vb.push(b);
            }
            _ => grouped.push((level, vec![a], vec![b])),
        }
    }
    grouped
        .into_iter()
        .map(|(level, va, vb)| LevelMass { level, p0: S::total(va), p1: S::total(vb) })
        .collect()
}

/// Minimum `pi_{1|0}` subject to `pi_{0|1} <= beta`, with the NP test that
/// achieves it. The value is cross-checked against the supremum
/// `sup_gamma { P0[r <= gamma] + gamma P1[r > gamma] - gamma beta }` over the
/// finite levels and 0.
pub fn alpha_beta<S: Scalar>(p0: &[S], p1: &[S], beta: &S) -> Result<NPPoint<S>> {
    check_pair(p0, p1)?;
    check_beta(beta)?;
    let levels = ratio_levels(p0, p1);

    let mut acc0 = S::zero();
    let mut acc1 = S::zero();
    let mut point = None;
    for lm in &levels {
        if lm.level.is_infinite() {
            // P1 puts no mass here: accept for free
            acc0 = acc0 + lm.p0.clone();
            continue;
        }
        let next = acc1.clone() + lm.p1.clone();
        if next >= *beta {
            let theta = (beta.clone() - acc1.clone()) / lm.p1.clone();
            let alpha = S::one() - acc0.clone() - theta.clone() * lm.p0.clone();
            point = Some(NPPoint { alpha, beta: beta.clone(), gamma: lm.level.clone(), theta });
            break;
        }
        acc0 = acc0 + lm.p0.clone();
        acc1 = next;
    }
    let point = point.unwrap_or_else(|| NPPoint {
        alpha: clamp_unit(S::one() - acc0),
        beta: beta.clone(),
        gamma: Level::Finite(S::zero()),
        theta: S::one(),
    });
    let point = NPPoint { alpha: clamp_unit(point.alpha), ..point };

    let sup = lemma1_supremum(&levels, beta);
    if !point.alpha.agrees(&sup) {
        return Err(Error::Witness(format!(
            "NP construction gives {} but the supremum form gives {}",
            point.alpha.to_prob(),
            sup.to_prob()
        )));
    }
    Ok(point)
}

fn clamp_unit<S: Scalar>(v: S) -> S {
    if v < S::zero() {
        S::zero()
    } else {
        v
    }
}

/// The bracketed objective `P0[r <= gamma] + gamma P1[r > gamma] - gamma beta`
/// at one finite `gamma >= 0`.
pub fn lemma1_objective<S: Scalar>(p0: &[S], p1: &[S], beta: &S, gamma: &S) -> Result<S> {
    check_pair(p0, p1)?;
    let g = Level::Finite(gamma.clone());
    let mut below = Vec::new();
    let mut above = Vec::new();
    for (a, b) in p0.iter().zip(p1) {
        if a.is_zero() && b.is_zero() {
            continue;
        }
        if ratio_convention(a, b).total_cmp(&g) == Ordering::Greater {
            above.push(b.clone());
        } else {
            below.push(a.clone());
        }
    }
    Ok(S::total(below) + gamma.clone() * S::total(above) - gamma.clone() * beta.clone())
}

/// Maximum of [`lemma1_objective`] over `gamma` in the finite levels and 0,
/// by one pass over the descending level list.
fn lemma1_supremum<S: Scalar>(levels: &[LevelMass<S>], beta: &S) -> S {
    let total0 = S::total(levels.iter().map(|l| l.p0.clone()));
    // P0 mass strictly above the current candidate and P1 mass strictly above
    let mut above0 = S::zero();
    let mut above1 = S::zero();
    let mut best: Option<S> = None;
    let mut consider = |gamma: &S, above0: &S, above1: &S| {
        let v = total0.clone() - above0.clone() + gamma.clone() * (above1.clone() - beta.clone());
        best = Some(match best.take() {
            Some(b) => b.max_of(v),
            None => v,
        });
    };
    let mut saw_zero = false;
    for lm in levels {
        if let Level::Finite(g) = &lm.level {
            consider(g, &above0, &above1);
            saw_zero |= g.is_zero();
        }
        above0 = above0 + lm.p0.clone();
        above1 = above1 + lm.p1.clone();
    }
    if !saw_zero {
        // gamma = 0: every symbol with a positive ratio is above
        consider(&S::zero(), &above0, &above1);
    }
    best.unwrap_or_else(S::zero)
}

/// Test that realizes an [`NPPoint`] on the given pair.
pub fn np_test<S: Scalar>(p0: &[S], p1: &[S], point: &NPPoint<S>) -> Result<BinaryTest<S>> {
    check_pair(p0, p1)?;
    let accept = p0
        .iter()
        .zip(p1)
        .map(|(a, b)| {
            let r = ratio_convention(a, b);
            if r.same_level(&point.gamma) {
                point.theta.clone()
            } else if r.total_cmp(&point.gamma) == Ordering::Greater {
                S::one()
            } else {
                S::zero()
            }
        })
        .collect();
    BinaryTest::new(accept)
}

/// Largest alphabet the oracle accepts.
pub const ORACLE_MAX_ALPHABET: usize = 20;

/// Independent evaluation of `alpha_beta` as a fractional knapsack: spend the
/// `P1` budget `beta` on symbols in order of decreasing `P0/P1`, compared by
/// cross-multiplication, one symbol at a time.
pub fn alpha_beta_oracle<S: Scalar>(p0: &[S], p1: &[S], beta: &S) -> Result<S> {
    check_pair(p0, p1)?;
    check_beta(beta)?;
    if p0.len() > ORACLE_MAX_ALPHABET {
        return Err(Error::BudgetExceeded {
            what: "oracle alphabet".into(),
            size: p0.len() as u128,
            budget: ORACLE_MAX_ALPHABET as u128,
        });
    }
    let mut order: Vec<usize> = (0..p0.len()).collect();
    // zero-cost items first, then by a0/b0 > a1/b1  <=>  a0 b1 > a1 b0
    order.sort_by(|&i, &j| {
        let free_i = p1[i].is_zero();
        let free_j = p1[j].is_zero();
        match (free_i, free_j) {
            (true, false) => Ordering::Less,
            (false, true) => Ordering::Greater,
            _ => (p0[j].clone() * p1[i].clone()).total_cmp(&(p0[i].clone() * p1[j].clone())),
        }
    });
    let mut budget = beta.clone();
    let mut gained = S::zero();
    for i in order {
        if p1[i].is_zero() {
            gained = gained + p0[i].clone();
            continue;
        }
        if p1[i] <= budget {
            budget = budget - p1[i].clone();
            gained = gained + p0[i].clone();
        } else {
            gained = gained + p0[i].clone() * (budget.clone() / p1[i].clone());
            break;
        }
    }
    Ok(clamp_unit(S::one() - gained))
}
