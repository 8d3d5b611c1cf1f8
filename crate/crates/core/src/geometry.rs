//! Likelihood-ratio spheres `S_x(tau, Q) = { y : W(y|x)/Q(y) >= tau }`, the
//! ratio spectrum of a symmetric channel, covering/packing radii of a code
//! and its classification as generalized perfect or quasi-perfect.

use std::cmp::Ordering;

use rayon::prelude::*;

use crate::channel::{q_in_qc, ratio_convention, AuxMeasure, DiscreteChannel};
use crate::codes::Codebook;
use crate::error::{check_budget, Error, Result, DEFAULT_BUDGET};
use crate::scalar::{Level, Scalar};

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SphereKind {
    /// `ratio >= tau`
    Closed,
    /// `ratio > tau`
    Interior,
    /// `ratio == tau`
    Shell,
}

/// Outputs of the sphere of radius `tau` around input `x`.
pub fn sphere<S, C, Q>(x: usize, tau: &Level<S>, ch: &C, q: &Q, kind: SphereKind) -> Vec<usize>
where
    S: Scalar,
    C: DiscreteChannel<S> + ?Sized,
    Q: AuxMeasure<S> + ?Sized,
{
    (0..ch.output_count())
        .filter(|&y| {
            let r = ratio_convention(&ch.prob(x, y), &q.prob(y));
            let same = r.same_level(tau);
            match kind {
                SphereKind::Shell => same,
                SphereKind::Interior => !same && r.total_cmp(tau) == Ordering::Greater,
                SphereKind::Closed => same || r.total_cmp(tau) == Ordering::Greater,
            }
        })
        .collect()
}

/// Ratio levels seen from one input, in descending order, with the
/// auxiliary mass `Q_o(tau)` and channel mass of each shell.
#[derive(Clone, Debug, PartialEq)]
pub struct RatioSpectrum<S> {
    pub levels: Vec<Level<S>>,
    pub q_mass: Vec<S>,
    pub w_mass: Vec<S>,
    /// Whether `Q` was verified to keep the channel symmetric, i.e. whether
    /// the spectrum is the same for every input.
    pub input_independent: bool,
}

impl<S: Scalar> RatioSpectrum<S> {
    fn sum_where(&self, masses: &[S], keep: impl Fn(&Level<S>) -> bool) -> S {
        S::total(self.levels.iter().zip(masses).filter(|(l, _)| keep(l)).map(|(_, m)| m.clone()))
    }

    fn above(l: &Level<S>, gamma: &Level<S>) -> bool {
        !l.same_level(gamma) && l.total_cmp(gamma) == Ordering::Greater
    }

    /// `Q(tau) = sum_{tau' >= tau} Q_o(tau')`.
    pub fn q_closed(&self, tau: &Level<S>) -> S {
        self.sum_where(&self.q_mass, |l| !Self::above(tau, l))
    }

    /// `Q_i(tau) = sum_{tau' > tau} Q_o(tau')`.
    pub fn q_interior(&self, tau: &Level<S>) -> S {
        self.sum_where(&self.q_mass, |l| Self::above(l, tau))
    }

    /// Channel mass of the shells at finite levels `tau' <= gamma`, i.e.
    /// `sum tau' Q_o(tau')`.
    pub fn w_at_or_below(&self, gamma: &Level<S>) -> S {
        self.sum_where(&self.w_mass, |l| !l.is_infinite() && !Self::above(l, gamma))
    }

    /// Channel mass strictly above `gamma`.
    pub fn w_above(&self, gamma: &Level<S>) -> S {
        self.sum_where(&self.w_mass, |l| Self::above(l, gamma))
    }

    pub fn finite_levels(&self) -> impl Iterator<Item = &S> {
        self.levels.iter().filter_map(Level::finite)
    }
}

/// Spectrum of `W(.|x)/Q` for input `x`.
pub fn spectrum<S, C, Q>(ch: &C, q: &Q, x: usize) -> Result<RatioSpectrum<S>>
where
    S: Scalar,
    C: DiscreteChannel<S> + ?Sized,
    Q: AuxMeasure<S> + ?Sized,
{
    if q.output_count() != ch.output_count() {
        return Err(Error::AlphabetMismatch { left: ch.output_count(), right: q.output_count() });
    }
    check_budget("output space", ch.output_count() as u128, DEFAULT_BUDGET)?;
    let input_independent = q_in_qc(ch, q).unwrap_or(false);
    let mut items: Vec<(Level<S>, S, S)> = (0..ch.output_count())
        .into_par_iter()
        .map(|y| {
            let w = ch.prob(x, y);
            let qy = q.prob(y);
            (ratio_convention(&w, &qy), qy, w)
        })
        .collect();
    items.sort_by(|a, b| b.0.total_cmp(&a.0));
    let mut levels: Vec<Level<S>> = Vec::new();
    let mut qs: Vec<Vec<S>> = Vec::new();
    let mut ws: Vec<Vec<S>> = Vec::new();
    for (level, qy, w) in items {
        if levels.last().is_some_and(|l| l.same_level(&level)) {
            qs.last_mut().unwrap().push(qy);
            ws.last_mut().unwrap().push(w);
        } else {
            levels.push(level);
            qs.push(vec![qy]);
            ws.push(vec![w]);
        }
    }
    Ok(RatioSpectrum {
        levels,
        q_mass: qs.into_iter().map(S::total).collect(),
        w_mass: ws.into_iter().map(S::total).collect(),
        input_independent,
    })
}

/// Covering radius `eta` (largest `gamma` whose closed spheres cover every
/// output that carries mass) and packing radius `nu` (smallest `gamma` whose
/// interiors are pairwise disjoint).
#[derive(Clone, Debug, PartialEq)]
pub struct RadiusPair<S> {
    pub eta: Level<S>,
    pub nu: Level<S>,
    /// Largest second-best ratio over outputs claimed by two or more
    /// codewords; `None` if the best codeword is unique everywhere.
    pub shared_top: Option<Level<S>>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum Verdict {
    Perfect,
    QuasiPerfect,
    Neither,
}

impl Verdict {
    pub fn is_quasi_perfect(self) -> bool {
        matches!(self, Verdict::Perfect | Verdict::QuasiPerfect)
    }

    pub fn as_str(self) -> &'static str {
        match self {
            Verdict::Perfect => "perfect",
            Verdict::QuasiPerfect => "quasi-perfect",
            Verdict::Neither => "neither",
        }
    }
}

#[derive(Clone, Debug, PartialEq)]
pub struct QPClassification<S> {
    pub verdict: Verdict,
    pub witness_gamma: Level<S>,
    pub witness_q: String,
    pub radii: RadiusPair<S>,
}

/// Per-output best and second-best scaled ratio among the codewords.
/// Outputs on which every codeword and `Q` put zero mass are skipped.
fn per_output_top<S, C, Q>(inputs: &[usize], weights: &[S], ch: &C, q: &Q) -> Result<RadiusPair<S>>
where
    S: Scalar,
    C: DiscreteChannel<S> + ?Sized,
    Q: AuxMeasure<S> + ?Sized,
{
    if inputs.is_empty() {
        return Err(Error::Codebook("empty code".into()));
    }
    if q.output_count() != ch.output_count() {
        return Err(Error::AlphabetMismatch { left: ch.output_count(), right: q.output_count() });
    }
    check_budget(
        "codeword-output pairs",
        (inputs.len() as u128) * (ch.output_count() as u128),
        DEFAULT_BUDGET * 16,
    )?;
    type Acc<S> = (Option<Level<S>>, Option<Level<S>>);
    let fold = |acc: Acc<S>, (r1, r2): (Level<S>, Option<Level<S>>)| -> Acc<S> {
        let eta = match acc.0 {
            Some(e) if e.total_cmp(&r1) != Ordering::Greater => Some(e),
            _ => Some(r1),
        };
        let shared = match (acc.1, r2) {
            (Some(a), Some(b)) => Some(if b.total_cmp(&a) == Ordering::Greater { b } else { a }),
            (a, b) => a.or(b),
        };
        (eta, shared)
    };
    let merge = |a: Acc<S>, b: Acc<S>| -> Acc<S> {
        match b.0 {
            Some(r1) => fold(a, (r1, b.1)),
            None => (a.0, a.1.or(b.1)),
        }
    };
    let (eta, shared_top) = (0..ch.output_count())
        .into_par_iter()
        .filter_map(|y| {
            let qy = q.prob(y);
            let mut ratios: Vec<Level<S>> = inputs
                .iter()
                .zip(weights)
                .map(|(&x, wgt)| ratio_convention(&(wgt.clone() * ch.prob(x, y)), &qy))
                .collect();
            let null = qy.is_zero() && ratios.iter().all(|r| r.finite().is_some_and(Scalar::is_zero));
            if null {
                return None;
            }
            ratios.sort_by(|a, b| b.total_cmp(a));
            let r1 = ratios[0].clone();
            let r2 = ratios.get(1).cloned();
            Some((r1, r2))
        })
        .fold(|| (None, None), fold)
        .reduce(|| (None, None), merge);
    let eta = eta.unwrap_or(Level::Infinite);
    let nu = shared_top.clone().unwrap_or(Level::Finite(S::zero()));
    Ok(RadiusPair { eta, nu, shared_top })
}

/// Covering and packing radii of `code` (equiprobable messages).
pub fn radii<S, C, Q>(code: &Codebook, ch: &C, q: &Q) -> Result<RadiusPair<S>>
where
    S: Scalar,
    C: DiscreteChannel<S> + ?Sized,
    Q: AuxMeasure<S> + ?Sized,
{
    let inputs = code_inputs(code, ch)?;
    per_output_top(&inputs, &vec![S::one(); inputs.len()], ch, q)
}

fn code_inputs<S: Scalar, C: DiscreteChannel<S> + ?Sized>(code: &Codebook, ch: &C) -> Result<Vec<usize>> {
    let inputs = code.input_indices();
    if let Some(&x) = inputs.iter().find(|&&x| x >= ch.input_count()) {
        return Err(Error::Codebook(format!("codeword index {x} outside the channel input alphabet")));
    }
    Ok(inputs)
}

fn verdict_from<S: Scalar>(r: &RadiusPair<S>) -> Verdict {
    let covers = r.nu.same_level(&r.eta) || r.nu.total_cmp(&r.eta) == Ordering::Less;
    if !covers {
        return Verdict::Neither;
    }
    let closed_disjoint = match &r.shared_top {
        None => true,
        Some(s) => !s.same_level(&r.eta) && s.total_cmp(&r.eta) == Ordering::Less,
    };
    if closed_disjoint {
        Verdict::Perfect
    } else {
        Verdict::QuasiPerfect
    }
}

fn require_qc<S, C, Q>(ch: &C, q: &Q) -> Result<()>
where
    S: Scalar,
    C: DiscreteChannel<S> + ?Sized,
    Q: AuxMeasure<S> + ?Sized,
{
    if !q_in_qc(ch, q)? {
        return Err(Error::NotSymmetryPreserving);
    }
    Ok(())
}

/// Generalized perfect / quasi-perfect classification with respect to `Q`.
/// The witness is the largest admissible `gamma`, the covering radius.
pub fn classify_qp<S, C, Q>(code: &Codebook, ch: &C, q: &Q) -> Result<QPClassification<S>>
where
    S: Scalar,
    C: DiscreteChannel<S> + ?Sized,
    Q: AuxMeasure<S> + ?Sized,
{
    require_qc(ch, q)?;
    let radii = radii(code, ch, q)?;
    Ok(QPClassification {
        verdict: verdict_from(&radii),
        witness_gamma: radii.eta.clone(),
        witness_q: q.describe(),
        radii,
    })
}

/// Source-channel version: message `v` is sent as `encoder[v]` and its
/// sphere has radius `gamma / P_V(v)`, i.e. the ratio is scaled by `P_V(v)`.
/// Messages of probability zero are ignored.
pub fn classify_qp_source<S, C, Q>(encoder: &[usize], source: &[S], ch: &C, q: &Q) -> Result<QPClassification<S>>
where
    S: Scalar,
    C: DiscreteChannel<S> + ?Sized,
    Q: AuxMeasure<S> + ?Sized,
{
    if encoder.len() != source.len() {
        return Err(Error::AlphabetMismatch { left: encoder.len(), right: source.len() });
    }
    require_qc(ch, q)?;
    let (inputs, weights): (Vec<usize>, Vec<S>) =
        encoder.iter().zip(source).filter(|(_, p)| !p.is_zero()).map(|(&x, p)| (x, p.clone())).unzip();
    let radii = per_output_top(&inputs, &weights, ch, q)?;
    Ok(QPClassification {
        verdict: verdict_from(&radii),
        witness_gamma: radii.eta.clone(),
        witness_q: q.describe(),
        radii,
    })
}
