use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::Serialize;

use crate::channel::{Channel, DiscreteChannel};
use crate::error::{Error, Result};

use super::{Codebook, DecodeOutcome, ReedSolomon};

/// Decoding rule used by [`run_trials`].
#[derive(Clone, Debug)]
pub enum Decoder<'a> {
    /// Maximum likelihood over the whole codebook, lowest index on ties.
    ExhaustiveMl,
    /// Errors-and-erasures bounded-distance decoding of a Reed–Solomon code
    /// whose codebook is in message-index order.
    BoundedDistance(&'a ReedSolomon),
}

impl Decoder<'_> {
    pub fn name(&self) -> &'static str {
        match self {
            Decoder::ExhaustiveMl => "exhaustive-ml",
            Decoder::BoundedDistance(_) => "bounded-distance",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize)]
pub struct TrialReport {
    pub trials: u64,
    pub failures: u64,
    /// `failures / trials`; `None` when no trial was run.
    pub estimate: Option<f64>,
    pub ci95_lo: Option<f64>,
    pub ci95_hi: Option<f64>,
    pub seed: u64,
    pub decoder: String,
}

impl TrialReport {
    /// Wilson interval at `z` standard deviations.
    pub fn interval(&self, z: f64) -> Option<(f64, f64)> {
        wilson(self.failures, self.trials, z)
    }
}

/// Wilson score interval for `k` successes out of `n`.
pub fn wilson(k: u64, n: u64, z: f64) -> Option<(f64, f64)> {
    if n == 0 {
        return None;
    }
    let n = n as f64;
    let p = k as f64 / n;
    let z2 = z * z;
    let denom = 1.0 + z2 / n;
    let centre = (p + z2 / (2.0 * n)) / denom;
    let half = z * (p * (1.0 - p) / n + z2 / (4.0 * n * n)).sqrt() / denom;
    let lo = if k == 0 { 0.0 } else { (centre - half).max(0.0) };
    let hi = if k as f64 == n { 1.0 } else { (centre + half).min(1.0) };
    Some((lo, hi))
}

pub const Z95: f64 = 1.959_963_984_540_054;

/// Trials handled by one work item.
const CHUNK: u64 = 1024;

/// Monte Carlo estimate of the block error probability of `code` over `n`
/// uses of the single-letter channel `base`. Trial `i` draws its message and
/// noise from ChaCha8 stream `i` under `seed`, so the report depends only on
/// `(seed, trials)` and not on `workers`.
pub fn run_trials(
    code: &Codebook,
    base: &Channel<f64>,
    decoder: &Decoder<'_>,
    trials: u64,
    seed: u64,
    workers: usize,
) -> Result<TrialReport> {
    if base.input_count() != code.q() {
        return Err(Error::AlphabetMismatch { left: base.input_count(), right: code.q() });
    }
    if let Decoder::BoundedDistance(rs) = decoder {
        if rs.q() != code.q() || rs.n() != code.n() || base.output_count() != code.q() + 1 {
            return Err(Error::InvalidParameter(
                "bounded-distance decoding needs the Reed-Solomon code over a q-ary erasure/error channel".into(),
            ));
        }
    }
    let cumulative: Vec<Vec<f64>> = base
        .rows()
        .iter()
        .map(|row| {
            let mut acc = 0.0;
            row.iter()
                .map(|p| {
                    acc += p;
                    acc
                })
                .collect()
        })
        .collect();
    let sim = Sim { code, base, decoder, cumulative, seed };
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(workers.max(1))
        .build()
        .map_err(|e| Error::InvalidParameter(format!("thread pool: {e}")))?;
    let failures: u64 = pool.install(|| {
        (0..trials.div_ceil(CHUNK))
            .into_par_iter()
            .map(|c| (c * CHUNK..((c + 1) * CHUNK).min(trials)).filter(|&i| sim.trial_fails(i)).count() as u64)
            .sum()
    });
    let (lo, hi) = wilson(failures, trials, Z95).unzip();
    Ok(TrialReport {
        trials,
        failures,
        estimate: (trials > 0).then(|| failures as f64 / trials as f64),
        ci95_lo: lo,
        ci95_hi: hi,
        seed,
        decoder: decoder.name().to_string(),
    })
}

struct Sim<'a> {
    code: &'a Codebook,
    base: &'a Channel<f64>,
    decoder: &'a Decoder<'a>,
    cumulative: Vec<Vec<f64>>,
    seed: u64,
}

impl Sim<'_> {
    fn trial_fails(&self, index: u64) -> bool {
        let mut rng = ChaCha8Rng::seed_from_u64(self.seed);
        rng.set_stream(index);
        let sent = rng.random_range(0..self.code.len());
        let y: Vec<usize> = self.code.words()[sent]
            .iter()
            .map(|&x| {
                let u: f64 = rng.random();
                let cdf = &self.cumulative[x as usize];
                cdf.iter().position(|&c| u < c).unwrap_or(cdf.len() - 1)
            })
            .collect();
        match self.decoder {
            Decoder::ExhaustiveMl => ml_decide(self.code, self.base, &y) != sent,
            Decoder::BoundedDistance(rs) => {
                let q = rs.q();
                let received: Vec<Option<u8>> = y.iter().map(|&s| (s < q).then_some(s as u8)).collect();
                match rs.decode(&received) {
                    DecodeOutcome::Decoded { codeword, .. } => codeword != self.code.words()[sent],
                    DecodeOutcome::Failure => true,
                }
            }
        }
    }
}

/// Relative tolerance under which two float likelihoods count as a tie.
const TIE_RTOL: f64 = 1e-12;

/// ML decision for a received word given symbol by symbol.
pub fn ml_decide(code: &Codebook, base: &Channel<f64>, y: &[usize]) -> usize {
    let likelihoods: Vec<f64> = code
        .words()
        .iter()
        .map(|w| w.iter().zip(y).map(|(&x, &s)| base.prob(x as usize, s)).product())
        .collect();
    let best = likelihoods.iter().cloned().fold(0.0, f64::max);
    likelihoods.iter().position(|&l| l >= best * (1.0 - TIE_RTOL)).unwrap_or(0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::channel::{erasure_error_channel, ErasureErrorParams};

    fn rep3() -> Codebook {
        Codebook::new(3, 2, vec![vec![0, 0, 0], vec![1, 1, 1]]).unwrap()
    }

    #[test]
    fn repetition_code_estimate() {
        let bsc = Channel::bsc(0.25).unwrap();
        let r = run_trials(&rep3(), &bsc, &Decoder::ExhaustiveMl, 100_000, 7, 4).unwrap();
        let (lo, hi) = r.interval(3.0).unwrap();
        assert!(lo <= 0.15625 && 0.15625 <= hi, "{r:?}");
    }

    #[test]
    fn deterministic_and_worker_independent() {
        let bsc = Channel::bsc(0.1).unwrap();
        let a = run_trials(&rep3(), &bsc, &Decoder::ExhaustiveMl, 5000, 99, 1).unwrap();
        let b = run_trials(&rep3(), &bsc, &Decoder::ExhaustiveMl, 5000, 99, 8).unwrap();
        assert_eq!(a, b);
        let c = run_trials(&rep3(), &bsc, &Decoder::ExhaustiveMl, 5000, 100, 8).unwrap();
        assert_ne!(a.failures, c.failures);
    }

    #[test]
    fn zero_trials() {
        let bsc = Channel::bsc(0.1).unwrap();
        let r = run_trials(&rep3(), &bsc, &Decoder::ExhaustiveMl, 0, 1, 1).unwrap();
        assert_eq!(r.estimate, None);
        assert_eq!(serde_json::to_string(&r).unwrap(), r#"{"trials":0,"failures":0,"estimate":null,"ci95_lo":null,"ci95_hi":null,"seed":1,"decoder":"exhaustive-ml"}"#);
    }

    #[test]
    fn ml_ties_go_to_lowest_index() {
        let bsc = Channel::bsc(0.25).unwrap();
        let c = Codebook::new(3, 2, vec![vec![0, 1, 1], vec![1, 0, 1]]).unwrap();
        assert_eq!(ml_decide(&c, &bsc, &[0, 0, 1]), 0);
        assert_eq!(ml_decide(&c, &bsc, &[1, 0, 1]), 1);
        let bec = erasure_error_channel(&ErasureErrorParams::new(2, 0.0, 0.25).unwrap());
        let spc = Codebook::new(3, 2, vec![vec![0, 0, 0], vec![0, 1, 1], vec![1, 0, 1], vec![1, 1, 0]]).unwrap();
        assert_eq!(ml_decide(&spc, &bec, &[2, 1, 1]), 1);
        assert_eq!(ml_decide(&spc, &bec, &[2, 2, 1]), 1);
    }

    #[test]
    fn wilson_interval_shape() {
        assert_eq!(wilson(0, 0, 2.0), None);
        let (lo, hi) = wilson(0, 100, Z95).unwrap();
        assert_eq!(lo, 0.0);
        assert!(hi > 0.0 && hi < 0.05);
        let (lo, hi) = wilson(50, 100, Z95).unwrap();
        assert!((0.5 - lo - (hi - 0.5)).abs() < 1e-12);
    }
}
