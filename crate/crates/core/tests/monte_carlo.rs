use qpcodes::channel::{erasure_error_channel, product_channel, Channel, ErasureErrorParams};
use qpcodes::codes::{ml_error_probability, run_trials, Codebook, Decoder, ReedSolomon};
use statrs::distribution::{Beta, Binomial, ContinuousCDF, DiscreteCDF};
use qpcodes::{Rational, Scalar, DEFAULT_BUDGET};

/// Clopper-Pearson interval, whose coverage is at least `1 - alpha` for
/// every success probability.
fn clopper_pearson(k: u64, n: u64, alpha: f64) -> (f64, f64) {
    let lo = if k == 0 { 0.0 } else { Beta::new(k as f64, (n - k + 1) as f64).unwrap().inverse_cdf(alpha / 2.0) };
    let hi = if k == n { 1.0 } else { Beta::new((k + 1) as f64, (n - k) as f64).unwrap().inverse_cdf(1.0 - alpha / 2.0) };
    (lo, hi)
}

fn q(a: i64, b: i64) -> Rational {
    Rational::new(a.into(), b.into())
}

fn tiny_cases() -> Vec<(&'static str, Codebook, Channel<Rational>)> {
    let rep3 = Codebook::new(3, 2, vec![vec![0, 0, 0], vec![1, 1, 1]]).unwrap();
    let parity = Codebook::from_indices(3, 2, &[0, 3, 5, 6]).unwrap();
    let pair = Codebook::new(2, 2, vec![vec![0, 0], vec![1, 1]]).unwrap();
    vec![
        ("repetition/bsc", rep3, Channel::bsc(q(1, 4)).unwrap()),
        ("parity/bec", parity, erasure_error_channel(&ErasureErrorParams::new(2, q(0, 1), q(1, 4)).unwrap())),
        ("pair/mixed", pair, erasure_error_channel(&ErasureErrorParams::new(2, q(1, 10), q(1, 5)).unwrap())),
    ]
}

/// Smallest `c` with `P[Binomial(n, p) <= c] >= level`.
fn miss_quantile(n: u64, p: f64, level: f64) -> u64 {
    Binomial::new(p, n).unwrap().inverse_cdf(level)
}

#[test]
fn clopper_pearson_sanity() {
    let (lo, hi) = clopper_pearson(5, 100, 0.05);
    assert!((lo - 0.016_431).abs() < 1e-5 && (hi - 0.112_835).abs() < 1e-5, "{lo} {hi}");
    assert_eq!(miss_quantile(400, 0.01, 0.999), 11);
}

/// Each batch's 99% interval should contain the exact error probability;
/// over a fixed seed list the miss count must be compatible with a miss rate
/// of at most 1%.
#[test]
fn interval_covers_exact_error_probability() {
    let seeds: Vec<u64> = (0..400).map(|i| 1000 + 7919 * i).collect();
    for (name, code, base) in tiny_cases() {
        let ch = product_channel(&base, code.n(), DEFAULT_BUDGET).unwrap();
        let exact: Rational = ml_error_probability(&code, &ch).unwrap();
        let exact = exact.to_f64();
        let fbase = base.to_f64();
        let covered = seeds
            .iter()
            .filter(|&&s| {
                let r = run_trials(&code, &fbase, &Decoder::ExhaustiveMl, 4000, s, 4).unwrap();
                let (lo, hi) = clopper_pearson(r.failures, r.trials, 0.01);
                lo <= exact && exact <= hi
            })
            .count();
        let misses = seeds.len() as u64 - covered as u64;
        let allowed = miss_quantile(seeds.len() as u64, 0.01, 0.999);
        assert!(misses <= allowed, "{name}: {covered}/{} batches covered {exact}", seeds.len());
    }
}

#[test]
fn bounded_distance_never_beats_ml() {
    // for an MDS code on the pure erasure channel the two decoders fail on
    // exactly the same erasure patterns, so their reports coincide
    let rs = ReedSolomon::new(2, 3, 2).unwrap();
    let book = rs.codebook().unwrap();
    let bec = erasure_error_channel(&ErasureErrorParams::new(4, 0.0, 0.3).unwrap());
    let ml = run_trials(&book, &bec, &Decoder::ExhaustiveMl, 20_000, 5, 2).unwrap();
    let bd = run_trials(&book, &bec, &Decoder::BoundedDistance(&rs), 20_000, 5, 2).unwrap();
    assert!(bd.failures >= ml.failures);
    let mixed = erasure_error_channel(&ErasureErrorParams::new(4, 0.05, 0.2).unwrap());
    let ml = run_trials(&book, &mixed, &Decoder::ExhaustiveMl, 20_000, 5, 2).unwrap();
    let bd = run_trials(&book, &mixed, &Decoder::BoundedDistance(&rs), 20_000, 5, 2).unwrap();
    assert!(bd.failures >= ml.failures);
}
