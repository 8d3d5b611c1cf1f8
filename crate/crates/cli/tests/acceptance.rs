//! Acceptance suite: one PASS/FAIL line per criterion.
//!
//! Run with `cargo test -p qpcodes-cli --test acceptance`.

use std::time::Instant;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use qpcodes::bounds::{erasure_error_bound, jscc_bound, lemma3_bound, mds_bound, metaconverse_symmetric, optimize_psi, psi_binary_rule, PsiFamily};
use qpcodes::channel::{erasure_error_channel, product_channel, Channel, DiscreteChannel, ErasureErrorParams, UniformMeasure};
use qpcodes::codes::{
    best_code_search, best_lossy_code_search, canonical_codebooks, map_error_probability, ml_error_probability, run_trials, wilson,
    Codebook, Decoder, ReedSolomon, DEFAULT_CANDIDATE_BUDGET,
};
use qpcodes::geometry::classify_qp;
use qpcodes::hypothesis::{alpha_beta, alpha_beta_oracle};
use qpcodes::sourcecoding::{bms_excess_distortion, lossy_bound_kostina, DistortionSpec, Source};
use qpcodes::{Rational, Scalar, DEFAULT_BUDGET};
use qpcodes_cli::run_args;

type Outcome = Result<String, String>;

fn q(a: i64, b: i64) -> Rational {
    Rational::new(a.into(), b.into())
}

fn pow(r: &Rational, k: u32) -> Rational {
    <Rational as Scalar>::powi(r, k)
}

fn ensure(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

fn bec(delta: Rational) -> Channel<Rational> {
    erasure_error_channel(&ErasureErrorParams::new(2, q(0, 1), delta).unwrap())
}

fn random_distribution(rng: &mut ChaCha8Rng, k: usize) -> Vec<Rational> {
    loop {
        let w: Vec<i64> = (0..k).map(|_| if rng.random_bool(0.2) { 0 } else { rng.random_range(1..=30) }).collect();
        let total: i64 = w.iter().sum();
        if total > 0 {
            return w.iter().map(|&x| q(x, total)).collect();
        }
    }
}

fn c1_np_oracle() -> Outcome {
    let mut rng = ChaCha8Rng::seed_from_u64(1);
    let betas = [q(0, 1), q(1, 7), q(1, 3), q(1, 2), q(1, 1)];
    for i in 0..500 {
        let k = rng.random_range(1..=12);
        let p0 = random_distribution(&mut rng, k);
        let p1 = random_distribution(&mut rng, k);
        for beta in &betas {
            let fast = alpha_beta(&p0, &p1, beta).map_err(|e| format!("pair {i}: {e}"))?.alpha;
            let slow = alpha_beta_oracle(&p0, &p1, beta).map_err(|e| format!("pair {i}: {e}"))?;
            ensure(fast == slow, || format!("pair {i}, beta {beta}: {fast} != {slow}"))?;
        }
    }
    Ok("500 pairs x 5 budgets agree exactly".into())
}

fn hamming74() -> Codebook {
    let g = [[1, 0, 0, 0, 1, 1, 0], [0, 1, 0, 0, 1, 0, 1], [0, 0, 1, 0, 0, 1, 1], [0, 0, 0, 1, 1, 1, 1]];
    let words = (0..16u8)
        .map(|m| (0..7).map(|j| (0..4).map(|i| ((m >> i) & 1) * g[i][j]).sum::<u8>() % 2).collect())
        .collect();
    Codebook::new(7, 2, words).unwrap()
}

fn c2_perfect_code() -> Outcome {
    let code = hamming74();
    let mut details = Vec::new();
    for eps in [q(1, 10), q(1, 4)] {
        let ch = product_channel(&Channel::bsc(eps.clone()).unwrap(), 7, DEFAULT_BUDGET).unwrap();
        let u = UniformMeasure { size: ch.output_count() };
        let pe: Rational = ml_error_probability(&code, &ch).map_err(|e| e.to_string())?;
        let mc = metaconverse_symmetric(&ch, &u, 16).map_err(|e| e.to_string())?;
        let class = classify_qp(&code, &ch, &u).map_err(|e| e.to_string())?;
        let gamma = class.witness_gamma.finite().ok_or("infinite witness")?.clone();
        let l3 = lemma3_bound(&ch, &u, 16, &gamma).map_err(|e| e.to_string())?;
        // a perfect single-error-correcting code fails exactly on two or more flips
        let one = <Rational as Scalar>::one();
        let oracle = one.clone() - pow(&(one.clone() - eps.clone()), 7) - q(7, 1) * eps.clone() * pow(&(one - eps.clone()), 6);
        ensure(pe == mc.value && pe == l3.value && pe == oracle, || {
            format!("eps {eps}: pe {pe}, metaconverse {}, lemma3 {}, oracle {oracle}", mc.value, l3.value)
        })?;
        if eps == q(1, 4) {
            ensure(pe == q(5_550_537_109_375, 10_000_000_000_000), || format!("eps 1/4: pe {pe}"))?;
        }
        details.push(format!("eps={eps}: {pe}"));
    }
    Ok(details.join(", "))
}

fn c3_qp_iff_equality() -> Outcome {
    let base = Channel::bsc(q(1, 4)).unwrap();
    let (mut total, mut qp) = (0, 0);
    for m in [2usize, 4] {
        for n in 1..=4usize {
            if m > 1 << n {
                continue;
            }
            let ch = product_channel(&base, n, DEFAULT_BUDGET).unwrap();
            let u = UniformMeasure { size: ch.output_count() };
            let bound = metaconverse_symmetric(&ch, &u, m as u64).map_err(|e| e.to_string())?.value;
            for code in canonical_codebooks(n, m, true).map_err(|e| e.to_string())? {
                let pe: Rational = ml_error_probability(&code, &ch).map_err(|e| e.to_string())?;
                let verdict = classify_qp(&code, &ch, &u).map_err(|e| e.to_string())?.verdict;
                let is_qp = verdict.is_quasi_perfect();
                ensure(pe >= bound, || format!("bound {bound} exceeds Pe {pe} for {:?}", code.words()))?;
                ensure(is_qp == (pe == bound), || {
                    format!("n={n} M={m} {:?}: verdict {} but Pe {pe} vs bound {bound}", code.words(), verdict.as_str())
                })?;
                total += 1;
                qp += usize::from(is_qp);
            }
        }
    }
    Ok(format!("{total} codebooks, {qp} quasi-perfect, equality exactly on those"))
}

fn c4_bsc_search() -> Outcome {
    let p = ErasureErrorParams::new(2, q(1, 4), q(0, 1)).unwrap();
    let base = erasure_error_channel(&p);
    let mut values = Vec::new();
    for n in 2..=6 {
        let r = best_code_search(n, 4, &base, DEFAULT_CANDIDATE_BUDGET).map_err(|e| e.to_string())?;
        let b = erasure_error_bound(n, &p, 4, &psi_binary_rule(n, 2, 4)).map_err(|e| e.to_string())?;
        ensure(r.exact, || format!("n={n}: search not exhaustive"))?;
        ensure(r.pe == b.value, || format!("n={n}: best Pe {} != bound {}", r.pe, b.value))?;
        values.push(r.pe.to_string());
    }
    Ok(format!("n=2..6: {}", values.join(", ")))
}

fn within_sigmas(failures: u64, trials: u64, sigmas: f64, target: f64) -> (bool, f64, f64) {
    let (lo, hi) = wilson(failures, trials, sigmas).unwrap();
    (lo <= target && target <= hi, lo, hi)
}

fn c5_mds() -> Outcome {
    let delta = q(1, 4);
    let parity = Codebook::new(3, 2, vec![vec![0, 0, 0], vec![0, 1, 1], vec![1, 0, 1], vec![1, 1, 0]]).unwrap();
    let ch3 = product_channel(&bec(delta.clone()), 3, DEFAULT_BUDGET).unwrap();
    let pe3: Rational = ml_error_probability(&parity, &ch3).map_err(|e| e.to_string())?;
    let b3 = mds_bound(3, 2, &delta, 4).map_err(|e| e.to_string())?.value;
    ensure(b3 == q(82_031_250, 1_000_000_000) && b3 == pe3, || format!("n=3: bound {b3}, parity Pe {pe3}"))?;
    let ch2 = product_channel(&bec(delta.clone()), 2, DEFAULT_BUDGET).unwrap();
    let uncoded: Rational = ml_error_probability(&Codebook::full_space(2, 2).unwrap(), &ch2).map_err(|e| e.to_string())?;
    let b2 = mds_bound(2, 2, &delta, 4).map_err(|e| e.to_string())?.value;
    ensure(b2 == uncoded, || format!("n=2: bound {b2}, uncoded Pe {uncoded}"))?;

    let rs = ReedSolomon::new(3, 7, 3).unwrap();
    let code = rs.codebook().unwrap();
    let base = erasure_error_channel(&ErasureErrorParams::new(8, 0.0, 0.25).unwrap());
    let r = run_trials(&code, &base, &Decoder::ExhaustiveMl, 100_000, 5, 4).map_err(|e| e.to_string())?;
    let bound = mds_bound(7, 8, &delta, 512).map_err(|e| e.to_string())?.value.to_f64();
    let (ok, lo, hi) = within_sigmas(r.failures, r.trials, 3.0, bound);
    ensure(ok, || format!("RS(7,3): estimate {:?}, 3-sigma [{lo}, {hi}] misses bound {bound}", r.estimate))?;
    Ok(format!("n=3 bound {b3}; RS(7,3) estimate {:.6} vs bound {bound:.6}", r.estimate.unwrap()))
}

fn c6_mixed_gap() -> Outcome {
    let rs = ReedSolomon::new(3, 7, 3).unwrap();
    let code = rs.codebook().unwrap();
    let p = ErasureErrorParams::new(8, q(1, 20), q(1, 4)).unwrap();
    let bound = optimize_psi(7, &p, 512, &PsiFamily::Scan).map_err(|e| e.to_string())?.1.value.to_f64();
    let base = erasure_error_channel(&p.to_f64());
    let r = run_trials(&code, &base, &Decoder::BoundedDistance(&rs), 100_000, 6, 4).map_err(|e| e.to_string())?;
    let (_, _, hi) = within_sigmas(r.failures, r.trials, 3.0, bound);
    ensure(bound <= hi, || format!("estimate {:?} more than 3 sigma below bound {bound}", r.estimate))?;
    Ok(format!("estimate {:.6} >= bound {bound:.6} - 3 sigma", r.estimate.unwrap()))
}

fn c7_jscc() -> Outcome {
    let source = vec![q(1, 2), q(3, 10), q(1, 5)];
    let ch = Channel::<Rational>::noiseless(2).unwrap();
    let u = UniformMeasure { size: 2 };
    let b = jscc_bound(&source, &ch, &u).map_err(|e| e.to_string())?.value;
    let mut best: Option<Rational> = None;
    for mask in 0..8usize {
        let enc: Vec<usize> = (0..3).map(|v| (mask >> v) & 1).collect();
        let pe: Rational = map_error_probability(&enc, &source, &ch).map_err(|e| e.to_string())?;
        best = Some(best.map_or(pe.clone(), |b| if pe < b { pe } else { b }));
    }
    let best = best.unwrap();
    ensure(b == q(1, 5) && best == q(1, 5), || format!("bound {b}, MAP optimum {best}"))?;

    let mut rng = ChaCha8Rng::seed_from_u64(7);
    for i in 0..20 {
        let outputs = rng.random_range(2..=4);
        let inputs = rng.random_range(2..=3);
        let first = random_distribution(&mut rng, outputs);
        let rows: Vec<Vec<Rational>> = (0..inputs)
            .map(|_| {
                let mut row = first.clone();
                for j in (1..row.len()).rev() {
                    row.swap(j, rng.random_range(0..=j));
                }
                row
            })
            .collect();
        let ch = Channel::new(rows).unwrap();
        let m = rng.random_range(2..=4);
        let u = UniformMeasure { size: outputs };
        let equi = vec![q(1, m as i64); m];
        let j = jscc_bound(&equi, &ch, &u).map_err(|e| e.to_string())?.value;
        let mc = metaconverse_symmetric(&ch, &u, m as u64).map_err(|e| e.to_string())?.value;
        ensure(j == mc, || format!("channel {i}: jscc {j} != metaconverse {mc}"))?;
    }
    Ok("noiseless instance 1/5 = MAP optimum; 20 symmetric channels agree".into())
}

fn c8_lossy() -> Outcome {
    let mut summary = Vec::new();
    for (d, all_equal) in [(q(11, 100), true), (q(37, 100), false)] {
        let mut equal_at = Vec::new();
        for n in 2..=12 {
            let r = best_lossy_code_search(n, 4, &d, DEFAULT_CANDIDATE_BUDGET).map_err(|e| e.to_string())?;
            ensure(r.exact, || format!("D={d} n={n}: search not exhaustive"))?;
            let recomputed = bms_excess_distortion(&r.code, &d).map_err(|e| e.to_string())?;
            ensure(recomputed == r.excess, || format!("D={d} n={n}: excess {} vs recomputed {recomputed}", r.excess))?;
            let dist = DistortionSpec::hamming(n, d.clone()).map_err(|e| e.to_string())?;
            let bound = lossy_bound_kostina(&Source::bms(n), &dist, 4).map_err(|e| e.to_string())?.value;
            ensure(r.excess >= bound, || format!("D={d} n={n}: bound {bound} above excess {}", r.excess))?;
            let equal = r.excess == bound;
            if all_equal {
                ensure(equal, || format!("D={d} n={n}: excess {} != bound {bound}", r.excess))?;
            } else {
                ensure(equal == r.quasi_perfect_exists, || {
                    format!("D={d} n={n}: equality {equal} but quasi-perfect code exists = {}", r.quasi_perfect_exists)
                })?;
            }
            if equal {
                equal_at.push(n.to_string());
            }
        }
        summary.push(format!("D={d}: equality at n in {{{}}}", equal_at.join(",")));
    }
    Ok(summary.join("; "))
}

fn c9_determinism() -> Outcome {
    let invocations: [&[&str]; 4] = [
        &["figure", "fig1"],
        &["figure", "fig2"],
        &["figure", "fig3"],
        &["simulate", "--rs", "3,7,3", "--eps", "0.05", "--delta", "0.25", "--decoder", "bd", "--trials", "100000", "--seed", "11"],
    ];
    for args in invocations {
        let run = |workers: &str| {
            let mut full = vec!["qpcodes", "--workers", workers];
            full.extend_from_slice(args);
            run_args(full).map_err(|e| format!("{}: {e}", args.join(" ")))
        };
        let a = run("1")?;
        let b = run("1")?;
        let c = run("8")?;
        ensure(a == b, || format!("{}: two runs differ", args.join(" ")))?;
        ensure(a == c, || format!("{}: 1 vs 8 workers differ", args.join(" ")))?;
    }
    Ok("fig1, fig2, fig3 and simulate byte-identical across runs and 1/8 workers".into())
}

fn main() {
    let criteria: [(&str, fn() -> Outcome); 9] = [
        ("Neyman-Pearson trade-off matches the oracle", c1_np_oracle),
        ("Hamming(7,4) attains the bound", c2_perfect_code),
        ("quasi-perfect iff the bound is attained", c3_qp_iff_equality),
        ("best BSC codes meet the erasure/error bound", c4_bsc_search),
        ("MDS bound and RS(7,3) erasure simulation", c5_mds),
        ("mixed errors/erasures gap", c6_mixed_gap),
        ("joint source-channel bound", c7_jscc),
        ("lossy dichotomy", c8_lossy),
        ("determinism", c9_determinism),
    ];
    let mut failed = 0;
    for (i, (name, check)) in criteria.iter().enumerate() {
        let start = Instant::now();
        let outcome = std::panic::catch_unwind(check).unwrap_or_else(|_| Err("panicked".into()));
        let secs = start.elapsed().as_secs_f64();
        match outcome {
            Ok(detail) => println!("PASS {} {name}: {detail} ({secs:.1}s)", i + 1),
            Err(detail) => {
                failed += 1;
                println!("FAIL {} {name}: {detail} ({secs:.1}s)", i + 1);
            }
        }
    }
    if failed > 0 {
        eprintln!("{failed} acceptance criteria failed");
        std::process::exit(1);
    }
}
