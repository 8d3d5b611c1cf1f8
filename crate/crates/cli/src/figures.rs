//! Figure data (CSV) and gnuplot scripts.

use std::fmt::Write as _;

use clap::ValueEnum;

use qpcodes::bounds::{erasure_error_bound, mds_bound, optimize_psi, psi_binary_rule, PsiFamily};
use qpcodes::channel::{erasure_error_channel, ErasureErrorParams};
use qpcodes::codes::{best_code_search, best_lossy_code_search, run_trials, Decoder, ReedSolomon};
use qpcodes::sourcecoding::bms_uniform_bound;
use qpcodes::{Rational, Scalar};

use crate::commands::{bound_value, render, render_opt};
use crate::input::{parse_list, parse_range};
use crate::{CliError, CliResult, Output, Settings};

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Figure {
    Fig1,
    Fig2,
    Fig3,
}

impl Figure {
    pub fn name(self) -> &'static str {
        match self {
            Figure::Fig1 => "fig1",
            Figure::Fig2 => "fig2",
            Figure::Fig3 => "fig3",
        }
    }
}

/// Default seed of the fig2 simulations.
pub const FIG2_SEED: u64 = 20_240_601;
pub const FIG2_TRIALS: u64 = 100_000;

pub fn cmd_figure(settings: &Settings, which: Figure, data_name: &str) -> CliResult<Output> {
    let (text, script) = match which {
        Figure::Fig1 => fig1(settings, data_name)?,
        Figure::Fig2 => fig2(settings, data_name)?,
        Figure::Fig3 => fig3(settings, data_name)?,
    };
    Ok(Output { text, script: Some(script) })
}

fn frac(a: i64, b: i64) -> Rational {
    Rational::new(a.into(), b.into())
}

fn ranged(settings: &Settings, key: &str, default: &str) -> CliResult<Vec<usize>> {
    parse_range(key, settings.get(key).unwrap_or(default))
}

/// Best binary codes found by exhaustive search against the erasure/error
/// bound with the binary-rule Ψ.
fn fig1(settings: &Settings, data: &str) -> CliResult<(String, String)> {
    let ns = ranged(settings, "n", "2..6")?;
    let m: u64 = settings.number_or("M", 4)?;
    let budget: u64 = settings.number_or("budget", qpcodes::codes::DEFAULT_CANDIDATE_BUDGET)?;
    let channels = [("bsc", frac(1, 4), frac(0, 1)), ("mixed", frac(1, 20), frac(1, 5)), ("bec", frac(0, 1), frac(1, 4))];
    let mut out = String::new();
    writeln!(out, "# qpcodes figure fig1").unwrap();
    writeln!(out, "# best binary codes by exhaustive search over canonical codebooks (n <= 6 at desk scale)").unwrap();
    writeln!(out, "# bound: erasure/error meta-converse with the binary-rule psi").unwrap();
    writeln!(out, "channel,eps,delta,n,M,exact_pe,bound,equal,exhaustive").unwrap();
    for (name, eps, delta) in &channels {
        let p = ErasureErrorParams::new(2, eps.clone(), delta.clone())?;
        let base = erasure_error_channel(&p);
        for &n in &ns {
            let r = best_code_search(n, m as usize, &base, budget)?;
            let b = erasure_error_bound(n, &p, m, &psi_binary_rule(n, 2, m))?;
            writeln!(
                out,
                "{name},{},{},{n},{m},{},{},{},{}",
                render(eps),
                render(delta),
                render(&r.pe),
                render(&b.value),
                r.pe == b.value,
                r.exact
            )
            .unwrap();
        }
    }
    let script = format!(
        "set datafile separator ','\nset logscale y\nset xlabel 'n'\nset ylabel 'error probability'\nset key bottom left\n\
         plot for [c in 'bsc mixed bec'] '{data}' using 4:(strcol(1) eq c ? $6 : 1/0) with points title c.' best code', \\\n\
         \x20    for [c in 'bsc mixed bec'] '{data}' using 4:(strcol(1) eq c ? $7 : 1/0) with lines title c.' bound'\n"
    );
    Ok((out, script))
}

/// Reed–Solomon codes over GF(8) at rate 1/2: simulated error rates against
/// the optimized erasure/error bound (bounded-distance decoding, mixed
/// channel) and the MDS bound (ML decoding, erasures only).
fn fig2(settings: &Settings, data: &str) -> CliResult<(String, String)> {
    let ns = ranged(settings, "n", "2,4,6")?;
    if let Some(&n) = ns.iter().find(|&&n| n % 2 == 1 || n > 7) {
        return Err(CliError::Config(format!("n: {n} is not an even length <= 7 for rate-1/2 codes over GF(8)")));
    }
    let trials = settings.trials.unwrap_or(FIG2_TRIALS);
    let seed = settings.seed.unwrap_or(FIG2_SEED);
    let scenarios = [("mixed", frac(1, 20), frac(1, 4), "bd"), ("erasure", frac(0, 1), frac(1, 4), "ml")];
    let mut out = String::new();
    writeln!(out, "# qpcodes figure fig2").unwrap();
    writeln!(out, "# RS codes over GF(8), rate 1/2, even n at desk scale").unwrap();
    writeln!(out, "# seed={seed} trials={trials}; point seed = seed + 1000*scenario + n").unwrap();
    writeln!(out, "scenario,n,k,q,eps,delta,M,bound,decoder,trials,failures,estimate,ci95_lo,ci95_hi,seed").unwrap();
    for (si, (name, eps, delta, dec)) in scenarios.iter().enumerate() {
        let p = ErasureErrorParams::new(8, eps.clone(), delta.clone())?;
        let base = erasure_error_channel(&p.to_f64());
        for &n in &ns {
            let k = n / 2;
            let rs = ReedSolomon::new(3, n, k)?;
            let code = rs.codebook()?;
            let m = code.len() as u64;
            let bound = if eps.is_zero() {
                mds_bound(n, 8, delta, m)?
            } else {
                optimize_psi(n, &p, m, &PsiFamily::Scan)?.1
            };
            let decoder = if *dec == "bd" { Decoder::BoundedDistance(&rs) } else { Decoder::ExhaustiveMl };
            let point_seed = seed.wrapping_add(1000 * si as u64 + n as u64);
            let r = run_trials(&code, &base, &decoder, trials, point_seed, settings.workers)?;
            writeln!(
                out,
                "{name},{n},{k},8,{},{},{m},{},{},{},{},{},{},{},{}",
                render(eps),
                render(delta),
                bound_value(&bound),
                r.decoder,
                r.trials,
                r.failures,
                render_opt(r.estimate),
                render_opt(r.ci95_lo),
                render_opt(r.ci95_hi),
                r.seed
            )
            .unwrap();
        }
    }
    let script = format!(
        "set datafile separator ','\nset logscale y\nset xlabel 'n'\nset ylabel 'block error probability'\nset key bottom left\n\
         plot for [c in 'mixed erasure'] '{data}' using 2:(strcol(1) eq c ? $12 : 1/0):(strcol(1) eq c ? $13 : 1/0):(strcol(1) eq c ? $14 : 1/0) with yerrorbars title c.' simulated', \\\n\
         \x20    for [c in 'mixed erasure'] '{data}' using 2:(strcol(1) eq c ? $8 : 1/0) with lines title c.' bound'\n"
    );
    Ok((out, script))
}

/// Binary memoryless source, Hamming distortion: best M-codeword code by
/// exhaustive search against the uniform-auxiliary converse.
fn fig3(settings: &Settings, data: &str) -> CliResult<(String, String)> {
    let ns = ranged(settings, "n", "2..12")?;
    let m: usize = settings.number_or("M", 4)?;
    let ds = parse_list("D", settings.get("D").unwrap_or("0.11,0.37"))?;
    let budget: u64 = settings.number_or("budget", qpcodes::codes::DEFAULT_CANDIDATE_BUDGET)?;
    let mut out = String::new();
    writeln!(out, "# qpcodes figure fig3").unwrap();
    writeln!(out, "# best codes by exhaustive search (n <= 12 at desk scale); qp_marker = 1 where a quasi-perfect code exists").unwrap();
    writeln!(out, "n,D,M,exact_ped,bound_uniform,qp_marker").unwrap();
    for d in &ds {
        for &n in &ns {
            let r = best_lossy_code_search(n, m, d, budget)?;
            let b = bms_uniform_bound(n, m as u64, d)?;
            writeln!(
                out,
                "{n},{},{m},{},{},{}",
                render(d),
                render(&r.excess),
                render(&b),
                u8::from(r.quasi_perfect_exists)
            )
            .unwrap();
        }
    }
    let script = format!(
        "set datafile separator ','\nset xlabel 'n'\nset ylabel 'excess-distortion probability'\nset key top right\n\
         plot for [d in '0.11 0.37'] '{data}' using 1:(strcol(2) eq d ? $4 : 1/0) with points title 'best code D='.d, \\\n\
         \x20    for [d in '0.11 0.37'] '{data}' using 1:(strcol(2) eq d ? $5 : 1/0) with lines title 'bound D='.d, \\\n\
         \x20    '{data}' using 1:($6 == 1 ? $4 : 1/0) with points pt 6 ps 2 title 'quasi-perfect'\n"
    );
    Ok((out, script))
}
