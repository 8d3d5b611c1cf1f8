//! `bound`, `verify`, `simulate` and `search`.

use std::collections::BTreeMap;
use std::fmt::Write as _;

use serde_json::{json, Value};

use qpcodes::bounds::{
    erasure_error_bound, jscc_bound, lemma3_bound, mds_bound, metaconverse_symmetric, optimize_psi, psi_binary_rule, psi_erasure_limit,
    BoundReport, PsiFamily,
};
use qpcodes::channel::{
    is_symmetric, product_channel, qstar_erasure, AuxMeasure, Channel, DiscreteChannel, ErasureErrorParams, UniformMeasure,
};
use qpcodes::codes::{
    best_code_search, best_lossy_code_search, ml_error_probability, run_trials, Codebook, Decoder,
    DEFAULT_CANDIDATE_BUDGET,
};
use qpcodes::geometry::classify_qp;
use qpcodes::scalar::render_f64;
use qpcodes::sourcecoding::{bms_uniform_bound, lossy_bound_code, reconstructions, DistortionSpec, Source};
use qpcodes::{Level, Rational, Scalar, DEFAULT_BUDGET};

use crate::input::{parse_list, ChannelSpec};
use crate::{CliError, CliResult, Mode, Settings};

/// Significant digits of every rendered value.
pub const DIGITS: usize = 15;

pub(crate) fn render<S: Scalar>(v: &S) -> String {
    v.to_prob().render(DIGITS)
}

pub(crate) fn render_level<S: Scalar>(l: &Level<S>) -> String {
    l.render(DIGITS)
}

pub(crate) fn bound_value<S: Scalar>(r: &BoundReport<S>) -> String {
    r.display_value().render(DIGITS)
}

pub const BOUND_COLUMNS: &str = "n,q,eps,delta,M,bound_name,value,psi_table,gamma";

struct BoundRow {
    n: usize,
    q: String,
    eps: String,
    delta: String,
    m: u64,
    name: String,
    value: String,
    psi: String,
    gamma: String,
}

impl BoundRow {
    fn csv(&self) -> String {
        format!(
            "{},{},{},{},{},{},{},{},{}",
            self.n, self.q, self.eps, self.delta, self.m, self.name, self.value, self.psi, self.gamma
        )
    }
}

/// Lower bounds, one CSV row per block length.
pub fn cmd_bound(settings: &Settings) -> CliResult<String> {
    let family = settings.require("family")?.to_string();
    let rows = match settings.mode {
        Mode::Rational => bound_rows::<Rational>(settings, &family)?,
        Mode::Float => bound_rows::<f64>(settings, &family)?,
    };
    let mut out = String::new();
    writeln!(out, "# qpcodes bound").unwrap();
    writeln!(out, "# family={family}").unwrap();
    writeln!(out, "# mode={}", settings.mode.as_str()).unwrap();
    for key in ["psi", "D", "channel", "code", "source"] {
        if let Some(v) = settings.get(key) {
            writeln!(out, "# {key}={v}").unwrap();
        }
    }
    writeln!(out, "{BOUND_COLUMNS}").unwrap();
    for row in rows {
        writeln!(out, "{}", row.csv()).unwrap();
    }
    Ok(out)
}

fn bound_rows<S: Scalar>(settings: &Settings, family: &str) -> CliResult<Vec<BoundRow>> {
    let conv = |r: &Rational| S::from_rational(r);
    let mut rows = Vec::new();
    match family {
        "erasure_error" => {
            let q: usize = settings.number_or("q", 2)?;
            let eps = settings.rational("eps")?;
            let delta = settings.rational("delta")?;
            let m: u64 = settings.number("M")?;
            let p = ErasureErrorParams::new(q, conv(&eps), conv(&delta))?;
            let fam = settings.psi_family()?;
            for n in settings.range("n")? {
                let (psi, report) = optimize_psi(n, &p, m, &fam)?;
                rows.push(BoundRow {
                    n,
                    q: q.to_string(),
                    eps: render(&conv(&eps)),
                    delta: render(&conv(&delta)),
                    m,
                    name: "erasure_error".into(),
                    value: bound_value(&report),
                    psi: psi.render(),
                    gamma: report.witness.get("gamma").cloned().unwrap_or_default(),
                });
            }
        }
        "mds" => {
            let q: usize = settings.number_or("q", 2)?;
            let delta = settings.rational("delta")?;
            let m: u64 = settings.number("M")?;
            for n in settings.range("n")? {
                let report = mds_bound(n, q, &conv(&delta), m)?;
                rows.push(BoundRow {
                    n,
                    q: q.to_string(),
                    eps: "0".into(),
                    delta: render(&conv(&delta)),
                    m,
                    name: "mds".into(),
                    value: bound_value(&report),
                    psi: String::new(),
                    gamma: String::new(),
                });
            }
        }
        "metaconverse" => {
            let file = settings.channel()?;
            let m: u64 = settings.number("M")?;
            let base: Channel<S> = file.spec.base()?;
            let ns = match (settings.get("n"), file.n) {
                (Some(_), _) => settings.range("n")?,
                (None, Some(n)) => vec![n],
                (None, None) => return Err(CliError::Config("n: missing".into())),
            };
            let (eps, delta, q) = channel_columns(&file.spec);
            for n in ns {
                let ch = product_channel(&base, n, DEFAULT_BUDGET)?;
                let (report, psi) = match (&file.spec, settings.get("psi")) {
                    (ChannelSpec::ErasureError { .. }, Some(_)) => {
                        let p = file.spec.erasure_params::<S>().unwrap()?;
                        let psi = fixed_or_rule(settings, n, &p, m)?;
                        let aux = qstar_erasure(n, &p, &psi)?;
                        (metaconverse_symmetric(&ch, &aux, m)?, psi.render())
                    }
                    _ => (metaconverse_symmetric(&ch, &UniformMeasure { size: ch.output_count() }, m)?, String::new()),
                };
                rows.push(BoundRow {
                    n,
                    q: q.clone(),
                    eps: eps.clone(),
                    delta: delta.clone(),
                    m,
                    name: "metaconverse".into(),
                    value: bound_value(&report),
                    psi,
                    gamma: report.witness.get("gamma").cloned().unwrap_or_default(),
                });
            }
        }
        "lossy_uniform" => {
            let m: u64 = settings.number("M")?;
            let d = settings.rational("D")?;
            for n in settings.range("n")? {
                let value = bms_uniform_bound(n, m, &d)?;
                rows.push(lossy_row::<S>(n, m, "lossy_uniform", &value));
            }
        }
        "lossy_code" => {
            let code = settings.code()?;
            let d = settings.rational("D")?;
            let n = code.n();
            let dist = DistortionSpec::hamming(n, d)?;
            let report = lossy_bound_code(&Source::bms(n), &dist, &reconstructions(&code)?)?;
            rows.push(lossy_row::<S>(n, code.len() as u64, "lossy_code", &report.value));
        }
        "jscc" => {
            let source: Vec<S> = parse_list("source", settings.require("source")?)?.iter().map(conv).collect();
            let file = settings.channel()?;
            let base: Channel<S> = file.spec.base()?;
            let n = settings.number_or("n", file.n.unwrap_or(1))?;
            let ch = product_channel(&base, n, DEFAULT_BUDGET)?;
            let report = jscc_bound(&source, &ch, &UniformMeasure { size: ch.output_count() })?;
            let (eps, delta, q) = channel_columns(&file.spec);
            rows.push(BoundRow {
                n,
                q,
                eps,
                delta,
                m: source.len() as u64,
                name: "jscc".into(),
                value: bound_value(&report),
                psi: String::new(),
                gamma: report.witness.get("gamma").cloned().unwrap_or_default(),
            });
        }
        other => {
            return Err(CliError::Config(format!(
                "family: unknown `{other}` (erasure_error, mds, metaconverse, lossy_uniform, lossy_code, jscc)"
            )))
        }
    }
    Ok(rows)
}

fn lossy_row<S: Scalar>(n: usize, m: u64, name: &str, value: &Rational) -> BoundRow {
    BoundRow {
        n,
        q: "2".into(),
        eps: String::new(),
        delta: String::new(),
        m,
        name: name.into(),
        value: render(&S::from_rational(value)),
        psi: String::new(),
        gamma: String::new(),
    }
}

fn channel_columns(spec: &ChannelSpec) -> (String, String, String) {
    match spec {
        ChannelSpec::ErasureError { q, eps, delta } => (render(eps), render(delta), q.to_string()),
        ChannelSpec::Matrix(rows) => (String::new(), String::new(), rows.len().to_string()),
    }
}

fn fixed_or_rule<S: Scalar>(
    settings: &Settings,
    n: usize,
    p: &ErasureErrorParams<S>,
    m: u64,
) -> CliResult<qpcodes::channel::Psi> {
    Ok(match settings.psi_family()? {
        PsiFamily::Fixed(psi) => psi,
        fam => optimize_psi(n, p, m, &fam)?.0,
    })
}

/// Quasi-perfect classification, exact error probability and the matching
/// meta-converse bound of a code.
pub fn cmd_verify(settings: &Settings) -> CliResult<String> {
    match settings.mode {
        Mode::Rational => verify::<Rational>(settings),
        Mode::Float => verify::<f64>(settings),
    }
}

fn verify<S: Scalar>(settings: &Settings) -> CliResult<String> {
    let code = settings.code()?;
    let file = settings.channel()?;
    let base: Channel<S> = file.spec.base()?;
    if base.input_count() != code.q() {
        return Err(CliError::Config(format!(
            "channel: {} inputs but the code is {}-ary",
            base.input_count(),
            code.q()
        )));
    }
    if !is_symmetric(&base).symmetric {
        return Err(CliError::Hypothesis(
            "channel rows are not permutations of each other; the symmetric-channel bound does not apply".into(),
        ));
    }
    let n = code.n();
    let m = code.len() as u64;
    let ch = product_channel(&base, n, DEFAULT_BUDGET)?;
    // Erasure channels default to the erasure-count measure; with no erasures
    // it reduces to the uniform one.
    let aux_kind = match (settings.get("aux").unwrap_or("auto"), &file.spec) {
        ("auto", ChannelSpec::ErasureError { delta, .. }) if !delta.is_zero() => "qstar",
        ("auto", _) => "uniform",
        (kind, _) => kind,
    };
    let aux: Box<dyn AuxMeasure<S>> = match aux_kind {
        "uniform" => Box::new(UniformMeasure { size: ch.output_count() }),
        "qstar" => {
            let p = file
                .spec
                .erasure_params::<S>()
                .ok_or_else(|| CliError::Config("aux: qstar needs an erasure_error channel".into()))??;
            let psi = match settings.get("psi") {
                Some(_) => fixed_or_rule(settings, n, &p, m)?,
                None if p.eps.is_zero() => psi_erasure_limit(n, p.q, m),
                None => psi_binary_rule(n, p.q, m),
            };
            Box::new(qstar_erasure(n, &p, &psi)?)
        }
        other => return Err(CliError::Config(format!("aux: unknown `{other}` (auto, uniform, qstar)"))),
    };
    let class = classify_qp(&code, &ch, aux.as_ref())?;
    let pe: S = ml_error_probability(&code, &ch)?;
    let bound = metaconverse_symmetric(&ch, aux.as_ref(), m)?.compare_with(&pe);
    let lemma3 = match class.witness_gamma.finite() {
        Some(g) => Some(lemma3_bound(&ch, aux.as_ref(), m, g)?),
        None => None,
    };
    let mut out = String::new();
    writeln!(out, "# qpcodes verify").unwrap();
    writeln!(out, "mode: {}", settings.mode.as_str()).unwrap();
    writeln!(out, "code: n={} q={} M={}", n, code.q(), m).unwrap();
    writeln!(out, "channel: {}", file.spec.describe()).unwrap();
    writeln!(out, "aux: {}", aux.describe()).unwrap();
    writeln!(out, "verdict: {}", class.verdict.as_str()).unwrap();
    writeln!(out, "witness_gamma: {}", render_level(&class.witness_gamma)).unwrap();
    writeln!(out, "witness_q: {}", class.witness_q).unwrap();
    writeln!(out, "eta: {}", render_level(&class.radii.eta)).unwrap();
    writeln!(out, "nu: {}", render_level(&class.radii.nu)).unwrap();
    writeln!(out, "pe: {}", render(&pe)).unwrap();
    writeln!(out, "bound: {}", bound_value(&bound)).unwrap();
    if let Some(l) = lemma3 {
        writeln!(out, "lemma3_at_witness: {}", render(&l.value)).unwrap();
    }
    writeln!(out, "attained: {}", bound.attained.unwrap_or(false)).unwrap();
    Ok(out)
}

/// Monte Carlo estimate as JSON, with the matching bound when one is known.
pub fn cmd_simulate(settings: &Settings) -> CliResult<String> {
    let rs = settings.reed_solomon()?;
    let (code, code_desc): (Codebook, String) = match &rs {
        Some(rs) => (rs.codebook()?, format!("RS({},{}) over GF({})", rs.n(), rs.k(), rs.q())),
        None => {
            let c = settings.code()?;
            let d = format!("file {} (n={}, q={}, M={})", settings.require("code")?, c.n(), c.q(), c.len());
            (c, d)
        }
    };
    let file = match settings.get("channel") {
        Some(_) => settings.channel()?,
        None => {
            let mut s = settings.clone();
            s.set("q", &code.q().to_string());
            s.channel()?
        }
    };
    let decoder = match settings.get("decoder").unwrap_or("ml") {
        "ml" => Decoder::ExhaustiveMl,
        "bd" => Decoder::BoundedDistance(
            rs.as_ref().ok_or_else(|| CliError::Config("decoder: bd needs --rs".into()))?,
        ),
        other => return Err(CliError::Config(format!("decoder: unknown `{other}` (ml, bd)"))),
    };
    let trials = settings.trials.ok_or_else(|| CliError::Config("trials: missing".into()))?;
    let seed = match settings.seed {
        Some(s) => s,
        None if trials == 0 => 0,
        None => return Err(CliError::Config("seed: required when trials > 0".into())),
    };
    let base: Channel<f64> = file.spec.base::<Rational>()?.to_f64();
    let report = run_trials(&code, &base, &decoder, trials, seed, settings.workers)?;

    let mut doc: BTreeMap<String, Value> = match serde_json::to_value(&report).expect("report serializes") {
        Value::Object(map) => map.into_iter().collect(),
        _ => unreachable!(),
    };
    doc.insert("code".into(), json!(code_desc));
    doc.insert("channel".into(), json!(file.spec.describe()));
    if let ChannelSpec::ErasureError { q, eps, delta } = &file.spec {
        let p = ErasureErrorParams::new(*q, eps.clone(), delta.clone())?;
        let (name, value) = if *eps == <Rational as Scalar>::zero() {
            ("mds", mds_bound(code.n(), *q, delta, code.len() as u64)?)
        } else {
            ("erasure_error", optimize_psi(code.n(), &p, code.len() as u64, &PsiFamily::Scan)?.1)
        };
        doc.insert("bound_name".into(), json!(name));
        doc.insert("bound".into(), json!(bound_value(&value)));
    }
    Ok(serde_json::to_string_pretty(&doc).expect("json") + "\n")
}

/// Exhaustive search for the best binary code (channel or lossy objective).
pub fn cmd_search(settings: &Settings) -> CliResult<String> {
    let n: usize = settings.number("n")?;
    let m: usize = settings.number("M")?;
    let budget: u64 = settings.number_or("budget", DEFAULT_CANDIDATE_BUDGET)?;
    let mut out = String::new();
    writeln!(out, "# qpcodes search").unwrap();
    match settings.get("objective").unwrap_or("channel") {
        "channel" => {
            let file = settings.channel()?;
            let base: Channel<Rational> = file.spec.base()?;
            let r = best_code_search(n, m, &base, budget)?;
            writeln!(out, "objective: channel").unwrap();
            writeln!(out, "channel: {}", file.spec.describe()).unwrap();
            writeln!(out, "n: {n}\nM: {m}").unwrap();
            writeln!(out, "pe: {}", render(&r.pe)).unwrap();
            writeln!(out, "pe_exact: {}", r.pe).unwrap();
            writeln!(out, "exhaustive: {}", r.exact).unwrap();
            writeln!(out, "candidates: {}", r.candidates).unwrap();
            if let Some(p) = file.spec.erasure_params::<Rational>() {
                let p = p?;
                let b = erasure_error_bound(n, &p, m as u64, &psi_binary_rule(n, p.q, m as u64))?;
                writeln!(out, "bound_erasure_error: {}", bound_value(&b)).unwrap();
                writeln!(out, "attained: {}", b.value == r.pe).unwrap();
            }
            writeln!(out, "code:\n{}", r.code.to_text().trim_end()).unwrap();
        }
        "lossy" => {
            let d = settings.rational("D")?;
            let r = best_lossy_code_search(n, m, &d, budget)?;
            let bound = bms_uniform_bound(n, m as u64, &d)?;
            writeln!(out, "objective: lossy").unwrap();
            writeln!(out, "D: {}", render(&d)).unwrap();
            writeln!(out, "n: {n}\nM: {m}").unwrap();
            writeln!(out, "excess: {}", render(&r.excess)).unwrap();
            writeln!(out, "excess_exact: {}", r.excess).unwrap();
            writeln!(out, "bound_uniform: {}", render(&bound)).unwrap();
            writeln!(out, "attained: {}", bound == r.excess).unwrap();
            writeln!(out, "covering_radius: {}", r.covering_radius).unwrap();
            writeln!(out, "min_distance: {}", r.min_distance).unwrap();
            writeln!(out, "quasi_perfect_exists: {}", r.quasi_perfect_exists).unwrap();
            writeln!(out, "exhaustive: {}", r.exact).unwrap();
            writeln!(out, "candidates: {}", r.candidates).unwrap();
            writeln!(out, "code:\n{}", r.code.to_text().trim_end()).unwrap();
        }
        other => return Err(CliError::Config(format!("objective: unknown `{other}` (channel, lossy)"))),
    }
    Ok(out)
}

pub(crate) fn render_opt(v: Option<f64>) -> String {
    v.map(|x| render_f64(x, DIGITS)).unwrap_or_default()
}
