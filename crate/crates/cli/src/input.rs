//! Parsing of config files, channel files, code files and numeric fields.

use std::collections::BTreeMap;

use qpcodes::bounds::PsiFamily;
use qpcodes::channel::{erasure_error_channel, Channel, ErasureErrorParams, Psi};
use qpcodes::codes::{Codebook, ReedSolomon};
use qpcodes::scalar::parse_rational;
use qpcodes::{Rational, Scalar};

use crate::{parse_field, CliError, CliResult, Settings};

/// `key = value` lines in file order; blank lines and `#` comments skipped.
pub fn parse_entries(text: &str) -> CliResult<Vec<(String, String)>> {
    let mut out = Vec::new();
    for (i, line) in text.lines().enumerate() {
        let line = line.split('#').next().unwrap_or("").trim();
        if line.is_empty() {
            continue;
        }
        let Some((k, v)) = line.split_once('=') else {
            return Err(CliError::Config(format!("line {}: expected `key = value`, got `{line}`", i + 1)));
        };
        out.push((k.trim().to_string(), v.trim().to_string()));
    }
    Ok(out)
}

/// Config map; a repeated key keeps its last value.
pub fn parse_key_values(text: &str) -> CliResult<BTreeMap<String, String>> {
    Ok(parse_entries(text)?.into_iter().collect())
}

pub fn rational(key: &str, text: &str) -> CliResult<Rational> {
    parse_rational(text)
        .map(|(r, _)| r)
        .ok_or_else(|| CliError::Config(format!("{key}: `{text}` is not a decimal or a fraction a/b")))
}

/// `4`, `2..6` (inclusive) or `2,3,5`.
pub fn parse_range(key: &str, text: &str) -> CliResult<Vec<usize>> {
    let text = text.trim();
    let values: Vec<usize> = if let Some((a, b)) = text.split_once("..") {
        let a: usize = parse_field(key, a)?;
        let b: usize = parse_field(key, b.trim_start_matches('='))?;
        if a > b {
            return Err(CliError::Config(format!("{key}: empty range `{text}`")));
        }
        (a..=b).collect()
    } else {
        text.split(',').map(|t| parse_field(key, t)).collect::<CliResult<_>>()?
    };
    if values.is_empty() {
        return Err(CliError::Config(format!("{key}: no values")));
    }
    Ok(values)
}

/// A whitespace- or comma-separated list of probabilities.
pub fn parse_list(key: &str, text: &str) -> CliResult<Vec<Rational>> {
    text.split(|c: char| c == ',' || c.is_whitespace())
        .filter(|t| !t.is_empty())
        .map(|t| rational(key, t))
        .collect()
}

#[derive(Clone, Debug, PartialEq)]
pub enum ChannelSpec {
    Matrix(Vec<Vec<Rational>>),
    ErasureError { q: usize, eps: Rational, delta: Rational },
}

#[derive(Clone, Debug, PartialEq)]
pub struct ChannelFile {
    pub spec: ChannelSpec,
    pub n: Option<usize>,
}

/// Channel description: `kind = matrix` with one `row = ...` line per input,
/// or `kind = erasure_error` with `q`, `eps`, `delta`; optional `n`.
pub fn parse_channel(text: &str) -> CliResult<ChannelFile> {
    let entries = parse_entries(text)?;
    let get = |k: &str| entries.iter().rev().find(|(key, _)| key == k).map(|(_, v)| v.as_str());
    let n = get("n").map(|v| parse_field::<usize>("channel.n", v)).transpose()?;
    let spec = match get("kind") {
        Some("matrix") => {
            let rows = entries
                .iter()
                .filter(|(k, _)| k == "row")
                .enumerate()
                .map(|(i, (_, v))| parse_list(&format!("channel.row[{i}]"), v))
                .collect::<CliResult<Vec<_>>>()?;
            if rows.is_empty() {
                return Err(CliError::Config("channel: matrix channel without `row` lines".into()));
            }
            ChannelSpec::Matrix(rows)
        }
        Some("erasure_error") => ChannelSpec::ErasureError {
            q: get("q").map(|v| parse_field("channel.q", v)).transpose()?.unwrap_or(2),
            eps: rational("channel.eps", get("eps").ok_or_else(|| missing("channel.eps"))?)?,
            delta: rational("channel.delta", get("delta").ok_or_else(|| missing("channel.delta"))?)?,
        },
        Some(other) => return Err(CliError::Config(format!("channel.kind: unknown kind `{other}`"))),
        None => return Err(missing("channel.kind")),
    };
    Ok(ChannelFile { spec, n })
}

fn missing(key: &str) -> CliError {
    CliError::Config(format!("{key}: missing"))
}

impl ChannelSpec {
    pub fn base<S: Scalar>(&self) -> CliResult<Channel<S>> {
        match self {
            ChannelSpec::Matrix(rows) => {
                Ok(Channel::new(rows.iter().map(|r| r.iter().map(S::from_rational).collect()).collect())?)
            }
            ChannelSpec::ErasureError { .. } => Ok(erasure_error_channel(&self.erasure_params::<S>().unwrap()?)),
        }
    }

    pub fn erasure_params<S: Scalar>(&self) -> Option<CliResult<ErasureErrorParams<S>>> {
        match self {
            ChannelSpec::ErasureError { q, eps, delta } => {
                Some(ErasureErrorParams::new(*q, S::from_rational(eps), S::from_rational(delta)).map_err(Into::into))
            }
            ChannelSpec::Matrix(_) => None,
        }
    }

    pub fn describe(&self) -> String {
        match self {
            ChannelSpec::Matrix(rows) => format!(
                "matrix [{}]",
                rows.iter()
                    .map(|r| r.iter().map(|p| p.to_string()).collect::<Vec<_>>().join(" "))
                    .collect::<Vec<_>>()
                    .join("; ")
            ),
            ChannelSpec::ErasureError { q, eps, delta } => format!("erasure_error q={q} eps={eps} delta={delta}"),
        }
    }
}

impl Settings {
    pub fn rational(&self, key: &str) -> CliResult<Rational> {
        rational(key, self.require(key)?)
    }

    pub fn rational_or(&self, key: &str, default: Rational) -> CliResult<Rational> {
        self.get(key).map(|v| rational(key, v)).transpose().map(|v| v.unwrap_or(default))
    }

    pub fn number<T: std::str::FromStr>(&self, key: &str) -> CliResult<T> {
        parse_field(key, self.require(key)?)
    }

    pub fn number_or<T: std::str::FromStr>(&self, key: &str, default: T) -> CliResult<T> {
        self.get(key).map(|v| parse_field(key, v)).transpose().map(|v| v.unwrap_or(default))
    }

    pub fn range(&self, key: &str) -> CliResult<Vec<usize>> {
        parse_range(key, self.require(key)?)
    }

    /// Channel from `channel = <file>`, or an erasure/error channel from
    /// `q`, `eps`, `delta`.
    pub fn channel(&self) -> CliResult<ChannelFile> {
        if let Some(path) = self.get("channel") {
            let text = std::fs::read_to_string(path)
                .map_err(|e| CliError::Config(format!("channel: cannot read {path}: {e}")))?;
            return parse_channel(&text);
        }
        if self.get("eps").is_none() && self.get("delta").is_none() {
            return Err(CliError::Config("channel: missing (pass --channel FILE or --eps/--delta)".into()));
        }
        Ok(ChannelFile {
            spec: ChannelSpec::ErasureError {
                q: self.number_or("q", 2)?,
                eps: self.rational_or("eps", <Rational as Scalar>::zero())?,
                delta: self.rational_or("delta", <Rational as Scalar>::zero())?,
            },
            n: None,
        })
    }

    pub fn code(&self) -> CliResult<Codebook> {
        let path = self.require("code")?;
        let text =
            std::fs::read_to_string(path).map_err(|e| CliError::Config(format!("code: cannot read {path}: {e}")))?;
        Ok(Codebook::parse(&text)?)
    }

    /// `rs = m,n,k`.
    pub fn reed_solomon(&self) -> CliResult<Option<ReedSolomon>> {
        let Some(text) = self.get("rs") else {
            return Ok(None);
        };
        let parts: Vec<usize> = text.split(',').map(|t| parse_field("rs", t)).collect::<CliResult<_>>()?;
        let [m, n, k] = parts[..] else {
            return Err(CliError::Config(format!("rs: expected m,n,k, got `{text}`")));
        };
        Ok(Some(ReedSolomon::new(m as u32, n, k)?))
    }

    /// `psi = eq39 | scan | erasure_limit | <table>`.
    pub fn psi_family(&self) -> CliResult<PsiFamily> {
        Ok(match self.get("psi").unwrap_or("eq39") {
            "eq39" | "binary" => PsiFamily::Binary,
            "scan" => PsiFamily::Scan,
            "erasure_limit" => PsiFamily::ErasureLimit,
            table => PsiFamily::Fixed(Psi(
                table
                    .split(|c: char| c == ',' || c.is_whitespace())
                    .filter(|t| !t.is_empty())
                    .map(|t| parse_field("psi", t))
                    .collect::<CliResult<_>>()?,
            )),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn ranges() {
        assert_eq!(parse_range("n", "2..4").unwrap(), vec![2, 3, 4]);
        assert_eq!(parse_range("n", "7").unwrap(), vec![7]);
        assert_eq!(parse_range("n", "2,5").unwrap(), vec![2, 5]);
        assert!(parse_range("n", "5..2").is_err());
        assert!(parse_range("n", "x").is_err());
    }

    #[test]
    fn channel_files() {
        let f = parse_channel("kind = matrix\nrow = 3/4 1/4\nrow = 1/4, 3/4\nn = 3\n").unwrap();
        assert_eq!(f.n, Some(3));
        let ch: Channel<Rational> = f.spec.base().unwrap();
        assert_eq!(ch.rows()[1][0], Rational::new(1.into(), 4.into()));
        let f = parse_channel("# comment\nkind = erasure_error\nq = 4\neps = 0.05\ndelta = 1/4\n").unwrap();
        let ch: Channel<f64> = f.spec.base().unwrap();
        assert_eq!(ch.output_count(), 5);
        assert!(parse_channel("kind = erasure_error\nq = 2\n").is_err());
        assert!(parse_channel("kind = wat\n").is_err());
        assert!(parse_channel("row 1 2\n").is_err());
    }

    use qpcodes::channel::DiscreteChannel;
}
