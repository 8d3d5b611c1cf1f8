//! Numeric backends.
//!
//! Every evaluator in this crate is generic over [`Scalar`], which is
//! implemented for exact arbitrary-precision rationals ([`Rational`]) and for
//! `f64`. The rational backend is used whenever an identity has to hold
//! exactly (an error probability equal to a bound, a spectrum independent of
//! the input); the float backend is for sweeps where speed matters more.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Div, Mul, Sub};

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::Serialize;

/// Exact rational number.
pub type Rational = BigRational;

/// Relative tolerance under which two float ratio levels are merged.
pub const FLOAT_LEVEL_RTOL: f64 = 1e-9;

/// Arithmetic required by the probability evaluators.
pub trait Scalar:
    Clone
    + fmt::Debug
    + PartialEq
    + PartialOrd
    + Send
    + Sync
    + 'static
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
{
    /// True for backends with exact arithmetic.
    const EXACT: bool;

    fn zero() -> Self;
    fn one() -> Self;
    fn from_rational(r: &Rational) -> Self;
    fn from_bigint(v: &BigInt) -> Self;
    fn to_f64(&self) -> f64;
    fn to_prob(&self) -> ProbValue;
    fn is_zero(&self) -> bool;

    fn from_i64(v: i64) -> Self {
        Self::from_bigint(&BigInt::from(v))
    }

    fn from_ratio(num: i64, den: i64) -> Self {
        Self::from_rational(&Rational::new(num.into(), den.into()))
    }

    /// `self^k` with the convention `0^0 = 1`.
    fn powi(&self, k: u32) -> Self {
        let mut acc = Self::one();
        let mut base = self.clone();
        let mut k = k;
        while k > 0 {
            if k & 1 == 1 {
                acc = acc * base.clone();
            }
            k >>= 1;
            if k > 0 {
                base = base.clone() * base;
            }
        }
        acc
    }

    /// Whether two ratio levels are the same level. Exact equality for
    /// rationals; relative [`FLOAT_LEVEL_RTOL`] for floats.
    fn same_level(&self, other: &Self) -> bool;

    /// Whether two evaluations of the same quantity by different routes agree.
    fn agrees(&self, other: &Self) -> bool;

    /// Sum of many terms (compensated for floats).
    fn total<I: IntoIterator<Item = Self>>(values: I) -> Self;

    fn total_cmp(&self, other: &Self) -> Ordering {
        self.partial_cmp(other).expect("NaN in probability arithmetic")
    }

    fn max_of(self, other: Self) -> Self {
        if other > self {
            other
        } else {
            self
        }
    }
}

impl Scalar for Rational {
    const EXACT: bool = true;

    fn zero() -> Self {
        Zero::zero()
    }
    fn one() -> Self {
        One::one()
    }
    fn from_rational(r: &Rational) -> Self {
        r.clone()
    }
    fn from_bigint(v: &BigInt) -> Self {
        Rational::from_integer(v.clone())
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn to_prob(&self) -> ProbValue {
        ProbValue::Exact(self.clone())
    }
    fn is_zero(&self) -> bool {
        Zero::is_zero(self)
    }
    fn same_level(&self, other: &Self) -> bool {
        self == other
    }
    fn agrees(&self, other: &Self) -> bool {
        self == other
    }
    fn total<I: IntoIterator<Item = Self>>(values: I) -> Self {
        values.into_iter().fold(Zero::zero(), |a, b| a + b)
    }
}

impl Scalar for f64 {
    const EXACT: bool = false;

    fn zero() -> Self {
        0.0
    }
    fn one() -> Self {
        1.0
    }
    fn from_rational(r: &Rational) -> Self {
        ToPrimitive::to_f64(r).unwrap_or(f64::NAN)
    }
    fn from_bigint(v: &BigInt) -> Self {
        ToPrimitive::to_f64(v).unwrap_or(f64::INFINITY)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn to_prob(&self) -> ProbValue {
        ProbValue::Float(*self)
    }
    fn is_zero(&self) -> bool {
        *self == 0.0
    }
    fn same_level(&self, other: &Self) -> bool {
        let scale = self.abs().max(other.abs());
        (self - other).abs() <= FLOAT_LEVEL_RTOL * scale
    }
    fn agrees(&self, other: &Self) -> bool {
        let scale = self.abs().max(other.abs()).max(1.0);
        (self - other).abs() <= 1e-10 * scale
    }
    fn total<I: IntoIterator<Item = Self>>(values: I) -> Self {
        // Neumaier summation
        let mut sum = 0.0f64;
        let mut comp = 0.0f64;
        for v in values {
            let t = sum + v;
            if sum.abs() >= v.abs() {
                comp += (sum - t) + v;
            } else {
                comp += (v - t) + sum;
            }
            sum = t;
        }
        sum + comp
    }
}

/// A probability (or bound) value tagged with the backend that produced it.
#[derive(Clone, Debug, PartialEq)]
pub enum ProbValue {
    Exact(Rational),
    Float(f64),
}

impl ProbValue {
    pub fn to_f64(&self) -> f64 {
        match self {
            ProbValue::Exact(r) => Scalar::to_f64(r),
            ProbValue::Float(v) => *v,
        }
    }

    /// Natural logarithm of the value (log-domain companion for small floats).
    pub fn ln(&self) -> f64 {
        match self {
            ProbValue::Exact(r) => {
                if Zero::is_zero(r) {
                    return f64::NEG_INFINITY;
                }
                // ln(a/b) via bit lengths keeps tiny rationals out of underflow
                let num = r.numer().abs();
                let den = r.denom().clone();
                ln_bigint(&num) - ln_bigint(&den)
            }
            ProbValue::Float(v) => v.ln(),
        }
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, ProbValue::Exact(_))
    }

    pub fn as_rational(&self) -> Option<&Rational> {
        match self {
            ProbValue::Exact(r) => Some(r),
            ProbValue::Float(_) => None,
        }
    }

    /// Decimal rendering rounded to `sig` significant digits.
    pub fn render(&self, sig: usize) -> String {
        match self {
            ProbValue::Exact(r) => render_rational(r, sig),
            ProbValue::Float(v) => render_f64(*v, sig),
        }
    }
}

impl fmt::Display for ProbValue {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.render(15))
    }
}

impl Serialize for ProbValue {
    fn serialize<S: serde::Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.render(15))
    }
}

fn ln_bigint(v: &BigInt) -> f64 {
    let bits = v.bits();
    if bits <= 1000 {
        return ToPrimitive::to_f64(v).unwrap_or(f64::INFINITY).ln();
    }
    let shift = bits - 64;
    let top: BigInt = v >> shift;
    ToPrimitive::to_f64(&top).unwrap().ln() + (shift as f64) * std::f64::consts::LN_2
}

/// Renders an `f64` through its exact rational value.
pub fn render_f64(v: f64, sig: usize) -> String {
    if v.is_nan() {
        return "nan".to_string();
    }
    if v.is_infinite() {
        return if v > 0.0 { "inf".into() } else { "-inf".into() };
    }
    match Rational::from_float(v) {
        Some(r) => render_rational(&r, sig),
        None => "nan".into(),
    }
}

/// Exact decimal rendering of a rational rounded half-up to `sig`
/// significant digits, trailing zeros trimmed.
pub fn render_rational(r: &Rational, sig: usize) -> String {
    assert!(sig >= 1);
    if Zero::is_zero(r) {
        return "0".to_string();
    }
    let negative = r.is_negative();
    let num = r.numer().abs();
    let den = r.denom().clone();
    let ten = BigInt::from(10u32);

    // exponent e with 10^e <= |r| < 10^(e+1)
    let mut e: i64 = num.to_string().len() as i64 - den.to_string().len() as i64;
    let ge_pow = |e: i64| -> bool {
        // |r| >= 10^e  <=>  num * 10^-e >= den
        if e >= 0 {
            num >= &den * num_traits::pow(ten.clone(), e as usize)
        } else {
            &num * num_traits::pow(ten.clone(), (-e) as usize) >= den
        }
    };
    while !ge_pow(e) {
        e -= 1;
    }
    while ge_pow(e + 1) {
        e += 1;
    }

    // scaled = |r| * 10^(sig-1-e), rounded half-up
    let shift = sig as i64 - 1 - e;
    let (sn, sd) = if shift >= 0 {
        (&num * num_traits::pow(ten.clone(), shift as usize), den.clone())
    } else {
        (num.clone(), &den * num_traits::pow(ten.clone(), (-shift) as usize))
    };
    let (q, rem) = sn.div_rem(&sd);
    let mut digits_int = q;
    if &rem * 2 >= sd {
        digits_int += 1;
    }
    let mut digits = digits_int.to_string();
    if digits.len() > sig {
        // rounding carried into a new leading digit
        digits.pop();
        e += 1;
    }

    let mut out = String::new();
    if negative {
        out.push('-');
    }
    if e >= 0 {
        let int_len = (e + 1) as usize;
        if digits.len() <= int_len {
            out.push_str(&digits);
            out.extend(std::iter::repeat_n('0', int_len - digits.len()));
        } else {
            out.push_str(&digits[..int_len]);
            let frac = digits[int_len..].trim_end_matches('0');
            if !frac.is_empty() {
                out.push('.');
                out.push_str(frac);
            }
        }
    } else {
        out.push_str("0.");
        out.extend(std::iter::repeat_n('0', (-e - 1) as usize));
        out.push_str(digits.trim_end_matches('0'));
    }
    out
}

/// Extended non-negative ratio: a finite value or the distinguished top level
/// `+inf` produced by `w > 0, q = 0`.
#[derive(Clone, Debug, PartialEq)]
pub enum Level<S> {
    Finite(S),
    Infinite,
}

impl<S: Scalar> Level<S> {
    pub fn finite(&self) -> Option<&S> {
        match self {
            Level::Finite(v) => Some(v),
            Level::Infinite => None,
        }
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, Level::Infinite)
    }

    pub fn same_level(&self, other: &Self) -> bool {
        match (self, other) {
            (Level::Infinite, Level::Infinite) => true,
            (Level::Finite(a), Level::Finite(b)) => a.same_level(b),
            _ => false,
        }
    }

    pub fn total_cmp(&self, other: &Self) -> Ordering {
        match (self, other) {
            (Level::Infinite, Level::Infinite) => Ordering::Equal,
            (Level::Infinite, _) => Ordering::Greater,
            (_, Level::Infinite) => Ordering::Less,
            (Level::Finite(a), Level::Finite(b)) => a.total_cmp(b),
        }
    }

    /// `self * factor` for a finite non-negative factor; `inf * 0` is taken
    /// as `inf` (the ratio convention never produces that product).
    pub fn scale(&self, factor: &S) -> Self {
        match self {
            Level::Finite(v) => Level::Finite(v.clone() * factor.clone()),
            Level::Infinite => Level::Infinite,
        }
    }

    pub fn render(&self, sig: usize) -> String {
        match self {
            Level::Finite(v) => v.to_prob().render(sig),
            Level::Infinite => "inf".to_string(),
        }
    }
}

impl<S: Scalar> PartialOrd for Level<S> {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.total_cmp(other))
    }
}

/// Parses a probability written as a decimal (`0.25`, `1e-3`) or a fraction
/// (`1/4`). Decimals are converted exactly. Returns the value and whether it
/// was written as a fraction.
pub fn parse_rational(text: &str) -> Option<(Rational, bool)> {
    let text = text.trim();
    if let Some((a, b)) = text.split_once('/') {
        let a: BigInt = a.trim().parse().ok()?;
        let b: BigInt = b.trim().parse().ok()?;
        if b.is_zero() {
            return None;
        }
        return Some((Rational::new(a, b), true));
    }
    let (mantissa, exp) = match text.find(['e', 'E']) {
        Some(i) => (&text[..i], text[i + 1..].parse::<i64>().ok()?),
        None => (text, 0),
    };
    let (neg, mantissa) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = mantissa.split_once('.').unwrap_or((mantissa, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return None;
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{int_part}{frac_part}");
    let mut value = Rational::from_integer(digits.parse::<BigInt>().ok()?);
    let scale = exp - frac_part.len() as i64;
    let ten = BigInt::from(10u32);
    if scale >= 0 {
        value *= Rational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        value /= Rational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    if neg {
        value = -value;
    }
    Some((value, false))
}

/// Exact binomial coefficient.
pub fn binomial(n: u64, k: u64) -> BigInt {
    if k > n {
        return BigInt::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigInt::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64) -> Rational {
        Rational::new(a.into(), b.into())
    }

    #[test]
    fn renders_exact_decimals() {
        assert_eq!(render_rational(&q(5, 32), 15), "0.15625");
        assert_eq!(render_rational(&q(21, 256), 15), "0.08203125");
        assert_eq!(render_rational(&q(1, 3), 15), "0.333333333333333");
        assert_eq!(render_rational(&q(2, 3), 15), "0.666666666666667");
        assert_eq!(render_rational(&q(-7, 4), 15), "-1.75");
        assert_eq!(render_rational(&q(1234, 1), 2), "1200");
        assert_eq!(render_rational(&q(999_999, 1_000_000), 3), "1");
        assert_eq!(render_rational(&q(1, 1_000_000), 15), "0.000001");
        assert_eq!(render_f64(0.234375, 15), "0.234375");
    }

    #[test]
    fn parses_decimal_and_fraction() {
        assert_eq!(parse_rational("0.25"), Some((q(1, 4), false)));
        assert_eq!(parse_rational("1/4"), Some((q(1, 4), true)));
        assert_eq!(parse_rational("2.5e-1"), Some((q(1, 4), false)));
        assert_eq!(parse_rational("-3"), Some((q(-3, 1), false)));
        assert_eq!(parse_rational(".5"), Some((q(1, 2), false)));
        assert!(parse_rational("1/0").is_none());
        assert!(parse_rational("abc").is_none());
    }

    #[test]
    fn float_sum_is_compensated() {
        let values = std::iter::repeat_n(0.1f64, 10).chain([1e16, -1e16]);
        assert_eq!(<f64 as Scalar>::total(values), 1.0);
    }

    #[test]
    fn power_zero_to_zero_is_one() {
        assert_eq!(<Rational as Scalar>::zero().powi(0), <Rational as Scalar>::one());
        assert_eq!(q(1, 3).powi(3), q(1, 27));
    }

    #[test]
    fn levels_order_with_infinity_on_top() {
        let a: Level<Rational> = Level::Finite(q(5, 1));
        assert!(Level::Infinite > a);
        assert!(Level::Finite(q(1, 2)) < a);
        assert!(Level::<f64>::Finite(1.0).same_level(&Level::Finite(1.0 + 1e-12)));
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(7, 3), BigInt::from(35));
        assert_eq!(binomial(3, 5), BigInt::zero());
        assert_eq!(binomial(30, 15), BigInt::from(155_117_520u64));
    }
}
