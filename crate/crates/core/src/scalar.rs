//! Numeric modes for probability tables.
//!
//! Geometry and certificates run on [`Rational`]; quantum simulation produces
//! `f64`. Conversions between the two are always explicit.

use std::fmt::Debug;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Exact arbitrary-precision rational.
pub type Rational = BigRational;

/// Default denominator bound used when rationalizing floating-point data.
pub const DEFAULT_DENOMINATOR_BOUND: u64 = 1_000_000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum NumericMode {
    Double,
    Rational,
}

/// Field elements a probability table can hold.
pub trait Scalar:
    Clone + Debug + PartialOrd + num::Num + Signed + Send + Sync + 'static
{
    const MODE: NumericMode;

    /// Slack allowed on normalization, positivity and non-signaling checks.
    fn tolerance() -> Self;

    /// Weights below this are treated as impossible conditioning events.
    fn conditioning_threshold() -> Self;

    fn to_f64(&self) -> f64;

    fn from_rational(q: &Rational) -> Self;

    fn from_usize(n: usize) -> Self;

    /// Canonical text form: `p/q` for rationals, shortest round-trip for doubles.
    fn to_text(&self) -> String;

    fn parse_text(s: &str) -> Result<Self>;
}

impl Scalar for f64 {
    const MODE: NumericMode = NumericMode::Double;

    fn tolerance() -> Self {
        1e-9
    }

    fn conditioning_threshold() -> Self {
        1e-12
    }

    fn to_f64(&self) -> f64 {
        *self
    }

    fn from_rational(q: &Rational) -> Self {
        rational_to_f64(q)
    }

    fn from_usize(n: usize) -> Self {
        n as f64
    }

    fn to_text(&self) -> String {
        format!("{self:?}")
    }

    fn parse_text(s: &str) -> Result<Self> {
        s.trim()
            .parse()
            .map_err(|_| Error::Parse(format!("not a number: {s:?}")))
    }
}

impl Scalar for Rational {
    const MODE: NumericMode = NumericMode::Rational;

    fn tolerance() -> Self {
        Rational::zero()
    }

    fn conditioning_threshold() -> Self {
        Rational::zero()
    }

    fn to_f64(&self) -> f64 {
        rational_to_f64(self)
    }

    fn from_rational(q: &Rational) -> Self {
        q.clone()
    }

    fn from_usize(n: usize) -> Self {
        Rational::from_integer(BigInt::from(n))
    }

    fn to_text(&self) -> String {
        self.to_string()
    }

    fn parse_text(s: &str) -> Result<Self> {
        parse_rational(s)
    }
}

pub fn rational_to_f64(q: &Rational) -> f64 {
    match (q.numer().to_f64(), q.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => {
            // Huge numerator or denominator: scale down before dividing.
            let shift = q.numer().bits().max(q.denom().bits()).saturating_sub(1000);
            let n = (q.numer() >> shift).to_f64().unwrap_or(0.0);
            let d = (q.denom() >> shift).to_f64().unwrap_or(1.0);
            n / d
        }
    }
}

/// Parses `p`, `p/q`, or a finite decimal such as `-0.25`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let s = s.trim();
    let err = || Error::Parse(format!("not a rational: {s:?}"));
    if let Some((p, q)) = s.split_once('/') {
        let p: BigInt = p.trim().parse().map_err(|_| err())?;
        let q: BigInt = q.trim().parse().map_err(|_| err())?;
        if q.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(p, q));
    }
    if let Some((int, frac)) = s.split_once('.') {
        let negative = int.starts_with('-');
        let digits = format!("{}{}", int.trim_start_matches(['-', '+']), frac);
        let mantissa: BigInt = digits.parse().map_err(|_| err())?;
        let scale = num::pow(BigInt::from(10), frac.len());
        let q = Rational::new(mantissa, scale);
        return Ok(if negative { -q } else { q });
    }
    let p: BigInt = s.parse().map_err(|_| err())?;
    Ok(Rational::from_integer(p))
}

/// Best rational approximation of `x` with denominator at most `max_den`
/// (continued-fraction convergents plus the best semiconvergent).
pub fn rationalize(x: f64, max_den: u64) -> Rational {
    assert!(x.is_finite(), "cannot rationalize {x}");
    assert!(max_den >= 1);
    let exact = Rational::from_float(x).expect("finite float");
    let max_den = BigInt::from(max_den);
    if exact.denom() <= &max_den {
        return exact;
    }
    let (mut p0, mut q0, mut p1, mut q1) = (
        BigInt::zero(),
        BigInt::one(),
        BigInt::one(),
        BigInt::zero(),
    );
    let mut n = exact.numer().clone();
    let mut d = exact.denom().clone();
    loop {
        let a = num::Integer::div_floor(&n, &d);
        let q2 = &q0 + &a * &q1;
        if q2 > max_den {
            break;
        }
        let p2 = &p0 + &a * &p1;
        p0 = std::mem::replace(&mut p1, p2);
        q0 = std::mem::replace(&mut q1, q2);
        let r = &n - &a * &d;
        n = std::mem::replace(&mut d, r);
        if d.is_zero() {
            break;
        }
    }
    let k = num::Integer::div_floor(&(&max_den - &q0), &q1);
    let bound1 = Rational::new(&p0 + &k * &p1, &q0 + &k * &q1);
    let bound2 = Rational::new(p1, q1);
    if (&bound2 - &exact).abs() <= (&bound1 - &exact).abs() {
        bound2
    } else {
        bound1
    }
}

pub fn rat(n: i64, d: i64) -> Rational {
    Rational::new(BigInt::from(n), BigInt::from(d))
}

pub fn int(n: i64) -> Rational {
    Rational::from_integer(BigInt::from(n))
}

/// Formats a double with six significant digits.
pub fn fmt_sig(x: f64) -> String {
    if x == 0.0 || !x.is_finite() {
        return format!("{x}");
    }
    let magnitude = x.abs().log10().floor() as i32;
    if !(-4..6).contains(&magnitude) {
        return format!("{x:.5e}");
    }
    let decimals = (5 - magnitude).max(0) as usize;
    format!("{x:.decimals$}")
}
