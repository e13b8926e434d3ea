//! Scalar field abstraction: exact rationals or `f64` with an absolute tolerance.

use std::fmt;
use std::ops::{Add, Div, Mul, Neg, Sub};
use std::str::FromStr;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Q = BigRational;

/// Default absolute tolerance for float-mode residuals.
pub const FLOAT_TOL: f64 = 1e-9;
/// Pivot tolerance used by the float-mode Cholesky test.
pub const CHOLESKY_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize, Hash)]
#[serde(rename_all = "lowercase")]
pub enum Mode {
    Exact,
    Float,
}

impl fmt::Display for Mode {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Mode::Exact => "exact",
            Mode::Float => "float",
        })
    }
}

impl FromStr for Mode {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s.trim().to_ascii_lowercase().as_str() {
            "exact" => Ok(Mode::Exact),
            "float" => Ok(Mode::Float),
            other => Err(Error::Input(format!("mode: unknown value `{other}`"))),
        }
    }
}

/// Residual as it appears in reports.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum Residual {
    Exact { num: String, den: String },
    Float(f64),
}

impl Residual {
    pub fn zero(mode: Mode) -> Self {
        match mode {
            Mode::Exact => Residual::Exact {
                num: "0".into(),
                den: "1".into(),
            },
            Mode::Float => Residual::Float(0.0),
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Residual::Float(x) => *x,
            Residual::Exact { num, den } => {
                let n: f64 = num.parse().unwrap_or(f64::NAN);
                let d: f64 = den.parse().unwrap_or(f64::NAN);
                n / d
            }
        }
    }
}

impl fmt::Display for Residual {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Residual::Exact { num, den } if den == "1" => write!(f, "{num}"),
            Residual::Exact { num, den } => write!(f, "{num}/{den}"),
            Residual::Float(x) => write!(f, "{x:e}"),
        }
    }
}

pub trait Scalar:
    Clone
    + fmt::Debug
    + fmt::Display
    + PartialEq
    + PartialOrd
    + Zero
    + One
    + Neg<Output = Self>
    + Add<Output = Self>
    + Sub<Output = Self>
    + Mul<Output = Self>
    + Div<Output = Self>
    + Send
    + Sync
    + 'static
{
    const MODE: Mode;

    fn from_i64(n: i64) -> Self;
    fn ratio(n: i64, d: i64) -> Self;
    fn from_q(q: &Q) -> Self;
    fn to_f64(&self) -> f64;
    fn abs(&self) -> Self;
    /// Square root. Exact mode only succeeds on perfect rational squares.
    fn sqrt(&self) -> Option<Self>;
    /// Zero test: exact in exact mode, `|x| <= tol` in float mode.
    fn near_zero(&self, tol: f64) -> bool;
    fn residual(&self) -> Residual;
    fn mul_ref(&self, o: &Self) -> Self;
    /// `self += a * b`.
    fn add_mul(&mut self, a: &Self, b: &Self);
    fn add_ref(&mut self, o: &Self);
    fn sub_ref(&mut self, o: &Self);

    fn is_positive(&self) -> bool {
        *self > Self::zero()
    }
    fn half() -> Self {
        Self::ratio(1, 2)
    }
    fn pow_i(&self, k: u32) -> Self {
        let mut r = Self::one();
        for _ in 0..k {
            r = r.mul_ref(self);
        }
        r
    }
    fn sq(&self) -> Self {
        self.mul_ref(self)
    }
}

impl Scalar for Q {
    const MODE: Mode = Mode::Exact;

    fn from_i64(n: i64) -> Self {
        Q::from_integer(BigInt::from(n))
    }
    fn ratio(n: i64, d: i64) -> Self {
        Q::new(BigInt::from(n), BigInt::from(d))
    }
    fn from_q(q: &Q) -> Self {
        q.clone()
    }
    fn to_f64(&self) -> f64 {
        ToPrimitive::to_f64(self).unwrap_or(f64::NAN)
    }
    fn abs(&self) -> Self {
        Signed::abs(self)
    }
    fn sqrt(&self) -> Option<Self> {
        if self.is_negative() {
            return None;
        }
        let n = self.numer();
        let d = self.denom();
        let rn = n.sqrt();
        let rd = d.sqrt();
        if &(&rn * &rn) == n && &(&rd * &rd) == d {
            Some(Q::new(rn, rd))
        } else {
            None
        }
    }
    fn near_zero(&self, _tol: f64) -> bool {
        self.is_zero()
    }
    fn residual(&self) -> Residual {
        Residual::Exact {
            num: self.numer().to_string(),
            den: self.denom().to_string(),
        }
    }
    fn mul_ref(&self, o: &Self) -> Self {
        self * o
    }
    fn add_mul(&mut self, a: &Self, b: &Self) {
        if a.is_zero() || b.is_zero() {
            return;
        }
        *self += a * b;
    }
    fn add_ref(&mut self, o: &Self) {
        if !o.is_zero() {
            *self += o;
        }
    }
    fn sub_ref(&mut self, o: &Self) {
        if !o.is_zero() {
            *self -= o;
        }
    }
}

impl Scalar for f64 {
    const MODE: Mode = Mode::Float;

    fn from_i64(n: i64) -> Self {
        n as f64
    }
    fn ratio(n: i64, d: i64) -> Self {
        n as f64 / d as f64
    }
    fn from_q(q: &Q) -> Self {
        ToPrimitive::to_f64(q).unwrap_or(f64::NAN)
    }
    fn to_f64(&self) -> f64 {
        *self
    }
    fn abs(&self) -> Self {
        f64::abs(*self)
    }
    fn sqrt(&self) -> Option<Self> {
        if *self < 0.0 {
            None
        } else {
            Some(f64::sqrt(*self))
        }
    }
    fn near_zero(&self, tol: f64) -> bool {
        f64::abs(*self) <= tol
    }
    fn residual(&self) -> Residual {
        Residual::Float(*self)
    }
    fn mul_ref(&self, o: &Self) -> Self {
        self * o
    }
    fn add_mul(&mut self, a: &Self, b: &Self) {
        *self += a * b;
    }
    fn add_ref(&mut self, o: &Self) {
        *self += o;
    }
    fn sub_ref(&mut self, o: &Self) {
        *self -= o;
    }
}

/// Parses `"3/5"`, `"-2"`, `"0.125"` or `"1e-3"` into an exact rational.
pub fn parse_rational(s: &str) -> Result<Q> {
    let t = s.trim();
    let bad = || Error::Input(format!("not a number: `{s}`"));
    if t.is_empty() {
        return Err(bad());
    }
    if let Some((n, d)) = t.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::Input(format!("zero denominator in `{s}`")));
        }
        return Ok(Q::new(n, d));
    }
    let (mant, exp) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], t[i + 1..].parse::<i32>().map_err(|_| bad())?),
        None => (t, 0),
    };
    let (neg, mant) = match mant.strip_prefix('-') {
        Some(m) => (true, m),
        None => (false, mant.strip_prefix('+').unwrap_or(mant)),
    };
    let (ip, fp) = mant.split_once('.').unwrap_or((mant, ""));
    if ip.is_empty() && fp.is_empty() {
        return Err(bad());
    }
    if !ip.chars().chain(fp.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let digits: BigInt = format!("0{ip}{fp}").parse().map_err(|_| bad())?;
    let scale = exp - fp.len() as i32;
    let ten = BigInt::from(10);
    let mut q = Q::from_integer(digits);
    if scale >= 0 {
        q *= Q::from_integer(num::pow(ten, scale as usize));
    } else {
        q /= Q::from_integer(num::pow(ten, (-scale) as usize));
    }
    Ok(if neg { -q } else { q })
}

/// Canonical text form: `num/den`, or `num` for integers.
pub fn canonical<S: Scalar>(x: &S) -> String {
    match x.residual() {
        Residual::Exact { num, den } if den == "1" => num,
        Residual::Exact { num, den } => format!("{num}/{den}"),
        Residual::Float(v) => format!("{v}"),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rational("3/5").unwrap(), Q::ratio(3, 5));
        assert_eq!(parse_rational("-0.125").unwrap(), Q::ratio(-1, 8));
        assert_eq!(parse_rational("2").unwrap(), Q::from_i64(2));
        assert_eq!(parse_rational("25e-2").unwrap(), Q::ratio(1, 4));
        assert!(parse_rational("x").is_err());
        assert!(parse_rational("1/0").is_err());
    }

    #[test]
    fn exact_sqrt_only_for_squares() {
        assert_eq!(Q::ratio(9, 4).sqrt(), Some(Q::ratio(3, 2)));
        assert_eq!(Q::ratio(2, 1).sqrt(), None);
        assert_eq!(<f64 as Scalar>::sqrt(&4.0), Some(2.0));
    }

    #[test]
    fn canonical_forms() {
        assert_eq!(canonical(&Q::ratio(-6, 4)), "-3/2");
        assert_eq!(canonical(&Q::from_i64(7)), "7");
    }
}
