//! Exact arithmetic in the quadratic field ℚ(√2).
//!
//! A [`Scalar`] is `rat + surd·√2` with both coefficients stored as reduced
//! big rationals. Every probability, interval endpoint and measure in the
//! crate is a `Scalar`, so comparisons and sums never round.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::{BigInt, Sign};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::ParseError;

/// An exact element of ℚ(√2).
#[derive(Clone, PartialEq, Eq, Hash, Default)]
pub struct Scalar {
    rat: BigRational,
    surd: BigRational,
}

impl Scalar {
    pub fn new(rat: BigRational, surd: BigRational) -> Self {
        Scalar { rat, surd }
    }

    pub fn zero() -> Self {
        Scalar::default()
    }

    pub fn one() -> Self {
        Scalar::from_rational(BigRational::one())
    }

    /// The number √2.
    pub fn sqrt2() -> Self {
        Scalar::new(BigRational::zero(), BigRational::one())
    }

    pub fn from_rational(rat: BigRational) -> Self {
        Scalar { rat, surd: BigRational::zero() }
    }

    pub fn from_integer(n: i64) -> Self {
        Scalar::from_rational(BigRational::from_integer(n.into()))
    }

    /// `num/den`. Panics if `den` is zero.
    pub fn frac(num: i64, den: i64) -> Self {
        Scalar::from_rational(BigRational::new(num.into(), den.into()))
    }

    /// `1 / 2^k`.
    pub fn dyadic(k: u32) -> Self {
        Scalar::from_rational(BigRational::new(BigInt::one(), BigInt::one() << k))
    }

    pub fn rat(&self) -> &BigRational {
        &self.rat
    }

    pub fn surd(&self) -> &BigRational {
        &self.surd
    }

    pub fn is_rational(&self) -> bool {
        self.surd.is_zero()
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        self.is_rational().then_some(&self.rat)
    }

    pub fn is_zero(&self) -> bool {
        self.rat.is_zero() && self.surd.is_zero()
    }

    /// Exact sign of `rat + surd·√2`.
    pub fn signum(&self) -> Ordering {
        let a = self.rat.numer().sign();
        let b = self.surd.numer().sign();
        match (a, b) {
            (Sign::NoSign, _) => sign_to_ordering(b),
            (_, Sign::NoSign) => sign_to_ordering(a),
            _ if a == b => sign_to_ordering(a),
            _ => {
                // Opposite signs: the term with the larger square wins.
                let rat_sq = &self.rat * &self.rat;
                let surd_sq = &self.surd * &self.surd * BigRational::from_integer(2.into());
                match rat_sq.cmp(&surd_sq) {
                    Ordering::Equal => Ordering::Equal,
                    Ordering::Greater => sign_to_ordering(a),
                    Ordering::Less => sign_to_ordering(b),
                }
            }
        }
    }

    pub fn is_positive(&self) -> bool {
        self.signum() == Ordering::Greater
    }

    pub fn is_negative(&self) -> bool {
        self.signum() == Ordering::Less
    }

    pub fn abs(&self) -> Scalar {
        if self.is_negative() {
            -self
        } else {
            self.clone()
        }
    }

    /// The Galois conjugate `rat − surd·√2`.
    pub fn conjugate(&self) -> Scalar {
        Scalar::new(self.rat.clone(), -&self.surd)
    }

    /// `rat² − 2·surd²`, the field norm. Zero only for zero.
    pub fn norm(&self) -> BigRational {
        &self.rat * &self.rat - &self.surd * &self.surd * BigRational::from_integer(2.into())
    }

    pub fn recip(&self) -> Option<Scalar> {
        if self.is_zero() {
            return None;
        }
        let n = self.norm();
        Some(Scalar::new(&self.rat / &n, -&self.surd / &n))
    }

    /// Largest integer not exceeding the value.
    pub fn floor(&self) -> BigInt {
        // floor(|s|·√2) = isqrt(floor(2·s²)), then fix up by one exact comparison.
        let two_s_sq = &self.surd * &self.surd * BigRational::from_integer(2.into());
        let root = two_s_sq.floor().to_integer().sqrt();
        let lower = if self.surd.is_negative() {
            // s√2 ∈ (−root−1, −root]
            -&root - BigInt::one()
        } else {
            root
        };
        // s√2 ∈ [lower, lower + 1] so value ∈ [rat + lower, rat + lower + 1].
        let base = (&self.rat + BigRational::from_integer(lower)).floor().to_integer();
        let mut candidate = base + BigInt::from(2);
        while Scalar::from_rational(BigRational::from_integer(candidate.clone())) > *self {
            candidate -= 1;
        }
        candidate
    }

    /// Smallest integer not below the value.
    pub fn ceil(&self) -> BigInt {
        -(-self).floor()
    }

    pub fn mul_rational(&self, r: &BigRational) -> Scalar {
        Scalar::new(&self.rat * r, &self.surd * r)
    }

    /// Nearest `f64` (accurate to the last bit or so; for display and
    /// floating-point functionals only).
    pub fn to_f64(&self) -> f64 {
        if self.is_rational() {
            return rational_to_f64(&self.rat);
        }
        // Scale by 2^80, floor exactly, then divide.
        let scaled = self.mul_rational(&BigRational::from_integer(BigInt::one() << 80u32));
        let f = scaled.floor();
        f.to_f64().unwrap_or(f64::NAN) / 2f64.powi(80)
    }

    /// Decimal rendering truncated toward −∞ to `digits` fractional digits.
    pub fn to_decimal(&self, digits: usize) -> String {
        let scale = BigInt::from(10u32).pow(digits as u32);
        let floored = self.mul_rational(&BigRational::from_integer(scale.clone())).floor();
        let negative = floored.is_negative();
        let (int_part, frac_part) = floored.abs().div_rem(&scale);
        let mut out = String::new();
        if negative {
            out.push('-');
        }
        out.push_str(&int_part.to_string());
        if digits > 0 {
            out.push('.');
            out.push_str(&format!("{:0>width$}", frac_part.to_string(), width = digits));
        }
        out
    }
}

fn sign_to_ordering(s: Sign) -> Ordering {
    match s {
        Sign::Minus => Ordering::Less,
        Sign::NoSign => Ordering::Equal,
        Sign::Plus => Ordering::Greater,
    }
}

pub(crate) fn rational_to_f64(r: &BigRational) -> f64 {
    match (r.numer().to_f64(), r.denom().to_f64()) {
        (Some(n), Some(d)) if n.is_finite() && d.is_finite() => n / d,
        _ => {
            let scaled = (r * BigRational::from_integer(BigInt::one() << 80u32)).floor();
            scaled.to_integer().to_f64().unwrap_or(f64::NAN) / 2f64.powi(80)
        }
    }
}

impl Ord for Scalar {
    fn cmp(&self, other: &Self) -> Ordering {
        if self.surd == other.surd {
            return self.rat.cmp(&other.rat);
        }
        (self - other).signum()
    }
}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Exact three-way comparison of two scalars.
pub fn scalar_compare(a: &Scalar, b: &Scalar) -> Ordering {
    a.cmp(b)
}

/// The unique `ν ≥ 0` with `ν/2^k < s ≤ (ν+1)/2^k`, i.e. `⌈s·2^k⌉ − 1`.
pub fn nu(s: &Scalar, k: u32) -> Result<BigInt, crate::error::Error> {
    if !s.is_positive() {
        return Err(crate::error::Error::NonPositiveMass(s.to_string()));
    }
    let scaled = s.mul_rational(&BigRational::from_integer(BigInt::one() << k));
    Ok(scaled.ceil() - BigInt::one())
}

impl From<BigRational> for Scalar {
    fn from(r: BigRational) -> Self {
        Scalar::from_rational(r)
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::from_integer(n)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $body:expr) => {
        impl $trait<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                let f: fn(&Scalar, &Scalar) -> Scalar = $body;
                f(self, rhs)
            }
        }
        impl $trait<Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                (&self).$method(&rhs)
            }
        }
        impl $trait<&Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                (&self).$method(rhs)
            }
        }
        impl $trait<Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                self.$method(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, |a, b| Scalar::new(&a.rat + &b.rat, &a.surd + &b.surd));
forward_binop!(Sub, sub, |a, b| Scalar::new(&a.rat - &b.rat, &a.surd - &b.surd));
forward_binop!(Mul, mul, |a, b| {
    let two = BigRational::from_integer(2.into());
    Scalar::new(
        &a.rat * &b.rat + &a.surd * &b.surd * two,
        &a.rat * &b.surd + &a.surd * &b.rat,
    )
});
forward_binop!(Div, div, |a, b| a * b.recip().expect("division by zero scalar"));

impl AddAssign<&Scalar> for Scalar {
    fn add_assign(&mut self, rhs: &Scalar) {
        self.rat += &rhs.rat;
        self.surd += &rhs.surd;
    }
}

impl SubAssign<&Scalar> for Scalar {
    fn sub_assign(&mut self, rhs: &Scalar) {
        self.rat -= &rhs.rat;
        self.surd -= &rhs.surd;
    }
}

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar::new(-self.rat, -self.surd)
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar::new(-&self.rat, -&self.surd)
    }
}

impl std::iter::Sum for Scalar {
    fn sum<I: Iterator<Item = Scalar>>(iter: I) -> Scalar {
        iter.fold(Scalar::zero(), |mut acc, x| {
            acc += &x;
            acc
        })
    }
}

impl<'a> std::iter::Sum<&'a Scalar> for Scalar {
    fn sum<I: Iterator<Item = &'a Scalar>>(iter: I) -> Scalar {
        iter.fold(Scalar::zero(), |mut acc, x| {
            acc += x;
            acc
        })
    }
}

/// `p/q` with the denominator omitted when it is one.
pub fn format_rational(r: &BigRational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Accepts `p`, `-p`, `p/q`.
pub fn parse_rational(s: &str) -> Result<BigRational, ParseError> {
    let bad = || ParseError::Rational(s.to_string());
    let (num, den) = match s.split_once('/') {
        Some((n, d)) => (n, d),
        None => (s, "1"),
    };
    let num: BigInt = num.parse().map_err(|_| bad())?;
    let den: BigInt = den.parse().map_err(|_| bad())?;
    if den.is_zero() {
        return Err(bad());
    }
    Ok(BigRational::new(num, den))
}

impl fmt::Display for Scalar {
    /// `p/q`, `p/q+r/s*sqrt2` or `p/q-r/s*sqrt2`.
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.surd.is_zero() {
            return f.write_str(&format_rational(&self.rat));
        }
        let sign = if self.surd.is_negative() { '-' } else { '+' };
        write!(
            f,
            "{}{}{}*sqrt2",
            format_rational(&self.rat),
            sign,
            format_rational(&self.surd.abs())
        )
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "Scalar({self})")
    }
}

impl FromStr for Scalar {
    type Err = ParseError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || ParseError::Scalar(s.to_string());
        let Some(body) = s.strip_suffix("*sqrt2") else {
            return Ok(Scalar::from_rational(parse_rational(s).map_err(|_| bad())?));
        };
        // The separator is the last '+' or '-' that does not start the string
        // and does not directly follow another sign ("1/2+-3/4*sqrt2").
        let bytes = body.as_bytes();
        let split = (1..bytes.len())
            .rev()
            .find(|&i| matches!(bytes[i], b'+' | b'-') && !matches!(bytes[i - 1], b'+' | b'-'))
            .ok_or_else(bad)?;
        let rat = parse_rational(&body[..split]).map_err(|_| bad())?;
        let surd_str = &body[split..];
        let surd_str = surd_str.strip_prefix('+').unwrap_or(surd_str);
        let surd = parse_rational(surd_str).map_err(|_| bad())?;
        Ok(Scalar::new(rat, surd))
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(serde::de::Error::custom)
    }
}

/// Serde adapter storing a [`BigRational`] as an exact `"p/q"` string.
pub mod rational_str {
    use super::*;

    pub fn serialize<S: Serializer>(r: &BigRational, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(&format_rational(r))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(deserializer: D) -> Result<BigRational, D::Error> {
        let s = String::deserialize(deserializer)?;
        parse_rational(&s).map_err(serde::de::Error::custom)
    }
}

/// Shorthand for building rationals in code and tests.
pub fn q(num: i64, den: i64) -> BigRational {
    BigRational::new(num.into(), den.into())
}
