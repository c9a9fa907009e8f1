//! Real scalars with an exact-rational fast path.
//!
//! A [`Scalar`] is either an exact [`BigRational`] or an `f64`. Arithmetic
//! between two exact values stays exact; as soon as a float enters an
//! operation the result is a float. Square roots stay exact when both the
//! numerator and denominator are perfect squares.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num::bigint::BigInt;
use num::rational::BigRational;
use num::{One, Signed, ToPrimitive, Zero};
use serde::de::{self, Visitor};
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Absolute tolerance used for float comparisons unless overridden.
pub const DEFAULT_TOL: f64 = 1e-9;

#[derive(Clone, Debug)]
pub enum Scalar {
    Exact(BigRational),
    Float(f64),
}

#[derive(Debug, Error, PartialEq, Eq)]
#[error("cannot parse scalar from {0:?}")]
pub struct ParseScalarError(pub String);

impl Scalar {
    pub fn zero() -> Self {
        Scalar::Exact(BigRational::zero())
    }

    pub fn one() -> Self {
        Scalar::Exact(BigRational::one())
    }

    pub fn int(n: i64) -> Self {
        Scalar::Exact(BigRational::from_integer(BigInt::from(n)))
    }

    /// Exact `num / den`. Panics on a zero denominator.
    pub fn ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        Scalar::Exact(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn float(x: f64) -> Self {
        Scalar::Float(x)
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Exact(_))
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Exact(q) => q.to_f64().unwrap_or(f64::NAN),
            Scalar::Float(x) => *x,
        }
    }

    /// The same value on the float path.
    pub fn to_float(&self) -> Self {
        Scalar::Float(self.to_f64())
    }

    /// Exact test for exact values, `|x| <= tol` for floats.
    pub fn is_zero_tol(&self, tol: f64) -> bool {
        match self {
            Scalar::Exact(q) => q.is_zero(),
            Scalar::Float(x) => x.abs() <= tol,
        }
    }

    pub fn is_zero(&self) -> bool {
        self.is_zero_tol(DEFAULT_TOL)
    }

    pub fn approx_eq(&self, other: &Scalar, tol: f64) -> bool {
        (self - other).is_zero_tol(tol)
    }

    /// Strictly positive; floats must exceed `tol`.
    pub fn is_positive_tol(&self, tol: f64) -> bool {
        match self {
            Scalar::Exact(q) => q.is_positive(),
            Scalar::Float(x) => *x > tol,
        }
    }

    pub fn is_positive(&self) -> bool {
        self.is_positive_tol(DEFAULT_TOL)
    }

    pub fn abs(&self) -> Self {
        match self {
            Scalar::Exact(q) => Scalar::Exact(q.abs()),
            Scalar::Float(x) => Scalar::Float(x.abs()),
        }
    }

    pub fn square(&self) -> Self {
        self * self
    }

    pub fn powi(&self, n: u32) -> Self {
        let mut acc = Scalar::one();
        for _ in 0..n {
            acc = &acc * self;
        }
        acc
    }

    /// Multiplicative inverse, `None` for an exact zero.
    pub fn recip(&self) -> Option<Self> {
        match self {
            Scalar::Exact(q) if q.is_zero() => None,
            Scalar::Exact(q) => Some(Scalar::Exact(q.recip())),
            Scalar::Float(x) => Some(Scalar::Float(1.0 / x)),
        }
    }

    /// Square root of a non-negative value, exact when possible.
    pub fn sqrt(&self) -> Option<Self> {
        match self {
            Scalar::Exact(q) => {
                if q.is_negative() {
                    return None;
                }
                let (n, d) = (q.numer(), q.denom());
                let (rn, rd) = (n.sqrt(), d.sqrt());
                if &(&rn * &rn) == n && &(&rd * &rd) == d {
                    Some(Scalar::Exact(BigRational::new(rn, rd)))
                } else {
                    Some(Scalar::Float(self.to_f64().sqrt()))
                }
            }
            Scalar::Float(x) if *x < 0.0 => None,
            Scalar::Float(x) => Some(Scalar::Float(x.sqrt())),
        }
    }

    /// -1, 0 or 1, with floats inside `tol` counted as 0.
    pub fn signum_tol(&self, tol: f64) -> i32 {
        if self.is_zero_tol(tol) {
            0
        } else if self.to_f64() > 0.0 {
            1
        } else {
            -1
        }
    }

    fn bin(
        a: &Scalar,
        b: &Scalar,
        exact: impl Fn(&BigRational, &BigRational) -> BigRational,
        float: impl Fn(f64, f64) -> f64,
    ) -> Scalar {
        match (a, b) {
            (Scalar::Exact(x), Scalar::Exact(y)) => Scalar::Exact(exact(x, y)),
            _ => Scalar::Float(float(a.to_f64(), b.to_f64())),
        }
    }
}

impl Default for Scalar {
    fn default() -> Self {
        Scalar::zero()
    }
}

impl From<i64> for Scalar {
    fn from(n: i64) -> Self {
        Scalar::int(n)
    }
}

impl From<i32> for Scalar {
    fn from(n: i32) -> Self {
        Scalar::int(n as i64)
    }
}

impl From<f64> for Scalar {
    fn from(x: f64) -> Self {
        Scalar::Float(x)
    }
}

impl From<BigRational> for Scalar {
    fn from(q: BigRational) -> Self {
        Scalar::Exact(q)
    }
}

impl PartialEq for Scalar {
    fn eq(&self, other: &Self) -> bool {
        match (self, other) {
            (Scalar::Exact(x), Scalar::Exact(y)) => x == y,
            _ => self.to_f64() == other.to_f64(),
        }
    }
}

impl PartialOrd for Scalar {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        match (self, other) {
            (Scalar::Exact(x), Scalar::Exact(y)) => Some(x.cmp(y)),
            _ => self.to_f64().partial_cmp(&other.to_f64()),
        }
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident, $exact:expr, $float:expr) => {
        impl<'a, 'b> $trait<&'b Scalar> for &'a Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &'b Scalar) -> Scalar {
                Scalar::bin(self, rhs, $exact, $float)
            }
        }
        impl $trait<Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                (&self).$method(&rhs)
            }
        }
        impl<'a> $trait<&'a Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &'a Scalar) -> Scalar {
                (&self).$method(rhs)
            }
        }
        impl<'a> $trait<Scalar> for &'a Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                self.$method(&rhs)
            }
        }
    };
}

forward_binop!(Add, add, |x, y| x + y, |x, y| x + y);
forward_binop!(Sub, sub, |x, y| x - y, |x, y| x - y);
forward_binop!(Mul, mul, |x, y| x * y, |x, y| x * y);

// Division by an exact zero panics, like integer division.
forward_binop!(
    Div,
    div,
    |x, y| {
        assert!(!y.is_zero(), "exact division by zero");
        x / y
    },
    |x, y| x / y
);

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Exact(q) => Scalar::Exact(-q),
            Scalar::Float(x) => Scalar::Float(-x),
        }
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        self.clone().neg()
    }
}

impl AddAssign<&Scalar> for Scalar {
    fn add_assign(&mut self, rhs: &Scalar) {
        *self = &*self + rhs;
    }
}

impl SubAssign<&Scalar> for Scalar {
    fn sub_assign(&mut self, rhs: &Scalar) {
        *self = &*self - rhs;
    }
}

impl Sum for Scalar {
    fn sum<I: Iterator<Item = Scalar>>(iter: I) -> Scalar {
        iter.fold(Scalar::zero(), |acc, x| acc + x)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Exact(q) if q.is_integer() => write!(f, "{}", q.numer()),
            Scalar::Exact(q) => write!(f, "{}/{}", q.numer(), q.denom()),
            Scalar::Float(x) => write!(f, "{x}"),
        }
    }
}

fn parse_exact(s: &str) -> Option<BigRational> {
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n = parse_exact(n)?;
        let d = parse_exact(d)?;
        if d.is_zero() {
            return None;
        }
        return Some(n / d);
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    if body.is_empty() || !body.chars().all(|c| c.is_ascii_digit() || c == '.') {
        return None;
    }
    let q = match body.split_once('.') {
        Some((int, frac)) => {
            if frac.contains('.') || (int.is_empty() && frac.is_empty()) {
                return None;
            }
            let digits = format!("{int}{frac}");
            let n = BigInt::from_str(&digits).ok()?;
            let d = num::pow(BigInt::from(10), frac.len());
            BigRational::new(n, d)
        }
        None => BigRational::from_integer(BigInt::from_str(body).ok()?),
    };
    Some(if neg { -q } else { q })
}

fn parse_factor(s: &str) -> Option<Scalar> {
    let s = s.trim();
    if let Some(inner) = s.strip_prefix("sqrt(").and_then(|r| r.strip_suffix(')')) {
        return parse_expr(inner)?.sqrt();
    }
    if let Some(q) = parse_exact(s) {
        return Some(Scalar::Exact(q));
    }
    let x: f64 = s.parse().ok()?;
    x.is_finite().then_some(Scalar::Float(x))
}

// Grammar: ['-'] factor (('*' | '/') factor)*, factor = number | p/q | sqrt(expr).
fn parse_expr(s: &str) -> Option<Scalar> {
    let s = s.trim();
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) if rest.trim_start().starts_with("sqrt") => (true, rest),
        _ => (false, s),
    };
    // Exact fractions and decimals go through parse_exact directly.
    if !body.contains("sqrt") && !body.contains('*') {
        let v = parse_factor(body)?;
        return Some(if neg { -v } else { v });
    }
    let mut acc: Option<Scalar> = None;
    let mut op = '*';
    let mut depth = 0usize;
    let mut start = 0usize;
    let bytes: Vec<char> = body.chars().collect();
    let mut tokens: Vec<(char, String)> = Vec::new();
    for (i, &ch) in bytes.iter().enumerate() {
        match ch {
            '(' => depth += 1,
            ')' => depth = depth.checked_sub(1)?,
            '*' | '/' if depth == 0 => {
                tokens.push((op, bytes[start..i].iter().collect()));
                op = ch;
                start = i + 1;
            }
            _ => {}
        }
    }
    tokens.push((op, bytes[start..].iter().collect()));
    for (op, tok) in tokens {
        let v = parse_factor(&tok)?;
        acc = Some(match (acc, op) {
            (None, _) => v,
            (Some(a), '*') => a * v,
            (Some(a), _) => {
                if v.is_zero_tol(0.0) {
                    return None;
                }
                a / v
            }
        });
    }
    let v = acc?;
    Some(if neg { -v } else { v })
}

impl FromStr for Scalar {
    type Err = ParseScalarError;

    /// Accepts integers, decimals and `p/q` (exact), `sqrt(..)` products
    /// such as `3*sqrt(5)/5`, and anything `f64` parses (float).
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        parse_expr(s).ok_or_else(|| ParseScalarError(s.to_string()))
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        match self {
            Scalar::Exact(q) => match (q.is_integer(), q.to_i64()) {
                (true, Some(n)) => serializer.serialize_i64(n),
                _ => serializer.serialize_str(&self.to_string()),
            },
            Scalar::Float(x) if x.is_finite() => serializer.serialize_f64(*x),
            Scalar::Float(x) => serializer.serialize_str(&x.to_string()),
        }
    }
}

struct ScalarVisitor;

impl<'de> Visitor<'de> for ScalarVisitor {
    type Value = Scalar;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        f.write_str("a number or a string such as \"1/3\" or \"sqrt(2)\"")
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Scalar, E> {
        Ok(Scalar::int(v))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Scalar, E> {
        Ok(Scalar::Exact(BigRational::from_integer(BigInt::from(v))))
    }

    fn visit_f64<E: de::Error>(self, v: f64) -> Result<Scalar, E> {
        Ok(Scalar::Float(v))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<Scalar, E> {
        match v {
            "NaN" => Ok(Scalar::Float(f64::NAN)),
            "inf" => Ok(Scalar::Float(f64::INFINITY)),
            "-inf" => Ok(Scalar::Float(f64::NEG_INFINITY)),
            _ => v.parse().map_err(E::custom),
        }
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        deserializer.deserialize_any(ScalarVisitor)
    }
}
