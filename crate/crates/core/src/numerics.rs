//! Dual scalar backend: exact rationals and binary floats behind one type,
//! plus the three-valued comparison every checker reports through.
//!
//! Arithmetic between two rationals stays rational. Anything that mixes the
//! two backends, or takes a root that is not a perfect square, falls back to
//! `f64`. Comparisons between two rationals are exact and never `Marginal`.

use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{FromPrimitive, One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use crate::error::{Error, Result};

/// Largest |k| accepted by [`Scalar::pow_half_k`]; 2^16 is already a very
/// large exact exponent.
pub const MAX_HALVING_DEPTH: i32 = 16;

#[derive(Clone, Debug, PartialEq)]
pub enum Scalar {
    Rat(BigRational),
    F64(f64),
}

impl Scalar {
    pub fn int(v: i64) -> Self {
        Scalar::Rat(BigRational::from_integer(BigInt::from(v)))
    }

    /// `numer / denom` in lowest terms. Panics if `denom == 0`.
    pub fn ratio(numer: i64, denom: i64) -> Self {
        Scalar::Rat(BigRational::new(BigInt::from(numer), BigInt::from(denom)))
    }

    pub fn float(v: f64) -> Self {
        Scalar::F64(v)
    }

    pub fn zero() -> Self {
        Scalar::Rat(BigRational::zero())
    }

    pub fn one() -> Self {
        Scalar::Rat(BigRational::one())
    }

    pub fn is_exact(&self) -> bool {
        matches!(self, Scalar::Rat(_))
    }

    pub fn as_rational(&self) -> Option<&BigRational> {
        match self {
            Scalar::Rat(r) => Some(r),
            Scalar::F64(_) => None,
        }
    }

    pub fn to_f64(&self) -> f64 {
        match self {
            Scalar::Rat(r) => r.to_f64().unwrap_or(f64::NAN),
            Scalar::F64(v) => *v,
        }
    }

    /// Converts to the float backend (no-op for floats).
    pub fn to_float(&self) -> Scalar {
        Scalar::F64(self.to_f64())
    }

    pub fn is_zero(&self) -> bool {
        match self {
            Scalar::Rat(r) => r.is_zero(),
            Scalar::F64(v) => *v == 0.0,
        }
    }

    pub fn is_nan(&self) -> bool {
        matches!(self, Scalar::F64(v) if v.is_nan())
    }

    /// Sign relative to zero; `None` for NaN.
    pub fn sign(&self) -> Option<Ordering> {
        match self {
            Scalar::Rat(r) => Some(r.cmp(&BigRational::zero())),
            Scalar::F64(v) => v.partial_cmp(&0.0),
        }
    }

    /// Exact when both operands are rational, float otherwise.
    pub fn compare(&self, other: &Scalar) -> Option<Ordering> {
        match (self, other) {
            (Scalar::Rat(a), Scalar::Rat(b)) => Some(a.cmp(b)),
            _ => self.to_f64().partial_cmp(&other.to_f64()),
        }
    }

    pub fn abs(&self) -> Scalar {
        match self {
            Scalar::Rat(r) => Scalar::Rat(r.abs()),
            Scalar::F64(v) => Scalar::F64(v.abs()),
        }
    }

    pub fn min(&self, other: &Scalar) -> Scalar {
        match self.compare(other) {
            Some(Ordering::Greater) => other.clone(),
            _ => self.clone(),
        }
    }

    pub fn max(&self, other: &Scalar) -> Scalar {
        match self.compare(other) {
            Some(Ordering::Less) => other.clone(),
            _ => self.clone(),
        }
    }

    pub fn square(&self) -> Scalar {
        self * self
    }

    pub fn try_div(&self, rhs: &Scalar) -> Result<Scalar> {
        match (self, rhs) {
            (Scalar::Rat(a), Scalar::Rat(b)) => {
                if b.is_zero() {
                    Err(Error::DivisionByZero)
                } else {
                    Ok(Scalar::Rat(a / b))
                }
            }
            _ => {
                let d = rhs.to_f64();
                if d == 0.0 {
                    Err(Error::DivisionByZero)
                } else {
                    Ok(Scalar::F64(self.to_f64() / d))
                }
            }
        }
    }

    /// Integer power, exact on rationals.
    pub fn powi(&self, exp: u32) -> Scalar {
        match self {
            Scalar::Rat(r) => Scalar::Rat(num_traits::pow(r.clone(), exp as usize)),
            Scalar::F64(v) => Scalar::F64(v.powi(exp as i32)),
        }
    }

    /// Square root using the default absolute tolerance for clamping tiny
    /// negative floats.
    pub fn sqrt(&self) -> Result<Scalar> {
        self.sqrt_with(TolerancePolicy::DEFAULT_ABS_TOL)
    }

    /// Exact when the argument is the square of a rational. Floats in
    /// `[-abs_tol, 0)` are clamped to zero.
    pub fn sqrt_with(&self, abs_tol: f64) -> Result<Scalar> {
        match self {
            Scalar::Rat(r) => {
                if r.is_negative() {
                    return Err(Error::Domain(format!(
                        "square root of negative value {r} (length of a vector outside the cone)"
                    )));
                }
                match exact_rational_sqrt(r) {
                    Some(root) => Ok(Scalar::Rat(root)),
                    None => Ok(Scalar::F64(self.to_f64().sqrt())),
                }
            }
            Scalar::F64(v) => {
                if v.is_nan() {
                    Err(Error::NaN("sqrt"))
                } else if *v < -abs_tol {
                    Err(Error::Domain(format!(
                        "square root of negative value {v} (length of a vector outside the cone)"
                    )))
                } else {
                    Ok(Scalar::F64(v.max(0.0).sqrt()))
                }
            }
        }
    }

    /// `x^(1/2^k)`: `k` square roots for `k > 0`, the integer power `2^|k|`
    /// for `k < 0`, identity for `k == 0`.
    pub fn pow_half_k(&self, k: i32) -> Result<Scalar> {
        if k.abs() > MAX_HALVING_DEPTH {
            return Err(Error::Parameter(format!(
                "|k| = {} exceeds the supported depth {MAX_HALVING_DEPTH}",
                k.abs()
            )));
        }
        match k.cmp(&0) {
            Ordering::Equal => Ok(self.clone()),
            Ordering::Greater => {
                if self.sign() == Some(Ordering::Less) {
                    return Err(Error::Domain(format!(
                        "fractional power 1/2^{k} of negative value {self}"
                    )));
                }
                let mut acc = self.clone();
                for _ in 0..k {
                    acc = acc.sqrt()?;
                }
                Ok(acc)
            }
            Ordering::Less => Ok(self.powi(1u32 << (-k) as u32)),
        }
    }
}

fn exact_rational_sqrt(r: &BigRational) -> Option<BigRational> {
    let n = r.numer();
    let d = r.denom();
    let rn = n.sqrt();
    if &(&rn * &rn) != n {
        return None;
    }
    let rd = d.sqrt();
    if &(&rd * &rd) != d {
        return None;
    }
    Some(BigRational::new(rn, rd))
}

/// `x^(1/2^k)` as a free function; see [`Scalar::pow_half_k`].
pub fn pow_half_k(x: &Scalar, k: i32) -> Result<Scalar> {
    x.pow_half_k(k)
}

/// Square root with exact results on rational perfect squares.
pub fn sqrt_scalar(x: &Scalar) -> Result<Scalar> {
    x.sqrt()
}

impl From<i64> for Scalar {
    fn from(v: i64) -> Self {
        Scalar::int(v)
    }
}

impl From<f64> for Scalar {
    fn from(v: f64) -> Self {
        Scalar::F64(v)
    }
}

impl From<BigRational> for Scalar {
    fn from(v: BigRational) -> Self {
        Scalar::Rat(v)
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Scalar::Rat(r) => write!(f, "{r}"),
            Scalar::F64(v) => write!(f, "{v}"),
        }
    }
}

impl FromStr for Scalar {
    type Err = Error;

    /// `"p/q"` or an integer literal parse as exact rationals; any other
    /// decimal literal parses as a float.
    fn from_str(s: &str) -> Result<Scalar> {
        let s = s.trim();
        if let Some((p, q)) = s.split_once('/') {
            let p: BigInt = p
                .trim()
                .parse()
                .map_err(|_| Error::Parameter(format!("bad rational numerator in {s:?}")))?;
            let q: BigInt = q
                .trim()
                .parse()
                .map_err(|_| Error::Parameter(format!("bad rational denominator in {s:?}")))?;
            if q.is_zero() {
                return Err(Error::DivisionByZero);
            }
            return Ok(Scalar::Rat(BigRational::new(p, q)));
        }
        if let Ok(i) = s.parse::<BigInt>() {
            return Ok(Scalar::Rat(BigRational::from_integer(i)));
        }
        s.parse::<f64>()
            .map(Scalar::F64)
            .map_err(|_| Error::Parameter(format!("not a scalar literal: {s:?}")))
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> std::result::Result<S::Ok, S::Error> {
        use serde::ser::SerializeMap;
        let mut map = serializer.serialize_map(Some(1))?;
        match self {
            Scalar::Rat(r) => map.serialize_entry("rat", &r.to_string())?,
            Scalar::F64(v) => map.serialize_entry("f64", v)?,
        }
        map.end()
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum ScalarRepr {
    Rat { rat: String },
    Float { f64: f64 },
    Literal(String),
    Number(serde_json::Number),
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> std::result::Result<Self, D::Error> {
        use serde::de::Error as _;
        match ScalarRepr::deserialize(deserializer)? {
            ScalarRepr::Rat { rat } => match rat.parse::<Scalar>() {
                Ok(s @ Scalar::Rat(_)) => Ok(s),
                _ => Err(D::Error::custom(format!("not a rational literal: {rat:?}"))),
            },
            ScalarRepr::Float { f64 } => Ok(Scalar::F64(f64)),
            ScalarRepr::Literal(s) => s.parse().map_err(D::Error::custom),
            ScalarRepr::Number(n) => {
                if let Some(i) = n.as_i64() {
                    Ok(Scalar::int(i))
                } else if let Some(u) = n.as_u64() {
                    Ok(Scalar::Rat(BigRational::from_integer(BigInt::from(u))))
                } else {
                    n.as_f64()
                        .map(Scalar::F64)
                        .ok_or_else(|| D::Error::custom("unrepresentable number"))
                }
            }
        }
    }
}

/// `(numerator, denominator)` with a positive denominator.
type Frac = (i128, i128);

/// Parts of `r` when both fit in an `i64`.
fn small_parts(r: &BigRational) -> Option<Frac> {
    Some((r.numer().to_i64()? as i128, r.denom().to_i64()? as i128))
}

fn gcd_u128(mut a: u128, mut b: u128) -> u128 {
    while b != 0 {
        (a, b) = (b, a % b);
    }
    a
}

/// Reduced rational from an `i128` fraction with positive denominator.
fn reduced(n: i128, d: i128) -> BigRational {
    let g = gcd_u128(n.unsigned_abs(), d as u128) as i128;
    BigRational::new_raw(BigInt::from(n / g), BigInt::from(d / g))
}

// Small-operand paths; num-bigint's generic gcd dominates otherwise.
fn small_add(x: Frac, y: Frac) -> Option<Frac> {
    Some((x.0.checked_mul(y.1)?.checked_add(y.0.checked_mul(x.1)?)?, x.1.checked_mul(y.1)?))
}

fn small_sub(x: Frac, y: Frac) -> Option<Frac> {
    small_add(x, (-y.0, y.1))
}

fn small_mul(x: Frac, y: Frac) -> Option<Frac> {
    Some((x.0.checked_mul(y.0)?, x.1.checked_mul(y.1)?))
}

fn combine(
    a: &Scalar,
    b: &Scalar,
    small: fn(Frac, Frac) -> Option<Frac>,
    exact: impl Fn(&BigRational, &BigRational) -> BigRational,
    float: impl Fn(f64, f64) -> f64,
) -> Scalar {
    match (a, b) {
        (Scalar::Rat(x), Scalar::Rat(y)) => {
            if let Some((n, d)) = small_parts(x).zip(small_parts(y)).and_then(|(x, y)| small(x, y)) {
                return Scalar::Rat(reduced(n, d));
            }
            Scalar::Rat(exact(x, y))
        }
        _ => Scalar::F64(float(a.to_f64(), b.to_f64())),
    }
}

macro_rules! scalar_binop {
    ($trait:ident, $method:ident, $op:tt, $small:ident) => {
        impl<'a, 'b> $trait<&'b Scalar> for &'a Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &'b Scalar) -> Scalar {
                combine(self, rhs, $small, |x, y| x $op y, |x, y| x $op y)
            }
        }
        impl $trait<Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                (&self).$method(&rhs)
            }
        }
        impl<'b> $trait<&'b Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &'b Scalar) -> Scalar {
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

scalar_binop!(Add, add, +, small_add);
scalar_binop!(Sub, sub, -, small_sub);
scalar_binop!(Mul, mul, *, small_mul);

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        match self {
            Scalar::Rat(r) => Scalar::Rat(-r),
            Scalar::F64(v) => Scalar::F64(-v),
        }
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        -self.clone()
    }
}

impl Sum for Scalar {
    fn sum<I: Iterator<Item = Scalar>>(iter: I) -> Scalar {
        iter.fold(Scalar::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Scalar> for Scalar {
    fn sum<I: Iterator<Item = &'a Scalar>>(iter: I) -> Scalar {
        iter.fold(Scalar::zero(), |acc, x| acc + x)
    }
}

/// Absolute and relative tolerances for float comparisons.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TolerancePolicy {
    abs_tol: f64,
    rel_tol: f64,
}

impl TolerancePolicy {
    pub const DEFAULT_ABS_TOL: f64 = 1e-9;
    pub const DEFAULT_REL_TOL: f64 = 1e-12;

    pub fn new(abs_tol: f64, rel_tol: f64) -> Result<Self> {
        for (name, v) in [("abs_tol", abs_tol), ("rel_tol", rel_tol)] {
            if !v.is_finite() || v < 0.0 {
                return Err(Error::Tolerance(format!("{name} must be finite and >= 0, got {v}")));
            }
        }
        Ok(TolerancePolicy { abs_tol, rel_tol })
    }

    pub fn abs_tol(&self) -> f64 {
        self.abs_tol
    }

    pub fn rel_tol(&self) -> f64 {
        self.rel_tol
    }

    /// `max(abs_tol, rel_tol * max(|x|, |y|))`
    pub fn tol_eff(&self, x: f64, y: f64) -> f64 {
        self.abs_tol.max(self.rel_tol * x.abs().max(y.abs()))
    }
}

impl Default for TolerancePolicy {
    fn default() -> Self {
        TolerancePolicy {
            abs_tol: Self::DEFAULT_ABS_TOL,
            rel_tol: Self::DEFAULT_REL_TOL,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Verdict {
    Holds,
    Fails,
    Marginal,
}

impl Verdict {
    /// Holds or Marginal.
    pub fn not_failed(self) -> bool {
        self != Verdict::Fails
    }
}

/// Three-valued `x >= y`.
pub fn cmp_ge(x: &Scalar, y: &Scalar, policy: &TolerancePolicy) -> Result<Verdict> {
    if let (Scalar::Rat(a), Scalar::Rat(b)) = (x, y) {
        return Ok(if a >= b { Verdict::Holds } else { Verdict::Fails });
    }
    let (xf, yf) = (x.to_f64(), y.to_f64());
    if xf.is_nan() || yf.is_nan() {
        return Err(Error::NaN("cmp_ge"));
    }
    let tol = policy.tol_eff(xf, yf);
    let diff = xf - yf;
    Ok(if diff >= tol {
        Verdict::Holds
    } else if diff <= -tol {
        Verdict::Fails
    } else {
        Verdict::Marginal
    })
}

/// Three-valued `x == y`: exact on rationals, tolerance band on floats.
pub fn cmp_eq(x: &Scalar, y: &Scalar, policy: &TolerancePolicy) -> Result<Verdict> {
    if let (Scalar::Rat(a), Scalar::Rat(b)) = (x, y) {
        return Ok(if a == b { Verdict::Holds } else { Verdict::Fails });
    }
    let (xf, yf) = (x.to_f64(), y.to_f64());
    if xf.is_nan() || yf.is_nan() {
        return Err(Error::NaN("cmp_eq"));
    }
    Ok(if (xf - yf).abs() < policy.tol_eff(xf, yf) {
        Verdict::Holds
    } else {
        Verdict::Fails
    })
}

pub fn rational(numer: i64, denom: i64) -> BigRational {
    BigRational::new(BigInt::from(numer), BigInt::from(denom))
}

/// Exact rational image of a finite float.
pub fn rational_from_f64(v: f64) -> Option<BigRational> {
    BigRational::from_f64(v)
}

// Small vector helpers over Scalar slices. Callers check lengths.

pub fn dot(x: &[Scalar], y: &[Scalar]) -> Scalar {
    x.iter().zip(y).map(|(a, b)| a * b).sum()
}

pub fn vec_add(x: &[Scalar], y: &[Scalar]) -> Vec<Scalar> {
    x.iter().zip(y).map(|(a, b)| a + b).collect()
}

pub fn vec_sub(x: &[Scalar], y: &[Scalar]) -> Vec<Scalar> {
    x.iter().zip(y).map(|(a, b)| a - b).collect()
}

pub fn vec_scale(s: &Scalar, x: &[Scalar]) -> Vec<Scalar> {
    x.iter().map(|a| s * a).collect()
}

pub fn norm_sq(x: &[Scalar]) -> Scalar {
    dot(x, x)
}

/// Euclidean norm, exact when the squared norm is a rational square.
pub fn norm(x: &[Scalar]) -> Scalar {
    // norm_sq is a sum of squares, so sqrt cannot hit the domain error
    norm_sq(x).sqrt().unwrap_or(Scalar::F64(f64::NAN))
}

pub fn check_len(expected: usize, actual: usize) -> Result<()> {
    if expected == actual {
        Ok(())
    } else {
        Err(Error::LengthMismatch { expected, actual })
    }
}
