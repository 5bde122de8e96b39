//! Exact rational scalars and their extension by `+inf`.
//!
//! Every quantity in this crate (distances, function values, radii,
//! thresholds) is an exact rational. Ball membership is decided by
//! non-strict inequalities, so a rounding error could flip a tie;
//! there are no floating-point paths anywhere.

use std::cmp::Ordering;
use std::fmt;
use std::ops::{Add, Mul, Neg, Sub};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Error produced when parsing a rational or extended-rational literal.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ParseScalarError {
    #[error("invalid rational literal `{0}`")]
    Invalid(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
    #[error("negative denominator in `{0}`")]
    NegativeDenominator(String),
    #[error("minus infinity is not representable")]
    MinusInfinity,
}

/// Exact rational number, always normalized: positive denominator, gcd 1.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Scalar(BigRational);

impl Scalar {
    pub fn zero() -> Self {
        Scalar(BigRational::zero())
    }

    pub fn one() -> Self {
        Scalar(BigRational::one())
    }

    pub fn from_int(n: i64) -> Self {
        Scalar(BigRational::from_integer(BigInt::from(n)))
    }

    /// Builds `n/d` exactly. Panics if `d == 0`.
    pub fn ratio(n: i64, d: i64) -> Self {
        assert!(d != 0, "zero denominator");
        Scalar(BigRational::new(BigInt::from(n), BigInt::from(d)))
    }

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    pub fn is_positive(&self) -> bool {
        self.0.is_positive()
    }

    pub fn is_negative(&self) -> bool {
        self.0.is_negative()
    }

    pub fn abs(&self) -> Self {
        Scalar(self.0.abs())
    }

    /// Multiplicative inverse. Panics on zero.
    pub fn recip(&self) -> Self {
        assert!(!self.is_zero(), "reciprocal of zero");
        Scalar(self.0.recip())
    }
}

impl fmt::Display for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Scalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for Scalar {
    type Err = ParseScalarError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let invalid = || ParseScalarError::Invalid(s.to_owned());
        match s.split_once('/') {
            None => {
                let n = BigInt::from_str(s).map_err(|_| invalid())?;
                Ok(Scalar(BigRational::from_integer(n)))
            }
            Some((p, q)) => {
                let p = BigInt::from_str(p).map_err(|_| invalid())?;
                let q = BigInt::from_str(q).map_err(|_| invalid())?;
                if q.is_zero() {
                    Err(ParseScalarError::ZeroDenominator(s.to_owned()))
                } else if q.is_negative() {
                    Err(ParseScalarError::NegativeDenominator(s.to_owned()))
                } else {
                    Ok(Scalar(BigRational::new(p, q)))
                }
            }
        }
    }
}

macro_rules! scalar_binop {
    ($trait:ident, $method:ident) => {
        impl $trait for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                Scalar((self.0).$method(rhs.0))
            }
        }
        impl $trait<&Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                Scalar((&self.0).$method(&rhs.0))
            }
        }
        impl $trait<&Scalar> for Scalar {
            type Output = Scalar;
            fn $method(self, rhs: &Scalar) -> Scalar {
                Scalar((self.0).$method(&rhs.0))
            }
        }
        impl $trait<Scalar> for &Scalar {
            type Output = Scalar;
            fn $method(self, rhs: Scalar) -> Scalar {
                Scalar((&self.0).$method(rhs.0))
            }
        }
    };
}

scalar_binop!(Add, add);
scalar_binop!(Sub, sub);
scalar_binop!(Mul, mul);

impl Neg for Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar(-self.0)
    }
}

impl Neg for &Scalar {
    type Output = Scalar;
    fn neg(self) -> Scalar {
        Scalar(-&self.0)
    }
}

impl Serialize for Scalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Scalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        deserializer.deserialize_any(ScalarVisitor)
    }
}

struct ScalarVisitor;

impl de::Visitor<'_> for ScalarVisitor {
    type Value = Scalar;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "an integer or a rational string \"p/q\"")
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<Scalar, E> {
        Ok(Scalar::from_int(v))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<Scalar, E> {
        Ok(Scalar(BigRational::from_integer(BigInt::from(v))))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<Scalar, E> {
        v.parse().map_err(|e| E::custom(format!("{e}")))
    }
}

/// A rational extended with `+inf`. Minus infinity is unrepresentable:
/// the codomain of every function here is `(-inf, +inf]`.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum ExtScalar {
    Finite(Scalar),
    Infinity,
}

impl ExtScalar {
    pub fn zero() -> Self {
        ExtScalar::Finite(Scalar::zero())
    }

    pub fn from_int(n: i64) -> Self {
        ExtScalar::Finite(Scalar::from_int(n))
    }

    pub fn is_finite(&self) -> bool {
        matches!(self, ExtScalar::Finite(_))
    }

    pub fn is_infinite(&self) -> bool {
        matches!(self, ExtScalar::Infinity)
    }

    pub fn as_finite(&self) -> Option<&Scalar> {
        match self {
            ExtScalar::Finite(s) => Some(s),
            ExtScalar::Infinity => None,
        }
    }

    /// Scales by a strictly positive rational, keeping `+inf` fixed.
    pub fn scale_pos(&self, by: &Scalar) -> ExtScalar {
        assert!(by.is_positive(), "scale factor must be positive");
        match self {
            ExtScalar::Finite(s) => ExtScalar::Finite(s * by),
            ExtScalar::Infinity => ExtScalar::Infinity,
        }
    }

    pub fn is_zero(&self) -> bool {
        matches!(self, ExtScalar::Finite(s) if s.is_zero())
    }
}

impl From<Scalar> for ExtScalar {
    fn from(s: Scalar) -> Self {
        ExtScalar::Finite(s)
    }
}

impl Add<&ExtScalar> for &ExtScalar {
    type Output = ExtScalar;
    fn add(self, rhs: &ExtScalar) -> ExtScalar {
        match (self, rhs) {
            (ExtScalar::Finite(a), ExtScalar::Finite(b)) => ExtScalar::Finite(a + b),
            _ => ExtScalar::Infinity,
        }
    }
}

impl Add for ExtScalar {
    type Output = ExtScalar;
    fn add(self, rhs: ExtScalar) -> ExtScalar {
        &self + &rhs
    }
}

impl Add<&Scalar> for &ExtScalar {
    type Output = ExtScalar;
    fn add(self, rhs: &Scalar) -> ExtScalar {
        match self {
            ExtScalar::Finite(a) => ExtScalar::Finite(a + rhs),
            ExtScalar::Infinity => ExtScalar::Infinity,
        }
    }
}

impl fmt::Display for ExtScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            ExtScalar::Finite(s) => write!(f, "{s}"),
            ExtScalar::Infinity => write!(f, "inf"),
        }
    }
}

impl fmt::Debug for ExtScalar {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl FromStr for ExtScalar {
    type Err = ParseScalarError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "inf" => Ok(ExtScalar::Infinity),
            "-inf" => Err(ParseScalarError::MinusInfinity),
            other => other.parse::<Scalar>().map(ExtScalar::Finite),
        }
    }
}

impl Serialize for ExtScalar {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for ExtScalar {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        deserializer.deserialize_any(ExtScalarVisitor)
    }
}

struct ExtScalarVisitor;

impl de::Visitor<'_> for ExtScalarVisitor {
    type Value = ExtScalar;

    fn expecting(&self, f: &mut fmt::Formatter) -> fmt::Result {
        write!(f, "an integer, a rational string \"p/q\", or \"inf\"")
    }

    fn visit_i64<E: de::Error>(self, v: i64) -> Result<ExtScalar, E> {
        Ok(ExtScalar::from_int(v))
    }

    fn visit_u64<E: de::Error>(self, v: u64) -> Result<ExtScalar, E> {
        Ok(ExtScalar::Finite(Scalar(BigRational::from_integer(
            BigInt::from(v),
        ))))
    }

    fn visit_str<E: de::Error>(self, v: &str) -> Result<ExtScalar, E> {
        v.parse().map_err(|e| E::custom(format!("{e}")))
    }
}

/// Total order helper used by comparison property tests.
pub fn cmp_cross_multiplied(a: &Scalar, b: &Scalar) -> Ordering {
    // a = p/q, b = r/s with q,s > 0; a < b iff p*s < r*q.
    (a.numer() * b.denom()).cmp(&(b.numer() * a.denom()))
}
