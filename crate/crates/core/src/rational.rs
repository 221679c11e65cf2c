//! Exact rational scalars.
//!
//! Every distance, compaction value and edge weight in the crate is a
//! [`Rational`]. Values are kept in lowest terms with a positive
//! denominator, so structural equality is numeric equality.

use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use thiserror::Error;

/// Arbitrary-precision exact rational number.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Rational(BigRational);

/// Failure to read a rational literal.
#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum RationalParseError {
    #[error("empty numeric literal")]
    Empty,
    #[error("invalid numeric literal `{0}`")]
    Invalid(String),
    #[error("zero denominator in `{0}`")]
    ZeroDenominator(String),
    #[error("non-finite value `{0}` is not accepted")]
    NonFinite(String),
}

impl Rational {
    pub fn new(numer: impl Into<BigInt>, denom: impl Into<BigInt>) -> Self {
        let denom = denom.into();
        assert!(!denom.is_zero(), "zero denominator");
        Rational(BigRational::new(numer.into(), denom))
    }

    pub fn from_integer(value: impl Into<BigInt>) -> Self {
        Rational(BigRational::from_integer(value.into()))
    }

    pub fn zero() -> Self {
        Rational(BigRational::zero())
    }

    pub fn one() -> Self {
        Rational(BigRational::one())
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

    pub fn numer(&self) -> &BigInt {
        self.0.numer()
    }

    pub fn denom(&self) -> &BigInt {
        self.0.denom()
    }

    pub fn half(&self) -> Self {
        Rational(&self.0 / BigInt::from(2))
    }

    /// Divides by a nonzero integer.
    pub fn div_int(&self, divisor: impl Into<BigInt>) -> Self {
        let divisor = divisor.into();
        assert!(!divisor.is_zero(), "division by zero");
        Rational(&self.0 / divisor)
    }

    pub fn min_of<'a>(values: impl IntoIterator<Item = &'a Rational>) -> Option<Rational> {
        values.into_iter().min().cloned()
    }

    /// Lossy conversion for display/plotting; never used by the algorithms.
    pub fn to_f64(&self) -> f64 {
        use num_traits::ToPrimitive;
        self.0.to_f64().unwrap_or(f64::NAN)
    }

    pub fn floor(&self) -> BigInt {
        self.0.floor().to_integer()
    }

    pub fn ceil(&self) -> BigInt {
        self.0.ceil().to_integer()
    }
}

impl fmt::Display for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.0.denom().is_one() {
            write!(f, "{}", self.0.numer())
        } else {
            write!(f, "{}/{}", self.0.numer(), self.0.denom())
        }
    }
}

impl fmt::Debug for Rational {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt::Display::fmt(self, f)
    }
}

impl FromStr for Rational {
    type Err = RationalParseError;

    /// Accepts `p/q`, integers and finite decimals (`1.5`, `-0.25`, `.5`).
    /// Decimals are converted exactly: `1.5` becomes `3/2`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let text = s.trim();
        if text.is_empty() {
            return Err(RationalParseError::Empty);
        }
        let lowered = text.to_ascii_lowercase();
        if lowered.contains("inf") || lowered.contains("nan") {
            return Err(RationalParseError::NonFinite(text.to_string()));
        }
        if let Some((num, den)) = text.split_once('/') {
            let numer = parse_integer(num.trim()).ok_or_else(|| invalid(text))?;
            let denom = parse_integer(den.trim()).ok_or_else(|| invalid(text))?;
            if denom.is_zero() {
                return Err(RationalParseError::ZeroDenominator(text.to_string()));
            }
            return Ok(Rational::new(numer, denom));
        }
        if let Some((int_part, frac_part)) = text.split_once('.') {
            let (negative, int_digits) = match int_part.strip_prefix('-') {
                Some(rest) => (true, rest),
                None => (false, int_part.strip_prefix('+').unwrap_or(int_part)),
            };
            let digits_ok = |d: &str| d.bytes().all(|b| b.is_ascii_digit());
            if !digits_ok(int_digits)
                || !digits_ok(frac_part)
                || (int_digits.is_empty() && frac_part.is_empty())
            {
                return Err(invalid(text));
            }
            let whole: String = format!("{int_digits}{frac_part}");
            let mut numer: BigInt = if whole.is_empty() {
                BigInt::zero()
            } else {
                whole.parse().map_err(|_| invalid(text))?
            };
            if negative {
                numer = -numer;
            }
            let denom = num_traits::pow(BigInt::from(10), frac_part.len());
            return Ok(Rational::new(numer, denom));
        }
        parse_integer(text)
            .map(Rational::from_integer)
            .ok_or_else(|| invalid(text))
    }
}

fn invalid(text: &str) -> RationalParseError {
    RationalParseError::Invalid(text.to_string())
}

fn parse_integer(text: &str) -> Option<BigInt> {
    let digits = text.strip_prefix(['-', '+']).unwrap_or(text);
    if digits.is_empty() || !digits.bytes().all(|b| b.is_ascii_digit()) {
        return None;
    }
    text.parse().ok()
}

impl From<i64> for Rational {
    fn from(value: i64) -> Self {
        Rational::from_integer(value)
    }
}

impl From<i32> for Rational {
    fn from(value: i32) -> Self {
        Rational::from_integer(value)
    }
}

impl From<u64> for Rational {
    fn from(value: u64) -> Self {
        Rational::from_integer(value)
    }
}

macro_rules! forward_binop {
    ($trait:ident, $method:ident) => {
        impl $trait<Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: Rational) -> Rational {
                Rational(self.0.$method(rhs.0))
            }
        }
        impl<'a> $trait<&'a Rational> for Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational(self.0.$method(&rhs.0))
            }
        }
        impl<'a> $trait<&'a Rational> for &'a Rational {
            type Output = Rational;
            fn $method(self, rhs: &'a Rational) -> Rational {
                Rational((&self.0).$method(&rhs.0))
            }
        }
    };
}

forward_binop!(Add, add);
forward_binop!(Sub, sub);
forward_binop!(Mul, mul);

impl AddAssign<&Rational> for Rational {
    fn add_assign(&mut self, rhs: &Rational) {
        self.0 += &rhs.0;
    }
}

impl SubAssign<&Rational> for Rational {
    fn sub_assign(&mut self, rhs: &Rational) {
        self.0 -= &rhs.0;
    }
}

impl Neg for Rational {
    type Output = Rational;
    fn neg(self) -> Rational {
        Rational(-self.0)
    }
}

impl Sum for Rational {
    fn sum<I: Iterator<Item = Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl<'a> Sum<&'a Rational> for Rational {
    fn sum<I: Iterator<Item = &'a Rational>>(iter: I) -> Self {
        iter.fold(Rational::zero(), |acc, x| acc + x)
    }
}

impl Serialize for Rational {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.collect_str(self)
    }
}

impl<'de> Deserialize<'de> for Rational {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        struct Visitor;
        impl de::Visitor<'_> for Visitor {
            type Value = Rational;

            fn expecting(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
                f.write_str("a rational as a string \"p/q\" or an integer")
            }

            fn visit_str<E: de::Error>(self, v: &str) -> Result<Rational, E> {
                v.parse().map_err(E::custom)
            }

            fn visit_i64<E: de::Error>(self, v: i64) -> Result<Rational, E> {
                Ok(Rational::from(v))
            }

            fn visit_u64<E: de::Error>(self, v: u64) -> Result<Rational, E> {
                Ok(Rational::from(v))
            }
        }
        deserializer.deserialize_any(Visitor)
    }
}

/// Shorthand used heavily in tests and examples: `q(3, 2)` is `3/2`.
pub fn q(numer: i64, denom: i64) -> Rational {
    Rational::new(numer, denom)
}
