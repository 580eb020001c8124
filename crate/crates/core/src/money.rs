//! Exact rational money amounts.
//!
//! Every bid, payment, burn, and utility in this crate is an exact
//! arbitrary-precision rational. The collusion arguments we verify hinge on
//! strict inequalities and small separations, so floating point is never used;
//! equality of two amounts is structural equality of reduced fractions.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{Signed, Zero};
use serde::{de, Deserialize, Deserializer, Serialize, Serializer};
use std::cmp::Ordering;
use std::fmt;
use std::iter::Sum;
use std::ops::{Add, AddAssign, Div, Mul, Neg, Sub, SubAssign};
use std::str::FromStr;

use crate::error::ParseMoneyError;

/// A non-negative exact rational amount: a bid, payment, burn, or reserve.
///
/// Stored in lowest terms with a positive denominator, so `==` is exact.
/// Serialized as a `"num/den"` string.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct Money(BigRational);

/// A possibly-negative exact rational amount: a utility or utility difference.
#[derive(Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct SignedMoney(BigRational);

impl Money {
    pub fn zero() -> Self {
        Money(BigRational::zero())
    }

    pub fn is_zero(&self) -> bool {
        self.0.is_zero()
    }

    /// Exact rational from an integer numerator and denominator.
    ///
    /// Panics if `den` is zero or the value is negative.
    pub fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        let r = BigRational::new(BigInt::from(num), BigInt::from(den));
        assert!(!r.is_negative(), "Money must be non-negative");
        Money(r)
    }

    pub fn from_int(v: u64) -> Self {
        Money(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn as_rational(&self) -> &BigRational {
        &self.0
    }

    pub fn signed(&self) -> SignedMoney {
        SignedMoney(self.0.clone())
    }

    /// Exact midpoint of two amounts; used by bisection.
    pub fn midpoint(a: &Money, b: &Money) -> Money {
        Money((&a.0 + &b.0) / BigRational::from_integer(BigInt::from(2)))
    }

    pub fn min(a: Money, b: Money) -> Money {
        if a <= b {
            a
        } else {
            b
        }
    }

    pub fn max(a: Money, b: Money) -> Money {
        if a >= b {
            a
        } else {
            b
        }
    }

    /// Saturating subtraction: returns zero when `other > self`.
    pub fn saturating_sub(&self, other: &Money) -> Money {
        if other >= self {
            Money::zero()
        } else {
            Money(&self.0 - &other.0)
        }
    }
}

impl SignedMoney {
    pub fn zero() -> Self {
        SignedMoney(BigRational::zero())
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

    pub fn from_ratio(num: i64, den: i64) -> Self {
        assert!(den != 0, "zero denominator");
        SignedMoney(BigRational::new(BigInt::from(num), BigInt::from(den)))
    }

    pub fn from_int(v: i64) -> Self {
        SignedMoney(BigRational::from_integer(BigInt::from(v)))
    }

    pub fn as_rational(&self) -> &BigRational {
        &self.0
    }

    /// Converts to a non-negative amount, or `None` if negative.
    pub fn to_money(&self) -> Option<Money> {
        if self.0.is_negative() {
            None
        } else {
            Some(Money(self.0.clone()))
        }
    }

    pub fn abs(&self) -> SignedMoney {
        SignedMoney(self.0.abs())
    }
}

fn parse_rational(s: &str) -> Result<BigRational, ParseMoneyError> {
    let s = s.trim();
    if s.is_empty() {
        return Err(ParseMoneyError::new(s, "empty string"));
    }
    let (neg, body) = match s.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let r = if let Some((num, den)) = body.split_once('/') {
        let num = BigInt::from_str(num.trim())
            .map_err(|_| ParseMoneyError::new(s, "bad numerator"))?;
        let den = BigInt::from_str(den.trim())
            .map_err(|_| ParseMoneyError::new(s, "bad denominator"))?;
        if den.is_zero() {
            return Err(ParseMoneyError::new(s, "zero denominator"));
        }
        BigRational::new(num, den)
    } else if let Some((int_part, frac_part)) = body.split_once('.') {
        // Exact decimal: 6.5 -> 13/2. No rounding.
        if frac_part.is_empty() || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
            return Err(ParseMoneyError::new(s, "bad decimal"));
        }
        let int_part = if int_part.is_empty() { "0" } else { int_part };
        let whole = BigInt::from_str(int_part)
            .map_err(|_| ParseMoneyError::new(s, "bad integer part"))?;
        let frac = BigInt::from_str(frac_part)
            .map_err(|_| ParseMoneyError::new(s, "bad fractional part"))?;
        let scale = BigInt::from(10u32).pow(frac_part.len() as u32);
        BigRational::new(whole * &scale + frac, scale)
    } else {
        let int = BigInt::from_str(body)
            .map_err(|_| ParseMoneyError::new(s, "not an integer, fraction, or decimal"))?;
        BigRational::from_integer(int)
    };
    Ok(if neg { -r } else { r })
}

impl FromStr for Money {
    type Err = ParseMoneyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let r = parse_rational(s)?;
        if r.is_negative() {
            return Err(ParseMoneyError::new(s, "negative amount"));
        }
        Ok(Money(r))
    }
}

impl FromStr for SignedMoney {
    type Err = ParseMoneyError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        Ok(SignedMoney(parse_rational(s)?))
    }
}

fn fmt_rational(r: &BigRational, f: &mut fmt::Formatter<'_>) -> fmt::Result {
    write!(f, "{}/{}", r.numer(), r.denom())
}

impl fmt::Display for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_rational(&self.0, f)
    }
}

impl fmt::Display for SignedMoney {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_rational(&self.0, f)
    }
}

impl fmt::Debug for Money {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_rational(&self.0, f)
    }
}

impl fmt::Debug for SignedMoney {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        fmt_rational(&self.0, f)
    }
}

impl Serialize for Money {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for Money {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(de::Error::custom)
    }
}

impl Serialize for SignedMoney {
    fn serialize<S: Serializer>(&self, serializer: S) -> Result<S::Ok, S::Error> {
        serializer.serialize_str(&self.to_string())
    }
}

impl<'de> Deserialize<'de> for SignedMoney {
    fn deserialize<D: Deserializer<'de>>(deserializer: D) -> Result<Self, D::Error> {
        let s = String::deserialize(deserializer)?;
        s.parse().map_err(de::Error::custom)
    }
}

impl Add for &Money {
    type Output = Money;
    fn add(self, rhs: &Money) -> Money {
        Money(&self.0 + &rhs.0)
    }
}

impl AddAssign<&Money> for Money {
    fn add_assign(&mut self, rhs: &Money) {
        self.0 += &rhs.0;
    }
}

/// Money difference may be negative, so it lands in `SignedMoney`.
impl Sub for &Money {
    type Output = SignedMoney;
    fn sub(self, rhs: &Money) -> SignedMoney {
        SignedMoney(&self.0 - &rhs.0)
    }
}

impl Mul<&Money> for &Money {
    type Output = Money;
    fn mul(self, rhs: &Money) -> Money {
        Money(&self.0 * &rhs.0)
    }
}

impl Add for &SignedMoney {
    type Output = SignedMoney;
    fn add(self, rhs: &SignedMoney) -> SignedMoney {
        SignedMoney(&self.0 + &rhs.0)
    }
}

impl AddAssign<&SignedMoney> for SignedMoney {
    fn add_assign(&mut self, rhs: &SignedMoney) {
        self.0 += &rhs.0;
    }
}

impl Sub for &SignedMoney {
    type Output = SignedMoney;
    fn sub(self, rhs: &SignedMoney) -> SignedMoney {
        SignedMoney(&self.0 - &rhs.0)
    }
}

impl SubAssign<&SignedMoney> for SignedMoney {
    fn sub_assign(&mut self, rhs: &SignedMoney) {
        self.0 -= &rhs.0;
    }
}

impl Neg for &SignedMoney {
    type Output = SignedMoney;
    fn neg(self) -> SignedMoney {
        SignedMoney(-self.0.clone())
    }
}

impl Mul<&SignedMoney> for &SignedMoney {
    type Output = SignedMoney;
    fn mul(self, rhs: &SignedMoney) -> SignedMoney {
        SignedMoney(&self.0 * &rhs.0)
    }
}

impl Div<&SignedMoney> for &SignedMoney {
    type Output = SignedMoney;
    fn div(self, rhs: &SignedMoney) -> SignedMoney {
        assert!(!rhs.0.is_zero(), "division by zero");
        SignedMoney(&self.0 / &rhs.0)
    }
}

impl Sum for SignedMoney {
    fn sum<I: Iterator<Item = SignedMoney>>(iter: I) -> Self {
        let mut acc = SignedMoney::zero();
        for x in iter {
            acc += &x;
        }
        acc
    }
}

impl PartialOrd<Money> for SignedMoney {
    fn partial_cmp(&self, other: &Money) -> Option<Ordering> {
        self.0.partial_cmp(&other.0)
    }
}

impl PartialEq<Money> for SignedMoney {
    fn eq(&self, other: &Money) -> bool {
        self.0 == other.0
    }
}

impl From<Money> for SignedMoney {
    fn from(m: Money) -> Self {
        SignedMoney(m.0)
    }
}

/// Scales a signed amount by integer `k`; used by the small-collusion
/// separation bound `eps < delta / (2|C| + 1)`.
pub fn scale(m: &SignedMoney, k: i64) -> SignedMoney {
    SignedMoney(&m.0 * BigRational::from_integer(BigInt::from(k)))
}

/// Exact quotient of two signed amounts.
pub fn ratio(num: &SignedMoney, den: &SignedMoney) -> SignedMoney {
    assert!(!den.0.is_zero(), "division by zero");
    SignedMoney(&num.0 / &den.0)
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_fractions_decimals_and_integers() {
        assert_eq!("3/2".parse::<Money>().unwrap(), Money::from_ratio(3, 2));
        assert_eq!("6.5".parse::<Money>().unwrap(), Money::from_ratio(13, 2));
        assert_eq!("0.25".parse::<Money>().unwrap(), Money::from_ratio(1, 4));
        assert_eq!("7".parse::<Money>().unwrap(), Money::from_int(7));
        assert_eq!(
            "-11/2".parse::<SignedMoney>().unwrap(),
            SignedMoney::from_ratio(-11, 2)
        );
        assert!("-1".parse::<Money>().is_err());
        assert!("1/0".parse::<Money>().is_err());
        assert!("".parse::<Money>().is_err());
        assert!("1.2.3".parse::<Money>().is_err());
    }

    #[test]
    fn display_is_canonical() {
        assert_eq!(Money::from_ratio(6, 4).to_string(), "3/2");
        assert_eq!(Money::zero().to_string(), "0/1");
        assert_eq!(SignedMoney::from_ratio(-4, 8).to_string(), "-1/2");
    }

    #[test]
    fn serde_round_trip() {
        let m = Money::from_ratio(13, 2);
        let json = serde_json::to_string(&m).unwrap();
        assert_eq!(json, "\"13/2\"");
        let back: Money = serde_json::from_str(&json).unwrap();
        assert_eq!(back, m);
    }

    fn arb_money() -> impl Strategy<Value = Money> {
        (0i64..2000, 1i64..60).prop_map(|(n, d)| Money::from_ratio(n, d))
    }

    proptest! {
        #[test]
        fn add_then_subtract_is_identity(a in arb_money(), b in arb_money()) {
            let sum = &a + &b;
            let diff = &sum - &b;
            prop_assert_eq!(diff.to_money().unwrap(), a);
        }

        #[test]
        fn parse_display_round_trip(a in arb_money()) {
            let s = a.to_string();
            let back: Money = s.parse().unwrap();
            prop_assert_eq!(back, a);
        }
    }
}
