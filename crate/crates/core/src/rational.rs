//! Exact rational helpers shared by every module.
//!
//! All certificate-grade arithmetic goes through [`Rational`] (an arbitrary
//! precision `BigRational`). Euler's number only ever enters through the two
//! directed bounds [`e_upper`] and [`e_lower`]; each call site says which one
//! it needs.

use std::fmt;
use std::str::FromStr;

use num_bigint::{BigInt, BigUint, Sign};
use num_integer::Integer;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type Rational = num_rational::BigRational;

/// `num/den` from machine integers.
pub fn rat(num: i64, den: i64) -> Rational {
    Rational::new(BigInt::from(num), BigInt::from(den))
}

pub fn int(v: i64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn from_u64(v: u64) -> Rational {
    Rational::from_integer(BigInt::from(v))
}

pub fn from_biguint(v: BigUint) -> Rational {
    Rational::from_integer(BigInt::from_biguint(Sign::Plus, v))
}

/// 2.71828182845905 > e.
pub fn e_upper() -> Rational {
    rat(271_828_182_845_905, 100_000_000_000_000)
}

/// 2.71828182845904 < e.
pub fn e_lower() -> Rational {
    rat(271_828_182_845_904, 100_000_000_000_000)
}

pub fn pow(base: &Rational, exp: u64) -> Rational {
    num_traits::pow(base.clone(), exp as usize)
}

/// Exact `2^k` for any integer `k`.
pub fn pow2(k: i64) -> Rational {
    let big = BigInt::one() << k.unsigned_abs();
    if k >= 0 {
        Rational::from_integer(big)
    } else {
        Rational::new(BigInt::one(), big)
    }
}

/// `[p^0, p^1, ..., p^n]`.
pub fn powers(p: &Rational, n: usize) -> Vec<Rational> {
    let mut out = Vec::with_capacity(n + 1);
    let mut acc = Rational::one();
    for _ in 0..=n {
        out.push(acc.clone());
        acc = &acc * p;
    }
    out
}

/// Smallest integer `a` with `r <= 2^a`; requires `r > 0`.
pub fn ceil_log2(r: &Rational) -> i64 {
    assert!(r.is_positive(), "ceil_log2 of a non-positive rational");
    let num_bits = r.numer().bits() as i64;
    let den_bits = r.denom().bits() as i64;
    // 2^(nb-1) <= num < 2^nb and likewise for den, so r lies in (2^(d-1), 2^(d+1)).
    let mut a = num_bits - den_bits - 1;
    while r > &pow2(a) {
        a += 1;
    }
    while a > i64::MIN && r <= &pow2(a - 1) {
        a -= 1;
    }
    a
}

pub fn ceil(r: &Rational) -> BigInt {
    r.ceil().to_integer()
}

pub fn floor(r: &Rational) -> BigInt {
    r.floor().to_integer()
}

/// Largest `m / 2^bits` whose square does not exceed `r` (`r >= 0`).
pub fn sqrt_floor_dyadic(r: &Rational, bits: u32) -> Rational {
    assert!(!r.is_negative(), "square root of a negative rational");
    // floor(sqrt(r) * 2^bits) = floor(sqrt(floor(r * 4^bits)))
    let scaled = floor(&(r * pow2(2 * bits as i64)));
    let m = scaled.sqrt();
    let out = Rational::new(m, BigInt::one() << bits);
    debug_assert!(&(&out * &out) <= r);
    out
}

pub fn to_f64(r: &Rational) -> f64 {
    if let Some(v) = r.to_f64() {
        if v.is_finite() {
            return v;
        }
    }
    // Very large numerators and denominators: scale both down before dividing.
    let shift = r.numer().bits().max(r.denom().bits()).saturating_sub(1000);
    let n = (r.numer() >> shift).to_f64().unwrap_or(f64::NAN);
    let d = (r.denom() >> shift).to_f64().unwrap_or(f64::NAN);
    n / d
}

/// Nearest rational with denominator `2^bits` (round half away from zero).
pub fn from_f64_dyadic(v: f64, bits: u32) -> Rational {
    let scaled = (v * (1u64 << bits) as f64).round();
    let n = BigInt::from(scaled as i128);
    Rational::new(n, BigInt::one() << bits)
}

/// Accepts `a/b`, integers, and decimals such as `0.25`, `-1.5e-3`.
pub fn parse_rational(s: &str) -> Result<Rational> {
    let t = s.trim();
    let bad = || Error::ParseRational(s.to_string());
    if t.is_empty() {
        return Err(bad());
    }
    if let Some((n, d)) = t.split_once('/') {
        let n = BigInt::from_str(n.trim()).map_err(|_| bad())?;
        let d = BigInt::from_str(d.trim()).map_err(|_| bad())?;
        if d.is_zero() {
            return Err(bad());
        }
        return Ok(Rational::new(n, d));
    }
    let (mantissa, exponent) = match t.find(['e', 'E']) {
        Some(i) => (&t[..i], i64::from_str(&t[i + 1..]).map_err(|_| bad())?),
        None => (t, 0),
    };
    let (negative, digits) = match mantissa.strip_prefix('-') {
        Some(rest) => (true, rest),
        None => (false, mantissa.strip_prefix('+').unwrap_or(mantissa)),
    };
    let (int_part, frac_part) = digits.split_once('.').unwrap_or((digits, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(bad());
    }
    if !int_part.chars().chain(frac_part.chars()).all(|c| c.is_ascii_digit()) {
        return Err(bad());
    }
    let all: String = format!("{int_part}{frac_part}");
    let n = BigInt::from_str(if all.is_empty() { "0" } else { &all }).map_err(|_| bad())?;
    let scale = exponent - frac_part.len() as i64;
    let ten = BigInt::from(10u32);
    let mut value = Rational::from_integer(n);
    if scale >= 0 {
        value *= Rational::from_integer(num_traits::pow(ten, scale as usize));
    } else {
        value /= Rational::from_integer(num_traits::pow(ten, (-scale) as usize));
    }
    Ok(if negative { -value } else { value })
}

pub fn format_rational(r: &Rational) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// A probability: an exact rational in `[0, 1]`.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub struct Probability(Rational);

impl Probability {
    pub fn new(value: Rational) -> Result<Self> {
        if value.is_negative() || value > Rational::one() {
            return Err(Error::ProbabilityOutOfRange(format_rational(&value)));
        }
        Ok(Probability(value))
    }

    pub fn ratio(num: i64, den: i64) -> Result<Self> {
        Self::new(rat(num, den))
    }

    pub fn zero() -> Self {
        Probability(Rational::zero())
    }

    pub fn one() -> Self {
        Probability(Rational::one())
    }

    pub fn value(&self) -> &Rational {
        &self.0
    }

    pub fn into_inner(self) -> Rational {
        self.0
    }

    pub fn to_f64(&self) -> f64 {
        to_f64(&self.0)
    }
}

impl FromStr for Probability {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Probability::new(parse_rational(s)?)
    }
}

impl fmt::Display for Probability {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&format_rational(&self.0))
    }
}

/// Wire form of a rational: exact numerator and denominator as strings plus
/// a decimal approximation for humans and plotting.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RationalRepr {
    pub num: String,
    pub den: String,
    #[serde(default)]
    pub decimal: f64,
}

impl From<&Rational> for RationalRepr {
    fn from(r: &Rational) -> Self {
        RationalRepr { num: r.numer().to_string(), den: r.denom().to_string(), decimal: to_f64(r) }
    }
}

impl TryFrom<&RationalRepr> for Rational {
    type Error = Error;

    fn try_from(repr: &RationalRepr) -> Result<Rational> {
        let n = BigInt::from_str(&repr.num).map_err(|_| Error::ParseRational(repr.num.clone()))?;
        let d = BigInt::from_str(&repr.den).map_err(|_| Error::ParseRational(repr.den.clone()))?;
        if d.is_zero() {
            return Err(Error::ParseRational(format!("{}/0", repr.num)));
        }
        Ok(Rational::new(n, d))
    }
}

#[derive(Deserialize)]
#[serde(untagged)]
enum RationalInput {
    Repr(RationalRepr),
    Text(String),
    Int(i64),
}

fn rational_from_input(input: RationalInput) -> Result<Rational> {
    match input {
        RationalInput::Repr(r) => Rational::try_from(&r),
        RationalInput::Text(s) => parse_rational(&s),
        RationalInput::Int(v) => Ok(int(v)),
    }
}

/// A `Rational` that serializes in wire form, for use inside tuples and maps.
#[derive(Clone, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct RationalValue(#[serde(with = "serde_rational")] pub Rational);

/// `#[serde(with = "serde_rational")]` for `Rational` fields.
pub mod serde_rational {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> std::result::Result<S::Ok, S::Error> {
        RationalRepr::from(r).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Rational, D::Error> {
        let input = RationalInput::deserialize(d)?;
        rational_from_input(input).map_err(serde::de::Error::custom)
    }
}

pub mod serde_rational_opt {
    use super::*;
    use serde::{Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Option<Rational>, s: S) -> std::result::Result<S::Ok, S::Error> {
        r.as_ref().map(RationalRepr::from).serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> std::result::Result<Option<Rational>, D::Error> {
        let input = Option::<RationalInput>::deserialize(d)?;
        input.map(rational_from_input).transpose().map_err(serde::de::Error::custom)
    }
}

impl Serialize for Probability {
    fn serialize<S: serde::Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        RationalRepr::from(&self.0).serialize(s)
    }
}

impl<'de> Deserialize<'de> for Probability {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let r = serde_rational::deserialize(d)?;
        Probability::new(r).map_err(serde::de::Error::custom)
    }
}

/// Binomial coefficient as an exact big integer.
pub fn binomial(n: u64, k: u64) -> BigUint {
    if k > n {
        return BigUint::zero();
    }
    let k = k.min(n - k);
    let mut acc = BigUint::one();
    for i in 0..k {
        acc *= n - i;
        acc /= i + 1;
    }
    acc
}

/// Least common multiple of all denominators.
pub fn common_denominator<'a>(values: impl IntoIterator<Item = &'a Rational>) -> BigInt {
    values.into_iter().fold(BigInt::one(), |acc, r| acc.lcm(r.denom()))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fractions_and_decimals() {
        assert_eq!(parse_rational("3/6").unwrap(), rat(1, 2));
        assert_eq!(parse_rational("0.25").unwrap(), rat(1, 4));
        assert_eq!(parse_rational("-1.5e-3").unwrap(), rat(-3, 2000));
        assert_eq!(parse_rational("7").unwrap(), int(7));
        assert_eq!(parse_rational(".5").unwrap(), rat(1, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("").is_err());
    }

    #[test]
    fn e_bounds_bracket_e() {
        assert!(e_lower() < e_upper());
        let e = std::f64::consts::E;
        assert!(to_f64(&e_lower()) <= e && e <= to_f64(&e_upper()));
    }

    #[test]
    fn ceil_log2_matches_definition() {
        for (r, a) in [(rat(1, 1), 0), (rat(3, 4), 0), (rat(1, 2), -1), (rat(5, 1), 3), (rat(1, 3), -1), (rat(8, 1), 3)] {
            assert_eq!(ceil_log2(&r), a, "{r}");
            assert!(r <= pow2(a) && r > pow2(a - 1));
        }
    }

    #[test]
    fn dyadic_sqrt_is_a_floor() {
        let r = int(2);
        let s = sqrt_floor_dyadic(&r, 20);
        assert!(&s * &s <= r);
        let next = &s + pow2(-20);
        assert!(&next * &next > r);
    }

    #[test]
    fn probability_rejects_out_of_range() {
        assert!(Probability::ratio(3, 2).is_err());
        assert!(Probability::ratio(-1, 2).is_err());
        assert!("0.51".parse::<Probability>().is_ok());
    }

    #[test]
    fn serde_round_trip() {
        let r = rat(-22, 7);
        let json = serde_json::to_string(&RationalRepr::from(&r)).unwrap();
        let back: RationalRepr = serde_json::from_str(&json).unwrap();
        assert_eq!(Rational::try_from(&back).unwrap(), r);
    }

    #[test]
    fn binomials() {
        assert_eq!(binomial(4, 2), BigUint::from(6u32));
        assert_eq!(binomial(2, 3), BigUint::zero());
        assert_eq!(binomial(10, 0), BigUint::one());
    }
}
