//! Exact rational arithmetic helpers and the exact-or-approximate value
//! types used across the crate.
//!
//! Probabilities and coefficients are carried as [`num_rational::BigRational`]
//! whenever the caller supplied them exactly; floating point enters only
//! when the caller asked for it or the quantity has no rational closed form.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

use crate::error::{Error, Result};

pub type Rat = BigRational;

/// Rational from a small numerator/denominator pair.
///
/// Panics on a zero denominator; intended for literals in code and tests.
pub fn rat(num: i64, den: i64) -> Rat {
    Rat::new(BigInt::from(num), BigInt::from(den))
}

pub fn rat_int(v: i128) -> Rat {
    Rat::from_integer(BigInt::from(v))
}

/// base^exp by binary exponentiation.
pub fn rat_pow(base: &Rat, mut exp: u32) -> Rat {
    let mut acc = Rat::one();
    let mut b = base.clone();
    while exp > 0 {
        if exp & 1 == 1 {
            acc *= &b;
        }
        b = &b * &b;
        exp >>= 1;
    }
    acc
}

pub fn rat_to_f64(r: &Rat) -> f64 {
    r.to_f64().unwrap_or_else(|| {
        let n = r.numer().to_f64().unwrap_or(f64::NAN);
        let d = r.denom().to_f64().unwrap_or(f64::NAN);
        n / d
    })
}

/// Formats as "a/b", or plain "a" for integers.
pub fn fmt_rat(r: &Rat) -> String {
    if r.denom().is_one() {
        r.numer().to_string()
    } else {
        format!("{}/{}", r.numer(), r.denom())
    }
}

/// Parses "a/b", a plain integer, or a finite decimal such as "0.25".
/// Decimals convert exactly (denominator a power of ten).
pub fn parse_rat(s: &str) -> Result<Rat> {
    let s = s.trim();
    let malformed = || Error::Domain(format!("malformed rational '{s}'"));
    if let Some((a, b)) = s.split_once('/') {
        let num: BigInt = a.trim().parse().map_err(|_| malformed())?;
        let den: BigInt = b.trim().parse().map_err(|_| malformed())?;
        if den.is_zero() {
            return Err(Error::Domain(format!("zero denominator in '{s}'")));
        }
        return Ok(Rat::new(num, den));
    }
    let (negative, rest) = match s.strip_prefix('-') {
        Some(r) => (true, r),
        None => (false, s.strip_prefix('+').unwrap_or(s)),
    };
    let (int_part, frac_part) = rest.split_once('.').unwrap_or((rest, ""));
    if int_part.is_empty() && frac_part.is_empty() {
        return Err(malformed());
    }
    if !int_part.bytes().all(|b| b.is_ascii_digit()) || !frac_part.bytes().all(|b| b.is_ascii_digit()) {
        return Err(malformed());
    }
    let digits = format!("{int_part}{frac_part}");
    let mut num: BigInt = digits.parse().map_err(|_| malformed())?;
    if negative {
        num = -num;
    }
    let den = BigInt::from(10u32).pow(frac_part.len() as u32);
    Ok(Rat::new(num, den))
}

/// An occupation probability in [0, 1].
///
/// `Exact` feeds the rational pipeline (censuses, moments, oracle);
/// `Approx` is for Monte Carlo work where only a double is needed.
/// Exactness is the caller's choice and is preserved end to end.
#[derive(Clone, Debug, PartialEq)]
pub enum Prob {
    Exact(Rat),
    Approx(f64),
}

impl Prob {
    pub fn exact(r: Rat) -> Result<Self> {
        if r.is_negative() || r > Rat::one() {
            return Err(Error::Domain(format!("probability {} outside [0, 1]", fmt_rat(&r))));
        }
        Ok(Prob::Exact(r))
    }

    pub fn approx(p: f64) -> Result<Self> {
        if !p.is_finite() || !(0.0..=1.0).contains(&p) {
            return Err(Error::Domain(format!("probability {p} outside [0, 1]")));
        }
        Ok(Prob::Approx(p))
    }

    /// Parses a probability. Fractions and finite decimals stay exact;
    /// scientific notation falls back to an f64 approximation.
    pub fn parse(s: &str) -> Result<Self> {
        match parse_rat(s) {
            Ok(r) => Prob::exact(r),
            Err(rational_err) => match s.parse::<f64>() {
                Ok(p) => Prob::approx(p),
                Err(_) => Err(rational_err),
            },
        }
    }

    pub fn as_f64(&self) -> f64 {
        match self {
            Prob::Exact(r) => rat_to_f64(r),
            Prob::Approx(p) => *p,
        }
    }

    pub fn as_exact(&self) -> Option<&Rat> {
        match self {
            Prob::Exact(r) => Some(r),
            Prob::Approx(_) => None,
        }
    }
}

impl fmt::Display for Prob {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Prob::Exact(r) => write!(f, "{}", fmt_rat(r)),
            Prob::Approx(p) => write!(f, "{p}"),
        }
    }
}

/// A numeric result that is exact when the inputs allowed it.
#[derive(Clone, Debug, PartialEq)]
pub enum Num {
    Exact(Rat),
    Approx(f64),
}

impl Num {
    pub fn as_f64(&self) -> f64 {
        match self {
            Num::Exact(r) => rat_to_f64(r),
            Num::Approx(x) => *x,
        }
    }

    pub fn as_exact(&self) -> Option<&Rat> {
        match self {
            Num::Exact(r) => Some(r),
            Num::Approx(_) => None,
        }
    }
}

impl fmt::Display for Num {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Num::Exact(r) => write!(f, "{}", fmt_rat(r)),
            Num::Approx(x) => write!(f, "{x}"),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parses_fraction_integer_decimal() {
        assert_eq!(parse_rat("1/2").unwrap(), rat(1, 2));
        assert_eq!(parse_rat("-3/6").unwrap(), rat(-1, 2));
        assert_eq!(parse_rat("7").unwrap(), rat(7, 1));
        assert_eq!(parse_rat("0.25").unwrap(), rat(1, 4));
        assert_eq!(parse_rat("-0.5").unwrap(), rat(-1, 2));
        assert_eq!(parse_rat(".5").unwrap(), rat(1, 2));
        assert_eq!(parse_rat("2.").unwrap(), rat(2, 1));
        assert_eq!(parse_rat("0.1").unwrap(), rat(1, 10));
    }

    #[test]
    fn rejects_malformed() {
        for bad in ["", "a", "1/0", "1.2.3", "1e-3", "--2", "1/ /2", "."] {
            assert!(parse_rat(bad).is_err(), "accepted {bad:?}");
        }
    }

    #[test]
    fn prob_range_enforced() {
        assert!(Prob::parse("1/2").is_ok());
        assert!(Prob::parse("0").is_ok());
        assert!(Prob::parse("1").is_ok());
        assert!(Prob::parse("3/2").is_err());
        assert!(Prob::parse("-1/2").is_err());
        assert!(Prob::approx(f64::NAN).is_err());
        assert!(Prob::approx(1.5).is_err());
    }

    #[test]
    fn prob_parse_accepts_scientific_notation_as_approx() {
        let p = Prob::parse("9.283e-4").unwrap();
        assert_eq!(p, Prob::Approx(9.283e-4));
        assert!(p.as_exact().is_none());
        // decimals keep taking the exact path
        assert_eq!(Prob::parse("0.25").unwrap().as_exact(), Some(&rat(1, 4)));
        assert!(Prob::parse("2e0").is_err());
        assert!(Prob::parse("nan").is_err());
        assert!(Prob::parse("abc").is_err());
    }

    #[test]
    fn pow_and_format() {
        assert_eq!(rat_pow(&rat(1, 2), 3), rat(1, 8));
        assert_eq!(rat_pow(&rat(2, 3), 0), rat(1, 1));
        assert_eq!(fmt_rat(&rat(7, 8)), "7/8");
        assert_eq!(fmt_rat(&rat(4, 2)), "2");
    }

    #[test]
    fn decimal_parse_is_exact() {
        // 0.1 is not representable in binary; the rational must be exactly 1/10.
        let r = parse_rat("0.1").unwrap();
        assert_eq!(r * rat_int(10), Rat::one());
    }
}
