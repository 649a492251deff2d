//! Exact rational arithmetic and comparisons against quadratic irrationals.

use std::cmp::Ordering;
use std::fmt;
use std::str::FromStr;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};

pub type Rational = BigRational;

pub fn int(value: i64) -> Rational {
    Rational::from_integer(BigInt::from(value))
}

pub fn ratio(numer: i64, denom: i64) -> Rational {
    Rational::new(BigInt::from(numer), BigInt::from(denom))
}

pub fn to_f64(value: &Rational) -> f64 {
    value.to_f64().unwrap_or(f64::NAN)
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ParseRationalError(String);

impl fmt::Display for ParseRationalError {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "invalid rational literal {:?}", self.0)
    }
}

impl std::error::Error for ParseRationalError {}

/// Parses `"p/q"`, an integer, or a finite decimal such as `"0.73"` exactly.
pub fn parse_rational(text: &str) -> Result<Rational, ParseRationalError> {
    let err = || ParseRationalError(text.to_string());
    let text = text.trim();
    if let Some((numer, denom)) = text.split_once('/') {
        let numer = BigInt::from_str(numer.trim()).map_err(|_| err())?;
        let denom = BigInt::from_str(denom.trim()).map_err(|_| err())?;
        if denom.is_zero() {
            return Err(err());
        }
        return Ok(Rational::new(numer, denom));
    }
    if let Some((whole, frac)) = text.split_once('.') {
        if frac.is_empty() || !frac.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        let negative = whole.starts_with('-');
        let whole_digits = whole.trim_start_matches(['-', '+']);
        if !whole_digits.bytes().all(|b| b.is_ascii_digit()) {
            return Err(err());
        }
        let digits = format!("{}{}", whole_digits, frac);
        let mut numer = BigInt::from_str(&digits).map_err(|_| err())?;
        if negative {
            numer = -numer;
        }
        let denom = num_traits::pow(BigInt::from(10), frac.len());
        return Ok(Rational::new(numer, denom));
    }
    BigInt::from_str(text)
        .map(Rational::from_integer)
        .map_err(|_| err())
}

/// The real number `rational + surd · √radicand` with a non-square radicand.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct QuadraticSurd {
    rational: Rational,
    surd: Rational,
    radicand: u32,
}

impl QuadraticSurd {
    pub fn new(rational: Rational, surd: Rational, radicand: u32) -> Self {
        Self {
            rational,
            surd,
            radicand,
        }
    }

    /// √3 − 1
    pub fn sqrt3_minus_one() -> Self {
        Self::new(int(-1), int(1), 3)
    }

    /// √3 + 1, the envy-rank boundary between the first two EFR groups.
    pub fn sqrt3_plus_one() -> Self {
        Self::new(int(1), int(1), 3)
    }

    /// (1 + √5) / 2
    pub fn golden_ratio() -> Self {
        Self::new(ratio(1, 2), ratio(1, 2), 5)
    }

    /// (√5 − 1) / 2 = φ − 1 = 1/φ
    pub fn golden_ratio_minus_one() -> Self {
        Self::new(ratio(-1, 2), ratio(1, 2), 5)
    }

    pub fn approx(&self) -> f64 {
        to_f64(&self.rational) + to_f64(&self.surd) * f64::from(self.radicand).sqrt()
    }

    /// Exact ordering of `x` against `self · y`.
    pub fn cmp_scaled(&self, x: &Rational, y: &Rational) -> Ordering {
        // x ⋛ (p + q√d)·y  ⇔  x − p·y ⋛ q·y·√d
        let lhs = x - &self.rational * y;
        let rhs = &self.surd * y;
        let d = Rational::from_integer(BigInt::from(self.radicand));
        match (lhs.signum_ord(), rhs.signum_ord()) {
            (Ordering::Equal, Ordering::Equal) => Ordering::Equal,
            (l, r) if l != Ordering::Less && r != Ordering::Greater => Ordering::Greater,
            (l, r) if l != Ordering::Greater && r != Ordering::Less => Ordering::Less,
            (Ordering::Greater, _) => (&lhs * &lhs).cmp(&(&d * &rhs * &rhs)),
            _ => (&d * &rhs * &rhs).cmp(&(&lhs * &lhs)),
        }
    }

    /// Exact ordering of the rational `x` against this constant.
    pub fn cmp_rational(&self, x: &Rational) -> Ordering {
        self.cmp_scaled(x, &Rational::one())
    }
}

impl fmt::Display for QuadraticSurd {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{} + {}·√{}", self.rational, self.surd, self.radicand)
    }
}

trait SignumOrd {
    fn signum_ord(&self) -> Ordering;
}

impl SignumOrd for Rational {
    fn signum_ord(&self) -> Ordering {
        if self.is_zero() {
            Ordering::Equal
        } else if self.is_positive() {
            Ordering::Greater
        } else {
            Ordering::Less
        }
    }
}

/// Approximation threshold a fairness factor is compared against.
#[derive(Debug, Clone, PartialEq, Eq)]
pub enum Threshold {
    Rational(Rational),
    SqrtThreeMinusOne,
    GoldenRatioMinusOne,
}

impl Threshold {
    fn surd(&self) -> QuadraticSurd {
        match self {
            Threshold::Rational(c) => QuadraticSurd::new(c.clone(), Rational::zero(), 1),
            Threshold::SqrtThreeMinusOne => QuadraticSurd::sqrt3_minus_one(),
            Threshold::GoldenRatioMinusOne => QuadraticSurd::golden_ratio_minus_one(),
        }
    }

    /// True iff `own ≥ c · rival` for this threshold `c`, decided exactly.
    pub fn admits(&self, own: &Rational, rival: &Rational) -> bool {
        match self {
            Threshold::Rational(c) => *own >= c * rival,
            _ => self.surd().cmp_scaled(own, rival) != Ordering::Less,
        }
    }

    /// True iff `value ≥ c`.
    pub fn is_met_by(&self, value: &Rational) -> bool {
        self.admits(value, &Rational::one())
    }

    pub fn approx(&self) -> f64 {
        match self {
            Threshold::Rational(c) => to_f64(c),
            other => other.surd().approx(),
        }
    }
}

impl fmt::Display for Threshold {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Threshold::Rational(c) => write!(f, "{}", c),
            Threshold::SqrtThreeMinusOne => f.write_str("sqrt3-1"),
            Threshold::GoldenRatioMinusOne => f.write_str("phi-1"),
        }
    }
}

impl FromStr for Threshold {
    type Err = ParseRationalError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim() {
            "sqrt3-1" => Ok(Threshold::SqrtThreeMinusOne),
            "phi-1" => Ok(Threshold::GoldenRatioMinusOne),
            other => parse_rational(other).map(Threshold::Rational),
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    #[test]
    fn parses_literals() {
        assert_eq!(parse_rational("3/6").unwrap(), ratio(1, 2));
        assert_eq!(parse_rational("7").unwrap(), int(7));
        assert_eq!(parse_rational("0.73").unwrap(), ratio(73, 100));
        assert_eq!(parse_rational("-1.5").unwrap(), ratio(-3, 2));
        assert!(parse_rational("1/0").is_err());
        assert!(parse_rational("abc").is_err());
        assert!(parse_rational("1.").is_err());
    }

    #[test]
    fn threshold_examples() {
        let t = Threshold::SqrtThreeMinusOne;
        // (43/22)^2 = 1849/484 >= 3
        assert!(t.is_met_by(&ratio(21, 22)));
        // (17/10)^2 = 289/100 < 3
        assert!(!t.is_met_by(&ratio(7, 10)));
        assert!(Threshold::Rational(int(0)).is_met_by(&int(0)));
        assert!(Threshold::GoldenRatioMinusOne.is_met_by(&ratio(6181, 10000)));
        assert!(!Threshold::GoldenRatioMinusOne.is_met_by(&ratio(618, 1000)));
    }

    #[test]
    fn rank_boundaries() {
        let phi = QuadraticSurd::sqrt3_plus_one();
        // (14/5 - 1)^2 = 81/25 > 3
        assert_eq!(phi.cmp_rational(&ratio(14, 5)), Ordering::Greater);
        assert_eq!(phi.cmp_rational(&ratio(27, 10)), Ordering::Less);
        let golden = QuadraticSurd::golden_ratio();
        assert_eq!(golden.cmp_rational(&ratio(1618, 1000)), Ordering::Less);
        assert_eq!(golden.cmp_rational(&ratio(1619, 1000)), Ordering::Greater);
        assert_eq!(golden.cmp_rational(&int(0)), Ordering::Less);
    }

    proptest! {
        #[test]
        fn surd_comparison_matches_floats(
            p in -50i64..50, q in -50i64..50, x in -200i64..200, y in -200i64..200,
            radicand in prop::sample::select(vec![2u32, 3, 5, 7]),
        ) {
            let c = QuadraticSurd::new(ratio(p, 7), ratio(q, 5), radicand);
            let exact = c.cmp_scaled(&ratio(x, 3), &ratio(y, 11));
            let lhs = x as f64 / 3.0;
            let rhs = c.approx() * (y as f64 / 11.0);
            if (lhs - rhs).abs() > 1e-9 {
                prop_assert_eq!(exact, lhs.partial_cmp(&rhs).unwrap());
            }
        }
    }
}
