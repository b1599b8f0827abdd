//! Exact ordered fields used by every solver path.
//!
//! All arithmetic in this crate is generic over [`Scalar`]. The trait is only
//! implemented for exact rational types: pivoting and equilibrium checks rely
//! on exact zero tests and exact comparisons, so floating point types are not
//! admissible.

use std::fmt;
use std::hash::Hash;

use num_bigint::BigInt;
use num_integer::Integer;
use num_rational::{BigRational, Ratio};
use num_traits::{Num, One, Signed, ToPrimitive, Zero};

pub trait Scalar: Clone + Ord + Hash + Num + Signed + fmt::Debug + fmt::Display + Send + Sync + 'static {
    /// Converts from an arbitrary-precision rational, or `None` when the value
    /// does not fit the representation.
    fn from_rational(value: &BigRational) -> Option<Self>;

    fn to_rational(&self) -> BigRational;

    fn from_i64(value: i64) -> Self {
        Self::from_rational(&BigRational::from_integer(BigInt::from(value))).expect("small integers are representable")
    }

    fn from_ratio(numer: i64, denom: i64) -> Self {
        Self::from_rational(&BigRational::new(BigInt::from(numer), BigInt::from(denom)))
            .expect("small ratios are representable")
    }

    /// Lossy conversion for reporting only.
    fn approx_f64(&self) -> f64 {
        ToPrimitive::to_f64(&self.to_rational()).unwrap_or(f64::NAN)
    }
}

impl Scalar for BigRational {
    fn from_rational(value: &BigRational) -> Option<Self> {
        Some(value.clone())
    }

    fn to_rational(&self) -> BigRational {
        self.clone()
    }
}

macro_rules! machine_ratio {
    ($int:ty) => {
        impl Scalar for Ratio<$int> {
            fn from_rational(value: &BigRational) -> Option<Self> {
                let numer = value.numer().to_string().parse::<$int>().ok()?;
                let denom = value.denom().to_string().parse::<$int>().ok()?;
                Some(Ratio::new(numer, denom))
            }

            fn to_rational(&self) -> BigRational {
                BigRational::new(BigInt::from(*self.numer()), BigInt::from(*self.denom()))
            }
        }
    };
}

machine_ratio!(i64);
machine_ratio!(i128);

/// Parses `p/q`, an integer, or a finite decimal such as `0.890625`.
pub fn parse_rational(text: &str) -> Option<BigRational> {
    let text = text.trim();
    if text.is_empty() {
        return None;
    }
    if let Some((numer, denom)) = text.split_once('/') {
        let numer = parse_integer(numer)?;
        let denom = parse_integer(denom)?;
        if denom.is_zero() {
            return None;
        }
        return Some(BigRational::new(numer, denom));
    }
    let (negative, body) = match text.as_bytes()[0] {
        b'-' => (true, &text[1..]),
        b'+' => (false, &text[1..]),
        _ => (false, text),
    };
    let (whole, frac) = body.split_once('.').unwrap_or((body, ""));
    if whole.is_empty() && frac.is_empty() {
        return None;
    }
    if !whole.chars().chain(frac.chars()).all(|c| c.is_ascii_digit()) {
        return None;
    }
    let digits = format!("{whole}{frac}");
    let numer = BigInt::from_str_radix(if digits.is_empty() { "0" } else { &digits }, 10).ok()?;
    let denom = num_traits::pow(BigInt::from(10), frac.len());
    let value = BigRational::new(numer, denom);
    Some(if negative { -value } else { value })
}

fn parse_integer(text: &str) -> Option<BigInt> {
    let text = text.trim();
    let digits = text.strip_prefix(['-', '+']).unwrap_or(text);
    if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
        return None;
    }
    BigInt::from_str_radix(text.strip_prefix('+').unwrap_or(text), 10).ok()
}

pub fn parse_scalar<T: Scalar>(text: &str) -> Option<T> {
    parse_rational(text).and_then(|r| T::from_rational(&r))
}

/// `2^-k` as an exact value.
pub fn dyadic<T: Scalar>(exponent: u32) -> T {
    let denom = BigInt::one() << exponent as usize;
    T::from_rational(&BigRational::new(BigInt::one(), denom)).expect("dyadic value fits")
}

/// Renders a finite decimal expansion when one exists (denominator of the form
/// 2^a 5^b), otherwise `None`.
pub fn to_decimal<T: Scalar>(value: &T) -> Option<String> {
    let r = value.to_rational();
    let mut denom = r.denom().clone();
    let two = BigInt::from(2);
    let five = BigInt::from(5);
    let (mut twos, mut fives) = (0usize, 0usize);
    while denom.is_multiple_of(&two) {
        denom /= &two;
        twos += 1;
    }
    while denom.is_multiple_of(&five) {
        denom /= &five;
        fives += 1;
    }
    if !denom.is_one() {
        return None;
    }
    let places = twos.max(fives);
    let scaled = r * BigRational::from_integer(num_traits::pow(BigInt::from(10), places));
    let digits = scaled.to_integer().abs().to_string();
    let sign = if value.is_negative() { "-" } else { "" };
    if places == 0 {
        return Some(format!("{sign}{digits}"));
    }
    let padded = format!("{digits:0>width$}", width = places + 1);
    let (int_part, frac_part) = padded.split_at(padded.len() - places);
    Some(format!("{sign}{int_part}.{frac_part}"))
}

pub(crate) fn dot<T: Scalar>(a: &[T], b: &[T]) -> T {
    a.iter()
        .zip(b)
        .filter(|(x, y)| !x.is_zero() && !y.is_zero())
        .fold(T::zero(), |acc, (x, y)| acc + x.clone() * y.clone())
}

#[cfg(test)]
mod tests {
    use super::*;
    use num_rational::Rational64;

    fn r(n: i64, d: i64) -> BigRational {
        BigRational::new(n.into(), d.into())
    }

    #[test]
    fn parses_all_literal_forms() {
        assert_eq!(parse_rational("1/3"), Some(r(1, 3)));
        assert_eq!(parse_rational("-4"), Some(r(-4, 1)));
        assert_eq!(parse_rational("0.9"), Some(r(9, 10)));
        assert_eq!(parse_rational("0.890625"), Some(r(57, 64)));
        assert_eq!(parse_rational(".5"), Some(r(1, 2)));
        assert_eq!(parse_rational("-0.25"), Some(r(-1, 4)));
        assert_eq!(parse_rational("6/4"), Some(r(3, 2)));
    }

    #[test]
    fn rejects_malformed_literals() {
        for bad in ["", "1/0", "a", "1.2.3", "1/2/3", ".", "1e5", "--1", "1/ "] {
            assert_eq!(parse_rational(bad), None, "{bad:?}");
        }
    }

    #[test]
    fn decimal_rendering() {
        assert_eq!(to_decimal(&r(57, 64)).as_deref(), Some("0.890625"));
        assert_eq!(to_decimal(&r(9, 10)).as_deref(), Some("0.9"));
        assert_eq!(to_decimal(&r(3, 1)).as_deref(), Some("3"));
        assert_eq!(to_decimal(&r(-1, 8)).as_deref(), Some("-0.125"));
        assert_eq!(to_decimal(&r(1, 3)), None);
    }

    #[test]
    fn machine_ratios_round_trip() {
        let x: Rational64 = parse_scalar("7/12").unwrap();
        assert_eq!(x, Rational64::new(7, 12));
        assert_eq!(x.to_rational(), r(7, 12));
        assert_eq!(dyadic::<Rational64>(6), Rational64::new(1, 64));
    }
}
