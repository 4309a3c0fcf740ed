//! Exact rational helpers. Biases are dyadic, budgets usually are too; all
//! inequality checks in the crate run on these.

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, ToPrimitive, Zero};

pub type Rational = BigRational;

pub fn ratio(num: i64, den: i64) -> Rational {
    BigRational::new(num.into(), den.into())
}

pub fn int(v: i64) -> Rational {
    BigRational::from_integer(v.into())
}

pub fn pow2(k: usize) -> BigInt {
    BigInt::one() << k
}

/// `count / 2^k`.
pub fn dyadic(count: u128, k: usize) -> Rational {
    BigRational::new(BigInt::from(count), pow2(k))
}

pub fn to_f64(r: &Rational) -> f64 {
    r.to_f64().unwrap_or(f64::NAN)
}

/// Exact rational value of a finite float.
pub fn from_f64(x: f64) -> Option<Rational> {
    BigRational::from_float(x)
}

pub fn clamp_unit(r: Rational) -> Rational {
    if r < Rational::zero() {
        Rational::zero()
    } else if r > Rational::one() {
        Rational::one()
    } else {
        r
    }
}

/// Renders as `num/den`, or just `num` for integers.
pub fn fmt(r: &Rational) -> String {
    r.to_string()
}

/// Accepts `a/b`, integers, and finite decimals such as `0.125`.
pub fn parse(s: &str) -> Option<Rational> {
    let s = s.trim();
    if let Some((a, b)) = s.split_once('/') {
        let a: BigInt = a.trim().parse().ok()?;
        let b: BigInt = b.trim().parse().ok()?;
        if b.is_zero() {
            return None;
        }
        return Some(BigRational::new(a, b));
    }
    if let Some((whole, frac)) = s.split_once('.') {
        let neg = whole.starts_with('-');
        let digits = format!("{}{}", whole.trim_start_matches('-'), frac);
        if digits.is_empty() || !digits.chars().all(|c| c.is_ascii_digit()) {
            return None;
        }
        let mut num: BigInt = digits.parse().ok()?;
        if neg {
            num = -num;
        }
        let den = num_traits::pow(BigInt::from(10), frac.len());
        return Some(BigRational::new(num, den));
    }
    s.parse::<BigInt>().ok().map(BigRational::from_integer)
}

/// serde adapter storing a rational as its `num/den` string.
pub mod serde_str {
    use super::{parse, Rational};
    use serde::{de::Error, Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(r: &Rational, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_str(&r.to_string())
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Rational, D::Error> {
        let s = String::deserialize(d)?;
        parse(&s).ok_or_else(|| D::Error::custom(format!("not a rational: {s:?}")))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn parse_forms() {
        assert_eq!(parse("1/4"), Some(ratio(1, 4)));
        assert_eq!(parse("0.125"), Some(ratio(1, 8)));
        assert_eq!(parse("3"), Some(int(3)));
        assert_eq!(parse("-0.5"), Some(ratio(-1, 2)));
        assert_eq!(parse("1/0"), None);
        assert_eq!(parse("abc"), None);
    }

    #[test]
    fn dyadic_reduces() {
        assert_eq!(dyadic(12, 4), ratio(3, 4));
        assert_eq!(clamp_unit(ratio(5, 4)), int(1));
        assert_eq!(clamp_unit(ratio(-1, 4)), int(0));
    }
}
