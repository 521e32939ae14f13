//! Relative cost of recomputing at precisions `b, b^2, ..., b^n` against a
//! single computation at the final precision, for operations costing
//! `O(k^alpha)` at precision `k`.
//!
//! `r(alpha, b) = b^(alpha+1) / (b^alpha - 1)` bounds the ratio. It is
//! minimized at `b* = (1+alpha)^(1/alpha)`, where it equals
//! `r* = (1+alpha)^(1+1/alpha) / alpha`.

use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Signed, ToPrimitive, Zero};
use serde::{Serialize, Serializer};

use crate::error::{Error, Result};
use crate::integer::exact_root;

/// An exact rational when one exists, otherwise a float.
#[derive(Clone, Debug, PartialEq)]
pub enum Number {
    Exact(BigRational),
    Float(f64),
}

impl Number {
    pub fn to_f64(&self) -> f64 {
        match self {
            Number::Exact(q) => q.to_f64().unwrap_or(f64::NAN),
            Number::Float(x) => *x,
        }
    }

    pub fn exact(&self) -> Option<&BigRational> {
        match self {
            Number::Exact(q) => Some(q),
            Number::Float(_) => None,
        }
    }
}

impl fmt::Display for Number {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Number::Exact(q) if q.is_integer() => write!(f, "{}", q.numer()),
            Number::Exact(q) => write!(f, "{}/{} (~{:.6})", q.numer(), q.denom(), self.to_f64()),
            Number::Float(x) => write!(f, "~{x:.6}"),
        }
    }
}

impl Serialize for Number {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Number::Exact(q) if q.is_integer() => s.serialize_str(&q.numer().to_string()),
            Number::Exact(q) => s.serialize_str(&format!("{}/{}", q.numer(), q.denom())),
            Number::Float(x) => s.serialize_f64(*x),
        }
    }
}

#[derive(Clone, Debug, Serialize)]
pub struct OverheadModel {
    pub alpha: Number,
    pub b: Number,
    pub r: Number,
    pub b_star: Number,
    pub r_star: Number,
}

fn rpow(q: &BigRational, e: u32) -> BigRational {
    num_traits::pow(q.clone(), e as usize)
}

/// Exact `q^(1/k)` when `q` is a perfect `k`-th power.
fn rational_root(q: &BigRational, k: u32) -> Option<BigRational> {
    Some(BigRational::new(exact_root(q.numer(), k)?, exact_root(q.denom(), k)?))
}

fn f(q: &BigRational) -> f64 {
    q.to_f64().unwrap_or(f64::NAN)
}

/// `r(alpha, b)`.
pub fn r(alpha: &BigRational, b: &BigRational) -> Number {
    if alpha.is_integer() {
        let a = alpha.to_integer().to_u32().expect("small exponent");
        let ba = rpow(b, a);
        return Number::Exact(&ba * b / (ba - BigRational::one()));
    }
    let (a, b) = (f(alpha), f(b));
    Number::Float(b.powf(a + 1.0) / (b.powf(a) - 1.0))
}

pub fn overhead(alpha: &BigRational, b: &BigRational) -> Result<OverheadModel> {
    if !alpha.is_positive() {
        return Err(Error::InvalidArgument("alpha must be positive".into()));
    }
    if *b <= BigRational::one() {
        return Err(Error::InvalidArgument("b must exceed 1".into()));
    }
    let one = BigRational::one();
    let a1 = alpha + &one;
    let exact_star = if alpha.is_integer() {
        let a = alpha.to_integer().to_u32().expect("small exponent");
        rational_root(&a1, a)
    } else {
        None
    };
    let (b_star, r_star) = match exact_star {
        Some(bs) => {
            let rs = &a1 * &bs / alpha;
            (Number::Exact(bs), Number::Exact(rs))
        }
        None => {
            let (a, a1) = (f(alpha), f(&a1));
            (Number::Float(a1.powf(1.0 / a)), Number::Float(a1.powf(1.0 + 1.0 / a) / a))
        }
    };
    Ok(OverheadModel {
        alpha: Number::Exact(alpha.clone()),
        b: Number::Exact(b.clone()),
        r: r(alpha, b),
        b_star,
        r_star,
    })
}

/// Whether `r(alpha, 2) <= c * r*(alpha)`, decided in exact arithmetic.
///
/// Both sides are positive, so this is `(alpha r / (c (1+alpha)))^alpha <=
/// 1 + alpha`.
pub fn base_two_within(alpha: u32, c: &BigRational) -> bool {
    assert!(alpha > 0 && c.is_positive());
    let a = BigRational::from_integer(BigInt::from(alpha));
    let two = BigRational::from_integer(2.into());
    let Number::Exact(r2) = r(&a, &two) else { unreachable!("integer alpha") };
    let a1 = &a + BigRational::one();
    let lhs = rpow(&(&a * r2 / (c * &a1)), alpha);
    lhs <= a1
}

/// `r(alpha, 2) / r*(alpha)` as a float.
pub fn base_two_ratio(alpha: &BigRational) -> f64 {
    let two = BigRational::from_integer(2.into());
    let m = overhead(alpha, &two).expect("valid");
    m.r.to_f64() / m.r_star.to_f64()
}

/// Parses `a`, `a/b` or a decimal such as `1.5`.
pub fn parse_rational(s: &str) -> Result<BigRational> {
    let bad = || Error::InvalidArgument(format!("not a rational: {s}"));
    let s = s.trim();
    if let Some((n, d)) = s.split_once('/') {
        let n: BigInt = n.trim().parse().map_err(|_| bad())?;
        let d: BigInt = d.trim().parse().map_err(|_| bad())?;
        if d.is_zero() {
            return Err(Error::ZeroDenominator);
        }
        return Ok(BigRational::new(n, d));
    }
    if let Some((i, frac)) = s.split_once('.') {
        let digits = format!("{i}{frac}");
        let n: BigInt = digits.parse().map_err(|_| bad())?;
        let d = num_traits::pow(BigInt::from(10), frac.len());
        return Ok(BigRational::new(n, d));
    }
    Ok(BigRational::from_integer(s.parse().map_err(|_| bad())?))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(a: i64, b: i64) -> BigRational {
        BigRational::new(a.into(), b.into())
    }

    #[test]
    fn linear_cost_optimum() {
        let m = overhead(&q(1, 1), &q(2, 1)).unwrap();
        assert_eq!(m.r, Number::Exact(q(4, 1)));
        assert_eq!(m.b_star, Number::Exact(q(2, 1)));
        assert_eq!(m.r_star, Number::Exact(q(4, 1)));
        let m3 = overhead(&q(1, 1), &q(3, 1)).unwrap();
        assert_eq!(m3.r, Number::Exact(q(9, 2)));
    }

    #[test]
    fn cubic_cost() {
        let m = overhead(&q(3, 1), &q(2, 1)).unwrap();
        assert_eq!(m.r, Number::Exact(q(16, 7)));
        assert!(m.b_star.exact().is_none());
        assert!(base_two_within(3, &q(108, 100)));
        assert!(!base_two_within(3, &q(107, 100)));
        let ratio = base_two_ratio(&q(3, 1));
        assert!(ratio <= 1.08 && ratio > 1.079);
        // Exact optimum for alpha = 3 would need 4^(1/3); alpha = 7 has none either.
        assert!(overhead(&q(7, 1), &q(2, 1)).unwrap().b_star.exact().is_none());
    }

    #[test]
    fn within_factor_two() {
        for a in 1..12 {
            assert!(base_two_within(a, &q(2, 1)));
        }
    }

    #[test]
    fn fractional_alpha_and_errors() {
        let m = overhead(&q(1, 2), &q(2, 1)).unwrap();
        assert!((m.b_star.to_f64() - 2.25).abs() < 1e-12);
        assert!(overhead(&q(0, 1), &q(2, 1)).is_err());
        assert!(overhead(&q(1, 1), &q(1, 1)).is_err());
        assert_eq!(parse_rational("3/2").unwrap(), q(3, 2));
        assert_eq!(parse_rational("1.25").unwrap(), q(5, 4));
        assert!(parse_rational("x").is_err());
    }
}
