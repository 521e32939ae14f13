use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;
use num_traits::{One, Zero};

use super::ring::{ApproxRing, RingData};
use crate::error::{Error, Result, Val};

/// A finite-precision p-adic number `pi^v * u + O(pi^(v+k))`.
///
/// `val` is `None` for the precise zero. When `rel > 0` the unit part has
/// valuation zero; a weakly zero element has `rel == 0` and a zero unit.
#[derive(Clone)]
pub struct ApproxElement {
    ring: ApproxRing,
    val: Option<i64>,
    rel: i64,
    unit: Vec<BigInt>,
}

/// The tuple returned by [`ApproxElement::inspect`].
#[derive(Clone, Copy, Debug, PartialEq, Eq, serde::Serialize)]
pub struct Inspection {
    pub weak_valuation: Val,
    pub abs_precision: Val,
    pub rel_precision: i64,
    pub is_weakly_zero: bool,
    pub is_precise_zero: bool,
    pub valuation_known: bool,
}

impl ApproxElement {
    pub(crate) fn from_parts(ring: &ApproxRing, val: Option<i64>, rel: i64, unit: Vec<BigInt>) -> Self {
        ApproxElement { ring: ring.clone(), val, rel, unit }
    }

    /// Normalizes `pi^shift * x` where the integral coordinates `x` are known
    /// modulo `pi^abs`.
    pub(crate) fn from_integral(ring: &ApproxRing, x: Vec<BigInt>, abs: i64, shift: i64) -> Self {
        let d = ring.data();
        if abs <= 0 {
            return Self::weak_zero(ring, shift + abs);
        }
        let x = d.int_truncate(&x, abs);
        match d.int_val(&x) {
            Some(w) if w < abs => {
                let rel = (abs - w).min(d.precision);
                let unit = d.int_truncate(&d.int_div_pi_pow(&x, w), rel);
                ApproxElement { ring: ring.clone(), val: Some(shift + w), rel, unit }
            }
            _ => Self::weak_zero(ring, shift + abs),
        }
    }

    /// `O(pi^v)`.
    pub fn weak_zero(ring: &ApproxRing, v: i64) -> Self {
        ApproxElement { ring: ring.clone(), val: Some(v), rel: 0, unit: ring.data().int_zero() }
    }

    pub fn precise_zero(ring: &ApproxRing) -> Self {
        ApproxElement { ring: ring.clone(), val: None, rel: 0, unit: ring.data().int_zero() }
    }

    pub fn one(ring: &ApproxRing) -> Self {
        ApproxElement { ring: ring.clone(), val: Some(0), rel: ring.precision(), unit: ring.data().int_one() }
    }

    pub fn ring(&self) -> &ApproxRing {
        &self.ring
    }

    pub fn weak_valuation(&self) -> Val {
        match self.val {
            Some(v) => Val::Finite(v),
            None => Val::Infinity,
        }
    }

    pub fn abs_precision(&self) -> Val {
        match self.val {
            Some(v) => Val::Finite(v + self.rel),
            None => Val::Infinity,
        }
    }

    pub fn rel_precision(&self) -> i64 {
        self.rel
    }

    pub fn is_weakly_zero(&self) -> bool {
        self.rel == 0
    }

    pub fn is_precise_zero(&self) -> bool {
        self.val.is_none()
    }

    pub fn valuation_known(&self) -> bool {
        self.rel > 0 || self.val.is_none()
    }

    pub fn inspect(&self) -> Inspection {
        Inspection {
            weak_valuation: self.weak_valuation(),
            abs_precision: self.abs_precision(),
            rel_precision: self.rel,
            is_weakly_zero: self.is_weakly_zero(),
            is_precise_zero: self.is_precise_zero(),
            valuation_known: self.valuation_known(),
        }
    }

    pub(crate) fn unit_coords(&self) -> &[BigInt] {
        &self.unit
    }

    /// Residue of the unit part, or `None` if weakly zero.
    pub fn unit_residue(&self) -> Option<super::Residue> {
        if self.rel == 0 {
            return None;
        }
        Some(self.ring.data().int_truncate(&self.unit, 1))
    }

    /// The unit part of a prime-ring element as an integer in `[0, p^k)`.
    pub fn unit_integer(&self) -> Option<&BigInt> {
        if self.ring.depth() == 0 {
            Some(&self.unit[0])
        } else {
            None
        }
    }

    /// Brings both operands into a common ring of the same family.
    fn align(&self, other: &ApproxElement) -> Result<(ApproxElement, ApproxElement)> {
        if self.ring.family() != other.ring.family() {
            return Err(Error::FamilyMismatch);
        }
        let (a, b) = (self.ring.precision(), other.ring.precision());
        if a == b {
            Ok((self.clone(), other.clone()))
        } else if a < b {
            Ok((self.clone(), other.coerce_into(&self.ring)?))
        } else {
            Ok((self.coerce_into(&other.ring)?, other.clone()))
        }
    }

    pub fn add(&self, other: &ApproxElement) -> Result<ApproxElement> {
        let (x, y) = self.align(other)?;
        let (vx, vy) = match (x.val, y.val) {
            (None, _) => return Ok(y),
            (_, None) => return Ok(x),
            (Some(a), Some(b)) => (a, b),
        };
        let ring = &x.ring;
        let d = ring.data();
        let abs = (vx + x.rel).min(vy + y.rel);
        let m = vx.min(vy);
        if abs <= m {
            return Ok(Self::weak_zero(ring, abs));
        }
        let n = abs - m;
        let mut sum = d.int_zero();
        for (v, u) in [(vx, &x.unit), (vy, &y.unit)] {
            if v - m < n {
                sum = d.int_add(&sum, &d.int_mul_pi_pow(u, v - m));
            }
        }
        Ok(Self::from_integral(ring, sum, n, m))
    }

    pub fn neg(&self) -> ApproxElement {
        if self.rel == 0 {
            return self.clone();
        }
        let d = self.ring.data();
        let unit = d.int_truncate(&d.int_neg(&self.unit), self.rel);
        ApproxElement { unit, ..self.clone() }
    }

    pub fn sub(&self, other: &ApproxElement) -> Result<ApproxElement> {
        self.add(&other.neg())
    }

    pub fn mul(&self, other: &ApproxElement) -> Result<ApproxElement> {
        let (x, y) = self.align(other)?;
        let (vx, vy) = match (x.val, y.val) {
            (None, _) => return Ok(x),
            (_, None) => return Ok(y),
            (Some(a), Some(b)) => (a, b),
        };
        let v = vx + vy;
        let k = x.rel.min(y.rel);
        if k == 0 {
            // pi^vx (u + O) * pi^vy (w + O) is only known up to pi^(v + k)
            return Ok(Self::weak_zero(&x.ring, v));
        }
        let d = x.ring.data();
        let unit = d.int_truncate(&d.int_mul(&x.unit, &y.unit), k);
        Ok(ApproxElement { ring: x.ring.clone(), val: Some(v), rel: k, unit })
    }

    pub fn inverse(&self) -> Result<ApproxElement> {
        if self.is_weakly_zero() {
            return Err(Error::WeaklyZeroDivisor);
        }
        let v = -self.val.unwrap();
        if v < 0 && !self.ring.is_field() {
            return Err(Error::NotIntegral(v));
        }
        let d = self.ring.data();
        let inv = d.int_inv(&self.unit).expect("normalized unit");
        let unit = d.int_truncate(&inv, self.rel);
        Ok(ApproxElement { ring: self.ring.clone(), val: Some(v), rel: self.rel, unit })
    }

    pub fn div(&self, other: &ApproxElement) -> Result<ApproxElement> {
        let (x, y) = self.align(other)?;
        if y.is_weakly_zero() {
            return Err(Error::WeaklyZeroDivisor);
        }
        let vy = y.val.unwrap();
        let Some(vx) = x.val else { return Ok(x) };
        let v = vx - vy;
        if v < 0 && !x.ring.is_field() {
            return Err(Error::NotIntegral(v));
        }
        let k = x.rel.min(y.rel);
        if k == 0 {
            return Ok(Self::weak_zero(&x.ring, v));
        }
        let d = x.ring.data();
        let inv = d.int_inv(&y.unit).expect("normalized unit");
        let unit = d.int_truncate(&d.int_mul(&x.unit, &inv), k);
        Ok(ApproxElement { ring: x.ring.clone(), val: Some(v), rel: k, unit })
    }

    pub fn pow(&self, n: i64) -> Result<ApproxElement> {
        if n == 0 {
            return Ok(Self::one(&self.ring));
        }
        let base = if n < 0 { self.inverse()? } else { self.clone() };
        let mut e = n.unsigned_abs();
        let mut result = Self::one(&self.ring);
        let mut sq = base;
        while e > 0 {
            if e & 1 == 1 {
                result = result.mul(&sq)?;
            }
            e >>= 1;
            if e > 0 {
                sq = sq.mul(&sq)?;
            }
        }
        Ok(result)
    }

    pub fn weakly_equals(&self, other: &ApproxElement) -> Result<bool> {
        Ok(self.sub(other)?.is_weakly_zero())
    }

    /// Moves into another ring of the same family, truncating the relative
    /// precision to the target's cap.
    pub fn coerce_into(&self, target: &ApproxRing) -> Result<ApproxElement> {
        if self.ring.family() != target.family() {
            return Err(Error::FamilyMismatch);
        }
        let rel = self.rel.min(target.precision());
        let td = target.data();
        let unit = if rel == 0 {
            td.int_zero()
        } else {
            td.int_truncate(&self.unit, rel)
        };
        Ok(ApproxElement { ring: target.clone(), val: self.val, rel, unit })
    }

    /// Lowers the absolute precision to at most `n`.
    pub fn truncate_abs(&self, n: i64) -> ApproxElement {
        let Some(v) = self.val else { return self.clone() };
        if v + self.rel <= n {
            return self.clone();
        }
        if n <= v {
            return Self::weak_zero(&self.ring, n);
        }
        let rel = n - v;
        let unit = self.ring.data().int_truncate(&self.unit, rel);
        ApproxElement { ring: self.ring.clone(), val: self.val, rel, unit }
    }

    /// Treats the unknown digits as zero and claims full relative precision.
    /// Weakly zero elements become the precise zero.
    pub fn lifted(&self) -> ApproxElement {
        if self.rel == 0 {
            return Self::precise_zero(&self.ring);
        }
        ApproxElement { rel: self.ring.precision(), ..self.clone() }
    }

    /// Residue-field image of an integral element, as weight-zero coordinates.
    pub fn residue(&self) -> Result<Vec<BigInt>> {
        let d = self.ring.data();
        match self.val {
            None => Ok(d.int_zero()),
            Some(v) if v < 0 => Err(Error::NotIntegral(v)),
            Some(v) if v > 0 => Ok(d.int_zero()),
            Some(_) if self.rel == 0 => Err(Error::InvalidArgument("residue of O(1) is unknown".into())),
            Some(_) => Ok(d.int_truncate(&self.unit, 1)),
        }
    }

    /// The rational `p^v * u` for elements of a prime ring.
    pub fn to_rational(&self) -> Result<BigRational> {
        if self.ring.depth() != 0 {
            return Err(Error::InvalidArgument("not a prime-ring element".into()));
        }
        let Some(v) = self.val else { return Ok(BigRational::zero()) };
        let p = BigRational::from_integer(self.ring.prime().clone());
        let u = BigRational::from_integer(self.unit[0].clone());
        Ok(u * num_traits::pow::Pow::pow(&p, v as i32))
    }

    /// Integral coordinates of `pi^v * u`, unknown digits taken as zero.
    pub(crate) fn integral_coords(&self) -> Result<Vec<BigInt>> {
        if let Some(v) = self.val {
            if v < 0 {
                return Err(Error::NotIntegral(v));
            }
        }
        Ok(self.ring.data().integral_coords(self))
    }
}

impl fmt::Debug for ApproxElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for ApproxElement {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let Some(v) = self.val else { return write!(f, "0") };
        let d = self.ring.data();
        let names = level_names(d);
        let pi = uniformizer_name(d, &names);
        let mut terms = Vec::new();
        if d.depth == 0 {
            let p = &d.p;
            let mut u = self.unit[0].clone();
            let mut i = v;
            while !u.is_zero() {
                let (q, r) = num_integer::Integer::div_rem(&u, p);
                if !r.is_zero() {
                    terms.push(term(&r.to_string(), &pi, i));
                }
                u = q;
                i += 1;
            }
        } else {
            let mut u = self.unit.clone();
            for i in 0..self.rel {
                let r = d.int_truncate(&u, 1);
                if !RingData::is_int_zero(&r) {
                    terms.push(term(&render_digit(d, &r, &names), &pi, v + i));
                }
                u = d.int_sub(&u, &r);
                if RingData::is_int_zero(&u) {
                    break;
                }
                u = d.int_div_pi_pow(&u, 1);
            }
        }
        terms.push(format!("O({})", power(&pi, v + self.rel)));
        write!(f, "{}", terms.join(" + "))
    }
}

fn level_names(d: &RingData) -> Vec<String> {
    if d.names.len() <= 1 {
        d.names.clone()
    } else {
        d.names.iter().enumerate().map(|(i, n)| format!("{n}{}", i + 1)).collect()
    }
}

fn uniformizer_name(d: &RingData, names: &[String]) -> String {
    names
        .iter()
        .rev()
        .find(|n| n.starts_with("pi"))
        .cloned()
        .unwrap_or_else(|| d.p.to_string())
}

fn power(base: &str, e: i64) -> String {
    if e == 1 {
        base.to_string()
    } else {
        format!("{base}^{e}")
    }
}

fn term(digit: &str, pi: &str, e: i64) -> String {
    match (digit, e) {
        (_, 0) => digit.to_string(),
        ("1", _) => power(pi, e),
        _ => format!("{digit}*{}", power(pi, e)),
    }
}

fn render_digit(d: &RingData, r: &[BigInt], names: &[String]) -> String {
    let mut parts = Vec::new();
    for (b, c) in r.iter().enumerate().rev() {
        if c.is_zero() {
            continue;
        }
        let mono: Vec<String> = d.monomials[b]
            .iter()
            .zip(names)
            .filter(|(e, _)| **e > 0)
            .map(|(e, n)| power(n, *e as i64))
            .collect();
        let mono = mono.join("*");
        parts.push(match (c.is_one(), mono.is_empty()) {
            (_, true) => c.to_string(),
            (true, false) => mono,
            (false, false) => format!("{c}*{mono}"),
        });
    }
    if parts.len() == 1 {
        parts.pop().unwrap()
    } else {
        format!("({})", parts.join(" + "))
    }
}

impl PartialEq for ApproxElement {
    /// Representation equality: same family, valuation, precision and digits.
    fn eq(&self, other: &Self) -> bool {
        self.ring.family() == other.ring.family()
            && self.val == other.val
            && self.rel == other.rel
            && self.unit == other.unit
    }
}

impl Eq for ApproxElement {}

#[allow(dead_code)]
fn _assert_send_sync() {
    fn check<T: Send + Sync>() {}
    check::<ApproxElement>();
    check::<ApproxRing>();
}
