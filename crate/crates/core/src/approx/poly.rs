use std::fmt;

use num_bigint::BigInt;
use num_rational::BigRational;

use super::element::ApproxElement;
use super::ring::ApproxRing;
use crate::error::{Error, Result, Val};

/// A univariate polynomial with approximate coefficients, lowest degree first.
/// The length is a degree bound: leading coefficients may be weakly zero.
#[derive(Clone, PartialEq)]
pub struct ApproxPoly {
    ring: ApproxRing,
    coeffs: Vec<ApproxElement>,
}

impl ApproxPoly {
    pub fn new(ring: &ApproxRing, coeffs: Vec<ApproxElement>) -> Result<Self> {
        if coeffs.is_empty() {
            return Err(Error::EmptyPolynomial);
        }
        let coeffs = coeffs
            .into_iter()
            .map(|c| if c.ring().same_as(ring) { Ok(c) } else { c.coerce_into(ring) })
            .collect::<Result<_>>()?;
        Ok(ApproxPoly { ring: ring.clone(), coeffs })
    }

    pub fn from_ints(ring: &ApproxRing, coeffs: &[i64]) -> Result<Self> {
        let c = coeffs.iter().map(|&n| ring.coerce_int(n)).collect::<Result<_>>()?;
        Self::new(ring, c)
    }

    pub fn from_bigints(ring: &ApproxRing, coeffs: &[BigInt]) -> Result<Self> {
        let c = coeffs.iter().map(|n| ring.coerce_int(n.clone())).collect::<Result<_>>()?;
        Self::new(ring, c)
    }

    pub fn from_rationals(ring: &ApproxRing, coeffs: &[BigRational]) -> Result<Self> {
        let c = coeffs.iter().map(|q| ring.coerce_rational(q)).collect::<Result<_>>()?;
        Self::new(ring, c)
    }

    /// The zero polynomial of the given length, with precise-zero coefficients.
    pub fn zero(ring: &ApproxRing, len: usize) -> Self {
        ApproxPoly { ring: ring.clone(), coeffs: vec![ring.zero(); len.max(1)] }
    }

    pub fn ring(&self) -> &ApproxRing {
        &self.ring
    }

    pub fn coeffs(&self) -> &[ApproxElement] {
        &self.coeffs
    }

    pub fn coeff(&self, i: usize) -> Option<&ApproxElement> {
        self.coeffs.get(i)
    }

    pub fn len(&self) -> usize {
        self.coeffs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.coeffs.is_empty()
    }

    pub fn degree_bound(&self) -> usize {
        self.coeffs.len() - 1
    }

    /// Index of the highest coefficient that is not weakly zero.
    pub fn weak_degree(&self) -> Option<usize> {
        self.coeffs.iter().rposition(|c| !c.is_weakly_zero())
    }

    pub fn coerce_into(&self, ring: &ApproxRing) -> Result<Self> {
        let coeffs = self.coeffs.iter().map(|c| c.coerce_into(ring)).collect::<Result<_>>()?;
        Ok(ApproxPoly { ring: ring.clone(), coeffs })
    }

    pub fn truncate_abs(&self, n: i64) -> Self {
        let coeffs = self.coeffs.iter().map(|c| c.truncate_abs(n)).collect();
        ApproxPoly { ring: self.ring.clone(), coeffs }
    }

    pub fn lifted(&self) -> Self {
        let coeffs = self.coeffs.iter().map(ApproxElement::lifted).collect();
        ApproxPoly { ring: self.ring.clone(), coeffs }
    }

    /// Smallest absolute precision among the coefficients.
    pub fn abs_precision(&self) -> Val {
        self.coeffs.iter().map(|c| c.abs_precision()).min().unwrap_or(Val::Infinity)
    }

    fn with(&self, coeffs: Vec<ApproxElement>) -> Self {
        ApproxPoly { ring: self.ring.clone(), coeffs }
    }

    fn zip_with(
        &self,
        other: &ApproxPoly,
        op: impl Fn(&ApproxElement, &ApproxElement) -> Result<ApproxElement>,
    ) -> Result<Self> {
        let n = self.len().max(other.len());
        let z = self.ring.zero();
        let coeffs = (0..n)
            .map(|i| op(self.coeffs.get(i).unwrap_or(&z), other.coeffs.get(i).unwrap_or(&z)))
            .collect::<Result<_>>()?;
        Ok(self.with(coeffs))
    }

    pub fn add(&self, other: &ApproxPoly) -> Result<Self> {
        self.zip_with(other, ApproxElement::add)
    }

    pub fn sub(&self, other: &ApproxPoly) -> Result<Self> {
        self.zip_with(other, ApproxElement::sub)
    }

    pub fn neg(&self) -> Self {
        self.with(self.coeffs.iter().map(ApproxElement::neg).collect())
    }

    pub fn mul(&self, other: &ApproxPoly) -> Result<Self> {
        let mut out = vec![self.ring.zero(); self.len() + other.len() - 1];
        for (i, a) in self.coeffs.iter().enumerate() {
            if a.is_precise_zero() {
                continue;
            }
            for (j, b) in other.coeffs.iter().enumerate() {
                out[i + j] = out[i + j].add(&a.mul(b)?)?;
            }
        }
        Ok(self.with(out))
    }

    pub fn scale(&self, c: &ApproxElement) -> Result<Self> {
        let coeffs = self.coeffs.iter().map(|a| a.mul(c)).collect::<Result<_>>()?;
        Ok(self.with(coeffs))
    }

    pub fn derivative(&self) -> Result<Self> {
        if self.len() == 1 {
            return Ok(Self::zero(&self.ring, 1));
        }
        let coeffs = self.coeffs[1..]
            .iter()
            .enumerate()
            .map(|(i, c)| c.mul(&self.ring.coerce_int(i as i64 + 1)?))
            .collect::<Result<_>>()?;
        Ok(self.with(coeffs))
    }

    pub fn evaluate(&self, x: &ApproxElement) -> Result<ApproxElement> {
        let mut acc = self.ring.zero();
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(x)?.add(c)?;
        }
        Ok(acc)
    }

    /// `f(x + a)`.
    pub fn shift(&self, a: &ApproxElement) -> Result<Self> {
        let lin = self.with(vec![a.clone(), self.ring.one()]);
        let mut acc = Self::zero(&self.ring, 1);
        for c in self.coeffs.iter().rev() {
            acc = acc.mul(&lin)?.add(&self.with(vec![c.clone()]))?;
        }
        acc.coeffs.truncate(self.len());
        Ok(acc)
    }

    /// `pi^j * f(pi^k * x)`.
    pub fn scale_var(&self, j: i64, k: i64) -> Result<Self> {
        let pi = self.ring.uniformizer();
        let coeffs = self
            .coeffs
            .iter()
            .enumerate()
            .map(|(i, c)| {
                let e = j + k * i as i64;
                if c.is_precise_zero() {
                    Ok(c.clone())
                } else {
                    c.mul(&pi.pow(e)?)
                }
            })
            .collect::<Result<_>>()?;
        Ok(self.with(coeffs))
    }

    /// Division with remainder by a polynomial whose leading coefficient is
    /// not weakly zero.
    pub fn divrem(&self, g: &ApproxPoly) -> Result<(Self, Self)> {
        let dg = g.degree_bound();
        let lead_inv = g.coeffs[dg].inverse()?;
        let mut r = self.coeffs.clone();
        if r.len() <= dg {
            return Ok((Self::zero(&self.ring, 1), self.clone()));
        }
        let mut q = vec![self.ring.zero(); r.len() - dg];
        for t in (dg..r.len()).rev() {
            let c = r[t].mul(&lead_inv)?;
            for (i, gi) in g.coeffs.iter().enumerate() {
                r[t - dg + i] = r[t - dg + i].sub(&c.mul(gi)?)?;
            }
            q[t - dg] = c;
        }
        r.truncate(dg.max(1));
        Ok((self.with(q), self.with(r)))
    }

    pub fn rem(&self, g: &ApproxPoly) -> Result<Self> {
        Ok(self.divrem(g)?.1)
    }

    /// Coefficientwise weak equality, padding the shorter with precise zeros.
    pub fn weakly_equals(&self, other: &ApproxPoly) -> Result<bool> {
        Ok(self.sub(other)?.coeffs.iter().all(ApproxElement::is_weakly_zero))
    }
}

impl fmt::Display for ApproxPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let terms: Vec<String> = self
            .coeffs
            .iter()
            .enumerate()
            .rev()
            .filter(|(_, c)| !c.is_precise_zero())
            .map(|(i, c)| match i {
                0 => format!("({c})"),
                1 => format!("({c})*x"),
                _ => format!("({c})*x^{i}"),
            })
            .collect();
        if terms.is_empty() {
            write!(f, "0")
        } else {
            write!(f, "{}", terms.join(" + "))
        }
    }
}

impl fmt::Debug for ApproxPoly {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}
