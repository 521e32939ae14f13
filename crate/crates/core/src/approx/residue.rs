//! The residue field `F_q` of an approximate ring and polynomials over it.
//!
//! Residue-field elements are coordinate vectors reduced modulo the
//! uniformizer, so only weight-zero coordinates survive, each in `[0, p)`.

use num_bigint::{BigInt, BigUint};
use num_traits::{One, Zero};

use super::element::ApproxElement;
use super::ring::{ApproxRing, RingData};

pub type Residue = Vec<BigInt>;

pub struct ResidueField<'a> {
    ring: &'a ApproxRing,
}

impl<'a> ResidueField<'a> {
    pub fn new(ring: &'a ApproxRing) -> Self {
        ResidueField { ring }
    }

    fn d(&self) -> &RingData {
        self.ring.data()
    }

    /// Size of the field.
    pub fn order(&self) -> BigUint {
        num_traits::pow(self.d().p.magnitude().clone(), self.d().f as usize)
    }

    pub fn zero(&self) -> Residue {
        self.d().int_zero()
    }

    pub fn one(&self) -> Residue {
        self.d().int_one()
    }

    pub fn from_int(&self, n: i64) -> Residue {
        let d = self.d();
        let mut v = d.int_zero();
        v[0] = BigInt::from(n);
        d.reduce(&mut v);
        d.int_truncate(&v, 1)
    }

    /// Image of an integral element; callers ensure its residue is known.
    pub fn reduce(&self, x: &ApproxElement) -> Residue {
        let x = x.coerce_into(self.ring).unwrap_or_else(|_| x.clone());
        match x.integral_coords() {
            Ok(c) => self.d().int_truncate(&c, 1),
            Err(_) => self.zero(),
        }
    }

    pub fn is_zero(&self, a: &Residue) -> bool {
        RingData::is_int_zero(a)
    }

    pub fn add(&self, a: &Residue, b: &Residue) -> Residue {
        let d = self.d();
        d.int_truncate(&d.int_add(a, b), 1)
    }

    pub fn sub(&self, a: &Residue, b: &Residue) -> Residue {
        let d = self.d();
        d.int_truncate(&d.int_sub(a, b), 1)
    }

    pub fn mul(&self, a: &Residue, b: &Residue) -> Residue {
        let d = self.d();
        d.int_truncate(&d.int_mul(a, b), 1)
    }

    pub fn inv(&self, a: &Residue) -> Option<Residue> {
        let d = self.d();
        d.int_inv(a).map(|x| d.int_truncate(&x, 1))
    }

    fn trim(&self, mut f: Vec<Residue>) -> Vec<Residue> {
        while f.last().is_some_and(|c| self.is_zero(c)) {
            f.pop();
        }
        f
    }

    /// Remainder of `a` by `b`; `b` must be nonzero.
    pub fn poly_rem(&self, a: &[Residue], b: &[Residue]) -> Vec<Residue> {
        let b = self.trim(b.to_vec());
        let mut r = self.trim(a.to_vec());
        let lead_inv = self.inv(b.last().expect("nonzero divisor")).expect("field");
        while r.len() >= b.len() {
            let shift = r.len() - b.len();
            let c = self.mul(r.last().unwrap(), &lead_inv);
            for (i, bi) in b.iter().enumerate() {
                r[shift + i] = self.sub(&r[shift + i], &self.mul(&c, bi));
            }
            r = self.trim(r);
        }
        r
    }

    pub fn poly_mul(&self, a: &[Residue], b: &[Residue]) -> Vec<Residue> {
        if a.is_empty() || b.is_empty() {
            return vec![];
        }
        let mut out = vec![self.zero(); a.len() + b.len() - 1];
        for (i, x) in a.iter().enumerate() {
            if self.is_zero(x) {
                continue;
            }
            for (j, y) in b.iter().enumerate() {
                out[i + j] = self.add(&out[i + j], &self.mul(x, y));
            }
        }
        self.trim(out)
    }

    pub fn poly_mulmod(&self, a: &[Residue], b: &[Residue], m: &[Residue]) -> Vec<Residue> {
        self.poly_rem(&self.poly_mul(a, b), m)
    }

    pub fn poly_powmod(&self, a: &[Residue], e: &BigUint, m: &[Residue]) -> Vec<Residue> {
        let mut result = self.poly_rem(&[self.one()], m);
        for i in (0..e.bits()).rev() {
            result = self.poly_mulmod(&result, &result, m);
            if e.bit(i) {
                result = self.poly_mulmod(&result, a, m);
            }
        }
        result
    }

    /// Monic greatest common divisor.
    pub fn poly_gcd(&self, a: &[Residue], b: &[Residue]) -> Vec<Residue> {
        let mut a = self.trim(a.to_vec());
        let mut b = self.trim(b.to_vec());
        while !b.is_empty() {
            let r = self.poly_rem(&a, &b);
            a = b;
            b = r;
        }
        if let Some(l) = a.last() {
            let li = self.inv(l).expect("field");
            a = a.iter().map(|c| self.mul(c, &li)).collect();
        }
        a
    }

    pub fn poly_sub(&self, a: &[Residue], b: &[Residue]) -> Vec<Residue> {
        let n = a.len().max(b.len());
        let z = self.zero();
        let out = (0..n)
            .map(|i| self.sub(a.get(i).unwrap_or(&z), b.get(i).unwrap_or(&z)))
            .collect();
        self.trim(out)
    }

    /// Ben-Or's irreducibility test over `F_q`.
    pub fn is_irreducible(&self, f: &[Residue]) -> bool {
        let f = self.trim(f.to_vec());
        if f.len() < 2 {
            return false;
        }
        let deg = f.len() - 1;
        let q = self.order();
        let x = vec![self.zero(), self.one()];
        let mut h = self.poly_rem(&x, &f);
        for _ in 0..deg / 2 {
            h = self.poly_powmod(&h, &q, &f);
            let g = self.poly_gcd(&self.poly_sub(&h, &x), &f);
            if g.len() > 1 {
                return false;
            }
        }
        true
    }

    /// Roots in `F_p` by exhaustive search; prime residue fields only.
    pub fn prime_roots(&self, f: &[Residue]) -> Vec<BigInt> {
        let d = self.d();
        if d.f != 1 {
            return vec![];
        }
        let p = d.p.clone();
        let mut roots = Vec::new();
        let mut r = BigInt::zero();
        while r < p {
            let mut acc = self.zero();
            let mut val = self.zero();
            val[0] = r.clone();
            for c in f.iter().rev() {
                acc = self.add(&self.mul(&acc, &val), c);
            }
            if self.is_zero(&acc) {
                roots.push(r.clone());
            }
            r += BigInt::one();
        }
        roots
    }
}
