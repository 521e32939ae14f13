//! Fixed-precision p-adic rings and towers of extensions.
//!
//! Every ring in a tower over `Z_p` is stored through a flattened `Z_p`-basis
//! of its ring of integers: products of generator powers, one factor per
//! extension step. Each basis element carries a weight in `[0, e)` (its
//! valuation in uniformizer units) and the valuation of `sum c_b * b` is
//! `min_b(e * v_p(c_b) + weight_b)`. Integral arithmetic is carried out on
//! coordinate vectors modulo `p^cap`, where `cap` exceeds the ring's precision
//! by a few guard digits so that exact divisions by the uniformizer stay
//! correct at the working precision.

use std::collections::HashMap;
use std::fmt;
use std::sync::atomic::{AtomicU64, Ordering};
use std::sync::{Arc, Mutex};

use num_bigint::{BigInt, BigUint};
use num_integer::Integer;
use num_rational::BigRational;
use num_traits::{One, Signed, Zero};

use super::element::ApproxElement;
use super::poly::ApproxPoly;
use super::residue::ResidueField;
use crate::error::{Error, Result, Val};
use crate::integer::{self, is_probable_prime, modulo, split_valuation};

const GUARD: i64 = 4;

/// Token shared by all precision variants of one exact ring.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct Family(u64);

impl Family {
    pub fn fresh() -> Self {
        static NEXT: AtomicU64 = AtomicU64::new(1);
        Family(NEXT.fetch_add(1, Ordering::Relaxed))
    }

    pub fn id(self) -> u64 {
        self.0
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, serde::Serialize)]
pub enum ExtMode {
    Unramified,
    Eisenstein,
}

/// Outcome of testing a defining polynomial at finite precision.
#[derive(Clone, Debug, PartialEq, Eq)]
pub enum Decision {
    Valid,
    Invalid(String),
    /// The polynomial is not known precisely enough to decide.
    Undecided(String),
}

/// Supplies the defining polynomial of an extension at a requested base
/// precision; lets [`ApproxRing::change_precision`] go upwards.
pub type DefiningSource = Arc<dyn Fn(i64) -> Result<ApproxPoly> + Send + Sync>;

/// A finite-precision p-adic field or ring of integers. Cheap to clone.
#[derive(Clone)]
pub struct ApproxRing(pub(crate) Arc<RingData>);

pub(crate) struct RingData {
    pub(crate) p: BigInt,
    pub(crate) family: Family,
    pub(crate) precision: i64,
    pub(crate) is_field: bool,
    pub(crate) level: Level,
    pub(crate) depth: usize,
    pub(crate) e: i64,
    pub(crate) f: i64,
    pub(crate) dim: usize,
    pub(crate) weights: Vec<i64>,
    /// Generator exponents per basis element, one entry per tower level.
    pub(crate) monomials: Vec<Vec<u32>>,
    pub(crate) cap: i64,
    pub(crate) modulus: BigInt,
    pub(crate) pi: Vec<BigInt>,
    pub(crate) delta: Vec<BigInt>,
    pub(crate) delta_inv: Vec<BigInt>,
    pub(crate) names: Vec<String>,
    pub(crate) source: Option<DefiningSource>,
    pow_cache: Mutex<HashMap<i64, BigInt>>,
}

pub(crate) enum Level {
    Prime,
    Ext {
        base: ApproxRing,
        mode: ExtMode,
        degree: usize,
        defining: ApproxPoly,
        /// Non-leading coefficients of the defining polynomial in base coordinates.
        g: Vec<Vec<BigInt>>,
        /// Inverse of `pi^degree / pi_base` for Eisenstein steps.
        eta_inv: Option<Vec<BigInt>>,
    },
}

impl PartialEq for ApproxRing {
    fn eq(&self, other: &Self) -> bool {
        self.same_as(other)
    }
}

impl fmt::Debug for ApproxRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{self}")
    }
}

impl fmt::Display for ApproxRing {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let d = &self.0;
        let name = if d.is_field { "Q" } else { "Z" };
        match &d.level {
            Level::Prime => write!(f, "{}_{} @ {}", name, d.p, d.precision),
            Level::Ext { base, mode, defining, .. } => write!(
                f,
                "{:?} extension of ({}) by {} @ {}",
                mode, base, defining, d.precision
            ),
        }
    }
}

impl ApproxRing {
    /// `Q_p` at `precision` digits with a fresh family.
    pub fn prime_field(p: impl Into<BigInt>, precision: i64) -> Result<Self> {
        Self::prime_in_family(p.into(), precision, true, Family::fresh())
    }

    /// `Z_p` at `precision` digits with a fresh family.
    pub fn prime_ring(p: impl Into<BigInt>, precision: i64) -> Result<Self> {
        Self::prime_in_family(p.into(), precision, false, Family::fresh())
    }

    pub fn prime_in_family(p: BigInt, precision: i64, is_field: bool, family: Family) -> Result<Self> {
        if !is_probable_prime(&p) {
            return Err(Error::NotPrime(p.to_string()));
        }
        if precision < 1 {
            return Err(Error::InvalidPrecision(precision));
        }
        let cap = precision + GUARD;
        let modulus = integer::pow(&p, cap);
        let data = RingData {
            pi: vec![p.clone()],
            p,
            family,
            precision,
            is_field,
            level: Level::Prime,
            depth: 0,
            e: 1,
            f: 1,
            dim: 1,
            weights: vec![0],
            monomials: vec![vec![]],
            cap,
            modulus,
            delta: vec![BigInt::one()],
            delta_inv: vec![BigInt::one()],
            names: vec![],
            source: None,
            pow_cache: Mutex::new(HashMap::new()),
        };
        Ok(ApproxRing(Arc::new(data)))
    }

    /// Extends by `g` with a fresh family.
    pub fn extend(&self, g: &ApproxPoly, mode: ExtMode) -> Result<Self> {
        self.extend_in_family(g, mode, Family::fresh())
    }

    pub fn extend_in_family(&self, g: &ApproxPoly, mode: ExtMode, family: Family) -> Result<Self> {
        if g.ring().family() != self.family() {
            return Err(Error::FamilyMismatch);
        }
        let g = if g.ring().precision() > self.precision() {
            g.coerce_into(self)?
        } else {
            g.clone()
        };
        match self.check_defining(&g, mode) {
            Decision::Valid => {}
            Decision::Invalid(msg) | Decision::Undecided(msg) => {
                return Err(match mode {
                    _ if msg == "not monic" => Error::NotMonic,
                    _ if msg == "degree below 2" => Error::DegreeTooSmall,
                    ExtMode::Eisenstein => Error::NotEisenstein(msg),
                    ExtMode::Unramified => Error::NotInertial(msg),
                })
            }
        }
        let base_ring = g.ring().clone();
        let degree = g.len() - 1;
        let abs = g
            .coeffs()
            .iter()
            .filter_map(|c| c.abs_precision().finite())
            .min()
            .unwrap_or(base_ring.precision())
            .min(base_ring.precision());
        let bd = &base_ring.0;
        let (precision, e, f) = match mode {
            ExtMode::Eisenstein => (abs * degree as i64, bd.e * degree as i64, bd.f),
            ExtMode::Unramified => (abs, bd.e, bd.f * degree as i64),
        };
        if precision < 1 {
            return Err(Error::InvalidPrecision(precision));
        }
        let dim = bd.dim * degree;
        let mut weights = Vec::with_capacity(dim);
        let mut monomials = Vec::with_capacity(dim);
        for i in 0..degree {
            for b in 0..bd.dim {
                weights.push(match mode {
                    ExtMode::Eisenstein => degree as i64 * bd.weights[b] + i as i64,
                    ExtMode::Unramified => bd.weights[b],
                });
                let mut m = bd.monomials[b].clone();
                m.push(i as u32);
                monomials.push(m);
            }
        }
        let cap = (precision + e - 1) / e + GUARD;
        let modulus = integer::pow(&bd.p, cap);
        let gcoords: Vec<Vec<BigInt>> = g.coeffs()[..degree]
            .iter()
            .map(|c| {
                let mut v = bd.integral_coords(c);
                for x in v.iter_mut() {
                    *x = modulo(x, &modulus);
                }
                v
            })
            .collect();
        let depth = bd.depth + 1;
        let mut names = bd.names.clone();
        names.push(match mode {
            ExtMode::Eisenstein => "pi".to_string(),
            ExtMode::Unramified => "a".to_string(),
        });
        let mut data = RingData {
            p: bd.p.clone(),
            family,
            precision,
            is_field: bd.is_field,
            level: Level::Ext {
                base: base_ring.clone(),
                mode,
                degree,
                defining: g.clone(),
                g: gcoords.clone(),
                eta_inv: None,
            },
            depth,
            e,
            f,
            dim,
            weights,
            monomials,
            cap,
            modulus,
            pi: vec![],
            delta: vec![],
            delta_inv: vec![],
            names,
            source: None,
            pow_cache: Mutex::new(HashMap::new()),
        };
        match mode {
            ExtMode::Unramified => {
                data.pi = data.embed_coords(&bd.pi);
                data.delta = data.embed_coords(&bd.delta);
                data.delta_inv = data.embed_coords(&bd.delta_inv);
            }
            ExtMode::Eisenstein => {
                let mut pi = vec![BigInt::zero(); dim];
                pi[bd.dim] = BigInt::one();
                data.pi = pi;
                let mut eta = vec![BigInt::zero(); dim];
                for (i, gi) in gcoords.iter().enumerate() {
                    let q = bd.int_div_pi_pow(gi, 1);
                    for (b, c) in q.into_iter().enumerate() {
                        eta[i * bd.dim + b] = modulo(&-c, &data.modulus);
                    }
                }
                let eta_inv = data
                    .int_inv(&eta)
                    .ok_or_else(|| Error::NotEisenstein("constant term is not a uniformizer".into()))?;
                let eta_inv_pow = data.int_pow(&eta_inv, &BigUint::from(bd.e as u64));
                let eta_pow = data.int_pow(&eta, &BigUint::from(bd.e as u64));
                data.delta = data.int_mul(&data.embed_coords(&bd.delta), &eta_inv_pow);
                data.delta_inv = data.int_mul(&data.embed_coords(&bd.delta_inv), &eta_pow);
                if let Level::Ext { eta_inv: slot, .. } = &mut data.level {
                    *slot = Some(eta_inv);
                }
            }
        }
        Ok(ApproxRing(Arc::new(data)))
    }

    /// Tests `g` against the unramified or Eisenstein conditions at the
    /// precision it carries.
    pub fn check_defining(&self, g: &ApproxPoly, mode: ExtMode) -> Decision {
        let coeffs = g.coeffs();
        if coeffs.len() < 3 {
            return Decision::Invalid("degree below 2".into());
        }
        let lead = coeffs.last().unwrap();
        match lead.sub(&ApproxElement::one(lead.ring())) {
            Ok(d) if d.is_weakly_zero() => {}
            _ => return Decision::Invalid("not monic".into()),
        }
        let lower = &coeffs[..coeffs.len() - 1];
        match mode {
            ExtMode::Eisenstein => {
                let c0 = &lower[0];
                match (c0.is_precise_zero(), c0.valuation_known(), c0.weak_valuation()) {
                    (true, _, _) => return Decision::Invalid("constant term is zero".into()),
                    (_, true, Val::Finite(1)) => {}
                    (_, true, v) => {
                        return Decision::Invalid(format!("constant term has valuation {v}"))
                    }
                    (_, false, Val::Finite(v)) if v >= 2 => {
                        return Decision::Invalid("constant term has valuation at least 2".into())
                    }
                    _ => return Decision::Undecided("constant term not yet resolved".into()),
                }
                for c in &lower[1..] {
                    if let Some(d) = min_valuation_violation(c, 1) {
                        return d;
                    }
                }
                Decision::Valid
            }
            ExtMode::Unramified => {
                for c in lower {
                    if let Some(d) = min_valuation_violation(c, 0) {
                        return d;
                    }
                }
                for c in coeffs {
                    if let Val::Finite(a) = c.abs_precision() {
                        if a < 1 {
                            return Decision::Undecided("residue not yet known".into());
                        }
                    }
                }
                let field = ResidueField::new(self);
                let residues: Vec<_> = coeffs.iter().map(|c| field.reduce(c)).collect();
                if field.is_irreducible(&residues) {
                    Decision::Valid
                } else {
                    Decision::Invalid("reducible modulo the uniformizer".into())
                }
            }
        }
    }

    /// A ring of the same family at another precision. Going down truncates
    /// the defining data; going up needs a [`DefiningSource`].
    pub fn change_precision(&self, precision: i64) -> Result<Self> {
        if precision < 1 {
            return Err(Error::InvalidPrecision(precision));
        }
        if precision == self.precision() {
            return Ok(self.clone());
        }
        let d = &self.0;
        let ring = match &d.level {
            Level::Prime => Self::prime_in_family(d.p.clone(), precision, d.is_field, d.family)?,
            Level::Ext { base, mode, defining, .. } => {
                let scale = match mode {
                    ExtMode::Eisenstein => defining.len() as i64 - 1,
                    ExtMode::Unramified => 1,
                };
                let base_prec = (precision + scale - 1) / scale;
                let g = if precision < d.precision {
                    let nb = base.change_precision(base_prec.min(base.precision()))?;
                    defining.coerce_into(&nb)?.truncate_abs(base_prec)
                } else {
                    let source = d.source.as_ref().ok_or(Error::PrecisionUnavailable {
                        requested: precision,
                        available: d.precision,
                    })?;
                    source(base_prec)?
                };
                let nb = g.ring().clone();
                let ring = nb.extend_in_family(&g, *mode, d.family)?;
                if ring.precision() < precision.min(d.precision) {
                    return Err(Error::PrecisionUnavailable {
                        requested: precision,
                        available: ring.precision(),
                    });
                }
                ring
            }
        };
        Ok(match &d.source {
            Some(s) => ring.with_source(s.clone()),
            None => ring,
        })
    }

    /// Attaches a defining-polynomial source to an extension ring.
    pub fn with_source(self, source: DefiningSource) -> Self {
        let d = &self.0;
        let data = RingData {
            p: d.p.clone(),
            family: d.family,
            precision: d.precision,
            is_field: d.is_field,
            level: match &d.level {
                Level::Prime => Level::Prime,
                Level::Ext { base, mode, degree, defining, g, eta_inv } => Level::Ext {
                    base: base.clone(),
                    mode: *mode,
                    degree: *degree,
                    defining: defining.clone(),
                    g: g.clone(),
                    eta_inv: eta_inv.clone(),
                },
            },
            depth: d.depth,
            e: d.e,
            f: d.f,
            dim: d.dim,
            weights: d.weights.clone(),
            monomials: d.monomials.clone(),
            cap: d.cap,
            modulus: d.modulus.clone(),
            pi: d.pi.clone(),
            delta: d.delta.clone(),
            delta_inv: d.delta_inv.clone(),
            names: d.names.clone(),
            source: Some(source),
            pow_cache: Mutex::new(HashMap::new()),
        };
        ApproxRing(Arc::new(data))
    }

    pub fn prime(&self) -> &BigInt {
        &self.0.p
    }

    /// Relative precision cap in uniformizer digits.
    pub fn precision(&self) -> i64 {
        self.0.precision
    }

    pub fn family(&self) -> Family {
        self.0.family
    }

    pub fn is_field(&self) -> bool {
        self.0.is_field
    }

    /// Absolute ramification index.
    pub fn ramification(&self) -> i64 {
        self.0.e
    }

    /// Absolute residue degree.
    pub fn residue_degree(&self) -> i64 {
        self.0.f
    }

    /// Degree over the prime ring.
    pub fn absolute_degree(&self) -> usize {
        self.0.dim
    }

    pub fn depth(&self) -> usize {
        self.0.depth
    }

    pub fn base(&self) -> Option<&ApproxRing> {
        match &self.0.level {
            Level::Prime => None,
            Level::Ext { base, .. } => Some(base),
        }
    }

    pub fn mode(&self) -> Option<ExtMode> {
        match &self.0.level {
            Level::Prime => None,
            Level::Ext { mode, .. } => Some(*mode),
        }
    }

    pub fn defining_polynomial(&self) -> Option<&ApproxPoly> {
        match &self.0.level {
            Level::Prime => None,
            Level::Ext { defining, .. } => Some(defining),
        }
    }

    /// Same family and same precision.
    pub fn same_as(&self, other: &ApproxRing) -> bool {
        Arc::ptr_eq(&self.0, &other.0)
            || (self.family() == other.family() && self.precision() == other.precision())
    }

    pub fn one(&self) -> ApproxElement {
        ApproxElement::one(self)
    }

    pub fn zero(&self) -> ApproxElement {
        ApproxElement::precise_zero(self)
    }

    pub fn uniformizer(&self) -> ApproxElement {
        ApproxElement::from_parts(self, Some(1), self.precision(), self.0.int_one())
    }

    /// The generator of the top extension step.
    pub fn generator(&self) -> Result<ApproxElement> {
        match &self.0.level {
            Level::Prime => Err(Error::InvalidArgument("prime rings have no generator".into())),
            Level::Ext { mode: ExtMode::Eisenstein, .. } => Ok(self.uniformizer()),
            Level::Ext { base, .. } => {
                let mut a = vec![BigInt::zero(); self.0.dim];
                a[base.0.dim] = BigInt::one();
                Ok(ApproxElement::from_integral(self, a, self.precision(), 0))
            }
        }
    }

    pub fn coerce_int(&self, n: impl Into<BigInt>) -> Result<ApproxElement> {
        self.coerce_rational(&BigRational::from_integer(n.into()))
    }

    /// `a/b` with relative precision equal to the ring precision.
    pub fn coerce_rational(&self, x: &BigRational) -> Result<ApproxElement> {
        if x.denom().is_zero() {
            return Err(Error::ZeroDenominator);
        }
        if x.is_zero() {
            return Ok(self.zero());
        }
        let d = &self.0;
        let (va, a) = split_valuation(x.numer(), &d.p);
        let (vb, b) = split_valuation(x.denom(), &d.p);
        let vp = va - vb;
        if !d.is_field && vp < 0 {
            return Err(Error::NotIntegral(vp * d.e));
        }
        let binv = integer::mod_inverse(&b, &d.modulus).expect("unit denominator");
        let mut unit = vec![BigInt::zero(); d.dim];
        unit[0] = modulo(&(a * binv), &d.modulus);
        if d.e > 1 && vp != 0 {
            let base = if vp > 0 { &d.delta } else { &d.delta_inv };
            let dp = d.int_pow(base, &BigUint::from(vp.unsigned_abs()));
            unit = d.int_mul(&unit, &dp);
        }
        let unit = d.int_truncate(&unit, d.precision);
        Ok(ApproxElement::from_parts(self, Some(vp * d.e), d.precision, unit))
    }

    /// Embeds an element of the immediate base ring.
    pub fn embed_from_base(&self, x: &ApproxElement) -> Result<ApproxElement> {
        let d = &self.0;
        let Level::Ext { base, mode, degree, eta_inv, .. } = &d.level else {
            return Err(Error::InvalidArgument("prime rings have no base".into()));
        };
        if x.ring().family() != base.family() {
            return Err(Error::FamilyMismatch);
        }
        if x.is_precise_zero() {
            return Ok(self.zero());
        }
        let v = x.weak_valuation().finite().unwrap();
        let (scale, unit) = match mode {
            ExtMode::Unramified => (1, d.embed_coords(x.unit_coords())),
            ExtMode::Eisenstein => {
                let eta_inv = eta_inv.as_ref().unwrap();
                let mut u = d.embed_coords(x.unit_coords());
                if v != 0 {
                    let factor = if v > 0 {
                        d.int_pow(eta_inv, &BigUint::from(v as u64))
                    } else {
                        let eta = d.int_inv(eta_inv).expect("unit");
                        d.int_pow(&eta, &BigUint::from(v.unsigned_abs()))
                    };
                    u = d.int_mul(&u, &factor);
                }
                (*degree as i64, u)
            }
        };
        let rel = (x.rel_precision() * scale).min(d.precision);
        let unit = d.int_truncate(&unit, rel);
        Ok(ApproxElement::from_parts(self, Some(v * scale), rel, unit))
    }

    pub(crate) fn data(&self) -> &RingData {
        &self.0
    }
}

fn min_valuation_violation(c: &ApproxElement, min: i64) -> Option<Decision> {
    if c.is_precise_zero() {
        return None;
    }
    let v = c.weak_valuation().finite().unwrap();
    if v >= min {
        None
    } else if c.valuation_known() {
        Some(Decision::Invalid(format!("coefficient of valuation {v} below {min}")))
    } else {
        Some(Decision::Undecided("coefficient valuation not yet resolved".into()))
    }
}

// Integral arithmetic on flattened coordinate vectors.
impl RingData {
    pub(crate) fn int_zero(&self) -> Vec<BigInt> {
        vec![BigInt::zero(); self.dim]
    }

    pub(crate) fn int_one(&self) -> Vec<BigInt> {
        let mut v = self.int_zero();
        v[0] = BigInt::one();
        v
    }

    pub(crate) fn is_int_zero(v: &[BigInt]) -> bool {
        v.iter().all(Zero::is_zero)
    }

    pub(crate) fn ppow(&self, n: i64) -> BigInt {
        let mut cache = self.pow_cache.lock().unwrap();
        cache.entry(n).or_insert_with(|| integer::pow(&self.p, n)).clone()
    }

    fn is_two(&self) -> bool {
        self.p == BigInt::from(2)
    }

    /// `a mod p^n` for non-negative `a`.
    pub(crate) fn mod_ppow(&self, a: &BigInt, n: i64) -> BigInt {
        if n <= 0 {
            return BigInt::zero();
        }
        if a.is_zero() {
            return BigInt::zero();
        }
        if self.is_two() && !a.is_negative() {
            if a.bits() <= n as u64 {
                return a.clone();
            }
            let mask = (BigInt::one() << (n as usize)) - 1;
            return a & mask;
        }
        modulo(a, &self.ppow(n))
    }

    fn vp(&self, a: &BigInt) -> i64 {
        debug_assert!(!a.is_zero());
        if self.is_two() {
            return a.trailing_zeros().unwrap() as i64;
        }
        split_valuation(a, &self.p).0
    }

    pub(crate) fn reduce(&self, v: &mut [BigInt]) {
        for c in v.iter_mut() {
            if c.is_negative() || *c >= self.modulus {
                *c = modulo(c, &self.modulus);
            }
        }
    }

    pub(crate) fn int_add(&self, a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
        let mut r: Vec<BigInt> = a.iter().zip(b).map(|(x, y)| x + y).collect();
        self.reduce(&mut r);
        r
    }

    pub(crate) fn int_sub(&self, a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
        let mut r: Vec<BigInt> = a.iter().zip(b).map(|(x, y)| x - y).collect();
        self.reduce(&mut r);
        r
    }

    pub(crate) fn int_neg(&self, a: &[BigInt]) -> Vec<BigInt> {
        let mut r: Vec<BigInt> = a.iter().map(|x| -x).collect();
        self.reduce(&mut r);
        r
    }

    pub(crate) fn int_mul(&self, a: &[BigInt], b: &[BigInt]) -> Vec<BigInt> {
        match &self.level {
            Level::Prime => {
                let mut r = vec![&a[0] * &b[0]];
                self.reduce(&mut r);
                r
            }
            Level::Ext { base, degree, g, .. } => {
                let bd = &base.0;
                let db = bd.dim;
                let d = *degree;
                let chunk = |v: &[BigInt], i: usize| v[i * db..(i + 1) * db].to_vec();
                let mut prod = vec![vec![BigInt::zero(); db]; 2 * d - 1];
                for i in 0..d {
                    let ai = chunk(a, i);
                    if RingData::is_int_zero(&ai) {
                        continue;
                    }
                    for j in 0..d {
                        let bj = chunk(b, j);
                        if RingData::is_int_zero(&bj) {
                            continue;
                        }
                        let t = bd.int_mul(&ai, &bj);
                        for (x, y) in prod[i + j].iter_mut().zip(t) {
                            *x += y;
                        }
                    }
                }
                for t in (d..2 * d - 1).rev() {
                    let mut c = std::mem::take(&mut prod[t]);
                    bd.reduce(&mut c);
                    if RingData::is_int_zero(&c) {
                        continue;
                    }
                    for (i, gi) in g.iter().enumerate() {
                        let m = bd.int_mul(&c, gi);
                        for (x, y) in prod[t - d + i].iter_mut().zip(m) {
                            *x -= y;
                        }
                    }
                }
                let mut r: Vec<BigInt> = prod.into_iter().take(d).flatten().collect();
                self.reduce(&mut r);
                r
            }
        }
    }

    pub(crate) fn int_pow(&self, a: &[BigInt], exp: &BigUint) -> Vec<BigInt> {
        let mut result = self.int_one();
        let bits = exp.bits();
        for i in (0..bits).rev() {
            result = self.int_mul(&result, &result);
            if exp.bit(i) {
                result = self.int_mul(&result, a);
            }
        }
        result
    }

    /// Valuation in uniformizer digits, `None` when zero modulo `p^cap`.
    pub(crate) fn int_val(&self, a: &[BigInt]) -> Option<i64> {
        a.iter()
            .zip(&self.weights)
            .filter(|(c, _)| !c.is_zero())
            .map(|(c, w)| self.e * self.vp(c) + w)
            .min()
    }

    /// Reduces modulo `pi^n`.
    pub(crate) fn int_truncate(&self, a: &[BigInt], n: i64) -> Vec<BigInt> {
        a.iter()
            .zip(&self.weights)
            .map(|(c, w)| {
                let digits = Integer::div_floor(&(n - w + self.e - 1), &self.e).min(self.cap);
                self.mod_ppow(c, digits)
            })
            .collect()
    }

    pub(crate) fn int_pi_pow(&self, j: i64) -> Vec<BigInt> {
        if j >= self.e * self.cap {
            return self.int_zero();
        }
        match self.level {
            Level::Prime => vec![self.ppow(j)],
            _ => self.int_pow(&self.pi, &BigUint::from(j as u64)),
        }
    }

    pub(crate) fn int_mul_pi_pow(&self, a: &[BigInt], j: i64) -> Vec<BigInt> {
        if j == 0 {
            return a.to_vec();
        }
        match self.level {
            Level::Prime => {
                let mut r = if self.is_two() {
                    vec![&a[0] << (j as usize)]
                } else {
                    vec![&a[0] * self.ppow(j)]
                };
                self.reduce(&mut r);
                r
            }
            _ => self.int_mul(a, &self.int_pi_pow(j)),
        }
    }

    /// Exact division by `pi^s`; requires `int_val(a) >= s`.
    pub(crate) fn int_div_pi_pow(&self, a: &[BigInt], s: i64) -> Vec<BigInt> {
        if s == 0 {
            return a.to_vec();
        }
        let q = s / self.e;
        let r = s % self.e;
        let mut out: Vec<BigInt> = if q == 0 {
            a.to_vec()
        } else if self.is_two() {
            a.iter().map(|c| c >> (q as usize)).collect()
        } else {
            let pq = self.ppow(q);
            a.iter().map(|c| c / &pq).collect()
        };
        if r > 0 {
            let t = self.int_mul(&self.int_mul_pi_pow(&out, self.e - r), &self.delta);
            out = t.iter().map(|c| c / &self.p).collect();
        }
        out
    }

    /// Inverse of a unit, `None` if `a` is not a unit.
    pub(crate) fn int_inv(&self, a: &[BigInt]) -> Option<Vec<BigInt>> {
        if let Level::Prime = self.level {
            return integer::mod_inverse(&a[0], &self.modulus).map(|x| vec![x]);
        }
        if self.int_val(a) != Some(0) {
            return None;
        }
        let q = num_traits::pow(self.p.magnitude().clone(), self.f as usize);
        let mut y = self.int_pow(a, &(q - BigUint::from(2u32)));
        let one = self.int_one();
        let max_iter = 2 * (64 - (self.e * self.cap).leading_zeros() as usize) + 8;
        for _ in 0..max_iter {
            let r = self.int_sub(&one, &self.int_mul(a, &y));
            if RingData::is_int_zero(&r) {
                return Some(y);
            }
            y = self.int_add(&y, &self.int_mul(&y, &r));
        }
        None
    }

    pub(crate) fn embed_coords(&self, base: &[BigInt]) -> Vec<BigInt> {
        let mut v = self.int_zero();
        for (i, c) in base.iter().enumerate() {
            v[i] = modulo(c, &self.modulus);
        }
        v
    }

    /// Integral coordinates of an element with non-negative weak valuation
    /// (the representative with unknown digits set to zero).
    pub(crate) fn integral_coords(&self, x: &ApproxElement) -> Vec<BigInt> {
        match x.weak_valuation() {
            Val::Infinity => self.int_zero(),
            Val::Finite(v) => {
                debug_assert!(v >= 0);
                if x.rel_precision() == 0 {
                    self.int_zero()
                } else {
                    self.int_mul_pi_pow(x.unit_coords(), v)
                }
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn q(p: i64, w: i64) -> ApproxRing {
        ApproxRing::prime_field(p, w).unwrap()
    }

    fn poly(r: &ApproxRing, c: &[i64]) -> ApproxPoly {
        ApproxPoly::from_ints(r, c).unwrap()
    }

    #[test]
    fn prime_constructor() {
        let r = q(2, 10);
        assert_eq!(r.precision(), 10);
        assert_eq!(r.prime(), &BigInt::from(2));
        assert!(matches!(ApproxRing::prime_field(4, 10), Err(Error::NotPrime(_))));
        assert!(matches!(ApproxRing::prime_field(2, 0), Err(Error::InvalidPrecision(0))));
    }

    #[test]
    fn unramified_quadratic() {
        let r = q(2, 8);
        let q4 = r.extend(&poly(&r, &[1, 1, 1]), ExtMode::Unramified).unwrap();
        assert_eq!((q4.ramification(), q4.residue_degree()), (1, 2));
        assert_eq!(q4.precision(), 8);
        // a^2 + a + 1 = 0
        let a = q4.generator().unwrap();
        let lhs = a.mul(&a).unwrap().add(&a).unwrap().add(&q4.one()).unwrap();
        assert!(lhs.is_weakly_zero());
    }

    #[test]
    fn eisenstein_quadratic() {
        let r = q(2, 8);
        let k = r.extend(&poly(&r, &[-2, 0, 1]), ExtMode::Eisenstein).unwrap();
        assert_eq!((k.ramification(), k.residue_degree()), (2, 1));
        assert_eq!(k.precision(), 16);
        let pi = k.uniformizer();
        let sq = pi.mul(&pi).unwrap();
        assert_eq!(sq.weak_valuation(), Val::Finite(2));
        let two = k.coerce_int(2).unwrap();
        assert!(sq.weakly_equals(&two).unwrap());
        assert!(matches!(
            r.extend(&poly(&r, &[-3, 0, 1]), ExtMode::Eisenstein),
            Err(Error::NotEisenstein(_))
        ));
        assert!(matches!(
            r.extend(&poly(&r, &[1, 1, 0]), ExtMode::Eisenstein),
            Err(Error::NotMonic)
        ));
        assert!(matches!(
            r.extend(&poly(&r, &[1, 0, 1]), ExtMode::Unramified),
            Err(Error::NotInertial(_))
        ));
    }

    #[test]
    fn eisenstein_with_composite_constant() {
        let r = q(2, 8);
        assert!(r.extend(&poly(&r, &[-6, 0, 1]), ExtMode::Eisenstein).is_ok());
        assert!(r.extend(&poly(&r, &[2, 4, 1]), ExtMode::Eisenstein).is_ok());
    }

    #[test]
    fn change_precision_keeps_family() {
        let r = q(2, 4);
        let r8 = r.change_precision(8).unwrap();
        assert_eq!(r8.family(), r.family());
        assert_eq!(r8.precision(), 8);
        let one = r8.one();
        let down = one.coerce_into(&r).unwrap();
        assert_eq!(down.rel_precision(), 4);
        assert_eq!(down.to_string(), "1 + O(2^4)");

        let b = q(2, 8);
        let k = b.extend(&poly(&b, &[-2, 0, 1]), ExtMode::Eisenstein).unwrap();
        let k4 = k.change_precision(8).unwrap();
        assert_eq!(k4.family(), k.family());
        assert_eq!(k4.precision(), 8);
        assert!(matches!(k.change_precision(32), Err(Error::PrecisionUnavailable { .. })));
        let src: DefiningSource = Arc::new(move |w| {
            let base = ApproxRing::prime_in_family(BigInt::from(2), w, true, b.family())?;
            ApproxPoly::from_ints(&base, &[-2, 0, 1])
        });
        let k32 = k.clone().with_source(src).change_precision(32).unwrap();
        assert_eq!(k32.precision(), 32);
        assert_eq!(k32.family(), k.family());
    }

    #[test]
    fn tower_depth_two() {
        let r = q(3, 6);
        assert!(r.extend(&poly(&r, &[-1, 0, 1]), ExtMode::Unramified).is_err());
        let u = r.extend(&poly(&r, &[1, 0, 1]), ExtMode::Unramified).unwrap();
        let g = ApproxPoly::new(
            &u,
            vec![u.coerce_int(3).unwrap(), u.zero(), u.one()],
        )
        .unwrap();
        let k = u.extend(&g, ExtMode::Eisenstein).unwrap();
        assert_eq!((k.ramification(), k.residue_degree()), (2, 2));
        assert_eq!(k.absolute_degree(), 4);
        let pi = k.uniformizer();
        let m3 = k.coerce_int(-3).unwrap();
        assert!(pi.mul(&pi).unwrap().weakly_equals(&m3).unwrap());
        let a = k.embed_from_base(&u.generator().unwrap()).unwrap();
        let a2 = a.mul(&a).unwrap();
        assert!(a2.weakly_equals(&k.coerce_int(-1).unwrap()).unwrap());
        let x = pi.add(&a).unwrap().div(&pi.mul(&a).unwrap()).unwrap();
        let back = x.mul(&pi).unwrap().mul(&a).unwrap();
        assert!(back.weakly_equals(&pi.add(&a).unwrap()).unwrap());
    }
}
