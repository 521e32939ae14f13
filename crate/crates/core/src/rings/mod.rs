//! Exact p-adic rings, fields, extensions, elements and polynomials.
//!
//! A [`Context`] owns the dependency graph. Structures, elements and
//! polynomials are small copyable handles into it.

mod kinds;

use std::collections::HashMap;

use num_bigint::BigInt;
use num_rational::BigRational;

use crate::approx::{ApproxElement, ApproxPoly, ApproxRing, Decision, ExtMode, Family};
use crate::error::{Error, Result};
use crate::integer::{is_probable_prime, rational_valuation};
use crate::lazy::{Config, Dep, Graph, NodeId, Payload, TypeTag, UserFn};

pub use kinds::Kinds;

/// An exact ring, field or polynomial ring.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Structure(pub NodeId);

/// An exact element of a structure.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Elem(pub NodeId);

/// An exact univariate polynomial.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash)]
pub struct Poly(pub NodeId);

/// Metadata of a structure, fixed at construction.
#[derive(Clone, Debug)]
pub struct StructMeta {
    pub p: BigInt,
    pub ramification: i64,
    pub residue_degree: i64,
    pub is_field: bool,
    pub family: Family,
    pub base: Option<Structure>,
    pub defining: Option<Poly>,
    pub mode: Option<ExtMode>,
    /// For polynomial rings, the coefficient structure.
    pub coefficients: Option<Structure>,
}

pub struct Context {
    graph: Graph,
    kinds: Kinds,
    meta: HashMap<NodeId, StructMeta>,
    poly_rings: HashMap<Structure, Structure>,
    degrees: HashMap<NodeId, usize>,
}

impl Default for Context {
    fn default() -> Self {
        Self::new()
    }
}

impl Context {
    pub fn new() -> Self {
        Self::with_config(Config::default())
    }

    pub fn with_config(config: Config) -> Self {
        let mut graph = Graph::new(config);
        let kinds = Kinds::register(&mut graph);
        Context { graph, kinds, meta: HashMap::new(), poly_rings: HashMap::new(), degrees: HashMap::new() }
    }

    pub fn graph(&self) -> &Graph {
        &self.graph
    }

    pub fn graph_mut(&mut self) -> &mut Graph {
        &mut self.graph
    }

    pub fn kinds(&self) -> &Kinds {
        &self.kinds
    }

    pub fn max_epoch(&self) -> u32 {
        self.graph.config().max_epoch
    }

    pub fn meta(&self, s: Structure) -> &StructMeta {
        &self.meta[&s.0]
    }

    fn node(&mut self, tag: TypeTag, kind: crate::lazy::KindId, deps: Vec<Dep>, parent: Option<NodeId>) -> Result<NodeId> {
        self.graph.add_node(tag, kind, deps, 1, parent)
    }

    fn prime(&mut self, p: impl Into<BigInt>, is_field: bool) -> Result<Structure> {
        let p = p.into();
        if !is_probable_prime(&p) {
            return Err(Error::NotPrime(p.to_string()));
        }
        let family = Family::fresh();
        let id = self.node(
            TypeTag::ExactRing,
            self.kinds.prime,
            vec![
                Dep::Const(Payload::Int(p.clone())),
                Dep::Const(Payload::Family(family)),
                Dep::Const(Payload::Bool(is_field)),
            ],
            None,
        )?;
        self.meta.insert(
            id,
            StructMeta {
                p,
                ramification: 1,
                residue_degree: 1,
                is_field,
                family,
                base: None,
                defining: None,
                mode: None,
                coefficients: None,
            },
        );
        Ok(Structure(id))
    }

    /// `Q_p`; its epoch-`n` approximation has precision `2^n`.
    pub fn prime_field(&mut self, p: impl Into<BigInt>) -> Result<Structure> {
        self.prime(p, true)
    }

    /// `Z_p`.
    pub fn prime_ring(&mut self, p: impl Into<BigInt>) -> Result<Structure> {
        self.prime(p, false)
    }

    /// The extension of `base` defined by the monic polynomial `f`. The
    /// Eisenstein or inertial condition is checked at the first epoch where
    /// it is decidable, which becomes the structure's minimum epoch.
    pub fn extension(&mut self, base: Structure, f: Poly, mode: ExtMode) -> Result<Structure> {
        if self.poly_base(f) != base {
            return Err(Error::ParentMismatch("defining polynomial is not over the base".into()));
        }
        let degree = self.degree_bound(f) as i64;
        if degree < 2 {
            return Err(Error::DegreeTooSmall);
        }
        let mut min_epoch = None;
        for n in 1..=self.max_epoch() {
            let fr = self.approx_poly(f, n)?;
            let br = self.approx_ring(base, n)?;
            match br.check_defining(&fr, mode) {
                Decision::Valid => {
                    min_epoch = Some(n);
                    break;
                }
                Decision::Invalid(msg) => {
                    return Err(match mode {
                        _ if msg == "not monic" => Error::NotMonic,
                        ExtMode::Eisenstein => Error::NotEisenstein(msg),
                        ExtMode::Unramified => Error::NotInertial(msg),
                    })
                }
                Decision::Undecided(_) => {}
            }
        }
        let Some(min_epoch) = min_epoch else {
            return Err(Error::BudgetExhausted { epoch: self.max_epoch(), last_weak_valuation: None });
        };
        let family = Family::fresh();
        let id = self.graph.add_node(
            TypeTag::ExactRing,
            self.kinds.extension,
            vec![
                Dep::Const(Payload::Family(family)),
                Dep::Const(Payload::Mode(mode)),
                Dep::Node(base.0),
                Dep::Node(f.0),
            ],
            min_epoch,
            None,
        )?;
        let bm = self.meta(base).clone();
        let (e, fdeg) = match mode {
            ExtMode::Eisenstein => (bm.ramification * degree, bm.residue_degree),
            ExtMode::Unramified => (bm.ramification, bm.residue_degree * degree),
        };
        self.meta.insert(
            id,
            StructMeta {
                p: bm.p,
                ramification: e,
                residue_degree: fdeg,
                is_field: bm.is_field,
                family,
                base: Some(base),
                defining: Some(f),
                mode: Some(mode),
                coefficients: None,
            },
        );
        Ok(Structure(id))
    }

    /// The polynomial ring over `s`, created once per structure.
    pub fn poly_ring(&mut self, s: Structure) -> Result<Structure> {
        if let Some(r) = self.poly_rings.get(&s) {
            return Ok(*r);
        }
        let id = self.node(TypeTag::ExactPolyRing, self.kinds.poly_ring, vec![Dep::Node(s.0)], None)?;
        let mut m = self.meta(s).clone();
        m.coefficients = Some(s);
        self.meta.insert(id, m);
        self.poly_rings.insert(s, Structure(id));
        Ok(Structure(id))
    }

    fn elem(&mut self, s: Structure, kind: crate::lazy::KindId, deps: Vec<Dep>, min_epoch: u32) -> Result<Elem> {
        Ok(Elem(self.graph.add_node(TypeTag::ExactElement, kind, deps, min_epoch, Some(s.0))?))
    }

    pub fn int(&mut self, s: Structure, n: impl Into<BigInt>) -> Result<Elem> {
        self.elem(s, self.kinds.coerce_int, vec![Dep::Node(s.0), Dep::Const(Payload::Int(n.into()))], 1)
    }

    pub fn rational(&mut self, s: Structure, q: BigRational) -> Result<Elem> {
        if q.denom() == &BigInt::from(0) {
            return Err(Error::ZeroDenominator);
        }
        let m = self.meta(s);
        if let Some(v) = rational_valuation(&q, &m.p) {
            if v < 0 && !m.is_field {
                return Err(Error::NotIntegral(v * m.ramification));
            }
        }
        self.elem(s, self.kinds.coerce_rat, vec![Dep::Node(s.0), Dep::Const(Payload::Rat(q))], 1)
    }

    /// `a/b` as an element of `s`.
    pub fn ratio(&mut self, s: Structure, a: i64, b: i64) -> Result<Elem> {
        if b == 0 {
            return Err(Error::ZeroDenominator);
        }
        self.rational(s, BigRational::new(a.into(), b.into()))
    }

    /// Embeds an element of the immediate base of `s`.
    pub fn from_base(&mut self, s: Structure, x: Elem) -> Result<Elem> {
        if self.meta(s).base != Some(self.parent(x)) {
            return Err(Error::ParentMismatch("element is not in the base structure".into()));
        }
        self.elem(s, self.kinds.from_base, vec![Dep::Node(s.0), Dep::Node(x.0)], 1)
    }

    pub fn uniformizer(&mut self, s: Structure) -> Result<Elem> {
        self.elem(s, self.kinds.uniformizer, vec![Dep::Node(s.0)], 1)
    }

    pub fn generator(&mut self, s: Structure) -> Result<Elem> {
        if self.meta(s).base.is_none() {
            return Err(Error::InvalidArgument("prime rings have no generator".into()));
        }
        self.elem(s, self.kinds.generator, vec![Dep::Node(s.0)], 1)
    }

    /// The exact zero, whose approximations are precise zeros.
    pub fn zero(&mut self, s: Structure) -> Result<Elem> {
        self.elem(s, self.kinds.zero, vec![Dep::Node(s.0)], 1)
    }

    pub fn parent(&self, x: Elem) -> Structure {
        Structure(self.graph.node(x.0).parent.expect("elements have parents"))
    }

    /// Coerces `x` into `s` along the chain of base structures.
    pub fn coerce(&mut self, x: Elem, s: Structure) -> Result<Elem> {
        let from = self.parent(x);
        if from == s {
            return Ok(x);
        }
        let mut chain = vec![s];
        let mut cur = s;
        while let Some(b) = self.meta(cur).base {
            if b == from {
                let mut y = x;
                for t in chain.into_iter().rev() {
                    y = self.from_base(t, y)?;
                }
                return Ok(y);
            }
            chain.push(b);
            cur = b;
        }
        Err(Error::ParentMismatch("no coercion between these structures".into()))
    }

    fn common(&mut self, x: Elem, y: Elem) -> Result<(Structure, Elem, Elem)> {
        let (px, py) = (self.parent(x), self.parent(y));
        if px == py {
            return Ok((px, x, y));
        }
        if let Ok(x2) = self.coerce(x, py) {
            return Ok((py, x2, y));
        }
        let y2 = self.coerce(y, px)?;
        Ok((px, x, y2))
    }

    fn binary(&mut self, kind: crate::lazy::KindId, x: Elem, y: Elem, min_epoch: u32) -> Result<Elem> {
        let (s, x, y) = self.common(x, y)?;
        self.elem(s, kind, vec![Dep::Node(x.0), Dep::Node(y.0)], min_epoch)
    }

    pub fn add(&mut self, x: Elem, y: Elem) -> Result<Elem> {
        self.binary(self.kinds.add, x, y, 1)
    }

    pub fn sub(&mut self, x: Elem, y: Elem) -> Result<Elem> {
        self.binary(self.kinds.sub, x, y, 1)
    }

    pub fn mul(&mut self, x: Elem, y: Elem) -> Result<Elem> {
        self.binary(self.kinds.mul, x, y, 1)
    }

    pub fn neg(&mut self, x: Elem) -> Result<Elem> {
        let s = self.parent(x);
        self.elem(s, self.kinds.neg, vec![Dep::Node(x.0)], 1)
    }

    /// The first epoch at which `y` is not weakly zero.
    pub fn certify_nonzero(&mut self, y: Elem) -> Result<u32> {
        for n in 1..=self.max_epoch() {
            if !self.approx_elt(y, n)?.is_weakly_zero() {
                return Ok(n);
            }
        }
        Err(Error::UncertifiedDivisor(self.max_epoch()))
    }

    /// `x / y`; the minimum epoch is the first at which `y` is certified
    /// nonzero.
    pub fn div(&mut self, x: Elem, y: Elem) -> Result<Elem> {
        let (s, x, y) = self.common(x, y)?;
        let m = self.certify_nonzero(y)?;
        self.elem(s, self.kinds.div, vec![Dep::Node(x.0), Dep::Node(y.0)], m)
    }

    pub fn pow(&mut self, x: Elem, e: i64) -> Result<Elem> {
        let m = if e < 0 { self.certify_nonzero(x)? } else { 1 };
        let s = self.parent(x);
        self.elem(s, self.kinds.pow, vec![Dep::Node(x.0), Dep::Const(Payload::Index(e))], m)
    }

    /// An element of the shared user kind whose epoch-`n` approximation is
    /// `ga(n, deps)`.
    pub fn user_elem(&mut self, s: Structure, ga: UserFn, deps: Vec<Dep>, min_epoch: u32) -> Result<Elem> {
        Ok(Elem(self.graph.make_user_node(s.0, TypeTag::ExactElement, ga, deps, min_epoch)?))
    }

    /// A polynomial of the shared user kind over `s` with the given degree
    /// bound.
    pub fn user_poly(&mut self, s: Structure, ga: UserFn, deps: Vec<Dep>, min_epoch: u32, degree: usize) -> Result<Poly> {
        let r = self.poly_ring(s)?;
        let id = self.graph.make_user_node(r.0, TypeTag::ExactPoly, ga, deps, min_epoch)?;
        self.degrees.insert(id, degree);
        Ok(Poly(id))
    }

    /// `x` recomputed by a straight-line program from `inputs`.
    pub fn optimize(&mut self, x: Elem, inputs: &[Elem]) -> Result<Elem> {
        let ids: Vec<NodeId> = inputs.iter().map(|e| e.0).collect();
        Ok(Elem(self.graph.optimize(x.0, &ids)?))
    }

    // Polynomials.

    pub fn poly(&mut self, s: Structure, coeffs: &[Elem]) -> Result<Poly> {
        if coeffs.is_empty() {
            return Err(Error::EmptyPolynomial);
        }
        for c in coeffs {
            if self.parent(*c) != s {
                return Err(Error::ParentMismatch("coefficient from a different structure".into()));
            }
        }
        let r = self.poly_ring(s)?;
        let mut deps = vec![Dep::Node(r.0)];
        deps.extend(coeffs.iter().map(|c| Dep::Node(c.0)));
        self.poly_node(self.kinds.poly_new, s, deps, coeffs.len() - 1)
    }

    pub fn poly_from_ints(&mut self, s: Structure, coeffs: &[i64]) -> Result<Poly> {
        let c = coeffs.iter().map(|&n| self.int(s, n)).collect::<Result<Vec<_>>>()?;
        self.poly(s, &c)
    }

    pub fn poly_from_bigints(&mut self, s: Structure, coeffs: &[BigInt]) -> Result<Poly> {
        let c = coeffs.iter().map(|n| self.int(s, n.clone())).collect::<Result<Vec<_>>>()?;
        self.poly(s, &c)
    }

    pub fn poly_from_rationals(&mut self, s: Structure, coeffs: &[BigRational]) -> Result<Poly> {
        let c = coeffs.iter().map(|q| self.rational(s, q.clone())).collect::<Result<Vec<_>>>()?;
        self.poly(s, &c)
    }

    /// The coefficient structure of `f`.
    pub fn poly_base(&self, f: Poly) -> Structure {
        let r = self.graph.node(f.0).parent.expect("polynomials have parents");
        self.meta[&r].coefficients.expect("parent is a polynomial ring")
    }

    /// Static degree bound, fixed at construction.
    pub fn degree_bound(&self, f: Poly) -> usize {
        self.degrees[&f.0]
    }

    fn poly_node(&mut self, kind: crate::lazy::KindId, s: Structure, deps: Vec<Dep>, degree: usize) -> Result<Poly> {
        let r = self.poly_ring(s)?;
        let id = self.graph.add_node(TypeTag::ExactPoly, kind, deps, 1, Some(r.0))?;
        self.degrees.insert(id, degree);
        Ok(Poly(id))
    }

    fn same_base(&self, f: Poly, g: Poly) -> Result<Structure> {
        let s = self.poly_base(f);
        if self.poly_base(g) != s {
            return Err(Error::ParentMismatch("polynomials over different structures".into()));
        }
        Ok(s)
    }

    pub fn poly_add(&mut self, f: Poly, g: Poly) -> Result<Poly> {
        let s = self.same_base(f, g)?;
        let d = self.degree_bound(f).max(self.degree_bound(g));
        self.poly_node(self.kinds.poly_add, s, vec![Dep::Node(f.0), Dep::Node(g.0)], d)
    }

    pub fn poly_sub(&mut self, f: Poly, g: Poly) -> Result<Poly> {
        let s = self.same_base(f, g)?;
        let d = self.degree_bound(f).max(self.degree_bound(g));
        self.poly_node(self.kinds.poly_sub, s, vec![Dep::Node(f.0), Dep::Node(g.0)], d)
    }

    /// `f * g` as a single node.
    pub fn poly_mul(&mut self, f: Poly, g: Poly) -> Result<Poly> {
        let s = self.same_base(f, g)?;
        let d = self.degree_bound(f) + self.degree_bound(g);
        self.poly_node(self.kinds.poly_mul, s, vec![Dep::Node(f.0), Dep::Node(g.0)], d)
    }

    pub fn derivative(&mut self, f: Poly) -> Result<Poly> {
        let s = self.poly_base(f);
        let d = self.degree_bound(f).saturating_sub(1);
        self.poly_node(self.kinds.poly_deriv, s, vec![Dep::Node(f.0)], d)
    }

    /// `f(x + a)`.
    pub fn shift(&mut self, f: Poly, a: Elem) -> Result<Poly> {
        let s = self.poly_base(f);
        let a = self.coerce(a, s)?;
        let d = self.degree_bound(f);
        self.poly_node(self.kinds.poly_shift, s, vec![Dep::Node(f.0), Dep::Node(a.0)], d)
    }

    /// `pi^j * f(pi^k * x)`.
    pub fn scale_var(&mut self, f: Poly, j: i64, k: i64) -> Result<Poly> {
        let s = self.poly_base(f);
        self.poly_node(
            self.kinds.poly_scale_var,
            s,
            vec![Dep::Node(f.0), Dep::Const(Payload::Index(j)), Dep::Const(Payload::Index(k))],
            self.degree_bound(f),
        )
    }

    /// `c * f`.
    pub fn poly_scale(&mut self, f: Poly, c: Elem) -> Result<Poly> {
        let s = self.poly_base(f);
        let c = self.coerce(c, s)?;
        let d = self.degree_bound(f);
        self.poly_node(self.kinds.poly_scale, s, vec![Dep::Node(f.0), Dep::Node(c.0)], d)
    }

    pub fn evaluate(&mut self, f: Poly, a: Elem) -> Result<Elem> {
        let s = self.poly_base(f);
        let a = self.coerce(a, s)?;
        self.elem(s, self.kinds.poly_eval, vec![Dep::Node(f.0), Dep::Node(a.0)], 1)
    }

    /// The `i`-th coefficient. Coefficient nodes read the cached
    /// approximation of `f`, so extracting several of them computes `f` once
    /// per epoch.
    pub fn coefficient(&mut self, f: Poly, i: usize) -> Result<Elem> {
        let d = self.degree_bound(f);
        if i > d {
            return Err(Error::IndexOutOfRange { index: i, degree: d });
        }
        let s = self.poly_base(f);
        self.elem(s, self.kinds.poly_coeff, vec![Dep::Node(f.0), Dep::Const(Payload::Index(i as i64))], 1)
    }

    // Approximations.

    pub fn approx_ring(&mut self, s: Structure, n: u32) -> Result<ApproxRing> {
        Ok(self.graph.approximation(s.0, n)?.as_ring()?.clone())
    }

    pub fn approx_elt(&mut self, x: Elem, n: u32) -> Result<ApproxElement> {
        Ok(self.graph.approximation(x.0, n)?.as_elt()?.clone())
    }

    pub fn approx_poly(&mut self, f: Poly, n: u32) -> Result<ApproxPoly> {
        Ok(self.graph.approximation(f.0, n)?.as_poly()?.clone())
    }
}
