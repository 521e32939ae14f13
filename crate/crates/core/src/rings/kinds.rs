//! Built-in kinds of exact structures, elements and polynomials.

use std::sync::Arc;

use crate::approx::{ApproxPoly, ApproxRing};
use crate::error::{Error, Result};
use crate::lazy::{epoch_precision, Approx, GetApproxFn, Graph, KindId, KindSpec, TypeTag};

#[derive(Clone, Copy, Debug)]
pub struct Kinds {
    pub prime: KindId,
    pub extension: KindId,
    pub poly_ring: KindId,
    pub coerce_int: KindId,
    pub coerce_rat: KindId,
    pub from_base: KindId,
    pub uniformizer: KindId,
    pub generator: KindId,
    pub zero: KindId,
    pub add: KindId,
    pub sub: KindId,
    pub mul: KindId,
    pub neg: KindId,
    pub div: KindId,
    pub pow: KindId,
    pub poly_new: KindId,
    pub poly_add: KindId,
    pub poly_sub: KindId,
    pub poly_mul: KindId,
    pub poly_deriv: KindId,
    pub poly_shift: KindId,
    pub poly_scale_var: KindId,
    pub poly_scale: KindId,
    pub poly_eval: KindId,
    pub poly_coeff: KindId,
}

const RING: Option<TypeTag> = Some(TypeTag::ExactRing);
const ELT: Option<TypeTag> = Some(TypeTag::ExactElement);
const POLY: Option<TypeTag> = Some(TypeTag::ExactPoly);
const CONST: Option<TypeTag> = None;

fn elt(x: crate::approx::ApproxElement) -> Result<Approx> {
    Ok(Approx::Elt(x))
}

fn poly(f: ApproxPoly) -> Result<Approx> {
    Ok(Approx::Poly(f))
}

impl Kinds {
    pub(crate) fn register(g: &mut Graph) -> Kinds {
        let mut reg = |name: &str, tag: TypeTag, deps: Option<Vec<Option<TypeTag>>>, f: GetApproxFn| {
            g.register_kind(KindSpec {
                name: name.into(),
                tag,
                arity: deps.as_ref().map(Vec::len),
                dep_tags: deps,
                get_approx: f,
            })
        };
        use TypeTag::*;
        Kinds {
            prime: reg(
                "prime",
                ExactRing,
                Some(vec![CONST, CONST, CONST]),
                Arc::new(|n, d| {
                    let p = d[0].int()?.clone();
                    Ok(Approx::Ring(ApproxRing::prime_in_family(p, epoch_precision(n), d[2].bool()?, d[1].family()?)?))
                }),
            ),
            extension: reg(
                "extension",
                ExactRing,
                Some(vec![CONST, CONST, RING, POLY]),
                Arc::new(|_, d| {
                    let f = d[3].poly()?;
                    Ok(Approx::Ring(d[2].ring()?.extend_in_family(f, d[1].mode()?, d[0].family()?)?))
                }),
            ),
            poly_ring: reg(
                "poly-ring",
                ExactPolyRing,
                Some(vec![RING]),
                Arc::new(|_, d| Ok(Approx::PolyRing(d[0].ring()?.clone()))),
            ),
            coerce_int: reg(
                "coerce-int",
                ExactElement,
                Some(vec![RING, CONST]),
                Arc::new(|_, d| {
                    let r = d[0].ring()?;
                    elt(r.coerce_int(d[1].int()?.clone())?.truncate_abs(r.precision()))
                }),
            ),
            coerce_rat: reg(
                "coerce-rational",
                ExactElement,
                Some(vec![RING, CONST]),
                Arc::new(|_, d| {
                    let r = d[0].ring()?;
                    elt(r.coerce_rational(d[1].rat()?)?.truncate_abs(r.precision()))
                }),
            ),
            from_base: reg(
                "from-base",
                ExactElement,
                Some(vec![RING, ELT]),
                Arc::new(|_, d| elt(d[0].ring()?.embed_from_base(d[1].elt()?)?)),
            ),
            uniformizer: reg(
                "uniformizer",
                ExactElement,
                Some(vec![RING]),
                Arc::new(|_, d| elt(d[0].ring()?.uniformizer())),
            ),
            generator: reg(
                "generator",
                ExactElement,
                Some(vec![RING]),
                Arc::new(|_, d| elt(d[0].ring()?.generator()?)),
            ),
            zero: reg("zero", ExactElement, Some(vec![RING]), Arc::new(|_, d| elt(d[0].ring()?.zero()))),
            add: reg("add", ExactElement, Some(vec![ELT, ELT]), Arc::new(|_, d| elt(d[0].elt()?.add(d[1].elt()?)?))),
            sub: reg("sub", ExactElement, Some(vec![ELT, ELT]), Arc::new(|_, d| elt(d[0].elt()?.sub(d[1].elt()?)?))),
            mul: reg("mul", ExactElement, Some(vec![ELT, ELT]), Arc::new(|_, d| elt(d[0].elt()?.mul(d[1].elt()?)?))),
            neg: reg("neg", ExactElement, Some(vec![ELT]), Arc::new(|_, d| elt(d[0].elt()?.neg()))),
            div: reg("div", ExactElement, Some(vec![ELT, ELT]), Arc::new(|_, d| elt(d[0].elt()?.div(d[1].elt()?)?))),
            pow: reg(
                "pow",
                ExactElement,
                Some(vec![ELT, CONST]),
                Arc::new(|_, d| elt(d[0].elt()?.pow(d[1].index()?)?)),
            ),
            poly_new: reg(
                "poly",
                ExactPoly,
                None,
                Arc::new(|_, d| {
                    let r = d[0].ring()?;
                    let coeffs = d[1..].iter().map(|c| c.elt().cloned()).collect::<Result<Vec<_>>>()?;
                    poly(ApproxPoly::new(r, coeffs)?)
                }),
            ),
            poly_add: reg("poly-add", ExactPoly, Some(vec![POLY, POLY]), Arc::new(|_, d| poly(d[0].poly()?.add(d[1].poly()?)?))),
            poly_sub: reg("poly-sub", ExactPoly, Some(vec![POLY, POLY]), Arc::new(|_, d| poly(d[0].poly()?.sub(d[1].poly()?)?))),
            poly_mul: reg("poly-mul", ExactPoly, Some(vec![POLY, POLY]), Arc::new(|_, d| poly(d[0].poly()?.mul(d[1].poly()?)?))),
            poly_deriv: reg("derivative", ExactPoly, Some(vec![POLY]), Arc::new(|_, d| poly(d[0].poly()?.derivative()?))),
            poly_shift: reg("shift", ExactPoly, Some(vec![POLY, ELT]), Arc::new(|_, d| poly(d[0].poly()?.shift(d[1].elt()?)?))),
            poly_scale_var: reg(
                "scale-var",
                ExactPoly,
                Some(vec![POLY, CONST, CONST]),
                Arc::new(|_, d| poly(d[0].poly()?.scale_var(d[1].index()?, d[2].index()?)?)),
            ),
            poly_scale: reg("poly-scale", ExactPoly, Some(vec![POLY, ELT]), Arc::new(|_, d| poly(d[0].poly()?.scale(d[1].elt()?)?))),
            poly_eval: reg("evaluate", ExactElement, Some(vec![POLY, ELT]), Arc::new(|_, d| elt(d[0].poly()?.evaluate(d[1].elt()?)?))),
            poly_coeff: reg(
                "coefficient",
                ExactElement,
                Some(vec![POLY, CONST]),
                Arc::new(|_, d| {
                    let f = d[0].poly()?;
                    let i = d[1].index()? as usize;
                    let degree = f.degree_bound();
                    elt(f.coeff(i).ok_or(Error::IndexOutOfRange { index: i, degree })?.clone())
                }),
            ),
        }
    }
}
