//! Roots by Newton iteration from a starting point that is closer to one
//! root than to any other.
//!
//! Write `g(x) = f(x + a)`. The condition holds exactly when the first face
//! of the Newton polygon of `g` has width 1. If `b` is the root nearest `a`,
//! `r = v(b - a)`, and `rho` is the largest `v(b - b')` over the other roots,
//! then `r > rho` and one Newton step from any `x` with `t = v(x - b) > rho`
//! gives `v(x' - b) >= 2t - rho`. Computing the step with an error of
//! valuation `P` leaves `v(x' - b) >= min(P, 2t - rho)`, which is the bound
//! the root node tracks.

use std::sync::Arc;

use num_integer::Integer;
use num_rational::Ratio;

use crate::approx::ApproxElement;
use crate::error::{Error, Result, Val};
use crate::lazy::{Dep, UserFn};
use crate::rings::{Context, Elem, Poly};

use super::polygon::{PolygonPair, Slope};

/// Result of [`is_hensel_liftable`].
#[derive(Clone, Copy, Debug)]
pub struct HenselOutcome {
    pub liftable: bool,
    /// The root nearest the starting point, when liftable.
    pub root: Option<Elem>,
    /// The epoch at which the question was decided.
    pub epoch: u32,
}

/// Data read off the lower polygon of `f(x + a)` when the condition is
/// certified.
#[derive(Clone, Copy, Debug, PartialEq)]
struct Certificate {
    /// Lower bound for `v(b - a)`; `None` if `a` is itself a root.
    r: Option<i64>,
    /// Upper bound for the distance valuations to other roots; `None` for a
    /// lone root.
    rho: Option<Slope>,
}

/// Decides whether the first face of the polygon of `g` has width 1, if
/// this approximation allows it.
fn decide(pair: &PolygonPair) -> Option<std::result::Result<Certificate, ()>> {
    let p1 = pair.point(1);
    let lower = pair.lower();
    let rho = || {
        let (_, right) = lower.slopes_around(1);
        right.map(|s| -s)
    };
    let Some(p0) = pair.point(0) else {
        // g(0) is exactly zero, so a is a root; it is simple iff g'(0) != 0.
        return match p1 {
            None => Some(Err(())),
            Some(p) if p.known => Some(Ok(Certificate { r: None, rho: rho() })),
            Some(_) => None,
        };
    };
    if pair.certifies_vertex(1) {
        let p1 = p1.expect("vertex");
        return Some(Ok(Certificate { r: Some(p0.w - p1.w), rho: rho() }));
    }
    // Point 1 lies strictly above the true polygon.
    let w1 = p1.map(|p| Ratio::from(p.w));
    if let Some(u) = pair.upper().and_then(|u| u.eval_at(1)) {
        if w1.is_none_or(|w| u < w) {
            return Some(Err(()));
        }
    }
    // A resolved polygon with a vertex at 1 was certified above.
    if pair.is_resolved() {
        return Some(Err(()));
    }
    None
}

fn ceil(q: Slope) -> i64 {
    Integer::div_ceil(q.numer(), q.denom())
}

/// One epoch of the root node: Newton steps on `f` starting from `a`.
fn lift(f: &crate::approx::ApproxPoly, a: &ApproxElement, cert: Certificate) -> Result<ApproxElement> {
    let w = f.ring().precision();
    let mut t = match (cert.r, a.abs_precision()) {
        (None, p) => p,
        (Some(r), p) => p.min(Val::Finite(r)),
    };
    let mut x = a.lifted();
    let df = f.derivative()?;
    for _ in 0..64 {
        let target = match x.weak_valuation() {
            Val::Finite(v) => Val::Finite(v.max(0) + w),
            Val::Infinity => Val::Finite(w),
        };
        let Val::Finite(tf) = t else { break };
        if t >= target {
            break;
        }
        if let Some(rho) = cert.rho {
            if Ratio::from(tf) <= rho {
                break;
            }
        }
        let fx = f.evaluate(&x)?;
        if fx.is_precise_zero() {
            t = Val::Infinity;
            break;
        }
        let dfx = df.evaluate(&x)?;
        if dfx.is_weakly_zero() {
            return Err(Error::DerivativeVanished);
        }
        let next = x.sub(&fx.div(&dfx)?)?;
        let bound = match cert.rho {
            Some(rho) => next.abs_precision().min(Val::Finite(ceil(Ratio::from(2 * tf) - rho))),
            None => next.abs_precision(),
        };
        if bound <= t {
            break;
        }
        x = next.lifted();
        t = bound;
    }
    Ok(match t {
        Val::Finite(t) if x.is_precise_zero() => ApproxElement::weak_zero(x.ring(), t),
        Val::Finite(t) => x.truncate_abs(t),
        Val::Infinity => x,
    })
}

/// Whether Newton iteration from `a` converges to a root of `f`, and if so
/// that root.
pub fn is_hensel_liftable(cx: &mut Context, f: Poly, a: Elem) -> Result<HenselOutcome> {
    let s = cx.poly_base(f);
    let a = cx.coerce(a, s)?;
    let g = cx.shift(f, a)?;
    let max = cx.max_epoch();
    for n in 1..=max {
        let ga = cx.approx_poly(g, n)?;
        let pair = match PolygonPair::from_approx(&ga) {
            Ok(p) => p,
            Err(Error::AllWeaklyZero) => continue,
            Err(e) => return Err(e),
        };
        match decide(&pair) {
            None => {}
            Some(Err(())) => return Ok(HenselOutcome { liftable: false, root: None, epoch: n }),
            Some(Ok(cert)) => {
                let ga: UserFn = Arc::new(move |_, d| Ok(crate::lazy::Approx::Elt(lift(d[0].poly()?, d[1].elt()?, cert)?)));
                let root = cx.user_elem(s, ga, vec![Dep::Node(f.0), Dep::Node(a.0)], n)?;
                return Ok(HenselOutcome { liftable: true, root: Some(root), epoch: n });
            }
        }
    }
    Err(Error::BudgetExhausted { epoch: max, last_weak_valuation: None })
}

#[cfg(test)]
mod tests {
    use num_bigint::BigInt;
    use num_rational::BigRational;

    use super::*;
    use crate::lazy::Config;

    fn brute_sqrt2_mod(m: i64) -> Vec<i64> {
        (0..m).filter(|x| (x * x - 2).rem_euclid(m) == 0).collect()
    }

    #[test]
    fn sqrt2_in_q7() {
        let mut cx = Context::with_config(Config { validate: true, max_epoch: 10 });
        let q7 = cx.prime_field(7).unwrap();
        let f = cx.poly_from_ints(q7, &[-2, 0, 1]).unwrap();
        let a = cx.int(q7, 3).unwrap();
        let out = is_hensel_liftable(&mut cx, f, a).unwrap();
        assert!(out.liftable);
        let b = out.root.unwrap();
        assert!(brute_sqrt2_mod(49).contains(&10));
        assert!(brute_sqrt2_mod(343).contains(&108));
        let b1 = cx.approx_elt(b, 1).unwrap();
        assert_eq!(b1.to_rational().unwrap(), BigRational::from_integer(10.into()));
        let b2 = cx.approx_elt(b, 2).unwrap();
        let r2 = b2.to_rational().unwrap().to_integer();
        assert_eq!(&r2 % BigInt::from(343), BigInt::from(108));
        for n in 1..=8 {
            let x = cx.approx_elt(b, n).unwrap();
            assert_eq!(x.abs_precision(), Val::Finite(1 << n));
            let m = BigInt::from(7).pow(1 << n);
            let v = x.to_rational().unwrap().to_integer();
            assert_eq!((&v * &v - 2) % &m, BigInt::from(0));
            let fx = cx.approx_poly(f, n).unwrap().evaluate(&x).unwrap();
            assert!(fx.is_weakly_zero());
            assert!(x.sub(&cx.approx_elt(a, n).unwrap()).unwrap().weak_valuation() >= Val::Finite(1));
        }
    }

    #[test]
    fn not_liftable() {
        let mut cx = Context::new();
        let q2 = cx.prime_field(2).unwrap();
        let f = cx.poly_from_ints(q2, &[-2, 0, 1]).unwrap();
        let a = cx.int(q2, 1).unwrap();
        let out = is_hensel_liftable(&mut cx, f, a).unwrap();
        assert!(!out.liftable);
        assert!(out.root.is_none());

        let g = cx.poly_from_ints(q2, &[1, 0, 1]).unwrap();
        let one = cx.int(q2, 1).unwrap();
        let sq = cx.poly_mul(g, g).unwrap();
        assert!(!is_hensel_liftable(&mut cx, sq, one).unwrap().liftable);
    }

    #[test]
    fn root_at_zero() {
        let mut cx = Context::with_config(Config { validate: true, max_epoch: 8 });
        let q5 = cx.prime_field(5).unwrap();
        let f = cx.poly_from_ints(q5, &[0, -1, 1]).unwrap();
        let a = cx.int(q5, 5).unwrap();
        let out = is_hensel_liftable(&mut cx, f, a).unwrap();
        assert!(out.liftable);
        let b = out.root.unwrap();
        for n in 1..=6 {
            assert!(cx.approx_elt(b, n).unwrap().is_weakly_zero());
        }
        let z = cx.int(q5, 0).unwrap();
        let out = is_hensel_liftable(&mut cx, f, z).unwrap();
        let b = out.root.unwrap();
        assert!(cx.approx_elt(b, 3).unwrap().is_precise_zero());
    }

    #[test]
    fn non_integral_separation() {
        // Roots 2 and +-sqrt 2: from 0, the root 2 is the unique nearest one
        // but no integral rescaling of f(x) separates it.
        let mut cx = Context::with_config(Config { validate: true, max_epoch: 9 });
        let q2 = cx.prime_field(2).unwrap();
        let f = cx.poly_from_ints(q2, &[4, -2, -2, 1]).unwrap();
        let a = cx.int(q2, 0).unwrap();
        let out = is_hensel_liftable(&mut cx, f, a).unwrap();
        assert!(out.liftable);
        let b = out.root.unwrap();
        for n in 1..=8 {
            let x = cx.approx_elt(b, n).unwrap();
            let two = x.ring().coerce_int(2).unwrap();
            assert!(x.weakly_equals(&two).unwrap(), "epoch {n}: {x}");
        }
        assert!(cx.approx_elt(b, 8).unwrap().abs_precision() >= Val::Finite(200));
    }

    #[test]
    fn roots_of_extensions() {
        let mut cx = Context::with_config(Config { validate: true, max_epoch: 8 });
        let q3 = cx.prime_field(3).unwrap();
        let g = cx.poly_from_ints(q3, &[1, 0, 1]).unwrap();
        let q9 = cx.extension(q3, g, crate::approx::ExtMode::Unramified).unwrap();
        // The roots of x^2 + 4 are -2i and 2i, and -2i is congruent to i.
        let f = cx.poly_from_ints(q9, &[4, 0, 1]).unwrap();
        let i = cx.generator(q9).unwrap();
        let out = is_hensel_liftable(&mut cx, f, i).unwrap();
        assert!(out.liftable);
        let b = out.root.unwrap();
        for n in 1..=6 {
            let x = cx.approx_elt(b, n).unwrap();
            let fa = cx.approx_poly(f, n).unwrap();
            assert!(fa.evaluate(&x).unwrap().is_weakly_zero());
        }
    }
}
