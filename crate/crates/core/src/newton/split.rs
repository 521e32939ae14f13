//! Factorization along the faces of the Newton polygon.
//!
//! At a vertex `m` with neighbouring slopes `sl < sr`, an integer `k` with
//! `-sr <= k < -sl` makes `F(x) = pi^j f(pi^k x)` integral with
//! `F = x^m c(x) mod pi` and `c(0)` a unit. The coprime pair `(x^m, c)` lifts
//! to `F = G H` with `G` monic of degree `m`, by the quadratic iteration
//! `G <- G + (r s mod G)`, `s <- s (2 - s H) mod G` where `r = F mod G` and
//! `s` inverts `H` modulo `G`. A monic `G` with `F = G H + r` and
//! `v(r) >= e` agrees with the true factor modulo `pi^e`.

use std::sync::Arc;

use num_integer::Integer;
use num_rational::Ratio;
use serde::Serialize;

use crate::approx::{ApproxElement, ApproxPoly};
use crate::error::{Error, Result, Val};
use crate::lazy::{Approx, Dep, UserFn};
use crate::rings::{Context, Poly};

use super::polygon::{newton_polygon_at, NewtonPolygon, Slope};

#[derive(Clone, Debug)]
pub enum Factorization {
    /// One factor per usable vertex segment, in order of decreasing root
    /// valuation. Their product is `f`.
    Split(Vec<Poly>),
    /// A single face whose slope denominator equals the degree.
    CertifiedIrreducible,
    /// The polygon alone does not settle the factorization.
    RequiresFurtherMethods(String),
}

#[derive(Clone, Debug)]
pub struct SegmentSplit {
    pub polygon: NewtonPolygon,
    /// Epoch at which the polygon was resolved; the minimum epoch of every
    /// factor.
    pub epoch: u32,
    pub outcome: Factorization,
}

/// Where to cut the polygon, and the rescaling used there.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Cut {
    pub vertex: usize,
    pub valuation: i64,
    pub k: i64,
}

fn ceil(q: Slope) -> i64 {
    Integer::div_ceil(q.numer(), q.denom())
}

/// The cuts available for `polygon`. Vertices with no integer rescaling
/// between their slopes are skipped.
pub fn cuts(polygon: &NewtonPolygon) -> Vec<Cut> {
    let (lo, hi) = polygon.domain();
    let mut out = Vec::new();
    for &(m, w) in polygon.vertices() {
        if m == hi || (m == lo && lo == 0) {
            continue;
        }
        let (left, right) = polygon.slopes_around(m);
        let k = ceil(-right.expect("interior vertex"));
        if left.is_none_or(|sl| Ratio::from(k) < -sl) {
            out.push(Cut { vertex: m, valuation: w, k });
        }
    }
    out
}

fn min_weak_valuation(f: &ApproxPoly) -> Val {
    f.coeffs().iter().map(ApproxElement::weak_valuation).min().unwrap_or(Val::Infinity)
}

/// The monic factor of `f` carrying the roots to the left of the cut.
pub fn lift_factor(f: &ApproxPoly, cut: Cut) -> Result<ApproxPoly> {
    let Cut { vertex: m, valuation: w, k } = cut;
    let ring = f.ring().clone();
    let big = f.scale_var(-(w + k * m as i64), k)?;
    if big.len() <= m {
        return Err(Error::InvalidArgument("cut beyond the degree".into()));
    }
    let mut g = ApproxPoly::new(&ring, (0..=m).map(|i| if i == m { ring.one() } else { ring.zero() }).collect())?;
    let h0 = &big.coeffs()[m..];
    let u = h0[0].inverse()?.lifted();
    let mut s: Vec<ApproxElement> = vec![u.clone()];
    for i in 1..m {
        let mut acc = ring.zero();
        for j in 1..=i.min(h0.len() - 1) {
            acc = acc.add(&h0[j].mul(&s[i - j])?)?;
        }
        s.push(acc.mul(&u)?.neg().lifted());
    }
    let mut s = ApproxPoly::new(&ring, s)?;
    let two = ApproxPoly::new(&ring, vec![ring.coerce_int(2)?])?;
    let target = Val::Finite(ring.precision() + k.abs() * m as i64);
    let mut best: Option<(ApproxPoly, Val)> = None;
    for _ in 0..64 {
        let (_, r) = big.divrem(&g)?;
        let e = min_weak_valuation(&r);
        if best.as_ref().is_some_and(|b| e <= b.1) {
            break;
        }
        best = Some((g.clone(), e));
        if e >= target {
            break;
        }
        let delta = r.mul(&s)?.rem(&g)?;
        g = g.add(&delta)?.lifted();
        let h = big.divrem(&g)?.0;
        s = s.mul(&two.sub(&s.mul(&h)?)?)?.rem(&g)?.lifted();
    }
    let (g, e) = best.expect("one iteration");
    let g = match e {
        Val::Finite(e) => {
            let coeffs = g
                .coeffs()
                .iter()
                .map(|c| if c.is_precise_zero() { ApproxElement::weak_zero(&ring, e) } else { c.truncate_abs(e) })
                .collect();
            ApproxPoly::new(&ring, coeffs)?
        }
        Val::Infinity => g,
    };
    g.scale_var(k * m as i64, -k)
}

fn user(f: impl Fn(&[crate::lazy::DepRef<'_>]) -> Result<ApproxPoly> + Send + Sync + 'static) -> UserFn {
    Arc::new(move |_, d| Ok(Approx::Poly(f(d)?)))
}

/// Splits `f` along the faces of its Newton polygon.
pub fn segment_split(cx: &mut Context, f: Poly) -> Result<SegmentSplit> {
    let (polygon, epoch) = newton_polygon_at(cx, f)?;
    let faces = polygon.faces();
    let d = cx.degree_bound(f);
    if faces.len() <= 1 && polygon.domain().0 == 0 {
        let outcome = match faces.first() {
            Some(face) if face.width() == d && face.ramification_bound() == d as i64 => Factorization::CertifiedIrreducible,
            Some(face) => Factorization::RequiresFurtherMethods(format!(
                "single face of slope {} and width {}",
                face.slope(),
                face.width()
            )),
            None => Factorization::RequiresFurtherMethods("constant polynomial".into()),
        };
        return Ok(SegmentSplit { polygon, epoch, outcome });
    }
    let cuts = cuts(&polygon);
    if cuts.is_empty() {
        return Ok(SegmentSplit {
            polygon,
            epoch,
            outcome: Factorization::RequiresFurtherMethods("no vertex admits an integral rescaling".into()),
        });
    }
    let s = cx.poly_base(f);
    let mut lifts = Vec::new();
    for &cut in &cuts {
        let node = cx.user_poly(s, user(move |d| lift_factor(d[0].poly()?, cut)), vec![Dep::Node(f.0)], epoch, cut.vertex)?;
        lifts.push((node, cut.vertex));
    }
    let quotient = || user(|d| Ok(d[0].poly()?.divrem(d[1].poly()?)?.0));
    let mut factors = vec![lifts[0].0];
    for w in lifts.windows(2) {
        let (hi, lo) = (w[1], w[0]);
        factors.push(cx.user_poly(s, quotient(), vec![Dep::Node(hi.0 .0), Dep::Node(lo.0 .0)], epoch, hi.1 - lo.1)?);
    }
    let (top, m) = *lifts.last().expect("nonempty");
    factors.push(cx.user_poly(s, quotient(), vec![Dep::Node(f.0), Dep::Node(top.0)], epoch, d - m)?);
    Ok(SegmentSplit { polygon, epoch, outcome: Factorization::Split(factors) })
}

#[cfg(test)]
mod tests {
    use num_bigint::BigInt;
    use proptest::prelude::*;

    use super::*;
    use crate::lazy::Config;
    use crate::newton::newton_polygon;
    use crate::rings::Structure;

    fn product(cx: &mut Context, fs: &[Poly]) -> Poly {
        fs[1..].iter().fold(fs[0], |acc, &g| cx.poly_mul(acc, g).unwrap())
    }

    fn weakly_equal(cx: &mut Context, f: Poly, g: Poly, n: u32) -> bool {
        let a = cx.approx_poly(f, n).unwrap();
        a.weakly_equals(&cx.approx_poly(g, n).unwrap()).unwrap()
    }

    #[test]
    fn two_quadratics() {
        let mut cx = Context::with_config(Config { validate: true, max_epoch: 12 });
        let q2 = cx.prime_field(2).unwrap();
        let a = cx.poly_from_ints(q2, &[-2, 0, 1]).unwrap();
        let b = cx.poly_from_ints(q2, &[-8, 0, 1]).unwrap();
        let f = cx.poly_mul(a, b).unwrap();
        let out = segment_split(&mut cx, f).unwrap();
        let Factorization::Split(fs) = out.outcome else { panic!("{:?}", out.outcome) };
        assert_eq!(fs.len(), 2);
        let prod = product(&mut cx, &fs);
        for n in 1..=10 {
            assert!(weakly_equal(&mut cx, prod, f, n), "epoch {n}");
            assert!(weakly_equal(&mut cx, fs[0], b, n), "epoch {n}");
            assert!(weakly_equal(&mut cx, fs[1], a, n), "epoch {n}");
        }
        let g = cx.approx_poly(fs[0], 10).unwrap();
        assert!(g.abs_precision() >= Val::Finite(1000));
    }

    #[test]
    fn irreducibility_certificates() {
        let mut cx = Context::new();
        let q2 = cx.prime_field(2).unwrap();
        let two = BigInt::from(2);
        let f2 = cx.poly_from_bigints(q2, &[-two.pow(21), 0.into(), 1.into()]).unwrap();
        let out = segment_split(&mut cx, f2).unwrap();
        assert!(matches!(out.outcome, Factorization::CertifiedIrreducible));
        assert_eq!(out.polygon.faces()[0].slope(), Ratio::new(-21, 2));
        let mut c = vec![BigInt::from(0); 5];
        c[0] = -two.pow(41);
        c[4] = 1.into();
        let f4 = cx.poly_from_bigints(q2, &c).unwrap();
        let out = segment_split(&mut cx, f4).unwrap();
        assert!(matches!(out.outcome, Factorization::CertifiedIrreducible));
        assert_eq!(out.epoch, 6);
        let units = cx.poly_from_ints(q2, &[-1, 0, 1]).unwrap();
        assert!(matches!(segment_split(&mut cx, units).unwrap().outcome, Factorization::RequiresFurtherMethods(_)));
    }

    #[test]
    fn cut_selection() {
        let p = NewtonPolygon::from_points(&[(0, 3), (2, 0), (4, 0)]).unwrap();
        assert_eq!(cuts(&p), vec![Cut { vertex: 2, valuation: 0, k: 0 }]);
        // Slopes -1/2 and -1/3 leave no integer in [1/3, 1/2).
        let p = NewtonPolygon::from_points(&[(0, 5), (2, 4), (5, 3)]).unwrap();
        assert!(cuts(&p).is_empty());
        let p = NewtonPolygon::from_points(&[(2, 3), (3, 0)]).unwrap();
        assert_eq!(cuts(&p), vec![Cut { vertex: 2, valuation: 3, k: 3 }]);
    }

    #[test]
    fn factor_of_x() {
        let mut cx = Context::with_config(Config { validate: true, max_epoch: 8 });
        let q3 = cx.prime_field(3).unwrap();
        let f = cx.poly_from_ints(q3, &[0, 0, -3, 1]).unwrap();
        let out = segment_split(&mut cx, f).unwrap();
        let Factorization::Split(fs) = out.outcome else { panic!() };
        let x2 = cx.poly_from_ints(q3, &[0, 0, 1]).unwrap();
        let rest = cx.poly_from_ints(q3, &[-3, 1]).unwrap();
        for n in 1..=6 {
            assert!(weakly_equal(&mut cx, fs[0], x2, n));
            assert!(weakly_equal(&mut cx, fs[1], rest, n));
        }
    }

    #[test]
    fn factor_coefficients_below_the_error_bound_stay_unknown() {
        // roots 1, 135, 126, 306 over Q_3: the cubic factor is x^3 mod 9
        let mut cx = Context::with_config(Config { validate: true, max_epoch: 9 });
        let q3 = cx.prime_field(3).unwrap();
        let lin: Vec<Poly> = [1, 135, 126, 306].iter().map(|&r| cx.poly_from_ints(q3, &[-r, 1]).unwrap()).collect();
        let f = product(&mut cx, &lin);
        let Factorization::Split(fs) = segment_split(&mut cx, f).unwrap().outcome else { panic!() };
        let middle = cx.poly_mul(lin[2], lin[3]).unwrap();
        let prod = product(&mut cx, &fs);
        for n in 1..=7 {
            assert!(weakly_equal(&mut cx, prod, f, n), "epoch {n}");
            assert!(weakly_equal(&mut cx, fs[1], middle, n), "epoch {n}");
        }
    }

    fn linear(cx: &mut Context, s: Structure, p: i64, v: u32, u: i64) -> Poly {
        cx.poly_from_ints(s, &[-(p.pow(v) * u), 1]).unwrap()
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(24))]

        #[test]
        fn products_of_linear_factors(
            p in prop::sample::select(vec![2i64, 3]),
            roots in prop::collection::vec((0u32..5, 1i64..40), 2..5),
        ) {
            let mut cx = Context::with_config(Config { validate: true, max_epoch: 9 });
            let s = cx.prime_field(p).unwrap();
            let roots: Vec<_> = roots.into_iter().filter(|r| r.1 % p != 0).collect();
            prop_assume!(roots.len() >= 2);
            let lin: Vec<Poly> = roots.iter().map(|&(v, u)| linear(&mut cx, s, p, v, u)).collect();
            let f = product(&mut cx, &lin);
            let out = segment_split(&mut cx, f).unwrap();
            let mut vals: Vec<u32> = roots.iter().map(|r| r.0).collect();
            vals.sort_unstable_by(|a, b| b.cmp(a));
            let mut distinct = vals.clone();
            distinct.dedup();
            match out.outcome {
                Factorization::Split(fs) => {
                    prop_assert_eq!(fs.len(), distinct.len());
                    let prod = product(&mut cx, &fs);
                    for n in 1..=7 {
                        prop_assert!(weakly_equal(&mut cx, prod, f, n));
                    }
                    for (g, v) in fs.iter().zip(&distinct) {
                        let poly = newton_polygon(&mut cx, *g).unwrap();
                        prop_assert_eq!(poly.faces().len(), 1);
                        prop_assert_eq!(poly.faces()[0].root_valuation(), Ratio::from(*v as i64));
                        prop_assert_eq!(poly.faces()[0].width(), vals.iter().filter(|x| *x == v).count());
                    }
                }
                other => prop_assert!(distinct.len() == 1, "{:?}", other),
            }
        }
    }
}
