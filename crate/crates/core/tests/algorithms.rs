use num_bigint::BigInt;
use num_rational::{BigRational, Ratio};
use proptest::prelude::*;
use xpadic::bench;
use xpadic::expr;
use xpadic::newton::{self, Factorization};
use xpadic::rings::Context;

#[test]
fn polygon_from_an_expression() {
    let mut cx = Context::new();
    let q3 = cx.prime_field(3).unwrap();
    let f = expr::polynomial(&mut cx, q3, "(x - 9)*(x - 1/3)*(x - 2)").unwrap();
    let np = newton::newton_polygon(&mut cx, f).unwrap();
    let mut slopes: Vec<_> = np.faces().iter().map(|f| (f.slope(), f.width())).collect();
    slopes.sort();
    assert_eq!(slopes, vec![(Ratio::new(-2, 1), 1), (Ratio::new(0, 1), 1), (Ratio::new(1, 1), 1)]);
}

#[test]
fn hensel_roots_are_roots() {
    let mut cx = Context::new();
    let q5 = cx.prime_field(5).unwrap();
    let f = expr::polynomial(&mut cx, q5, "x^3 - 3*x + 1/2").unwrap();
    let mut lifted = 0;
    for a in 0..5 {
        let a = cx.int(q5, a).unwrap();
        let out = newton::is_hensel_liftable(&mut cx, f, a).unwrap();
        if let Some(r) = out.root {
            lifted += 1;
            let y = cx.evaluate(f, r).unwrap();
            for n in 1..=6 {
                assert!(cx.approx_elt(y, n).unwrap().is_weakly_zero());
            }
        }
    }
    assert!(lifted >= 1);
}

#[test]
fn split_factors_multiply_back() {
    let mut cx = Context::new();
    let q2 = cx.prime_field(2).unwrap();
    let f = expr::polynomial(&mut cx, q2, "(x^2 - 2)*(x - 12)*(x^3 - 1/8)").unwrap();
    let split = newton::segment_split(&mut cx, f).unwrap();
    let Factorization::Split(gs) = split.outcome else { panic!("{:?}", split.outcome) };
    let degrees: Vec<usize> = gs.iter().map(|&g| cx.degree_bound(g)).collect();
    assert_eq!(degrees.iter().sum::<usize>(), 6);
    for n in 1..=7 {
        let mut prod = cx.approx_poly(gs[0], n).unwrap();
        for &g in &gs[1..] {
            prod = prod.mul(&cx.approx_poly(g, n).unwrap()).unwrap();
        }
        assert!(prod.weakly_equals(&cx.approx_poly(f, n).unwrap()).unwrap(), "epoch {n}");
    }
}

#[test]
fn clustered_roots_need_a_shift() {
    let f = bench::f_coeffs(4, &BigInt::from(1));
    let mut cx = Context::new();
    let q2 = cx.prime_field(2).unwrap();
    let p = cx.poly_from_bigints(q2, &f).unwrap();
    let out = newton::segment_split(&mut cx, p).unwrap();
    assert!(matches!(out.outcome, Factorization::RequiresFurtherMethods(_)));
    let reports = bench::bench_exp3(4, &BigInt::from(1), 8).unwrap();
    assert_eq!(reports[0].method, "shifted");
    assert_eq!(reports[0].outcome, "irreducible");
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(24))]

    #[test]
    fn roots_of_split_polynomials(rs in prop::collection::vec(-40i64..40, 1..4)) {
        let mut distinct = rs.clone();
        distinct.sort();
        distinct.dedup();
        prop_assume!(distinct.len() == rs.len());
        let mut cx = Context::new();
        let q7 = cx.prime_field(7).unwrap();
        let src = rs.iter().map(|r| format!("(x - ({r}))")).collect::<Vec<_>>().join("*");
        let f = expr::polynomial(&mut cx, q7, &src).unwrap();
        let found = newton::roots(&mut cx, f).unwrap();
        if found.complete {
            prop_assert_eq!(found.roots.len(), rs.len());
        }
        for r in found.roots {
            let a = cx.approx_elt(r, 3).unwrap().to_rational().unwrap();
            let m = BigInt::from(7).pow(8);
            let hit = rs.iter().any(|&x| ((a.to_integer() - BigInt::from(x)) % &m) == BigInt::from(0));
            prop_assert!(hit, "{a} is not one of {rs:?}");
        }
    }

    #[test]
    fn overhead_is_minimal_at_the_optimum(alpha in 1u32..8, num in 11i64..40) {
        let a = BigRational::from_integer(alpha.into());
        let m = bench::overhead(&a, &BigRational::from_integer(2.into())).unwrap();
        let b = BigRational::new(num.into(), 10.into());
        let rb = bench::r(&a, &b).to_f64();
        prop_assert!(rb >= m.r_star.to_f64() - 1e-9);
    }
}
