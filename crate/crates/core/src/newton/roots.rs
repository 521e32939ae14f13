//! Roots in the coefficient field, for faces of integral slope over
//! structures with residue degree 1.
//!
//! A face of slope `-v` collects roots `pi^v y` with `y` a unit. Reducing
//! `pi^-c f(pi^v y)` for the face's minimum `c` leaves the residual
//! polynomial of the face, and each simple nonzero root of it lifts to a
//! root of `f`. A repeated residual root leaves the search incomplete.

use num_bigint::BigInt;

use crate::approx::ResidueField;
use crate::error::{Error, Result};
use crate::rings::{Context, Elem, Poly};

use super::hensel::is_hensel_liftable;
use super::polygon::newton_polygon_at;

#[derive(Clone, Debug)]
pub struct RootSearch {
    pub roots: Vec<Elem>,
    /// False when some face needs methods beyond residual polynomials.
    pub complete: bool,
}

pub fn roots(cx: &mut Context, f: Poly) -> Result<RootSearch> {
    let s = cx.poly_base(f);
    if cx.meta(s).residue_degree != 1 {
        return Err(Error::InvalidArgument("root search needs residue degree 1".into()));
    }
    let (polygon, epoch) = newton_polygon_at(cx, f)?;
    let fa = cx.approx_poly(f, epoch)?;
    let ring = fa.ring().clone();
    let field = ResidueField::new(&ring);
    let mut out = RootSearch { roots: Vec::new(), complete: true };
    let (lo, _) = polygon.domain();
    if lo > 0 {
        out.roots.push(cx.zero(s)?);
    }
    for face in polygon.faces() {
        let v = face.root_valuation();
        if !v.is_integer() {
            continue;
        }
        let v = v.to_integer();
        let (i0, w0) = face.start;
        let mut residual = vec![field.zero(); face.width() + 1];
        for i in i0..=face.end.0 {
            let on_line = w0 - v * (i - i0) as i64;
            let c = &fa.coeffs()[i];
            if c.weak_valuation() == crate::error::Val::Finite(on_line) {
                if let Some(r) = c.unit_residue() {
                    residual[i - i0] = r;
                }
            }
        }
        let deriv: Vec<_> = residual[1..]
            .iter()
            .enumerate()
            .map(|(i, c)| field.mul(&field.from_int(i as i64 + 1), c))
            .collect();
        for y in field.prime_roots(&residual) {
            if y == BigInt::from(0) {
                continue;
            }
            // a repeated residual root may hide several roots of f
            let yr = field.from_int(i64::try_from(&y).map_err(|_| Error::InvalidArgument("prime too large".into()))?);
            let rem = field.poly_rem(&deriv, &[field.sub(&field.zero(), &yr), field.one()]);
            if rem.first().is_none_or(|c| field.is_zero(c)) {
                out.complete = false;
            }
            let pi = cx.uniformizer(s)?;
            let scale = cx.pow(pi, v)?;
            let y = cx.int(s, y)?;
            let a = cx.mul(scale, y)?;
            match is_hensel_liftable(cx, f, a)? {
                out_h if out_h.liftable => out.roots.push(out_h.root.expect("liftable")),
                _ => out.complete = false,
            }
        }
    }
    Ok(out)
}
