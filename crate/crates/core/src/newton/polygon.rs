//! Newton polygons, and the lower/upper pair computed from one
//! approximation.

use std::fmt;

use num_rational::Ratio;
use serde::Serialize;

use crate::approx::ApproxPoly;
use crate::error::{Error, Result, Val};
use crate::rings::{Context, Poly};

pub type Slope = Ratio<i64>;

/// The lower convex hull of finitely many points `(i, v)`.
#[derive(Clone, Debug, PartialEq, Eq, Serialize)]
pub struct NewtonPolygon {
    vertices: Vec<(usize, i64)>,
}

/// A maximal segment of a polygon.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Face {
    pub start: (usize, i64),
    pub end: (usize, i64),
}

impl Face {
    pub fn width(&self) -> usize {
        self.end.0 - self.start.0
    }

    pub fn height(&self) -> i64 {
        self.end.1 - self.start.1
    }

    pub fn slope(&self) -> Slope {
        Ratio::new(self.height(), self.width() as i64)
    }

    /// The common valuation of the `width` roots belonging to this face.
    pub fn root_valuation(&self) -> Slope {
        -self.slope()
    }

    /// The ramification degree of the field generated by any of these roots
    /// is a multiple of this.
    pub fn ramification_bound(&self) -> i64 {
        *self.root_valuation().denom()
    }
}

fn cross(o: (usize, i64), a: (usize, i64), b: (usize, i64)) -> i128 {
    let (ox, oy) = (o.0 as i128, o.1 as i128);
    (a.0 as i128 - ox) * (b.1 as i128 - oy) - (a.1 as i128 - oy) * (b.0 as i128 - ox)
}

impl NewtonPolygon {
    /// The lower hull of `points`. Points on a face but not at its ends are
    /// not vertices. `None` if there are no points.
    pub fn from_points(points: &[(usize, i64)]) -> Option<Self> {
        let mut pts = points.to_vec();
        pts.sort();
        pts.dedup_by(|b, a| {
            if a.0 == b.0 {
                a.1 = a.1.min(b.1);
                true
            } else {
                false
            }
        });
        if pts.is_empty() {
            return None;
        }
        let mut hull: Vec<(usize, i64)> = Vec::with_capacity(pts.len());
        for p in pts {
            while hull.len() >= 2 && cross(hull[hull.len() - 2], hull[hull.len() - 1], p) <= 0 {
                hull.pop();
            }
            hull.push(p);
        }
        Some(NewtonPolygon { vertices: hull })
    }

    pub fn vertices(&self) -> &[(usize, i64)] {
        &self.vertices
    }

    pub fn faces(&self) -> Vec<Face> {
        self.vertices.windows(2).map(|w| Face { start: w[0], end: w[1] }).collect()
    }

    pub fn domain(&self) -> (usize, usize) {
        (self.vertices[0].0, self.vertices[self.vertices.len() - 1].0)
    }

    pub fn is_vertex(&self, i: usize) -> bool {
        self.vertices.iter().any(|v| v.0 == i)
    }

    /// The value at `x`, or `None` outside the domain.
    pub fn eval(&self, x: Slope) -> Option<Slope> {
        let (lo, hi) = self.domain();
        if x < Ratio::from(lo as i64) || x > Ratio::from(hi as i64) {
            return None;
        }
        if self.vertices.len() == 1 {
            return Some(Ratio::from(self.vertices[0].1));
        }
        let f = self.faces().into_iter().find(|f| x <= Ratio::from(f.end.0 as i64))?;
        Some(Ratio::from(f.start.1) + f.slope() * (x - Ratio::from(f.start.0 as i64)))
    }

    pub fn eval_at(&self, i: usize) -> Option<Slope> {
        self.eval(Ratio::from(i as i64))
    }

    /// Slopes of the faces to the left and right of vertex `i`.
    pub fn slopes_around(&self, i: usize) -> (Option<Slope>, Option<Slope>) {
        let faces = self.faces();
        let left = faces.iter().find(|f| f.end.0 == i).map(Face::slope);
        let right = faces.iter().find(|f| f.start.0 == i).map(Face::slope);
        (left, right)
    }

    pub fn degree(&self) -> usize {
        self.domain().1 - self.domain().0
    }
}

impl fmt::Display for NewtonPolygon {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let vs: Vec<String> = self.vertices.iter().map(|(i, v)| format!("({i}, {v})")).collect();
        write!(f, "{}", vs.join(" -- "))
    }
}

/// A coefficient seen at one epoch: its weak valuation, and whether that is
/// its true valuation.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize)]
pub struct Point {
    pub i: usize,
    pub w: i64,
    pub known: bool,
}

/// Lower and upper polygons of one approximation. The true polygon lies
/// between them, and equals both wherever they agree.
#[derive(Clone, Debug, Serialize)]
pub struct PolygonPair {
    points: Vec<Point>,
    lower: NewtonPolygon,
    upper: Option<NewtonPolygon>,
}

impl PolygonPair {
    /// Precise zeros contribute nothing; weakly zero coefficients count
    /// only towards the lower polygon, at their absolute precision.
    pub fn from_points(points: Vec<Point>) -> Result<Self> {
        if !points.iter().any(|p| p.known) {
            return Err(Error::AllWeaklyZero);
        }
        let all: Vec<_> = points.iter().map(|p| (p.i, p.w)).collect();
        let known: Vec<_> = points.iter().filter(|p| p.known).map(|p| (p.i, p.w)).collect();
        Ok(PolygonPair {
            lower: NewtonPolygon::from_points(&all).expect("nonempty"),
            upper: NewtonPolygon::from_points(&known),
            points,
        })
    }

    pub fn from_approx(f: &ApproxPoly) -> Result<Self> {
        let points = f
            .coeffs()
            .iter()
            .enumerate()
            .filter_map(|(i, c)| match c.weak_valuation() {
                Val::Infinity => None,
                Val::Finite(w) => Some(Point { i, w, known: !c.is_weakly_zero() }),
            })
            .collect();
        Self::from_points(points)
    }

    pub fn points(&self) -> &[Point] {
        &self.points
    }

    pub fn point(&self, i: usize) -> Option<Point> {
        self.points.iter().copied().find(|p| p.i == i)
    }

    pub fn lower(&self) -> &NewtonPolygon {
        &self.lower
    }

    pub fn upper(&self) -> Option<&NewtonPolygon> {
        self.upper.as_ref()
    }

    /// Both polygons coincide, so either is the Newton polygon.
    pub fn is_resolved(&self) -> bool {
        self.upper.as_ref() == Some(&self.lower)
    }

    /// Maximal intervals `[a, b]`, `a < b`, on which the two polygons agree.
    pub fn agreement(&self) -> Vec<(usize, usize)> {
        let Some(up) = &self.upper else { return Vec::new() };
        let (lo, hi) = up.domain();
        let same = |i: usize| up.eval_at(i) == self.lower.eval_at(i);
        let mut out: Vec<(usize, usize)> = Vec::new();
        for i in lo..hi {
            if same(i) && same(i + 1) {
                match out.last_mut() {
                    Some(last) if last.1 == i => last.1 = i + 1,
                    _ => out.push((i, i + 1)),
                }
            }
        }
        out
    }

    /// Whether `i` is certainly a vertex of the true polygon: its valuation
    /// is known and it is a vertex of the lower polygon.
    pub fn certifies_vertex(&self, i: usize) -> bool {
        match self.point(i) {
            Some(p) if p.known => self.lower.vertices().contains(&(i, p.w)),
            _ => false,
        }
    }
}

/// The Newton polygon of `f`, and the first epoch at which it was resolved.
pub fn newton_polygon_at(cx: &mut Context, f: Poly) -> Result<(NewtonPolygon, u32)> {
    let max = cx.max_epoch();
    let mut last = None;
    for n in 1..=max {
        let fa = cx.approx_poly(f, n)?;
        match PolygonPair::from_approx(&fa) {
            Ok(pair) if pair.is_resolved() => return Ok((pair.lower, n)),
            Ok(pair) => last = pair.points.iter().map(|p| p.w).min().map(Val::Finite),
            Err(Error::AllWeaklyZero) => {}
            Err(e) => return Err(e),
        }
    }
    Err(Error::BudgetExhausted { epoch: max, last_weak_valuation: last })
}

pub fn newton_polygon(cx: &mut Context, f: Poly) -> Result<NewtonPolygon> {
    newton_polygon_at(cx, f).map(|r| r.0)
}

#[cfg(test)]
mod tests {
    use proptest::prelude::*;

    use super::*;
    use crate::approx::ApproxRing;

    fn pt(i: usize, w: i64, known: bool) -> Point {
        Point { i, w, known }
    }

    #[test]
    fn hull_merges_collinear_points() {
        let p = NewtonPolygon::from_points(&[(0, 4), (1, 2), (2, 0), (3, 1), (4, 2)]).unwrap();
        assert_eq!(p.vertices(), &[(0, 4), (2, 0), (4, 2)]);
        let faces = p.faces();
        assert_eq!(faces[0].slope(), Ratio::from(-2));
        assert_eq!(faces[1].slope(), Ratio::new(1, 1));
        assert_eq!(p.eval(Ratio::new(1, 2)), Some(Ratio::from(3)));
        assert_eq!(p.eval_at(5), None);
    }

    #[test]
    fn figure_three() {
        let mut pts = vec![];
        for (i, w) in [(0, 7), (2, 3), (4, 1), (6, 4), (8, 0)] {
            pts.push(pt(i, w, false));
        }
        for (i, w) in [(1, 4), (3, 3), (5, 0), (7, 2), (9, 2), (10, 4)] {
            pts.push(pt(i, w, true));
        }
        let pair = PolygonPair::from_points(pts).unwrap();
        assert_eq!(pair.lower().vertices(), &[(0, 7), (1, 4), (5, 0), (8, 0), (10, 4)]);
        assert_eq!(pair.upper().unwrap().vertices(), &[(1, 4), (5, 0), (9, 2), (10, 4)]);
        assert_eq!(pair.agreement(), vec![(1, 5), (9, 10)]);
        assert!(pair.certifies_vertex(1));
        assert!(pair.certifies_vertex(5));
        assert!(!pair.certifies_vertex(9));
        assert!(!pair.is_resolved());
    }

    #[test]
    fn from_approximations() {
        let r = ApproxRing::prime_field(2, 4).unwrap();
        let f = ApproxPoly::from_ints(&r, &[-2, 0, 1]).unwrap();
        let pair = PolygonPair::from_approx(&f).unwrap();
        assert!(pair.is_resolved());
        assert_eq!(pair.lower().vertices(), &[(0, 1), (2, 0)]);
        let face = pair.lower().faces()[0];
        assert_eq!(face.slope(), Ratio::new(-1, 2));
        assert_eq!(face.ramification_bound(), 2);

        let g = ApproxPoly::from_ints(&r, &[2, 1, 2]).unwrap();
        let pair = PolygonPair::from_approx(&g).unwrap();
        assert_eq!(pair.lower().vertices(), &[(0, 1), (1, 0), (2, 1)]);

        let z = ApproxPoly::from_ints(&r, &[16, 32]).unwrap().truncate_abs(4);
        assert!(matches!(PolygonPair::from_approx(&z), Err(Error::AllWeaklyZero)));
    }

    #[test]
    fn exact_polygons() {
        let mut cx = Context::new();
        let q2 = cx.prime_field(2).unwrap();
        let f = cx.poly_from_ints(q2, &[-2, 0, 1]).unwrap();
        let g = cx.poly_from_ints(q2, &[-8, 0, 1]).unwrap();
        let fg = cx.poly_mul(f, g).unwrap();
        let p = newton_polygon(&mut cx, fg).unwrap();
        let faces = p.faces();
        assert_eq!(faces.len(), 2);
        assert_eq!((faces[0].slope(), faces[0].width()), (Ratio::new(-3, 2), 2));
        assert_eq!((faces[1].slope(), faces[1].width()), (Ratio::new(-1, 2), 2));

        let big = num_bigint::BigInt::from(2).pow(41);
        let f40 = cx
            .poly_from_bigints(q2, &[-big, 0.into(), 0.into(), 0.into(), 1.into()])
            .unwrap();
        let (p, n) = newton_polygon_at(&mut cx, f40).unwrap();
        assert_eq!(p.vertices(), &[(0, 41), (4, 0)]);
        assert_eq!(p.faces()[0].slope(), Ratio::new(-41, 4));
        assert_eq!(n, 6);

        let one = cx.int(q2, 1).unwrap();
        let d = cx.sub(one, one).unwrap();
        let h = cx.poly(q2, &[d, d]).unwrap();
        cx.graph_mut().set_max_epoch(5);
        assert!(newton_polygon(&mut cx, h).unwrap_err().is_budget_exhausted());
    }

    fn brute_lower(points: &[(usize, i64)], x: Slope) -> Slope {
        // Minimum over all segments between pairs of points spanning x.
        let mut best: Option<Slope> = None;
        for &(i, a) in points {
            for &(j, b) in points {
                let (i, j) = (Ratio::from(i as i64), Ratio::from(j as i64));
                if i <= x && x <= j {
                    let y = if i == j { Ratio::from(a) } else { Ratio::from(a) + (Ratio::from(b - a)) * (x - i) / (j - i) };
                    best = Some(best.map_or(y, |c: Slope| c.min(y)));
                }
            }
        }
        best.unwrap()
    }

    proptest! {
        #[test]
        fn hull_is_the_lower_envelope(ws in prop::collection::vec(prop::option::of(0i64..20), 2..9)) {
            let pts: Vec<(usize, i64)> = ws.iter().enumerate().filter_map(|(i, w)| w.map(|w| (i, w))).collect();
            prop_assume!(!pts.is_empty());
            let p = NewtonPolygon::from_points(&pts).unwrap();
            let (lo, hi) = p.domain();
            for i in lo..=hi {
                for half in [0, 1] {
                    let x = Ratio::new(2 * i as i64 + half, 2);
                    if x > Ratio::from(hi as i64) { continue; }
                    prop_assert_eq!(p.eval(x).unwrap(), brute_lower(&pts, x));
                }
            }
            let slopes: Vec<_> = p.faces().iter().map(Face::slope).collect();
            prop_assert!(slopes.windows(2).all(|w| w[0] < w[1]));
        }

        #[test]
        fn pair_sandwiches_the_true_polygon(
            vals in prop::collection::vec(0i64..12, 2..8),
            prec in 1i64..12,
        ) {
            let truth = NewtonPolygon::from_points(&vals.iter().copied().enumerate().collect::<Vec<_>>()).unwrap();
            let points: Vec<Point> = vals.iter().enumerate().map(|(i, &v)| {
                if v < prec { pt(i, v, true) } else { pt(i, prec, false) }
            }).collect();
            prop_assume!(points.iter().any(|p| p.known));
            let pair = PolygonPair::from_points(points).unwrap();
            let (lo, hi) = truth.domain();
            for i in lo..=hi {
                let t = truth.eval_at(i).unwrap();
                prop_assert!(pair.lower().eval_at(i).unwrap() <= t);
                if let Some(u) = pair.upper().unwrap().eval_at(i) {
                    prop_assert!(u >= t);
                }
            }
            for (a, b) in pair.agreement() {
                for i in a..=b {
                    prop_assert_eq!(pair.lower().eval_at(i), truth.eval_at(i));
                }
            }
            for i in lo..=hi {
                if pair.certifies_vertex(i) {
                    prop_assert!(truth.is_vertex(i));
                }
            }
        }
    }
}
