//! Polygonal curves in the plane, the endpoint-preserving rotation
//! `f^a`, and the exact intersection finder: for any `mu` in `[0,1]`
//! some rotation of the curve passes through
//! `mu*f(0) + (1-mu)*f(tau)`, and the finder returns such a pair
//! `(a, t)` with `f^a(t)` hitting the target exactly.
//!
//! Rotation re-parameterizes the curve cyclically while translating the
//! two arcs so that the endpoints stay fixed:
//! `f^a(t) = f(t+a) - f(a) + f(0)` while `t + a < tau`, and
//! `f^a(t) = f(tau) - f(a) + f(a+t-tau)` afterwards.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numeric::Rat;

/// A point of the plane with exact coordinates.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct Point2 {
    pub x: Rat,
    pub y: Rat,
}

impl Point2 {
    pub fn new(x: Rat, y: Rat) -> Self {
        Point2 { x, y }
    }

    pub fn add(&self, other: &Point2) -> Point2 {
        Point2::new(&self.x + &other.x, &self.y + &other.y)
    }

    pub fn sub(&self, other: &Point2) -> Point2 {
        Point2::new(&self.x - &other.x, &self.y - &other.y)
    }

    pub fn scale(&self, factor: &Rat) -> Point2 {
        Point2::new(&self.x * factor, &self.y * factor)
    }

    pub fn is_zero(&self) -> bool {
        self.x.is_zero() && self.y.is_zero()
    }

    /// z-component of the cross product, zero iff parallel.
    pub fn cross(&self, other: &Point2) -> Rat {
        &self.x * &other.y - &self.y * &other.x
    }
}

/// Piecewise-linear curve through `points[i]` at parameter `knots[i]`.
/// Curves built with [`PolygonalCurve2::from_points`] use one parameter
/// unit per segment (`knots = 0..=segments`), which is what the
/// intersection finder expects; [`PolygonalCurve2::rotate`] may introduce
/// one non-integer knot where the rotation point splits a segment.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct PolygonalCurve2 {
    knots: Vec<Rat>,
    points: Vec<Point2>,
}

impl PolygonalCurve2 {
    /// Unit-parameterized curve: segment `i` covers `[i, i+1]`.
    pub fn from_points(points: Vec<Point2>) -> Result<Self> {
        if points.len() < 2 {
            return Err(Error::InvalidParameter(
                "a curve needs at least two breakpoints".into(),
            ));
        }
        let knots = (0..points.len()).map(|i| Rat::from_int(i as i64)).collect();
        Ok(PolygonalCurve2 { knots, points })
    }

    pub fn with_knots(knots: Vec<Rat>, points: Vec<Point2>) -> Result<Self> {
        if points.len() < 2 || knots.len() != points.len() {
            return Err(Error::InvalidParameter(
                "knot and breakpoint lists must match and hold two entries".into(),
            ));
        }
        if !knots[0].is_zero() {
            return Err(Error::InvalidParameter("first knot must be 0".into()));
        }
        if knots.windows(2).any(|w| w[0] >= w[1]) {
            return Err(Error::InvalidParameter(
                "knots must be strictly increasing".into(),
            ));
        }
        Ok(PolygonalCurve2 { knots, points })
    }

    /// End of the parameter interval (`segments` for unit curves).
    pub fn tau(&self) -> &Rat {
        self.knots.last().expect("nonempty")
    }

    pub fn segments(&self) -> usize {
        self.points.len() - 1
    }

    pub fn points(&self) -> &[Point2] {
        &self.points
    }

    pub fn knots(&self) -> &[Rat] {
        &self.knots
    }

    pub fn start(&self) -> &Point2 {
        &self.points[0]
    }

    pub fn end(&self) -> &Point2 {
        self.points.last().expect("nonempty")
    }

    /// One parameter unit per segment, integer knots.
    pub fn is_uniform(&self) -> bool {
        self.knots
            .iter()
            .enumerate()
            .all(|(i, k)| *k == Rat::from_int(i as i64))
    }

    fn check_param(&self, t: &Rat) -> Result<()> {
        if t.is_negative() || t > self.tau() {
            return Err(Error::InvalidParameter(format!(
                "parameter {t} outside [0, {}]",
                self.tau()
            )));
        }
        Ok(())
    }

    /// Linear interpolation on the segment containing `t`.
    pub fn eval(&self, t: &Rat) -> Result<Point2> {
        self.check_param(t)?;
        // last segment owns t = tau
        let seg = self
            .knots
            .windows(2)
            .position(|w| *t < w[1])
            .unwrap_or(self.segments() - 1);
        let (k0, k1) = (&self.knots[seg], &self.knots[seg + 1]);
        let frac = (t - k0).checked_div(&(k1 - k0))?;
        let dir = self.points[seg + 1].sub(&self.points[seg]);
        Ok(self.points[seg].add(&dir.scale(&frac)))
    }

    /// `f^a(t)` straight from the defining formula.
    pub fn rotated_eval(&self, a: &Rat, t: &Rat) -> Result<Point2> {
        self.check_param(a)?;
        self.check_param(t)?;
        let wrap = a + t;
        if wrap < *self.tau() {
            Ok(self
                .eval(&wrap)?
                .sub(&self.eval(a)?)
                .add(self.start()))
        } else {
            Ok(self
                .end()
                .sub(&self.eval(a)?)
                .add(&self.eval(&(&wrap - self.tau()))?))
        }
    }

    /// The rotated curve as a curve object: same endpoints, breakpoints at
    /// the images of the original breakpoints plus (for non-breakpoint `a`)
    /// the split at the rotation point.
    pub fn rotate(&self, a: &Rat) -> Result<PolygonalCurve2> {
        self.check_param(a)?;
        if a.is_zero() || a == self.tau() {
            return Ok(self.clone());
        }
        let f_a = self.eval(a)?;
        let shift_head = self.start().sub(&f_a); // + f(0) - f(a)
        let shift_tail = self.end().sub(&f_a); // + f(tau) - f(a)
        let mut knots = vec![Rat::zero()];
        let mut points = vec![self.start().clone()];
        for (k, p) in self.knots.iter().zip(&self.points) {
            if k > a {
                knots.push(k - a);
                points.push(p.add(&shift_head));
            }
        }
        for (k, p) in self.knots.iter().zip(&self.points) {
            if k.is_positive() && k < a {
                knots.push(self.tau() - a + k);
                points.push(p.add(&shift_tail));
            }
        }
        knots.push(self.tau().clone());
        points.push(self.end().clone());
        let rotated = PolygonalCurve2::with_knots(knots, points)?;
        if rotated.start() != self.start() || rotated.end() != self.end() {
            return Err(Error::InvariantViolation(
                "rotation moved a curve endpoint".into(),
            ));
        }
        Ok(rotated)
    }

    /// Smallest parameter minimizing the second coordinate. Rotating there
    /// keeps the second coordinate at or above the lower endpoint levels,
    /// so curves whose endpoints sit on or above the x-axis become
    /// nonnegative; that property is asserted.
    pub fn base_rotation(&self) -> Result<Rat> {
        let (mut best_k, mut best_y) = (self.knots[0].clone(), self.points[0].y.clone());
        for (k, p) in self.knots.iter().zip(&self.points).skip(1) {
            if p.y < best_y {
                best_y = p.y.clone();
                best_k = k.clone();
            }
        }
        let rotated = self.rotate(&best_k)?;
        if rotated.points.iter().any(|p| p.y.is_negative()) {
            return Err(Error::InvariantViolation(
                "rotation at the minimum left a negative second coordinate".into(),
            ));
        }
        Ok(best_k)
    }
}

/// Extra feasibility constraint on a `(s, r)` offset pair inside one
/// enumerated segment pair.
#[derive(Clone, Copy, PartialEq, Eq)]
enum OffsetOrder {
    Free,
    /// `r >= s` (same segment, forward arc).
    SecondAtLeastFirst,
    /// `r <= s` (same segment, wrapped arc).
    SecondAtMostFirst,
}

/// Smallest `(s, r)` in `[0,1]^2` (lexicographically) solving
/// `r*d_j - s*d_i = c` under the extra order constraint, or `None`.
/// Degenerate systems collapse to a one-parameter family; the smallest
/// valid offset of the family is returned.
fn solve_offsets(
    d_i: &Point2,
    d_j: &Point2,
    c: &Point2,
    order: OffsetOrder,
) -> Option<(Rat, Rat)> {
    let zero = Rat::zero();
    let one = Rat::one();
    let in_box = |v: &Rat| !v.is_negative() && *v <= one;
    let order_ok = |s: &Rat, r: &Rat| match order {
        OffsetOrder::Free => true,
        OffsetOrder::SecondAtLeastFirst => r >= s,
        OffsetOrder::SecondAtMostFirst => r <= s,
    };
    let det = &d_i.x * &d_j.y - &d_j.x * &d_i.y;
    if !det.is_zero() {
        // Cramer on [d_j, -d_i] (r, s)^T = c
        let r = (&d_i.x * &c.y - &d_i.y * &c.x).checked_div(&det).ok()?;
        let s = (&d_j.x * &c.y - &d_j.y * &c.x).checked_div(&det).ok()?;
        return (in_box(&s) && in_box(&r) && order_ok(&s, &r)).then_some((s, r));
    }
    // rank-deficient: directions are parallel (or zero)
    if !d_j.is_zero() {
        // d_i = gamma * d_j and c must be beta * d_j
        if c.cross(d_j).abs() != zero {
            return None;
        }
        let coord = |p: &Point2| -> Rat {
            if !d_j.x.is_zero() {
                p.x.checked_div(&d_j.x).expect("nonzero")
            } else {
                p.y.checked_div(&d_j.y).expect("nonzero")
            }
        };
        let gamma = coord(d_i);
        if d_i != &d_j.scale(&gamma) {
            return None;
        }
        let beta = coord(c);
        if c != &d_j.scale(&beta) {
            return None;
        }
        // family r = gamma*s + beta over s in [0,1]
        let mut lo = zero.clone();
        let mut hi = one.clone();
        let mut clamp = |num: &Rat, den: &Rat, keep_at_least: bool| {
            // den*s >= num (keep_at_least) or den*s <= num
            let bound = num.checked_div(den).expect("nonzero");
            let at_least = keep_at_least == den.is_positive();
            if at_least {
                if bound > lo {
                    lo = bound;
                }
            } else if bound < hi {
                hi = bound;
            }
        };
        // 0 <= gamma*s + beta <= 1
        if gamma.is_zero() {
            if beta.is_negative() || beta > one {
                return None;
            }
        } else {
            clamp(&(-&beta), &gamma, true);
            clamp(&(&one - &beta), &gamma, false);
        }
        // order constraint: gamma*s + beta {>=, <=} s
        let slope = &gamma - &one;
        match order {
            OffsetOrder::Free => {}
            OffsetOrder::SecondAtLeastFirst => {
                if slope.is_zero() {
                    if beta.is_negative() {
                        return None;
                    }
                } else {
                    clamp(&(-&beta), &slope, true);
                }
            }
            OffsetOrder::SecondAtMostFirst => {
                if slope.is_zero() {
                    if beta.is_positive() {
                        return None;
                    }
                } else {
                    clamp(&(-&beta), &slope, false);
                }
            }
        }
        if lo > hi {
            return None;
        }
        let s = lo;
        let r = &gamma * &s + &beta;
        return (in_box(&r)).then_some((s, r));
    }
    if !d_i.is_zero() {
        // -s * d_i = c determines s; r is free
        let s = if !d_i.x.is_zero() {
            (-&c.x).checked_div(&d_i.x).ok()?
        } else {
            (-&c.y).checked_div(&d_i.y).ok()?
        };
        if c != &d_i.scale(&-&s) || !in_box(&s) {
            return None;
        }
        let r = match order {
            OffsetOrder::Free | OffsetOrder::SecondAtMostFirst => zero,
            OffsetOrder::SecondAtLeastFirst => s.clone(),
        };
        return Some((s, r));
    }
    // both directions degenerate: only c = 0 works, smallest offsets
    c.is_zero().then_some((zero.clone(), zero))
}

/// All `(a, t)` pairs found by the segment-pair scan with `f^a(t)` equal to
/// the target `mu*f(0) + (1-mu)*f(tau)`. One candidate per solvable segment
/// pair and branch.
pub fn find_intersection_candidates(
    f: &PolygonalCurve2,
    mu: &Rat,
) -> Result<Vec<(Rat, Rat)>> {
    if !f.is_uniform() {
        return Err(Error::InvalidParameter(
            "the intersection finder expects a unit-parameterized curve".into(),
        ));
    }
    if mu.is_negative() || *mu > Rat::one() {
        return Err(Error::InvalidParameter(format!(
            "mu must lie in [0, 1], got {mu}"
        )));
    }
    let segs = f.segments();
    let tau = Rat::from_int(segs as i64);
    let target = f
        .start()
        .scale(mu)
        .add(&f.end().scale(&(Rat::one() - mu)));
    let dirs: Vec<Point2> = (0..segs)
        .map(|i| f.points[i + 1].sub(&f.points[i]))
        .collect();
    let mut candidates = Vec::new();
    for i in 0..segs {
        // forward arc: a in segment i, a+t in segment j >= i
        for j in i..segs {
            let c = target.sub(f.start()).sub(&f.points[j]).add(&f.points[i]);
            let order = if i == j {
                OffsetOrder::SecondAtLeastFirst
            } else {
                OffsetOrder::Free
            };
            if let Some((s, r)) = solve_offsets(&dirs[i], &dirs[j], &c, order) {
                let a = Rat::from_int(i as i64) + &s;
                let u = Rat::from_int(j as i64) + &r;
                candidates.push((a, u - Rat::from_int(i as i64) - &s));
            }
        }
        // wrapped arc: a+t-tau lands in segment j <= i
        for j in 0..=i {
            let c = target.sub(f.end()).sub(&f.points[j]).add(&f.points[i]);
            let order = if i == j {
                OffsetOrder::SecondAtMostFirst
            } else {
                OffsetOrder::Free
            };
            if let Some((s, r)) = solve_offsets(&dirs[i], &dirs[j], &c, order) {
                let a = Rat::from_int(i as i64) + &s;
                let u = Rat::from_int(j as i64) + &r;
                let t = &tau + &u - &a;
                if !t.is_negative() && t <= tau {
                    candidates.push((a, t));
                }
            }
        }
    }
    Ok(candidates)
}

/// Deterministic exact intersection: returns the candidate minimizing
/// `(floor(a), floor(a+t), a, t)` and checks `f^a(t)` against the target
/// exactly. Existence is guaranteed for every polygonal curve, so an empty
/// scan is an internal error.
pub fn find_intersection(f: &PolygonalCurve2, mu: &Rat) -> Result<(Rat, Rat)> {
    let candidates = find_intersection_candidates(f, mu)?;
    let key = |(a, t): &(Rat, Rat)| (a.floor(), (a + t).floor(), a.clone(), t.clone());
    let best = candidates
        .into_iter()
        .min_by_key(key)
        .ok_or_else(|| {
            Error::InvariantViolation("intersection scan found no candidate".into())
        })?;
    let target = f
        .start()
        .scale(mu)
        .add(&f.end().scale(&(Rat::one() - mu)));
    if f.rotated_eval(&best.0, &best.1)? != target {
        return Err(Error::InvariantViolation(
            "intersection candidate misses the target".into(),
        ));
    }
    Ok(best)
}
