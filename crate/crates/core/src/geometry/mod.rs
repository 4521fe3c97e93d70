//! Exact planar primitives on a quantized coordinate grid.
//!
//! Coordinates are integers in units of one centimetre (`GRID_UNITS_PER_METER`
//! grid steps per metre) after projection. Every incidence predicate below is
//! evaluated in `i128`, so results are exact for any coordinate in `±2³¹`.

mod circle;
pub(crate) mod hull;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use circle::{min_enclosing_circle, min_enclosing_circle_seeded, Circle, MEC_SEED};
pub use hull::{convex_hull, visible_hull_vertices, Hull};

/// Number of grid steps in one metre.
pub const GRID_UNITS_PER_METER: f64 = 100.0;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GeometryError {
    #[error("all input points are collinear")]
    DegenerateInput,
    #[error("segment endpoints coincide at {0}")]
    DegenerateSegment(PlanarPoint),
    #[error("point {0} is inside or on the hull")]
    PointInsideHull(PlanarPoint),
    #[error("empty input")]
    EmptyInput,
}

/// A point on the quantized planar grid.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct PlanarPoint {
    pub x: i64,
    pub y: i64,
}

impl PlanarPoint {
    pub const fn new(x: i64, y: i64) -> Self {
        Self { x, y }
    }

    /// Snaps a coordinate given in metres onto the grid.
    pub fn from_meters(x: f64, y: f64) -> Self {
        Self {
            x: (x * GRID_UNITS_PER_METER).round() as i64,
            y: (y * GRID_UNITS_PER_METER).round() as i64,
        }
    }

    pub fn to_meters(self) -> (f64, f64) {
        (
            self.x as f64 / GRID_UNITS_PER_METER,
            self.y as f64 / GRID_UNITS_PER_METER,
        )
    }

    /// Euclidean distance in metres.
    pub fn distance_m(self, other: PlanarPoint) -> f64 {
        let dx = (self.x - other.x) as f64;
        let dy = (self.y - other.y) as f64;
        dx.hypot(dy) / GRID_UNITS_PER_METER
    }

    /// Exact squared distance in grid units.
    pub fn distance_sq(self, other: PlanarPoint) -> i128 {
        let dx = self.x as i128 - other.x as i128;
        let dy = self.y as i128 - other.y as i128;
        dx * dx + dy * dy
    }
}

impl fmt::Display for PlanarPoint {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum Orientation {
    CounterClockwise,
    Clockwise,
    Collinear,
}

/// Twice the signed area of the triangle `p, q, r`.
#[inline]
pub fn cross(p: PlanarPoint, q: PlanarPoint, r: PlanarPoint) -> i128 {
    let qx = q.x as i128 - p.x as i128;
    let qy = q.y as i128 - p.y as i128;
    let rx = r.x as i128 - p.x as i128;
    let ry = r.y as i128 - p.y as i128;
    qx * ry - qy * rx
}

/// Sign of `(q - p) × (r - p)`.
pub fn orientation(p: PlanarPoint, q: PlanarPoint, r: PlanarPoint) -> Orientation {
    match cross(p, q, r).signum() {
        1 => Orientation::CounterClockwise,
        -1 => Orientation::Clockwise,
        _ => Orientation::Collinear,
    }
}

/// `true` if `p` lies on the closed segment `a`–`b`.
pub fn on_segment(a: PlanarPoint, b: PlanarPoint, p: PlanarPoint) -> bool {
    cross(a, b, p) == 0
        && p.x >= a.x.min(b.x)
        && p.x <= a.x.max(b.x)
        && p.y >= a.y.min(b.y)
        && p.y <= a.y.max(b.y)
}

/// A closed segment with distinct endpoints.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub struct Segment {
    a: PlanarPoint,
    b: PlanarPoint,
}

impl Segment {
    pub fn new(a: PlanarPoint, b: PlanarPoint) -> Result<Self, GeometryError> {
        if a == b {
            return Err(GeometryError::DegenerateSegment(a));
        }
        Ok(Self { a, b })
    }

    pub fn a(&self) -> PlanarPoint {
        self.a
    }

    pub fn b(&self) -> PlanarPoint {
        self.b
    }

    pub fn has_endpoint(&self, p: PlanarPoint) -> bool {
        self.a == p || self.b == p
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum IntersectionKind {
    None,
    /// The segments meet in exactly one point, which is an endpoint of at
    /// least one of them.
    SharedEndpointOnly,
    ProperInterior,
    CollinearOverlap,
}

pub fn classify_intersection(s1: &Segment, s2: &Segment) -> IntersectionKind {
    let (a, b, c, d) = (s1.a, s1.b, s2.a, s2.b);
    let o1 = cross(a, b, c).signum();
    let o2 = cross(a, b, d).signum();
    let o3 = cross(c, d, a).signum();
    let o4 = cross(c, d, b).signum();

    if o1 == 0 && o2 == 0 {
        return classify_collinear(s1, s2);
    }
    if o1 * o2 < 0 && o3 * o4 < 0 {
        return IntersectionKind::ProperInterior;
    }
    if (o1 == 0 && on_segment(a, b, c))
        || (o2 == 0 && on_segment(a, b, d))
        || (o3 == 0 && on_segment(c, d, a))
        || (o4 == 0 && on_segment(c, d, b))
    {
        return IntersectionKind::SharedEndpointOnly;
    }
    IntersectionKind::None
}

fn classify_collinear(s1: &Segment, s2: &Segment) -> IntersectionKind {
    // Project onto the axis along which the common line is not degenerate.
    let key: fn(PlanarPoint) -> i64 = if s1.a.x != s1.b.x {
        |p| p.x
    } else {
        |p| p.y
    };
    let (lo1, hi1) = min_max(key(s1.a), key(s1.b));
    let (lo2, hi2) = min_max(key(s2.a), key(s2.b));
    let lo = lo1.max(lo2);
    let hi = hi1.min(hi2);
    match lo.cmp(&hi) {
        std::cmp::Ordering::Less => IntersectionKind::CollinearOverlap,
        std::cmp::Ordering::Equal => IntersectionKind::SharedEndpointOnly,
        std::cmp::Ordering::Greater => IntersectionKind::None,
    }
}

fn min_max(u: i64, v: i64) -> (i64, i64) {
    if u <= v {
        (u, v)
    } else {
        (v, u)
    }
}

/// The single common point of two segments classified as
/// [`IntersectionKind::SharedEndpointOnly`], or `None` for any other kind.
pub fn contact_point(s1: &Segment, s2: &Segment) -> Option<PlanarPoint> {
    if classify_intersection(s1, s2) != IntersectionKind::SharedEndpointOnly {
        return None;
    }
    [s2.a, s2.b]
        .into_iter()
        .find(|&p| on_segment(s1.a, s1.b, p))
        .or_else(|| [s1.a, s1.b].into_iter().find(|&p| on_segment(s2.a, s2.b, p)))
}

/// `true` when `s1` and `s2` have no common point other than an endpoint
/// shared by both. This is the admissibility test for adding an edge to a
/// non-crossing graph.
pub fn meets_only_at_common_endpoint(s1: &Segment, s2: &Segment) -> bool {
    match classify_intersection(s1, s2) {
        IntersectionKind::None => true,
        IntersectionKind::SharedEndpointOnly => {
            let p = contact_point(s1, s2).expect("touching segments have a contact point");
            s1.has_endpoint(p) && s2.has_endpoint(p)
        }
        _ => false,
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pt(x: i64, y: i64) -> PlanarPoint {
        PlanarPoint::new(x, y)
    }

    fn seg(ax: i64, ay: i64, bx: i64, by: i64) -> Segment {
        Segment::new(pt(ax, ay), pt(bx, by)).unwrap()
    }

    #[test]
    fn orientation_examples() {
        assert_eq!(
            orientation(pt(0, 0), pt(1, 0), pt(0, 1)),
            Orientation::CounterClockwise
        );
        assert_eq!(
            orientation(pt(0, 0), pt(1, 1), pt(2, 2)),
            Orientation::Collinear
        );
        assert_eq!(
            orientation(pt(0, 0), pt(0, 1), pt(1, 0)),
            Orientation::Clockwise
        );
    }

    #[test]
    fn orientation_exact_at_extreme_range() {
        let m = i32::MAX as i64;
        let p = pt(-m, -m);
        let q = pt(m, m - 1);
        let r = pt(m - 1, m);
        assert_eq!(orientation(p, q, r), Orientation::CounterClockwise);
        assert_eq!(orientation(p, r, q), Orientation::Clockwise);
        assert_eq!(orientation(p, pt(m, m), pt(0, 0)), Orientation::Collinear);
    }

    #[test]
    fn intersection_examples() {
        assert_eq!(
            classify_intersection(&seg(0, 0, 2, 0), &seg(1, -1, 1, 1)),
            IntersectionKind::ProperInterior
        );
        assert_eq!(
            classify_intersection(&seg(0, 0, 1, 0), &seg(1, 0, 2, 1)),
            IntersectionKind::SharedEndpointOnly
        );
        assert_eq!(
            classify_intersection(&seg(0, 0, 1, 0), &seg(0, 1, 1, 1)),
            IntersectionKind::None
        );
    }

    #[test]
    fn intersection_collinear_cases() {
        assert_eq!(
            classify_intersection(&seg(0, 0, 2, 0), &seg(1, 0, 3, 0)),
            IntersectionKind::CollinearOverlap
        );
        assert_eq!(
            classify_intersection(&seg(0, 0, 2, 0), &seg(2, 0, 3, 0)),
            IntersectionKind::SharedEndpointOnly
        );
        assert_eq!(
            classify_intersection(&seg(0, 0, 1, 0), &seg(2, 0, 3, 0)),
            IntersectionKind::None
        );
        assert_eq!(
            classify_intersection(&seg(0, 0, 0, 4), &seg(0, 1, 0, 2)),
            IntersectionKind::CollinearOverlap
        );
    }

    #[test]
    fn t_junction_is_endpoint_contact() {
        let s1 = seg(0, 0, 4, 0);
        let s2 = seg(2, 0, 2, 3);
        assert_eq!(
            classify_intersection(&s1, &s2),
            IntersectionKind::SharedEndpointOnly
        );
        assert_eq!(contact_point(&s1, &s2), Some(pt(2, 0)));
        assert!(!meets_only_at_common_endpoint(&s1, &s2));
        assert!(meets_only_at_common_endpoint(&seg(0, 0, 1, 0), &seg(1, 0, 2, 1)));
    }

    #[test]
    fn degenerate_segment_rejected() {
        assert_eq!(
            Segment::new(pt(1, 1), pt(1, 1)),
            Err(GeometryError::DegenerateSegment(pt(1, 1)))
        );
    }
}
