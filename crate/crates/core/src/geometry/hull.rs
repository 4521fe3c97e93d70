use super::{cross, GeometryError, PlanarPoint};

/// Convex hull of a point set, counterclockwise, without collinear boundary
/// points.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Hull {
    vertices: Vec<PlanarPoint>,
}

impl Hull {
    pub fn vertices(&self) -> &[PlanarPoint] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    /// Directed edges `(v[i], v[i+1])`, closing back to `v[0]`.
    pub fn edges(&self) -> impl Iterator<Item = (PlanarPoint, PlanarPoint)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    /// `true` if `p` is strictly outside the hull.
    pub fn strictly_outside(&self, p: PlanarPoint) -> bool {
        self.edges().any(|(a, b)| cross(a, b, p) < 0)
    }
}

/// Indices of the convex hull of `points` in counterclockwise order, starting
/// at the lowest-leftmost point. With `keep_collinear`, points lying on the
/// boundary between two corners are retained. Returns `None` when the input is
/// collinear (including fewer than three distinct points).
pub(crate) fn hull_indices(points: &[PlanarPoint], keep_collinear: bool) -> Option<Vec<usize>> {
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by_key(|&i| (points[i].x, points[i].y));
    order.dedup_by_key(|i| points[*i]);
    if order.len() < 3 || all_collinear(points, &order) {
        return None;
    }

    let pops = |chain: &[usize], next: usize| -> bool {
        let n = chain.len();
        let c = cross(points[chain[n - 2]], points[chain[n - 1]], points[next]);
        if keep_collinear {
            c < 0
        } else {
            c <= 0
        }
    };

    let mut lower: Vec<usize> = Vec::with_capacity(order.len());
    for &i in &order {
        while lower.len() >= 2 && pops(&lower, i) {
            lower.pop();
        }
        lower.push(i);
    }
    let mut upper: Vec<usize> = Vec::with_capacity(order.len());
    for &i in order.iter().rev() {
        while upper.len() >= 2 && pops(&upper, i) {
            upper.pop();
        }
        upper.push(i);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    Some(lower)
}

fn all_collinear(points: &[PlanarPoint], order: &[usize]) -> bool {
    let a = points[order[0]];
    let b = points[order[1]];
    order[2..].iter().all(|&i| cross(a, b, points[i]) == 0)
}

/// Counterclockwise convex hull with collinear boundary points excluded.
pub fn convex_hull(points: &[PlanarPoint]) -> Result<Hull, GeometryError> {
    let idx = hull_indices(points, false).ok_or(GeometryError::DegenerateInput)?;
    Ok(Hull {
        vertices: idx.into_iter().map(|i| points[i]).collect(),
    })
}

/// Hull vertices reachable from an external point by a segment that meets the
/// hull boundary only at that vertex, in hull order.
///
/// A vertex qualifies exactly when one of its two incident hull edges has `p`
/// strictly on its outer side. An edge collinear with `p` never qualifies on
/// its own, so a far endpoint hidden behind a collinear edge is excluded.
pub fn visible_hull_vertices(
    p: PlanarPoint,
    hull: &Hull,
) -> Result<Vec<PlanarPoint>, GeometryError> {
    let n = hull.vertices.len();
    let facing: Vec<bool> = hull.edges().map(|(a, b)| cross(a, b, p) < 0).collect();
    if !facing.iter().any(|&f| f) {
        return Err(GeometryError::PointInsideHull(p));
    }
    Ok((0..n)
        .filter(|&i| facing[i] || facing[(i + n - 1) % n])
        .map(|i| hull.vertices[i])
        .collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::geometry::{classify_intersection, IntersectionKind, Segment};

    fn pt(x: i64, y: i64) -> PlanarPoint {
        PlanarPoint::new(x, y)
    }

    fn square() -> Hull {
        convex_hull(&[pt(0, 0), pt(2, 0), pt(2, 2), pt(0, 2)]).unwrap()
    }

    /// Visibility straight from the definition: the segment may touch each
    /// hull edge only at the target vertex.
    fn visible_by_definition(p: PlanarPoint, hull: &Hull) -> Vec<PlanarPoint> {
        hull.vertices()
            .iter()
            .copied()
            .filter(|&v| {
                let sight = Segment::new(p, v).unwrap();
                hull.edges().all(|(a, b)| {
                    let edge = Segment::new(a, b).unwrap();
                    match classify_intersection(&sight, &edge) {
                        IntersectionKind::None => true,
                        IntersectionKind::SharedEndpointOnly => {
                            crate::geometry::contact_point(&sight, &edge) == Some(v)
                        }
                        _ => false,
                    }
                })
            })
            .collect()
    }

    #[test]
    fn hull_excludes_interior_and_collinear() {
        let hull = convex_hull(&[pt(0, 0), pt(2, 0), pt(2, 2), pt(0, 2), pt(1, 1), pt(1, 0)]).unwrap();
        assert_eq!(hull.vertices(), &[pt(0, 0), pt(2, 0), pt(2, 2), pt(0, 2)]);
    }

    #[test]
    fn hull_of_triangle_is_itself() {
        let hull = convex_hull(&[pt(5, 1), pt(0, 0), pt(1, 4)]).unwrap();
        assert_eq!(hull.len(), 3);
        assert_eq!(hull.vertices(), &[pt(0, 0), pt(5, 1), pt(1, 4)]);
    }

    #[test]
    fn collinear_input_is_degenerate() {
        assert_eq!(
            convex_hull(&[pt(0, 0), pt(1, 1), pt(3, 3)]),
            Err(GeometryError::DegenerateInput)
        );
        assert_eq!(
            convex_hull(&[pt(0, 0), pt(1, 1)]),
            Err(GeometryError::DegenerateInput)
        );
    }

    #[test]
    fn keep_collinear_retains_boundary_points() {
        let pts = [pt(0, 0), pt(2, 0), pt(2, 2), pt(0, 2), pt(1, 0), pt(0, 1), pt(1, 1)];
        let idx = hull_indices(&pts, true).unwrap();
        let ring: Vec<_> = idx.iter().map(|&i| pts[i]).collect();
        assert_eq!(
            ring,
            vec![pt(0, 0), pt(1, 0), pt(2, 0), pt(2, 2), pt(0, 2), pt(0, 1)]
        );
    }

    #[test]
    fn visibility_examples() {
        let hull = square();
        assert_eq!(
            visible_hull_vertices(pt(3, 1), &hull).unwrap(),
            vec![pt(2, 0), pt(2, 2)]
        );
        assert_eq!(
            visible_hull_vertices(pt(3, 3), &hull).unwrap(),
            vec![pt(2, 0), pt(2, 2), pt(0, 2)]
        );
        let from_axis = visible_hull_vertices(pt(4, 0), &hull).unwrap();
        assert!(!from_axis.contains(&pt(0, 0)));
        assert_eq!(from_axis, vec![pt(2, 0), pt(2, 2)]);
    }

    #[test]
    fn visibility_rejects_inside_and_boundary() {
        let hull = square();
        assert_eq!(
            visible_hull_vertices(pt(1, 1), &hull),
            Err(GeometryError::PointInsideHull(pt(1, 1)))
        );
        assert!(visible_hull_vertices(pt(2, 1), &hull).is_err());
        assert!(visible_hull_vertices(pt(2, 2), &hull).is_err());
    }

    #[test]
    fn visibility_matches_definition_around_square() {
        let hull = convex_hull(&[pt(0, 0), pt(6, 0), pt(8, 5), pt(3, 9), pt(-2, 4)]).unwrap();
        for x in -6..=14 {
            for y in -6..=14 {
                let p = pt(x, y);
                if !hull.strictly_outside(p) {
                    continue;
                }
                assert_eq!(
                    visible_hull_vertices(p, &hull).unwrap(),
                    visible_by_definition(p, &hull),
                    "from {p}"
                );
            }
        }
    }
}
