use std::collections::BTreeSet;

use crate::geometry::{hull::hull_indices, meets_only_at_common_endpoint, PlanarPoint, Segment};

use super::boundary::Boundary;
use super::{GraphError, NonCrossingGraph, VertexId};

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InsertionOutcome {
    pub graph: NonCrossingGraph,
    pub inserted_vertex: VertexId,
    /// Every edge incident to the new vertex, as `(new, other)`.
    pub incident_edges: Vec<(VertexId, VertexId)>,
}

/// Inserts `p_new` into a copy of `graph`.
///
/// The vertex set is split by the vertical line through `p_new`: vertices with
/// smaller `x` form the left side, the rest (including those on the line) the
/// right side. Edges running strictly from one side to the other are dropped.
/// If either side is empty, the point is joined to the hull vertices it can
/// see. Otherwise it is joined to the visible vertices of the right-side hull,
/// and the two sides are re-stitched with edges between mutually visible hull
/// vertices, skipping any edge that would cross one already present between
/// the sides.
pub fn insert(graph: &NonCrossingGraph, p_new: PlanarPoint) -> Result<InsertionOutcome, GraphError> {
    if let Some(existing) = graph.vertices.iter().position(|&q| q == p_new) {
        return Err(GraphError::DuplicatePoint {
            existing,
            point: p_new,
        });
    }

    let id = graph.vertices.len();
    let mut out = graph.clone();
    out.vertices.push(p_new);
    out.adjacency.push(BTreeSet::new());
    let pts = &graph.vertices;
    let line_x = p_new.x;

    let (left, right): (Vec<VertexId>, Vec<VertexId>) =
        (0..pts.len()).partition(|&v| pts[v].x < line_x);

    // Edges straddling the line with one endpoint on it survive the split and
    // remain between the two sides.
    let mut between: Vec<(VertexId, VertexId)> = Vec::new();
    for (u, v) in graph.edges() {
        let (xu, xv) = (pts[u].x, pts[v].x);
        if (xu < line_x && xv > line_x) || (xv < line_x && xu > line_x) {
            out.remove_edge(u, v);
        } else if (xu < line_x) != (xv < line_x) {
            between.push((u, v));
        }
    }

    if left.is_empty() || right.is_empty() {
        let ring = Boundary::Ring(graph.boundary.clone());
        let sight = ring
            .sight(pts, p_new)
            .expect("a point beyond every vertex is outside or on the hull");
        out.attach(id, &sight.visible, sight.split);
    } else {
        let right_hull = Boundary::of(pts, &right);
        let sight = right_hull
            .sight(pts, p_new)
            .expect("the new point is left of or on the right-side hull");
        out.attach(id, &sight.visible, sight.split);

        let mut right_with_new = right;
        right_with_new.push(id);
        let right_hull = Boundary::of(&out.vertices, &right_with_new);
        let left_hull = Boundary::of(&out.vertices, &left);
        restitch(&mut out, &left_hull, &right_hull, between);
    }

    out.boundary = hull_indices(&out.vertices, true).expect("graph vertices are not collinear");
    let incident_edges = out.adjacency[id].iter().map(|&v| (id, v)).collect();
    Ok(InsertionOutcome {
        graph: out,
        inserted_vertex: id,
        incident_edges,
    })
}

fn restitch(
    graph: &mut NonCrossingGraph,
    left: &Boundary,
    right: &Boundary,
    between: Vec<(VertexId, VertexId)>,
) {
    let pts = graph.vertices.clone();
    let segment = |(u, v): (VertexId, VertexId)| Segment::new(pts[u], pts[v]).unwrap();
    let mut between: Vec<Segment> = between.into_iter().map(segment).collect();

    // Left-hull vertices seen from each right-hull vertex.
    let seen_from_right: Vec<(VertexId, BTreeSet<VertexId>)> = right
        .vertices()
        .iter()
        .map(|&m| {
            let sight = left.sight(&pts, pts[m]).expect("sides are separated");
            (m, sight.visible.into_iter().collect())
        })
        .collect();

    for &k in left.vertices() {
        let sight = right.sight(&pts, pts[k]).expect("sides are separated");
        for m in sight.visible {
            let mutual = seen_from_right
                .iter()
                .find(|(v, _)| *v == m)
                .is_some_and(|(_, seen)| seen.contains(&k));
            if !mutual || graph.has_edge(k, m) {
                continue;
            }
            let candidate = segment((k, m));
            if between
                .iter()
                .all(|e| meets_only_at_common_endpoint(&candidate, e))
            {
                graph.add_edge(k, m);
                between.push(candidate);
            }
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(raw: &[(i64, i64)]) -> Vec<PlanarPoint> {
        raw.iter().map(|&(x, y)| PlanarPoint::new(x, y)).collect()
    }

    fn sample() -> NonCrossingGraph {
        NonCrossingGraph::build(&pts(&[(3, 1), (2, 3), (1, 0), (0, 2)])).unwrap()
    }

    #[test]
    fn external_point_right_of_everything() {
        let g = sample();
        let out = insert(&g, PlanarPoint::new(5, 1)).unwrap();
        assert_eq!(out.inserted_vertex, 4);
        // Seen from (5,1): the right corner (3,1) and the corners it frames.
        let hull_sight = crate::geometry::visible_hull_vertices(PlanarPoint::new(5, 1), &g.hull()).unwrap();
        let mut expected: Vec<_> = hull_sight
            .iter()
            .map(|p| g.vertices().iter().position(|q| q == p).unwrap())
            .map(|v| (4, v))
            .collect();
        expected.sort();
        assert_eq!(out.incident_edges, expected);
        assert_eq!(g.edges().count() + expected.len(), out.graph.edge_count());
    }

    #[test]
    fn interior_insert_stays_connected() {
        let g = sample();
        let before = g.clone();
        let out = insert(&g, PlanarPoint::new(1, 1)).unwrap();
        assert_eq!(g, before);
        assert!(out.graph.is_connected());
        assert!(out.graph.degree(out.inserted_vertex) >= 1);
    }

    #[test]
    fn duplicate_rejected() {
        let g = sample();
        assert_eq!(
            insert(&g, PlanarPoint::new(1, 0)),
            Err(GraphError::DuplicatePoint {
                existing: 2,
                point: PlanarPoint::new(1, 0)
            })
        );
    }

    #[test]
    fn point_on_vertical_hull_edge_splits_it() {
        let g = NonCrossingGraph::build(&pts(&[(0, 0), (0, 4), (5, 2)])).unwrap();
        let out = insert(&g, PlanarPoint::new(0, 2)).unwrap();
        assert!(!out.graph.has_edge(0, 1));
        assert!(out.graph.has_edge(3, 0) && out.graph.has_edge(3, 1));
        assert!(out.graph.is_connected());
    }
}
