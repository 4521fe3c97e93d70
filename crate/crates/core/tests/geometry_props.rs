use proptest::prelude::*;

use ncalloc::geometry::{
    classify_intersection, convex_hull, min_enclosing_circle, orientation, visible_hull_vertices, Orientation,
    PlanarPoint, Segment,
};
use ncalloc::ncgraph::{insert, NonCrossingGraph};
use ncalloc::verify::{crossing_pairs, hull_edges_present};

const BIG: i64 = 1 << 31;

fn point(span: i64) -> impl Strategy<Value = PlanarPoint> {
    (-span..span, -span..span).prop_map(|(x, y)| PlanarPoint::new(x, y))
}

fn distinct_points(span: i64, max: usize) -> impl Strategy<Value = Vec<PlanarPoint>> {
    prop::collection::btree_set((-span..span, -span..span), 3..max)
        .prop_map(|s| s.into_iter().map(|(x, y)| PlanarPoint::new(x, y)).collect())
}

fn flip(o: Orientation) -> Orientation {
    match o {
        Orientation::CounterClockwise => Orientation::Clockwise,
        Orientation::Clockwise => Orientation::CounterClockwise,
        Orientation::Collinear => Orientation::Collinear,
    }
}

proptest! {
    #[test]
    fn orientation_flips_on_swap(p in point(BIG), q in point(BIG), r in point(BIG)) {
        let o = orientation(p, q, r);
        prop_assert_eq!(orientation(q, p, r), flip(o));
        prop_assert_eq!(orientation(p, r, q), flip(o));
        prop_assert_eq!(orientation(q, r, p), o);
    }

    #[test]
    fn intersection_is_symmetric(a in point(20), b in point(20), c in point(20), d in point(20)) {
        prop_assume!(a != b && c != d);
        let s1 = Segment::new(a, b).unwrap();
        let s2 = Segment::new(c, d).unwrap();
        prop_assert_eq!(classify_intersection(&s1, &s2), classify_intersection(&s2, &s1));
        let r1 = Segment::new(b, a).unwrap();
        prop_assert_eq!(classify_intersection(&r1, &s2), classify_intersection(&s1, &s2));
    }

    #[test]
    fn hull_contains_everything(pts in distinct_points(1_000, 60)) {
        let Ok(hull) = convex_hull(&pts) else { return Ok(()) };
        for (a, b) in hull.edges() {
            for &r in &pts {
                prop_assert_ne!(orientation(a, b, r), Orientation::Clockwise);
            }
        }
    }

    #[test]
    fn outside_points_see_a_vertex(pts in distinct_points(1_000, 40), p in point(3_000)) {
        let Ok(hull) = convex_hull(&pts) else { return Ok(()) };
        if hull.strictly_outside(p) {
            prop_assert!(!visible_hull_vertices(p, &hull).unwrap().is_empty());
        } else {
            prop_assert!(visible_hull_vertices(p, &hull).is_err());
        }
    }

    #[test]
    fn enclosing_circle_is_tight(pts in prop::collection::vec(point(1_000_000), 1..40)) {
        let c = min_enclosing_circle(&pts).unwrap();
        for &p in &pts {
            prop_assert!(c.contains(p, 1e-9));
        }
        let mut distinct = pts.clone();
        distinct.sort();
        distinct.dedup();
        if distinct.len() >= 2 {
            let on_boundary = distinct
                .iter()
                .filter(|p| {
                    let (x, y) = p.to_meters();
                    let d = (x - c.center.0).hypot(y - c.center.1);
                    (d - c.radius).abs() <= c.radius * 1e-9 + 1e-9
                })
                .count();
            prop_assert!(on_boundary >= 2);
        }
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn build_is_planar_connected_and_deterministic(pts in distinct_points(10_000, 120)) {
        let Ok(g) = NonCrossingGraph::build(&pts) else { return Ok(()) };
        prop_assert!(crossing_pairs(&g).is_empty());
        prop_assert!(hull_edges_present(&g));
        prop_assert!(g.is_connected());
        let again = NonCrossingGraph::build(&pts).unwrap();
        prop_assert_eq!(g.edges().collect::<Vec<_>>(), again.edges().collect::<Vec<_>>());
    }

    #[test]
    fn insertion_keeps_invariants(pts in distinct_points(2_000, 60), p in point(3_000)) {
        prop_assume!(!pts.contains(&p));
        let Ok(g) = NonCrossingGraph::build(&pts) else { return Ok(()) };
        let before = g.clone();
        let out = insert(&g, p).unwrap();
        prop_assert_eq!(&g, &before);
        prop_assert!(crossing_pairs(&out.graph).is_empty());
        prop_assert!(hull_edges_present(&out.graph));
        prop_assert!(out.graph.is_connected());
        prop_assert_eq!(out.graph.vertices()[out.inserted_vertex], p);
    }

    #[test]
    fn layers_are_nested(pts in distinct_points(2_000, 50), pick in any::<prop::sample::Index>()) {
        let Ok(g) = NonCrossingGraph::build(&pts) else { return Ok(()) };
        let v = pick.index(pts.len());
        let one = g.k_layer_neighbors(v, 1).unwrap();
        let two = g.k_layer_neighbors(v, 2).unwrap();
        prop_assert!(one.iter().all(|u| two.contains(u)));
        prop_assert!(!one.contains(&v) && !two.contains(&v));
    }
}

#[test]
fn build_example_blocks_the_long_diagonal() {
    let pts = [
        PlanarPoint::new(3, 1),
        PlanarPoint::new(2, 3),
        PlanarPoint::new(1, 0),
        PlanarPoint::new(0, 2),
    ];
    let g = NonCrossingGraph::build(&pts).unwrap();
    let edges: Vec<(PlanarPoint, PlanarPoint)> = g
        .edges()
        .map(|(a, b)| {
            let (p, q) = (g.vertices()[a], g.vertices()[b]);
            if p < q { (p, q) } else { (q, p) }
        })
        .collect();
    assert_eq!(edges.len(), 5);
    assert!(!edges.contains(&(PlanarPoint::new(0, 2), PlanarPoint::new(3, 1))));
    assert!(crossing_pairs(&g).is_empty());
    let out = insert(&g, PlanarPoint::new(1, 1)).unwrap();
    assert!(crossing_pairs(&out.graph).is_empty() && out.graph.is_connected());
}
