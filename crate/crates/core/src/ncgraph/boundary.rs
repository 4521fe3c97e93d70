//! Hull boundaries over vertex subsets, including collinear boundary points
//! and the degenerate one- and two-dimensional cases that arise when a graph
//! is split by a vertical line.

use crate::geometry::{cross, hull::hull_indices, on_segment, PlanarPoint};

use super::VertexId;

#[derive(Debug, Clone, PartialEq, Eq)]
pub(crate) enum Boundary {
    Single(VertexId),
    /// Collinear vertices sorted along their common line.
    Chain(Vec<VertexId>),
    /// Counterclockwise ring, collinear boundary vertices included.
    Ring(Vec<VertexId>),
}

/// What an external (or boundary) point sees of a [`Boundary`].
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub(crate) struct Sight {
    pub visible: Vec<VertexId>,
    /// Set when the point lies in the interior of the boundary edge
    /// `(a, b)`: that edge must be replaced by the two halves.
    pub split: Option<(VertexId, VertexId)>,
    /// Ring only: index range `(first, last)` of the visible chain, used to
    /// update the ring after adding the point.
    run: Option<(usize, usize)>,
}

impl Boundary {
    pub(crate) fn of(points: &[PlanarPoint], ids: &[VertexId]) -> Boundary {
        assert!(!ids.is_empty(), "boundary of an empty vertex set");
        let local: Vec<PlanarPoint> = ids.iter().map(|&v| points[v]).collect();
        match hull_indices(&local, true) {
            Some(ring) => Boundary::Ring(ring.into_iter().map(|i| ids[i]).collect()),
            None => {
                let mut chain = ids.to_vec();
                chain.sort_by_key(|&v| (points[v].x, points[v].y));
                chain.dedup_by_key(|v| points[*v]);
                if chain.len() == 1 {
                    Boundary::Single(chain[0])
                } else {
                    Boundary::Chain(chain)
                }
            }
        }
    }

    pub(crate) fn vertices(&self) -> &[VertexId] {
        match self {
            Boundary::Single(v) => std::slice::from_ref(v),
            Boundary::Chain(c) | Boundary::Ring(c) => c,
        }
    }

    /// Vertices visible from `p`. Returns `None` if `p` is strictly inside a
    /// ring.
    pub(crate) fn sight(&self, points: &[PlanarPoint], p: PlanarPoint) -> Option<Sight> {
        match self {
            Boundary::Single(v) => Some(Sight {
                visible: vec![*v],
                ..Sight::default()
            }),
            Boundary::Chain(chain) => Some(chain_sight(points, chain, p)),
            Boundary::Ring(ring) => ring_sight(points, ring, p),
        }
    }

    /// Ring after adding an external point `p` with id `id`, given the sight
    /// computed for `p`.
    pub(crate) fn ring_with(&self, sight: &Sight, id: VertexId) -> Vec<VertexId> {
        let Boundary::Ring(ring) = self else {
            panic!("ring_with on a non-ring boundary");
        };
        let n = ring.len();
        if let Some((a, _)) = sight.split {
            let pos = ring.iter().position(|&v| v == a).unwrap();
            let mut out = ring.clone();
            out.insert(pos + 1, id);
            return out;
        }
        let (first, last) = sight.run.expect("external point has a visible run");
        let mut out = Vec::with_capacity(n + 1);
        out.push(ring[first]);
        out.push(id);
        let mut i = last;
        while i != first {
            out.push(ring[i]);
            i = (i + 1) % n;
        }
        out
    }
}

fn chain_sight(points: &[PlanarPoint], chain: &[VertexId], p: PlanarPoint) -> Sight {
    let first = points[chain[0]];
    let last = points[*chain.last().unwrap()];
    if cross(first, last, p) != 0 {
        return Sight {
            visible: chain.to_vec(),
            ..Sight::default()
        };
    }
    let key = |q: PlanarPoint| (q.x, q.y);
    if key(p) < key(first) {
        return Sight {
            visible: vec![chain[0]],
            ..Sight::default()
        };
    }
    if key(p) > key(last) {
        return Sight {
            visible: vec![*chain.last().unwrap()],
            ..Sight::default()
        };
    }
    let i = chain
        .windows(2)
        .position(|w| on_segment(points[w[0]], points[w[1]], p))
        .expect("collinear point between chain ends lies on a chain edge");
    Sight {
        visible: vec![chain[i], chain[i + 1]],
        split: Some((chain[i], chain[i + 1])),
        run: None,
    }
}

fn ring_sight(points: &[PlanarPoint], ring: &[VertexId], p: PlanarPoint) -> Option<Sight> {
    let n = ring.len();
    let edge = |i: usize| (points[ring[i]], points[ring[(i + 1) % n]]);
    let facing: Vec<bool> = (0..n)
        .map(|i| {
            let (a, b) = edge(i);
            cross(a, b, p) < 0
        })
        .collect();

    if facing.iter().any(|&f| f) {
        // The facing edges form one cyclic run; locate its start.
        let start = (0..n)
            .find(|&i| facing[i] && !facing[(i + n - 1) % n])
            .unwrap_or(0);
        let mut end = start;
        while facing[end % n] {
            end += 1;
        }
        let last = end % n;
        let mut visible = Vec::new();
        let mut i = start;
        loop {
            visible.push(ring[i]);
            if i == last {
                break;
            }
            i = (i + 1) % n;
        }
        return Some(Sight {
            visible,
            split: None,
            run: Some((start, last)),
        });
    }

    (0..n)
        .find(|&i| {
            let (a, b) = edge(i);
            on_segment(a, b, p)
        })
        .map(|i| {
            let a = ring[i];
            let b = ring[(i + 1) % n];
            Sight {
                visible: vec![a, b],
                split: Some((a, b)),
                run: None,
            }
        })
}
