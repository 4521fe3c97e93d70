//! Non-crossing graphs: construction by sweeping points in descending `x`,
//! single-point insertion by a vertical split and re-stitch, layered
//! neighbourhood queries, and the task/worker adjacency reconfiguration built
//! on top of them.

mod boundary;
mod insert;
mod reconfigure;

use std::collections::{BTreeSet, VecDeque};
use std::fmt::Write as _;
use std::str::FromStr;

use thiserror::Error;

use crate::geometry::{convex_hull, cross, Hull, PlanarPoint, Segment};
use boundary::Boundary;

pub use insert::{insert, InsertionOutcome};
pub use reconfigure::{
    reconfigure, reconfigure_with_graphs, AdjacencyLists, Reconfiguration, ReconfigureError,
};

pub type VertexId = usize;

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum GraphError {
    #[error("points are collinear or fewer than three")]
    DegenerateInput,
    #[error("vertices {first} and {second} share the location {point}")]
    DuplicatePoints {
        first: VertexId,
        second: VertexId,
        point: PlanarPoint,
    },
    #[error("point {point} duplicates vertex {existing}")]
    DuplicatePoint {
        existing: VertexId,
        point: PlanarPoint,
    },
    #[error("unknown vertex {0}")]
    UnknownVertex(VertexId),
    #[error("layer count must be at least 1")]
    ZeroLayers,
    #[error("graph dump line {line}: {message}")]
    Dump { line: usize, message: String },
}

/// An undirected straight-line graph whose edges meet only at shared
/// endpoints. Vertex ids are positions in the input point list.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct NonCrossingGraph {
    vertices: Vec<PlanarPoint>,
    adjacency: Vec<BTreeSet<VertexId>>,
    /// Convex hull boundary, counterclockwise, collinear boundary vertices
    /// included.
    boundary: Vec<VertexId>,
}

impl NonCrossingGraph {
    /// Builds the graph by visiting points in descending `x` (ties: descending
    /// `y`) and joining each one to every hull vertex it can see.
    pub fn build(points: &[PlanarPoint]) -> Result<Self, GraphError> {
        check_distinct(points)?;
        let mut order: Vec<VertexId> = (0..points.len()).collect();
        order.sort_by(|&a, &b| {
            (points[b].x, points[b].y).cmp(&(points[a].x, points[a].y))
        });
        if order.len() < 3 {
            return Err(GraphError::DegenerateInput);
        }
        let (a, b) = (order[0], order[1]);
        let third = (2..order.len())
            .find(|&k| cross(points[a], points[b], points[order[k]]) != 0)
            .ok_or(GraphError::DegenerateInput)?;
        let c = order[third];

        let mut graph = NonCrossingGraph {
            vertices: points.to_vec(),
            adjacency: vec![BTreeSet::new(); points.len()],
            boundary: if cross(points[a], points[b], points[c]) > 0 {
                vec![a, b, c]
            } else {
                vec![a, c, b]
            },
        };
        graph.add_edge(a, b);
        graph.add_edge(b, c);
        graph.add_edge(a, c);

        // Collinear points skipped while seeding come next, then the rest.
        let rest = order[2..third].iter().chain(&order[third + 1..]);
        for &v in rest {
            let ring = Boundary::Ring(std::mem::take(&mut graph.boundary));
            let sight = ring
                .sight(&graph.vertices, points[v])
                .expect("points arrive outside the current hull");
            graph.attach(v, &sight.visible, sight.split);
            graph.boundary = ring.ring_with(&sight, v);
        }
        Ok(graph)
    }

    pub fn vertices(&self) -> &[PlanarPoint] {
        &self.vertices
    }

    pub fn vertex(&self, v: VertexId) -> Option<PlanarPoint> {
        self.vertices.get(v).copied()
    }

    pub fn vertex_count(&self) -> usize {
        self.vertices.len()
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(BTreeSet::len).sum::<usize>() / 2
    }

    /// Edges as `(low id, high id)`, ascending.
    pub fn edges(&self) -> impl Iterator<Item = (VertexId, VertexId)> + '_ {
        self.adjacency
            .iter()
            .enumerate()
            .flat_map(|(u, ns)| ns.range(u + 1..).map(move |&v| (u, v)))
    }

    pub fn edge_segments(&self) -> impl Iterator<Item = Segment> + '_ {
        self.edges()
            .map(|(u, v)| Segment::new(self.vertices[u], self.vertices[v]).unwrap())
    }

    pub fn has_edge(&self, u: VertexId, v: VertexId) -> bool {
        self.adjacency.get(u).is_some_and(|ns| ns.contains(&v))
    }

    pub fn neighbors(&self, v: VertexId) -> impl Iterator<Item = VertexId> + '_ {
        self.adjacency[v].iter().copied()
    }

    pub fn degree(&self, v: VertexId) -> usize {
        self.adjacency[v].len()
    }

    /// Hull boundary vertex ids, counterclockwise, including vertices that lie
    /// on a hull edge between two corners.
    pub fn boundary(&self) -> &[VertexId] {
        &self.boundary
    }

    /// Convex hull of the vertex set (corners only).
    pub fn hull(&self) -> Hull {
        let pts: Vec<PlanarPoint> = self.boundary.iter().map(|&v| self.vertices[v]).collect();
        convex_hull(&pts).expect("graph vertices are not collinear")
    }

    pub fn is_connected(&self) -> bool {
        if self.vertices.is_empty() {
            return true;
        }
        let mut seen = vec![false; self.vertices.len()];
        let mut queue = VecDeque::from([0]);
        seen[0] = true;
        let mut count = 1;
        while let Some(u) = queue.pop_front() {
            for &v in &self.adjacency[u] {
                if !seen[v] {
                    seen[v] = true;
                    count += 1;
                    queue.push_back(v);
                }
            }
        }
        count == self.vertices.len()
    }

    /// Vertices within `layers` hops of `v`, excluding `v`, ordered by hop
    /// distance then id.
    pub fn k_layer_neighbors(&self, v: VertexId, layers: usize) -> Result<Vec<VertexId>, GraphError> {
        if v >= self.vertices.len() {
            return Err(GraphError::UnknownVertex(v));
        }
        if layers == 0 {
            return Err(GraphError::ZeroLayers);
        }
        let mut seen = BTreeSet::from([v]);
        let mut frontier = vec![v];
        let mut out = Vec::new();
        for _ in 0..layers {
            let mut next: BTreeSet<VertexId> = BTreeSet::new();
            for &u in &frontier {
                for &w in &self.adjacency[u] {
                    if !seen.contains(&w) {
                        next.insert(w);
                    }
                }
            }
            if next.is_empty() {
                break;
            }
            seen.extend(next.iter().copied());
            out.extend(next.iter().copied());
            frontier = next.into_iter().collect();
        }
        Ok(out)
    }

    /// Line-oriented text dump: `V id x y` lines, then `E id1 id2` lines, ids
    /// ascending.
    pub fn dump(&self) -> String {
        let mut out = String::new();
        for (i, p) in self.vertices.iter().enumerate() {
            writeln!(out, "V {i} {} {}", p.x, p.y).unwrap();
        }
        for (u, v) in self.edges() {
            writeln!(out, "E {u} {v}").unwrap();
        }
        out
    }

    fn add_edge(&mut self, u: VertexId, v: VertexId) {
        debug_assert_ne!(u, v);
        self.adjacency[u].insert(v);
        self.adjacency[v].insert(u);
    }

    fn remove_edge(&mut self, u: VertexId, v: VertexId) {
        self.adjacency[u].remove(&v);
        self.adjacency[v].remove(&u);
    }

    /// Connects `v` to `targets`; if `v` lies inside edge `split`, that edge
    /// is replaced by its two halves.
    fn attach(&mut self, v: VertexId, targets: &[VertexId], split: Option<(VertexId, VertexId)>) {
        if let Some((a, b)) = split {
            self.remove_edge(a, b);
        }
        for &t in targets {
            self.add_edge(v, t);
        }
    }
}

/// Parsed form of [`NonCrossingGraph::dump`].
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct GraphDump {
    pub vertices: Vec<PlanarPoint>,
    pub edges: Vec<(VertexId, VertexId)>,
}

impl FromStr for GraphDump {
    type Err = GraphError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let mut vertices = Vec::new();
        let mut edges = Vec::new();
        for (idx, line) in s.lines().enumerate() {
            let bad = |message: &str| GraphError::Dump {
                line: idx + 1,
                message: message.to_string(),
            };
            let fields: Vec<&str> = line.split_whitespace().collect();
            match fields.as_slice() {
                [] => continue,
                ["V", id, x, y] => {
                    let id: usize = id.parse().map_err(|_| bad("bad vertex id"))?;
                    if id != vertices.len() {
                        return Err(bad("vertex ids must be consecutive"));
                    }
                    let x = x.parse().map_err(|_| bad("bad x"))?;
                    let y = y.parse().map_err(|_| bad("bad y"))?;
                    vertices.push(PlanarPoint::new(x, y));
                }
                ["E", u, v] => {
                    let u = u.parse().map_err(|_| bad("bad edge endpoint"))?;
                    let v = v.parse().map_err(|_| bad("bad edge endpoint"))?;
                    edges.push((u, v));
                }
                _ => return Err(bad("unrecognized record")),
            }
        }
        Ok(GraphDump { vertices, edges })
    }
}

fn check_distinct(points: &[PlanarPoint]) -> Result<(), GraphError> {
    let mut order: Vec<VertexId> = (0..points.len()).collect();
    order.sort_by_key(|&i| (points[i], i));
    for w in order.windows(2) {
        if points[w[0]] == points[w[1]] {
            return Err(GraphError::DuplicatePoints {
                first: w[0],
                second: w[1],
                point: points[w[0]],
            });
        }
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pts(raw: &[(i64, i64)]) -> Vec<PlanarPoint> {
        raw.iter().map(|&(x, y)| PlanarPoint::new(x, y)).collect()
    }

    #[test]
    fn triangle() {
        let g = NonCrossingGraph::build(&pts(&[(0, 0), (4, 0), (1, 3)])).unwrap();
        assert_eq!(g.edge_count(), 3);
        assert!(g.is_connected());
    }

    #[test]
    fn four_point_example() {
        let p = pts(&[(3, 1), (2, 3), (1, 0), (0, 2)]);
        let g = NonCrossingGraph::build(&p).unwrap();
        let edges: Vec<_> = g.edges().collect();
        assert_eq!(edges, vec![(0, 1), (0, 2), (1, 2), (1, 3), (2, 3)]);
        assert!(!g.has_edge(0, 3));
    }

    #[test]
    fn collinear_lead_points_are_inserted_after_seed() {
        let p = pts(&[(10, 0), (9, 0), (8, 0), (7, 0), (5, 5), (0, 1)]);
        let g = NonCrossingGraph::build(&p).unwrap();
        assert!(g.is_connected());
        // The leading run along y = 0 stays a chain of boundary edges.
        assert!(g.has_edge(0, 1) && g.has_edge(1, 2) && g.has_edge(2, 3));
        assert!(!g.has_edge(0, 2));
    }

    #[test]
    fn build_errors() {
        assert_eq!(
            NonCrossingGraph::build(&pts(&[(0, 0), (1, 1), (2, 2), (5, 5)])),
            Err(GraphError::DegenerateInput)
        );
        assert_eq!(
            NonCrossingGraph::build(&pts(&[(0, 0), (1, 0)])),
            Err(GraphError::DegenerateInput)
        );
        assert!(matches!(
            NonCrossingGraph::build(&pts(&[(0, 0), (1, 0), (0, 1), (1, 0)])),
            Err(GraphError::DuplicatePoints { first: 1, second: 3, .. })
        ));
    }

    #[test]
    fn vertical_ties_break_on_descending_y() {
        let p = pts(&[(0, 0), (0, 5), (0, 9), (3, 4)]);
        let g = NonCrossingGraph::build(&p).unwrap();
        assert!(g.has_edge(2, 1) && g.has_edge(1, 0));
        assert!(!g.has_edge(2, 0));
        assert!(g.is_connected());
    }

    #[test]
    fn k_layer_on_triangle() {
        let p = pts(&[(0, 0), (4, 0), (1, 3)]);
        let g = NonCrossingGraph::build(&p).unwrap();
        assert_eq!(g.k_layer_neighbors(0, 1).unwrap(), vec![1, 2]);
        assert_eq!(g.k_layer_neighbors(9, 1), Err(GraphError::UnknownVertex(9)));
        assert_eq!(g.k_layer_neighbors(0, 0), Err(GraphError::ZeroLayers));
    }

    #[test]
    fn k_layer_orders_by_hop_then_id() {
        let g = NonCrossingGraph {
            vertices: pts(&[(0, 0), (1, 0), (2, 0), (3, 0)]),
            adjacency: vec![
                BTreeSet::from([3]),
                BTreeSet::from([2]),
                BTreeSet::from([1, 3]),
                BTreeSet::from([0, 2]),
            ],
            boundary: vec![],
        };
        assert_eq!(g.k_layer_neighbors(0, 1).unwrap(), vec![3]);
        assert_eq!(g.k_layer_neighbors(0, 2).unwrap(), vec![3, 2]);
        assert_eq!(g.k_layer_neighbors(0, 5).unwrap(), vec![3, 2, 1]);
    }

    #[test]
    fn dump_round_trip() {
        let p = pts(&[(3, 1), (2, 3), (1, 0), (0, 2)]);
        let g = NonCrossingGraph::build(&p).unwrap();
        let text = g.dump();
        assert!(text.starts_with("V 0 3 1\n"));
        let parsed: GraphDump = text.parse().unwrap();
        assert_eq!(parsed.vertices, p);
        assert_eq!(parsed.edges, g.edges().collect::<Vec<_>>());
        assert!(matches!("X 1".parse::<GraphDump>(), Err(GraphError::Dump { line: 1, .. })));
    }
}
