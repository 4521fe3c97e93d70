//! Brute-force reference implementations used to cross-check the fast paths,
//! plus a small self-check suite driven from the command line.
//!
//! Nothing in here is called by the allocation pipeline itself.

use std::collections::BTreeMap;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::clustering::{TaskClusterId, WorkerClusterId};
use crate::geometry::{
    classify_intersection, convex_hull, on_segment, Circle, IntersectionKind, PlanarPoint,
    GRID_UNITS_PER_METER,
};
use crate::matching::{allocate, merge_ranks, AllocationResult, Assignment, Cap, MatchingTable};
use crate::ncgraph::{NonCrossingGraph, VertexId};

/// Edge pairs that violate the non-crossing property: pairs without a common
/// endpoint that meet anywhere, and pairs with one that overlap.
pub fn crossing_pairs(graph: &NonCrossingGraph) -> Vec<((VertexId, VertexId), (VertexId, VertexId))> {
    let edges: Vec<(VertexId, VertexId)> = graph.edges().collect();
    let segs: Vec<_> = graph.edge_segments().collect();
    let mut bad = Vec::new();
    for i in 0..edges.len() {
        for j in i + 1..edges.len() {
            let (a, b) = edges[i];
            let (c, d) = edges[j];
            let adjacent = a == c || a == d || b == c || b == d;
            let kind = classify_intersection(&segs[i], &segs[j]);
            let ok = if adjacent {
                kind != IntersectionKind::CollinearOverlap && kind != IntersectionKind::ProperInterior
            } else {
                kind == IntersectionKind::None
            };
            if !ok {
                bad.push((edges[i], edges[j]));
            }
        }
    }
    bad
}

/// Every edge of the vertex set's convex hull is present, subdivided at any
/// vertices lying on it.
pub fn hull_edges_present(graph: &NonCrossingGraph) -> bool {
    let pts = graph.vertices();
    let Ok(hull) = convex_hull(pts) else {
        return false;
    };
    let present = hull.edges().all(|(a, b)| {
        let mut on: Vec<VertexId> = (0..pts.len()).filter(|&v| on_segment(a, b, pts[v])).collect();
        on.sort_by_key(|&v| pts[v].distance_sq(a));
        on.windows(2).all(|w| graph.has_edge(w[0], w[1]))
    });
    present
}

/// Smallest circle among all pair- and triple-defined circles that contains
/// every point. O(n⁴) overall; meant for small inputs.
pub fn brute_force_mec(points: &[PlanarPoint]) -> Option<Circle> {
    let pts: Vec<(f64, f64)> = points.iter().map(|p| (p.x as f64, p.y as f64)).collect();
    if pts.is_empty() {
        return None;
    }
    let mut candidates: Vec<((f64, f64), f64)> = vec![(pts[0], 0.0)];
    for i in 0..pts.len() {
        for j in i + 1..pts.len() {
            let c = ((pts[i].0 + pts[j].0) / 2.0, (pts[i].1 + pts[j].1) / 2.0);
            candidates.push((c, dist(c, pts[i])));
            for k in j + 1..pts.len() {
                if let Some(c) = circumcenter(pts[i], pts[j], pts[k]) {
                    candidates.push((c, dist(c, pts[i])));
                }
            }
        }
    }
    candidates
        .into_iter()
        .filter(|(c, r)| pts.iter().all(|&p| dist(*c, p) <= r * (1.0 + 1e-10) + 1e-7))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .map(|(c, r)| Circle {
            center: (c.0 / GRID_UNITS_PER_METER, c.1 / GRID_UNITS_PER_METER),
            radius: r / GRID_UNITS_PER_METER,
        })
}

fn dist(a: (f64, f64), b: (f64, f64)) -> f64 {
    (a.0 - b.0).hypot(a.1 - b.1)
}

fn circumcenter(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> Option<(f64, f64)> {
    let d = 2.0 * (a.0 * (b.1 - c.1) + b.0 * (c.1 - a.1) + c.0 * (a.1 - b.1));
    if d == 0.0 {
        return None;
    }
    let a2 = a.0 * a.0 + a.1 * a.1;
    let b2 = b.0 * b.0 + b.1 * b.1;
    let c2 = c.0 * c.0 + c.1 * c.1;
    Some((
        (a2 * (b.1 - c.1) + b2 * (c.1 - a.1) + c2 * (a.1 - b.1)) / d,
        (a2 * (c.0 - b.0) + b2 * (a.0 - c.0) + c2 * (b.0 - a.0)) / d,
    ))
}

/// Textbook density clustering with exhaustive neighbour scans. Same
/// conventions as [`crate::clustering::density_groups`]: inclusive radius,
/// the point counts toward its own neighbourhood, input-order visiting, noise
/// as singletons, groups ordered by first member.
pub fn reference_density_groups(points: &[PlanarPoint], eps_m: f64, min_pts: usize) -> Vec<Vec<usize>> {
    let eps = eps_m * GRID_UNITS_PER_METER;
    let n = points.len();
    let near = |i: usize| -> Vec<usize> {
        (0..n)
            .filter(|&j| {
                let dx = (points[i].x - points[j].x) as f64;
                let dy = (points[i].y - points[j].y) as f64;
                dx * dx + dy * dy <= eps * eps
            })
            .collect()
    };
    // None = unvisited, Some(None) = noise, Some(Some(c)) = cluster c.
    let mut label: Vec<Option<Option<usize>>> = vec![None; n];
    let mut clusters = 0;
    for i in 0..n {
        if label[i].is_some() {
            continue;
        }
        let nb = near(i);
        if nb.len() < min_pts {
            label[i] = Some(None);
            continue;
        }
        let c = clusters;
        clusters += 1;
        label[i] = Some(Some(c));
        let mut queue: std::collections::VecDeque<usize> = nb.into_iter().collect();
        while let Some(q) = queue.pop_front() {
            match label[q] {
                Some(Some(_)) => {}
                Some(None) => label[q] = Some(Some(c)),
                None => {
                    label[q] = Some(Some(c));
                    let nq = near(q);
                    if nq.len() >= min_pts {
                        queue.extend(nq);
                    }
                }
            }
        }
    }
    let mut groups: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    let mut by_cluster: BTreeMap<usize, Vec<usize>> = BTreeMap::new();
    for (i, l) in label.iter().enumerate() {
        match l {
            Some(Some(c)) => by_cluster.entry(*c).or_default().push(i),
            _ => {
                groups.insert(i, vec![i]);
            }
        }
    }
    for (_, members) in by_cluster {
        groups.insert(members[0], members);
    }
    groups.into_values().collect()
}

/// Greedy allocation written out step by step over a dense value matrix.
pub fn reference_allocate(table: &MatchingTable, sequence: &[WorkerClusterId], cap: Cap) -> AllocationResult {
    let mut tasks: Vec<TaskClusterId> = table.entries.keys().map(|&(_, t)| t).collect();
    tasks.sort();
    tasks.dedup();
    let limit = match cap {
        Cap::Limited(c) => Some(c),
        Cap::Unlimited => None,
    };
    let mut counts = vec![0u32; tasks.len()];
    let mut result = AllocationResult::default();
    for &worker in sequence {
        let mut best: Option<(usize, f64)> = None;
        for (j, &task) in tasks.iter().enumerate() {
            let Some(v) = table.entries.get(&(worker, task)).copied() else { continue };
            if limit.is_some_and(|c| counts[j] >= c) {
                continue;
            }
            // Strict comparison keeps the lower task id on ties.
            if best.is_none_or(|(_, b)| v < b) {
                best = Some((j, v));
            }
        }
        match best {
            Some((j, value)) => {
                counts[j] += 1;
                result.assignments.push(Assignment {
                    worker,
                    task: tasks[j],
                    value,
                });
            }
            None => result.unmatched_workers.push(worker),
        }
    }
    for (j, &task) in tasks.iter().enumerate() {
        if counts[j] > 0 {
            result.allocation_counts.insert(task, counts[j]);
        }
    }
    result
}

/// A random matching table over at most `max_w` × `max_t` clusters whose
/// values are merged ranks, so ties are common, plus a shuffled traversal.
pub fn random_matching_instance(
    rng: &mut impl Rng,
    max_w: u32,
    max_t: u32,
) -> (MatchingTable, Vec<WorkerClusterId>) {
    use rand::seq::SliceRandom;
    let nw = rng.random_range(1..=max_w);
    let nt = rng.random_range(1..=max_t);
    let w = [0.0, 0.25, 0.5, 0.75, 1.0][rng.random_range(0..5)];
    let mut table = MatchingTable::default();
    for i in 0..nw {
        for j in 0..nt {
            if rng.random_bool(0.6) {
                let rt = rng.random_range(1..=nt);
                let rw = rng.random_range(1..=nw);
                let v = merge_ranks(rt, rw, w).expect("valid ranks and weight");
                table.entries.insert((WorkerClusterId(i), TaskClusterId(j)), v);
            }
        }
    }
    let mut sequence: Vec<WorkerClusterId> = (0..nw).map(WorkerClusterId).collect();
    sequence.shuffle(rng);
    (table, sequence)
}

/// Uniform random distinct grid points in `[0, span)²`.
pub fn random_points(rng: &mut impl Rng, n: usize, span: i64) -> Vec<PlanarPoint> {
    let mut seen = std::collections::HashSet::new();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let p = PlanarPoint::new(rng.random_range(0..span), rng.random_range(0..span));
        if seen.insert(p) {
            out.push(p);
        }
    }
    out
}

#[derive(Debug, Clone)]
pub struct OracleReport {
    pub name: &'static str,
    pub cases: usize,
    pub failures: usize,
}

impl OracleReport {
    pub fn passed(&self) -> bool {
        self.failures == 0
    }
}

/// Runs each oracle over a batch of seeded random instances.
pub fn run_suite(seed: u64) -> Vec<OracleReport> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut reports = Vec::new();

    let mut failures = 0;
    let cases = 40;
    for _ in 0..cases {
        let n = rng.random_range(3..200);
        let pts = random_points(&mut rng, n, 10_000);
        match NonCrossingGraph::build(&pts) {
            Ok(g) => {
                if !crossing_pairs(&g).is_empty() || !g.is_connected() || !hull_edges_present(&g) {
                    failures += 1;
                }
            }
            Err(_) => {}
        }
    }
    reports.push(OracleReport {
        name: "build: planarity, hull edges, connectivity",
        cases,
        failures,
    });

    let mut failures = 0;
    let cases = 200;
    for _ in 0..cases {
        let n = rng.random_range(3..60);
        let pts = random_points(&mut rng, n, 2_000);
        let Ok(g) = NonCrossingGraph::build(&pts) else { continue };
        let before = g.clone();
        let p = loop {
            let p = PlanarPoint::new(rng.random_range(-200..2_200), rng.random_range(-200..2_200));
            if !pts.contains(&p) {
                break p;
            }
        };
        match crate::ncgraph::insert(&g, p) {
            Ok(out) => {
                if g != before
                    || !crossing_pairs(&out.graph).is_empty()
                    || !out.graph.is_connected()
                    || !hull_edges_present(&out.graph)
                {
                    failures += 1;
                }
            }
            Err(_) => failures += 1,
        }
    }
    reports.push(OracleReport {
        name: "insert: planarity, connectivity, isolation",
        cases,
        failures,
    });

    let mut failures = 0;
    let cases = 100;
    for _ in 0..cases {
        let n = rng.random_range(1..10);
        let pts = random_points(&mut rng, n, 100_000);
        let fast = crate::geometry::min_enclosing_circle(&pts).unwrap();
        let slow = brute_force_mec(&pts).unwrap();
        if !circles_agree(&fast, &slow) {
            failures += 1;
        }
    }
    reports.push(OracleReport {
        name: "min enclosing circle vs pair/triple enumeration",
        cases,
        failures,
    });

    let mut failures = 0;
    let cases = 20;
    for _ in 0..cases {
        let pts = random_points(&mut rng, 150, 50_000);
        let eps = rng.random_range(20.0..60.0);
        let min_pts = rng.random_range(1..6);
        if crate::clustering::density_groups(&pts, eps, min_pts)
            != reference_density_groups(&pts, eps, min_pts)
        {
            failures += 1;
        }
    }
    reports.push(OracleReport {
        name: "density clustering vs exhaustive reference",
        cases,
        failures,
    });

    let mut failures = 0;
    let cases = 200;
    for i in 0..cases {
        let (table, sequence) = random_matching_instance(&mut rng, 8, 8);
        let cap = [Cap::Limited(1), Cap::Limited(2), Cap::Limited(3), Cap::Unlimited][i % 4];
        if allocate(&table, &sequence, cap) != reference_allocate(&table, &sequence, cap) {
            failures += 1;
        }
    }
    reports.push(OracleReport {
        name: "greedy allocation vs step-by-step reference",
        cases,
        failures,
    });

    reports
}

/// Centers within one grid unit and radii within 1e-9 relative.
pub fn circles_agree(a: &Circle, b: &Circle) -> bool {
    let dc = (a.center.0 - b.center.0).hypot(a.center.1 - b.center.1) * GRID_UNITS_PER_METER;
    let scale = a.radius.max(b.radius).max(f64::MIN_POSITIVE);
    dc <= 1.0 && ((a.radius - b.radius).abs() / scale <= 1e-9 || a.radius == b.radius)
}
