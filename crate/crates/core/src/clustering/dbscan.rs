use std::collections::HashMap;

use crate::geometry::{PlanarPoint, GRID_UNITS_PER_METER};

#[derive(Clone, Copy, PartialEq, Eq)]
enum Label {
    Unvisited,
    Noise,
    Cluster(usize),
}

/// Uniform grid with `eps`-sized cells for fixed-radius neighbour queries.
struct CellIndex<'a> {
    points: &'a [PlanarPoint],
    cell: f64,
    eps2: f64,
    cells: HashMap<(i64, i64), Vec<usize>>,
}

impl<'a> CellIndex<'a> {
    fn new(points: &'a [PlanarPoint], eps_grid: f64) -> Self {
        let cell = eps_grid.max(1.0);
        let mut cells: HashMap<(i64, i64), Vec<usize>> = HashMap::new();
        for (i, p) in points.iter().enumerate() {
            cells.entry(Self::key_of(*p, cell)).or_default().push(i);
        }
        Self {
            points,
            cell,
            eps2: eps_grid * eps_grid,
            cells,
        }
    }

    fn key_of(p: PlanarPoint, cell: f64) -> (i64, i64) {
        ((p.x as f64 / cell).floor() as i64, (p.y as f64 / cell).floor() as i64)
    }

    /// Indices within `eps` of point `i` (inclusive, `i` itself included),
    /// ascending.
    fn region(&self, i: usize) -> Vec<usize> {
        let p = self.points[i];
        let (cx, cy) = Self::key_of(p, self.cell);
        let mut out = Vec::new();
        for dx in -1..=1 {
            for dy in -1..=1 {
                if let Some(bucket) = self.cells.get(&(cx + dx, cy + dy)) {
                    out.extend(
                        bucket
                            .iter()
                            .copied()
                            .filter(|&j| p.distance_sq(self.points[j]) as f64 <= self.eps2),
                    );
                }
            }
        }
        out.sort_unstable();
        out
    }
}

/// Density-based clustering with an `eps`-radius neighbourhood (metres,
/// inclusive) and a core threshold of `min_pts` points counting the point
/// itself. Points are visited in input order; a border point joins the first
/// cluster that reaches it. Noise points are returned as singleton groups.
///
/// Groups are ordered by their smallest member index and list members in
/// ascending order.
pub fn density_groups(points: &[PlanarPoint], eps_m: f64, min_pts: usize) -> Vec<Vec<usize>> {
    let index = CellIndex::new(points, eps_m * GRID_UNITS_PER_METER);
    let mut labels = vec![Label::Unvisited; points.len()];
    let mut next_cluster = 0;

    for i in 0..points.len() {
        if labels[i] != Label::Unvisited {
            continue;
        }
        let neighbours = index.region(i);
        if neighbours.len() < min_pts {
            labels[i] = Label::Noise;
            continue;
        }
        let c = next_cluster;
        next_cluster += 1;
        labels[i] = Label::Cluster(c);
        let mut seeds = neighbours;
        let mut at = 0;
        while at < seeds.len() {
            let q = seeds[at];
            at += 1;
            match labels[q] {
                Label::Noise => labels[q] = Label::Cluster(c),
                Label::Unvisited => {
                    labels[q] = Label::Cluster(c);
                    let region = index.region(q);
                    if region.len() >= min_pts {
                        seeds.extend(region);
                    }
                }
                Label::Cluster(_) => {}
            }
        }
    }

    let mut clusters: Vec<Vec<usize>> = vec![Vec::new(); next_cluster];
    let mut groups: Vec<Vec<usize>> = Vec::new();
    for (i, label) in labels.iter().enumerate() {
        match label {
            Label::Cluster(c) => clusters[*c].push(i),
            _ => groups.push(vec![i]),
        }
    }
    groups.extend(clusters);
    groups.sort_by_key(|g| g[0]);
    groups
}
