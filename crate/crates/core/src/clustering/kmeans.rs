use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const MAX_ITERATIONS: usize = 200;
pub const MOVEMENT_TOLERANCE: f64 = 1e-6;

#[derive(Debug, Clone, PartialEq)]
pub struct KMeansFit {
    pub labels: Vec<usize>,
    pub centroids: Vec<[f64; 3]>,
    /// Within-cluster sum of squared distances after each centroid update.
    pub inertia_history: Vec<f64>,
}

impl KMeansFit {
    /// Member indices per cluster, ordered by each cluster's first member.
    pub fn groups(&self) -> Vec<Vec<usize>> {
        let k = self.centroids.len();
        let mut groups = vec![Vec::new(); k];
        for (i, &l) in self.labels.iter().enumerate() {
            groups[l].push(i);
        }
        groups.retain(|g| !g.is_empty());
        groups.sort_by_key(|g| g[0]);
        groups
    }

    pub fn inertia(&self) -> f64 {
        *self.inertia_history.last().unwrap_or(&0.0)
    }
}

fn dist2(a: &[f64; 3], b: &[f64; 3]) -> f64 {
    (0..3).map(|d| (a[d] - b[d]).powi(2)).sum()
}

fn nearest(p: &[f64; 3], centroids: &[[f64; 3]]) -> (usize, f64) {
    let mut best = (0, f64::INFINITY);
    for (j, c) in centroids.iter().enumerate() {
        let d = dist2(p, c);
        if d < best.1 {
            best = (j, d);
        }
    }
    best
}

fn seed_centroids(points: &[[f64; 3]], k: usize, rng: &mut ChaCha8Rng) -> Vec<[f64; 3]> {
    let mut chosen = vec![false; points.len()];
    let first = rng.random_range(0..points.len());
    chosen[first] = true;
    let mut centroids = vec![points[first]];
    let mut d2: Vec<f64> = points.iter().map(|p| dist2(p, &points[first])).collect();
    while centroids.len() < k {
        let next = match WeightedIndex::new(&d2) {
            Ok(dist) => dist.sample(rng),
            // Every remaining point coincides with a centroid.
            Err(_) => chosen.iter().position(|&c| !c).unwrap(),
        };
        chosen[next] = true;
        centroids.push(points[next]);
        for (i, p) in points.iter().enumerate() {
            d2[i] = d2[i].min(dist2(p, &points[next]));
        }
    }
    centroids
}

/// Lloyd iterations from a D²-weighted seeding. Stops after
/// [`MAX_ITERATIONS`] or once no centroid moves more than
/// [`MOVEMENT_TOLERANCE`]. A cluster left empty takes the point farthest from
/// its centroid in the currently largest cluster.
pub fn kmeans(points: &[[f64; 3]], k: usize, seed: u64) -> KMeansFit {
    assert!(k >= 1 && k <= points.len(), "k out of range");
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut centroids = seed_centroids(points, k, &mut rng);
    let mut labels = vec![0usize; points.len()];
    let mut inertia_history = Vec::new();

    for _ in 0..MAX_ITERATIONS {
        for (i, p) in points.iter().enumerate() {
            labels[i] = nearest(p, &centroids).0;
        }
        repair_empty(points, &mut labels, &centroids, k);

        let mut sums = vec![[0.0f64; 3]; k];
        let mut counts = vec![0usize; k];
        for (p, &l) in points.iter().zip(&labels) {
            for d in 0..3 {
                sums[l][d] += p[d];
            }
            counts[l] += 1;
        }
        let mut moved: f64 = 0.0;
        for j in 0..k {
            let n = counts[j] as f64;
            let next = [sums[j][0] / n, sums[j][1] / n, sums[j][2] / n];
            moved = moved.max(dist2(&next, &centroids[j]).sqrt());
            centroids[j] = next;
        }
        inertia_history.push(
            points
                .iter()
                .zip(&labels)
                .map(|(p, &l)| dist2(p, &centroids[l]))
                .sum(),
        );
        if moved < MOVEMENT_TOLERANCE {
            break;
        }
    }

    KMeansFit {
        labels,
        centroids,
        inertia_history,
    }
}

fn repair_empty(points: &[[f64; 3]], labels: &mut [usize], centroids: &[[f64; 3]], k: usize) {
    loop {
        let mut counts = vec![0usize; k];
        for &l in labels.iter() {
            counts[l] += 1;
        }
        let Some(empty) = counts.iter().position(|&c| c == 0) else {
            return;
        };
        let largest = (0..k).max_by_key(|&j| (counts[j], std::cmp::Reverse(j))).unwrap();
        let far = (0..points.len())
            .filter(|&i| labels[i] == largest)
            .max_by(|&a, &b| {
                dist2(&points[a], &centroids[largest])
                    .total_cmp(&dist2(&points[b], &centroids[largest]))
                    .then(b.cmp(&a))
            })
            .unwrap();
        labels[far] = empty;
    }
}
