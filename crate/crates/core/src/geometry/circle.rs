use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{GeometryError, PlanarPoint, GRID_UNITS_PER_METER};

/// Shuffle seed used by [`min_enclosing_circle`].
pub const MEC_SEED: u64 = 0x6d65_635f_7365_6564;

/// A circle in metres.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Circle {
    pub center: (f64, f64),
    pub radius: f64,
}

impl Circle {
    /// Nearest grid point to the center.
    pub fn quantized_center(&self) -> PlanarPoint {
        PlanarPoint::from_meters(self.center.0, self.center.1)
    }

    pub fn contains(&self, p: PlanarPoint, rel_tol: f64) -> bool {
        let (x, y) = p.to_meters();
        (x - self.center.0).hypot(y - self.center.1) <= self.radius * (1.0 + rel_tol) + 1e-9
    }
}

// Working circle in grid units, relative to an origin point to keep the
// arithmetic well conditioned.
#[derive(Clone, Copy)]
struct Disk {
    cx: f64,
    cy: f64,
    r2: f64,
}

impl Disk {
    fn point((x, y): (f64, f64)) -> Self {
        Disk { cx: x, cy: y, r2: 0.0 }
    }

    fn diametral(a: (f64, f64), b: (f64, f64)) -> Self {
        let cx = (a.0 + b.0) / 2.0;
        let cy = (a.1 + b.1) / 2.0;
        Disk {
            cx,
            cy,
            r2: dist2((cx, cy), a).max(dist2((cx, cy), b)),
        }
    }

    fn circumscribed(a: (f64, f64), b: (f64, f64), c: (f64, f64)) -> Self {
        let (bx, by) = (b.0 - a.0, b.1 - a.1);
        let (cx, cy) = (c.0 - a.0, c.1 - a.1);
        let d = 2.0 * (bx * cy - by * cx);
        if d == 0.0 {
            // Collinear triple: the farthest pair spans the other point.
            let candidates = [Disk::diametral(a, b), Disk::diametral(a, c), Disk::diametral(b, c)];
            return candidates
                .into_iter()
                .max_by(|u, v| u.r2.total_cmp(&v.r2))
                .unwrap();
        }
        let b2 = bx * bx + by * by;
        let c2 = cx * cx + cy * cy;
        let ux = (cy * b2 - by * c2) / d;
        let uy = (bx * c2 - cx * b2) / d;
        let center = (a.0 + ux, a.1 + uy);
        Disk {
            cx: center.0,
            cy: center.1,
            r2: dist2(center, a).max(dist2(center, b)).max(dist2(center, c)),
        }
    }

    fn contains(&self, p: (f64, f64)) -> bool {
        dist2((self.cx, self.cy), p) <= self.r2 * (1.0 + 1e-12) + 1e-9
    }
}

fn dist2(a: (f64, f64), b: (f64, f64)) -> f64 {
    let dx = a.0 - b.0;
    let dy = a.1 - b.1;
    dx * dx + dy * dy
}

/// Smallest enclosing circle, by the randomized incremental construction with
/// a fixed shuffle seed.
pub fn min_enclosing_circle(points: &[PlanarPoint]) -> Result<Circle, GeometryError> {
    min_enclosing_circle_seeded(points, MEC_SEED)
}

pub fn min_enclosing_circle_seeded(
    points: &[PlanarPoint],
    seed: u64,
) -> Result<Circle, GeometryError> {
    let origin = *points.first().ok_or(GeometryError::EmptyInput)?;
    let mut pts: Vec<(f64, f64)> = points
        .iter()
        .map(|p| ((p.x - origin.x) as f64, (p.y - origin.y) as f64))
        .collect();
    pts.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));
    pts.dedup();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    pts.shuffle(&mut rng);

    let mut disk = Disk::point(pts[0]);
    for i in 1..pts.len() {
        if disk.contains(pts[i]) {
            continue;
        }
        disk = Disk::point(pts[i]);
        for j in 0..i {
            if disk.contains(pts[j]) {
                continue;
            }
            disk = Disk::diametral(pts[i], pts[j]);
            for k in 0..j {
                if !disk.contains(pts[k]) {
                    disk = Disk::circumscribed(pts[i], pts[j], pts[k]);
                }
            }
        }
    }

    Ok(Circle {
        center: (
            (disk.cx + origin.x as f64) / GRID_UNITS_PER_METER,
            (disk.cy + origin.y as f64) / GRID_UNITS_PER_METER,
        ),
        radius: disk.r2.sqrt() / GRID_UNITS_PER_METER,
    })
}
