use std::str::FromStr;

use rand::distr::{weighted::WeightedIndex, Distribution};
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::Normal;
use serde::{Deserialize, Serialize};

use crate::clustering::{trajectory_to_location, Task, Worker};
use crate::geometry::PlanarPoint;

use super::config::{parse_kv, DEFAULT_TRAJECTORY_EPS_M, DEFAULT_TRAJECTORY_MIN_PTS};
use super::geo::{BoundingBox, Projection};
use super::{seed_for, HarnessError};

/// Normal distribution with non-positive draws re-sampled.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TruncatedNormal {
    pub mean: f64,
    pub std: f64,
}

impl TruncatedNormal {
    pub fn new(mean: f64, std: f64) -> Result<Self, HarnessError> {
        if !(std > 0.0 && std.is_finite() && mean.is_finite()) {
            return Err(HarnessError::InvalidConfig(format!(
                "normal({mean}, {std}) needs a positive finite std"
            )));
        }
        // Keep rejection sampling from spinning when almost all mass is below 0.
        if mean + 6.0 * std <= 0.0 {
            return Err(HarnessError::InvalidConfig(format!(
                "normal({mean}, {std}) has almost no positive mass"
            )));
        }
        Ok(Self { mean, std })
    }

    pub fn sample(&self, rng: &mut impl Rng) -> f64 {
        let normal = Normal::new(self.mean, self.std).expect("validated parameters");
        loop {
            let v = normal.sample(rng);
            if v > 0.0 {
                return v;
            }
        }
    }
}

/// Gaussian blob of locations, or a ring when `radius_m > 0`.
///
/// For a blob `spread_m` is the per-axis standard deviation; for a ring it is
/// the standard deviation of the distance from the centre around `radius_m`.
/// Offsets beyond `TAIL_CUTOFF` spreads are redrawn, so sparse tails do not
/// scatter isolated points across the map. Rewards (tasks) or abilities
/// (workers) drawn for this component are multiplied by `value_scale`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Component {
    pub lon: f64,
    pub lat: f64,
    pub spread_m: f64,
    pub weight: f64,
    #[serde(default)]
    pub radius_m: f64,
    #[serde(default = "unit_scale")]
    pub value_scale: f64,
}

fn unit_scale() -> f64 {
    1.0
}

impl FromStr for Component {
    type Err = HarnessError;

    /// `lon,lat,spread_m,weight[,radius_m[,value_scale]]`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || HarnessError::InvalidConfig(format!("bad mixture component {s:?}"));
        let v: Vec<f64> = s
            .split(',')
            .map(|p| p.trim().parse::<f64>())
            .collect::<Result<_, _>>()
            .map_err(|_| bad())?;
        let (lon, lat, spread_m, weight, radius_m, value_scale) = match v[..] {
            [lon, lat, spread_m, weight] => (lon, lat, spread_m, weight, 0.0, 1.0),
            [lon, lat, spread_m, weight, radius_m] => (lon, lat, spread_m, weight, radius_m, 1.0),
            [lon, lat, spread_m, weight, radius_m, scale] => (lon, lat, spread_m, weight, radius_m, scale),
            _ => return Err(bad()),
        };
        if !(spread_m > 0.0 && weight >= 0.0 && radius_m >= 0.0 && value_scale > 0.0 && value_scale.is_finite()) {
            return Err(bad());
        }
        Ok(Component {
            lon,
            lat,
            spread_m,
            weight,
            radius_m,
            value_scale,
        })
    }
}

pub const TAIL_CUTOFF: f64 = 2.5;

/// A spatial mixture: Gaussian components plus a uniform share over the box.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Mixture {
    pub components: Vec<Component>,
    pub background: f64,
}

impl Mixture {
    fn sampler(&self) -> Result<WeightedIndex<f64>, HarnessError> {
        let weights: Vec<f64> = std::iter::once(self.background)
            .chain(self.components.iter().map(|c| c.weight))
            .collect();
        WeightedIndex::new(&weights)
            .map_err(|_| HarnessError::InvalidConfig("mixture weights must not all be zero".into()))
    }

    /// A grid point inside `bbox` and the value scale of its component;
    /// draws falling outside are repeated.
    fn sample(
        &self,
        pick: &WeightedIndex<f64>,
        bbox: &BoundingBox,
        proj: &Projection,
        rng: &mut impl Rng,
    ) -> (PlanarPoint, f64) {
        loop {
            let i = pick.sample(rng);
            let scale = if i == 0 { 1.0 } else { self.components[i - 1].value_scale };
            let (lon, lat) = match i {
                0 => (
                    rng.random_range(bbox.min_lon..=bbox.max_lon),
                    rng.random_range(bbox.min_lat..=bbox.max_lat),
                ),
                i => {
                    let c = &self.components[i - 1];
                    let (cx, cy) = proj.to_meters(c.lon, c.lat);
                    let n = Normal::new(0.0, c.spread_m).expect("positive spread");
                    let limit = TAIL_CUTOFF * c.spread_m;
                    if c.radius_m > 0.0 {
                        let theta = rng.random_range(0.0..std::f64::consts::TAU);
                        let dr = n.sample(rng);
                        if dr.abs() > limit {
                            continue;
                        }
                        let r = c.radius_m + dr;
                        proj.from_meters(cx + r * theta.cos(), cy + r * theta.sin())
                    } else {
                        let (dx, dy) = (n.sample(rng), n.sample(rng));
                        if dx.hypot(dy) > limit {
                            continue;
                        }
                        proj.from_meters(cx + dx, cy + dy)
                    }
                }
            };
            if bbox.contains(lon, lat) {
                let p = proj.project(lon, lat);
                let (lon, lat) = proj.unproject(p);
                if bbox.contains(lon, lat) {
                    return (p, scale);
                }
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SyntheticSpec {
    pub task_count: usize,
    pub worker_count: usize,
    pub bbox: BoundingBox,
    pub tasks: Mixture,
    pub workers: Mixture,
    pub reward: TruncatedNormal,
    pub ability: TruncatedNormal,
    pub trajectory_points: usize,
    /// Fraction of each trajectory recorded around the driver's home.
    pub home_share: f64,
    pub home_spread_m: f64,
    pub trajectory_eps_m: f64,
    pub trajectory_min_pts: usize,
    pub seed: u64,
}

fn c(lon: f64, lat: f64, spread_m: f64, weight: f64) -> Component {
    Component {
        lon,
        lat,
        spread_m,
        weight,
        radius_m: 0.0,
        value_scale: 1.0,
    }
}

impl Default for SyntheticSpec {
    fn default() -> Self {
        Self {
            task_count: 5000,
            worker_count: 2000,
            bbox: BoundingBox::default(),
            // A premium hotspot inside a ring road north of the workers, and
            // a base-fare market district to the south-west. Rewards in cents.
            tasks: Mixture {
                components: vec![
                    Component {
                        value_scale: 6.0,
                        ..c(104.074, 30.706, 60.0, 0.08)
                    },
                    Component {
                        radius_m: 840.0,
                        value_scale: 1.5,
                        ..c(104.074, 30.706, 60.0, 0.25)
                    },
                    c(104.062, 30.673, 300.0, 0.28),
                ],
                background: 0.0,
            },
            workers: Mixture {
                components: vec![c(104.075, 30.680, 900.0, 1.0)],
                background: 0.0,
            },
            reward: TruncatedNormal {
                mean: 1000.0,
                std: 200.0,
            },
            ability: TruncatedNormal { mean: 5.0, std: 1.0 },
            trajectory_points: 24,
            home_share: 0.75,
            home_spread_m: 40.0,
            trajectory_eps_m: DEFAULT_TRAJECTORY_EPS_M,
            trajectory_min_pts: DEFAULT_TRAJECTORY_MIN_PTS,
            seed: 2024,
        }
    }
}

impl SyntheticSpec {
    pub fn validate(&self) -> Result<(), HarnessError> {
        let bad = |m: &str| Err(HarnessError::InvalidConfig(m.to_string()));
        if self.task_count == 0 || self.worker_count == 0 {
            return bad("task and worker counts must be positive");
        }
        if self.trajectory_points == 0 {
            return bad("trajectory_points must be positive");
        }
        if !(0.0..=1.0).contains(&self.home_share) {
            return bad("home_share must be in [0, 1]");
        }
        if !(self.home_spread_m > 0.0) {
            return bad("home_spread_m must be positive");
        }
        TruncatedNormal::new(self.reward.mean, self.reward.std)?;
        TruncatedNormal::new(self.ability.mean, self.ability.std)?;
        self.tasks.sampler()?;
        self.workers.sampler()?;
        Ok(())
    }
}

impl FromStr for SyntheticSpec {
    type Err = HarnessError;

    /// Flat `key = value` text over the defaults. The first
    /// `task_component` or `worker_component` line replaces that default
    /// mixture; later lines add to it.
    fn from_str(text: &str) -> Result<Self, Self::Err> {
        let mut spec = SyntheticSpec::default();
        let mut fresh_tasks = true;
        let mut fresh_workers = true;
        for (line, key, value) in parse_kv(text)? {
            let wrap = |e: HarnessError| HarnessError::Parse {
                line,
                message: e.to_string(),
            };
            let bad = || HarnessError::Parse {
                line,
                message: format!("bad value {value:?} for {key}"),
            };
            let f = || value.parse::<f64>().map_err(|_| bad());
            let u = || value.parse::<usize>().map_err(|_| bad());
            match key.as_str() {
                "task_count" => spec.task_count = u()?,
                "worker_count" => spec.worker_count = u()?,
                "box" => spec.bbox = value.parse().map_err(wrap)?,
                "seed" => spec.seed = value.parse().map_err(|_| bad())?,
                "reward_mean" => spec.reward.mean = f()?,
                "reward_std" => spec.reward.std = f()?,
                "ability_mean" => spec.ability.mean = f()?,
                "ability_std" => spec.ability.std = f()?,
                "task_background" => spec.tasks.background = f()?,
                "worker_background" => spec.workers.background = f()?,
                "task_component" => {
                    if std::mem::take(&mut fresh_tasks) {
                        spec.tasks.components.clear();
                    }
                    spec.tasks.components.push(value.parse().map_err(wrap)?);
                }
                "worker_component" => {
                    if std::mem::take(&mut fresh_workers) {
                        spec.workers.components.clear();
                    }
                    spec.workers.components.push(value.parse().map_err(wrap)?);
                }
                "trajectory_points" => spec.trajectory_points = u()?,
                "home_share" => spec.home_share = f()?,
                "home_spread_m" => spec.home_spread_m = f()?,
                "trajectory_eps_m" => spec.trajectory_eps_m = f()?,
                "trajectory_min_pts" => spec.trajectory_min_pts = u()?,
                _ => {
                    return Err(HarnessError::Parse {
                        line,
                        message: format!("unknown key {key:?}"),
                    })
                }
            }
        }
        spec.validate()?;
        Ok(spec)
    }
}

#[derive(Debug, Clone, PartialEq, Eq)]
pub struct TrajectoryPoint {
    pub driver_id: String,
    pub timestamp: i64,
    pub location: PlanarPoint,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SyntheticData {
    pub tasks: Vec<Task>,
    /// Each worker sits at the reduced location of its trajectory.
    pub workers: Vec<Worker>,
    pub trajectories: Vec<TrajectoryPoint>,
}

const TRAJECTORY_START: i64 = 1_475_251_200;
const TRAJECTORY_STEP_S: i64 = 600;

pub fn generate(spec: &SyntheticSpec) -> Result<SyntheticData, HarnessError> {
    spec.validate()?;
    let proj = spec.bbox.projection();
    let task_pick = spec.tasks.sampler()?;
    let worker_pick = spec.workers.sampler()?;

    let mut rng = ChaCha8Rng::seed_from_u64(seed_for(spec.seed, "synthetic-tasks"));
    let mut seen = std::collections::HashSet::new();
    let mut tasks = Vec::with_capacity(spec.task_count);
    while tasks.len() < spec.task_count {
        let (location, scale) = spec.tasks.sample(&task_pick, &spec.bbox, &proj, &mut rng);
        if !seen.insert(location) {
            continue;
        }
        tasks.push(Task {
            id: format!("t{:05}", tasks.len()),
            location,
            reward: scale * spec.reward.sample(&mut rng),
        });
    }

    let mut rng = ChaCha8Rng::seed_from_u64(seed_for(spec.seed, "synthetic-workers"));
    let home_n = (spec.home_share * spec.trajectory_points as f64).round() as usize;
    let home_noise = Normal::new(0.0, spec.home_spread_m).expect("validated spread");
    let mut workers = Vec::with_capacity(spec.worker_count);
    let mut trajectories = Vec::with_capacity(spec.worker_count * spec.trajectory_points);
    for i in 0..spec.worker_count {
        let driver_id = format!("d{i:05}");
        let (home, scale) = spec.workers.sample(&worker_pick, &spec.bbox, &proj, &mut rng);
        let (hx, hy) = home.to_meters();
        let mut points = Vec::with_capacity(spec.trajectory_points);
        let mut distinct = std::collections::HashSet::new();
        while points.len() < spec.trajectory_points {
            let p = if points.len() < home_n {
                let (lon, lat) =
                    proj.from_meters(hx + home_noise.sample(&mut rng), hy + home_noise.sample(&mut rng));
                if !spec.bbox.contains(lon, lat) {
                    continue;
                }
                proj.project(lon, lat)
            } else {
                spec.tasks.sample(&task_pick, &spec.bbox, &proj, &mut rng).0
            };
            let (lon, lat) = proj.unproject(p);
            if spec.bbox.contains(lon, lat) && distinct.insert(p) {
                points.push(p);
            }
        }
        points.shuffle(&mut rng);
        let location = trajectory_to_location(&points, spec.trajectory_eps_m, spec.trajectory_min_pts)
            .map_err(|e| HarnessError::InvalidConfig(e.to_string()))?;
        for (j, &p) in points.iter().enumerate() {
            trajectories.push(TrajectoryPoint {
                driver_id: driver_id.clone(),
                timestamp: TRAJECTORY_START + (i as i64 * 7 + j as i64) * TRAJECTORY_STEP_S,
                location: p,
            });
        }
        workers.push(Worker {
            id: driver_id,
            location,
            ability: scale * spec.ability.sample(&mut rng),
        });
    }

    Ok(SyntheticData {
        tasks,
        workers,
        trajectories,
    })
}
