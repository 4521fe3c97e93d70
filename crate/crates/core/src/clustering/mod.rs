//! Downsizing: tasks are grouped by spatial density, workers by location and
//! ability, and each group is represented by the center of its minimum
//! enclosing circle.

mod dbscan;
mod kmeans;

use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::geometry::{min_enclosing_circle, PlanarPoint};

pub use dbscan::density_groups;
pub use kmeans::{kmeans, KMeansFit};

/// Density radius used for task clustering when none is configured (metres).
pub const DEFAULT_TASK_EPS_M: f64 = 200.0;
pub const DEFAULT_TASK_MIN_PTS: usize = 5;
pub const DEFAULT_ABILITY_WEIGHT: f64 = 1.0;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum ClusterError {
    #[error("empty input")]
    EmptyInput,
    #[error("k = {k} exceeds the {n} available workers")]
    KTooLarge { k: usize, n: usize },
    #[error("k must be positive")]
    ZeroK,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Task {
    pub id: String,
    pub location: PlanarPoint,
    pub reward: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Worker {
    pub id: String,
    pub location: PlanarPoint,
    pub ability: f64,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct TaskClusterId(pub u32);

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct WorkerClusterId(pub u32);

impl fmt::Display for TaskClusterId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

impl fmt::Display for WorkerClusterId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        self.0.fmt(f)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct TaskCluster {
    pub id: TaskClusterId,
    pub members: Vec<Task>,
    pub center: PlanarPoint,
}

#[derive(Debug, Clone, PartialEq)]
pub struct WorkerCluster {
    pub id: WorkerClusterId,
    pub members: Vec<Worker>,
    pub center: PlanarPoint,
}

impl TaskCluster {
    pub fn new(id: TaskClusterId, members: Vec<Task>) -> Result<Self, ClusterError> {
        let locs: Vec<PlanarPoint> = members.iter().map(|t| t.location).collect();
        let center = cluster_center(&locs)?;
        Ok(Self { id, members, center })
    }

    pub fn total_reward(&self) -> f64 {
        self.members.iter().map(|t| t.reward).sum()
    }
}

impl WorkerCluster {
    pub fn new(id: WorkerClusterId, members: Vec<Worker>) -> Result<Self, ClusterError> {
        let locs: Vec<PlanarPoint> = members.iter().map(|w| w.location).collect();
        let center = cluster_center(&locs)?;
        Ok(Self { id, members, center })
    }

    pub fn total_ability(&self) -> f64 {
        self.members.iter().map(|w| w.ability).sum()
    }

    pub fn mean_ability(&self) -> f64 {
        self.total_ability() / self.members.len() as f64
    }
}

/// Minimum-enclosing-circle center snapped to the grid.
pub fn cluster_center(members: &[PlanarPoint]) -> Result<PlanarPoint, ClusterError> {
    min_enclosing_circle(members)
        .map(|c| c.quantized_center())
        .map_err(|_| ClusterError::EmptyInput)
}

/// Density clustering of tasks. Noise tasks become singleton clusters; ids
/// follow the position of each cluster's first member in the input.
pub fn cluster_tasks(tasks: &[Task], eps_m: f64, min_pts: usize) -> Result<Vec<TaskCluster>, ClusterError> {
    if tasks.is_empty() {
        return Err(ClusterError::EmptyInput);
    }
    check_density_params(eps_m, min_pts)?;
    let locs: Vec<PlanarPoint> = tasks.iter().map(|t| t.location).collect();
    density_groups(&locs, eps_m, min_pts)
        .into_iter()
        .enumerate()
        .map(|(i, group)| {
            let members = group.into_iter().map(|j| tasks[j].clone()).collect();
            TaskCluster::new(TaskClusterId(i as u32), members)
        })
        .collect()
}

/// Default worker cluster count, `⌈√n⌉`.
pub fn default_worker_k(n_workers: usize) -> usize {
    ((n_workers as f64).sqrt().ceil() as usize).max(1)
}

/// k-means over z-normalized `(x, y, ability_weight · ability)` features.
pub fn cluster_workers(
    workers: &[Worker],
    k: usize,
    ability_weight: f64,
    seed: u64,
) -> Result<Vec<WorkerCluster>, ClusterError> {
    if workers.is_empty() {
        return Err(ClusterError::EmptyInput);
    }
    if k == 0 {
        return Err(ClusterError::ZeroK);
    }
    if k > workers.len() {
        return Err(ClusterError::KTooLarge { k, n: workers.len() });
    }
    if !(ability_weight >= 0.0 && ability_weight.is_finite()) {
        return Err(ClusterError::InvalidParameter(format!(
            "ability weight {ability_weight}"
        )));
    }
    let features = worker_features(workers, ability_weight);
    let fit = kmeans(&features, k, seed);
    fit.groups()
        .into_iter()
        .enumerate()
        .map(|(i, group)| {
            let members = group.into_iter().map(|j| workers[j].clone()).collect();
            WorkerCluster::new(WorkerClusterId(i as u32), members)
        })
        .collect()
}

pub(crate) fn worker_features(workers: &[Worker], ability_weight: f64) -> Vec<[f64; 3]> {
    let xs: Vec<f64> = workers.iter().map(|w| w.location.x as f64).collect();
    let ys: Vec<f64> = workers.iter().map(|w| w.location.y as f64).collect();
    let abs: Vec<f64> = workers.iter().map(|w| w.ability).collect();
    let zx = zscore(&xs);
    let zy = zscore(&ys);
    let za = zscore(&abs);
    (0..workers.len())
        .map(|i| [zx[i], zy[i], ability_weight * za[i]])
        .collect()
}

fn zscore(values: &[f64]) -> Vec<f64> {
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    let var = values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n;
    let sd = if var > 0.0 { var.sqrt() } else { 1.0 };
    values.iter().map(|v| (v - mean) / sd).collect()
}

/// Representative location of a trajectory: the grid-snapped enclosing-circle
/// center of its largest density cluster (ties go to the lower cluster id).
pub fn trajectory_to_location(
    trajectory: &[PlanarPoint],
    eps_m: f64,
    min_pts: usize,
) -> Result<PlanarPoint, ClusterError> {
    if trajectory.is_empty() {
        return Err(ClusterError::EmptyInput);
    }
    check_density_params(eps_m, min_pts)?;
    let groups = density_groups(trajectory, eps_m, min_pts);
    let mut best = &groups[0];
    for g in &groups[1..] {
        if g.len() > best.len() {
            best = g;
        }
    }
    let members: Vec<PlanarPoint> = best.iter().map(|&i| trajectory[i]).collect();
    cluster_center(&members)
}

fn check_density_params(eps_m: f64, min_pts: usize) -> Result<(), ClusterError> {
    if !(eps_m > 0.0 && eps_m.is_finite()) {
        return Err(ClusterError::InvalidParameter(format!("eps {eps_m}")));
    }
    if min_pts == 0 {
        return Err(ClusterError::InvalidParameter("min_pts must be at least 1".into()));
    }
    Ok(())
}
