//! Scoring adjacent clusters and ranking each cluster's candidate list.
//!
//! A task cluster seen from a worker cluster scores
//! `α·value − β·dispersion − γ·distance`, where value is the mean or total
//! reward and dispersion is the largest distance between two member tasks. A
//! worker cluster seen from a task cluster scores the same way with ability
//! in place of reward and the population variance of abilities as
//! dispersion. Distances are metres between cluster centers.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clustering::{TaskCluster, TaskClusterId, WorkerCluster, WorkerClusterId};
use crate::geometry::hull::hull_indices;
use crate::geometry::PlanarPoint;
use crate::ncgraph::AdjacencyLists;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum EvaluationError {
    #[error("weights must be non-negative with at least one positive")]
    InvalidWeights,
    #[error("unknown evaluation basis {0:?}")]
    UnknownBasis(String),
    #[error("adjacency references unknown task cluster {0}")]
    UnknownTaskCluster(TaskClusterId),
    #[error("adjacency references unknown worker cluster {0}")]
    UnknownWorkerCluster(WorkerClusterId),
    #[error("rank dump line {line}: {message}")]
    Dump { line: usize, message: String },
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EvalWeights {
    pub alpha: f64,
    pub beta: f64,
    pub gamma: f64,
}

impl EvalWeights {
    pub fn new(alpha: f64, beta: f64, gamma: f64) -> Result<Self, EvaluationError> {
        let w = Self { alpha, beta, gamma };
        let all = [alpha, beta, gamma];
        if all.iter().any(|v| !(v.is_finite() && *v >= 0.0)) || all.iter().all(|&v| v == 0.0) {
            return Err(EvaluationError::InvalidWeights);
        }
        Ok(w)
    }

    pub fn scaled(self, c: f64) -> Self {
        Self {
            alpha: self.alpha * c,
            beta: self.beta * c,
            gamma: self.gamma * c,
        }
    }
}

impl Default for EvalWeights {
    fn default() -> Self {
        Self {
            alpha: 1.0,
            beta: 1.0,
            gamma: 1.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub enum Aggregate {
    Avg,
    Sum,
}

impl fmt::Display for Aggregate {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Aggregate::Avg => "AVG",
            Aggregate::Sum => "SUM",
        })
    }
}

/// Aggregation used for task value and for worker value.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize, Deserialize)]
pub struct EvalBasis {
    pub task_side: Aggregate,
    pub worker_side: Aggregate,
}

impl EvalBasis {
    pub const ALL: [EvalBasis; 4] = [
        EvalBasis::new(Aggregate::Avg, Aggregate::Avg),
        EvalBasis::new(Aggregate::Sum, Aggregate::Sum),
        EvalBasis::new(Aggregate::Avg, Aggregate::Sum),
        EvalBasis::new(Aggregate::Sum, Aggregate::Avg),
    ];

    pub const fn new(task_side: Aggregate, worker_side: Aggregate) -> Self {
        Self {
            task_side,
            worker_side,
        }
    }
}

impl fmt::Display for EvalBasis {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}-{}", self.task_side, self.worker_side)
    }
}

impl FromStr for EvalBasis {
    type Err = EvaluationError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let side = |t: &str| match t.trim().to_ascii_uppercase().as_str() {
            "AVG" => Some(Aggregate::Avg),
            "SUM" => Some(Aggregate::Sum),
            _ => None,
        };
        let (t, w) = s
            .split_once('-')
            .ok_or_else(|| EvaluationError::UnknownBasis(s.to_string()))?;
        match (side(t), side(w)) {
            (Some(t), Some(w)) => Ok(EvalBasis::new(t, w)),
            _ => Err(EvaluationError::UnknownBasis(s.to_string())),
        }
    }
}

fn aggregate(values: impl Iterator<Item = f64>, how: Aggregate) -> f64 {
    let (sum, n) = values.fold((0.0, 0usize), |(s, n), v| (s + v, n + 1));
    match how {
        Aggregate::Sum => sum,
        Aggregate::Avg => sum / n as f64,
    }
}

pub fn task_value(cluster: &TaskCluster, basis: Aggregate) -> f64 {
    aggregate(cluster.members.iter().map(|t| t.reward), basis)
}

pub fn worker_value(cluster: &WorkerCluster, basis: Aggregate) -> f64 {
    aggregate(cluster.members.iter().map(|w| w.ability), basis)
}

/// Largest distance between two member tasks, in metres.
pub fn task_dispersion(cluster: &TaskCluster) -> f64 {
    let locs: Vec<PlanarPoint> = cluster.members.iter().map(|t| t.location).collect();
    max_pairwise_distance(&locs)
}

fn max_pairwise_distance(points: &[PlanarPoint]) -> f64 {
    // The farthest pair lies on the hull; fall back to all points when the
    // set is collinear.
    let candidates: Vec<PlanarPoint> = match hull_indices(points, false) {
        Some(idx) => idx.into_iter().map(|i| points[i]).collect(),
        None => points.to_vec(),
    };
    let mut best: i128 = 0;
    for i in 0..candidates.len() {
        for j in i + 1..candidates.len() {
            best = best.max(candidates[i].distance_sq(candidates[j]));
        }
    }
    (best as f64).sqrt() / crate::geometry::GRID_UNITS_PER_METER
}

/// Population variance of member abilities.
pub fn worker_dispersion(cluster: &WorkerCluster) -> f64 {
    let n = cluster.members.len() as f64;
    let mean = cluster.members.iter().map(|w| w.ability).sum::<f64>() / n;
    cluster
        .members
        .iter()
        .map(|w| (w.ability - mean).powi(2))
        .sum::<f64>()
        / n
}

/// Score of `cluster` as a candidate for the worker cluster `anchor`.
pub fn eval_task(cluster: &TaskCluster, anchor: &WorkerCluster, weights: EvalWeights, basis: EvalBasis) -> f64 {
    score(
        weights,
        task_value(cluster, basis.task_side),
        task_dispersion(cluster),
        cluster.center.distance_m(anchor.center),
    )
}

/// Score of `cluster` as a candidate for the task cluster `anchor`.
pub fn eval_worker(cluster: &WorkerCluster, anchor: &TaskCluster, weights: EvalWeights, basis: EvalBasis) -> f64 {
    score(
        weights,
        worker_value(cluster, basis.worker_side),
        worker_dispersion(cluster),
        cluster.center.distance_m(anchor.center),
    )
}

/// `α·value − β·dispersion − γ·distance`.
pub fn score(weights: EvalWeights, value: f64, dispersion: f64, distance: f64) -> f64 {
    weights.alpha * value - weights.beta * dispersion - weights.gamma * distance
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RankedEntry<C> {
    pub candidate: C,
    pub score: f64,
    pub rank: u32,
}

/// Per-anchor candidate lists sorted by descending score, ranks from 1, ties
/// by ascending candidate id.
#[derive(Debug, Clone, PartialEq)]
pub struct RankedAdjacency<A: Ord, C> {
    pub lists: BTreeMap<A, Vec<RankedEntry<C>>>,
}

impl<A: Ord, C> Default for RankedAdjacency<A, C> {
    fn default() -> Self {
        Self {
            lists: BTreeMap::new(),
        }
    }
}

/// Each worker cluster's task candidates, scored by task evaluation.
pub type WorkerRanking = RankedAdjacency<WorkerClusterId, TaskClusterId>;
/// Each task cluster's worker candidates, scored by worker evaluation.
pub type TaskRanking = RankedAdjacency<TaskClusterId, WorkerClusterId>;

impl<A: Ord + Copy, C: Ord + Copy> RankedAdjacency<A, C> {
    pub fn rank_of(&self, anchor: A, candidate: C) -> Option<u32> {
        self.lists
            .get(&anchor)?
            .iter()
            .find(|e| e.candidate == candidate)
            .map(|e| e.rank)
    }

    pub fn from_scores(scored: impl IntoIterator<Item = (A, Vec<(C, f64)>)>) -> Self {
        let lists = scored
            .into_iter()
            .map(|(anchor, scores)| (anchor, rank_scores(scores)))
            .collect();
        Self { lists }
    }
}

/// Sorts `(candidate, score)` pairs by descending score, ascending id on ties,
/// and assigns ranks from 1.
pub fn rank_scores<C: Ord + Copy>(mut scores: Vec<(C, f64)>) -> Vec<RankedEntry<C>> {
    scores.sort_by(|a, b| b.1.total_cmp(&a.1).then(a.0.cmp(&b.0)));
    scores
        .into_iter()
        .enumerate()
        .map(|(i, (candidate, score))| RankedEntry {
            candidate,
            score,
            rank: i as u32 + 1,
        })
        .collect()
}

/// Scores and ranks both directions of the adjacency.
pub fn rank_candidates(
    adjacency: &AdjacencyLists,
    task_clusters: &[TaskCluster],
    worker_clusters: &[WorkerCluster],
    weights: EvalWeights,
    basis: EvalBasis,
) -> Result<(WorkerRanking, TaskRanking), EvaluationError> {
    let tasks: HashMap<TaskClusterId, &TaskCluster> = task_clusters.iter().map(|c| (c.id, c)).collect();
    let workers: HashMap<WorkerClusterId, &WorkerCluster> =
        worker_clusters.iter().map(|c| (c.id, c)).collect();
    let task_of = |id: TaskClusterId| tasks.get(&id).copied().ok_or(EvaluationError::UnknownTaskCluster(id));
    let worker_of =
        |id: WorkerClusterId| workers.get(&id).copied().ok_or(EvaluationError::UnknownWorkerCluster(id));

    let mut by_worker = Vec::with_capacity(adjacency.worker_to_tasks.len());
    for (&w, candidates) in &adjacency.worker_to_tasks {
        let anchor = worker_of(w)?;
        let scores = candidates
            .iter()
            .map(|&t| Ok((t, eval_task(task_of(t)?, anchor, weights, basis))))
            .collect::<Result<Vec<_>, EvaluationError>>()?;
        by_worker.push((w, scores));
    }

    let mut by_task = Vec::with_capacity(adjacency.task_to_workers.len());
    for (&t, candidates) in &adjacency.task_to_workers {
        let anchor = task_of(t)?;
        let scores = candidates
            .iter()
            .map(|&w| Ok((w, eval_worker(worker_of(w)?, anchor, weights, basis))))
            .collect::<Result<Vec<_>, EvaluationError>>()?;
        by_task.push((t, scores));
    }

    Ok((
        RankedAdjacency::from_scores(by_worker),
        RankedAdjacency::from_scores(by_task),
    ))
}

impl<A: Ord + Copy + fmt::Display, C: Copy + fmt::Display> RankedAdjacency<A, C> {
    /// CSV with header `anchor_id,candidate_id,score,rank`.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("anchor_id,candidate_id,score,rank\n");
        for (anchor, list) in &self.lists {
            for e in list {
                out.push_str(&format!("{anchor},{},{},{}\n", e.candidate, e.score, e.rank));
            }
        }
        out
    }
}

impl<A: Ord + Copy + From<u32>, C: Copy + From<u32>> RankedAdjacency<A, C> {
    pub fn from_csv(text: &str) -> Result<Self, EvaluationError> {
        let mut lists: BTreeMap<A, Vec<RankedEntry<C>>> = BTreeMap::new();
        for (i, line) in text.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let bad = |m: &str| EvaluationError::Dump {
                line: i + 1,
                message: m.to_string(),
            };
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 4 {
                return Err(bad("expected 4 fields"));
            }
            let anchor: u32 = f[0].parse().map_err(|_| bad("anchor id"))?;
            let candidate: u32 = f[1].parse().map_err(|_| bad("candidate id"))?;
            let score: f64 = f[2].parse().map_err(|_| bad("score"))?;
            let rank: u32 = f[3].parse().map_err(|_| bad("rank"))?;
            lists.entry(A::from(anchor)).or_default().push(RankedEntry {
                candidate: C::from(candidate),
                score,
                rank,
            });
        }
        Ok(Self { lists })
    }
}

impl From<u32> for TaskClusterId {
    fn from(v: u32) -> Self {
        TaskClusterId(v)
    }
}

impl From<u32> for WorkerClusterId {
    fn from(v: u32) -> Self {
        WorkerClusterId(v)
    }
}
