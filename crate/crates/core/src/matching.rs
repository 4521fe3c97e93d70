//! Rank merging, the matching table and capped greedy allocation.

use std::collections::BTreeMap;
use std::fmt;
use std::str::FromStr;

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clustering::{TaskClusterId, WorkerCluster, WorkerClusterId};
use crate::evaluation::{TaskRanking, WorkerRanking};

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MatchingError {
    #[error("matching weight w = {0} is outside [0, 1]")]
    WOutOfRange(f64),
    #[error("rank must be at least 1")]
    ZeroRank,
    #[error("unknown traversal order {0:?}")]
    UnknownOrder(String),
    #[error("unknown rank convention {0:?}")]
    UnknownConvention(String),
    #[error("invalid cap {0:?}")]
    InvalidCap(String),
    #[error("allocation dump line {line}: {message}")]
    Dump { line: usize, message: String },
}

/// Which rank the matching weight `w` multiplies.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum RankConvention {
    /// `w·rank_t + (1−w)·rank_w`.
    WeightOnTaskRank,
    /// `w·rank_w + (1−w)·rank_t`. Higher `w` leans on the task side's
    /// evaluation of workers.
    #[default]
    WeightOnWorkerRank,
}

impl fmt::Display for RankConvention {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            RankConvention::WeightOnTaskRank => "task",
            RankConvention::WeightOnWorkerRank => "worker",
        })
    }
}

impl FromStr for RankConvention {
    type Err = MatchingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_lowercase().as_str() {
            "task" => Ok(RankConvention::WeightOnTaskRank),
            "worker" => Ok(RankConvention::WeightOnWorkerRank),
            _ => Err(MatchingError::UnknownConvention(s.to_string())),
        }
    }
}

/// `w·rank_t + (1−w)·rank_w`.
pub fn merge_ranks(rank_t: u32, rank_w: u32, w: f64) -> Result<f64, MatchingError> {
    if !(0.0..=1.0).contains(&w) {
        return Err(MatchingError::WOutOfRange(w));
    }
    if rank_t == 0 || rank_w == 0 {
        return Err(MatchingError::ZeroRank);
    }
    Ok(w * rank_t as f64 + (1.0 - w) * rank_w as f64)
}

/// Merged value per mutually listed (worker cluster, task cluster) pair.
/// Lower is better.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct MatchingTable {
    pub entries: BTreeMap<(WorkerClusterId, TaskClusterId), f64>,
}

impl MatchingTable {
    pub fn get(&self, worker: WorkerClusterId, task: TaskClusterId) -> Option<f64> {
        self.entries.get(&(worker, task)).copied()
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    /// Candidates of one worker cluster in ascending task id order.
    pub fn row(&self, worker: WorkerClusterId) -> impl Iterator<Item = (TaskClusterId, f64)> + '_ {
        self.entries
            .range((worker, TaskClusterId(0))..=(worker, TaskClusterId(u32::MAX)))
            .map(|(&(_, t), &v)| (t, v))
    }
}

pub fn build_table(
    worker_side: &WorkerRanking,
    task_side: &TaskRanking,
    w: f64,
    convention: RankConvention,
) -> Result<MatchingTable, MatchingError> {
    if !(0.0..=1.0).contains(&w) {
        return Err(MatchingError::WOutOfRange(w));
    }
    let mut entries = BTreeMap::new();
    for (&worker, list) in &worker_side.lists {
        for e in list {
            let Some(rank_w) = task_side.rank_of(e.candidate, worker) else {
                continue;
            };
            let value = match convention {
                RankConvention::WeightOnTaskRank => merge_ranks(e.rank, rank_w, w)?,
                RankConvention::WeightOnWorkerRank => merge_ranks(rank_w, e.rank, w)?,
            };
            entries.insert((worker, e.candidate), value);
        }
    }
    Ok(MatchingTable { entries })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum TraversalOrder {
    NonLMT,
    Random(u64),
    Xcoord,
    Avg,
    Sum,
}

impl TraversalOrder {
    pub fn name(&self) -> &'static str {
        match self {
            TraversalOrder::NonLMT => "NonLMT",
            TraversalOrder::Random(_) => "Random",
            TraversalOrder::Xcoord => "Xcoord",
            TraversalOrder::Avg => "AVG",
            TraversalOrder::Sum => "SUM",
        }
    }

    /// Parses an order name; `Random` takes `seed`.
    pub fn parse(name: &str, seed: u64) -> Result<Self, MatchingError> {
        match name.trim().to_ascii_lowercase().as_str() {
            "nonlmt" => Ok(TraversalOrder::NonLMT),
            "random" => Ok(TraversalOrder::Random(seed)),
            "xcoord" => Ok(TraversalOrder::Xcoord),
            "avg" => Ok(TraversalOrder::Avg),
            "sum" => Ok(TraversalOrder::Sum),
            _ => Err(MatchingError::UnknownOrder(name.to_string())),
        }
    }
}

impl fmt::Display for TraversalOrder {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

pub fn traversal_sequence(workers: &[WorkerCluster], order: TraversalOrder) -> Vec<WorkerClusterId> {
    let mut ids: Vec<&WorkerCluster> = workers.iter().collect();
    ids.sort_by_key(|c| c.id);
    match order {
        TraversalOrder::NonLMT => {}
        TraversalOrder::Random(seed) => ids.shuffle(&mut ChaCha8Rng::seed_from_u64(seed)),
        TraversalOrder::Xcoord => ids.sort_by(|a, b| b.center.x.cmp(&a.center.x).then(a.id.cmp(&b.id))),
        TraversalOrder::Avg => ids.sort_by(|a, b| {
            b.mean_ability()
                .total_cmp(&a.mean_ability())
                .then(a.id.cmp(&b.id))
        }),
        TraversalOrder::Sum => ids.sort_by(|a, b| {
            b.total_ability()
                .total_cmp(&a.total_ability())
                .then(a.id.cmp(&b.id))
        }),
    }
    ids.into_iter().map(|c| c.id).collect()
}

/// Per-task-cluster assignment limit.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Cap {
    Limited(u32),
    Unlimited,
}

impl Cap {
    pub fn admits(self, count: u32) -> bool {
        match self {
            Cap::Limited(c) => count < c,
            Cap::Unlimited => true,
        }
    }
}

impl fmt::Display for Cap {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        match self {
            Cap::Limited(c) => write!(f, "{c}"),
            Cap::Unlimited => f.write_str("inf"),
        }
    }
}

impl FromStr for Cap {
    type Err = MatchingError;

    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let t = s.trim().to_ascii_lowercase();
        if matches!(t.as_str(), "inf" | "infinity" | "none" | "unlimited") {
            return Ok(Cap::Unlimited);
        }
        match t.parse::<u32>() {
            Ok(c) if c > 0 => Ok(Cap::Limited(c)),
            _ => Err(MatchingError::InvalidCap(s.to_string())),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Assignment {
    pub worker: WorkerClusterId,
    pub task: TaskClusterId,
    pub value: f64,
}

#[derive(Debug, Clone, PartialEq, Default)]
pub struct AllocationResult {
    /// In traversal order.
    pub assignments: Vec<Assignment>,
    pub unmatched_workers: Vec<WorkerClusterId>,
    pub allocation_counts: BTreeMap<TaskClusterId, u32>,
}

/// One pass over `sequence`: each worker cluster takes its lowest-valued
/// task cluster still under the cap, lower task id on ties.
pub fn allocate(table: &MatchingTable, sequence: &[WorkerClusterId], cap: Cap) -> AllocationResult {
    let mut result = AllocationResult::default();
    for &worker in sequence {
        let best = table
            .row(worker)
            .filter(|(t, _)| cap.admits(result.allocation_counts.get(t).copied().unwrap_or(0)))
            .min_by(|a, b| a.1.total_cmp(&b.1).then(a.0.cmp(&b.0)));
        match best {
            Some((task, value)) => {
                *result.allocation_counts.entry(task).or_insert(0) += 1;
                result.assignments.push(Assignment { worker, task, value });
            }
            None => result.unmatched_workers.push(worker),
        }
    }
    result
}

/// Runs `passes` single passes. Each later pass starts from fresh counts and
/// visits only the worker clusters still unmatched, in their original order;
/// counts in the result are totals over all passes.
pub fn allocate_passes(table: &MatchingTable, sequence: &[WorkerClusterId], cap: Cap, passes: u32) -> AllocationResult {
    let mut result = allocate(table, sequence, cap);
    for _ in 1..passes {
        if result.unmatched_workers.is_empty() {
            break;
        }
        let next = allocate(table, &result.unmatched_workers, cap);
        if next.assignments.is_empty() {
            break;
        }
        for (t, n) in next.allocation_counts {
            *result.allocation_counts.entry(t).or_insert(0) += n;
        }
        result.assignments.extend(next.assignments);
        result.unmatched_workers = next.unmatched_workers;
    }
    result
}

impl AllocationResult {
    pub fn matched_workers(&self) -> usize {
        self.assignments.len()
    }

    /// CSV `worker_cluster_id,task_cluster_id,matching_value` in traversal
    /// order; unmatched worker clusters follow with empty task and value.
    pub fn to_csv(&self) -> String {
        let mut out = String::from("worker_cluster_id,task_cluster_id,matching_value\n");
        for a in &self.assignments {
            out.push_str(&format!("{},{},{}\n", a.worker, a.task, a.value));
        }
        for w in &self.unmatched_workers {
            out.push_str(&format!("{w},,\n"));
        }
        out
    }

    pub fn from_csv(text: &str) -> Result<Self, MatchingError> {
        let mut result = AllocationResult::default();
        for (i, line) in text.lines().enumerate().skip(1) {
            if line.trim().is_empty() {
                continue;
            }
            let bad = |m: &str| MatchingError::Dump {
                line: i + 1,
                message: m.to_string(),
            };
            let f: Vec<&str> = line.split(',').collect();
            if f.len() != 3 {
                return Err(bad("expected 3 fields"));
            }
            let worker = WorkerClusterId(f[0].parse().map_err(|_| bad("worker id"))?);
            if f[1].is_empty() {
                result.unmatched_workers.push(worker);
                continue;
            }
            let task = TaskClusterId(f[1].parse().map_err(|_| bad("task id"))?);
            let value: f64 = f[2].parse().map_err(|_| bad("matching value"))?;
            *result.allocation_counts.entry(task).or_insert(0) += 1;
            result.assignments.push(Assignment { worker, task, value });
        }
        Ok(result)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clustering::Worker;
    use crate::evaluation::RankedAdjacency;
    use crate::geometry::PlanarPoint;

    fn t(i: u32) -> TaskClusterId {
        TaskClusterId(i)
    }

    fn w(i: u32) -> WorkerClusterId {
        WorkerClusterId(i)
    }

    #[test]
    fn later_passes_reuse_capacity() {
        let mut table = MatchingTable::default();
        for i in 0..3 {
            table.entries.insert((w(i), t(0)), 1.0);
        }
        let seq = [w(0), w(1), w(2)];
        let one = allocate_passes(&table, &seq, Cap::Limited(1), 1);
        assert_eq!(one, allocate(&table, &seq, Cap::Limited(1)));
        assert_eq!(one.unmatched_workers, vec![w(1), w(2)]);
        let three = allocate_passes(&table, &seq, Cap::Limited(1), 3);
        assert!(three.unmatched_workers.is_empty());
        assert_eq!(three.allocation_counts[&t(0)], 3);
        let order: Vec<_> = three.assignments.iter().map(|a| a.worker).collect();
        assert_eq!(order, seq);
    }

    #[test]
    fn merge_examples() {
        assert_eq!(merge_ranks(2, 4, 0.5).unwrap(), 3.0);
        assert_eq!(merge_ranks(2, 4, 1.0).unwrap(), 2.0);
        assert_eq!(merge_ranks(2, 4, 0.0).unwrap(), 4.0);
        assert_eq!(merge_ranks(2, 4, 1.5), Err(MatchingError::WOutOfRange(1.5)));
        assert_eq!(merge_ranks(2, 4, -0.1), Err(MatchingError::WOutOfRange(-0.1)));
        assert!(merge_ranks(1, 1, f64::NAN).is_err());
    }

    #[test]
    fn one_sided_pairs_have_no_entry() {
        let ws: WorkerRanking =
            RankedAdjacency::from_scores(vec![(w(0), vec![(t(0), 1.0), (t(1), 0.0)])]);
        let ts: TaskRanking = RankedAdjacency::from_scores(vec![(t(0), vec![(w(0), 1.0)])]);
        let table = build_table(&ws, &ts, 0.5, RankConvention::default()).unwrap();
        assert_eq!(table.len(), 1);
        assert_eq!(table.get(w(0), t(0)), Some(1.0));
        assert_eq!(table.get(w(0), t(1)), None);
    }

    #[test]
    fn symmetric_rank_one() {
        let ws: WorkerRanking = RankedAdjacency::from_scores(vec![
            (w(0), vec![(t(0), 1.0)]),
            (w(1), vec![(t(1), 1.0)]),
        ]);
        let ts: TaskRanking = RankedAdjacency::from_scores(vec![
            (t(0), vec![(w(0), 1.0)]),
            (t(1), vec![(w(1), 1.0)]),
        ]);
        let table = build_table(&ws, &ts, 0.3, RankConvention::default()).unwrap();
        assert!(table.entries.values().all(|&v| v == 1.0));
        assert_eq!(table.len(), 2);
    }

    #[test]
    fn conventions_swap_weighting() {
        let ws: WorkerRanking =
            RankedAdjacency::from_scores(vec![(w(0), vec![(t(0), 2.0), (t(1), 1.0)])]);
        let ts: TaskRanking = RankedAdjacency::from_scores(vec![(t(1), vec![(w(3), 1.0), (w(0), 0.0)])]);
        // rank_t = 2, rank_w = 2 for (0, 1); only that pair is mutual.
        let a = build_table(&ws, &ts, 1.0, RankConvention::WeightOnTaskRank).unwrap();
        let b = build_table(&ws, &ts, 0.0, RankConvention::WeightOnWorkerRank).unwrap();
        assert_eq!(a, b);
    }

    fn cluster(id: u32, x: i64, abilities: &[f64]) -> WorkerCluster {
        let members = abilities
            .iter()
            .enumerate()
            .map(|(i, &a)| Worker {
                id: format!("{id}-{i}"),
                location: PlanarPoint::new(x, 0),
                ability: a,
            })
            .collect();
        WorkerCluster::new(w(id), members).unwrap()
    }

    #[test]
    fn sequences() {
        let cs = vec![cluster(0, 5, &[1.0]), cluster(1, 9, &[2.0, 2.0]), cluster(2, 1, &[5.0])];
        assert_eq!(traversal_sequence(&cs, TraversalOrder::Xcoord), vec![w(1), w(0), w(2)]);
        assert_eq!(traversal_sequence(&cs, TraversalOrder::Sum), vec![w(2), w(1), w(0)]);
        assert_eq!(traversal_sequence(&cs, TraversalOrder::Avg), vec![w(2), w(1), w(0)]);
        assert_eq!(traversal_sequence(&cs, TraversalOrder::NonLMT), vec![w(0), w(1), w(2)]);
        let r = traversal_sequence(&cs, TraversalOrder::Random(11));
        assert_eq!(r, traversal_sequence(&cs, TraversalOrder::Random(11)));
        let mut sorted = r.clone();
        sorted.sort();
        assert_eq!(sorted, vec![w(0), w(1), w(2)]);
    }

    fn two_on_a() -> MatchingTable {
        let mut entries = BTreeMap::new();
        entries.insert((w(0), t(0)), 1.0);
        entries.insert((w(0), t(1)), 2.0);
        entries.insert((w(1), t(0)), 1.0);
        entries.insert((w(1), t(1)), 1.5);
        MatchingTable { entries }
    }

    #[test]
    fn cap_one_pushes_second_worker() {
        let r = allocate(&two_on_a(), &[w(1), w(0)], Cap::Limited(1));
        assert_eq!(r.assignments[0].task, t(0));
        assert_eq!(r.assignments[0].worker, w(1));
        assert_eq!(r.assignments[1].task, t(1));
        assert_eq!(r.assignments[1].value, 2.0);
    }

    #[test]
    fn unlimited_cap_both_take_a() {
        let r = allocate(&two_on_a(), &[w(0), w(1)], Cap::Unlimited);
        assert!(r.assignments.iter().all(|a| a.task == t(0)));
        assert_eq!(r.allocation_counts[&t(0)], 2);
    }

    #[test]
    fn exhausted_worker_is_unmatched() {
        let mut entries = BTreeMap::new();
        entries.insert((w(0), t(0)), 1.0);
        entries.insert((w(1), t(0)), 1.0);
        let r = allocate(&MatchingTable { entries }, &[w(0), w(1), w(2)], Cap::Limited(1));
        assert_eq!(r.unmatched_workers, vec![w(1), w(2)]);
    }

    #[test]
    fn value_ties_go_to_lower_task() {
        let mut entries = BTreeMap::new();
        entries.insert((w(0), t(4)), 1.0);
        entries.insert((w(0), t(2)), 1.0);
        let r = allocate(&MatchingTable { entries }, &[w(0)], Cap::Limited(1));
        assert_eq!(r.assignments[0].task, t(2));
    }

    #[test]
    fn cap_parsing() {
        assert_eq!("15".parse::<Cap>().unwrap(), Cap::Limited(15));
        assert_eq!("inf".parse::<Cap>().unwrap(), Cap::Unlimited);
        assert!("0".parse::<Cap>().is_err());
    }

    #[test]
    fn csv_round_trip() {
        let r = allocate(&two_on_a(), &[w(0), w(1), w(7)], Cap::Limited(1));
        let back = AllocationResult::from_csv(&r.to_csv()).unwrap();
        assert_eq!(back, r);
        assert!(r.to_csv().ends_with("7,,\n"));
    }
}
