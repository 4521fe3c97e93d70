//! Allocation indicators and their standardization against a baseline scheme.

use std::collections::{BTreeMap, HashMap};
use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::clustering::{TaskCluster, TaskClusterId, WorkerCluster, WorkerClusterId};
use crate::matching::AllocationResult;

#[derive(Debug, Clone, PartialEq, Error)]
pub enum MetricsError {
    #[error("allocation references unknown task cluster {0}")]
    UnknownTaskCluster(TaskClusterId),
    #[error("allocation references unknown worker cluster {0}")]
    UnknownWorkerCluster(WorkerClusterId),
    #[error("worker cluster {0} is assigned more than once")]
    DuplicateWorker(WorkerClusterId),
    #[error("baseline scheme {0:?} is missing")]
    MissingBaseline(String),
    #[error("baseline {indicator} is zero")]
    ZeroBaseline { indicator: &'static str },
    #[error("unknown payoff model setting {0:?}")]
    UnknownModel(String),
}

/// How a task cluster's reward reaches the members of the worker cluster
/// assigned to it.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum WorkerShare {
    /// Reward sum divided evenly among the worker cluster's members.
    #[default]
    EvenSplit,
    /// Every member receives the full reward sum.
    FullPerWorker,
}

/// What each task receives from the worker cluster assigned to its cluster.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub enum RequesterQuality {
    #[default]
    MeanAbility,
    SumAbility,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize, Default)]
pub struct PayoffModel {
    pub worker_share: WorkerShare,
    pub requester_quality: RequesterQuality,
}

impl fmt::Display for PayoffModel {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let share = match self.worker_share {
            WorkerShare::EvenSplit => "even",
            WorkerShare::FullPerWorker => "full",
        };
        let quality = match self.requester_quality {
            RequesterQuality::MeanAbility => "mean",
            RequesterQuality::SumAbility => "sum",
        };
        write!(f, "{share}-{quality}")
    }
}

impl FromStr for PayoffModel {
    type Err = MetricsError;

    /// `even-mean`, `even-sum`, `full-mean` or `full-sum`.
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        let bad = || MetricsError::UnknownModel(s.to_string());
        let (a, b) = s.trim().split_once('-').ok_or_else(bad)?;
        let worker_share = match a.to_ascii_lowercase().as_str() {
            "even" => WorkerShare::EvenSplit,
            "full" => WorkerShare::FullPerWorker,
            _ => return Err(bad()),
        };
        let requester_quality = match b.to_ascii_lowercase().as_str() {
            "mean" => RequesterQuality::MeanAbility,
            "sum" => RequesterQuality::SumAbility,
            _ => return Err(bad()),
        };
        Ok(Self {
            worker_share,
            requester_quality,
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub struct IndicatorReport {
    pub task_allocation_rate: f64,
    pub worker_utilization_rate: f64,
    pub total_requester_payoff: f64,
    pub total_worker_payoff: f64,
    pub requester_payoff_variance: f64,
    pub worker_payoff_variance: f64,
}

impl IndicatorReport {
    pub const CSV_HEADER: &'static str = "task_allocation_rate,worker_utilization_rate,total_requester_payoff,total_worker_payoff,requester_payoff_variance,worker_payoff_variance";

    pub fn csv_row(&self) -> String {
        format!(
            "{},{},{},{},{},{}",
            self.task_allocation_rate,
            self.worker_utilization_rate,
            self.total_requester_payoff,
            self.total_worker_payoff,
            self.requester_payoff_variance,
            self.worker_payoff_variance
        )
    }
}

/// Per-individual payoffs, in cluster order then member order.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Payoffs {
    pub requester: Vec<f64>,
    pub worker: Vec<f64>,
}

pub fn individual_payoffs(
    result: &AllocationResult,
    task_clusters: &[TaskCluster],
    worker_clusters: &[WorkerCluster],
    model: PayoffModel,
) -> Result<Payoffs, MetricsError> {
    let task_pos: HashMap<TaskClusterId, usize> =
        task_clusters.iter().enumerate().map(|(i, c)| (c.id, i)).collect();
    let worker_pos: HashMap<WorkerClusterId, usize> =
        worker_clusters.iter().enumerate().map(|(i, c)| (c.id, i)).collect();

    // Payoff per member of each cluster, identical within a cluster.
    let mut per_task = vec![0.0; task_clusters.len()];
    let mut per_worker = vec![0.0; worker_clusters.len()];
    let mut seen = vec![false; worker_clusters.len()];
    for a in &result.assignments {
        let ti = *task_pos
            .get(&a.task)
            .ok_or(MetricsError::UnknownTaskCluster(a.task))?;
        let wi = *worker_pos
            .get(&a.worker)
            .ok_or(MetricsError::UnknownWorkerCluster(a.worker))?;
        if std::mem::replace(&mut seen[wi], true) {
            return Err(MetricsError::DuplicateWorker(a.worker));
        }
        let tc = &task_clusters[ti];
        let wc = &worker_clusters[wi];
        per_worker[wi] += match model.worker_share {
            WorkerShare::EvenSplit => tc.total_reward() / wc.members.len() as f64,
            WorkerShare::FullPerWorker => tc.total_reward(),
        };
        per_task[ti] += match model.requester_quality {
            RequesterQuality::MeanAbility => wc.mean_ability(),
            RequesterQuality::SumAbility => wc.total_ability(),
        };
    }
    for w in &result.unmatched_workers {
        if !worker_pos.contains_key(w) {
            return Err(MetricsError::UnknownWorkerCluster(*w));
        }
    }

    let expand = |per: &[f64], sizes: &mut dyn Iterator<Item = usize>| -> Vec<f64> {
        per.iter()
            .zip(sizes)
            .flat_map(|(&v, n)| std::iter::repeat_n(v, n))
            .collect()
    };
    Ok(Payoffs {
        requester: expand(&per_task, &mut task_clusters.iter().map(|c| c.members.len())),
        worker: expand(&per_worker, &mut worker_clusters.iter().map(|c| c.members.len())),
    })
}

pub fn compute_indicators(
    result: &AllocationResult,
    task_clusters: &[TaskCluster],
    worker_clusters: &[WorkerCluster],
    model: PayoffModel,
) -> Result<IndicatorReport, MetricsError> {
    let payoffs = individual_payoffs(result, task_clusters, worker_clusters, model)?;

    let total_tasks: usize = task_clusters.iter().map(|c| c.members.len()).sum();
    let total_workers: usize = worker_clusters.iter().map(|c| c.members.len()).sum();
    let allocated_tasks: usize = task_clusters
        .iter()
        .filter(|c| result.allocation_counts.get(&c.id).is_some_and(|&n| n > 0))
        .map(|c| c.members.len())
        .sum();
    let matched: std::collections::HashSet<WorkerClusterId> =
        result.assignments.iter().map(|a| a.worker).collect();
    let utilized_workers: usize = worker_clusters
        .iter()
        .filter(|c| matched.contains(&c.id))
        .map(|c| c.members.len())
        .sum();

    Ok(IndicatorReport {
        task_allocation_rate: ratio(allocated_tasks, total_tasks),
        worker_utilization_rate: ratio(utilized_workers, total_workers),
        total_requester_payoff: payoffs.requester.iter().sum(),
        total_worker_payoff: payoffs.worker.iter().sum(),
        requester_payoff_variance: population_variance(&payoffs.requester),
        worker_payoff_variance: population_variance(&payoffs.worker),
    })
}

fn ratio(a: usize, b: usize) -> f64 {
    if b == 0 {
        0.0
    } else {
        a as f64 / b as f64
    }
}

pub fn population_variance(values: &[f64]) -> f64 {
    if values.is_empty() {
        return 0.0;
    }
    let n = values.len() as f64;
    let mean = values.iter().sum::<f64>() / n;
    values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / n
}

/// Rates unchanged, payoff indicators as ratios to the baseline scheme.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct StandardizedReport {
    pub task_allocation_rate: f64,
    pub worker_utilization_rate: f64,
    pub total_requester_payoff: f64,
    pub total_worker_payoff: f64,
    pub requester_payoff_variance: f64,
    pub worker_payoff_variance: f64,
}

pub fn standardize<K: Ord + Clone + fmt::Debug>(
    reports: &BTreeMap<K, IndicatorReport>,
    baseline: &K,
) -> Result<BTreeMap<K, StandardizedReport>, MetricsError> {
    let base = reports
        .get(baseline)
        .ok_or_else(|| MetricsError::MissingBaseline(format!("{baseline:?}")))?;
    let divisors = [
        ("total requester payoff", base.total_requester_payoff),
        ("total worker payoff", base.total_worker_payoff),
        ("requester payoff variance", base.requester_payoff_variance),
        ("worker payoff variance", base.worker_payoff_variance),
    ];
    if let Some((indicator, _)) = divisors.iter().find(|(_, v)| *v == 0.0) {
        return Err(MetricsError::ZeroBaseline { indicator });
    }
    Ok(reports
        .iter()
        .map(|(k, r)| {
            (
                k.clone(),
                StandardizedReport {
                    task_allocation_rate: r.task_allocation_rate,
                    worker_utilization_rate: r.worker_utilization_rate,
                    total_requester_payoff: r.total_requester_payoff / base.total_requester_payoff,
                    total_worker_payoff: r.total_worker_payoff / base.total_worker_payoff,
                    requester_payoff_variance: r.requester_payoff_variance
                        / base.requester_payoff_variance,
                    worker_payoff_variance: r.worker_payoff_variance / base.worker_payoff_variance,
                },
            )
        })
        .collect())
}
