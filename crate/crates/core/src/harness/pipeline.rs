use std::collections::BTreeMap;
use std::path::Path;

use serde::Serialize;

use crate::clustering::{
    cluster_tasks, cluster_workers, default_worker_k, Task, TaskCluster, TaskClusterId, Worker,
    WorkerCluster, WorkerClusterId,
};
use crate::evaluation::{rank_candidates, TaskRanking, WorkerRanking};
use crate::geometry::PlanarPoint;
use crate::matching::{allocate_passes, build_table, traversal_sequence, AllocationResult, MatchingTable};
use crate::metrics::{compute_indicators, IndicatorReport, PayoffModel};
use crate::ncgraph::{reconfigure_with_graphs, AdjacencyLists, Reconfiguration};

use super::config::RunConfig;
use super::{seed_for, HarnessError};

/// Named text files produced by a run, keyed by relative path.
#[derive(Debug, Clone, Default, PartialEq, Eq)]
pub struct Artifacts {
    pub files: BTreeMap<String, String>,
}

impl Artifacts {
    pub fn insert(&mut self, name: impl Into<String>, contents: String) {
        self.files.insert(name.into(), contents);
    }

    pub fn get(&self, name: &str) -> Option<&str> {
        self.files.get(name).map(String::as_str)
    }

    /// Adds every file of `other` under `prefix/`.
    pub fn nest(&mut self, prefix: &str, other: Artifacts) {
        for (k, v) in other.files {
            self.files.insert(format!("{prefix}/{k}"), v);
        }
    }

    pub fn write_to(&self, dir: &Path) -> Result<(), HarnessError> {
        for (name, contents) in &self.files {
            let path = dir.join(name);
            if let Some(parent) = path.parent() {
                std::fs::create_dir_all(parent).map_err(|source| HarnessError::Io {
                    path: parent.to_path_buf(),
                    source,
                })?;
            }
            std::fs::write(&path, contents).map_err(|source| HarnessError::Io { path, source })?;
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Clustered {
    pub tasks: Vec<TaskCluster>,
    pub workers: Vec<WorkerCluster>,
}

pub fn cluster_stage(cfg: &RunConfig, tasks: &[Task], workers: &[Worker]) -> Result<Clustered, HarnessError> {
    let task_clusters = cluster_tasks(tasks, cfg.task_eps_m, cfg.task_min_pts)?;
    let k = cfg.worker_k.unwrap_or_else(|| default_worker_k(workers.len()));
    let worker_clusters = cluster_workers(workers, k, cfg.ability_weight, seed_for(cfg.seed, "worker-kmeans"))?;
    Ok(Clustered {
        tasks: task_clusters,
        workers: worker_clusters,
    })
}

pub fn reconfigure_stage(layers: usize, clustered: &Clustered) -> Result<Reconfiguration, HarnessError> {
    Ok(reconfigure_with_graphs(&clustered.tasks, &clustered.workers, layers)?)
}

/// Everything downstream of the adjacency lists for one configuration.
#[derive(Debug, Clone, PartialEq)]
pub struct CellOutput {
    pub worker_ranking: WorkerRanking,
    pub task_ranking: TaskRanking,
    pub table: MatchingTable,
    pub sequence: Vec<WorkerClusterId>,
    pub allocation: AllocationResult,
    pub report: IndicatorReport,
}

pub fn rank_stage(
    cfg: &RunConfig,
    clustered: &Clustered,
    adjacency: &AdjacencyLists,
) -> Result<(WorkerRanking, TaskRanking), HarnessError> {
    Ok(rank_candidates(adjacency, &clustered.tasks, &clustered.workers, cfg.weights, cfg.basis)?)
}

pub fn allocation_stage(
    cfg: &RunConfig,
    clustered: &Clustered,
    worker_ranking: WorkerRanking,
    task_ranking: TaskRanking,
) -> Result<CellOutput, HarnessError> {
    let table = build_table(&worker_ranking, &task_ranking, cfg.w, cfg.convention)?;
    let sequence = traversal_sequence(&clustered.workers, cfg.traversal());
    let allocation = allocate_passes(&table, &sequence, cfg.effective_cap(), cfg.passes);
    let report = compute_indicators(&allocation, &clustered.tasks, &clustered.workers, cfg.payoff)?;
    Ok(CellOutput {
        worker_ranking,
        task_ranking,
        table,
        sequence,
        allocation,
        report,
    })
}

pub fn run_cell(cfg: &RunConfig, clustered: &Clustered, adjacency: &AdjacencyLists) -> Result<CellOutput, HarnessError> {
    let (wr, tr) = rank_stage(cfg, clustered, adjacency)?;
    allocation_stage(cfg, clustered, wr, tr)
}

#[derive(Serialize)]
struct IndicatorFile<'a> {
    indicators: &'a IndicatorReport,
    task_clusters: usize,
    worker_clusters: usize,
    matched_worker_clusters: usize,
    config: BTreeMap<&'static str, String>,
}

pub fn indicators_json(cfg: &RunConfig, clustered: &Clustered, cell: &CellOutput) -> String {
    let file = IndicatorFile {
        indicators: &cell.report,
        task_clusters: clustered.tasks.len(),
        worker_clusters: clustered.workers.len(),
        matched_worker_clusters: cell.allocation.matched_workers(),
        config: cfg.to_map(),
    };
    let mut s = serde_json::to_string_pretty(&file).expect("plain data serializes");
    s.push('\n');
    s
}

pub fn indicators_csv(report: &IndicatorReport) -> String {
    format!("{}\n{}\n", IndicatorReport::CSV_HEADER, report.csv_row())
}

/// Rank dumps, allocation, indicators.
pub fn cell_artifacts(cfg: &RunConfig, clustered: &Clustered, cell: &CellOutput) -> Artifacts {
    let mut a = Artifacts::default();
    a.insert("ranks_worker_to_task.csv", cell.worker_ranking.to_csv());
    a.insert("ranks_task_to_worker.csv", cell.task_ranking.to_csv());
    a.insert("allocation.csv", cell.allocation.to_csv());
    a.insert("indicators.json", indicators_json(cfg, clustered, cell));
    a.insert("indicators.csv", indicators_csv(&cell.report));
    a
}

/// Cluster membership dumps and both base graphs.
pub fn upstream_artifacts(cfg: &RunConfig, clustered: &Clustered, reconf: &Reconfiguration) -> Artifacts {
    let mut a = Artifacts::default();
    a.insert("config.txt", cfg.to_kv());
    a.insert("task_clusters.csv", task_clusters_to_csv(&clustered.tasks));
    a.insert("worker_clusters.csv", worker_clusters_to_csv(&clustered.workers));
    a.insert("task_graph.txt", reconf.task_graph.dump());
    a.insert("worker_graph.txt", reconf.worker_graph.dump());
    a
}

#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub clustered: Clustered,
    pub reconfiguration: Reconfiguration,
    pub cell: CellOutput,
    pub artifacts: Artifacts,
}

/// cluster → reconfigure → rank → table → traverse → allocate → indicators.
pub fn run_pipeline(cfg: &RunConfig, tasks: &[Task], workers: &[Worker]) -> Result<PipelineRun, HarnessError> {
    cfg.validate()?;
    let clustered = cluster_stage(cfg, tasks, workers)?;
    let reconfiguration = reconfigure_stage(cfg.layers, &clustered)?;
    let cell = run_cell(cfg, &clustered, &reconfiguration.adjacency)?;
    let mut artifacts = upstream_artifacts(cfg, &clustered, &reconfiguration);
    for (k, v) in cell_artifacts(cfg, &clustered, &cell).files {
        artifacts.insert(k, v);
    }
    Ok(PipelineRun {
        clustered,
        reconfiguration,
        cell,
        artifacts,
    })
}

fn csv_text(header: &[&str], rows: impl Iterator<Item = Vec<String>>) -> String {
    let mut w = csv::Writer::from_writer(Vec::new());
    w.write_record(header).expect("in-memory write");
    for r in rows {
        w.write_record(&r).expect("in-memory write");
    }
    String::from_utf8(w.into_inner().expect("in-memory flush")).expect("utf-8 fields")
}

/// `cluster_id,task_id,x,y,reward` with grid coordinates.
pub fn task_clusters_to_csv(clusters: &[TaskCluster]) -> String {
    csv_text(
        &["cluster_id", "task_id", "x", "y", "reward"],
        clusters.iter().flat_map(|c| {
            c.members.iter().map(move |t| {
                vec![
                    c.id.to_string(),
                    t.id.clone(),
                    t.location.x.to_string(),
                    t.location.y.to_string(),
                    t.reward.to_string(),
                ]
            })
        }),
    )
}

/// `cluster_id,worker_id,x,y,ability` with grid coordinates.
pub fn worker_clusters_to_csv(clusters: &[WorkerCluster]) -> String {
    csv_text(
        &["cluster_id", "worker_id", "x", "y", "ability"],
        clusters.iter().flat_map(|c| {
            c.members.iter().map(move |w| {
                vec![
                    c.id.to_string(),
                    w.id.clone(),
                    w.location.x.to_string(),
                    w.location.y.to_string(),
                    w.ability.to_string(),
                ]
            })
        }),
    )
}

fn parse_members(text: &str, name: &str) -> Result<BTreeMap<u32, Vec<(String, PlanarPoint, f64)>>, HarnessError> {
    let mut rdr = csv::Reader::from_reader(text.as_bytes());
    let mut out: BTreeMap<u32, Vec<(String, PlanarPoint, f64)>> = BTreeMap::new();
    for rec in rdr.records() {
        let rec = rec.map_err(|e| HarnessError::Artifact {
            name: name.to_string(),
            message: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line());
        let bad = |what: &str| HarnessError::Artifact {
            name: name.to_string(),
            message: format!("line {line}: bad {what}"),
        };
        if rec.len() != 5 {
            return Err(bad("field count"));
        }
        let cid: u32 = rec[0].parse().map_err(|_| bad("cluster id"))?;
        let x: i64 = rec[2].parse().map_err(|_| bad("x"))?;
        let y: i64 = rec[3].parse().map_err(|_| bad("y"))?;
        let v: f64 = rec[4].parse().map_err(|_| bad("value"))?;
        out.entry(cid)
            .or_default()
            .push((rec[1].to_string(), PlanarPoint::new(x, y), v));
    }
    Ok(out)
}

pub fn parse_task_clusters(text: &str) -> Result<Vec<TaskCluster>, HarnessError> {
    parse_members(text, "task_clusters.csv")?
        .into_iter()
        .map(|(cid, members)| {
            let members = members
                .into_iter()
                .map(|(id, location, reward)| Task { id, location, reward })
                .collect();
            Ok(TaskCluster::new(TaskClusterId(cid), members)?)
        })
        .collect()
}

pub fn parse_worker_clusters(text: &str) -> Result<Vec<WorkerCluster>, HarnessError> {
    parse_members(text, "worker_clusters.csv")?
        .into_iter()
        .map(|(cid, members)| {
            let members = members
                .into_iter()
                .map(|(id, location, ability)| Worker { id, location, ability })
                .collect();
            Ok(WorkerCluster::new(WorkerClusterId(cid), members)?)
        })
        .collect()
}

/// Indicators recomputed from the cluster and allocation dumps alone.
pub fn indicators_from_dumps(
    task_clusters_csv: &str,
    worker_clusters_csv: &str,
    allocation_csv: &str,
    model: PayoffModel,
) -> Result<IndicatorReport, HarnessError> {
    let tasks = parse_task_clusters(task_clusters_csv)?;
    let workers = parse_worker_clusters(worker_clusters_csv)?;
    let allocation = AllocationResult::from_csv(allocation_csv)?;
    Ok(compute_indicators(&allocation, &tasks, &workers, model)?)
}
