//! Data ingestion, synthetic workloads and experiment orchestration.

mod config;
mod experiment;
mod geo;
mod ingest;
mod pipeline;
mod synth;

use std::path::PathBuf;

use thiserror::Error;

use crate::clustering::ClusterError;
use crate::evaluation::EvaluationError;
use crate::matching::MatchingError;
use crate::metrics::MetricsError;
use crate::ncgraph::ReconfigureError;

pub use config::{
    parse_kv, OrderKind, RunConfig, DEFAULT_CAP, DEFAULT_TRAJECTORY_EPS_M, DEFAULT_TRAJECTORY_MIN_PTS,
};
pub use experiment::{
    parse_w_grid, run_stage1, run_stage2, CellKey, Stage1Report, Stage2Report, STAGE1_W,
};
pub use geo::{BoundingBox, Projection};
pub use ingest::{
    ingest_tasks, ingest_workers, tasks_to_csv, trajectories_to_csv, workers_to_csv, IngestReport,
};
pub use pipeline::{
    allocation_stage, cell_artifacts, cluster_stage, indicators_csv, indicators_from_dumps,
    indicators_json, parse_task_clusters, parse_worker_clusters, rank_stage, reconfigure_stage,
    run_cell, run_pipeline, task_clusters_to_csv, upstream_artifacts, worker_clusters_to_csv,
    Artifacts, CellOutput, Clustered, PipelineRun,
};
pub use synth::{
    generate, Component, Mixture, SyntheticData, SyntheticSpec, TrajectoryPoint, TruncatedNormal,
};

#[derive(Debug, Error)]
pub enum HarnessError {
    #[error("invalid configuration: {0}")]
    InvalidConfig(String),
    #[error("line {line}: {message}")]
    Parse { line: usize, message: String },
    #[error("no {0} left after filtering")]
    EmptyAfterFilter(&'static str),
    #[error("{}: {source}", path.display())]
    Io {
        path: PathBuf,
        source: std::io::Error,
    },
    #[error("artifact {name}: {message}")]
    Artifact { name: String, message: String },
    #[error("clustering stage: {0}")]
    Clustering(#[from] ClusterError),
    #[error("reconfiguration stage: {0}")]
    Reconfigure(#[from] ReconfigureError),
    #[error("evaluation stage: {0}")]
    Evaluation(#[from] EvaluationError),
    #[error("matching stage: {0}")]
    Matching(#[from] MatchingError),
    #[error("metrics stage: {0}")]
    Metrics(#[from] MetricsError),
}

/// Independent seed for one named stage, derived from the root seed.
pub fn seed_for(root: u64, label: &str) -> u64 {
    // FNV-1a of the label, then one splitmix64 round.
    let mut h: u64 = 0xcbf2_9ce4_8422_2325;
    for b in label.bytes() {
        h ^= b as u64;
        h = h.wrapping_mul(0x0000_0100_0000_01b3);
    }
    let mut z = root ^ h;
    z = z.wrapping_add(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}
