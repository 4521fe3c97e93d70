use std::collections::BTreeMap;

use rayon::prelude::*;
use thiserror::Error;

use crate::clustering::{TaskCluster, TaskClusterId, WorkerCluster, WorkerClusterId};
use crate::geometry::PlanarPoint;

use super::{insert, GraphError, NonCrossingGraph};

#[derive(Debug, Clone, PartialEq, Eq, Error)]
pub enum ReconfigureError {
    #[error("task graph: {0}")]
    TaskGraph(GraphError),
    #[error("worker graph: {0}")]
    WorkerGraph(GraphError),
    #[error("inserting task cluster {cluster} into the worker graph: {source}")]
    TaskInsertion {
        cluster: TaskClusterId,
        source: GraphError,
    },
    #[error("inserting worker cluster {cluster} into the task graph: {source}")]
    WorkerInsertion {
        cluster: WorkerClusterId,
        source: GraphError,
    },
    #[error("layer count must be at least 1")]
    ZeroLayers,
}

/// Layered adjacency between task and worker clusters.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct AdjacencyLists {
    pub task_to_workers: BTreeMap<TaskClusterId, Vec<WorkerClusterId>>,
    pub worker_to_tasks: BTreeMap<WorkerClusterId, Vec<TaskClusterId>>,
    pub layers: usize,
}

#[derive(Debug, Clone)]
pub struct Reconfiguration {
    pub adjacency: AdjacencyLists,
    pub task_graph: NonCrossingGraph,
    pub worker_graph: NonCrossingGraph,
}

pub fn reconfigure(
    task_clusters: &[TaskCluster],
    worker_clusters: &[WorkerCluster],
    layers: usize,
) -> Result<AdjacencyLists, ReconfigureError> {
    reconfigure_with_graphs(task_clusters, worker_clusters, layers).map(|r| r.adjacency)
}

/// Builds one graph over task-cluster centers and one over worker-cluster
/// centers, then queries each cluster against the other type's graph: the
/// center is inserted into a copy and its `layers`-hop neighbourhood becomes
/// the cluster's adjacency list. The base graphs are never modified.
pub fn reconfigure_with_graphs(
    task_clusters: &[TaskCluster],
    worker_clusters: &[WorkerCluster],
    layers: usize,
) -> Result<Reconfiguration, ReconfigureError> {
    if layers == 0 {
        return Err(ReconfigureError::ZeroLayers);
    }
    let task_centers: Vec<PlanarPoint> = task_clusters.iter().map(|c| c.center).collect();
    let worker_centers: Vec<PlanarPoint> = worker_clusters.iter().map(|c| c.center).collect();
    let task_graph = NonCrossingGraph::build(&task_centers).map_err(ReconfigureError::TaskGraph)?;
    let worker_graph =
        NonCrossingGraph::build(&worker_centers).map_err(ReconfigureError::WorkerGraph)?;

    let task_to_workers = task_clusters
        .par_iter()
        .map(|t| {
            neighbourhood(&worker_graph, t.center, layers)
                .map(|vs| {
                    let ids = vs.into_iter().map(|v| worker_clusters[v].id).collect();
                    (t.id, ids)
                })
                .map_err(|source| ReconfigureError::TaskInsertion {
                    cluster: t.id,
                    source,
                })
        })
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .collect();

    let worker_to_tasks = worker_clusters
        .par_iter()
        .map(|w| {
            neighbourhood(&task_graph, w.center, layers)
                .map(|vs| {
                    let ids = vs.into_iter().map(|v| task_clusters[v].id).collect();
                    (w.id, ids)
                })
                .map_err(|source| ReconfigureError::WorkerInsertion {
                    cluster: w.id,
                    source,
                })
        })
        .collect::<Result<Vec<_>, _>>()?
        .into_iter()
        .collect();

    Ok(Reconfiguration {
        adjacency: AdjacencyLists {
            task_to_workers,
            worker_to_tasks,
            layers,
        },
        task_graph,
        worker_graph,
    })
}

/// `layers`-hop neighbourhood of `p` inserted into a copy of `graph`. A point
/// that coincides with a vertex counts that vertex as its only first-hop
/// neighbour.
fn neighbourhood(
    graph: &NonCrossingGraph,
    p: PlanarPoint,
    layers: usize,
) -> Result<Vec<usize>, GraphError> {
    match insert(graph, p) {
        Ok(outcome) => outcome
            .graph
            .k_layer_neighbors(outcome.inserted_vertex, layers),
        Err(GraphError::DuplicatePoint { existing, .. }) => {
            let mut out = vec![existing];
            if layers > 1 {
                out.extend(graph.k_layer_neighbors(existing, layers - 1)?);
            }
            Ok(out)
        }
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::clustering::{Task, Worker};

    fn tc(id: u32, x: i64, y: i64) -> TaskCluster {
        let t = Task {
            id: format!("t{id}"),
            location: PlanarPoint::new(x, y),
            reward: 1.0,
        };
        TaskCluster::new(TaskClusterId(id), vec![t]).unwrap()
    }

    fn wc(id: u32, x: i64, y: i64) -> WorkerCluster {
        let w = Worker {
            id: format!("w{id}"),
            location: PlanarPoint::new(x, y),
            ability: 1.0,
        };
        WorkerCluster::new(WorkerClusterId(id), vec![w]).unwrap()
    }

    #[test]
    fn coincident_centers() {
        // A square of tasks with one worker on a corner.
        let tasks = vec![tc(0, 0, 0), tc(1, 10, 0), tc(2, 10, 10), tc(3, 0, 10)];
        let workers = vec![wc(0, 0, 0), wc(1, 5, 30), wc(2, -20, 4)];
        let one = reconfigure(&tasks, &workers, 1).unwrap();
        assert_eq!(one.worker_to_tasks[&WorkerClusterId(0)], vec![TaskClusterId(0)]);
        let two = reconfigure(&tasks, &workers, 2).unwrap();
        let around = &two.worker_to_tasks[&WorkerClusterId(0)];
        assert_eq!(around[0], TaskClusterId(0));
        assert!(around.contains(&TaskClusterId(1)) && around.contains(&TaskClusterId(3)));
        assert!(one.task_to_workers[&TaskClusterId(0)].contains(&WorkerClusterId(0)));
    }

    #[test]
    fn zero_layers() {
        let tasks = vec![tc(0, 0, 0), tc(1, 10, 0), tc(2, 10, 10)];
        let workers = vec![wc(0, 1, 1), wc(1, 50, 0), wc(2, 0, 50)];
        assert_eq!(reconfigure(&tasks, &workers, 0), Err(ReconfigureError::ZeroLayers));
    }
}
