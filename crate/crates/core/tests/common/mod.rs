#![allow(dead_code)]

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ncalloc::clustering::{Task, TaskCluster, TaskClusterId, Worker, WorkerCluster, WorkerClusterId};
use ncalloc::geometry::PlanarPoint;

/// Random clusters with members scattered within 30 m of distinct centers
/// spread over a few kilometres.
pub fn random_clusters(seed: u64, n_tasks: usize, n_workers: usize) -> (Vec<TaskCluster>, Vec<WorkerCluster>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let spot = |rng: &mut ChaCha8Rng| {
        PlanarPoint::from_meters(rng.random_range(0.0..3_000.0), rng.random_range(0.0..3_000.0))
    };
    let near = |rng: &mut ChaCha8Rng, c: PlanarPoint| {
        let (x, y) = c.to_meters();
        PlanarPoint::from_meters(x + rng.random_range(-30.0..30.0), y + rng.random_range(-30.0..30.0))
    };
    let tasks = (0..n_tasks)
        .map(|i| {
            let c = spot(&mut rng);
            let members = (0..rng.random_range(1..5))
                .map(|j| Task {
                    id: format!("t{i}-{j}"),
                    location: near(&mut rng, c),
                    reward: rng.random_range(1.0..20.0),
                })
                .collect();
            TaskCluster::new(TaskClusterId(i as u32), members).unwrap()
        })
        .collect();
    let workers = (0..n_workers)
        .map(|i| {
            let c = spot(&mut rng);
            let members = (0..rng.random_range(1..5))
                .map(|j| Worker {
                    id: format!("w{i}-{j}"),
                    location: near(&mut rng, c),
                    ability: rng.random_range(1.0..10.0),
                })
                .collect();
            WorkerCluster::new(WorkerClusterId(i as u32), members).unwrap()
        })
        .collect();
    (tasks, workers)
}
