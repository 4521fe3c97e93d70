mod common;

use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use ncalloc::clustering::{TaskCluster, WorkerCluster, WorkerClusterId};
use ncalloc::matching::{allocate, AllocationResult, Cap, MatchingTable};
use ncalloc::metrics::{
    compute_indicators, individual_payoffs, standardize, IndicatorReport, PayoffModel, RequesterQuality, WorkerShare,
};

use common::random_clusters;

fn allocation(seed: u64, cap: Cap) -> (Vec<TaskCluster>, Vec<WorkerCluster>, AllocationResult) {
    let (tasks, workers) = random_clusters(seed, 6, 10);
    let mut rng = ChaCha8Rng::seed_from_u64(seed ^ 0xa11c);
    let mut table = MatchingTable::default();
    for w in &workers {
        for t in &tasks {
            if rng.random_bool(0.5) {
                table.entries.insert((w.id, t.id), rng.random_range(1.0..10.0));
            }
        }
    }
    let mut seq: Vec<WorkerClusterId> = workers.iter().map(|w| w.id).collect();
    seq.shuffle(&mut rng);
    let result = allocate(&table, &seq, cap);
    (tasks, workers, result)
}

fn model() -> impl Strategy<Value = PayoffModel> {
    (any::<bool>(), any::<bool>()).prop_map(|(full, sum)| PayoffModel {
        worker_share: if full { WorkerShare::FullPerWorker } else { WorkerShare::EvenSplit },
        requester_quality: if sum { RequesterQuality::SumAbility } else { RequesterQuality::MeanAbility },
    })
}

proptest! {
    #[test]
    fn worker_payoff_is_conserved(seed in any::<u64>(), cap in 1u32..4, m in model()) {
        let (tasks, workers, r) = allocation(seed, Cap::Limited(cap));
        let report = compute_indicators(&r, &tasks, &workers, m).unwrap();
        let expected: f64 = r
            .assignments
            .iter()
            .map(|a| {
                let reward = tasks.iter().find(|t| t.id == a.task).unwrap().total_reward();
                let size = workers.iter().find(|w| w.id == a.worker).unwrap().members.len() as f64;
                match m.worker_share {
                    WorkerShare::EvenSplit => reward,
                    WorkerShare::FullPerWorker => reward * size,
                }
            })
            .sum();
        prop_assert!((report.total_worker_payoff - expected).abs() <= 1e-9 * expected.max(1.0));
    }

    #[test]
    fn rates_and_variances_are_bounded(seed in any::<u64>(), cap in 1u32..4, m in model()) {
        let (tasks, workers, r) = allocation(seed, Cap::Limited(cap));
        let report = compute_indicators(&r, &tasks, &workers, m).unwrap();
        prop_assert!((0.0..=1.0).contains(&report.task_allocation_rate));
        prop_assert!((0.0..=1.0).contains(&report.worker_utilization_rate));
        let every_task = tasks.iter().all(|t| r.allocation_counts.contains_key(&t.id));
        prop_assert_eq!(report.task_allocation_rate == 1.0, every_task);
        prop_assert_eq!(report.worker_utilization_rate == 1.0, r.unmatched_workers.is_empty());

        let p = individual_payoffs(&r, &tasks, &workers, m).unwrap();
        prop_assert!(report.requester_payoff_variance >= 0.0 && report.worker_payoff_variance >= 0.0);
        let all_equal = |v: &[f64]| v.iter().all(|x| *x == v[0]);
        prop_assert_eq!(report.worker_payoff_variance == 0.0, all_equal(&p.worker));
        prop_assert_eq!(report.requester_payoff_variance == 0.0, all_equal(&p.requester));
    }

    #[test]
    fn standardization_pins_the_baseline(seed in any::<u64>()) {
        let mut reports = BTreeMap::new();
        for (i, cap) in [Cap::Limited(1), Cap::Limited(2), Cap::Unlimited].into_iter().enumerate() {
            let (tasks, workers, r) = allocation(seed, cap);
            reports.insert(i, compute_indicators(&r, &tasks, &workers, PayoffModel::default()).unwrap());
        }
        let base: IndicatorReport = reports[&0];
        prop_assume!(base.requester_payoff_variance > 0.0 && base.worker_payoff_variance > 0.0);
        let s = standardize(&reports, &0).unwrap();
        let b = s[&0];
        for v in [b.total_requester_payoff, b.total_worker_payoff, b.requester_payoff_variance, b.worker_payoff_variance] {
            prop_assert_eq!(v, 1.0);
        }
        prop_assert_eq!(s[&2].task_allocation_rate, reports[&2].task_allocation_rate);
    }
}
