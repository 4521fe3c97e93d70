mod common;

use proptest::prelude::*;

use ncalloc::evaluation::{rank_candidates, Aggregate, EvalBasis, EvalWeights, RankedAdjacency};
use ncalloc::ncgraph::reconfigure;

use common::random_clusters;

fn weights() -> impl Strategy<Value = EvalWeights> {
    (0.0f64..3.0, 0.0f64..3.0, 0.0f64..3.0)
        .prop_filter("one positive weight", |(a, b, g)| a + b + g > 0.0)
        .prop_map(|(a, b, g)| EvalWeights::new(a, b, g).unwrap())
}

fn aggregate() -> impl Strategy<Value = Aggregate> {
    prop_oneof![Just(Aggregate::Avg), Just(Aggregate::Sum)]
}

fn orders<A: Ord + Copy, C: Copy>(r: &RankedAdjacency<A, C>) -> Vec<(A, Vec<C>)> {
    r.lists
        .iter()
        .map(|(a, l)| (*a, l.iter().map(|e| e.candidate).collect()))
        .collect()
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn ranks_are_consistent_bijections(seed in any::<u64>(), w in weights(), ts in aggregate(), ws in aggregate(), layers in 1usize..3) {
        let (tasks, workers) = random_clusters(seed, 9, 8);
        let Ok(adj) = reconfigure(&tasks, &workers, layers) else { return Ok(()) };
        let (by_worker, by_task) = rank_candidates(&adj, &tasks, &workers, w, EvalBasis::new(ts, ws)).unwrap();
        for list in by_worker.lists.values() {
            let ranks: Vec<u32> = list.iter().map(|e| e.rank).collect();
            prop_assert_eq!(ranks, (1..=list.len() as u32).collect::<Vec<_>>());
            for pair in list.windows(2) {
                prop_assert!(pair[0].score > pair[1].score
                    || (pair[0].score == pair[1].score && pair[0].candidate < pair[1].candidate));
            }
        }
        for list in by_task.lists.values() {
            let ranks: Vec<u32> = list.iter().map(|e| e.rank).collect();
            prop_assert_eq!(ranks, (1..=list.len() as u32).collect::<Vec<_>>());
            for pair in list.windows(2) {
                prop_assert!(pair[0].score > pair[1].score
                    || (pair[0].score == pair[1].score && pair[0].candidate < pair[1].candidate));
            }
        }
    }

    #[test]
    fn positive_scaling_keeps_orders(seed in any::<u64>(), w in weights(), c in 0.01f64..100.0) {
        let (tasks, workers) = random_clusters(seed, 8, 8);
        let Ok(adj) = reconfigure(&tasks, &workers, 2) else { return Ok(()) };
        let basis = EvalBasis::new(Aggregate::Avg, Aggregate::Sum);
        let (a_w, a_t) = rank_candidates(&adj, &tasks, &workers, w, basis).unwrap();
        let (b_w, b_t) = rank_candidates(&adj, &tasks, &workers, w.scaled(c), basis).unwrap();
        prop_assert_eq!(orders(&a_w), orders(&b_w));
        prop_assert_eq!(orders(&a_t), orders(&b_t));
    }

    #[test]
    fn bases_act_on_their_own_side(seed in any::<u64>(), w in weights(), ts in aggregate(), ws in aggregate()) {
        let (tasks, workers) = random_clusters(seed, 8, 9);
        let Ok(adj) = reconfigure(&tasks, &workers, 2) else { return Ok(()) };
        let flip = |a| if a == Aggregate::Avg { Aggregate::Sum } else { Aggregate::Avg };
        let (w0, t0) = rank_candidates(&adj, &tasks, &workers, w, EvalBasis::new(ts, ws)).unwrap();
        // Workers' task lists depend only on the task-side basis.
        let (w1, _) = rank_candidates(&adj, &tasks, &workers, w, EvalBasis::new(ts, flip(ws))).unwrap();
        let (_, t1) = rank_candidates(&adj, &tasks, &workers, w, EvalBasis::new(flip(ts), ws)).unwrap();
        prop_assert_eq!(w0, w1);
        prop_assert_eq!(t0, t1);
    }

    #[test]
    fn adjacency_lists_are_clean(seed in any::<u64>(), layers in 1usize..3) {
        let (tasks, workers) = random_clusters(seed, 10, 7);
        let Ok(adj) = reconfigure(&tasks, &workers, layers) else { return Ok(()) };
        prop_assert_eq!(adj.task_to_workers.len(), tasks.len());
        prop_assert_eq!(adj.worker_to_tasks.len(), workers.len());
        for list in adj.task_to_workers.values() {
            let mut s = list.clone();
            s.sort();
            s.dedup();
            prop_assert_eq!(s.len(), list.len());
            prop_assert!(!list.is_empty() && list.iter().all(|w| (w.0 as usize) < workers.len()));
        }
        for list in adj.worker_to_tasks.values() {
            let mut s = list.clone();
            s.sort();
            s.dedup();
            prop_assert_eq!(s.len(), list.len());
            prop_assert!(!list.is_empty() && list.iter().all(|t| (t.0 as usize) < tasks.len()));
        }
        if layers == 2 {
            let one = reconfigure(&tasks, &workers, 1).unwrap();
            for (t, l) in &one.task_to_workers {
                prop_assert!(l.iter().all(|w| adj.task_to_workers[t].contains(w)));
            }
        }
    }
}
