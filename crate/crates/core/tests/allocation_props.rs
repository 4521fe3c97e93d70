use std::collections::BTreeMap;

use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use ncalloc::matching::{allocate, merge_ranks, AllocationResult, Cap, MatchingTable};
use ncalloc::verify::{random_matching_instance, reference_allocate};

fn instance(seed: u64) -> (MatchingTable, Vec<ncalloc::clustering::WorkerClusterId>) {
    random_matching_instance(&mut ChaCha8Rng::seed_from_u64(seed), 12, 8)
}

fn cap_strategy() -> impl Strategy<Value = Cap> {
    prop_oneof![(1u32..6).prop_map(Cap::Limited), Just(Cap::Unlimited)]
}

fn sorted(result: &AllocationResult) -> Vec<(u32, u32)> {
    let mut v: Vec<(u32, u32)> = result.assignments.iter().map(|a| (a.worker.0, a.task.0)).collect();
    v.sort_unstable();
    v
}

proptest! {
    #[test]
    fn merged_rank_lies_between_inputs(rt in 1u32..200, rw in 1u32..200, w in 0.0f64..=1.0) {
        let m = merge_ranks(rt, rw, w).unwrap();
        prop_assert!(m >= rt.min(rw) as f64 - 1e-12 && m <= rt.max(rw) as f64 + 1e-12);
        prop_assert!((merge_ranks(rt, rw, 1.0 - w).unwrap() - merge_ranks(rw, rt, w).unwrap()).abs() < 1e-9);
    }

    #[test]
    fn cap_is_respected(seed in any::<u64>(), cap in cap_strategy()) {
        let (table, seq) = instance(seed);
        let r = allocate(&table, &seq, cap);
        if let Cap::Limited(c) = cap {
            prop_assert!(r.allocation_counts.values().all(|&n| n <= c));
        }
        prop_assert_eq!(r.assignments.len() + r.unmatched_workers.len(), seq.len());
        let total: u32 = r.allocation_counts.values().sum();
        prop_assert_eq!(total as usize, r.assignments.len());
    }

    #[test]
    fn each_step_is_greedy(seed in any::<u64>(), cap in cap_strategy()) {
        let (table, seq) = instance(seed);
        let r = allocate(&table, &seq, cap);
        let mut counts: BTreeMap<_, u32> = BTreeMap::new();
        let mut next = r.assignments.iter().peekable();
        for &w in &seq {
            let open: Vec<_> = table
                .row(w)
                .filter(|(t, _)| cap.admits(counts.get(t).copied().unwrap_or(0)))
                .collect();
            match next.peek() {
                Some(a) if a.worker == w => {
                    prop_assert!(open.iter().all(|(_, v)| *v >= a.value));
                    *counts.entry(a.task).or_insert(0) += 1;
                    next.next();
                }
                _ => prop_assert!(open.is_empty()),
            }
        }
    }

    #[test]
    fn matches_reference(seed in any::<u64>(), cap in cap_strategy()) {
        let (table, seq) = instance(seed);
        prop_assert_eq!(allocate(&table, &seq, cap), reference_allocate(&table, &seq, cap));
    }

    #[test]
    fn uncapped_ignores_order(seed in any::<u64>(), shuffle in any::<u64>()) {
        let (table, seq) = instance(seed);
        let mut other = seq.clone();
        other.shuffle(&mut ChaCha8Rng::seed_from_u64(shuffle));
        prop_assert_eq!(
            sorted(&allocate(&table, &seq, Cap::Unlimited)),
            sorted(&allocate(&table, &other, Cap::Unlimited))
        );
    }

    #[test]
    fn matched_count_grows_with_cap(seed in any::<u64>()) {
        let (table, seq) = instance(seed);
        let mut last = 0;
        for cap in [Cap::Limited(1), Cap::Limited(2), Cap::Limited(3), Cap::Limited(5), Cap::Unlimited] {
            let n = allocate(&table, &seq, cap).matched_workers();
            prop_assert!(n >= last, "cap {cap}: {n} < {last}");
            last = n;
        }
    }

    #[test]
    fn allocation_is_deterministic_and_dump_round_trips(seed in any::<u64>(), cap in cap_strategy()) {
        let (table, seq) = instance(seed);
        let r = allocate(&table, &seq, cap);
        prop_assert_eq!(&r, &allocate(&table, &seq, cap));
        prop_assert_eq!(AllocationResult::from_csv(&r.to_csv()).unwrap(), r);
    }
}
