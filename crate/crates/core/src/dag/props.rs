use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{dump, oracle, DagState, OrphanPool};
use crate::fixtures::{random_headers, DagShape};

fn shape() -> impl Strategy<Value = DagShape> {
    prop::sample::select(DagShape::ALL.to_vec())
}

fn build(seed: u64, n: usize, shape: DagShape) -> DagState {
    let (g, headers) = random_headers(seed, n, shape);
    let mut dag = DagState::with_genesis(g, 0);
    for h in headers {
        dag.insert(h).unwrap();
    }
    dag
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn past_and_later_are_dual(seed in any::<u64>(), n in 1usize..60, shape in shape()) {
        let dag = build(seed, n, shape);
        let ids: Vec<_> = dag.ids().collect();
        for b in &ids {
            let past = oracle::past(&dag, b).unwrap();
            let later = oracle::later(&dag, b).unwrap();
            prop_assert_eq!(past.intersection(&later).collect::<Vec<_>>(), vec![b]);
            for x in &ids {
                prop_assert_eq!(past.contains(x), oracle::later(&dag, x).unwrap().contains(b));
            }
        }
    }

    #[test]
    fn tips_are_blocks_without_approvers(seed in any::<u64>(), n in 1usize..80, shape in shape()) {
        let (g, headers) = random_headers(seed, n, shape);
        let mut dag = DagState::with_genesis(g, 0);
        for h in headers {
            dag.insert(h).unwrap();
            let expect: std::collections::BTreeSet<_> =
                dag.ids().filter(|b| dag.after(b).unwrap().is_empty()).collect();
            prop_assert_eq!(dag.tips(), &expect);
        }
        prop_assert!(dag.check_invariants().is_ok());
    }

    #[test]
    fn arrival_order_does_not_matter(seed in any::<u64>(), n in 2usize..60, shape in shape(), perm in any::<u64>()) {
        let (g, mut headers) = random_headers(seed, n, shape);
        let reference = build(seed, n, shape);
        headers.shuffle(&mut ChaCha8Rng::seed_from_u64(perm));
        let mut dag = DagState::with_genesis(g, 0);
        let mut pool = OrphanPool::new(OrphanPool::DEFAULT_CAPACITY);
        for h in headers {
            pool.offer(h, |h| dag.insert(h)).unwrap();
        }
        prop_assert!(pool.is_empty());
        prop_assert_eq!(dump(&dag), dump(&reference));
    }

    #[test]
    fn parental_tree_spans_every_block(seed in any::<u64>(), n in 1usize..80, shape in shape()) {
        let dag = build(seed, n, shape);
        let all: std::collections::BTreeSet<_> = dag.ids().collect();
        prop_assert_eq!(oracle::subtree(&dag, &dag.genesis()).unwrap(), all);
    }
}
