use proptest::prelude::*;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;

use super::{Combiner, StreamingDag};
use crate::block::hash_block;
use crate::dag::oracle;
use crate::fixtures::{random_headers, sealed_schedule, DagShape};

fn shape() -> impl Strategy<Value = DagShape> {
    prop::sample::select(DagShape::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(48))]

    #[test]
    fn shuffled_arrivals_keep_scores_exact(seed in any::<u64>(), n in 2usize..100, shape in shape(), perm in any::<u64>()) {
        let (g, mut headers) = random_headers(seed, n, shape);
        headers.shuffle(&mut ChaCha8Rng::seed_from_u64(perm));
        let mut s = StreamingDag::new(g, 0, Combiner::Max);
        for h in headers {
            s.insert(h).unwrap();
        }
        let dag = s.dag();
        prop_assert_eq!(dag.len(), n);
        let mut past_total = 0;
        for b in dag.ids() {
            prop_assert_eq!(s.maps().score(dag, &b), oracle::score_oracle(dag, &b).ok());
            prop_assert_eq!(s.maps().parent_score(dag, &b), oracle::parent_score_oracle(dag, &b).ok());
            past_total += oracle::past(dag, &b).unwrap().len() as u64;
        }
        prop_assert!(s.maps().touched() <= past_total);
    }

    #[test]
    fn max_top_score_rises_along_every_edge(seed in any::<u64>(), n in 2usize..100, shape in shape()) {
        let (g, headers) = random_headers(seed, n, shape);
        let mut s = StreamingDag::new(g, 0, Combiner::Max);
        for h in headers {
            s.insert(h).unwrap();
        }
        let dag = s.dag();
        for b in dag.ids() {
            for e in dag.before(&b).unwrap() {
                prop_assert!(s.top_scores().get(dag, &b) > s.top_scores().get(dag, &e));
            }
        }
    }

    #[test]
    fn forwarding_only_appends_history(seed in any::<u64>(), rounds in 1usize..6, per_round in 1usize..12) {
        let sched = sealed_schedule(seed, rounds, per_round);
        let mut s = StreamingDag::new(sched.genesis.clone(), 0, Combiner::Max);
        let mut plain = StreamingDag::new(sched.genesis.clone(), 0, Combiner::Max);
        let mut history = s.store().persisted_order().to_vec();
        for h in &sched.headers {
            s.insert(h.clone()).unwrap();
            plain.insert(h.clone()).unwrap();
            let id = hash_block(h);
            if sched.seals.contains(&id) && s.pivot().chain.contains(&id) {
                s.forward(&id).unwrap();
                let now = s.store().persisted_order();
                prop_assert!(now.starts_with(&history));
                history = now.to_vec();
            }
        }
        prop_assert_eq!(s.full_order(), plain.total_order().order);
        prop_assert_eq!(s.utxo(), plain.utxo());
    }
}
