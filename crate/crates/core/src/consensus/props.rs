use std::collections::BTreeMap;

use proptest::prelude::*;

use super::{pivot, total_order, transition_probabilities, McmcParams, Scores, TieBreak, WalkEdges};
use crate::dag::{oracle, DagState};
use crate::fixtures::{random_headers, DagShape};

fn shape() -> impl Strategy<Value = DagShape> {
    prop::sample::select(DagShape::ALL.to_vec())
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(64))]

    #[test]
    fn pivot_blocks_win_among_siblings(seed in any::<u64>(), n in 1usize..80, shape in shape()) {
        let (g, headers) = random_headers(seed, n, shape);
        let mut dag = DagState::with_genesis(g, 0);
        for h in headers {
            dag.insert(h).unwrap();
        }
        let chain = pivot(&dag, &dag.genesis(), Scores::Oracle, TieBreak::SmallerId).unwrap().chain;
        for w in chain.windows(2) {
            let key = |b: &crate::block::BlockId| (oracle::parent_score_oracle(&dag, b).unwrap(), std::cmp::Reverse(*b));
            for s in oracle::child(&dag, &w[0]).unwrap() {
                prop_assert!(key(&w[1]) >= key(&s));
            }
        }
        prop_assert!(oracle::child(&dag, chain.last().unwrap()).unwrap().is_empty());
    }

    #[test]
    fn order_is_a_topological_permutation_of_the_tip_past(seed in any::<u64>(), n in 1usize..120, shape in shape()) {
        let (g, headers) = random_headers(seed, n, shape);
        let mut dag = DagState::with_genesis(g, 0);
        for h in headers {
            dag.insert(h).unwrap();
        }
        let eo = total_order(&dag);
        let tip = *eo.pivots.last().unwrap();
        let past = oracle::past(&dag, &tip).unwrap();
        let pos: BTreeMap<_, _> = eo.order.iter().enumerate().map(|(i, b)| (*b, i)).collect();
        prop_assert_eq!(pos.len(), eo.order.len());
        prop_assert_eq!(pos.keys().copied().collect::<std::collections::BTreeSet<_>>(), past);
        for b in &eo.order {
            for e in dag.before(b).unwrap() {
                prop_assert!(pos[&e] < pos[b]);
            }
        }
    }

    #[test]
    fn earlier_epochs_survive_growth(seed in any::<u64>(), n in 2usize..80, shape in shape()) {
        let (g, headers) = random_headers(seed, n, shape);
        let mut dag = DagState::with_genesis(g, 0);
        let mut old = total_order(&dag);
        for h in headers {
            let id = dag.insert(h).unwrap().id();
            let new = total_order(&dag);
            if let Some(e) = new.epoch_of.get(&id).and_then(|p| new.pivots.iter().position(|x| x == p)) {
                let common = old.pivots.iter().zip(&new.pivots).take_while(|(a, b)| a == b).count();
                for k in 0..e.min(common) {
                    let end = |eo: &crate::consensus::EpochOrder| eo.epoch_starts.get(k + 1).copied().unwrap_or(eo.order.len());
                    prop_assert_eq!(&old.order[..end(&old)], &new.order[..end(&new)]);
                }
            }
            old = new;
        }
    }

    #[test]
    fn walk_probabilities_sum_to_one(seed in any::<u64>(), n in 2usize..60, alpha in 0.0f64..20.0, parental in any::<bool>()) {
        let (g, headers) = random_headers(seed, n, DagShape::Uniform);
        let mut dag = DagState::with_genesis(g, 0);
        for h in headers {
            dag.insert(h).unwrap();
        }
        let params = McmcParams {
            alpha,
            seed,
            walk: if parental { WalkEdges::Parental } else { WalkEdges::Approvers },
        };
        for b in dag.ids().collect::<Vec<_>>() {
            let probs = transition_probabilities(&dag, &b, &params, Scores::Oracle).unwrap();
            if !probs.is_empty() {
                let sum: f64 = probs.iter().map(|p| p.1).sum();
                prop_assert!((sum - 1.0).abs() <= 1e-12, "{}", sum);
            }
        }
    }
}
