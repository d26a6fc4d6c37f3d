use std::collections::{BTreeMap, BTreeSet};
use std::sync::Arc;

use proptest::prelude::*;

use super::{apply_order, OutputRef, Transaction, TxOut};
use crate::block::{hash_block, Address, BlockHeader, BlockId};

/// Genesis with `coins` outputs, then blocks of random spends (some of
/// them bundles) in the given order.
fn scenario(coins: u64, spends: &[(u64, u64, bool)]) -> (BTreeMap<BlockId, Arc<BlockHeader>>, Vec<BlockId>, u64) {
    let cb: Vec<Transaction> = (0..coins).map(|i| Transaction::coinbase(Address(i), 10 + i)).collect();
    let issued = cb.iter().map(|t| t.outputs()[0].amount).sum();
    let genesis = BlockHeader::genesis(Address(0), cb.clone());
    let gid = hash_block(&genesis);
    let mut blocks = BTreeMap::from([(gid, Arc::new(genesis))]);
    let mut order = vec![gid];
    for (k, chunk) in spends.chunks(3).enumerate() {
        let txns: Vec<Transaction> = chunk
            .iter()
            .enumerate()
            .map(|(j, &(coin, to, _))| {
                let c = &cb[(coin % coins) as usize];
                Transaction::new(c.sender(), vec![c.output_ref(0)], vec![TxOut::new(Address(100 + to), c.outputs()[0].amount)], (k * 3 + j) as u64)
            })
            .collect();
        let bundle = chunk[0].2;
        let h = BlockHeader {
            sender: Address(k as u64),
            timestamp: k as u64,
            bundle_id: if bundle { Some(super::Bundle::id_for(&txns)) } else { None },
            trunk: Some(gid),
            branch: Some(gid),
            tag: vec![],
            attach_ts: k as u64,
            nonce: 0,
            payload: txns,
        };
        let id = hash_block(&h);
        blocks.insert(id, Arc::new(h));
        order.push(id);
    }
    (blocks, order, issued)
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(128))]

    #[test]
    fn replay_is_exclusive_conserving_and_pure(
        coins in 1u64..12,
        spends in prop::collection::vec((any::<u64>(), 0u64..20, any::<bool>()), 0..60),
    ) {
        let (blocks, order, issued) = scenario(coins, &spends);
        let state = apply_order(&order, &blocks, Default::default());
        prop_assert_eq!(&state, &apply_order(&order, &blocks, Default::default()));
        prop_assert!(state.is_conserved());
        prop_assert_eq!(state.total_unspent(), issued);
        let mut spent: BTreeSet<OutputRef> = BTreeSet::new();
        for id in &order[1..] {
            let verdicts = &state.outcomes[id];
            for (t, ok) in blocks[id].payload.iter().zip(verdicts) {
                if *ok {
                    for i in t.inputs() {
                        prop_assert!(spent.insert(*i), "output spent twice");
                    }
                }
            }
        }
    }

    #[test]
    fn replay_splits_at_any_point(
        coins in 1u64..8,
        spends in prop::collection::vec((any::<u64>(), 0u64..20, any::<bool>()), 0..40),
        cut in any::<prop::sample::Index>(),
    ) {
        let (blocks, order, _) = scenario(coins, &spends);
        let k = cut.index(order.len() + 1);
        let head = apply_order(&order[..k], &blocks, Default::default());
        let resumed = apply_order(&order[k..], &blocks, head);
        prop_assert_eq!(resumed, apply_order(&order, &blocks, Default::default()));
    }
}
