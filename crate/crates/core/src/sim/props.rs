use std::sync::Arc;

use proptest::prelude::*;

use super::{CostModel, MsgKind, Network, Protocol, SimConfig, Topology, WorkItem};
use crate::block::{Address, BlockHeader};
use crate::ledger::Transaction;

/// A random spanning tree plus extra random links.
fn topology() -> impl Strategy<Value = Topology> {
    (2usize..8)
        .prop_flat_map(|n| {
            let tree = (1..n).map(|v| (0..v).prop_map(move |p| (p, v))).collect::<Vec<_>>();
            (Just(n), tree, prop::collection::vec((0..n, 0..n), 0..6))
        })
        .prop_map(|(n, tree, extra)| {
            let edges = tree.into_iter().chain(extra.into_iter().filter(|(a, b)| a != b));
            Topology::new("random", n, edges).unwrap()
        })
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(40))]

    #[test]
    fn direct_signal_pulls_each_block_once_per_node(
        topo in topology(),
        counts in prop::collection::vec(0usize..4, 8),
        seed in any::<u64>(),
        jitter in 0u64..3,
    ) {
        let cfg = SimConfig {
            protocol: Protocol::DirectSignal,
            costs: CostModel::FREE,
            difficulty: 2,
            jitter_ns: jitter * 1_000_000,
            seed,
            ..Default::default()
        };
        let g = Arc::new(BlockHeader::genesis(Address(0), vec![Transaction::coinbase(Address(0), 1)]));
        let n = topo.n;
        let mut net = Network::new(topo, cfg, g);
        let mut blocks = 0u64;
        for (node, &c) in counts.iter().take(n).enumerate() {
            net.assign(node, (0..c).map(|_| WorkItem::empty()));
            blocks += c as u64;
        }
        net.run();
        prop_assert!(net.converged());
        prop_assert_eq!(net.repeated_block_sends(), 0);
        prop_assert_eq!(net.metrics().sent(MsgKind::Block), blocks * (n as u64 - 1));
        prop_assert_eq!(net.node(0).streaming().dag().len() as u64, blocks + 1);
    }
}
