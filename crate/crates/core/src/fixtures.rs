//! Reference graphs shared by tests, the verify suite and the benchmarks.
//!
//! `F1` is the seven-block graph
//! `g; 1(p=g,r=g); 2(p=1,r=1); 3(p=1,r=1); 4(p=1,r=1); 5(p=3,r=4); 6(p=5,r=2)`
//! whose pivot chain is `<g,1,3,5,6>` and whose total order is
//! `<g,1,3,4,5,2,6>` regardless of the concrete hash values.

use std::collections::BTreeSet;
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use crate::block::{Address, BlockHeader, BlockId};
use crate::dag::DagState;

pub struct F1Ids {
    pub g: BlockId,
    blocks: [BlockId; 6],
}

impl F1Ids {
    /// Label 0 is the genesis.
    pub fn get(&self, label: usize) -> BlockId {
        if label == 0 {
            self.g
        } else {
            self.blocks[label - 1]
        }
    }

    pub fn set(&self, labels: &[usize]) -> BTreeSet<BlockId> {
        labels.iter().map(|&l| self.get(l)).collect()
    }

    pub fn seq(&self, labels: &[usize]) -> Vec<BlockId> {
        labels.iter().map(|&l| self.get(l)).collect()
    }

    pub fn label(&self, id: &BlockId) -> Option<usize> {
        (0..=6).find(|&l| self.get(l) == *id)
    }
}

pub fn f1_header(label: u64, trunk: Option<BlockId>, branch: Option<BlockId>) -> BlockHeader {
    BlockHeader {
        sender: Address(label),
        timestamp: label,
        bundle_id: None,
        trunk,
        branch,
        tag: b"f1".to_vec(),
        attach_ts: label,
        nonce: 0,
        payload: vec![],
    }
}

/// `(label, parent label, reference label)` for blocks 1..=6.
pub const F1_EDGES: [(usize, usize, usize); 6] =
    [(1, 0, 0), (2, 1, 1), (3, 1, 1), (4, 1, 1), (5, 3, 4), (6, 5, 2)];

pub fn f1() -> (DagState, F1Ids) {
    let mut dag = DagState::new(BlockHeader::genesis(Address(0), vec![]), 0);
    let mut ids = [dag.genesis(); 7];
    for (label, p, r) in F1_EDGES {
        let h = f1_header(label as u64, Some(ids[p]), Some(ids[r]));
        ids[label] = dag.insert_block(h).expect("fixture insert").id();
    }
    let f = F1Ids {
        g: ids[0],
        blocks: ids[1..].try_into().unwrap(),
    };
    (dag, f)
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum DagShape {
    /// Trunk and branch uniform over every existing block.
    Uniform,
    /// Trunk and branch drawn from the 4 most recent blocks.
    Narrow,
    /// Trunk and branch drawn from the 16 most recent blocks.
    Wide,
}

impl DagShape {
    pub const ALL: [DagShape; 3] = [DagShape::Uniform, DagShape::Narrow, DagShape::Wide];

    fn window(self) -> Option<usize> {
        match self {
            DagShape::Uniform => None,
            DagShape::Narrow => Some(4),
            DagShape::Wide => Some(16),
        }
    }
}

/// Genesis plus `n - 1` headers in a valid insertion order. Difficulty 0.
pub fn random_headers(seed: u64, n: usize, shape: DagShape) -> (Arc<BlockHeader>, Vec<Arc<BlockHeader>>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let genesis = Arc::new(BlockHeader::genesis(Address(0), vec![]));
    let mut ids = vec![crate::block::hash_block(&genesis)];
    let mut headers = Vec::with_capacity(n.saturating_sub(1));
    for i in 1..n {
        let lo = shape.window().map_or(0, |w| ids.len().saturating_sub(w));
        let trunk = ids[rng.gen_range(lo..ids.len())];
        let branch = ids[rng.gen_range(lo..ids.len())];
        let h = BlockHeader {
            sender: Address(rng.gen_range(0..1_000)),
            timestamp: i as u64,
            bundle_id: None,
            trunk: Some(trunk),
            branch: Some(branch),
            tag: seed.to_be_bytes().to_vec(),
            attach_ts: i as u64,
            nonce: rng.gen(),
            payload: vec![],
        };
        ids.push(crate::block::hash_block(&h));
        headers.push(Arc::new(h));
    }
    (genesis, headers)
}

pub fn random_dag(seed: u64, n: usize, shape: DagShape) -> DagState {
    let (genesis, headers) = random_headers(seed, n, shape);
    let mut dag = DagState::with_genesis(genesis, 0);
    for h in headers {
        dag.insert(h).expect("random fixture insert");
    }
    dag
}

/// A pure parental chain `g <- 1 <- ... <- len-1`.
pub fn chain_dag(len: usize) -> DagState {
    let mut dag = DagState::new(BlockHeader::genesis(Address(0), vec![]), 0);
    let mut prev = dag.genesis();
    for i in 1..len {
        prev = dag
            .insert_block(f1_header(100 + i as u64, Some(prev), Some(prev)))
            .unwrap()
            .id();
    }
    dag
}

/// Blocks with a cut vertex after every round, so forwarding at a seal
/// strands nothing.
pub struct SealedSchedule {
    pub genesis: Arc<BlockHeader>,
    /// In a valid insertion order.
    pub headers: Vec<Arc<BlockHeader>>,
    /// Blocks that every earlier block precedes and every later block follows.
    pub seals: BTreeSet<BlockId>,
}

/// `rounds` rounds of `per_round` random blocks, each round closed by
/// merge blocks until one tip is left. The genesis issues 64 coins and
/// every random block spends one of them, so double spends are common.
pub fn sealed_schedule(seed: u64, rounds: usize, per_round: usize) -> SealedSchedule {
    use crate::ledger::{Transaction, TxOut};

    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coins: Vec<Transaction> = (0..64).map(|i| Transaction::coinbase(Address(i), 100)).collect();
    let genesis = Arc::new(BlockHeader::genesis(Address(0), coins.clone()));
    let mut ids = vec![crate::block::hash_block(&genesis)];
    let mut headers = Vec::new();
    let mut seals = BTreeSet::new();
    let mut window = 0;
    let mut tips = BTreeSet::from([0usize]);
    let mut push = |trunk: usize, branch: usize, payload, ids: &mut Vec<BlockId>, tips: &mut BTreeSet<usize>| {
        let k = ids.len() as u64;
        let h = BlockHeader {
            sender: Address(k),
            timestamp: k,
            bundle_id: None,
            trunk: Some(ids[trunk]),
            branch: Some(ids[branch]),
            tag: seed.to_be_bytes().to_vec(),
            attach_ts: k,
            nonce: 0,
            payload,
        };
        tips.remove(&trunk);
        tips.remove(&branch);
        tips.insert(ids.len());
        ids.push(crate::block::hash_block(&h));
        headers.push(Arc::new(h));
    };
    for _ in 0..rounds {
        for _ in 0..per_round {
            let trunk = rng.gen_range(window..ids.len());
            let branch = rng.gen_range(window..ids.len());
            let i = rng.gen_range(0..coins.len());
            let k = ids.len() as u64;
            let spend = Transaction::new(
                Address(i as u64),
                vec![coins[i].output_ref(0)],
                vec![TxOut::new(Address(1_000 + k), 100)],
                k,
            );
            push(trunk, branch, vec![spend], &mut ids, &mut tips);
        }
        while tips.len() > 1 {
            let mut it = tips.iter();
            let (a, b) = (*it.next().unwrap(), *it.next().unwrap());
            push(a, b, vec![], &mut ids, &mut tips);
        }
        window = *tips.iter().next().unwrap();
        seals.insert(ids[window]);
    }
    SealedSchedule {
        genesis,
        headers,
        seals,
    }
}
