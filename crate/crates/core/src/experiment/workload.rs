//! Two-step workload: a ramp-up transaction in the genesis funds the first
//! account group, then every funded output is spent twice, to two different
//! accounts of the second group, from two different nodes.

use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::ExperimentConfig;
use crate::block::{Address, BlockHeader};
use crate::ledger::{OutputRef, Transaction, TxOut, TxnId};
use crate::sim::WorkItem;

pub const GENESIS_ACCOUNT: Address = Address(0);
pub const ISSUANCE: u64 = 1_000_000_000;
/// Tokens each first-group account receives during ramp-up.
pub const RAMP_AMOUNT: u64 = 1_000;

/// Two spends of the same output.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SpendPair {
    pub input: OutputRef,
    pub first: TxnId,
    /// `None` for the trailing spend of an odd transaction count.
    pub second: Option<TxnId>,
}

#[derive(Clone, Debug)]
pub struct Workload {
    pub genesis: Arc<BlockHeader>,
    pub ramp_up: Transaction,
    pub group1: Vec<Address>,
    pub group2: Vec<Address>,
    pub pairs: Vec<SpendPair>,
    pub per_node: Vec<Vec<WorkItem>>,
}

impl Workload {
    pub fn txn_count(&self) -> usize {
        self.per_node.iter().flatten().map(|w| w.txns.len()).sum()
    }
}

fn split(total: u64, parts: u64) -> Vec<u64> {
    let base = total / parts;
    let mut out = vec![base; parts as usize];
    *out.last_mut().unwrap() += total - base * parts;
    out
}

pub fn build_workload(cfg: &ExperimentConfig, nodes: usize) -> Workload {
    assert!(nodes > 0);
    let g = cfg.group_size();
    let group1: Vec<Address> = (1..=g).map(Address).collect();
    let group2: Vec<Address> = (g + 1..=2 * g).map(Address).collect();
    let k = cfg.outputs_per_account();

    let coinbase = Transaction::coinbase(GENESIS_ACCOUNT, ISSUANCE);
    let mut outputs = Vec::with_capacity((g * k) as usize + 1);
    for &a in &group1 {
        outputs.extend(split(RAMP_AMOUNT, k).into_iter().map(|amt| TxOut::new(a, amt)));
    }
    outputs.push(TxOut::new(GENESIS_ACCOUNT, ISSUANCE - g * RAMP_AMOUNT));
    let ramp_up = Transaction::new(GENESIS_ACCOUNT, vec![coinbase.output_ref(0)], outputs, 0);
    let genesis = Arc::new(BlockHeader::genesis(GENESIS_ACCOUNT, vec![coinbase, ramp_up.clone()]));

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed ^ 0x5EED_5BE1D);
    let mut pairs = Vec::new();
    let mut spends: Vec<(Transaction, Option<Transaction>)> = Vec::new();
    for i in 0..cfg.pair_count() {
        let (acct, slot) = (i % g, i / g);
        let index = (acct * k + slot) as u32;
        let input = ramp_up.output_ref(index);
        let amount = ramp_up.outputs()[index as usize].amount;
        let owner = group1[acct as usize];
        let r1 = rng.gen_range(0..g) as usize;
        let r2 = (r1 + rng.gen_range(1..g.max(2)) as usize) % g as usize;
        let spend = |to: Address, memo: u64| Transaction::new(owner, vec![input], vec![TxOut::new(to, amount)], memo);
        let a = spend(group2[r1], 2 * i);
        let b = (2 * i + 1 < cfg.txn_count).then(|| spend(group2[r2], 2 * i + 1));
        pairs.push(SpendPair {
            input,
            first: a.id(),
            second: b.as_ref().map(Transaction::id),
        });
        spends.push((a, b));
    }

    // The two halves of a pair go to neighbouring node slots.
    spends.shuffle(&mut rng);
    let mut queues: Vec<Vec<Transaction>> = vec![vec![]; nodes];
    for (j, (a, b)) in spends.into_iter().enumerate() {
        queues[j % nodes].push(a);
        if let Some(b) = b {
            queues[(j + 1) % nodes].push(b);
        }
    }
    let per_node = queues
        .into_iter()
        .map(|q| {
            q.chunks(cfg.bundle_size)
                .map(|c| WorkItem {
                    txns: c.to_vec(),
                    bundle: cfg.bundle_size > 1,
                    merge: false,
                })
                .collect()
        })
        .collect();
    Workload {
        genesis,
        ramp_up,
        group1,
        group2,
        pairs,
        per_node,
    }
}
