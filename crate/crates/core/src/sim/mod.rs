//! Deterministic discrete-event simulation of a small peer-to-peer network
//! of ledger nodes.
//!
//! Time is simulated in nanoseconds. Every event carries the key
//! `(time, priority, sequence)`; with the same topology, configuration and
//! seed two runs process exactly the same events in the same order.
//!
//! Each node has one compute resource (proof of work and block insertion
//! occupy it) and a network handler that answers gossip immediately.

mod network;
mod node;
#[cfg(test)]
mod props;
mod topology;

use std::sync::Arc;

pub use network::{Network, WorkItem};
pub use node::NodePeer;
pub use topology::{Topology, TopologyError, BUILTIN_NAMES};

use crate::block::{BlockHeader, BlockId};
use crate::consensus::WalkEdges;
use crate::streaming::Combiner;

pub const HASH_BYTES: u64 = 32;
pub const NS_PER_MS: u64 = 1_000_000;

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash)]
pub enum MsgKind {
    Block,
    Hash,
    Request,
    Nack,
}

impl MsgKind {
    pub const ALL: [MsgKind; 4] = [MsgKind::Block, MsgKind::Hash, MsgKind::Request, MsgKind::Nack];

    pub fn name(self) -> &'static str {
        match self {
            MsgKind::Block => "block",
            MsgKind::Hash => "hash",
            MsgKind::Request => "request",
            MsgKind::Nack => "nack",
        }
    }

    fn index(self) -> usize {
        self as usize
    }
}

#[derive(Clone, Debug)]
pub struct Message {
    pub kind: MsgKind,
    pub id: BlockId,
    /// Present only on `Block`.
    pub block: Option<Arc<BlockHeader>>,
    pub src: usize,
    pub dst: usize,
}

impl Message {
    pub fn bytes(&self) -> u64 {
        match &self.block {
            Some(b) => b.encoded_len() as u64,
            None => HASH_BYTES,
        }
    }
}

#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Protocol {
    /// Push hashes, pull content from one announcer.
    #[default]
    DirectSignal,
    /// Forward full content on every link.
    DirectMail,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub enum GenerationPolicy {
    /// Start the next block as soon as the previous one is published.
    Saturated,
    /// Exponential gaps with this mean after each publish.
    Poisson { mean_gap_ns: u64 },
}

/// Simulated compute costs. Proof of work is charged per hash attempt, so
/// runtime depends only on the seeded search, never on the host machine.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct CostModel {
    pub hash_ns: u64,
    pub block_ns: u64,
    pub txn_ns: u64,
    pub insert_ns: u64,
    /// Per score entry touched by the insertion.
    pub touch_ns: u64,
}

impl Default for CostModel {
    fn default() -> Self {
        CostModel {
            hash_ns: 2_000,
            block_ns: 200_000,
            txn_ns: 20_000,
            insert_ns: 50_000,
            touch_ns: 50,
        }
    }
}

impl CostModel {
    pub const FREE: CostModel = CostModel {
        hash_ns: 0,
        block_ns: 0,
        txn_ns: 0,
        insert_ns: 0,
        touch_ns: 0,
    };
}

#[derive(Clone, Debug, PartialEq)]
pub struct SimConfig {
    pub protocol: Protocol,
    pub latency_ns: u64,
    pub jitter_ns: u64,
    pub drop_rate: f64,
    /// Pull timeout in link latencies.
    pub timeout_hops: u64,
    pub difficulty: u32,
    pub alpha: f64,
    pub walk: WalkEdges,
    pub combiner: Combiner,
    pub seed: u64,
    pub costs: CostModel,
    pub generation: GenerationPolicy,
    /// Evaluate genesis forwarding every this many insertions; 0 disables.
    pub forward_every: u64,
    pub forward_h: u64,
    pub trace: bool,
}

impl Default for SimConfig {
    fn default() -> Self {
        SimConfig {
            protocol: Protocol::DirectSignal,
            latency_ns: 10 * NS_PER_MS,
            jitter_ns: 0,
            drop_rate: 0.0,
            timeout_hops: 5,
            difficulty: 8,
            alpha: 0.001,
            walk: WalkEdges::Approvers,
            combiner: Combiner::Max,
            seed: 0,
            costs: CostModel::default(),
            generation: GenerationPolicy::Saturated,
            forward_every: 0,
            forward_h: 5,
            trace: false,
        }
    }
}

/// Exact counters accumulated over one run.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct Metrics {
    sent: [u64; 4],
    bytes: [u64; 4],
    pub dropped: u64,
    /// Block contents delivered to a node that already had them.
    pub duplicate_blocks: u64,
    pub timeouts: u64,
    pub blocks_generated: u64,
    pub txns_generated: u64,
    pub pow_attempts: u64,
    pub first_generate_ns: Option<u64>,
    pub last_publish_ns: u64,
    pub last_insert_ns: u64,
    pub stale_blocks: u64,
    pub forwards: u64,
}

impl Metrics {
    pub fn sent(&self, kind: MsgKind) -> u64 {
        self.sent[kind.index()]
    }

    pub fn bytes(&self, kind: MsgKind) -> u64 {
        self.bytes[kind.index()]
    }

    pub fn total_bytes(&self) -> u64 {
        self.bytes.iter().sum()
    }

    pub fn total_messages(&self) -> u64 {
        self.sent.iter().sum()
    }

    /// Time from the last publish until every node had inserted everything.
    pub fn convergence_ns(&self) -> u64 {
        self.last_insert_ns.saturating_sub(self.last_publish_ns)
    }

    fn record_send(&mut self, m: &Message) {
        self.sent[m.kind.index()] += 1;
        self.bytes[m.kind.index()] += m.bytes();
    }
}
