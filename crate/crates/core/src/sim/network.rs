use std::cmp::Ordering;
use std::collections::{BinaryHeap, HashSet};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::node::{Effects, NodePeer};
use super::{GenerationPolicy, Message, Metrics, MsgKind, SimConfig, Topology, NS_PER_MS};
use crate::block::{hash_block, pow_solve, Address, BlockHeader, BlockId};
use crate::consensus::McmcParams;
use crate::dag::dump;
use crate::ledger::{Bundle, Transaction};

/// One block's worth of transactions queued at a node.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct WorkItem {
    pub txns: Vec<Transaction>,
    /// Carry the transactions as one atomic bundle.
    pub bundle: bool,
    /// Reference the smallest tip other than the pivot tip instead of
    /// walking, so every such block reduces the tip count.
    pub merge: bool,
}

impl WorkItem {
    pub fn empty() -> Self {
        WorkItem {
            txns: vec![],
            bundle: false,
            merge: false,
        }
    }

    pub fn merge() -> Self {
        WorkItem {
            merge: true,
            ..Self::empty()
        }
    }
}

#[derive(Debug)]
enum Event {
    Deliver(Message),
    Timeout { node: usize, id: BlockId, attempt: u32 },
    Process { node: usize, header: Arc<BlockHeader> },
    Publish { node: usize, header: Arc<BlockHeader> },
    Generate { node: usize },
}

impl Event {
    fn priority(&self) -> u8 {
        match self {
            Event::Deliver(_) => 0,
            Event::Timeout { .. } => 1,
            Event::Process { .. } | Event::Publish { .. } => 2,
            Event::Generate { .. } => 3,
        }
    }
}

#[derive(Debug)]
struct Entry {
    key: (u64, u8, u64),
    event: Event,
}

impl PartialEq for Entry {
    fn eq(&self, other: &Self) -> bool {
        self.key == other.key
    }
}

impl Eq for Entry {}

impl PartialOrd for Entry {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Entry {
    // Reversed so the max-heap pops the smallest key.
    fn cmp(&self, other: &Self) -> Ordering {
        other.key.cmp(&self.key)
    }
}

pub struct Network {
    cfg: SimConfig,
    topo: Topology,
    nodes: Vec<NodePeer>,
    queue: BinaryHeap<Entry>,
    now: u64,
    seq: u64,
    metrics: Metrics,
    rng: ChaCha8Rng,
    block_sends: HashSet<(usize, BlockId)>,
    repeated_block_sends: u64,
    trace: Vec<String>,
}

impl Network {
    pub fn new(topo: Topology, cfg: SimConfig, genesis: Arc<BlockHeader>) -> Self {
        let nodes = (0..topo.n)
            .map(|i| NodePeer::new(i, topo.neighbors(i), genesis.clone(), cfg.difficulty, cfg.combiner, cfg.seed))
            .collect();
        Network {
            rng: ChaCha8Rng::seed_from_u64(cfg.seed.wrapping_add(0xD1CE)),
            cfg,
            topo,
            nodes,
            queue: BinaryHeap::new(),
            now: 0,
            seq: 0,
            metrics: Metrics::default(),
            block_sends: HashSet::new(),
            repeated_block_sends: 0,
            trace: vec![],
        }
    }

    pub fn now(&self) -> u64 {
        self.now
    }

    pub fn config(&self) -> &SimConfig {
        &self.cfg
    }

    pub fn topology(&self) -> &Topology {
        &self.topo
    }

    pub fn nodes(&self) -> &[NodePeer] {
        &self.nodes
    }

    pub fn node(&self, i: usize) -> &NodePeer {
        &self.nodes[i]
    }

    pub fn metrics(&self) -> &Metrics {
        &self.metrics
    }

    /// Block contents sent twice to the same node.
    pub fn repeated_block_sends(&self) -> u64 {
        self.repeated_block_sends
    }

    /// `time<TAB>event<TAB>kind<TAB>src<TAB>dst<TAB>block<TAB>bytes` lines,
    /// recorded only when tracing is enabled.
    pub fn trace(&self) -> &[String] {
        &self.trace
    }

    pub fn is_quiescent(&self) -> bool {
        self.queue.is_empty()
    }

    fn schedule(&mut self, time: u64, event: Event) {
        self.seq += 1;
        self.queue.push(Entry {
            key: (time, event.priority(), self.seq),
            event,
        });
    }

    /// Queues work at `node` and starts generating if it was idle.
    pub fn assign(&mut self, node: usize, items: impl IntoIterator<Item = WorkItem>) {
        let was_idle = self.nodes[node].work.is_empty();
        self.nodes[node].work.extend(items);
        if was_idle && !self.nodes[node].work.is_empty() {
            self.schedule(self.now, Event::Generate { node });
        }
    }

    /// Delivers `msg` at `at` without charging it to the metrics.
    pub fn inject(&mut self, msg: Message, at: u64) {
        self.schedule(at.max(self.now), Event::Deliver(msg));
    }

    pub fn run(&mut self) {
        while let Some(e) = self.queue.pop() {
            self.now = e.key.0;
            self.dispatch(e.event);
        }
    }

    fn send(&mut self, m: Message) {
        self.metrics.record_send(&m);
        if m.kind == MsgKind::Block && !self.block_sends.insert((m.dst, m.id)) {
            self.repeated_block_sends += 1;
        }
        let dropped = self.cfg.drop_rate > 0.0 && self.rng.gen::<f64>() < self.cfg.drop_rate;
        if self.cfg.trace {
            self.trace.push(format!(
                "{}\t{}\t{}\t{}\t{}\t{}\t{}",
                self.now,
                if dropped { "drop" } else { "send" },
                m.kind.name(),
                m.src,
                m.dst,
                m.id,
                m.bytes()
            ));
        }
        if dropped {
            self.metrics.dropped += 1;
            return;
        }
        let jitter = if self.cfg.jitter_ns > 0 {
            self.rng.gen_range(0..=self.cfg.jitter_ns)
        } else {
            0
        };
        self.schedule(self.now + self.cfg.latency_ns + jitter, Event::Deliver(m));
    }

    fn apply(&mut self, node: usize, fx: Effects) {
        for m in fx.send {
            self.send(m);
        }
        if let Some(header) = fx.process {
            self.schedule(self.now, Event::Process { node, header });
        }
        for (id, attempt) in fx.timeouts {
            let at = self.now + self.cfg.timeout_hops * self.cfg.latency_ns;
            self.schedule(at, Event::Timeout { node, id, attempt });
        }
        if fx.duplicate {
            self.metrics.duplicate_blocks += 1;
        }
    }

    /// Inserts into the node's graph and occupies its compute resource for
    /// the simulated cost of the insertion.
    fn insert(&mut self, node: usize, header: Arc<BlockHeader>) {
        let costs = self.cfg.costs;
        let n = &mut self.nodes[node];
        let touched_before = n.streaming().maps().touched();
        let inserted = n.streaming_mut().insert(header).map_or(0, |v| v.len());
        let touched = n.streaming().maps().touched() - touched_before;
        let cost = costs.insert_ns * inserted as u64 + costs.touch_ns * touched;
        n.busy_until = self.now + cost;
        n.insertions += inserted as u64;
        if inserted > 0 {
            self.metrics.last_insert_ns = self.metrics.last_insert_ns.max(self.now + cost);
        }
        if self.cfg.forward_every > 0 && inserted > 0 && n.insertions % self.cfg.forward_every < inserted as u64 {
            if let Ok(Some(_)) = n.streaming_mut().forward_if_due(self.cfg.forward_h) {
                self.metrics.forwards += 1;
            }
        }
    }

    fn dispatch(&mut self, event: Event) {
        match event {
            Event::Deliver(m) => {
                let dst = m.dst;
                let fx = self.nodes[dst].handle(m, self.cfg.protocol);
                self.apply(dst, fx);
            }
            Event::Timeout { node, id, attempt } => {
                if let Some(fx) = self.nodes[node].on_timeout(id, attempt) {
                    self.metrics.timeouts += 1;
                    self.apply(node, fx);
                }
            }
            Event::Process { node, header } => {
                if self.nodes[node].busy_until > self.now {
                    let at = self.nodes[node].busy_until;
                    self.schedule(at, Event::Process { node, header });
                    return;
                }
                self.insert(node, header);
            }
            Event::Publish { node, header } => {
                self.insert(node, header.clone());
                self.metrics.last_publish_ns = self.now;
                let fx = self.nodes[node].publish(header);
                self.apply(node, fx);
                if !self.nodes[node].work.is_empty() {
                    let at = match self.cfg.generation {
                        GenerationPolicy::Saturated => self.nodes[node].busy_until,
                        GenerationPolicy::Poisson { mean_gap_ns } => {
                            let u: f64 = self.nodes[node].rng.gen();
                            self.now + (-(1.0 - u).ln() * mean_gap_ns as f64) as u64
                        }
                    };
                    self.schedule(at, Event::Generate { node });
                }
            }
            Event::Generate { node } => {
                if self.nodes[node].busy_until > self.now {
                    let at = self.nodes[node].busy_until;
                    self.schedule(at, Event::Generate { node });
                    return;
                }
                self.generate(node);
            }
        }
    }

    fn generate(&mut self, node: usize) {
        let Some(item) = self.nodes[node].work.pop_front() else {
            return;
        };
        let now = self.now;
        self.metrics.first_generate_ns.get_or_insert(now);
        let params = McmcParams {
            alpha: self.cfg.alpha,
            seed: self.nodes[node].next_seed(),
            walk: self.cfg.walk,
        };
        let n = &mut self.nodes[node];
        let trunk = n.streaming().pivot().tip;
        let other_tip = n.streaming().dag().tips().iter().find(|t| **t != trunk).copied();
        let branch = match other_tip {
            Some(t) if item.merge => t,
            _ => n.streaming().mcmc_tip(&params),
        };
        let mut tag = (node as u64).to_be_bytes().to_vec();
        tag.extend(n.generated.to_be_bytes());
        n.generated += 1;
        let txn_count = item.txns.len() as u64;
        let mut header = BlockHeader {
            sender: Address(node as u64),
            timestamp: now / NS_PER_MS,
            bundle_id: if item.bundle { Bundle::id_for(&item.txns).into() } else { None },
            trunk: Some(trunk),
            branch: Some(branch),
            tag,
            attach_ts: now / NS_PER_MS,
            nonce: 0,
            payload: item.txns,
        };
        let sol = pow_solve(&header, self.cfg.difficulty);
        header.nonce = sol.nonce;
        debug_assert_eq!(hash_block(&header), sol.id);
        let c = self.cfg.costs;
        let cost = sol.attempts * c.hash_ns + c.block_ns + txn_count * c.txn_ns;
        n.busy_until = now + cost;
        self.metrics.pow_attempts += sol.attempts;
        self.metrics.blocks_generated += 1;
        self.metrics.txns_generated += txn_count;
        self.schedule(now + cost, Event::Publish {
            node,
            header: Arc::new(header),
        });
    }

    /// Recovery after message loss: while the nodes disagree, every node
    /// announces its tips to every neighbour and re-pulls the parents its
    /// orphans wait for, and the network runs to quiescence. Returns the rounds used.
    pub fn sync(&mut self, max_rounds: u64) -> u64 {
        self.run();
        let mut rounds = 0;
        while rounds < max_rounds && !self.converged() {
            for node in 0..self.nodes.len() {
                for m in self.nodes[node].announce_tips() {
                    self.send(m);
                }
                let fx = self.nodes[node].pull_all_missing();
                self.apply(node, fx);
            }
            self.run();
            rounds += 1;
        }
        rounds
    }

    /// Has `node` add merge blocks until its graph has a single tip, running
    /// the network to quiescence after each one. Returns the blocks added.
    pub fn seal(&mut self, node: usize, max_blocks: u64) -> u64 {
        self.run();
        let mut added = 0;
        while self.nodes[node].streaming().dag().tips().len() > 1 && added < max_blocks {
            self.assign(node, [WorkItem::merge()]);
            self.run();
            added += 1;
        }
        added
    }

    /// Canonical dump of every node's graph.
    pub fn dumps(&self) -> Vec<String> {
        self.nodes.iter().map(|n| dump(n.streaming().dag())).collect()
    }

    /// All nodes hold byte-identical graphs.
    pub fn converged(&self) -> bool {
        let d = self.dumps();
        d.windows(2).all(|w| w[0] == w[1])
    }
}
