use std::collections::{BTreeSet, VecDeque};
use std::sync::Arc;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::network::WorkItem;
use super::{Message, MsgKind, Protocol};
use crate::block::{hash_block, BlockHeader, BlockId, DigestMap};
use crate::streaming::{Combiner, StreamingDag};

const MAX_PULL_ATTEMPTS: u32 = 32;

/// An outstanding pull for one hash.
#[derive(Debug, Default)]
struct Pull {
    asked: Option<usize>,
    attempt: u32,
    alternates: VecDeque<usize>,
    tried: BTreeSet<usize>,
}

/// What handling one message asks the event loop to do.
#[derive(Debug, Default)]
pub(crate) struct Effects {
    pub send: Vec<Message>,
    /// New content to insert once the compute resource is free.
    pub process: Option<Arc<BlockHeader>>,
    /// Arm a pull timeout for each `(block, attempt)`.
    pub timeouts: Vec<(BlockId, u32)>,
    pub duplicate: bool,
}

#[derive(Debug)]
pub struct NodePeer {
    pub id: usize,
    sdag: StreamingDag,
    neighbors: Vec<usize>,
    pub(crate) cache: DigestMap<BlockId, Arc<BlockHeader>>,
    /// Neighbours known to hold each block.
    known: DigestMap<BlockId, BTreeSet<usize>>,
    pending: DigestMap<BlockId, Pull>,
    pub(crate) work: VecDeque<WorkItem>,
    pub(crate) busy_until: u64,
    pub(crate) rng: ChaCha8Rng,
    pub(crate) generated: u64,
    pub(crate) insertions: u64,
}

impl NodePeer {
    pub(crate) fn new(id: usize, neighbors: Vec<usize>, genesis: Arc<BlockHeader>, difficulty: u32, combiner: Combiner, seed: u64) -> Self {
        let gid = hash_block(&genesis);
        let mut cache = DigestMap::default();
        cache.insert(gid, genesis.clone());
        NodePeer {
            id,
            sdag: StreamingDag::new(genesis, difficulty, combiner),
            neighbors,
            cache,
            known: DigestMap::default(),
            pending: DigestMap::default(),
            work: VecDeque::new(),
            busy_until: 0,
            rng: ChaCha8Rng::seed_from_u64(seed ^ (id as u64).wrapping_mul(0x9E37_79B9_7F4A_7C15)),
            generated: 0,
            insertions: 0,
        }
    }

    pub fn streaming(&self) -> &StreamingDag {
        &self.sdag
    }

    pub(crate) fn streaming_mut(&mut self) -> &mut StreamingDag {
        &mut self.sdag
    }

    pub fn has(&self, id: &BlockId) -> bool {
        self.cache.contains_key(id)
    }

    pub fn pending_work(&self) -> usize {
        self.work.len()
    }

    pub(crate) fn next_seed(&mut self) -> u64 {
        self.rng.gen()
    }

    fn msg(&self, kind: MsgKind, id: BlockId, block: Option<Arc<BlockHeader>>, dst: usize) -> Message {
        Message {
            kind,
            id,
            block,
            src: self.id,
            dst,
        }
    }

    fn mark_known(&mut self, id: BlockId, peer: usize) {
        self.known.entry(id).or_default().insert(peer);
    }

    /// A locally generated block: push its content to every neighbour.
    pub(crate) fn publish(&mut self, header: Arc<BlockHeader>) -> Effects {
        let id = hash_block(&header);
        self.cache.insert(id, header.clone());
        let mut fx = Effects::default();
        for &n in &self.neighbors.clone() {
            fx.send.push(self.msg(MsgKind::Block, id, Some(header.clone()), n));
            self.mark_known(id, n);
        }
        fx
    }

    fn announce(&mut self, id: BlockId, header: &Arc<BlockHeader>, from: usize, protocol: Protocol) -> Vec<Message> {
        let targets: Vec<usize> = match protocol {
            Protocol::DirectSignal => {
                let known = self.known.get(&id);
                self.neighbors
                    .iter()
                    .copied()
                    .filter(|n| known.is_none_or(|k| !k.contains(n)))
                    .collect()
            }
            Protocol::DirectMail => self.neighbors.iter().copied().filter(|&n| n != from).collect(),
        };
        targets
            .into_iter()
            .map(|n| {
                self.mark_known(id, n);
                match protocol {
                    Protocol::DirectSignal => self.msg(MsgKind::Hash, id, None, n),
                    Protocol::DirectMail => self.msg(MsgKind::Block, id, Some(header.clone()), n),
                }
            })
            .collect()
    }

    fn ask_next(&mut self, id: BlockId) -> Effects {
        let mut fx = Effects::default();
        let Some(pull) = self.pending.get_mut(&id) else {
            return fx;
        };
        pull.asked = None;
        while let Some(peer) = pull.alternates.pop_front() {
            if pull.tried.insert(peer) {
                pull.asked = Some(peer);
                pull.attempt += 1;
                fx.timeouts.push((id, pull.attempt));
                fx.send.push(Message {
                    kind: MsgKind::Request,
                    id,
                    block: None,
                    src: self.id,
                    dst: peer,
                });
                break;
            }
        }
        fx
    }

    /// Adds announcers for `id`. An idle pull (every source refused) starts
    /// over with the new ones.
    fn add_sources(&mut self, id: BlockId, peers: impl IntoIterator<Item = usize>) {
        let pull = self.pending.entry(id).or_default();
        if pull.asked.is_none() {
            pull.tried.clear();
        }
        for p in peers {
            if pull.asked != Some(p) && !pull.alternates.contains(&p) {
                pull.alternates.push_back(p);
            }
        }
    }

    fn ask_if_idle(&mut self, id: BlockId) -> Effects {
        match self.pending.get(&id) {
            Some(p) if p.asked.is_none() => self.ask_next(id),
            _ => Effects::default(),
        }
    }

    /// `header` is waiting for parents this node has never seen; pull them
    /// from the peers that sent or announced it, then from the others.
    fn pull_missing(&mut self, id: BlockId, header: &BlockHeader) -> Effects {
        let mut fx = Effects::default();
        let mut peers: Vec<usize> = self.known.get(&id).map(|k| k.iter().copied().collect()).unwrap_or_default();
        peers.extend(self.neighbors.iter().filter(|n| !peers.contains(n)).collect::<Vec<_>>());
        let mut parents: Vec<BlockId> = [header.trunk, header.branch].into_iter().flatten().collect();
        parents.dedup();
        for p in parents {
            if self.cache.contains_key(&p) {
                continue;
            }
            self.add_sources(p, peers.iter().copied());
            let more = self.ask_if_idle(p);
            fx.send.extend(more.send);
            fx.timeouts.extend(more.timeouts);
        }
        fx
    }

    /// Pulls for the missing parents of every held orphan.
    pub(crate) fn pull_all_missing(&mut self) -> Effects {
        let held: Vec<Arc<BlockHeader>> = self.sdag.orphans().waiting().cloned().collect();
        let mut fx = Effects::default();
        for h in held {
            let more = self.pull_missing(hash_block(&h), &h);
            fx.send.extend(more.send);
            fx.timeouts.extend(more.timeouts);
        }
        fx
    }

    /// HASH announcements of every tip to every neighbour.
    pub(crate) fn announce_tips(&mut self) -> Vec<Message> {
        let tips: Vec<BlockId> = self.sdag.dag().tips().iter().copied().collect();
        let mut out = vec![];
        for id in tips {
            for &n in &self.neighbors {
                out.push(self.msg(MsgKind::Hash, id, None, n));
            }
        }
        out
    }

    pub(crate) fn handle(&mut self, m: Message, protocol: Protocol) -> Effects {
        match m.kind {
            MsgKind::Block => {
                let header = m.block.expect("block message carries content");
                self.mark_known(m.id, m.src);
                if self.cache.contains_key(&m.id) {
                    return Effects {
                        duplicate: true,
                        ..Default::default()
                    };
                }
                self.cache.insert(m.id, header.clone());
                self.pending.remove(&m.id);
                Effects {
                    send: self.announce(m.id, &header, m.src, protocol),
                    process: Some(header),
                    ..Default::default()
                }
            }
            MsgKind::Hash => {
                self.mark_known(m.id, m.src);
                if self.cache.contains_key(&m.id) {
                    return Effects::default();
                }
                self.add_sources(m.id, [m.src]);
                self.ask_if_idle(m.id)
            }
            MsgKind::Request => {
                let reply = match self.cache.get(&m.id) {
                    Some(h) => self.msg(MsgKind::Block, m.id, Some(h.clone()), m.src),
                    None => self.msg(MsgKind::Nack, m.id, None, m.src),
                };
                if reply.kind == MsgKind::Block {
                    self.mark_known(m.id, m.src);
                }
                Effects {
                    send: vec![reply],
                    ..Default::default()
                }
            }
            MsgKind::Nack => match self.pending.get(&m.id) {
                Some(p) if p.asked == Some(m.src) => self.ask_next(m.id),
                _ => Effects::default(),
            },
        }
    }

    /// A pull timer fired; retry elsewhere if it is still the live attempt.
    /// Once every announcer has been tried they are all tried again, since
    /// a timeout (unlike a NACK) may just mean a lost message.
    pub(crate) fn on_timeout(&mut self, id: BlockId, attempt: u32) -> Option<Effects> {
        let pull = self.pending.get_mut(&id)?;
        if pull.attempt != attempt || pull.asked.is_none() {
            return None;
        }
        if attempt >= MAX_PULL_ATTEMPTS {
            // Give up until someone announces the block again.
            self.pending.remove(&id);
            return None;
        }
        if pull.alternates.is_empty() {
            pull.alternates.extend(std::mem::take(&mut pull.tried));
        }
        Some(self.ask_next(id))
    }
}
