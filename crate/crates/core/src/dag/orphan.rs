use std::collections::{BTreeMap, VecDeque};
use std::sync::Arc;

use crate::block::{hash_block, BlockHeader, BlockId};
use crate::dag::InsertOutcome;
use crate::error::{DagError, Result};

/// Bounded holding area for blocks that arrived before their trunk or branch.
#[derive(Debug, Default)]
pub struct OrphanPool {
    capacity: usize,
    /// Waiting blocks keyed by the dependency they are blocked on.
    waiting: BTreeMap<BlockId, Vec<Arc<BlockHeader>>>,
    held: usize,
    overflowed: u64,
}

impl OrphanPool {
    pub const DEFAULT_CAPACITY: usize = 10_000;

    pub fn new(capacity: usize) -> Self {
        OrphanPool {
            capacity,
            ..Default::default()
        }
    }

    pub fn len(&self) -> usize {
        self.held
    }

    pub fn is_empty(&self) -> bool {
        self.held == 0
    }

    /// Every held block.
    pub fn waiting(&self) -> impl Iterator<Item = &Arc<BlockHeader>> {
        self.waiting.values().flatten()
    }

    /// Blocks refused because the pool was full.
    pub fn overflowed(&self) -> u64 {
        self.overflowed
    }

    /// Offers a block to `insert`. On a missing dependency the block is held
    /// and retried once that dependency is inserted. Returns the ids that
    /// were newly inserted, in insertion order.
    pub fn offer<F>(&mut self, header: Arc<BlockHeader>, mut insert: F) -> Result<Vec<BlockId>>
    where
        F: FnMut(Arc<BlockHeader>) -> Result<InsertOutcome>,
    {
        let mut inserted = Vec::new();
        let mut queue = VecDeque::from([header]);
        let mut first = true;
        while let Some(h) = queue.pop_front() {
            match insert(h.clone()) {
                Ok(InsertOutcome::Inserted(id)) => {
                    inserted.push(id);
                    if let Some(ready) = self.waiting.remove(&id) {
                        self.held -= ready.len();
                        queue.extend(ready);
                    }
                }
                Ok(InsertOutcome::Duplicate(_)) => {}
                Err(DagError::UnknownParent(dep)) | Err(DagError::UnknownReference(dep)) => {
                    if self.held >= self.capacity {
                        self.overflowed += 1;
                    } else {
                        let id = hash_block(&h);
                        let list = self.waiting.entry(dep).or_default();
                        if !list.iter().any(|w| hash_block(w) == id) {
                            list.push(h);
                            self.held += 1;
                        }
                    }
                }
                Err(e) if first => return Err(e),
                // A released orphan that turns out invalid is dropped.
                Err(_) => {}
            }
            first = false;
        }
        Ok(inserted)
    }
}
