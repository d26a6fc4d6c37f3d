//! Local DAG state: blocks, parent and reference edges, tips.
//!
//! Blocks are stored densely in insertion order. Every edge points to an
//! earlier block, so insertion order is itself a topological order and the
//! graph can never contain a cycle.

mod dump;
pub mod oracle;
mod orphan;
#[cfg(test)]
mod props;

use std::collections::BTreeSet;
use std::sync::Arc;

use crate::block::{hash_block, pow_valid, BlockHeader, BlockId, DigestMap};
use crate::error::{DagError, Result};
use crate::ledger::PayloadSource;

pub use dump::{dump, load, DumpError};
pub use orphan::OrphanPool;

#[derive(Clone, Debug)]
pub(crate) struct Node {
    pub id: BlockId,
    pub header: Arc<BlockHeader>,
    /// `None` for the genesis and for blocks whose parent was retired.
    pub parent: Option<usize>,
    /// Distinct edge targets, trunk first.
    pub before: Vec<usize>,
    pub after: Vec<usize>,
    /// Parental children.
    pub children: Vec<usize>,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum InsertOutcome {
    Inserted(BlockId),
    Duplicate(BlockId),
}

impl InsertOutcome {
    pub fn id(&self) -> BlockId {
        match self {
            InsertOutcome::Inserted(id) | InsertOutcome::Duplicate(id) => *id,
        }
    }
}

#[derive(Clone, Debug)]
pub struct DagState {
    index: DigestMap<BlockId, usize>,
    nodes: Vec<Node>,
    tips: BTreeSet<BlockId>,
    difficulty: u32,
}

impl DagState {
    /// Creates a DAG holding only `genesis`. The genesis is exempt from the
    /// proof-of-work check.
    pub fn new(genesis: BlockHeader, difficulty: u32) -> Self {
        Self::with_genesis(Arc::new(genesis), difficulty)
    }

    pub fn with_genesis(genesis: Arc<BlockHeader>, difficulty: u32) -> Self {
        let id = hash_block(&genesis);
        let mut index = DigestMap::default();
        index.insert(id, 0);
        DagState {
            index,
            nodes: vec![Node {
                id,
                header: genesis,
                parent: None,
                before: vec![],
                after: vec![],
                children: vec![],
            }],
            tips: BTreeSet::from([id]),
            difficulty,
        }
    }

    pub fn genesis(&self) -> BlockId {
        self.nodes[0].id
    }

    pub fn difficulty(&self) -> u32 {
        self.difficulty
    }

    pub fn len(&self) -> usize {
        self.nodes.len()
    }

    pub fn is_empty(&self) -> bool {
        false
    }

    pub fn contains(&self, id: &BlockId) -> bool {
        self.index.contains_key(id)
    }

    pub fn header(&self, id: &BlockId) -> Option<&Arc<BlockHeader>> {
        self.ix(id).map(|i| &self.nodes[i].header)
    }

    /// Parent block, `None` for the genesis (or an anchored block of an
    /// induced graph).
    pub fn parent(&self, id: &BlockId) -> Result<Option<BlockId>> {
        let i = self.require(id)?;
        Ok(self.nodes[i].parent.map(|p| self.nodes[p].id))
    }

    pub fn children(&self, id: &BlockId) -> Result<Vec<BlockId>> {
        let i = self.require(id)?;
        Ok(self.ids_of(&self.nodes[i].children))
    }

    pub fn before(&self, id: &BlockId) -> Result<Vec<BlockId>> {
        let i = self.require(id)?;
        Ok(self.ids_of(&self.nodes[i].before))
    }

    pub fn after(&self, id: &BlockId) -> Result<Vec<BlockId>> {
        let i = self.require(id)?;
        Ok(self.ids_of(&self.nodes[i].after))
    }

    pub fn tips(&self) -> &BTreeSet<BlockId> {
        &self.tips
    }

    /// Block ids in insertion order (a topological order).
    pub fn ids(&self) -> impl Iterator<Item = BlockId> + '_ {
        self.nodes.iter().map(|n| n.id)
    }

    /// Inserts a block whose trunk and branch are already present.
    pub fn insert(&mut self, header: Arc<BlockHeader>) -> Result<InsertOutcome> {
        let id = hash_block(&header);
        if let Some(&i) = self.index.get(&id) {
            return if *self.nodes[i].header == *header {
                Ok(InsertOutcome::Duplicate(id))
            } else {
                Err(DagError::HashCollision(id))
            };
        }
        let (Some(trunk), Some(branch)) = (header.trunk, header.branch) else {
            return Err(DagError::MissingEdges(id));
        };
        let parent = self.ix(&trunk).ok_or(DagError::UnknownParent(trunk))?;
        let reference = self.ix(&branch).ok_or(DagError::UnknownReference(branch))?;
        if !pow_valid(&id, self.difficulty) {
            return Err(DagError::InvalidPow {
                id,
                difficulty: self.difficulty,
            });
        }
        self.push_node(id, header, Some(parent), Some(reference));
        Ok(InsertOutcome::Inserted(id))
    }

    pub fn insert_block(&mut self, header: BlockHeader) -> Result<InsertOutcome> {
        self.insert(Arc::new(header))
    }

    /// Insert used when rebuilding an induced graph: references to blocks
    /// outside the graph are dropped instead of rejected.
    pub(crate) fn insert_lenient(&mut self, header: Arc<BlockHeader>) -> Result<InsertOutcome> {
        let id = hash_block(&header);
        if self.index.contains_key(&id) {
            return Ok(InsertOutcome::Duplicate(id));
        }
        if !pow_valid(&id, self.difficulty) {
            return Err(DagError::InvalidPow {
                id,
                difficulty: self.difficulty,
            });
        }
        let parent = header.trunk.and_then(|t| self.ix(&t));
        let reference = header.branch.and_then(|b| self.ix(&b));
        self.push_node(id, header, parent, reference);
        Ok(InsertOutcome::Inserted(id))
    }

    fn push_node(
        &mut self,
        id: BlockId,
        header: Arc<BlockHeader>,
        parent: Option<usize>,
        reference: Option<usize>,
    ) {
        let ix = self.nodes.len();
        let mut before = Vec::with_capacity(2);
        before.extend(parent);
        if let Some(r) = reference {
            if Some(r) != parent {
                before.push(r);
            }
        }
        for &b in &before {
            self.nodes[b].after.push(ix);
            self.tips.remove(&self.nodes[b].id);
        }
        if let Some(p) = parent {
            self.nodes[p].children.push(ix);
        }
        self.nodes.push(Node {
            id,
            header,
            parent,
            before,
            after: vec![],
            children: vec![],
        });
        self.index.insert(id, ix);
        self.tips.insert(id);
    }

    /// Builds the graph induced by `keep` (indices into this graph, in
    /// insertion order) with `keep[0]` as genesis.
    pub(crate) fn induced(&self, keep: &[usize]) -> DagState {
        let mut out = DagState::with_genesis(self.nodes[keep[0]].header.clone(), self.difficulty);
        for &i in &keep[1..] {
            let node = &self.nodes[i];
            let parent = node.parent.and_then(|p| out.ix(&self.nodes[p].id));
            let reference = node
                .before
                .iter()
                .filter(|&&b| Some(b) != node.parent)
                .find_map(|&b| out.ix(&self.nodes[b].id));
            out.push_node(node.id, node.header.clone(), parent, reference);
        }
        out
    }

    /// Checks the structural invariants; used by tests and the verify suite.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        for (i, n) in self.nodes.iter().enumerate() {
            if self.index.get(&n.id) != Some(&i) {
                return Err(format!("index mismatch at {}", n.id));
            }
            for &b in &n.before {
                if b >= i {
                    return Err(format!("edge from {} points forward", n.id));
                }
                if !self.nodes[b].after.contains(&i) {
                    return Err(format!("after_edges of {} missing {}", self.nodes[b].id, n.id));
                }
            }
            for &a in &n.after {
                if !self.nodes[a].before.contains(&i) {
                    return Err(format!("before_edges of {} missing {}", self.nodes[a].id, n.id));
                }
            }
            if let Some(p) = n.parent {
                if n.before.first() != Some(&p) {
                    return Err(format!("parent edge of {} not in E", n.id));
                }
                if !self.nodes[p].children.contains(&i) {
                    return Err(format!("children of {} missing {}", self.nodes[p].id, n.id));
                }
            }
            for &c in &n.children {
                if self.nodes[c].parent != Some(i) {
                    return Err(format!("child {} of {} has another parent", self.nodes[c].id, n.id));
                }
            }
            if n.after.is_empty() != self.tips.contains(&n.id) {
                return Err(format!("tip set disagrees at {}", n.id));
            }
        }
        if self.tips.len() != self.nodes.iter().filter(|n| n.after.is_empty()).count() {
            return Err("tip set has extra members".into());
        }
        Ok(())
    }

    pub(crate) fn ix(&self, id: &BlockId) -> Option<usize> {
        self.index.get(id).copied()
    }

    pub(crate) fn require(&self, id: &BlockId) -> Result<usize> {
        self.ix(id).ok_or(DagError::UnknownBlock(*id))
    }

    pub(crate) fn node(&self, ix: usize) -> &Node {
        &self.nodes[ix]
    }

    pub(crate) fn id_at(&self, ix: usize) -> BlockId {
        self.nodes[ix].id
    }

    pub(crate) fn ids_of(&self, ixs: &[usize]) -> Vec<BlockId> {
        ixs.iter().map(|&i| self.nodes[i].id).collect()
    }
}

impl PayloadSource for DagState {
    fn header(&self, id: &BlockId) -> Option<&BlockHeader> {
        DagState::header(self, id).map(|h| h.as_ref())
    }
}
