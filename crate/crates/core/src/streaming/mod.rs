//! Incremental maintenance of the graph quantities consensus needs, and
//! genesis forwarding.

mod diff;
mod forward;
mod scores;
mod topscore;
#[cfg(test)]
mod props;

use std::sync::Arc;

pub use diff::{get_diff_set, is_covered, CoveredSet};
pub(crate) use diff::diff_set_ix;
pub use forward::{forward_genesis, should_forward, Forwarded, Segment, SnapshotStore};
pub use scores::{update_score, ScoreMaps};
pub use topscore::{update_top_score, Combiner, TopScoreMap};

use crate::block::{BlockHeader, BlockId};
use crate::consensus::{
    mcmc_tip, pivot, total_order_with, DiffSetMode, EpochOrder, McmcParams, PivotResult, Scores,
    TieBreak,
};
use crate::dag::{DagState, InsertOutcome, OrphanPool};
use crate::error::{DagError, Result};
use crate::ledger::{apply_order, UtxoState};

/// A DAG together with its streamed score maps, orphan pool and snapshot
/// store. Every accepted block updates the maps before the next query.
#[derive(Debug)]
pub struct StreamingDag {
    dag: DagState,
    maps: ScoreMaps,
    top: TopScoreMap,
    orphans: OrphanPool,
    store: SnapshotStore,
    stale: u64,
}

impl StreamingDag {
    pub fn new(genesis: Arc<BlockHeader>, difficulty: u32, combiner: Combiner) -> Self {
        let dag = DagState::with_genesis(genesis, difficulty);
        let store = SnapshotStore::new(dag.genesis());
        StreamingDag {
            maps: ScoreMaps::build(&dag),
            top: TopScoreMap::build(&dag, combiner),
            orphans: OrphanPool::new(OrphanPool::DEFAULT_CAPACITY),
            store,
            stale: 0,
            dag,
        }
    }

    pub fn dag(&self) -> &DagState {
        &self.dag
    }

    pub fn maps(&self) -> &ScoreMaps {
        &self.maps
    }

    pub fn top_scores(&self) -> &TopScoreMap {
        &self.top
    }

    pub fn store(&self) -> &SnapshotStore {
        &self.store
    }

    pub fn orphans(&self) -> &OrphanPool {
        &self.orphans
    }

    /// Blocks rejected because they reference retired history.
    pub fn stale_blocks(&self) -> u64 {
        self.stale
    }

    /// Inserts `header`, buffering it if a dependency is missing. Returns
    /// every block that entered the graph as a result, in order.
    pub fn insert(&mut self, header: Arc<BlockHeader>) -> Result<Vec<BlockId>> {
        let refs = [header.trunk, header.branch];
        if refs.iter().flatten().any(|r| self.store.is_retired(r)) {
            self.stale += 1;
            return Err(DagError::StaleBlock(crate::block::hash_block(&header)));
        }
        let StreamingDag {
            dag,
            maps,
            top,
            orphans,
            ..
        } = self;
        orphans.offer(header, |h| {
            let out = dag.insert(h)?;
            if let InsertOutcome::Inserted(id) = out {
                update_score(dag, &id, maps)?;
                update_top_score(dag, &id, top)?;
            }
            Ok(out)
        })
    }

    pub fn pivot(&self) -> PivotResult {
        pivot(&self.dag, &self.dag.genesis(), Scores::Streamed(&self.maps), TieBreak::default())
            .expect("genesis present")
    }

    pub fn mcmc_tip(&self, params: &McmcParams) -> BlockId {
        mcmc_tip(&self.dag, &self.dag.genesis(), params, Scores::Streamed(&self.maps))
            .expect("genesis present")
    }

    /// Total order of the live graph.
    pub fn total_order(&self) -> EpochOrder {
        total_order_with(
            &self.dag,
            Scores::Streamed(&self.maps),
            DiffSetMode::Streaming,
            TieBreak::default(),
        )
    }

    /// Persisted history followed by the live order.
    pub fn full_order(&self) -> Vec<BlockId> {
        let mut out = self.store.persisted_order().to_vec();
        out.extend(self.total_order().order);
        out
    }

    /// UTXO state after the persisted snapshot plus the live order.
    pub fn utxo(&self) -> UtxoState {
        apply_order(&self.total_order().order, &self.dag, self.store.utxo().clone())
    }

    pub fn should_forward(&self, h: u64) -> Option<BlockId> {
        should_forward(&self.dag, &self.maps, h)
    }

    /// Moves the genesis to `new_g` and rebuilds the maps on the induced graph.
    pub fn forward(&mut self, new_g: &BlockId) -> Result<Forwarded> {
        let out = forward_genesis(&self.dag, new_g, &mut self.store, Scores::Streamed(&self.maps))?;
        self.dag = out.dag.clone();
        self.maps = ScoreMaps::build(&self.dag);
        self.top = TopScoreMap::build(&self.dag, self.top.combiner());
        Ok(out)
    }

    /// Forwards when the threshold is met; returns the new genesis.
    pub fn forward_if_due(&mut self, h: u64) -> Result<Option<BlockId>> {
        match self.should_forward(h) {
            Some(g) => {
                self.forward(&g)?;
                Ok(Some(g))
            }
            None => Ok(None),
        }
    }
}
