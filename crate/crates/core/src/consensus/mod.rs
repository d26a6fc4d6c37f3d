//! Parent selection (pivot chain), reference selection (random walk) and
//! the epoch-based total order. Every routine is generic over where its
//! scores come from: brute-force oracles or incrementally maintained maps.

mod mcmc;
mod order;
#[cfg(test)]
mod props;

use std::cmp::Ordering;

pub use mcmc::{mcmc_tip, transition_probabilities, McmcParams, WalkEdges};
pub use order::{
    epoch_members, stream_net_order, total_order, total_order_with, DiffSetMode, EpochOrder,
};

use crate::block::BlockId;
use crate::dag::oracle::{later_ix, subtree_ix};
use crate::dag::DagState;
use crate::error::Result;
use crate::streaming::ScoreMaps;

/// Where Score and ParentScore values are read from.
#[derive(Clone, Copy, Debug, Default)]
pub enum Scores<'a> {
    /// Full traversal per query.
    #[default]
    Oracle,
    /// Incrementally maintained maps; must be in sync with the graph.
    Streamed(&'a ScoreMaps),
}

impl Scores<'_> {
    pub(crate) fn parent_score_ix(&self, dag: &DagState, i: usize) -> u64 {
        match self {
            Scores::Oracle => subtree_ix(dag, i).len() as u64,
            Scores::Streamed(m) => m.parent_score_ix(i),
        }
    }

    pub(crate) fn score_ix(&self, dag: &DagState, i: usize) -> u64 {
        match self {
            Scores::Oracle => later_ix(dag, i).len() as u64,
            Scores::Streamed(m) => m.score_ix(i),
        }
    }
}

/// The comparison used whenever two blocks are otherwise equal: among pivot
/// candidates with the same ParentScore and inside a topological layer.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum TieBreak {
    #[default]
    SmallerId,
    LargerId,
}

impl TieBreak {
    /// Ordering that puts the preferred block first.
    pub fn cmp(self, a: &BlockId, b: &BlockId) -> Ordering {
        match self {
            TieBreak::SmallerId => a.cmp(b),
            TieBreak::LargerId => b.cmp(a),
        }
    }

    pub fn prefers(self, a: &BlockId, b: &BlockId) -> bool {
        self.cmp(a, b) == Ordering::Less
    }
}

#[derive(Clone, Debug, PartialEq, Eq)]
pub struct PivotResult {
    /// From the start block to the tip.
    pub chain: Vec<BlockId>,
    pub tip: BlockId,
}

pub(crate) fn pivot_ix(dag: &DagState, start: usize, scores: Scores, tie: TieBreak) -> Vec<usize> {
    let mut chain = vec![start];
    let mut cur = start;
    loop {
        let mut best: Option<(u64, usize)> = None;
        for &c in &dag.node(cur).children {
            let ps = scores.parent_score_ix(dag, c);
            let better = match best {
                None => true,
                Some((bps, b)) => ps > bps || (ps == bps && tie.prefers(&dag.id_at(c), &dag.id_at(b))),
            };
            if better {
                best = Some((ps, c));
            }
        }
        match best {
            Some((_, c)) => {
                chain.push(c);
                cur = c;
            }
            None => return chain,
        }
    }
}

/// Greedy heaviest-subtree walk along parent edges starting at `start`.
pub fn pivot(dag: &DagState, start: &BlockId, scores: Scores, tie: TieBreak) -> Result<PivotResult> {
    let s = dag.require(start)?;
    let chain = dag.ids_of(&pivot_ix(dag, s, scores, tie));
    let tip = *chain.last().unwrap();
    Ok(PivotResult { chain, tip })
}
