use std::collections::{BTreeMap, BTreeSet, HashMap};

use super::{pivot_ix, Scores, TieBreak};
use crate::block::BlockId;
use crate::dag::oracle::past_ix;
use crate::dag::DagState;
use crate::error::{DagError, Result};
use crate::streaming::{diff_set_ix, CoveredSet};

/// How each epoch's block set is obtained.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum DiffSetMode {
    /// `Past(b) - Past(P(b))` by two full traversals.
    Oracle,
    /// Dual-direction search pruned by the covered set.
    #[default]
    Streaming,
}

/// The flattened total order with its epoch structure.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct EpochOrder {
    pub order: Vec<BlockId>,
    pub epoch_of: BTreeMap<BlockId, BlockId>,
    /// Pivot blocks, genesis first; epoch `i` starts at `epoch_starts[i]`.
    pub pivots: Vec<BlockId>,
    pub epoch_starts: Vec<usize>,
}

impl EpochOrder {
    pub fn len(&self) -> usize {
        self.order.len()
    }

    pub fn is_empty(&self) -> bool {
        self.order.is_empty()
    }

    pub fn epoch(&self, pivot: &BlockId) -> Option<&[BlockId]> {
        let k = self.pivots.iter().position(|p| p == pivot)?;
        let end = self.epoch_starts.get(k + 1).copied().unwrap_or(self.order.len());
        Some(&self.order[self.epoch_starts[k]..end])
    }

    /// `position<TAB>block_id<TAB>epoch_pivot_id` per line.
    pub fn export(&self) -> String {
        let mut out = String::new();
        for (pos, id) in self.order.iter().enumerate() {
            out.push_str(&format!("{pos}\t{id}\t{}\n", self.epoch_of[id]));
        }
        out
    }
}

pub(crate) fn oracle_diff_ix(dag: &DagState, b: usize) -> Vec<usize> {
    let past = past_ix(dag, b);
    match dag.node(b).parent {
        None => past,
        Some(p) => {
            let mut mark = vec![false; dag.len()];
            for i in past_ix(dag, p) {
                mark[i] = true;
            }
            past.into_iter().filter(|&i| !mark[i]).collect()
        }
    }
}

/// Kahn layers over the edges inside `members`, each layer sorted by `tie`.
fn layer_sort(dag: &DagState, members: &[usize], tie: TieBreak) -> Vec<usize> {
    let mut indeg: HashMap<usize, usize> = members.iter().map(|&m| (m, 0)).collect();
    for &m in members {
        let inside = dag.node(m).before.iter().filter(|b| indeg.contains_key(b)).count();
        indeg.insert(m, inside);
    }
    let mut layer: Vec<usize> = members.iter().copied().filter(|m| indeg[m] == 0).collect();
    let mut out = Vec::with_capacity(members.len());
    while !layer.is_empty() {
        layer.sort_by(|a, b| tie.cmp(&dag.id_at(*a), &dag.id_at(*b)));
        let mut next = Vec::new();
        for &x in &layer {
            out.push(x);
            for a in &dag.node(x).after {
                if let Some(d) = indeg.get_mut(a) {
                    *d -= 1;
                    if *d == 0 {
                        next.push(*a);
                    }
                }
            }
        }
        layer = next;
    }
    assert_eq!(out.len(), members.len(), "epoch is not acyclic");
    out
}

pub(crate) fn stream_net_order_ix(dag: &DagState, tip: usize, mode: DiffSetMode, tie: TieBreak) -> EpochOrder {
    let mut pivots = vec![tip];
    while let Some(p) = dag.node(*pivots.last().unwrap()).parent {
        pivots.push(p);
    }
    let mut covered = CoveredSet::new(dag);
    let mut epochs = Vec::with_capacity(pivots.len());
    for &b in &pivots {
        let diff = match mode {
            DiffSetMode::Oracle => {
                let d = oracle_diff_ix(dag, b);
                covered.extend_ix(&d);
                d
            }
            DiffSetMode::Streaming => diff_set_ix(dag, b, &mut covered),
        };
        assert!(diff.contains(&b), "pivot block missing from its own epoch");
        epochs.push(diff);
    }
    pivots.reverse();
    epochs.reverse();
    let mut out = EpochOrder::default();
    for (&p, members) in pivots.iter().zip(&epochs) {
        let pid = dag.id_at(p);
        out.pivots.push(pid);
        out.epoch_starts.push(out.order.len());
        for x in layer_sort(dag, members, tie) {
            let id = dag.id_at(x);
            out.order.push(id);
            out.epoch_of.insert(id, pid);
        }
    }
    out
}

/// Orders `Past(tip)` epoch by epoch along the parental chain of `tip`.
pub fn stream_net_order(dag: &DagState, tip: &BlockId, mode: DiffSetMode, tie: TieBreak) -> Result<EpochOrder> {
    let t = dag.require(tip)?;
    Ok(stream_net_order_ix(dag, t, mode, tie))
}

pub fn total_order_with(dag: &DagState, scores: Scores, mode: DiffSetMode, tie: TieBreak) -> EpochOrder {
    let chain = pivot_ix(dag, 0, scores, tie);
    stream_net_order_ix(dag, *chain.last().unwrap(), mode, tie)
}

/// Pivot from the genesis followed by the epoch order, all from oracles.
pub fn total_order(dag: &DagState) -> EpochOrder {
    total_order_with(dag, Scores::Oracle, DiffSetMode::Oracle, TieBreak::default())
}

/// `Past(b) - Past(P(b))` for a block on the pivot chain; `{g}` for the genesis.
pub fn epoch_members(dag: &DagState, b: &BlockId) -> Result<BTreeSet<BlockId>> {
    let i = dag.require(b)?;
    if !pivot_ix(dag, 0, Scores::Oracle, TieBreak::default()).contains(&i) {
        return Err(DagError::NotOnPivotChain(*b));
    }
    Ok(oracle_diff_ix(dag, i).into_iter().map(|x| dag.id_at(x)).collect())
}
