//! Brute-force graph utilities with exact set semantics. Every query is a
//! full traversal; these are the reference results the streaming routines
//! are checked against.

use std::collections::{BTreeSet, VecDeque};

use crate::block::BlockId;
use crate::dag::DagState;
use crate::error::Result;

/// Blocks reachable from `start` by repeatedly following `next`, including
/// `start` itself. Returned in BFS order.
pub(crate) fn reach<'a>(
    dag: &'a DagState,
    start: usize,
    next: impl Fn(usize) -> &'a [usize],
) -> Vec<usize> {
    let mut seen = vec![false; dag.len()];
    let mut out = vec![start];
    let mut queue = VecDeque::from([start]);
    seen[start] = true;
    while let Some(b) = queue.pop_front() {
        for &n in next(b) {
            if !seen[n] {
                seen[n] = true;
                out.push(n);
                queue.push_back(n);
            }
        }
    }
    out
}

pub(crate) fn past_ix(dag: &DagState, b: usize) -> Vec<usize> {
    reach(dag, b, |i| &dag.node(i).before)
}

pub(crate) fn later_ix(dag: &DagState, b: usize) -> Vec<usize> {
    reach(dag, b, |i| &dag.node(i).after)
}

pub(crate) fn subtree_ix(dag: &DagState, b: usize) -> Vec<usize> {
    reach(dag, b, |i| &dag.node(i).children)
}

fn to_set(dag: &DagState, ixs: impl IntoIterator<Item = usize>) -> BTreeSet<BlockId> {
    ixs.into_iter().map(|i| dag.id_at(i)).collect()
}

/// Parental path from the genesis (or the root of `b`'s parental tree) to `b`.
pub fn chain(dag: &DagState, b: &BlockId) -> Result<Vec<BlockId>> {
    let mut i = dag.require(b)?;
    let mut out = vec![dag.id_at(i)];
    while let Some(p) = dag.node(i).parent {
        out.push(dag.id_at(p));
        i = p;
    }
    out.reverse();
    Ok(out)
}

/// Every block not on `chain(b)`.
pub fn chain_complement(dag: &DagState, b: &BlockId) -> Result<BTreeSet<BlockId>> {
    let on_chain: BTreeSet<_> = chain(dag, b)?.into_iter().collect();
    Ok(dag.ids().filter(|id| !on_chain.contains(id)).collect())
}

pub fn child(dag: &DagState, b: &BlockId) -> Result<BTreeSet<BlockId>> {
    Ok(dag.children(b)?.into_iter().collect())
}

/// Parental children of `b`'s parent, `b` included. A block without a
/// parent is its own only sibling.
pub fn sibling(dag: &DagState, b: &BlockId) -> Result<BTreeSet<BlockId>> {
    match dag.parent(b)? {
        Some(p) => child(dag, &p),
        None => Ok(BTreeSet::from([*b])),
    }
}

pub fn subtree(dag: &DagState, b: &BlockId) -> Result<BTreeSet<BlockId>> {
    let i = dag.require(b)?;
    Ok(to_set(dag, subtree_ix(dag, i)))
}

pub fn before(dag: &DagState, b: &BlockId) -> Result<BTreeSet<BlockId>> {
    Ok(dag.before(b)?.into_iter().collect())
}

pub fn after(dag: &DagState, b: &BlockId) -> Result<BTreeSet<BlockId>> {
    Ok(dag.after(b)?.into_iter().collect())
}

/// Blocks generated before `b`, including `b`.
pub fn past(dag: &DagState, b: &BlockId) -> Result<BTreeSet<BlockId>> {
    let i = dag.require(b)?;
    Ok(to_set(dag, past_ix(dag, i)))
}

/// Blocks generated after `b`, including `b`.
pub fn later(dag: &DagState, b: &BlockId) -> Result<BTreeSet<BlockId>> {
    let i = dag.require(b)?;
    Ok(to_set(dag, later_ix(dag, i)))
}

/// `|SubTree(b)|`.
pub fn parent_score_oracle(dag: &DagState, b: &BlockId) -> Result<u64> {
    let i = dag.require(b)?;
    Ok(subtree_ix(dag, i).len() as u64)
}

/// `|Later(b)|`.
pub fn score_oracle(dag: &DagState, b: &BlockId) -> Result<u64> {
    let i = dag.require(b)?;
    Ok(later_ix(dag, i).len() as u64)
}

/// A vertex subset together with the edges having both endpoints in it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SubGraph {
    pub blocks: BTreeSet<BlockId>,
    /// `(from, to)`: `from` references `to`.
    pub edges: BTreeSet<(BlockId, BlockId)>,
}

impl SubGraph {
    pub fn before(&self, b: &BlockId) -> BTreeSet<BlockId> {
        self.edges
            .range((*b, BlockId([0; 32]))..=(*b, BlockId([0xff; 32])))
            .map(|(_, to)| *to)
            .collect()
    }
}

pub fn subgraph(dag: &DagState, keep: &BTreeSet<BlockId>) -> Result<SubGraph> {
    let mut edges = BTreeSet::new();
    for b in keep {
        for t in dag.before(b)? {
            if keep.contains(&t) {
                edges.insert((*b, t));
            }
        }
    }
    Ok(SubGraph {
        blocks: keep.clone(),
        edges,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::fixtures::f1;

    #[test]
    fn f1_past_later_chain() {
        let (dag, f) = f1();
        assert_eq!(past(&dag, &f.get(5)).unwrap(), f.set(&[0, 1, 3, 4, 5]));
        assert_eq!(past(&dag, &f.get(3)).unwrap(), f.set(&[0, 1, 3]));
        assert_eq!(chain(&dag, &f.get(6)).unwrap(), f.seq(&[0, 1, 3, 5, 6]));
        assert_eq!(later(&dag, &f.g).unwrap().len(), 7);
        assert_eq!(later(&dag, &f.get(4)).unwrap(), f.set(&[4, 5, 6]));
        assert_eq!(subtree(&dag, &f.get(3)).unwrap(), f.set(&[3, 5, 6]));
        assert_eq!(sibling(&dag, &f.get(3)).unwrap(), f.set(&[2, 3, 4]));
        assert_eq!(chain_complement(&dag, &f.get(6)).unwrap(), f.set(&[2, 4]));
    }

    #[test]
    fn f1_scores() {
        let (dag, f) = f1();
        assert_eq!(score_oracle(&dag, &f.get(1)).unwrap(), 6);
        assert_eq!(parent_score_oracle(&dag, &f.get(3)).unwrap(), 3);
        assert_eq!(score_oracle(&dag, &f.get(6)).unwrap(), 1);
        assert_eq!(parent_score_oracle(&dag, &f.g).unwrap(), 7);
    }

    #[test]
    fn subgraph_keeps_internal_edges_only() {
        let (dag, f) = f1();
        let sg = subgraph(&dag, &f.set(&[4, 5, 6])).unwrap();
        assert_eq!(sg.edges, BTreeSet::from([(f.get(5), f.get(4)), (f.get(6), f.get(5))]));
        assert_eq!(sg.before(&f.get(5)), f.set(&[4]));
        assert!(sg.before(&f.get(4)).is_empty());
    }

    #[test]
    fn unknown_block_errors() {
        let (dag, _) = f1();
        let missing = BlockId([7; 32]);
        assert!(past(&dag, &missing).is_err());
        assert!(score_oracle(&dag, &missing).is_err());
    }
}
