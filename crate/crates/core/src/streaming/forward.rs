use std::collections::BTreeSet;

use crate::block::BlockId;
use crate::consensus::{pivot_ix, total_order_with, DiffSetMode, Scores, TieBreak};
use crate::dag::oracle::{later_ix, past_ix};
use crate::dag::DagState;
use crate::error::{DagError, Result};
use crate::ledger::{apply_order, UtxoState};
use crate::streaming::ScoreMaps;

/// One persisted stretch of the total order.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Segment {
    pub start: usize,
    pub len: usize,
    /// The genesis that took over when this segment was cut.
    pub genesis: BlockId,
}

/// Retired history: the total order of every block cut off by genesis
/// forwarding, and the UTXO state after replaying it.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct SnapshotStore {
    persisted_order: Vec<BlockId>,
    utxo: UtxoState,
    current_genesis: BlockId,
    segments: Vec<Segment>,
    retired: BTreeSet<BlockId>,
    dropped: u64,
}

impl SnapshotStore {
    pub fn new(genesis: BlockId) -> Self {
        SnapshotStore {
            persisted_order: vec![],
            utxo: UtxoState::new(),
            current_genesis: genesis,
            segments: vec![],
            retired: BTreeSet::new(),
            dropped: 0,
        }
    }

    pub fn persisted_order(&self) -> &[BlockId] {
        &self.persisted_order
    }

    /// UTXO state after replaying the persisted order.
    pub fn utxo(&self) -> &UtxoState {
        &self.utxo
    }

    pub fn current_genesis(&self) -> BlockId {
        self.current_genesis
    }

    pub fn segments(&self) -> &[Segment] {
        &self.segments
    }

    /// Whether `b` was cut off by a forward (persisted or dropped).
    pub fn is_retired(&self, b: &BlockId) -> bool {
        self.retired.contains(b)
    }

    /// Stranded blocks that never made it into any total order.
    pub fn dropped(&self) -> u64 {
        self.dropped
    }

    /// `position<TAB>block_id` lines of segment `k`.
    pub fn export_segment(&self, k: usize) -> Option<String> {
        let s = self.segments.get(k)?;
        let mut out = String::new();
        for (i, id) in self.persisted_order[s.start..s.start + s.len].iter().enumerate() {
            out.push_str(&format!("{}\t{id}\n", s.start + i));
        }
        Some(out)
    }

    pub fn manifest(&self) -> String {
        let mut out = format!("current_genesis={}\n", self.current_genesis);
        for s in &self.segments {
            out.push_str(&format!("segment={}\t{}\t{}\n", s.start, s.len, s.genesis));
        }
        out
    }
}

/// The deepest pivot block whose ParentScore beats every off-chain block's
/// by more than `h`, if any (the genesis itself never qualifies).
pub fn should_forward(dag: &DagState, maps: &ScoreMaps, h: u64) -> Option<BlockId> {
    let chain = pivot_ix(dag, 0, Scores::Streamed(maps), TieBreak::default());
    let mut on_chain = vec![false; dag.len()];
    for &c in &chain {
        on_chain[c] = true;
    }
    let off_max = (0..dag.len())
        .filter(|&i| !on_chain[i])
        .map(|i| maps.parent_score_ix(i))
        .max()
        .unwrap_or(0);
    chain[1..]
        .iter()
        .filter(|&&c| maps.parent_score_ix(c) > off_max + h)
        .min_by_key(|&&c| maps.parent_score_ix(c))
        .map(|&c| dag.id_at(c))
}

/// Result of moving the genesis forward.
#[derive(Debug)]
pub struct Forwarded {
    /// The graph induced by `Later(new_g)`, rooted at `new_g`.
    pub dag: DagState,
    /// Blocks appended to the persisted order.
    pub persisted: usize,
    /// Stranded blocks outside the total order, discarded.
    pub dropped: usize,
}

/// Cuts the graph at pivot block `new_g`. Blocks of the old total order that
/// do not survive into `Later(new_g)` are appended to the store in order and
/// replayed into its UTXO state.
pub fn forward_genesis(
    dag: &DagState,
    new_g: &BlockId,
    store: &mut SnapshotStore,
    scores: Scores,
) -> Result<Forwarded> {
    let g = dag.require(new_g)?;
    if g == 0 {
        return Ok(Forwarded {
            dag: dag.clone(),
            persisted: 0,
            dropped: 0,
        });
    }
    if !pivot_ix(dag, 0, scores, TieBreak::default()).contains(&g) {
        return Err(DagError::InvalidCandidate(*new_g));
    }
    let full = total_order_with(dag, scores, DiffSetMode::Streaming, TieBreak::default());
    let mut keep = later_ix(dag, g);
    keep.sort_unstable();
    let mut live_mark = vec![false; dag.len()];
    for &k in &keep {
        live_mark[k] = true;
    }
    let mut in_order = vec![false; dag.len()];
    let mut segment = Vec::new();
    for id in &full.order {
        let i = dag.ix(id).expect("order member");
        in_order[i] = true;
        if !live_mark[i] {
            segment.push(*id);
        }
    }
    let mut past_mark = vec![false; dag.len()];
    for i in past_ix(dag, g) {
        past_mark[i] = true;
    }
    let mut dropped = 0;
    for i in 0..dag.len() {
        if !live_mark[i] {
            store.retired.insert(dag.id_at(i));
            if !past_mark[i] && !in_order[i] {
                dropped += 1;
            }
        }
    }
    let live = dag.induced(&keep);
    let utxo = std::mem::take(&mut store.utxo);
    store.utxo = apply_order(&segment, dag, utxo);
    store.segments.push(Segment {
        start: store.persisted_order.len(),
        len: segment.len(),
        genesis: *new_g,
    });
    let persisted = segment.len();
    store.persisted_order.extend(segment);
    store.current_genesis = *new_g;
    store.dropped += dropped as u64;
    Ok(Forwarded {
        dag: live,
        persisted,
        dropped,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::block::{Address, BlockHeader};
    use crate::consensus::total_order;
    use crate::dag::oracle::{chain_complement, parent_score_oracle};
    use crate::fixtures::{f1, f1_header, random_dag, DagShape};

    /// A 12-block pivot chain with a 4-block side chain hanging off its first block.
    fn side_chain_fixture() -> (DagState, Vec<BlockId>) {
        let mut dag = DagState::new(BlockHeader::genesis(Address(0), vec![]), 0);
        let mut chain = vec![dag.genesis()];
        for i in 1..=12 {
            let p = *chain.last().unwrap();
            chain.push(dag.insert_block(f1_header(i, Some(p), Some(p))).unwrap().id());
        }
        let mut p = chain[1];
        for i in 0..4 {
            p = dag.insert_block(f1_header(100 + i, Some(p), Some(p))).unwrap().id();
        }
        (dag, chain)
    }

    #[test]
    fn side_chain_threshold() {
        let (dag, chain) = side_chain_fixture();
        let maps = ScoreMaps::build(&dag);
        let ps = |b: &BlockId| maps.parent_score(&dag, b).unwrap();
        // Off-chain max is 4, so with h = 5 a candidate needs ParentScore > 9.
        assert_eq!(ps(&chain[3]), 10);
        assert_eq!(ps(&chain[4]), 9);
        assert_eq!(should_forward(&dag, &maps, 5), Some(chain[3]));
        assert_eq!(should_forward(&dag, &maps, 100), None);
    }

    #[test]
    fn short_pivot_never_forwards() {
        let mut dag = DagState::new(BlockHeader::genesis(Address(0), vec![]), 0);
        let g = dag.genesis();
        dag.insert_block(f1_header(1, Some(g), Some(g))).unwrap();
        let maps = ScoreMaps::build(&dag);
        assert_eq!(should_forward(&dag, &maps, 5), None);
    }

    #[test]
    fn matches_direct_predicate_on_random_dags() {
        for seed in 0..40 {
            let dag = random_dag(seed, 120, DagShape::ALL[seed as usize % 3]);
            let maps = ScoreMaps::build(&dag);
            for h in [1, 3, 5, 10] {
                let g = dag.genesis();
                let off: u64 = chain_complement(&dag, &crate::consensus::pivot(&dag, &g, Scores::Oracle, TieBreak::default()).unwrap().tip)
                    .unwrap()
                    .iter()
                    .map(|b| parent_score_oracle(&dag, b).unwrap())
                    .max()
                    .unwrap_or(0);
                let chain = crate::consensus::pivot(&dag, &g, Scores::Oracle, TieBreak::default())
                    .unwrap()
                    .chain;
                let expect = chain[1..]
                    .iter()
                    .filter(|b| parent_score_oracle(&dag, b).unwrap() > off + h)
                    .min_by_key(|b| parent_score_oracle(&dag, b).unwrap())
                    .copied();
                assert_eq!(should_forward(&dag, &maps, h), expect);
            }
        }
    }

    #[test]
    fn f1_forward_at_three() {
        let (dag, f) = f1();
        let mut store = SnapshotStore::new(f.g);
        let out = forward_genesis(&dag, &f.get(3), &mut store, Scores::Oracle).unwrap();
        assert_eq!(out.dag.genesis(), f.get(3));
        assert_eq!(out.dag.ids().collect::<BTreeSet<_>>(), f.set(&[3, 5, 6]));
        assert_eq!(store.persisted_order(), &f.seq(&[0, 1, 4, 2])[..]);
        assert_eq!(out.dropped, 0);
        assert_eq!(total_order(&out.dag).order, f.seq(&[3, 5, 6]));
        assert!(store.is_retired(&f.get(4)));
        assert_eq!(store.current_genesis(), f.get(3));
        assert_eq!(store.manifest().lines().count(), 2);
        assert_eq!(store.export_segment(0).unwrap().lines().next().unwrap(), format!("0\t{}", f.g));
    }

    #[test]
    fn forward_to_current_genesis_is_noop() {
        let (dag, f) = f1();
        let mut store = SnapshotStore::new(f.g);
        let before = store.clone();
        let out = forward_genesis(&dag, &f.g, &mut store, Scores::Oracle).unwrap();
        assert_eq!(crate::dag::dump(&out.dag), crate::dag::dump(&dag));
        assert_eq!(store, before);
    }

    #[test]
    fn off_chain_candidate_rejected() {
        let (dag, f) = f1();
        let mut store = SnapshotStore::new(f.g);
        assert_eq!(
            forward_genesis(&dag, &f.get(4), &mut store, Scores::Oracle).unwrap_err(),
            DagError::InvalidCandidate(f.get(4))
        );
    }
}
