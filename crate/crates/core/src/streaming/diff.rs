use std::collections::{BTreeSet, HashSet, VecDeque};

use crate::block::BlockId;
use crate::consensus::{pivot_ix, Scores, TieBreak};
use crate::dag::oracle::past_ix;
use crate::dag::DagState;
use crate::error::{DagError, Result};

/// Blocks already assigned to an epoch during one ordering pass.
#[derive(Clone, Debug)]
pub struct CoveredSet {
    bits: Vec<bool>,
    count: usize,
}

impl CoveredSet {
    pub fn new(dag: &DagState) -> Self {
        CoveredSet {
            bits: vec![false; dag.len()],
            count: 0,
        }
    }

    pub fn len(&self) -> usize {
        self.count
    }

    pub fn is_empty(&self) -> bool {
        self.count == 0
    }

    pub fn contains(&self, dag: &DagState, b: &BlockId) -> bool {
        dag.ix(b).is_some_and(|i| self.contains_ix(i))
    }

    pub fn insert(&mut self, dag: &DagState, b: &BlockId) -> Result<()> {
        let i = dag.require(b)?;
        self.extend_ix(&[i]);
        Ok(())
    }

    pub(crate) fn contains_ix(&self, i: usize) -> bool {
        self.bits.get(i).copied().unwrap_or(false)
    }

    pub(crate) fn extend_ix(&mut self, ixs: &[usize]) {
        for &i in ixs {
            if i >= self.bits.len() {
                self.bits.resize(i + 1, false);
            }
            if !self.bits[i] {
                self.bits[i] = true;
                self.count += 1;
            }
        }
    }
}

/// Backward search from `b` along approver edges looking for `p`. Covered
/// blocks are never enqueued, and neither is anything inserted after `p`,
/// since insertion order is topological and such blocks cannot reach it.
pub(crate) fn is_covered_ix(dag: &DagState, p: usize, b: usize, covered: &CoveredSet) -> bool {
    if b == p {
        return true;
    }
    if b > p {
        return false;
    }
    let mut seen = HashSet::from([b]);
    let mut queue = VecDeque::from([b]);
    while let Some(x) = queue.pop_front() {
        for &y in &dag.node(x).after {
            if y == p {
                return true;
            }
            if y < p && !covered.contains_ix(y) && seen.insert(y) {
                queue.push_back(y);
            }
        }
    }
    false
}

/// Forward search from `b` that keeps every predecessor not already in
/// `Past(P(b))`. The result is added to `covered`.
pub(crate) fn diff_set_ix(dag: &DagState, b: usize, covered: &mut CoveredSet) -> Vec<usize> {
    let diff = match dag.node(b).parent {
        None => past_ix(dag, b)
            .into_iter()
            .filter(|&i| !covered.contains_ix(i))
            .collect(),
        Some(p) => {
            let mut diff = vec![b];
            let mut seen = HashSet::from([b]);
            let mut queue = VecDeque::from([b]);
            while let Some(x) = queue.pop_front() {
                for &y in &dag.node(x).before {
                    if !seen.insert(y) || covered.contains_ix(y) {
                        continue;
                    }
                    if !is_covered_ix(dag, p, y, covered) {
                        diff.push(y);
                        queue.push_back(y);
                    }
                }
            }
            diff
        }
    };
    covered.extend_ix(&diff);
    diff
}

/// True iff `b` is in `Past(p)`.
pub fn is_covered(dag: &DagState, p: &BlockId, b: &BlockId, covered: &CoveredSet) -> Result<bool> {
    Ok(is_covered_ix(dag, dag.require(p)?, dag.require(b)?, covered))
}

/// The epoch of pivot block `b`. `covered` must hold the epochs of every
/// later pivot block from this pass.
pub fn get_diff_set(dag: &DagState, b: &BlockId, covered: &mut CoveredSet) -> Result<BTreeSet<BlockId>> {
    let i = dag.require(b)?;
    if !pivot_ix(dag, 0, Scores::Oracle, TieBreak::default()).contains(&i) {
        return Err(DagError::NotOnPivotChain(*b));
    }
    Ok(diff_set_ix(dag, i, covered).into_iter().map(|x| dag.id_at(x)).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::consensus::{epoch_members, pivot};
    use crate::dag::oracle::past;
    use crate::fixtures::{f1, random_dag, DagShape};

    #[test]
    fn f1_walkthrough() {
        let (dag, f) = f1();
        let mut c = CoveredSet::new(&dag);
        assert_eq!(get_diff_set(&dag, &f.get(6), &mut c).unwrap(), f.set(&[2, 6]));
        assert!(is_covered(&dag, &f.get(3), &f.get(1), &c).unwrap());
        assert!(!is_covered(&dag, &f.get(3), &f.get(4), &c).unwrap());
        assert!(is_covered(&dag, &f.get(3), &f.get(3), &c).unwrap());
        assert_eq!(get_diff_set(&dag, &f.get(5), &mut c).unwrap(), f.set(&[4, 5]));
        assert_eq!(get_diff_set(&dag, &f.get(3), &mut c).unwrap(), f.set(&[3]));
        assert_eq!(get_diff_set(&dag, &f.get(1), &mut c).unwrap(), f.set(&[1]));
        assert_eq!(get_diff_set(&dag, &f.g, &mut c).unwrap(), f.set(&[0]));
        assert_eq!(c.len(), 7);
        assert_eq!(
            get_diff_set(&dag, &f.get(2), &mut c),
            Err(DagError::NotOnPivotChain(f.get(2)))
        );
    }

    #[test]
    fn is_covered_with_explicit_covered_set() {
        let (dag, f) = f1();
        let mut c = CoveredSet::new(&dag);
        c.insert(&dag, &f.get(2)).unwrap();
        c.insert(&dag, &f.get(6)).unwrap();
        assert!(is_covered(&dag, &f.get(3), &f.get(1), &c).unwrap());
        assert!(!is_covered(&dag, &f.get(3), &f.get(4), &c).unwrap());
    }

    #[test]
    fn diff_sets_match_past_difference() {
        for seed in 0..20 {
            let dag = random_dag(seed, 250, DagShape::ALL[seed as usize % 3]);
            let chain = pivot(&dag, &dag.genesis(), Scores::Oracle, TieBreak::default())
                .unwrap()
                .chain;
            let mut c = CoveredSet::new(&dag);
            for w in chain.windows(2).rev() {
                let (p, b) = (w[0], w[1]);
                let expect: BTreeSet<_> = past(&dag, &b)
                    .unwrap()
                    .difference(&past(&dag, &p).unwrap())
                    .copied()
                    .collect();
                assert_eq!(get_diff_set(&dag, &b, &mut c).unwrap(), expect);
                assert_eq!(epoch_members(&dag, &b).unwrap(), expect);
            }
        }
    }
}
