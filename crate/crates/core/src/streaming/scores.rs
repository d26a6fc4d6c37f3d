use std::collections::VecDeque;

use crate::block::BlockId;
use crate::dag::DagState;
use crate::error::Result;

/// Score (`|Later|`) and ParentScore (`|SubTree|`) for every block, kept in
/// step with the graph one insertion at a time.
#[derive(Clone, Debug, Default)]
pub struct ScoreMaps {
    score: Vec<u64>,
    parent_score: Vec<u64>,
    touched: u64,
    // BFS scratch: a block is visited when its stamp equals `round`.
    stamp: Vec<u32>,
    round: u32,
}

impl PartialEq for ScoreMaps {
    fn eq(&self, other: &Self) -> bool {
        self.score == other.score && self.parent_score == other.parent_score
    }
}

impl Eq for ScoreMaps {}

impl ScoreMaps {
    pub fn new() -> Self {
        Self::default()
    }

    /// Maps for an existing graph, built by replaying every insertion.
    pub fn build(dag: &DagState) -> Self {
        let mut m = Self::new();
        m.catch_up(dag, dag.len());
        m
    }

    /// Number of blocks accounted for.
    pub fn len(&self) -> usize {
        self.score.len()
    }

    pub fn is_empty(&self) -> bool {
        self.score.is_empty()
    }

    pub fn score(&self, dag: &DagState, b: &BlockId) -> Option<u64> {
        dag.ix(b).and_then(|i| self.score.get(i).copied())
    }

    pub fn parent_score(&self, dag: &DagState, b: &BlockId) -> Option<u64> {
        dag.ix(b).and_then(|i| self.parent_score.get(i).copied())
    }

    /// Total score increments performed so far.
    pub fn touched(&self) -> u64 {
        self.touched
    }

    pub(crate) fn score_ix(&self, i: usize) -> u64 {
        self.score[i]
    }

    pub(crate) fn parent_score_ix(&self, i: usize) -> u64 {
        self.parent_score[i]
    }

    fn catch_up(&mut self, dag: &DagState, upto: usize) -> usize {
        let mut touched = 0;
        while self.score.len() < upto {
            touched += self.add(dag, self.score.len());
        }
        touched
    }

    fn add(&mut self, dag: &DagState, b: usize) -> usize {
        self.score.push(0);
        self.parent_score.push(0);
        self.stamp.push(0);
        self.round = self.round.wrapping_add(1);
        if self.round == 0 {
            self.stamp.iter_mut().for_each(|s| *s = 0);
            self.round = 1;
        }
        let round = self.round;
        let mut queue = VecDeque::from([b]);
        self.stamp[b] = round;
        let mut touched = 0;
        while let Some(x) = queue.pop_front() {
            self.score[x] += 1;
            touched += 1;
            for &y in &dag.node(x).before {
                if self.stamp[y] != round {
                    self.stamp[y] = round;
                    queue.push_back(y);
                }
            }
        }
        let mut cur = Some(b);
        while let Some(x) = cur {
            self.parent_score[x] += 1;
            cur = dag.node(x).parent;
        }
        self.touched += touched as u64;
        touched
    }
}

/// Accounts for the newly inserted block `b` (and any earlier insertions
/// not yet seen). Returns how many Score entries were incremented.
pub fn update_score(dag: &DagState, b: &BlockId, maps: &mut ScoreMaps) -> Result<usize> {
    let i = dag.require(b)?;
    Ok(maps.catch_up(dag, i + 1))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::dag::oracle::{parent_score_oracle, past, score_oracle};
    use crate::fixtures::{chain_dag, f1, random_dag, DagShape};

    #[test]
    fn f1_scores_match_oracle() {
        let (dag, f) = f1();
        let m = ScoreMaps::build(&dag);
        assert_eq!(m.score(&dag, &f.get(1)), Some(6));
        assert_eq!(m.parent_score(&dag, &f.get(3)), Some(3));
        assert_eq!(m.score(&dag, &f.get(6)), Some(1));
        for id in dag.ids() {
            assert_eq!(m.score(&dag, &id).unwrap(), score_oracle(&dag, &id).unwrap());
            assert_eq!(m.parent_score(&dag, &id).unwrap(), parent_score_oracle(&dag, &id).unwrap());
        }
    }

    #[test]
    fn chain_insert_touches_k_plus_one() {
        let dag = chain_dag(12);
        let mut m = ScoreMaps::build(&chain_dag(11));
        let tip = dag.ids().last().unwrap();
        assert_eq!(update_score(&dag, &tip, &mut m).unwrap(), 12);
        assert_eq!(update_score(&dag, &tip, &mut m).unwrap(), 0);
    }

    #[test]
    fn random_insertions_match_oracles_and_work_bound() {
        for seed in 0..6 {
            for shape in DagShape::ALL {
                let dag = random_dag(seed, 500, shape);
                let m = ScoreMaps::build(&dag);
                let mut past_sum = 0u64;
                for id in dag.ids() {
                    assert_eq!(m.score(&dag, &id).unwrap(), score_oracle(&dag, &id).unwrap());
                    assert_eq!(
                        m.parent_score(&dag, &id).unwrap(),
                        parent_score_oracle(&dag, &id).unwrap()
                    );
                    past_sum += past(&dag, &id).unwrap().len() as u64;
                }
                assert!(m.touched() <= past_sum);
            }
        }
    }
}
