use crate::block::BlockId;
use crate::dag::DagState;
use crate::error::Result;

/// How the predecessors' TopScores are combined.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum Combiner {
    /// Longest path from the genesis; strictly increasing along every edge.
    #[default]
    Max,
    /// As printed in the original recurrence. Not a topological key.
    Min,
}

/// O(1)-per-block topological position: 0 at the genesis, else the
/// combined value of trunk and branch plus one.
#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct TopScoreMap {
    top: Vec<u64>,
    combiner: Combiner,
}

impl TopScoreMap {
    pub fn new(combiner: Combiner) -> Self {
        TopScoreMap { top: vec![], combiner }
    }

    pub fn build(dag: &DagState, combiner: Combiner) -> Self {
        let mut m = Self::new(combiner);
        while m.top.len() < dag.len() {
            m.push(dag, m.top.len());
        }
        m
    }

    pub fn combiner(&self) -> Combiner {
        self.combiner
    }

    pub fn get(&self, dag: &DagState, b: &BlockId) -> Option<u64> {
        dag.ix(b).and_then(|i| self.top.get(i).copied())
    }

    fn push(&mut self, dag: &DagState, i: usize) -> u64 {
        let preds = dag.node(i).before.iter().map(|&p| self.top[p]);
        let v = match self.combiner {
            Combiner::Max => preds.max(),
            Combiner::Min => preds.min(),
        }
        .map_or(0, |x| x + 1);
        self.top.push(v);
        v
    }
}

/// Assigns the TopScore of the newly inserted `b` and returns it.
pub fn update_top_score(dag: &DagState, b: &BlockId, m: &mut TopScoreMap) -> Result<u64> {
    let i = dag.require(b)?;
    while m.top.len() <= i {
        m.push(dag, m.top.len());
    }
    Ok(m.top[i])
}
