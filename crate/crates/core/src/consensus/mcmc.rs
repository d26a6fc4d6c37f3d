use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::Scores;
use crate::block::BlockId;
use crate::dag::DagState;
use crate::error::Result;

/// Which edges the walk may move along.
#[derive(Clone, Copy, Debug, Default, PartialEq, Eq)]
pub enum WalkEdges {
    /// Any block that approves the current one (parent or reference edge).
    #[default]
    Approvers,
    /// Parental children only.
    Parental,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct McmcParams {
    pub alpha: f64,
    pub seed: u64,
    pub walk: WalkEdges,
}

impl Default for McmcParams {
    fn default() -> Self {
        McmcParams {
            alpha: 0.001,
            seed: 0,
            walk: WalkEdges::Approvers,
        }
    }
}

fn candidates(dag: &DagState, b: usize, walk: WalkEdges) -> Vec<usize> {
    let node = dag.node(b);
    let mut c = match walk {
        WalkEdges::Approvers => node.after.clone(),
        WalkEdges::Parental => node.children.clone(),
    };
    // Arrival order differs between nodes; the walk must not.
    c.sort_by_key(|&i| dag.id_at(i));
    c
}

/// Softmax over `alpha * Score`, shifted by the maximum score first.
fn weights(dag: &DagState, cands: &[usize], alpha: f64, scores: Scores) -> Vec<f64> {
    let s: Vec<f64> = cands.iter().map(|&c| scores.score_ix(dag, c) as f64).collect();
    let max = s.iter().cloned().fold(f64::NEG_INFINITY, f64::max);
    let w: Vec<f64> = s.iter().map(|v| (alpha * (v - max)).exp()).collect();
    let total: f64 = w.iter().sum();
    w.into_iter().map(|x| x / total).collect()
}

/// One-step transition distribution out of `b`, candidates by ascending id.
pub fn transition_probabilities(
    dag: &DagState,
    b: &BlockId,
    params: &McmcParams,
    scores: Scores,
) -> Result<Vec<(BlockId, f64)>> {
    let i = dag.require(b)?;
    let cands = candidates(dag, i, params.walk);
    let p = weights(dag, &cands, params.alpha, scores);
    Ok(cands.iter().map(|&c| dag.id_at(c)).zip(p).collect())
}

pub(crate) fn mcmc_ix(dag: &DagState, start: usize, params: &McmcParams, scores: Scores) -> usize {
    let mut rng = ChaCha8Rng::seed_from_u64(params.seed);
    let mut cur = start;
    loop {
        let cands = candidates(dag, cur, params.walk);
        if cands.is_empty() {
            return cur;
        }
        let p = weights(dag, &cands, params.alpha, scores);
        let u: f64 = rng.gen();
        let mut acc = 0.0;
        let mut next = *cands.last().unwrap();
        for (&c, &pc) in cands.iter().zip(&p) {
            acc += pc;
            if u < acc {
                next = c;
                break;
            }
        }
        cur = next;
    }
}

/// Weighted random walk from `start` until a block with no candidates.
pub fn mcmc_tip(dag: &DagState, start: &BlockId, params: &McmcParams, scores: Scores) -> Result<BlockId> {
    let s = dag.require(start)?;
    Ok(dag.id_at(mcmc_ix(dag, s, params, scores)))
}
