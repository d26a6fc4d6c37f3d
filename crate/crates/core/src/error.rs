use thiserror::Error;

use crate::block::BlockId;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum DagError {
    #[error("unknown parent block {0}")]
    UnknownParent(BlockId),
    #[error("unknown reference block {0}")]
    UnknownReference(BlockId),
    #[error("block {id} does not meet proof-of-work difficulty {difficulty}")]
    InvalidPow { id: BlockId, difficulty: u32 },
    #[error("non-genesis block {0} is missing its trunk or branch")]
    MissingEdges(BlockId),
    #[error("distinct headers hash to the same id {0}")]
    HashCollision(BlockId),
    #[error("unknown block {0}")]
    UnknownBlock(BlockId),
    #[error("block {0} is not on the pivot chain")]
    NotOnPivotChain(BlockId),
    #[error("block {0} cannot become the new genesis")]
    InvalidCandidate(BlockId),
    #[error("block {0} references history retired by genesis forwarding")]
    StaleBlock(BlockId),
}

pub type Result<T, E = DagError> = std::result::Result<T, E>;
