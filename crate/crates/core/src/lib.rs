//! A DAG ledger whose blocks carry one parent edge and one reference edge.
//!
//! Parents are chosen along the heaviest parental subtree (the pivot chain),
//! references by a weighted random walk. The pivot chain splits the graph
//! into epochs, which yields a total order used to resolve conflicting UTXO
//! spends. The expensive graph quantities (scores, epoch diff sets,
//! topological keys) are maintained incrementally as blocks stream in, and
//! old history can be cut off by moving the genesis forward.
//!
//! Module map:
//!
//! - [`block`]: block ids, canonical header encoding, proof of work
//! - [`dag`]: DAG state plus brute-force [`dag::oracle`] queries
//! - [`consensus`]: pivot chain, random-walk tip selection, total order
//! - [`streaming`]: incremental scores, diff sets, top scores, genesis forwarding
//! - [`ledger`]: transactions, bundles, UTXO replay
//! - [`sim`]: deterministic multi-node gossip simulation
//! - [`confirm`]: reversal probability bound for pivot blocks
//! - [`experiment`]: config files, workloads, experiment runs, verify suite

pub mod block;
pub mod confirm;
pub mod consensus;
pub mod dag;
pub mod error;
pub mod experiment;
pub mod fixtures;
pub mod sim;
pub mod ledger;
pub mod streaming;

pub use block::{hash_block, pow_search, Address, BlockHeader, BlockId};
pub use consensus::{total_order, EpochOrder, McmcParams, PivotResult, TieBreak, WalkEdges};
pub use dag::{DagState, InsertOutcome};
pub use error::DagError;
pub use ledger::{Transaction, UtxoState};
pub use streaming::{ScoreMaps, SnapshotStore, StreamingDag};
