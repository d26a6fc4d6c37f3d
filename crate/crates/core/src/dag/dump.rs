//! Line-delimited DAG dump. One block per line, tab-separated:
//!
//! `id trunk branch sender timestamp bundle_id tag attach_ts nonce payload`
//!
//! Ids, the tag and the encoded payload are hex; absent values are `-`. The
//! genesis comes first and the rest follow in layers (every block after all
//! of its predecessors, ties by ascending id), so two nodes holding the same
//! block set produce byte-identical dumps.

use std::sync::Arc;

use thiserror::Error;

use crate::block::{hash_block, Address, BlockHeader, BlockId, BundleId};
use crate::dag::DagState;
use crate::error::DagError;

#[derive(Debug, Error)]
pub enum DumpError {
    #[error("line {line}: {msg}")]
    Parse { line: usize, msg: String },
    #[error("line {line}: {source}")]
    Dag { line: usize, source: DagError },
    #[error("empty dump")]
    Empty,
}

/// Canonical layered order of all blocks, genesis first.
pub(crate) fn canonical_order(dag: &DagState) -> Vec<usize> {
    let n = dag.len();
    let mut pending: Vec<usize> = (0..n).map(|i| dag.node(i).before.len()).collect();
    let mut out = vec![0];
    let mut layer: Vec<usize> = (1..n).filter(|&i| pending[i] == 0).collect();
    let release = |i: usize, next: &mut Vec<usize>, pending: &mut Vec<usize>| {
        for &a in &dag.node(i).after {
            pending[a] -= 1;
            if pending[a] == 0 {
                next.push(a);
            }
        }
    };
    let mut next = Vec::new();
    release(0, &mut layer, &mut pending);
    while !layer.is_empty() {
        layer.sort_by_key(|&i| dag.id_at(i));
        for &i in &layer {
            out.push(i);
            release(i, &mut next, &mut pending);
        }
        layer = std::mem::take(&mut next);
    }
    out
}

fn opt_hex(bytes: Option<&[u8; 32]>) -> String {
    bytes.map_or_else(|| "-".to_string(), hex::encode)
}

pub fn dump(dag: &DagState) -> String {
    let mut out = String::new();
    for i in canonical_order(dag) {
        let node = dag.node(i);
        let h = &node.header;
        let payload = &h.encode_payload_bytes();
        out.push_str(&format!(
            "{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\t{}\n",
            node.id,
            opt_hex(h.trunk.as_ref().map(|b| &b.0)),
            opt_hex(h.branch.as_ref().map(|b| &b.0)),
            h.sender,
            h.timestamp,
            opt_hex(h.bundle_id.as_ref().map(|b| &b.0)),
            if h.tag.is_empty() { "-".into() } else { hex::encode(&h.tag) },
            h.attach_ts,
            h.nonce,
            hex::encode(payload),
        ));
    }
    out
}

fn parse_line(line: &str) -> Result<(BlockId, BlockHeader), String> {
    let f: Vec<&str> = line.split('\t').collect();
    if f.len() != 10 {
        return Err(format!("expected 10 fields, found {}", f.len()));
    }
    let digest = |s: &str| -> Result<Option<[u8; 32]>, String> {
        if s == "-" {
            return Ok(None);
        }
        let mut out = [0u8; 32];
        hex::decode_to_slice(s, &mut out).map_err(|e| format!("bad id {s}: {e}"))?;
        Ok(Some(out))
    };
    let num = |s: &str| s.parse::<u64>().map_err(|e| format!("bad number {s}: {e}"));
    let id = BlockId(digest(f[0])?.ok_or("missing id")?);
    let tag = if f[6] == "-" {
        vec![]
    } else {
        hex::decode(f[6]).map_err(|e| format!("bad tag: {e}"))?
    };
    let payload_bytes = hex::decode(f[9]).map_err(|e| format!("bad payload: {e}"))?;
    let payload = BlockHeader::decode_payload_bytes(&payload_bytes).ok_or("bad payload encoding")?;
    let header = BlockHeader {
        sender: Address(num(f[3])?),
        timestamp: num(f[4])?,
        bundle_id: digest(f[5])?.map(BundleId),
        trunk: digest(f[1])?.map(BlockId),
        branch: digest(f[2])?.map(BlockId),
        tag,
        attach_ts: num(f[7])?,
        nonce: num(f[8])?,
        payload,
    };
    Ok((id, header))
}

/// Rebuilds a DAG from [`dump`] output. The first line is the genesis. When
/// the genesis itself has a trunk (the graph was induced by genesis
/// forwarding), references to blocks outside the dump are dropped.
pub fn load(text: &str, difficulty: u32) -> Result<DagState, DumpError> {
    let mut dag: Option<DagState> = None;
    let mut induced = false;
    for (n, line) in text.lines().enumerate().filter(|(_, l)| !l.is_empty()) {
        let line_no = n + 1;
        let (id, header) = parse_line(line).map_err(|msg| DumpError::Parse { line: line_no, msg })?;
        if hash_block(&header) != id {
            return Err(DumpError::Parse {
                line: line_no,
                msg: format!("id {id} does not match header hash"),
            });
        }
        let header = Arc::new(header);
        match dag.as_mut() {
            None => {
                induced = !header.is_original_genesis();
                dag = Some(DagState::with_genesis(header, difficulty));
            }
            Some(d) => {
                let res = if induced {
                    d.insert_lenient(header)
                } else {
                    d.insert(header)
                };
                res.map_err(|source| DumpError::Dag {
                    line: line_no,
                    source,
                })?;
            }
        }
    }
    dag.ok_or(DumpError::Empty)
}
