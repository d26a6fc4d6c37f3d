//! Block identity, the canonical header encoding and proof of work.
//!
//! A [`BlockId`] is the SHA-256 digest of the canonical header encoding. Ids
//! are compared as 256-bit unsigned big-endian integers; that ordering is the
//! tie-breaker used everywhere in consensus.

use std::fmt;
use std::hash::{BuildHasherDefault, Hasher};

use sha2::{Digest, Sha256};

use crate::ledger::Transaction;

/// 256-bit block identifier.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct BlockId(pub [u8; 32]);

impl BlockId {
    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }

    pub fn from_hex(s: &str) -> Option<Self> {
        let mut out = [0u8; 32];
        hex::decode_to_slice(s, &mut out).ok()?;
        Some(BlockId(out))
    }

    /// Number of leading zero bits of the id read as a big-endian integer.
    pub fn leading_zero_bits(&self) -> u32 {
        let mut bits = 0;
        for byte in self.0 {
            if byte == 0 {
                bits += 8;
            } else {
                bits += byte.leading_zeros();
                break;
            }
        }
        bits
    }
}

impl fmt::Display for BlockId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl fmt::Debug for BlockId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "BlockId({})", &self.to_hex()[..12])
    }
}

/// Hasher for maps keyed by digests. The key is already uniformly
/// distributed, so the first eight bytes are used as is.
#[derive(Default)]
pub struct DigestHasher(u64);

impl Hasher for DigestHasher {
    fn finish(&self) -> u64 {
        self.0
    }

    fn write(&mut self, bytes: &[u8]) {
        for chunk in bytes.chunks(8) {
            let mut buf = [0u8; 8];
            buf[..chunk.len()].copy_from_slice(chunk);
            self.0 = self.0.rotate_left(5) ^ u64::from_le_bytes(buf);
        }
    }

    fn write_u64(&mut self, n: u64) {
        self.0 = self.0.rotate_left(5) ^ n;
    }
}

pub type DigestMap<K, V> = std::collections::HashMap<K, V, BuildHasherDefault<DigestHasher>>;
pub type DigestSet<K> = std::collections::HashSet<K, BuildHasherDefault<DigestHasher>>;

/// Account identifier.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug, Default)]
pub struct Address(pub u64);

impl fmt::Display for Address {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}", self.0)
    }
}

/// Identifier shared by the transactions of one bundle.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct BundleId(pub [u8; 32]);

/// Simplified block header. Field order matches the canonical encoding.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct BlockHeader {
    pub sender: Address,
    /// Creation time, milliseconds.
    pub timestamp: u64,
    pub bundle_id: Option<BundleId>,
    /// Parent edge target. `None` only for the original genesis.
    pub trunk: Option<BlockId>,
    /// Reference edge target. `None` only for the original genesis.
    pub branch: Option<BlockId>,
    pub tag: Vec<u8>,
    /// Attachment time, milliseconds.
    pub attach_ts: u64,
    pub nonce: u64,
    pub payload: Vec<Transaction>,
}

impl BlockHeader {
    pub fn genesis(sender: Address, payload: Vec<Transaction>) -> Self {
        BlockHeader {
            sender,
            timestamp: 0,
            bundle_id: None,
            trunk: None,
            branch: None,
            tag: b"genesis".to_vec(),
            attach_ts: 0,
            nonce: 0,
            payload,
        }
    }

    pub fn is_original_genesis(&self) -> bool {
        self.trunk.is_none() && self.branch.is_none()
    }

    /// Canonical, length-prefixed encoding. Every field is written as a
    /// big-endian `u32` length followed by its bytes, in declaration order.
    pub fn encode(&self) -> Vec<u8> {
        let mut out = self.encode_prefix();
        push_field(&mut out, &self.nonce.to_be_bytes());
        push_field(&mut out, &encode_payload(&self.payload));
        out
    }

    /// Encoded size in bytes; the message size of a full block.
    pub fn encoded_len(&self) -> usize {
        self.encode().len()
    }

    fn encode_prefix(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(256);
        push_field(&mut out, &self.sender.0.to_be_bytes());
        push_field(&mut out, &self.timestamp.to_be_bytes());
        push_field(&mut out, self.bundle_id.as_ref().map_or(&[][..], |b| &b.0[..]));
        push_field(&mut out, self.trunk.as_ref().map_or(&[][..], |b| &b.0[..]));
        push_field(&mut out, self.branch.as_ref().map_or(&[][..], |b| &b.0[..]));
        push_field(&mut out, &self.tag);
        push_field(&mut out, &self.attach_ts.to_be_bytes());
        out
    }

    pub(crate) fn encode_payload_bytes(&self) -> Vec<u8> {
        encode_payload(&self.payload)
    }

    pub(crate) fn decode_payload_bytes(bytes: &[u8]) -> Option<Vec<Transaction>> {
        decode_payload(bytes)
    }

    pub fn decode(bytes: &[u8]) -> Option<Self> {
        let mut r = Reader { bytes, pos: 0 };
        let sender = Address(r.u64_field()?);
        let timestamp = r.u64_field()?;
        let bundle_id = r.opt_digest_field()?.map(BundleId);
        let trunk = r.opt_digest_field()?.map(BlockId);
        let branch = r.opt_digest_field()?.map(BlockId);
        let tag = r.field()?.to_vec();
        let attach_ts = r.u64_field()?;
        let nonce = r.u64_field()?;
        let payload = decode_payload(r.field()?)?;
        if r.pos != bytes.len() {
            return None;
        }
        Some(BlockHeader {
            sender,
            timestamp,
            bundle_id,
            trunk,
            branch,
            tag,
            attach_ts,
            nonce,
            payload,
        })
    }
}

fn push_field(out: &mut Vec<u8>, bytes: &[u8]) {
    out.extend_from_slice(&(bytes.len() as u32).to_be_bytes());
    out.extend_from_slice(bytes);
}

fn encode_payload(payload: &[Transaction]) -> Vec<u8> {
    let mut out = Vec::new();
    out.extend_from_slice(&(payload.len() as u32).to_be_bytes());
    for txn in payload {
        push_field(&mut out, &txn.encode());
    }
    out
}

fn decode_payload(bytes: &[u8]) -> Option<Vec<Transaction>> {
    let mut r = Reader { bytes, pos: 0 };
    let count = u32::from_be_bytes(r.take(4)?.try_into().ok()?);
    let mut txns = Vec::with_capacity(count.min(1 << 16) as usize);
    for _ in 0..count {
        txns.push(Transaction::decode(r.field()?)?);
    }
    if r.pos != bytes.len() {
        return None;
    }
    Some(txns)
}

pub(crate) struct Reader<'a> {
    pub bytes: &'a [u8],
    pub pos: usize,
}

impl<'a> Reader<'a> {
    pub fn take(&mut self, n: usize) -> Option<&'a [u8]> {
        let end = self.pos.checked_add(n)?;
        let out = self.bytes.get(self.pos..end)?;
        self.pos = end;
        Some(out)
    }

    pub fn field(&mut self) -> Option<&'a [u8]> {
        let len = u32::from_be_bytes(self.take(4)?.try_into().ok()?) as usize;
        self.take(len)
    }

    fn u64_field(&mut self) -> Option<u64> {
        Some(u64::from_be_bytes(self.field()?.try_into().ok()?))
    }

    fn opt_digest_field(&mut self) -> Option<Option<[u8; 32]>> {
        match self.field()? {
            [] => Some(None),
            f => Some(Some(f.try_into().ok()?)),
        }
    }
}

/// Deterministic block id: SHA-256 over the canonical encoding.
pub fn hash_block(header: &BlockHeader) -> BlockId {
    BlockId(Sha256::digest(header.encode()).into())
}

/// Outcome of a nonce search.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct PowSolution {
    pub nonce: u64,
    pub id: BlockId,
    /// Hashes evaluated, including the successful one.
    pub attempts: u64,
}

/// Returns the first nonce, counting up from zero, whose header hash has at
/// least `difficulty` leading zero bits.
pub fn pow_search(header: &BlockHeader, difficulty: u32) -> u64 {
    pow_solve(header, difficulty).nonce
}

/// Like [`pow_search`] but also reports the resulting id and attempt count.
pub fn pow_solve(header: &BlockHeader, difficulty: u32) -> PowSolution {
    let mut prefix = Sha256::new();
    prefix.update(header.encode_prefix());
    let mut tail = Vec::new();
    push_field(&mut tail, &encode_payload(&header.payload));

    let mut nonce = 0u64;
    loop {
        let mut h = prefix.clone();
        h.update(8u32.to_be_bytes());
        h.update(nonce.to_be_bytes());
        h.update(&tail);
        let id = BlockId(h.finalize().into());
        if id.leading_zero_bits() >= difficulty {
            return PowSolution {
                nonce,
                id,
                attempts: nonce + 1,
            };
        }
        nonce += 1;
    }
}

pub fn pow_valid(id: &BlockId, difficulty: u32) -> bool {
    id.leading_zero_bits() >= difficulty
}
