//! Transactions, bundles and the UTXO state machine that replays a total
//! order.

mod utxo;
#[cfg(test)]
mod props;

use std::fmt;

use sha2::{Digest, Sha256};

use crate::block::{Address, BundleId, Reader};

pub use utxo::{apply_order, balance, prefix_consistency, PayloadSource, UtxoState};

/// Transaction id: SHA-256 of the canonical transaction encoding.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Default)]
pub struct TxnId(pub [u8; 32]);

impl TxnId {
    pub fn to_hex(&self) -> String {
        hex::encode(self.0)
    }

    pub fn from_hex(s: &str) -> Option<Self> {
        let mut out = [0u8; 32];
        hex::decode_to_slice(s, &mut out).ok()?;
        Some(TxnId(out))
    }
}

impl fmt::Display for TxnId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(&self.to_hex())
    }
}

impl fmt::Debug for TxnId {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "TxnId({})", &self.to_hex()[..12])
    }
}

/// Reference to output `index` of transaction `txn`.
#[derive(Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Debug)]
pub struct OutputRef {
    pub txn: TxnId,
    pub index: u32,
}

impl OutputRef {
    pub fn new(txn: TxnId, index: u32) -> Self {
        OutputRef { txn, index }
    }
}

impl fmt::Display for OutputRef {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{}:{}", self.txn, self.index)
    }
}

#[derive(Clone, Copy, PartialEq, Eq, Debug)]
pub struct TxOut {
    pub owner: Address,
    pub amount: u64,
}

impl TxOut {
    pub fn new(owner: Address, amount: u64) -> Self {
        TxOut { owner, amount }
    }
}

/// A transfer. `sender` is the claimed owner of every input; authorization
/// is simulated by comparing it with the owners recorded in the UTXO set.
/// A transaction without inputs is a coinbase.
#[derive(Clone, PartialEq, Eq, Debug)]
pub struct Transaction {
    sender: Address,
    inputs: Vec<OutputRef>,
    outputs: Vec<TxOut>,
    memo: u64,
    id: TxnId,
}

impl Transaction {
    pub fn new(sender: Address, inputs: Vec<OutputRef>, outputs: Vec<TxOut>, memo: u64) -> Self {
        let mut txn = Transaction {
            sender,
            inputs,
            outputs,
            memo,
            id: TxnId::default(),
        };
        txn.id = TxnId(Sha256::digest(txn.encode()).into());
        txn
    }

    pub fn coinbase(to: Address, amount: u64) -> Self {
        Transaction::new(to, vec![], vec![TxOut::new(to, amount)], 0)
    }

    pub fn id(&self) -> TxnId {
        self.id
    }

    pub fn sender(&self) -> Address {
        self.sender
    }

    pub fn inputs(&self) -> &[OutputRef] {
        &self.inputs
    }

    pub fn outputs(&self) -> &[TxOut] {
        &self.outputs
    }

    pub fn memo(&self) -> u64 {
        self.memo
    }

    pub fn is_coinbase(&self) -> bool {
        self.inputs.is_empty()
    }

    pub fn output_ref(&self, index: u32) -> OutputRef {
        OutputRef::new(self.id, index)
    }

    pub(crate) fn encode(&self) -> Vec<u8> {
        let mut out = Vec::with_capacity(24 + 36 * self.inputs.len() + 16 * self.outputs.len());
        out.extend_from_slice(&self.sender.0.to_be_bytes());
        out.extend_from_slice(&(self.inputs.len() as u32).to_be_bytes());
        for input in &self.inputs {
            out.extend_from_slice(&input.txn.0);
            out.extend_from_slice(&input.index.to_be_bytes());
        }
        out.extend_from_slice(&(self.outputs.len() as u32).to_be_bytes());
        for o in &self.outputs {
            out.extend_from_slice(&o.owner.0.to_be_bytes());
            out.extend_from_slice(&o.amount.to_be_bytes());
        }
        out.extend_from_slice(&self.memo.to_be_bytes());
        out
    }

    pub(crate) fn decode(bytes: &[u8]) -> Option<Self> {
        let mut r = Reader { bytes, pos: 0 };
        let u32_at = |r: &mut Reader| Some(u32::from_be_bytes(r.take(4)?.try_into().ok()?));
        let u64_at = |r: &mut Reader| Some(u64::from_be_bytes(r.take(8)?.try_into().ok()?));
        let sender = Address(u64_at(&mut r)?);
        let n_in = u32_at(&mut r)?;
        let mut inputs = Vec::new();
        for _ in 0..n_in {
            let txn = TxnId(r.take(32)?.try_into().ok()?);
            inputs.push(OutputRef::new(txn, u32_at(&mut r)?));
        }
        let n_out = u32_at(&mut r)?;
        let mut outputs = Vec::new();
        for _ in 0..n_out {
            let owner = Address(u64_at(&mut r)?);
            outputs.push(TxOut::new(owner, u64_at(&mut r)?));
        }
        let memo = u64_at(&mut r)?;
        if r.pos != bytes.len() {
            return None;
        }
        Some(Transaction::new(sender, inputs, outputs, memo))
    }
}

/// A batch of transactions applied all-or-nothing.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Bundle {
    id: BundleId,
    txns: Vec<Transaction>,
}

/// One bundle entry with its position bookkeeping.
#[derive(Clone, Copy, Debug)]
pub struct BundleEntry<'a> {
    pub current_index: usize,
    pub last_index: usize,
    pub txn: &'a Transaction,
}

impl Bundle {
    /// Returns `None` for an empty batch.
    pub fn new(txns: Vec<Transaction>) -> Option<Self> {
        if txns.is_empty() {
            return None;
        }
        Some(Bundle {
            id: Self::id_for(&txns),
            txns,
        })
    }

    /// Bundle id committed to by the ordered transaction ids.
    pub fn id_for(txns: &[Transaction]) -> BundleId {
        let mut h = Sha256::new();
        for t in txns {
            h.update(t.id().0);
        }
        BundleId(h.finalize().into())
    }

    pub fn id(&self) -> BundleId {
        self.id
    }

    pub fn txns(&self) -> &[Transaction] {
        &self.txns
    }

    pub fn into_txns(self) -> Vec<Transaction> {
        self.txns
    }

    pub fn entries(&self) -> impl Iterator<Item = BundleEntry<'_>> {
        let last_index = self.txns.len() - 1;
        self.txns
            .iter()
            .enumerate()
            .map(move |(current_index, txn)| BundleEntry {
                current_index,
                last_index,
                txn,
            })
    }
}
