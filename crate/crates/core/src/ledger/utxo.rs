use std::collections::{BTreeMap, BTreeSet, HashMap};
use std::sync::Arc;

use crate::block::{Address, BlockHeader, BlockId};
use crate::ledger::{Bundle, OutputRef, Transaction, TxOut, TxnId};

/// Anything that can hand out block headers (and so payloads) by id.
pub trait PayloadSource {
    fn header(&self, id: &BlockId) -> Option<&BlockHeader>;
}

impl PayloadSource for HashMap<BlockId, Arc<BlockHeader>> {
    fn header(&self, id: &BlockId) -> Option<&BlockHeader> {
        self.get(id).map(|h| h.as_ref())
    }
}

impl PayloadSource for BTreeMap<BlockId, Arc<BlockHeader>> {
    fn header(&self, id: &BlockId) -> Option<&BlockHeader> {
        self.get(id).map(|h| h.as_ref())
    }
}

#[derive(Clone, Debug, Default, PartialEq, Eq)]
pub struct UtxoState {
    pub unspent: BTreeMap<OutputRef, TxOut>,
    pub spent_by: BTreeMap<OutputRef, TxnId>,
    pub rejected: BTreeSet<TxnId>,
    /// Per replayed block, whether each payload transaction was accepted.
    pub outcomes: BTreeMap<BlockId, Vec<bool>>,
    /// Total coinbase value accepted so far.
    pub issued: u64,
}

impl UtxoState {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn total_unspent(&self) -> u64 {
        self.unspent.values().map(|o| o.amount).sum()
    }

    pub fn is_conserved(&self) -> bool {
        self.total_unspent() == self.issued
    }

    pub fn accepted_count(&self) -> usize {
        self.outcomes.values().flatten().filter(|ok| **ok).count()
    }

    pub fn rejected_count(&self) -> usize {
        self.outcomes.values().flatten().filter(|ok| !**ok).count()
    }

    pub fn is_accepted(&self, block: &BlockId, position: usize) -> Option<bool> {
        self.outcomes.get(block)?.get(position).copied()
    }

    /// Line-delimited export: `txn_id:index<TAB>addr<TAB>amount`.
    pub fn export(&self) -> String {
        let mut out = String::new();
        for (r, o) in &self.unspent {
            out.push_str(&format!("{}:{}\t{}\t{}\n", r.txn, r.index, o.owner, o.amount));
        }
        out
    }

    /// Parses the output of [`UtxoState::export`] back into an unspent set.
    pub fn parse_export(text: &str) -> Option<BTreeMap<OutputRef, TxOut>> {
        let mut unspent = BTreeMap::new();
        for line in text.lines().filter(|l| !l.is_empty()) {
            let mut fields = line.split('\t');
            let (txn, index) = fields.next()?.split_once(':')?;
            let r = OutputRef::new(TxnId::from_hex(txn)?, index.parse().ok()?);
            let owner = Address(fields.next()?.parse().ok()?);
            let amount = fields.next()?.parse().ok()?;
            unspent.insert(r, TxOut::new(owner, amount));
        }
        Some(unspent)
    }
}

/// Staged effects of one all-or-nothing group of transactions.
struct Overlay<'a> {
    base: &'a BTreeMap<OutputRef, TxOut>,
    spent: BTreeMap<OutputRef, TxnId>,
    created: BTreeMap<OutputRef, TxOut>,
    issued: u64,
}

impl<'a> Overlay<'a> {
    fn new(base: &'a BTreeMap<OutputRef, TxOut>) -> Self {
        Overlay {
            base,
            spent: BTreeMap::new(),
            created: BTreeMap::new(),
            issued: 0,
        }
    }

    fn lookup(&self, r: &OutputRef) -> Option<TxOut> {
        if self.spent.contains_key(r) {
            return None;
        }
        self.created.get(r).or_else(|| self.base.get(r)).copied()
    }

    fn apply(&mut self, txn: &Transaction, coinbase_allowed: bool) -> bool {
        if txn.outputs().is_empty() {
            return false;
        }
        let Some(out_total) = txn
            .outputs()
            .iter()
            .try_fold(0u64, |acc, o| acc.checked_add(o.amount))
        else {
            return false;
        };
        if (0..txn.outputs().len() as u32).any(|i| self.lookup(&txn.output_ref(i)).is_some()) {
            return false;
        }
        if txn.is_coinbase() {
            if !coinbase_allowed {
                return false;
            }
            self.issued += out_total;
        } else {
            let mut in_total = 0u64;
            let mut seen = BTreeSet::new();
            for input in txn.inputs() {
                if !seen.insert(*input) {
                    return false;
                }
                match self.lookup(input) {
                    Some(o) if o.owner == txn.sender() => in_total += o.amount,
                    _ => return false,
                }
            }
            if in_total != out_total {
                return false;
            }
            for input in txn.inputs() {
                self.spent.insert(*input, txn.id());
            }
        }
        for (i, o) in txn.outputs().iter().enumerate() {
            self.created.insert(txn.output_ref(i as u32), *o);
        }
        true
    }

    fn into_effects(self) -> Effects {
        Effects {
            spent: self.spent,
            created: self.created,
            issued: self.issued,
        }
    }
}

struct Effects {
    spent: BTreeMap<OutputRef, TxnId>,
    created: BTreeMap<OutputRef, TxOut>,
    issued: u64,
}

impl Effects {
    fn commit(self, state: &mut UtxoState) {
        let Effects {
            spent,
            created,
            issued,
        } = self;
        state.unspent.extend(created);
        for (r, by) in spent {
            state.unspent.remove(&r);
            state.spent_by.insert(r, by);
        }
        state.issued += issued;
    }
}

fn apply_block(state: &mut UtxoState, id: BlockId, header: &BlockHeader) {
    let coinbase_allowed = header.is_original_genesis();
    let payload = &header.payload;
    let mut verdicts = vec![false; payload.len()];
    if let Some(bundle_id) = header.bundle_id {
        let mut overlay = Overlay::new(&state.unspent);
        let ok = !payload.is_empty()
            && Bundle::id_for(payload) == bundle_id
            && payload.iter().all(|t| overlay.apply(t, coinbase_allowed));
        if ok {
            overlay.into_effects().commit(state);
            verdicts.iter_mut().for_each(|v| *v = true);
        }
    } else {
        for (i, txn) in payload.iter().enumerate() {
            let mut overlay = Overlay::new(&state.unspent);
            if overlay.apply(txn, coinbase_allowed) {
                overlay.into_effects().commit(state);
                verdicts[i] = true;
            }
        }
    }
    for (txn, ok) in payload.iter().zip(&verdicts) {
        if !ok {
            state.rejected.insert(txn.id());
        }
    }
    state.outcomes.insert(id, verdicts);
}

/// Replays `order` on top of `base`. A transaction whose input is not
/// unspent at its position is rejected; bundles are all-or-nothing.
/// Blocks unknown to `blocks` or already replayed are skipped.
pub fn apply_order(order: &[BlockId], blocks: &impl PayloadSource, base: UtxoState) -> UtxoState {
    let mut state = base;
    for id in order {
        if state.outcomes.contains_key(id) {
            continue;
        }
        if let Some(header) = blocks.header(id) {
            apply_block(&mut state, *id, header);
        }
    }
    state
}

/// Sum of the unspent outputs owned by `addr`.
pub fn balance(state: &UtxoState, addr: Address) -> u64 {
    state
        .unspent
        .values()
        .filter(|o| o.owner == addr)
        .map(|o| o.amount)
        .sum()
}

/// True when every block decided in `old` was decided identically in `new`.
pub fn prefix_consistency(old: &UtxoState, new: &UtxoState) -> bool {
    old.outcomes
        .iter()
        .all(|(id, verdicts)| new.outcomes.get(id) == Some(verdicts))
}
