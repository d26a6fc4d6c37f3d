use std::collections::BTreeSet;
use std::fmt::Write as _;

use sha2::{Digest, Sha256};

use super::config::protocol_label;
use super::workload::{build_workload, Workload, ISSUANCE, RAMP_AMOUNT};
use super::{ConfigError, ExperimentConfig};
use crate::block::{hash_block, BlockId};
use crate::dag::oracle;
use crate::ledger::{apply_order, balance, UtxoState};
use crate::sim::{Metrics, MsgKind, Network};

/// Upper bound on merge blocks in the seal phase.
const MAX_SEAL_BLOCKS: u64 = 100_000;
/// Upper bound on tip re-announcement rounds after message loss.
pub(crate) const MAX_SYNC_ROUNDS: u64 = 50;

/// Flat, deterministic summary of one run.
#[derive(Clone, Debug, PartialEq)]
pub struct Report {
    pub config_hash: String,
    pub topology: String,
    pub nodes: usize,
    pub links: usize,
    pub protocol: &'static str,
    pub seed: u64,
    pub txn_count: u64,
    pub bundle_size: usize,
    pub blocks: u64,
    pub seal_blocks: u64,
    /// Simulated time from the first generation to the last workload publish.
    pub makespan_ns: u64,
    /// Workload transactions per simulated second of makespan.
    pub tps: f64,
    pub convergence_ns: u64,
    pub converged: bool,
    pub orders_agree: bool,
    /// Fraction of blocks in the past of node 0's pivot tip before sealing.
    pub inclusion_rate: f64,
    pub ramp_up_conserved: bool,
    pub conserved: bool,
    pub accepted_txns: usize,
    pub rejected_txns: usize,
    pub pairs: usize,
    pub pairs_one_winner: usize,
    pub pairs_no_winner: usize,
    pub metrics: Metrics,
    pub repeated_block_sends: u64,
    pub pivot_depth: usize,
    pub order_len: usize,
    pub order_hash: String,
    pub utxo_hash: String,
}

impl Report {
    /// The properties every run must satisfy.
    pub fn failures(&self) -> Vec<&'static str> {
        let mut out = vec![];
        if !self.converged {
            out.push("converged");
        }
        if !self.orders_agree {
            out.push("orders_agree");
        }
        if !self.ramp_up_conserved {
            out.push("ramp_up_conserved");
        }
        if !self.conserved {
            out.push("conserved");
        }
        // Without bundles only the twin can block a spend.
        if self.bundle_size == 1 && self.pairs_one_winner != self.pairs {
            out.push("pairs_one_winner");
        }
        out
    }

    pub fn render(&self) -> String {
        let m = &self.metrics;
        let mut kv: Vec<(&str, String)> = vec![
            ("config_hash", self.config_hash.clone()),
            ("topology", self.topology.clone()),
            ("nodes", self.nodes.to_string()),
            ("links", self.links.to_string()),
            ("protocol", self.protocol.to_string()),
            ("seed", self.seed.to_string()),
            ("txn_count", self.txn_count.to_string()),
            ("bundle_size", self.bundle_size.to_string()),
            ("blocks", self.blocks.to_string()),
            ("seal_blocks", self.seal_blocks.to_string()),
            ("makespan_ns", self.makespan_ns.to_string()),
            ("tps", format!("{:.3}", self.tps)),
            ("convergence_ns", self.convergence_ns.to_string()),
            ("converged", self.converged.to_string()),
            ("orders_agree", self.orders_agree.to_string()),
            ("inclusion_rate", format!("{:.6}", self.inclusion_rate)),
            ("ramp_up_conserved", self.ramp_up_conserved.to_string()),
            ("conserved", self.conserved.to_string()),
            ("accepted_txns", self.accepted_txns.to_string()),
            ("rejected_txns", self.rejected_txns.to_string()),
            ("pairs", self.pairs.to_string()),
            ("pairs_one_winner", self.pairs_one_winner.to_string()),
            ("pairs_no_winner", self.pairs_no_winner.to_string()),
        ];
        for k in MsgKind::ALL {
            kv.push((msg_key(k, "msgs"), m.sent(k).to_string()));
            kv.push((msg_key(k, "bytes"), m.bytes(k).to_string()));
        }
        kv.extend([
            ("msgs_total", m.total_messages().to_string()),
            ("bytes_total", m.total_bytes().to_string()),
            ("dropped", m.dropped.to_string()),
            ("duplicate_blocks", m.duplicate_blocks.to_string()),
            ("repeated_block_sends", self.repeated_block_sends.to_string()),
            ("timeouts", m.timeouts.to_string()),
            ("pow_attempts", m.pow_attempts.to_string()),
            ("stale_blocks", m.stale_blocks.to_string()),
            ("forwards", m.forwards.to_string()),
            ("pivot_depth", self.pivot_depth.to_string()),
            ("order_len", self.order_len.to_string()),
            ("order_hash", self.order_hash.clone()),
            ("utxo_hash", self.utxo_hash.clone()),
        ]);
        let mut out = String::new();
        for (k, v) in kv {
            let _ = writeln!(out, "{k}={v}");
        }
        out
    }
}

fn msg_key(k: MsgKind, what: &str) -> &'static str {
    match (k, what) {
        (MsgKind::Block, "msgs") => "msgs_block",
        (MsgKind::Hash, "msgs") => "msgs_hash",
        (MsgKind::Request, "msgs") => "msgs_request",
        (MsgKind::Nack, "msgs") => "msgs_nack",
        (MsgKind::Block, _) => "bytes_block",
        (MsgKind::Hash, _) => "bytes_hash",
        (MsgKind::Request, _) => "bytes_request",
        (MsgKind::Nack, _) => "bytes_nack",
    }
}

/// A finished run: the report plus the artifacts it summarizes.
pub struct Outcome {
    pub report: Report,
    /// `pos<TAB>id` for node 0's full order.
    pub order_export: String,
    pub utxo_export: String,
    pub trace: Vec<String>,
    pub network: Network,
    pub workload: Workload,
}

fn sha_hex(s: &str) -> String {
    hex::encode(Sha256::digest(s.as_bytes()))
}

/// Ramp-up, spend workload, seal, then replay and audit.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<Outcome, ConfigError> {
    cfg.validate()?;
    let topo = cfg.load_topology()?;
    let config_hash = cfg.hash(&topo);
    let workload = build_workload(cfg, topo.n);

    let gid = hash_block(&workload.genesis);
    let genesis_only = apply_order(&[gid], &std::collections::BTreeMap::from([(gid, workload.genesis.clone())]), UtxoState::new());
    let ramp_up_conserved = genesis_only.is_conserved()
        && genesis_only.total_unspent() == ISSUANCE
        && workload.group1.iter().all(|a| balance(&genesis_only, *a) == RAMP_AMOUNT);

    let mut net = Network::new(topo.clone(), cfg.sim_config(), workload.genesis.clone());
    for (node, items) in workload.per_node.iter().enumerate() {
        net.assign(node, items.iter().cloned());
    }
    net.sync(MAX_SYNC_ROUNDS);
    let m = net.metrics().clone();
    let makespan_ns = m.last_publish_ns.saturating_sub(m.first_generate_ns.unwrap_or(0));
    let convergence_ns = m.convergence_ns();
    let inclusion_rate = {
        let s = net.node(0).streaming();
        let tip = s.pivot().tip;
        oracle::past(s.dag(), &tip).map_or(0.0, |p| p.len() as f64 / s.dag().len() as f64)
    };

    let seal_blocks = net.seal(0, MAX_SEAL_BLOCKS);
    net.sync(MAX_SYNC_ROUNDS);
    let converged = net.converged();
    let orders: Vec<Vec<BlockId>> = net.nodes().iter().map(|n| n.streaming().full_order()).collect();
    let orders_agree = orders.windows(2).all(|w| w[0] == w[1]);
    let order = &orders[0];
    let s0 = net.node(0).streaming();
    let utxo = s0.utxo();

    let genesis_accepted = utxo.outcomes.get(&gid).map_or(0, |v| v.iter().filter(|ok| **ok).count());
    let mut pairs_one_winner = 0;
    let mut pairs_no_winner = 0;
    for p in &workload.pairs {
        let members: BTreeSet<_> = std::iter::once(p.first).chain(p.second).collect();
        match utxo.spent_by.get(&p.input) {
            Some(w) if members.contains(w) => pairs_one_winner += 1,
            _ => pairs_no_winner += 1,
        }
    }

    let mut order_export = String::new();
    for (i, id) in order.iter().enumerate() {
        let _ = writeln!(order_export, "{i}\t{id}");
    }
    let utxo_export = utxo.export();
    let mut metrics = net.metrics().clone();
    metrics.stale_blocks = net.nodes().iter().map(|n| n.streaming().stale_blocks()).sum();

    let txn_count = workload.txn_count() as u64;
    let report = Report {
        config_hash,
        topology: topo.name.clone(),
        nodes: topo.n,
        links: topo.link_count(),
        protocol: protocol_label(cfg.protocol),
        seed: cfg.seed,
        txn_count,
        bundle_size: cfg.bundle_size,
        blocks: m.blocks_generated,
        seal_blocks,
        makespan_ns,
        tps: if makespan_ns == 0 { 0.0 } else { txn_count as f64 * 1e9 / makespan_ns as f64 },
        convergence_ns,
        converged,
        orders_agree,
        inclusion_rate,
        ramp_up_conserved,
        conserved: utxo.is_conserved() && utxo.total_unspent() == ISSUANCE,
        accepted_txns: utxo.accepted_count() - genesis_accepted,
        rejected_txns: utxo.rejected_count(),
        pairs: workload.pairs.len(),
        pairs_one_winner,
        pairs_no_winner,
        metrics,
        repeated_block_sends: net.repeated_block_sends(),
        pivot_depth: s0.pivot().chain.len() - 1,
        order_len: order.len(),
        order_hash: sha_hex(&order_export),
        utxo_hash: sha_hex(&utxo_export),
    };
    let trace = net.trace().to_vec();
    Ok(Outcome {
        report,
        order_export,
        utxo_export,
        trace,
        network: net,
        workload,
    })
}
