//! Oracle-equivalence and invariant suites behind the `verify` command.

use std::collections::{BTreeMap, BTreeSet};
use std::fmt::Write as _;
use std::sync::Arc;

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::run::MAX_SYNC_ROUNDS;
use super::{run_experiment, ExperimentConfig};
use crate::block::{hash_block, Address, BlockHeader, BlockId};
use crate::consensus::{epoch_members, pivot, total_order_with, DiffSetMode, Scores, TieBreak};
use crate::dag::{dump, oracle, DagState};
use crate::fixtures::{f1, random_dag, sealed_schedule, DagShape};
use crate::ledger::{apply_order, balance, Transaction, TxOut, TxnId};
use crate::sim::{CostModel, MsgKind, Network, SimConfig, Topology, WorkItem, HASH_BYTES};
use crate::streaming::{get_diff_set, Combiner, CoveredSet, ScoreMaps, StreamingDag};

pub type SuiteOutcome = Result<String, String>;

#[derive(Clone, Debug)]
pub struct SuiteResult {
    pub name: &'static str,
    pub outcome: SuiteOutcome,
}

#[derive(Clone, Copy, Debug)]
pub struct VerifyOptions {
    /// Tie-break used by the implementation under test. The references
    /// always break ties toward the smaller id.
    pub tie_break: TieBreak,
    /// Seeds in the determinism sweep and per topology in convergence.
    pub seeds: u64,
    /// Random graphs in the oracle-equivalence suite.
    pub dags: usize,
}

impl Default for VerifyOptions {
    fn default() -> Self {
        VerifyOptions {
            tie_break: TieBreak::SmallerId,
            seeds: 10,
            dags: 60,
        }
    }
}

#[derive(Clone, Debug)]
pub struct VerifySummary {
    pub results: Vec<SuiteResult>,
}

impl VerifySummary {
    pub fn passed(&self) -> bool {
        self.results.iter().all(|r| r.outcome.is_ok())
    }

    pub fn failed(&self) -> Vec<&'static str> {
        self.results.iter().filter(|r| r.outcome.is_err()).map(|r| r.name).collect()
    }

    /// `name<TAB>PASS|FAIL<TAB>detail` per suite.
    pub fn render(&self) -> String {
        let mut out = String::new();
        for r in &self.results {
            let (tag, detail) = match &r.outcome {
                Ok(d) => ("PASS", d),
                Err(d) => ("FAIL", d),
            };
            let _ = writeln!(out, "{}\t{tag}\t{detail}", r.name);
        }
        out
    }
}

pub fn verify_suite(opts: &VerifyOptions) -> VerifySummary {
    type Suite<'a> = Box<dyn Fn() -> SuiteOutcome + 'a>;
    let suites: Vec<(&'static str, Suite)> = vec![
        ("fixture-f1", Box::new(move || fixture_f1(opts.tie_break))),
        ("pivot-ties", Box::new(move || pivot_ties(opts.tie_break, 200))),
        ("oracle-equivalence", Box::new(move || oracle_equivalence(opts.tie_break, opts.dags, 50..=200))),
        ("utxo-conservation", Box::new(|| utxo_double_spend().and_then(|a| utxo_conflict_pairs(1_000, 0).map(|b| format!("{a}; {b}"))))),
        ("gossip-counts", Box::new(gossip_counts)),
        ("convergence", Box::new(move || convergence(opts.seeds.min(3), true))),
        ("forwarding", Box::new(|| forwarding(10))),
        ("determinism", Box::new(move || determinism(opts.seeds))),
    ];
    VerifySummary {
        results: suites
            .into_iter()
            .map(|(name, f)| SuiteResult { name, outcome: f() })
            .collect(),
    }
}

fn check(cond: bool, msg: impl FnOnce() -> String) -> Result<(), String> {
    if cond {
        Ok(())
    } else {
        Err(msg())
    }
}

pub fn fixture_f1(tie: TieBreak) -> SuiteOutcome {
    let (dag, f) = f1();
    let p = pivot(&dag, &f.g, Scores::Oracle, tie).map_err(|e| e.to_string())?;
    check(p.chain == f.seq(&[0, 1, 3, 5, 6]), || format!("pivot chain {:?}", labels(&f, &p.chain)))?;
    let epoch5 = epoch_members(&dag, &f.get(5)).map_err(|e| e.to_string())?;
    check(epoch5 == f.set(&[4, 5]), || "epoch(5) differs".into())?;
    for (mode, scores) in [
        (DiffSetMode::Oracle, Scores::Oracle),
        (DiffSetMode::Streaming, Scores::Streamed(&ScoreMaps::build(&dag))),
    ] {
        let order = total_order_with(&dag, scores, mode, tie).order;
        check(order == f.seq(&[0, 1, 3, 4, 5, 2, 6]), || {
            format!("{mode:?} order {:?}", labels(&f, &order))
        })?;
    }
    Ok("pivot, epoch(5) and order match".into())
}

fn labels(f: &crate::fixtures::F1Ids, ids: &[BlockId]) -> Vec<Option<usize>> {
    ids.iter().map(|id| f.label(id)).collect()
}

/// Greedy heaviest-child walk with ties to the smaller id, straight from
/// the oracle scores.
fn reference_pivot(dag: &DagState) -> Vec<BlockId> {
    let mut chain = vec![dag.genesis()];
    loop {
        let cur = *chain.last().unwrap();
        let kids = oracle::child(dag, &cur).unwrap();
        let best = kids
            .iter()
            .map(|c| (oracle::parent_score_oracle(dag, c).unwrap(), std::cmp::Reverse(*c)))
            .max();
        match best {
            Some((_, std::cmp::Reverse(c))) => chain.push(c),
            None => return chain,
        }
    }
}

/// Small random graphs where equal parent scores are common.
pub fn pivot_ties(tie: TieBreak, count: u64) -> SuiteOutcome {
    let mut tied_graphs = 0;
    for seed in 0..count {
        let dag = random_dag(seed, 20, DagShape::Uniform);
        let expect = reference_pivot(&dag);
        let has_tie = expect.iter().any(|b| {
            let ps: Vec<u64> = oracle::child(&dag, b)
                .unwrap()
                .iter()
                .map(|c| oracle::parent_score_oracle(&dag, c).unwrap())
                .collect();
            ps.iter().max().is_some_and(|m| ps.iter().filter(|p| *p == m).count() > 1)
        });
        tied_graphs += has_tie as usize;
        for scores in [Scores::Oracle, Scores::Streamed(&ScoreMaps::build(&dag))] {
            let got = pivot(&dag, &dag.genesis(), scores, tie).unwrap().chain;
            check(got == expect, || format!("seed {seed}: pivot chain differs from reference"))?;
        }
    }
    Ok(format!("{count} graphs, {tied_graphs} with ties"))
}

/// Streaming scores, diff sets and total order against the brute-force
/// oracles on `count` random graphs with sizes drawn from `sizes`.
pub fn oracle_equivalence(tie: TieBreak, count: usize, sizes: std::ops::RangeInclusive<usize>) -> SuiteOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(0xE0);
    let mut blocks = 0;
    for i in 0..count {
        let n = rng.gen_range(sizes.clone());
        let shape = DagShape::ALL[i % DagShape::ALL.len()];
        let dag = random_dag(1_000 + i as u64, n, shape);
        blocks += n;
        let maps = ScoreMaps::build(&dag);
        for b in dag.ids() {
            let s = maps.score(&dag, &b);
            let ps = maps.parent_score(&dag, &b);
            check(s == oracle::score_oracle(&dag, &b).ok(), || format!("graph {i}: score of {b}"))?;
            check(ps == oracle::parent_score_oracle(&dag, &b).ok(), || format!("graph {i}: parent score of {b}"))?;
        }
        let chain = pivot(&dag, &dag.genesis(), Scores::Oracle, TieBreak::SmallerId).unwrap().chain;
        let mut covered = CoveredSet::new(&dag);
        for (k, b) in chain.iter().enumerate() {
            let got = get_diff_set(&dag, b, &mut covered).map_err(|e| e.to_string())?;
            let mut expect = oracle::past(&dag, b).unwrap();
            if k > 0 {
                for x in oracle::past(&dag, &chain[k - 1]).unwrap() {
                    expect.remove(&x);
                }
            }
            check(got == expect, || format!("graph {i}: diff set at pivot position {k}"))?;
        }
        let streamed = total_order_with(&dag, Scores::Streamed(&maps), DiffSetMode::Streaming, tie).order;
        let reference = total_order_with(&dag, Scores::Oracle, DiffSetMode::Oracle, TieBreak::SmallerId).order;
        check(streamed == reference, || format!("graph {i}: total order"))?;
        check(is_topological(&dag, &streamed), || format!("graph {i}: order not topological"))?;
    }
    Ok(format!("{count} graphs, {blocks} blocks"))
}

pub fn is_topological(dag: &DagState, order: &[BlockId]) -> bool {
    let pos: BTreeMap<BlockId, usize> = order.iter().enumerate().map(|(i, b)| (*b, i)).collect();
    pos.len() == order.len()
        && order.iter().all(|b| {
            dag.before(b)
                .unwrap()
                .iter()
                .all(|p| pos.get(p).is_some_and(|pp| *pp < pos[b]))
        })
}

fn block(trunk: BlockId, sender: u64, payload: Vec<Transaction>) -> BlockHeader {
    BlockHeader {
        sender: Address(sender),
        timestamp: sender,
        bundle_id: None,
        trunk: Some(trunk),
        branch: Some(trunk),
        tag: vec![],
        attach_ts: sender,
        nonce: 0,
        payload,
    }
}

/// One output spent to two recipients in consecutive blocks.
pub fn utxo_double_spend() -> SuiteOutcome {
    let (alice, bob, jack) = (Address(1), Address(2), Address(3));
    let coin = Transaction::coinbase(alice, 5);
    let mut dag = DagState::new(BlockHeader::genesis(alice, vec![coin.clone()]), 0);
    let to = |who: Address, memo| Transaction::new(alice, vec![coin.output_ref(0)], vec![TxOut::new(who, 5)], memo);
    let g = dag.genesis();
    let bob_block = dag.insert_block(block(g, 10, vec![to(bob, 1)])).unwrap().id();
    let jack_block = dag.insert_block(block(bob_block, 11, vec![to(jack, 2)])).unwrap().id();
    let order = crate::consensus::total_order(&dag).order;
    check(order == vec![g, bob_block, jack_block], || "unexpected order".into())?;
    let state = apply_order(&order, &dag, Default::default());
    check(state.is_accepted(&bob_block, 0) == Some(true), || "earlier transfer rejected".into())?;
    check(state.is_accepted(&jack_block, 0) == Some(false), || "later transfer accepted".into())?;
    check(balance(&state, bob) == 5 && balance(&state, jack) == 0 && balance(&state, alice) == 0, || {
        "balances".into()
    })?;
    check(state.is_conserved(), || "not conserved".into())?;
    Ok("earlier transfer accepted, later rejected".into())
}

/// `pairs` coins each spent in two blocks placed at random positions of
/// the replay order. The earlier block must win.
pub fn utxo_conflict_pairs(pairs: u64, seed: u64) -> SuiteOutcome {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let coins: Vec<Transaction> = (0..pairs)
        .map(|i| Transaction::coinbase(Address(i), rng.gen_range(1..1_000)))
        .collect();
    let genesis = Arc::new(BlockHeader::genesis(Address(0), coins.clone()));
    let gid = hash_block(&genesis);
    let mut blocks = BTreeMap::from([(gid, genesis)]);
    let mut spends: Vec<(BlockId, u64, TxnId, Address, u64)> = vec![];
    for (i, c) in coins.iter().enumerate() {
        let amount = c.outputs()[0].amount;
        for side in 0..2u64 {
            let to = Address(1_000_000 + 2 * i as u64 + side);
            let t = Transaction::new(Address(i as u64), vec![c.output_ref(0)], vec![TxOut::new(to, amount)], side);
            let h = block(gid, 2 * i as u64 + side, vec![t.clone()]);
            let id = hash_block(&h);
            blocks.insert(id, Arc::new(h));
            spends.push((id, i as u64, t.id(), to, amount));
        }
    }
    spends.shuffle(&mut rng);
    let order: Vec<BlockId> = std::iter::once(gid).chain(spends.iter().map(|s| s.0)).collect();
    let state = apply_order(&order, &blocks, Default::default());
    let mut seen = BTreeSet::new();
    for (id, coin, txn, to, amount) in &spends {
        let first = seen.insert(*coin);
        check(state.is_accepted(id, 0) == Some(first), || format!("coin {coin}: wrong verdict"))?;
        check(state.rejected.contains(txn) != first, || format!("coin {coin}: rejected set"))?;
        check(balance(&state, *to) == if first { *amount } else { 0 }, || format!("coin {coin}: balance"))?;
    }
    let issued: u64 = coins.iter().map(|c| c.outputs()[0].amount).sum();
    check(state.is_conserved() && state.total_unspent() == issued, || "not conserved".into())?;
    // The coinbases plus one spend per coin.
    check(state.accepted_count() == 2 * pairs as usize, || "accepted count".into())?;
    Ok(format!("{pairs} pairs, one winner each, {issued} tokens conserved"))
}

fn gossip_genesis() -> Arc<BlockHeader> {
    Arc::new(BlockHeader::genesis(Address(0), vec![Transaction::coinbase(Address(0), 1_000)]))
}

/// One block from every origin on every built-in topology.
pub fn gossip_counts() -> SuiteOutcome {
    let cfg = |protocol| SimConfig {
        protocol,
        costs: CostModel::FREE,
        difficulty: 4,
        ..Default::default()
    };
    let mut checked = 0;
    for topo in Topology::builtins() {
        let (n, l) = (topo.n as u64, topo.link_count() as u64);
        for origin in 0..topo.n {
            let run = |protocol| {
                let mut net = Network::new(topo.clone(), cfg(protocol), gossip_genesis());
                net.assign(origin, [WorkItem::empty()]);
                net.run();
                net
            };
            let signal = run(crate::sim::Protocol::DirectSignal);
            let mail = run(crate::sim::Protocol::DirectMail);
            let m = signal.metrics();
            let b = m.bytes(MsgKind::Block) / m.sent(MsgKind::Block).max(1);
            let h = HASH_BYTES;
            let name = &topo.name;
            check(m.sent(MsgKind::Block) == n - 1, || format!("{name} from {origin}: BLOCK sends"))?;
            check(m.total_bytes() <= 2 * l * h + (n - 1) * (b + h), || format!("{name} from {origin}: bytes"))?;
            check(signal.converged() && mail.converged(), || format!("{name} from {origin}: not converged"))?;
            check(b > 2 * h, || format!("{name}: block of {b} bytes does not exceed two hashes"))?;
            if topo.has_cycle() {
                check(mail.metrics().bytes(MsgKind::Block) > m.bytes(MsgKind::Block), || {
                    format!("{name} from {origin}: direct mail not larger")
                })?;
            }
            checked += 1;
        }
    }
    Ok(format!("{checked} topology/origin runs"))
}

/// Every built-in topology, `seeds` seeds each with seeded jitter. With
/// `lossy` every odd seed also drops a tenth of all messages.
pub fn convergence(seeds: u64, lossy: bool) -> SuiteOutcome {
    for topo in Topology::builtins() {
        for seed in 0..seeds {
            let cfg = SimConfig {
                seed,
                drop_rate: if lossy && seed % 2 == 1 { 0.1 } else { 0.0 },
                jitter_ns: seed * 1_000_000,
                ..Default::default()
            };
            let mut net = Network::new(topo.clone(), cfg, gossip_genesis());
            for node in 0..topo.n {
                net.assign(node, (0..4).map(|_| WorkItem::empty()));
            }
            net.sync(MAX_SYNC_ROUNDS);
            check(net.converged(), || format!("{} seed {seed}: dumps differ", topo.name))?;
            let expect = 1 + 4 * topo.n;
            check(net.node(0).streaming().dag().len() == expect, || format!("{} seed {seed}: missing blocks", topo.name))?;
        }
    }
    Ok(format!("7 topologies x {seeds} seeds"))
}

/// Forward at every seal of a sealed schedule and compare with a run that
/// never forwards.
pub fn forwarding(schedules: u64) -> SuiteOutcome {
    let mut forwards = 0;
    for seed in 0..schedules {
        let s = sealed_schedule(seed, 6, 12);
        let mut plain = StreamingDag::new(s.genesis.clone(), 0, Combiner::Max);
        let mut fwd = StreamingDag::new(s.genesis.clone(), 0, Combiner::Max);
        for h in &s.headers {
            plain.insert(h.clone()).map_err(|e| e.to_string())?;
            fwd.insert(h.clone()).map_err(|e| e.to_string())?;
            let id = hash_block(h);
            if s.seals.contains(&id) && fwd.pivot().chain.contains(&id) {
                fwd.forward(&id).map_err(|e| format!("seed {seed}: {e}"))?;
                forwards += 1;
            }
        }
        check(fwd.store().dropped() == 0, || format!("seed {seed}: stranded blocks"))?;
        check(fwd.full_order() == plain.total_order().order, || format!("seed {seed}: orders differ"))?;
        check(fwd.utxo() == plain.utxo(), || format!("seed {seed}: utxo differs"))?;
    }
    Ok(format!("{schedules} schedules, {forwards} forwards"))
}

/// A small experiment per seed, run twice.
pub fn determinism(seeds: u64) -> SuiteOutcome {
    for seed in 0..seeds {
        let cfg = ExperimentConfig {
            topology: crate::sim::BUILTIN_NAMES[seed as usize % 7].into(),
            txn_count: 400,
            bundle_size: if seed % 2 == 0 { 20 } else { 1 },
            jitter_ms: 2,
            seed,
            ..Default::default()
        };
        let a = run_experiment(&cfg).map_err(|e| e.to_string())?;
        let b = run_experiment(&cfg).map_err(|e| e.to_string())?;
        check(a.report.render() == b.report.render(), || format!("seed {seed}: reports differ"))?;
        check(dump(a.network.node(0).streaming().dag()) == dump(b.network.node(0).streaming().dag()), || {
            format!("seed {seed}: graphs differ")
        })?;
        check(a.report.failures().is_empty(), || format!("seed {seed}: {:?}", a.report.failures()))?;
    }
    Ok(format!("{seeds} seeds, identical reruns"))
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn fixture_passes_under_either_tie_break() {
        // F1 has no parent-score ties.
        assert!(fixture_f1(TieBreak::SmallerId).is_ok());
        assert!(fixture_f1(TieBreak::LargerId).is_ok());
    }

    #[test]
    fn tie_mutation_is_caught() {
        assert!(pivot_ties(TieBreak::SmallerId, 200).is_ok());
        assert!(pivot_ties(TieBreak::LargerId, 200).is_err());
        assert!(oracle_equivalence(TieBreak::LargerId, 30, 20..=60).is_err());
    }

    #[test]
    fn quick_suites_pass() {
        oracle_equivalence(TieBreak::SmallerId, 12, 50..=120).unwrap();
        utxo_double_spend().unwrap();
        utxo_conflict_pairs(200, 3).unwrap();
        forwarding(3).unwrap();
    }

    #[test]
    fn gossip_suite_passes() {
        gossip_counts().unwrap();
    }

    #[test]
    fn summary_rendering() {
        let s = VerifySummary {
            results: vec![
                SuiteResult { name: "a", outcome: Ok("fine".into()) },
                SuiteResult { name: "b", outcome: Err("broken".into()) },
            ],
        };
        assert!(!s.passed());
        assert_eq!(s.failed(), vec!["b"]);
        assert_eq!(s.render(), "a\tPASS\tfine\nb\tFAIL\tbroken\n");
    }
}
