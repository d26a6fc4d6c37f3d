//! Acceptance gate. Prints one PASS/FAIL line per criterion and exits
//! nonzero if any criterion fails.

use std::time::{Duration, Instant};

use streamnet::confirm::{pr_drop, ConfirmationParams};
use streamnet::consensus::{epoch_members, pivot, total_order_with, DiffSetMode, Scores};
use streamnet::experiment::verify::{
    convergence, forwarding, gossip_counts, oracle_equivalence, utxo_conflict_pairs, utxo_double_spend,
};
use streamnet::experiment::{run_experiment, ExperimentConfig};
use streamnet::fixtures::f1;
use streamnet::{ScoreMaps, TieBreak};

const FIXTURE_BUDGET: Duration = Duration::from_millis(1);
const ORACLE_GRAPHS: usize = 300;
const ORACLE_SIZES: std::ops::RangeInclusive<usize> = 50..=500;
const ORACLE_BUDGET: Duration = Duration::from_secs(60);
const CONFLICT_PAIRS: u64 = 1_000;
const CONVERGENCE_SEEDS: u64 = 10;
const FORWARD_SCHEDULES: u64 = 20;
const PRDROP_GRID_POINTS: usize = 1_000;
const BUNDLE_SPEEDUP_MIN: f64 = 2.0;
const CLIQUE_TPS_LOSS_MAX: f64 = 0.30;
const TREND_TXNS: u64 = 5_000;
const DETERMINISM_REPEATS: usize = 10;

type Verdict = Result<String, String>;

fn criterion_1() -> Verdict {
    let (dag, f) = f1();
    let mut best = Duration::MAX;
    let mut last = None;
    for _ in 0..5 {
        let start = Instant::now();
        let chain = pivot(&dag, &f.g, Scores::Oracle, TieBreak::SmallerId).unwrap().chain;
        let epoch5 = epoch_members(&dag, &f.get(5)).unwrap();
        let maps = ScoreMaps::build(&dag);
        let order = total_order_with(&dag, Scores::Streamed(&maps), DiffSetMode::Streaming, TieBreak::SmallerId).order;
        best = best.min(start.elapsed());
        last = Some((chain, epoch5, order));
    }
    let (chain, epoch5, order) = last.unwrap();
    if chain != f.seq(&[0, 1, 3, 5, 6]) {
        return Err("pivot chain differs".into());
    }
    if epoch5 != f.set(&[4, 5]) {
        return Err("epoch(5) differs".into());
    }
    if order != f.seq(&[0, 1, 3, 4, 5, 2, 6]) {
        return Err("total order differs".into());
    }
    if best >= FIXTURE_BUDGET {
        return Err(format!("took {best:?}"));
    }
    Ok(format!("exact match in {best:?}"))
}

fn criterion_2() -> Verdict {
    let start = Instant::now();
    let detail = oracle_equivalence(TieBreak::SmallerId, ORACLE_GRAPHS, ORACLE_SIZES)?;
    let took = start.elapsed();
    if took >= ORACLE_BUDGET {
        return Err(format!("{detail} but took {took:?}"));
    }
    Ok(format!("{detail} in {took:.2?}"))
}

fn criterion_3() -> Verdict {
    let a = utxo_double_spend()?;
    let b = utxo_conflict_pairs(CONFLICT_PAIRS, 7)?;
    Ok(format!("{a}; {b}"))
}

fn criterion_4() -> Verdict {
    gossip_counts()
}

fn criterion_5() -> Verdict {
    convergence(CONVERGENCE_SEEDS, false)
}

fn criterion_6() -> Verdict {
    forwarding(FORWARD_SCHEDULES)
}

fn criterion_7() -> Verdict {
    let base = ConfirmationParams { n: 0, m: 0, q: 0.0, lambda_h: 1.0, t: 0.0 };
    for (d, t) in [(1, 1.0), (10, 50.0), (0, 5.0)] {
        let v = pr_drop(&ConfirmationParams { n: 20 + d, m: 20, t, ..base }).map_err(|e| e.to_string())?;
        if v != 0.0 {
            return Err(format!("q=0 gave {v}"));
        }
    }
    let mut points = 0;
    'grid: for d in [0u64, 1, 3, 10, 30] {
        for q in [0.0, 0.05, 0.1, 0.2, 0.3, 0.4, 0.5, 0.7, 0.9, 1.0] {
            for lambda_h in [0.1, 1.0, 10.0, 100.0] {
                for t in [0.0, 1.0, 10.0, 100.0, 1000.0] {
                    let p = ConfirmationParams { n: 50 + d, m: 50, q, lambda_h, t };
                    let v = pr_drop(&p).map_err(|e| e.to_string())?;
                    if !(0.0..=1.0).contains(&v) {
                        return Err(format!("{p:?} gave {v}"));
                    }
                    points += 1;
                    if points == PRDROP_GRID_POINTS {
                        break 'grid;
                    }
                }
            }
        }
    }
    if points != PRDROP_GRID_POINTS {
        return Err(format!("grid has {points} points"));
    }
    let series: Vec<f64> = (1..=10)
        .map(|i| pr_drop(&ConfirmationParams { n: 110, m: 100, q: 0.2, lambda_h: 1.0, t: 10.0 * i as f64 }).unwrap())
        .collect();
    let shown: Vec<String> = series.iter().map(|v| format!("{v:.3e}")).collect();
    if !series.windows(2).all(|w| w[1] < w[0]) {
        return Err(format!(
            "q=0 and range checks hold on {points} points, but n-m=10, q=0.2 over t=10..100 is not decreasing: [{}]",
            shown.join(", ")
        ));
    }
    Ok(format!("{points} grid points in range, decreasing: [{}]", shown.join(", ")))
}

fn trend_config(topology: &str, bundle_size: usize) -> ExperimentConfig {
    ExperimentConfig {
        topology: topology.into(),
        txn_count: TREND_TXNS,
        bundle_size,
        seed: 1,
        ..Default::default()
    }
}

fn tps(cfg: &ExperimentConfig) -> Result<f64, String> {
    let r = run_experiment(cfg).map_err(|e| e.to_string())?.report;
    if !r.failures().is_empty() {
        return Err(format!("{} run failed {:?}", cfg.topology, r.failures()));
    }
    Ok(r.tps)
}

fn criterion_8() -> Verdict {
    let single3 = tps(&trend_config("3-clique", 1))?;
    let bundle3 = tps(&trend_config("3-clique", 20))?;
    let single7 = tps(&trend_config("7-clique", 1))?;
    let speedup = bundle3 / single3;
    let loss = 1.0 - single7 / single3;
    let detail = format!(
        "3-clique single {single3:.1} tps, bundle {bundle3:.1} tps (x{speedup:.2}); 7-clique single {single7:.1} tps (loss {:.1}%)",
        loss * 100.0
    );
    if speedup >= BUNDLE_SPEEDUP_MIN && loss < CLIQUE_TPS_LOSS_MAX {
        Ok(detail)
    } else {
        Err(detail)
    }
}

fn criterion_9() -> Verdict {
    let mut details = vec![];
    for cfg in [trend_config("3-clique", 20), trend_config("7-bridge", 20)] {
        let first = run_experiment(&cfg).map_err(|e| e.to_string())?.report.render();
        for i in 1..DETERMINISM_REPEATS {
            let again = run_experiment(&cfg).map_err(|e| e.to_string())?.report.render();
            if again != first {
                return Err(format!("{} repetition {i} differs", cfg.topology));
            }
        }
        details.push(format!("{} x{DETERMINISM_REPEATS}", cfg.topology));
    }
    Ok(format!("byte-identical reports: {}", details.join(", ")))
}

fn main() {
    type Criterion = (&'static str, fn() -> Verdict);
    let criteria: [Criterion; 9] = [
        ("fixture F1 pivot, epoch and order", criterion_1),
        ("streaming equals brute-force oracles", criterion_2),
        ("UTXO double spends and conservation", criterion_3),
        ("gossip message complexity", criterion_4),
        ("convergence on all topologies", criterion_5),
        ("genesis forwarding equivalence", criterion_6),
        ("reversal probability calculator", criterion_7),
        ("throughput trends", criterion_8),
        ("determinism", criterion_9),
    ];
    let mut failed = vec![];
    for (i, (name, f)) in criteria.iter().enumerate() {
        let n = i + 1;
        match f() {
            Ok(d) => println!("criterion {n} PASS {name}: {d}"),
            Err(d) => {
                println!("criterion {n} FAIL {name}: {d}");
                failed.push(n);
            }
        }
    }
    if failed.is_empty() {
        println!("acceptance: all {} criteria pass", criteria.len());
    } else {
        println!("acceptance: failed criteria {failed:?}");
        std::process::exit(1);
    }
}
