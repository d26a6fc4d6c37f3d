use std::hint::black_box;

use criterion::{criterion_group, criterion_main, BatchSize, BenchmarkId, Criterion};
use streamnet::consensus::{total_order_with, DiffSetMode, Scores};
use streamnet::dag::oracle;
use streamnet::experiment::{run_experiment, ExperimentConfig};
use streamnet::fixtures::{random_dag, random_headers, DagShape};
use streamnet::streaming::Combiner;
use streamnet::{ScoreMaps, StreamingDag, TieBreak};

const SIZES: [usize; 3] = [100, 400, 1_600];

/// Incremental score maintenance against one full oracle recomputation.
fn scores(c: &mut Criterion) {
    let mut g = c.benchmark_group("scores");
    g.sample_size(10);
    for n in SIZES {
        let (genesis, headers) = random_headers(7, n, DagShape::Narrow);
        g.bench_with_input(BenchmarkId::new("streaming_insert", n), &n, |b, _| {
            b.iter_batched(
                || (genesis.clone(), headers.clone()),
                |(genesis, headers)| {
                    let mut s = StreamingDag::new(genesis, 0, Combiner::Max);
                    for h in headers {
                        s.insert(h).unwrap();
                    }
                    s
                },
                BatchSize::SmallInput,
            )
        });
        if n <= 400 {
            let dag = random_dag(7, n, DagShape::Narrow);
            g.bench_with_input(BenchmarkId::new("oracle_all_scores", n), &n, |b, _| {
                b.iter(|| {
                    dag.ids()
                        .map(|id| oracle::score_oracle(&dag, &id).unwrap())
                        .sum::<u64>()
                })
            });
        }
    }
    g.finish();
}

fn order(c: &mut Criterion) {
    let mut g = c.benchmark_group("total_order");
    g.sample_size(10);
    for n in SIZES {
        for shape in [DagShape::Narrow, DagShape::Wide] {
            let dag = random_dag(11, n, shape);
            let maps = ScoreMaps::build(&dag);
            for (label, mode) in [("streaming", DiffSetMode::Streaming), ("oracle", DiffSetMode::Oracle)] {
                let id = BenchmarkId::new(format!("{label}_{shape:?}"), n);
                g.bench_with_input(id, &n, |b, _| {
                    b.iter(|| total_order_with(black_box(&dag), Scores::Streamed(&maps), mode, TieBreak::SmallerId))
                });
            }
        }
    }
    g.finish();
}

fn experiment(c: &mut Criterion) {
    let mut g = c.benchmark_group("experiment");
    g.sample_size(10);
    for bundle_size in [1, 20] {
        let cfg = ExperimentConfig {
            txn_count: 1_000,
            bundle_size,
            ..Default::default()
        };
        g.bench_with_input(BenchmarkId::new("3-clique_1000txns_bundle", bundle_size), &cfg, |b, cfg| {
            b.iter(|| run_experiment(cfg).unwrap().report)
        });
    }
    g.finish();
}

criterion_group!(benches, scores, order, experiment);
criterion_main!(benches);
