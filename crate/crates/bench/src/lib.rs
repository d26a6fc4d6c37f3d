//! Criterion benchmarks for the streaming graph maintenance; see `benches/`.
