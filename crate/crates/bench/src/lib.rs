//! Criterion benchmarks for `ssp-core`; see `benches/`.
