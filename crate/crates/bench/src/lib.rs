//! Criterion benchmarks for `fqc-core`; see `benches/`.
