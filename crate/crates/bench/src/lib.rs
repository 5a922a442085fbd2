//! Criterion benchmarks for `evodyn`; see `benches/`.
