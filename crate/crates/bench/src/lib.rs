//! Criterion benchmarks for `invsteer`; see `benches/`.
