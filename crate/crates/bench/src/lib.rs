//! Criterion benchmarks for `textarium-core`; see `benches/core.rs`.
