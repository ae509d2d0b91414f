//! Criterion benchmarks for the holonomic kernels; see `benches/kernels.rs`.
