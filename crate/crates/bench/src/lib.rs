//! Criterion benchmarks for the MGRIT kernels; see `benches/`.
