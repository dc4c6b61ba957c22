//! Criterion benchmarks for the divergence, sampling and permutation kernels; see `benches/`.
