//! Criterion benchmarks for the quantization kernels; see `benches/`.
