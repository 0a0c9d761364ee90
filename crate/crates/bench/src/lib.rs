//! Criterion benchmarks for the rotcool kernels live in `benches/`.
