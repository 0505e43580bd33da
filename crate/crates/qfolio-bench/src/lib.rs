//! Benchmark-only crate; the suites live in `benches/kernels.rs`.
