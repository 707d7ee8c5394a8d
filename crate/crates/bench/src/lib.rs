//! Benchmark-only crate; see `benches/dimensions.rs`.
