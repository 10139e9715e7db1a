//! Criterion benchmarks for the resonance pipeline live in `benches/`; this
//! crate has no library code of its own.
