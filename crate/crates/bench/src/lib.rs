//! Criterion benchmarks for network generation, structural metrics and the
//! simulation engine. Run with `cargo bench -p consensus-bench`.
