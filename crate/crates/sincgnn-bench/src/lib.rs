//! Criterion benchmarks for sincgnn; run them with `cargo bench -p sincgnn-bench`.
