//! Criterion benchmarks for the estimator and the scenario driver; see
//! `benches/estimator.rs`.
