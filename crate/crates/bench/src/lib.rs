//! Criterion benchmarks for the modelling and identification pipeline live
//! under `benches/`.
