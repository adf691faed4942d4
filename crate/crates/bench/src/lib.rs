//! Benchmarks for the hotmesh kernels live in `benches/`.
