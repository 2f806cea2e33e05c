//! Criterion benchmarks for the integrator and the periodic-orbit solvers; see `benches/solvers.rs`.
