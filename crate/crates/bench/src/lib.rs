//! Criterion benchmarks of the PDE step, the limit integrator and the
//! particle step; see `benches/solvers.rs`. Run with `cargo bench -p nlfp-bench`.
