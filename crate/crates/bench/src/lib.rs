//! Benchmarks built on `memlayout`: an all-pairs n-body simulation and
//! layout-changing copies.

pub mod copybench;
pub mod nbody;
