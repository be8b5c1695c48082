//! Benchmarking quantum error mitigation on a noisy circuit simulator.
//!
//! Circuits are built and compiled in [`circuit`], simulated in [`sim`],
//! mitigated with zero-noise extrapolation or Clifford data regression in
//! [`mitigation`] and scored over `(n, d)` grids in [`benchmark`]. Closed-form
//! depolarising predictions live in [`oracles`]; [`config`] and [`report`]
//! handle TOML input and JSON, CSV and SVG output.

pub mod benchmark;
pub mod circuit;
pub mod config;
pub mod error;
pub mod mitigation;
pub mod oracles;
pub mod report;
pub mod sim;

pub use error::{Error, Result};

#[cfg(doctest)]
mod book {
    #[doc = include_str!("../../../book/src/introduction.md")]
    mod introduction {}
    #[doc = include_str!("../../../book/src/circuits.md")]
    mod circuits {}
    #[doc = include_str!("../../../book/src/simulation.md")]
    mod simulation {}
    #[doc = include_str!("../../../book/src/zne.md")]
    mod zne {}
    #[doc = include_str!("../../../book/src/cdr.md")]
    mod cdr {}
    #[doc = include_str!("../../../book/src/task-graphs.md")]
    mod task_graphs {}
    #[doc = include_str!("../../../book/src/benchmarks.md")]
    mod benchmarks {}
    #[doc = include_str!("../../../book/src/oracles.md")]
    mod oracles {}
    #[doc = include_str!("../../../book/src/configuration.md")]
    mod configuration {}
    #[doc = include_str!("../../../book/src/reports.md")]
    mod reports {}
}
