//! Benchmark circuit classes, expectation filtering, the relative error of
//! mitigation and volumetric grids over width and depth.

mod generate;
mod metrics;
mod volumetric;

pub use generate::{generate_circuit, sample_filtered_circuits, CircuitClass, CircuitKind, GeneratedCircuit};
pub use metrics::{aggregate_cell, mitigation_errors, relative_error_variance, CellSummary, ErrorTriple};
pub use volumetric::{run_volumetric, CellResult, CircuitRecord, VolumetricGrid};
