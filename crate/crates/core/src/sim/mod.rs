//! Ideal and noisy simulation plus finite-shot sampling.
//!
//! Ideal runs use a statevector (up to 10 qubits). Noisy runs evolve a
//! density matrix (up to 7 qubits) and apply, after every gate, either the
//! global depolarising channel or a local depolarising channel on the gate's
//! qubits followed by optional thermal relaxation. Readout confusion acts on
//! the final outcome distribution.

mod backend;
mod counts;
mod noise;
pub mod rng;
mod state;

pub use backend::{Backend, ExactBackend, IdealBackend, SampledBackend};
pub use counts::{estimate_expectation, multinomial, sample_counts, sample_pauli, Counts, EstimatorValue};
pub use noise::{NoiseMode, NoiseModel, Thermal};
pub use state::{
    apply_readout, evolve_density, ideal_expectation, measurement_rotation, noisy_expectation,
    outcome_probabilities, parity_expectation, statevector, DensityMatrix, MAX_IDEAL_QUBITS,
    MAX_NOISY_QUBITS,
};
