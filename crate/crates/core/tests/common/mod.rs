#![allow(dead_code)]

use mitbench::benchmark::{sample_filtered_circuits, CircuitClass, CircuitKind};
use mitbench::circuit::{Circuit, Gate, Pauli, PauliOperator, PauliString};
use mitbench::mitigation::Experiment;
use mitbench::sim::ideal_expectation;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Unmirrored random SU(4) circuit with ideal `|⟨Z…Z⟩|` in `[0.4, 0.6]`.
pub fn filtered_su4(n: usize, d: usize, seed: u64) -> Circuit {
    let class = CircuitClass {
        kind: CircuitKind::RandomSu4,
        mirrored: false,
    };
    let o = PauliOperator::global_z(n);
    sample_filtered_circuits(class, n, d, 1, (0.4, 0.6), &o, seed, 10_000)
        .expect("filtered circuit")
        .remove(0)
        .circuit
}

pub fn experiment(c: Circuit, shots: u64) -> Experiment {
    let n = c.n_qubits;
    Experiment::new(c, PauliOperator::global_z(n), shots).expect("experiment")
}

pub fn ideal_z(c: &Circuit) -> f64 {
    ideal_expectation(c, &PauliOperator::global_z(c.n_qubits)).expect("ideal")
}

/// Random Clifford+T circuit with exactly `d2` CX gates.
pub fn clifford_t(n: usize, d2: usize, d1: usize, seed: u64) -> Circuit {
    let mut r = rng(seed);
    let mut kinds: Vec<bool> = (0..d1).map(|_| false).chain((0..d2).map(|_| true)).collect();
    for i in (1..kinds.len()).rev() {
        kinds.swap(i, r.random_range(0..=i));
    }
    let mut c = Circuit::new(n);
    for two in kinds {
        let g = if two {
            let a = r.random_range(0..n);
            let b = (a + r.random_range(1..n)) % n;
            Gate::cx(a, b)
        } else {
            let q = r.random_range(0..n);
            match r.random_range(0..7) {
                0 => Gate::h(q),
                1 => Gate::s(q),
                2 => Gate::sdg(q),
                3 => Gate::x(q),
                4 => Gate::sx(q),
                5 => Gate::t(q),
                _ => Gate::tdg(q),
            }
        };
        c.push(g).unwrap();
    }
    c
}

/// Uniform non-identity Pauli string.
pub fn random_pauli(n: usize, r: &mut impl Rng) -> PauliString {
    loop {
        let letters: Vec<Pauli> = (0..n)
            .map(|_| [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z][r.random_range(0..4)])
            .collect();
        let p = PauliString::new(letters);
        if p.weight() > 0 {
            return p;
        }
    }
}
