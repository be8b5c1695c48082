//! Gate-level circuits, Pauli observables, device targets, synthesis and
//! compilation.
//!
//! Qubit 0 is the most significant bit of every basis index and the first
//! character of every bitstring.

pub mod compile;
mod gate;
pub(crate) mod kernel;
mod pauli;
pub mod synth;
mod target;
pub mod text;

pub use compile::{compile, Compiled};
pub use gate::{canonical_angle, kron2, max_norm, ry_matrix, rz_matrix, Gate, GateKind, GateName, C64, UNITARY_TOL};
pub use pauli::{Pauli, PauliOperator, PauliString};
pub use synth::{build_pauli_gadget, decompose_su4};
pub use target::Target;

use nalgebra::DMatrix;

use crate::error::{Error, Result};

/// Largest width accepted by [`unitary_of`].
pub const MAX_UNITARY_QUBITS: usize = 10;

#[derive(Debug, Clone, PartialEq)]
pub struct Circuit {
    pub n_qubits: usize,
    pub gates: Vec<Gate>,
    /// Terminal computational-basis measurement of every qubit.
    pub measured: bool,
}

impl Circuit {
    pub fn new(n_qubits: usize) -> Circuit {
        Circuit {
            n_qubits,
            gates: Vec::new(),
            measured: false,
        }
    }

    pub fn from_gates(n_qubits: usize, gates: Vec<Gate>) -> Result<Circuit> {
        let c = Circuit {
            n_qubits,
            gates,
            measured: false,
        };
        c.validate()?;
        Ok(c)
    }

    /// Append a gate after checking its qubits.
    pub fn push(&mut self, g: Gate) -> Result<()> {
        check_gate(&g, self.n_qubits)?;
        self.gates.push(g);
        Ok(())
    }

    /// Append every gate of `other`, which must have the same width.
    pub fn extend(&mut self, other: &Circuit) -> Result<()> {
        if other.n_qubits != self.n_qubits {
            return Err(Error::invalid(format!(
                "cannot append a {}-qubit circuit to a {}-qubit circuit",
                other.n_qubits, self.n_qubits
            )));
        }
        self.gates.extend(other.gates.iter().cloned());
        Ok(())
    }

    pub fn measure_all(mut self) -> Circuit {
        self.measured = true;
        self
    }

    pub fn without_measurement(&self) -> Circuit {
        Circuit {
            measured: false,
            ..self.clone()
        }
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_qubits == 0 {
            return Err(Error::invalid("circuit width must be positive"));
        }
        self.gates.iter().try_for_each(|g| check_gate(g, self.n_qubits))
    }

    pub fn len(&self) -> usize {
        self.gates.len()
    }

    pub fn is_empty(&self) -> bool {
        self.gates.is_empty()
    }

    /// `(single-qubit gate count, two-qubit gate count)`.
    pub fn gate_counts(&self) -> (usize, usize) {
        let d2 = self.gates.iter().filter(|g| g.is_two_qubit()).count();
        (self.gates.len() - d2, d2)
    }

    pub fn count(&self, name: GateName) -> usize {
        self.gates.iter().filter(|g| g.name() == name).count()
    }
}

fn check_gate(g: &Gate, n: usize) -> Result<()> {
    if g.qubits.len() != g.kind.arity() {
        return Err(Error::invalid(format!(
            "{} expects {} qubit(s), got {:?}",
            g.name(),
            g.kind.arity(),
            g.qubits
        )));
    }
    if let Some(&q) = g.qubits.iter().find(|&&q| q >= n) {
        return Err(Error::invalid(format!(
            "{} acts on qubit {q} outside width {n}",
            g.name()
        )));
    }
    if g.qubits.len() == 2 && g.qubits[0] == g.qubits[1] {
        return Err(Error::invalid(format!(
            "{} acts twice on qubit {}",
            g.name(),
            g.qubits[0]
        )));
    }
    Ok(())
}

/// Gates reversed and individually inverted.
pub fn invert(c: &Circuit) -> Result<Circuit> {
    if c.measured {
        return Err(Error::invalid("cannot invert a measured circuit"));
    }
    Ok(Circuit {
        n_qubits: c.n_qubits,
        gates: c.gates.iter().rev().map(Gate::inverse).collect(),
        measured: false,
    })
}

/// Apply one gate to a state vector of width `n`.
pub fn apply_gate(state: &mut [C64], n: usize, g: &Gate) {
    match &g.kind {
        GateKind::CX => kernel::apply_cx(state, n, g.qubits[0], g.qubits[1]),
        _ if g.qubits.len() == 1 => {
            kernel::apply_1q(state, n, g.qubits[0], &g.matrix1().expect("single-qubit gate"))
        }
        _ => kernel::apply_2q(
            state,
            n,
            g.qubits[0],
            g.qubits[1],
            &g.matrix2().expect("two-qubit gate"),
        ),
    }
}

/// Dense unitary of an unmeasured circuit.
pub fn unitary_of(c: &Circuit) -> Result<DMatrix<C64>> {
    if c.measured {
        return Err(Error::invalid("unitary_of requires an unmeasured circuit"));
    }
    if c.n_qubits > MAX_UNITARY_QUBITS {
        return Err(Error::Resource(format!(
            "unitary_of supports at most {MAX_UNITARY_QUBITS} qubits, got {}",
            c.n_qubits
        )));
    }
    c.validate()?;
    let dim = 1usize << c.n_qubits;
    let mut cols = Vec::with_capacity(dim * dim);
    let mut col = vec![C64::new(0.0, 0.0); dim];
    for j in 0..dim {
        col.fill(C64::new(0.0, 0.0));
        col[j] = C64::new(1.0, 0.0);
        for g in &c.gates {
            apply_gate(&mut col, c.n_qubits, g);
        }
        cols.extend_from_slice(&col);
    }
    Ok(DMatrix::from_vec(dim, dim, cols))
}

/// Largest elementwise deviation between `a` and `b` after aligning `b`'s
/// global phase to `a`.
pub fn phase_distance(a: &DMatrix<C64>, b: &DMatrix<C64>) -> f64 {
    assert_eq!(a.shape(), b.shape());
    let overlap: C64 = a.iter().zip(b.iter()).map(|(x, y)| x.conj() * y).sum();
    let phase = if overlap.norm() > 0.0 {
        overlap.conj() / overlap.norm()
    } else {
        C64::new(1.0, 0.0)
    };
    a.iter()
        .zip(b.iter())
        .map(|(x, y)| (x - y * phase).norm())
        .fold(0.0, f64::max)
}

pub fn equal_up_to_phase(a: &DMatrix<C64>, b: &DMatrix<C64>, tol: f64) -> bool {
    phase_distance(a, b) <= tol
}

#[cfg(test)]
pub(crate) mod tests {
    use super::*;
    use proptest::prelude::*;

    fn c(re: f64) -> C64 {
        C64::new(re, 0.0)
    }

    #[test]
    fn empty_circuit_is_identity() {
        let u = unitary_of(&Circuit::new(2)).unwrap();
        assert_eq!(u, DMatrix::identity(4, 4));
    }

    #[test]
    fn x_matrix() {
        let u = unitary_of(&Circuit::from_gates(1, vec![Gate::x(0)]).unwrap()).unwrap();
        assert_eq!(u, DMatrix::from_row_slice(2, 2, &[c(0.), c(1.), c(1.), c(0.)]));
    }

    #[test]
    fn cx_matrix() {
        let u = unitary_of(&Circuit::from_gates(2, vec![Gate::cx(0, 1)]).unwrap()).unwrap();
        let o = c(0.);
        let l = c(1.);
        let expected = DMatrix::from_row_slice(
            4,
            4,
            &[l, o, o, o, o, l, o, o, o, o, o, l, o, o, l, o],
        );
        assert_eq!(u, expected);
    }

    #[test]
    fn reversed_cx_matrix() {
        let u = unitary_of(&Circuit::from_gates(2, vec![Gate::cx(1, 0)]).unwrap()).unwrap();
        // |01> -> |11>
        assert_eq!(u[(3, 1)], c(1.));
        assert_eq!(u[(1, 3)], c(1.));
    }

    #[test]
    fn measured_rejected() {
        let m = Circuit::new(1).measure_all();
        assert!(unitary_of(&m).is_err());
        assert!(invert(&m).is_err());
    }

    #[test]
    fn too_wide_is_resource_error() {
        assert!(matches!(unitary_of(&Circuit::new(11)), Err(Error::Resource(_))));
    }

    #[test]
    fn invalid_qubits_rejected() {
        assert!(Circuit::from_gates(2, vec![Gate::cx(0, 2)]).is_err());
        assert!(Circuit::from_gates(2, vec![Gate::cx(1, 1)]).is_err());
    }

    #[test]
    fn invert_examples() {
        let empty = Circuit::new(3);
        assert_eq!(invert(&empty).unwrap(), empty);
        let c = Circuit::from_gates(1, vec![Gate::rz(0, 0.7)]).unwrap();
        let inv = invert(&c).unwrap();
        assert_eq!(inv.gates, vec![Gate::rz(0, -0.7)]);
    }

    pub(crate) fn arb_gate(n: usize) -> impl Strategy<Value = Gate> {
        let one = (0..n, 0usize..10, 0.0..std::f64::consts::TAU).prop_map(|(q, k, t)| match k {
            0 => Gate::x(q),
            1 => Gate::sx(q),
            2 => Gate::h(q),
            3 => Gate::s(q),
            4 => Gate::sdg(q),
            5 => Gate::z(q),
            6 => Gate::t(q),
            7 => Gate::tdg(q),
            8 => Gate::sxdg(q),
            _ => Gate::rz(q, t),
        });
        let two = (0..n, 1..n.max(2), any::<bool>()).prop_map(move |(a, off, swap)| {
            let b = (a + off) % n;
            if swap {
                Gate::swap(a, b)
            } else {
                Gate::cx(a, b)
            }
        });
        if n >= 2 {
            prop_oneof![3 => one, 1 => two].boxed()
        } else {
            one.boxed()
        }
    }

    pub(crate) fn arb_circuit(max_n: usize, max_gates: usize) -> impl Strategy<Value = Circuit> {
        (1..=max_n).prop_flat_map(move |n| {
            proptest::collection::vec(arb_gate(n), 0..=max_gates)
                .prop_map(move |gates| Circuit::from_gates(n, gates).unwrap())
        })
    }

    proptest! {
        #[test]
        fn invert_round_trip(c in arb_circuit(4, 20)) {
            let mut both = c.clone();
            both.extend(&invert(&c).unwrap()).unwrap();
            let u = unitary_of(&both).unwrap();
            let dim = 1 << c.n_qubits;
            prop_assert!(max_norm(&(u - DMatrix::<C64>::identity(dim, dim))) <= 1e-9);
        }
    }

    #[test]
    fn random_three_qubit_inverse() {
        use rand::{Rng, SeedableRng};
        let mut rng = rand_chacha::ChaCha8Rng::seed_from_u64(3);
        let mut c = Circuit::new(3);
        for _ in 0..10 {
            let q = rng.random_range(0..3);
            let g = match rng.random_range(0..4) {
                0 => Gate::h(q),
                1 => Gate::rz(q, rng.random_range(0.0..6.0)),
                2 => Gate::cx(q, (q + 1) % 3),
                _ => Gate::t(q),
            };
            c.push(g).unwrap();
        }
        let prod = unitary_of(&invert(&c).unwrap()).unwrap() * unitary_of(&c).unwrap();
        assert!(max_norm(&(prod - DMatrix::identity(8, 8))) <= 1e-10);
    }
}
