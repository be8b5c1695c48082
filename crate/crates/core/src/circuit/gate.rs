use std::f64::consts::{FRAC_1_SQRT_2, PI};
use std::fmt;

use nalgebra::{Matrix2, Matrix4};
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = Complex64;

const TAU: f64 = 2.0 * PI;

/// Tolerance on `‖U†U − I‖_max` for raw two-qubit unitaries.
pub const UNITARY_TOL: f64 = 1e-10;

/// Gate kinds without payload. Used for native gate sets and the text format.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum GateName {
    X,
    SX,
    SXdg,
    H,
    S,
    Sdg,
    Z,
    T,
    Tdg,
    Rz,
    U2q,
    CX,
    SWAP,
}

impl GateName {
    pub const ALL: [GateName; 13] = [
        GateName::X,
        GateName::SX,
        GateName::SXdg,
        GateName::H,
        GateName::S,
        GateName::Sdg,
        GateName::Z,
        GateName::T,
        GateName::Tdg,
        GateName::Rz,
        GateName::U2q,
        GateName::CX,
        GateName::SWAP,
    ];

    pub fn as_str(self) -> &'static str {
        match self {
            GateName::X => "X",
            GateName::SX => "SX",
            GateName::SXdg => "SXdg",
            GateName::H => "H",
            GateName::S => "S",
            GateName::Sdg => "Sdg",
            GateName::Z => "Z",
            GateName::T => "T",
            GateName::Tdg => "Tdg",
            GateName::Rz => "Rz",
            GateName::U2q => "U2q",
            GateName::CX => "CX",
            GateName::SWAP => "SWAP",
        }
    }

    pub fn parse(s: &str) -> Option<GateName> {
        GateName::ALL.into_iter().find(|g| g.as_str() == s)
    }

    pub fn arity(self) -> usize {
        match self {
            GateName::U2q | GateName::CX | GateName::SWAP => 2,
            _ => 1,
        }
    }
}

impl fmt::Display for GateName {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

/// Gate kind with payload.
#[derive(Debug, Clone, PartialEq)]
pub enum GateKind {
    X,
    SX,
    /// Inverse of SX; produced by inversion so mirrored layers keep their gate count.
    SXdg,
    H,
    S,
    Sdg,
    Z,
    T,
    Tdg,
    /// `diag(1, e^{iθ})`, θ stored in `[0, 2π)`. Equal to `exp(−iθZ/2)` up
    /// to global phase; the 2π period keeps canonicalised inverses exact.
    Rz(f64),
    /// Raw two-qubit unitary, `qubits[0]` is the most significant factor.
    U2q(Box<Matrix4<C64>>),
    /// `qubits[0]` is the control.
    CX,
    SWAP,
}

impl GateKind {
    pub fn name(&self) -> GateName {
        match self {
            GateKind::X => GateName::X,
            GateKind::SX => GateName::SX,
            GateKind::SXdg => GateName::SXdg,
            GateKind::H => GateName::H,
            GateKind::S => GateName::S,
            GateKind::Sdg => GateName::Sdg,
            GateKind::Z => GateName::Z,
            GateKind::T => GateName::T,
            GateKind::Tdg => GateName::Tdg,
            GateKind::Rz(_) => GateName::Rz,
            GateKind::U2q(_) => GateName::U2q,
            GateKind::CX => GateName::CX,
            GateKind::SWAP => GateName::SWAP,
        }
    }

    pub fn arity(&self) -> usize {
        self.name().arity()
    }
}

/// Map an angle into `[0, 2π)`.
pub fn canonical_angle(theta: f64) -> f64 {
    let a = theta.rem_euclid(TAU);
    // rem_euclid can round up to exactly TAU for tiny negative inputs
    if a >= TAU {
        0.0
    } else {
        a
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Gate {
    pub kind: GateKind,
    pub qubits: Vec<usize>,
}

impl Gate {
    fn one(kind: GateKind, q: usize) -> Gate {
        Gate {
            kind,
            qubits: vec![q],
        }
    }

    pub fn x(q: usize) -> Gate {
        Gate::one(GateKind::X, q)
    }
    pub fn sx(q: usize) -> Gate {
        Gate::one(GateKind::SX, q)
    }
    pub fn sxdg(q: usize) -> Gate {
        Gate::one(GateKind::SXdg, q)
    }
    pub fn h(q: usize) -> Gate {
        Gate::one(GateKind::H, q)
    }
    pub fn s(q: usize) -> Gate {
        Gate::one(GateKind::S, q)
    }
    pub fn sdg(q: usize) -> Gate {
        Gate::one(GateKind::Sdg, q)
    }
    pub fn z(q: usize) -> Gate {
        Gate::one(GateKind::Z, q)
    }
    pub fn t(q: usize) -> Gate {
        Gate::one(GateKind::T, q)
    }
    pub fn tdg(q: usize) -> Gate {
        Gate::one(GateKind::Tdg, q)
    }
    pub fn rz(q: usize, theta: f64) -> Gate {
        Gate::one(GateKind::Rz(canonical_angle(theta)), q)
    }
    pub fn cx(control: usize, target: usize) -> Gate {
        Gate {
            kind: GateKind::CX,
            qubits: vec![control, target],
        }
    }
    pub fn swap(a: usize, b: usize) -> Gate {
        Gate {
            kind: GateKind::SWAP,
            qubits: vec![a, b],
        }
    }

    /// Raw two-qubit unitary; rejects matrices that are not unitary to [`UNITARY_TOL`].
    pub fn u2q(a: usize, b: usize, m: Matrix4<C64>) -> Result<Gate> {
        let dev = max_norm(&(m.adjoint() * m - Matrix4::identity()));
        if !(dev <= UNITARY_TOL) {
            return Err(Error::invalid(format!(
                "U2q matrix not unitary (deviation {dev:e})"
            )));
        }
        Ok(Gate {
            kind: GateKind::U2q(Box::new(m)),
            qubits: vec![a, b],
        })
    }

    pub fn name(&self) -> GateName {
        self.kind.name()
    }

    pub fn is_two_qubit(&self) -> bool {
        self.qubits.len() == 2
    }

    /// The inverse gate.
    pub fn inverse(&self) -> Gate {
        let kind = match &self.kind {
            GateKind::SX => GateKind::SXdg,
            GateKind::SXdg => GateKind::SX,
            GateKind::S => GateKind::Sdg,
            GateKind::Sdg => GateKind::S,
            GateKind::T => GateKind::Tdg,
            GateKind::Tdg => GateKind::T,
            GateKind::Rz(t) => GateKind::Rz(canonical_angle(-t)),
            GateKind::U2q(m) => GateKind::U2q(Box::new(m.adjoint())),
            k => k.clone(),
        };
        Gate {
            kind,
            qubits: self.qubits.clone(),
        }
    }

    /// 2×2 matrix of a single-qubit gate.
    pub fn matrix1(&self) -> Option<Matrix2<C64>> {
        let c = |re: f64, im: f64| C64::new(re, im);
        let o = c(0.0, 0.0);
        let l = c(1.0, 0.0);
        let m = match &self.kind {
            GateKind::X => Matrix2::new(o, l, l, o),
            GateKind::SX => Matrix2::new(c(0.5, 0.5), c(0.5, -0.5), c(0.5, -0.5), c(0.5, 0.5)),
            GateKind::SXdg => {
                Matrix2::new(c(0.5, -0.5), c(0.5, 0.5), c(0.5, 0.5), c(0.5, -0.5))
            }
            GateKind::H => {
                let h = c(FRAC_1_SQRT_2, 0.0);
                Matrix2::new(h, h, h, -h)
            }
            GateKind::S => Matrix2::new(l, o, o, c(0.0, 1.0)),
            GateKind::Sdg => Matrix2::new(l, o, o, c(0.0, -1.0)),
            GateKind::Z => Matrix2::new(l, o, o, -l),
            GateKind::T => Matrix2::new(l, o, o, C64::from_polar(1.0, PI / 4.0)),
            GateKind::Tdg => Matrix2::new(l, o, o, C64::from_polar(1.0, -PI / 4.0)),
            GateKind::Rz(t) => Matrix2::new(l, o, o, C64::from_polar(1.0, *t)),
            _ => return None,
        };
        Some(m)
    }

    /// 4×4 matrix of a two-qubit gate in the basis `|q[0] q[1]⟩`.
    pub fn matrix2(&self) -> Option<Matrix4<C64>> {
        let o = C64::new(0.0, 0.0);
        let l = C64::new(1.0, 0.0);
        let m = match &self.kind {
            GateKind::CX => Matrix4::new(l, o, o, o, o, l, o, o, o, o, o, l, o, o, l, o),
            GateKind::SWAP => Matrix4::new(l, o, o, o, o, o, l, o, o, l, o, o, o, o, o, l),
            GateKind::U2q(m) => **m,
            _ => return None,
        };
        Some(m)
    }
}

pub fn rz_matrix(theta: f64) -> Matrix2<C64> {
    let o = C64::new(0.0, 0.0);
    Matrix2::new(
        C64::from_polar(1.0, -theta / 2.0),
        o,
        o,
        C64::from_polar(1.0, theta / 2.0),
    )
}

pub fn ry_matrix(theta: f64) -> Matrix2<C64> {
    let (s, c) = (theta / 2.0).sin_cos();
    Matrix2::new(
        C64::new(c, 0.0),
        C64::new(-s, 0.0),
        C64::new(s, 0.0),
        C64::new(c, 0.0),
    )
}

/// Largest entry modulus of a complex matrix.
pub fn max_norm<R: nalgebra::Dim, K: nalgebra::Dim, S: nalgebra::RawStorage<C64, R, K>>(
    m: &nalgebra::Matrix<C64, R, K, S>,
) -> f64 {
    m.iter().map(|z| z.norm()).fold(0.0, f64::max)
}

/// Kronecker product `a ⊗ b` with `a` on the more significant qubit.
pub fn kron2(a: &Matrix2<C64>, b: &Matrix2<C64>) -> Matrix4<C64> {
    Matrix4::from_fn(|r, c| a[(r / 2, c / 2)] * b[(r % 2, c % 2)])
}
