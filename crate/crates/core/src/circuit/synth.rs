//! Pauli gadgets, single-qubit Euler rebasing and the KAK decomposition of
//! two-qubit unitaries into at most three CX gates.

use std::f64::consts::{FRAC_PI_2, FRAC_PI_4, PI};

use nalgebra::{Matrix2, Matrix4, SymmetricEigen, Vector4};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

use super::gate::{canonical_angle, kron2, max_norm, ry_matrix, rz_matrix, Gate, C64, UNITARY_TOL};
use super::pauli::{Pauli, PauliString};
use super::Circuit;
use crate::error::{Error, Result};

// ==== Pauli gadgets ====

/// Circuit implementing `exp(i·angle·P)` up to global phase.
///
/// Each non-identity letter is rotated onto Z (`X` by `H`, `Y` by `Sdg·H`),
/// a CX ladder accumulates the parity on the last support qubit, `Rz(−2·angle)`
/// is applied there and everything is undone in reverse.
pub fn build_pauli_gadget(p: &PauliString, angle: f64) -> Result<Circuit> {
    if p.is_empty() {
        return Err(Error::invalid("Pauli gadget on a zero-width string"));
    }
    let mut c = Circuit::new(p.len());
    let support = p.support();
    let theta = canonical_angle(-2.0 * angle);
    if support.is_empty() || is_zero_angle(theta) {
        return Ok(c);
    }
    for &q in &support {
        match p.letters[q] {
            Pauli::X => c.gates.push(Gate::h(q)),
            Pauli::Y => {
                c.gates.push(Gate::sdg(q));
                c.gates.push(Gate::h(q));
            }
            _ => {}
        }
    }
    for w in support.windows(2) {
        c.gates.push(Gate::cx(w[0], w[1]));
    }
    let last = *support.last().expect("non-empty support");
    c.gates.push(Gate::rz(last, theta));
    for w in support.windows(2).rev() {
        c.gates.push(Gate::cx(w[0], w[1]));
    }
    for &q in &support {
        match p.letters[q] {
            Pauli::X => c.gates.push(Gate::h(q)),
            Pauli::Y => {
                c.gates.push(Gate::h(q));
                c.gates.push(Gate::s(q));
            }
            _ => {}
        }
    }
    Ok(c)
}

// ==== Single-qubit rebasing ====

/// Target basis for single-qubit rebasing.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum EulerBasis {
    /// `Rz · SX · Rz · SX · Rz`
    ZSX,
    /// `Rz · H · Rz · H · Rz`
    ZH,
}

const ANGLE_EPS: f64 = 1e-12;

fn is_zero_angle(theta: f64) -> bool {
    let a = canonical_angle(theta);
    a < ANGLE_EPS || 2.0 * PI - a < ANGLE_EPS
}

/// ZYZ angles `(θ, φ, λ)` with `U ≅ Rz(φ)·Ry(θ)·Rz(λ)`.
pub fn zyz_angles(u: &Matrix2<C64>) -> (f64, f64, f64) {
    let det = u.determinant();
    let v = u / det.sqrt();
    let theta = 2.0 * v[(1, 0)].norm().atan2(v[(0, 0)].norm());
    let arg = |z: C64| if z.norm() > 1e-14 { z.arg() } else { 0.0 };
    let (a11, a10) = (arg(v[(1, 1)]), arg(v[(1, 0)]));
    (theta, a11 + a10, a11 - a10)
}

fn push_rz(out: &mut Vec<Gate>, q: usize, theta: f64) {
    if !is_zero_angle(theta) {
        out.push(Gate::rz(q, theta));
    }
}

/// Gates on qubit `q` reproducing `u` up to global phase.
pub fn euler_1q(u: &Matrix2<C64>, q: usize, basis: EulerBasis) -> Vec<Gate> {
    let (theta, phi, lam) = zyz_angles(u);
    let mut out = Vec::new();
    if theta.abs() < ANGLE_EPS {
        push_rz(&mut out, q, phi + lam);
        return out;
    }
    match basis {
        EulerBasis::ZSX => {
            if (theta - FRAC_PI_2).abs() < ANGLE_EPS {
                push_rz(&mut out, q, lam - FRAC_PI_2);
                out.push(Gate::sx(q));
                push_rz(&mut out, q, phi + FRAC_PI_2);
            } else {
                push_rz(&mut out, q, lam);
                out.push(Gate::sx(q));
                push_rz(&mut out, q, theta + PI);
                out.push(Gate::sx(q));
                push_rz(&mut out, q, phi + PI);
            }
        }
        EulerBasis::ZH => {
            push_rz(&mut out, q, lam - FRAC_PI_2);
            out.push(Gate::h(q));
            push_rz(&mut out, q, theta);
            out.push(Gate::h(q));
            push_rz(&mut out, q, phi + FRAC_PI_2);
        }
    }
    out
}

// ==== Two-qubit KAK ====

fn magic() -> Matrix4<C64> {
    let s = std::f64::consts::FRAC_1_SQRT_2;
    let r = |x: f64| C64::new(x * s, 0.0);
    let i = |x: f64| C64::new(0.0, x * s);
    let o = C64::new(0.0, 0.0);
    Matrix4::new(
        r(1.0), i(1.0), o, o, //
        o, o, i(1.0), r(1.0), //
        o, o, i(1.0), r(-1.0), //
        r(1.0), i(-1.0), o, o,
    )
}

/// Diagonal of `B†(P⊗P)B` for `P = X, Y, Z`; each entry is ±1.
fn magic_signs() -> [Vector4<f64>; 3] {
    let b = magic();
    [Pauli::X, Pauli::Y, Pauli::Z].map(|p| {
        let pp = kron2(&p.matrix(), &p.matrix());
        let d = b.adjoint() * pp * b;
        Vector4::from_fn(|k, _| d[(k, k)].re)
    })
}

/// `exp(i(a·XX + b·YY + c·ZZ))`.
pub fn canonical_gate(a: f64, b: f64, c: f64) -> Matrix4<C64> {
    let m = magic();
    let [x, y, z] = magic_signs();
    let d = Matrix4::from_diagonal(&Vector4::from_fn(|k, _| {
        C64::from_polar(1.0, a * x[k] + b * y[k] + c * z[k])
    }));
    m * d * m.adjoint()
}

/// Split a local two-qubit unitary into `a ⊗ b` with `b ∈ SU(2)`.
pub fn split_local(m: &Matrix4<C64>) -> (Matrix2<C64>, Matrix2<C64>) {
    let block = |i: usize, j: usize| m.fixed_view::<2, 2>(2 * i, 2 * j).into_owned();
    let (bi, bj) = [(0, 0), (0, 1), (1, 0), (1, 1)]
        .into_iter()
        .max_by(|&(i, j), &(k, l)| {
            block(i, j)
                .norm_squared()
                .total_cmp(&block(k, l).norm_squared())
        })
        .expect("four blocks");
    let blk = block(bi, bj);
    let b = blk / blk.determinant().sqrt();
    let a = Matrix2::from_fn(|i, j| (b.adjoint() * block(i, j)).trace() / 2.0);
    (a, b)
}

/// KAK factors `U ≅ (A1⊗B1)·Can(a,b,c)·(A2⊗B2)`.
#[derive(Debug, Clone)]
pub struct Kak {
    pub k1: Matrix4<C64>,
    pub k2: Matrix4<C64>,
    pub a: f64,
    pub b: f64,
    pub c: f64,
}

fn is_unitary4(u: &Matrix4<C64>) -> bool {
    max_norm(&(u.adjoint() * u - Matrix4::identity())) <= UNITARY_TOL
}

/// Magic-basis KAK decomposition.
pub fn kak(u: &Matrix4<C64>) -> Result<Kak> {
    if !is_unitary4(u) {
        return Err(Error::invalid("decompose_su4 requires a unitary matrix"));
    }
    let det = u.determinant();
    let su = u / C64::from_polar(1.0, det.arg() / 4.0);
    let bm = magic();
    let up = bm.adjoint() * su * bm;
    let m2 = up.transpose() * up;
    let re = m2.map(|z| z.re);
    let im = m2.map(|z| z.im);

    // Real and imaginary parts of M2 commute; a generic real combination
    // shares their eigenvectors.
    let mut rng = ChaCha8Rng::seed_from_u64(0x6b616b);
    let mut found = None;
    for _ in 0..100 {
        let (c1, c2): (f64, f64) = (rng.random_range(-1.0..1.0), rng.random_range(-1.0..1.0));
        let eig = SymmetricEigen::new(re * c1 + im * c2);
        let mut p = eig.eigenvectors;
        if p.determinant() < 0.0 {
            for r in 0..4 {
                p[(r, 3)] = -p[(r, 3)];
            }
        }
        let pc = p.map(|x| C64::new(x, 0.0));
        let dm = pc.transpose() * m2 * pc;
        let off = Matrix4::from_fn(|r, c| if r == c { C64::new(0.0, 0.0) } else { dm[(r, c)] });
        if max_norm(&off) < 1e-9 {
            found = Some((pc, dm.diagonal()));
            break;
        }
    }
    let (p, dvals) = found.ok_or_else(|| Error::invalid("failed to diagonalize M2"))?;
    let mut d = Vector4::from_fn(|k, _| -dvals[k].arg() / 2.0);
    d[3] = -d[0] - d[1] - d[2];
    let phase = Matrix4::from_diagonal(&d.map(|x| C64::from_polar(1.0, x)));
    let o1 = up * p * phase;
    let k1 = bm * o1 * bm.adjoint();
    let k2 = bm * p.transpose() * bm.adjoint();

    // −d_k = a·x_k + b·y_k + c·z_k + φ
    let [x, y, z] = magic_signs();
    let sys = nalgebra::Matrix4::<f64>::from_columns(&[x, y, z, Vector4::repeat(1.0)]);
    let sol = sys
        .lu()
        .solve(&(-d))
        .ok_or_else(|| Error::invalid("singular magic-basis system"))?;
    Ok(Kak {
        k1,
        k2,
        a: sol[0],
        b: sol[1],
        c: sol[2],
    })
}

enum Step {
    Local(Matrix4<C64>),
    Cx(usize, usize),
}

/// Residue of `x` modulo `π/2`, folded into `[0, π/4]` distance terms.
fn near_multiple(x: f64, offset: f64) -> bool {
    let r = (x - offset).rem_euclid(FRAC_PI_2);
    r < 1e-9 || FRAC_PI_2 - r < 1e-9
}

/// Decompose a two-qubit unitary into at most three CX gates plus
/// `Rz`/`SX` single-qubit gates, exact up to global phase.
pub fn decompose_su4(u: &Matrix4<C64>) -> Result<Circuit> {
    decompose_su4_with(u, EulerBasis::ZSX)
}

pub fn decompose_su4_with(u: &Matrix4<C64>, basis: EulerBasis) -> Result<Circuit> {
    let k = kak(u)?;
    let coords = [k.a, k.b, k.c];
    let id2 = Matrix2::<C64>::identity();
    let h = Gate::h(0).matrix1().expect("H");
    let steps = if coords.iter().all(|&v| near_multiple(v, 0.0)) {
        let det = u.determinant();
        vec![Step::Local(u / C64::from_polar(1.0, det.arg() / 4.0))]
    } else if let Some(j) = single_quarter(&coords) {
        let p = [Pauli::X, Pauli::Y, Pauli::Z][j];
        let w = match p {
            Pauli::X => h,
            Pauli::Y => Gate::s(0).matrix1().expect("S") * h,
            _ => id2,
        };
        let mut rest = coords;
        rest[j] -= FRAC_PI_4;
        let lrest = canonical_gate(rest[0], rest[1], rest[2]);
        let ww = kron2(&w, &w);
        let rzz = kron2(&rz_matrix(-FRAC_PI_2), &rz_matrix(-FRAC_PI_2));
        let ih = kron2(&id2, &h);
        vec![
            Step::Local(ih * ww.adjoint() * lrest * k.k2),
            Step::Cx(0, 1),
            Step::Local(k.k1 * ww * rzz * ih),
        ]
    } else {
        let (a, b, c) = (k.a, k.b, k.c);
        let t1 = FRAC_PI_2 - 2.0 * c;
        let t2 = 2.0 * a - FRAC_PI_2;
        let t3 = FRAC_PI_2 - 2.0 * b;
        vec![
            Step::Local(kron2(&id2, &rz_matrix(-FRAC_PI_2)) * k.k2),
            Step::Cx(1, 0),
            Step::Local(kron2(&rz_matrix(t1), &ry_matrix(t2))),
            Step::Cx(0, 1),
            Step::Local(kron2(&id2, &ry_matrix(t3))),
            Step::Cx(1, 0),
            Step::Local(k.k1 * kron2(&rz_matrix(FRAC_PI_2), &id2)),
        ]
    };
    let mut c = Circuit::new(2);
    for s in steps {
        match s {
            Step::Cx(ctl, tgt) => c.gates.push(Gate::cx(ctl, tgt)),
            Step::Local(m) => {
                let (a, b) = split_local(&m);
                c.gates.extend(euler_1q(&a, 0, basis));
                c.gates.extend(euler_1q(&b, 1, basis));
            }
        }
    }
    Ok(c)
}

/// Index of the only coordinate that is `π/4` modulo `π/2` when the other two
/// are multiples of `π/2`.
fn single_quarter(coords: &[f64; 3]) -> Option<usize> {
    let quarter: Vec<usize> = (0..3)
        .filter(|&j| near_multiple(coords[j], FRAC_PI_4))
        .collect();
    let zero = (0..3).filter(|&j| near_multiple(coords[j], 0.0)).count();
    (quarter.len() == 1 && zero == 2).then(|| quarter[0])
}

/// Haar-random element of U(4) from the QR decomposition of a complex
/// Ginibre matrix with the phase of `R`'s diagonal absorbed.
pub fn haar_unitary4<R: Rng + ?Sized>(rng: &mut R) -> Matrix4<C64> {
    use rand_distr::StandardNormal;
    let g = Matrix4::from_fn(|_, _| {
        C64::new(rng.sample(StandardNormal), rng.sample(StandardNormal))
    });
    let qr = g.qr();
    let (q, r) = (qr.q(), qr.r());
    let ph = Matrix4::from_diagonal(&Vector4::from_fn(|k, _| {
        let d = r[(k, k)];
        if d.norm() > 0.0 {
            d / d.norm()
        } else {
            C64::new(1.0, 0.0)
        }
    }));
    q * ph
}

pub(crate) fn is_clifford_angle(theta: f64) -> bool {
    near_multiple_tol(theta, 1e-9)
}

fn near_multiple_tol(x: f64, tol: f64) -> bool {
    let r = x.rem_euclid(FRAC_PI_2);
    r < tol || FRAC_PI_2 - r < tol
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::{phase_distance, unitary_of, GateName, PauliString};
    use nalgebra::DMatrix;

    fn to_dyn4(m: &Matrix4<C64>) -> DMatrix<C64> {
        DMatrix::from_fn(4, 4, |r, c| m[(r, c)])
    }

    fn to_dyn2(m: &Matrix2<C64>) -> DMatrix<C64> {
        DMatrix::from_fn(2, 2, |r, c| m[(r, c)])
    }

    /// Dense `exp(iαP)` from the eigen-decomposition `P² = I`.
    fn pauli_exp(p: &PauliString, alpha: f64) -> DMatrix<C64> {
        let m = p.matrix();
        let dim = m.nrows();
        DMatrix::<C64>::identity(dim, dim) * C64::new(alpha.cos(), 0.0)
            + m * C64::new(0.0, alpha.sin())
    }

    #[test]
    fn gadget_zero_angle_is_empty() {
        let c = build_pauli_gadget(&"Z".parse().unwrap(), 0.0).unwrap();
        assert!(c.is_empty());
    }

    #[test]
    fn gadget_zero_width_errors() {
        assert!(build_pauli_gadget(&PauliString::new(vec![]), 0.3).is_err());
    }

    #[test]
    fn gadget_x_quarter_pi() {
        let c = build_pauli_gadget(&"X".parse().unwrap(), FRAC_PI_4).unwrap();
        let u = unitary_of(&c).unwrap();
        // ⟨0|U†ZU|0⟩ = |U00|² − |U10|²
        let z = u[(0, 0)].norm_sqr() - u[(1, 0)].norm_sqr();
        assert!(z.abs() < 1e-12);
    }

    #[test]
    fn gadget_zz_matches_exponential() {
        let p: PauliString = "ZZ".parse().unwrap();
        let u = unitary_of(&build_pauli_gadget(&p, 0.3).unwrap()).unwrap();
        assert!(phase_distance(&pauli_exp(&p, 0.3), &u) <= 1e-10);
    }

    #[test]
    fn gadget_all_two_letter_strings() {
        let letters = ['I', 'X', 'Y', 'Z'];
        for a in letters {
            for b in letters {
                let p: PauliString = format!("{a}{b}").parse().unwrap();
                for alpha in [0.0, 0.3, FRAC_PI_2, PI] {
                    let c = build_pauli_gadget(&p, alpha).unwrap();
                    let allowed = [GateName::H, GateName::S, GateName::Sdg, GateName::CX, GateName::Rz];
                    assert!(c.gates.iter().all(|g| allowed.contains(&g.name())));
                    let d = phase_distance(&pauli_exp(&p, alpha), &unitary_of(&c).unwrap());
                    assert!(d <= 1e-10, "{p} {alpha}: {d}");
                }
            }
        }
    }

    #[test]
    fn euler_bases_reproduce_random_unitaries() {
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        let named = ["X", "SX", "SXdg", "H", "S", "Sdg", "Z", "T", "Tdg"];
        let mut cases: Vec<Matrix2<C64>> = named
            .iter()
            .map(|n| {
                let g = crate::circuit::text::gate_from_name(n, 0).unwrap();
                g.matrix1().unwrap()
            })
            .collect();
        for _ in 0..50 {
            let (a, b, c) = (
                rng.random_range(0.0..6.3),
                rng.random_range(0.0..3.2),
                rng.random_range(0.0..6.3),
            );
            cases.push(rz_matrix(a) * ry_matrix(b) * rz_matrix(c) * C64::from_polar(1.0, a - c));
        }
        cases.push(ry_matrix(FRAC_PI_2) * rz_matrix(0.4));
        for basis in [EulerBasis::ZSX, EulerBasis::ZH] {
            for m in &cases {
                let c = Circuit {
                    n_qubits: 1,
                    gates: euler_1q(m, 0, basis),
                    measured: false,
                };
                let d = phase_distance(&to_dyn2(m), &unitary_of(&c).unwrap());
                assert!(d < 1e-10, "{basis:?}: {d}");
            }
        }
    }

    #[test]
    fn hadamard_rebases_to_three_gates() {
        let h = Gate::h(0).matrix1().unwrap();
        let gates = euler_1q(&h, 0, EulerBasis::ZSX);
        assert_eq!(gates.len(), 3);
    }

    #[test]
    fn canonical_gate_matches_exponential() {
        let xx: PauliString = "XX".parse().unwrap();
        let yy: PauliString = "YY".parse().unwrap();
        let zz: PauliString = "ZZ".parse().unwrap();
        let (a, b, c) = (0.3, -0.2, 0.9);
        let dense = pauli_exp(&xx, a) * pauli_exp(&yy, b) * pauli_exp(&zz, c);
        assert!(phase_distance(&dense, &to_dyn4(&canonical_gate(a, b, c))) < 1e-12);
    }

    fn check_decomposition(u: &Matrix4<C64>, tol: f64) -> Circuit {
        let c = decompose_su4(u).unwrap();
        assert!(c.count(GateName::CX) <= 3);
        let allowed = [GateName::CX, GateName::Rz, GateName::SX];
        assert!(c.gates.iter().all(|g| allowed.contains(&g.name())));
        let d = phase_distance(&to_dyn4(u), &unitary_of(&c).unwrap());
        assert!(d <= tol, "distance {d}");
        c
    }

    #[test]
    fn identity_needs_no_cx() {
        let c = check_decomposition(&Matrix4::identity(), 1e-10);
        assert_eq!(c.count(GateName::CX), 0);
    }

    #[test]
    fn cx_needs_one_cx() {
        let cx = Gate::cx(0, 1).matrix2().unwrap();
        let c = check_decomposition(&cx, 1e-8);
        assert!(c.count(GateName::CX) <= 1);
        let rev = Gate::cx(1, 0);
        let m = unitary_of(&Circuit::from_gates(2, vec![rev]).unwrap()).unwrap();
        let m4 = Matrix4::from_fn(|r, c| m[(r, c)]);
        assert_eq!(check_decomposition(&m4, 1e-8).count(GateName::CX), 1);
    }

    #[test]
    fn local_products_need_no_cx() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        for _ in 0..10 {
            let a = rz_matrix(rng.random_range(0.0..6.0)) * ry_matrix(rng.random_range(0.0..6.0));
            let b = ry_matrix(rng.random_range(0.0..6.0)) * rz_matrix(rng.random_range(0.0..6.0));
            let c = check_decomposition(&kron2(&a, &b), 1e-8);
            assert_eq!(c.count(GateName::CX), 0);
        }
    }

    #[test]
    fn swap_and_named_gates() {
        let swap = Gate::swap(0, 1).matrix2().unwrap();
        assert_eq!(check_decomposition(&swap, 1e-8).count(GateName::CX), 3);
        for (a, b, c) in [(FRAC_PI_4, 0.0, 0.0), (0.0, FRAC_PI_4, 0.0), (0.0, 0.0, -FRAC_PI_4), (FRAC_PI_4, FRAC_PI_2, PI)] {
            let m = canonical_gate(a, b, c);
            assert_eq!(check_decomposition(&m, 1e-8).count(GateName::CX), 1);
        }
    }

    #[test]
    fn haar_samples_need_three_cx() {
        let mut rng = ChaCha8Rng::seed_from_u64(2024);
        for _ in 0..50 {
            let u = haar_unitary4(&mut rng);
            let c = check_decomposition(&u, 1e-8);
            assert_eq!(c.count(GateName::CX), 3);
        }
    }

    #[test]
    fn non_unitary_rejected() {
        let m = Matrix4::<C64>::identity() * C64::new(2.0, 0.0);
        assert!(decompose_su4(&m).is_err());
    }

    #[test]
    fn clifford_angles() {
        assert!(is_clifford_angle(0.0));
        assert!(is_clifford_angle(FRAC_PI_2));
        assert!(is_clifford_angle(3.0 * FRAC_PI_2));
        assert!(!is_clifford_angle(0.2));
    }
}
