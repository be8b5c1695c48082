//! Statevector and density-matrix engines.

use super::noise::{NoiseMode, NoiseModel};
use crate::circuit::kernel::{apply_1q, apply_2q, apply_cx};
use crate::circuit::{apply_gate, Circuit, Gate, GateKind, Pauli, PauliOperator, PauliString, C64};
use crate::error::{Error, Result};

/// Widest register accepted by the statevector engine.
pub const MAX_IDEAL_QUBITS: usize = 10;
/// Widest register accepted by the density-matrix engine.
pub const MAX_NOISY_QUBITS: usize = 7;

fn zero() -> C64 {
    C64::new(0.0, 0.0)
}

/// Final state of `c` applied to `|0…0⟩`.
pub fn statevector(c: &Circuit) -> Result<Vec<C64>> {
    if c.n_qubits > MAX_IDEAL_QUBITS {
        return Err(Error::Resource(format!(
            "statevector simulation supports at most {MAX_IDEAL_QUBITS} qubits, got {}",
            c.n_qubits
        )));
    }
    c.validate()?;
    let mut psi = vec![zero(); 1 << c.n_qubits];
    psi[0] = C64::new(1.0, 0.0);
    for g in &c.gates {
        apply_gate(&mut psi, c.n_qubits, g);
    }
    Ok(psi)
}

/// Gates rotating the eigenbasis of `p` onto the computational basis.
pub fn measurement_rotation(p: &PauliString) -> Vec<Gate> {
    let mut out = Vec::new();
    for (q, &l) in p.letters.iter().enumerate() {
        match l {
            Pauli::X => out.push(Gate::h(q)),
            Pauli::Y => {
                out.push(Gate::sdg(q));
                out.push(Gate::h(q));
            }
            _ => {}
        }
    }
    out
}

/// `(−1)^{parity of index restricted to the support of p}`.
fn parity_sign(index: usize, support_mask: usize) -> f64 {
    if (index & support_mask).count_ones() % 2 == 0 {
        1.0
    } else {
        -1.0
    }
}

pub(crate) fn support_mask(p: &PauliString) -> usize {
    let n = p.len();
    p.support().iter().fold(0, |m, &q| m | 1 << (n - 1 - q))
}

fn check_width(c: &Circuit, o: &PauliOperator) -> Result<()> {
    if o.width() != c.n_qubits {
        return Err(Error::invalid(format!(
            "observable width {} does not match circuit width {}",
            o.width(),
            c.n_qubits
        )));
    }
    Ok(())
}

/// Exact `⟨0|U†OU|0⟩`.
pub fn ideal_expectation(c: &Circuit, o: &PauliOperator) -> Result<f64> {
    check_width(c, o)?;
    let psi = statevector(c)?;
    let n = c.n_qubits;
    let mut total = 0.0;
    for (p, coef) in o.terms() {
        let mut phi = psi.clone();
        for g in measurement_rotation(p) {
            apply_gate(&mut phi, n, &g);
        }
        let mask = support_mask(p);
        let v: f64 = phi
            .iter()
            .enumerate()
            .map(|(i, a)| a.norm_sqr() * parity_sign(i, mask))
            .sum();
        total += coef * v;
    }
    Ok(total)
}

/// Density matrix stored row-major; entry `(i, j)` at `i·2ⁿ + j`.
#[derive(Debug, Clone)]
pub struct DensityMatrix {
    pub n: usize,
    pub data: Vec<C64>,
}

impl DensityMatrix {
    pub fn zero_state(n: usize) -> Result<DensityMatrix> {
        if n > MAX_NOISY_QUBITS {
            return Err(Error::Resource(format!(
                "density-matrix simulation supports at most {MAX_NOISY_QUBITS} qubits, got {n}"
            )));
        }
        let dim = 1usize << n;
        let mut data = vec![zero(); dim * dim];
        data[0] = C64::new(1.0, 0.0);
        Ok(DensityMatrix { n, data })
    }

    pub fn dim(&self) -> usize {
        1 << self.n
    }

    pub fn trace(&self) -> C64 {
        let d = self.dim();
        (0..d).map(|i| self.data[i * d + i]).sum()
    }

    /// `ρ → UρU†`. Row indices are the high `n` bits of the flattened index,
    /// so `U` acts on qubit `q` and `U*` on qubit `n + q`.
    pub fn apply_unitary(&mut self, g: &Gate) {
        let n = self.n;
        let w = 2 * n;
        match &g.kind {
            GateKind::CX => {
                let (c, t) = (g.qubits[0], g.qubits[1]);
                apply_cx(&mut self.data, w, c, t);
                apply_cx(&mut self.data, w, n + c, n + t);
            }
            _ if g.qubits.len() == 1 => {
                let m = g.matrix1().expect("single-qubit gate");
                let q = g.qubits[0];
                apply_1q(&mut self.data, w, q, &m);
                apply_1q(&mut self.data, w, n + q, &m.map(|z| z.conj()));
            }
            _ => {
                let m = g.matrix2().expect("two-qubit gate");
                let (a, b) = (g.qubits[0], g.qubits[1]);
                apply_2q(&mut self.data, w, a, b, &m);
                apply_2q(&mut self.data, w, n + a, n + b, &m.map(|z| z.conj()));
            }
        }
    }

    /// `(1−p)ρ + p·I/2ⁿ`.
    pub fn depolarize_global(&mut self, p: f64) {
        if p == 0.0 {
            return;
        }
        let d = self.dim();
        for z in self.data.iter_mut() {
            *z *= 1.0 - p;
        }
        let add = p / d as f64;
        for i in 0..d {
            self.data[i * d + i] += add;
        }
    }

    /// `(1−p)ρ + p·Tr_S(ρ) ⊗ I_S/2^k` for the qubit set `S`.
    pub fn depolarize_local(&mut self, qubits: &[usize], p: f64) {
        if p == 0.0 {
            return;
        }
        let n = self.n;
        let d = self.dim();
        let bits: Vec<usize> = qubits.iter().map(|&q| 1 << (n - 1 - q)).collect();
        let mask = bits.iter().fold(0, |m, b| m | b);
        let subs: Vec<usize> = (0..1usize << bits.len())
            .map(|k| {
                bits.iter()
                    .enumerate()
                    .filter(|(i, _)| k >> i & 1 == 1)
                    .fold(0, |m, (_, b)| m | b)
            })
            .collect();
        let scale = p / subs.len() as f64;
        let old = self.data.clone();
        for i in 0..d {
            for j in 0..d {
                let mut v = old[i * d + j] * (1.0 - p);
                if i & mask == j & mask {
                    let (bi, bj) = (i & !mask, j & !mask);
                    let s: C64 = subs.iter().map(|&s| old[(bi | s) * d + (bj | s)]).sum();
                    v += s * scale;
                }
                self.data[i * d + j] = v;
            }
        }
    }

    /// Amplitude damping `γ = 1 − e^{−t/T1}` with coherences decaying as `e^{−t/T2}`.
    pub fn thermal_relax(&mut self, q: usize, dur: f64, t1: f64, t2: f64) {
        if dur == 0.0 {
            return;
        }
        let n = self.n;
        let d = self.dim();
        let s = 1usize << (n - 1 - q);
        let gamma = 1.0 - (-dur / t1).exp();
        let off = (-dur / t2).exp();
        for i in (0..d).filter(|i| i & s == 0) {
            for j in (0..d).filter(|j| j & s == 0) {
                let (i1, j1) = (i | s, j | s);
                let a = self.data[i1 * d + j1];
                self.data[i * d + j] += a * gamma;
                self.data[i1 * d + j1] = a * (1.0 - gamma);
                self.data[i * d + j1] *= off;
                self.data[i1 * d + j] *= off;
            }
        }
    }

    /// Diagonal of `VρV†` for the measurement rotation of `p`, noise free.
    pub fn rotated_probabilities(&self, p: &PauliString) -> Vec<f64> {
        let rot = measurement_rotation(p);
        let d = self.dim();
        if rot.is_empty() {
            return (0..d).map(|i| self.data[i * d + i].re).collect();
        }
        let mut r = self.clone();
        for g in &rot {
            r.apply_unitary(g);
        }
        (0..d).map(|i| r.data[i * d + i].re).collect()
    }

    /// Smallest eigenvalue of the Hermitian part.
    pub fn min_eigenvalue(&self) -> f64 {
        let d = self.dim();
        let m = nalgebra::DMatrix::from_fn(d, d, |i, j| {
            (self.data[i * d + j] + self.data[j * d + i].conj()) * 0.5
        });
        m.symmetric_eigenvalues().min()
    }
}

/// Apply the per-qubit confusion matrices to a probability vector.
pub fn apply_readout(probs: &mut [f64], n: usize, readout: &[[[f64; 2]; 2]]) {
    for (q, m) in readout.iter().take(n).enumerate() {
        let s = 1usize << (n - 1 - q);
        for i in (0..probs.len()).filter(|i| i & s == 0) {
            let (p0, p1) = (probs[i], probs[i | s]);
            probs[i] = m[0][0] * p0 + m[0][1] * p1;
            probs[i | s] = m[1][0] * p0 + m[1][1] * p1;
        }
    }
}

/// Final density matrix of `c` under `nm`. A gate-by-gate hook sees the
/// state after every channel for invariant checks.
pub fn evolve_density(
    c: &Circuit,
    nm: &NoiseModel,
    mut hook: impl FnMut(&DensityMatrix),
) -> Result<DensityMatrix> {
    c.validate()?;
    nm.validate(c.n_qubits)?;
    let mut rho = DensityMatrix::zero_state(c.n_qubits)?;
    for g in &c.gates {
        rho.apply_unitary(g);
        let p = if g.is_two_qubit() { nm.p2 } else { nm.p1 };
        match nm.mode {
            NoiseMode::Ideal => {}
            NoiseMode::GlobalDepolarising => rho.depolarize_global(p),
            NoiseMode::Local => {
                rho.depolarize_local(&g.qubits, p);
                if let Some(th) = &nm.thermal {
                    let dur = if g.is_two_qubit() { th.dur2 } else { th.dur1 };
                    for &q in &g.qubits {
                        let (t1, t2) = th.times(q);
                        rho.thermal_relax(q, dur, t1, t2);
                    }
                }
            }
        }
        hook(&rho);
    }
    Ok(rho)
}

/// Outcome distribution of measuring the eigenbasis of `p` (all qubits
/// measured; identity letters measured in Z and later marginalised).
pub fn outcome_probabilities(c: &Circuit, nm: &NoiseModel, p: &PauliString) -> Result<Vec<f64>> {
    let mut probs = if nm.is_noisy() {
        evolve_density(c, nm, |_| {})?.rotated_probabilities(p)
    } else {
        nm.validate(c.n_qubits)?;
        let mut psi = statevector(c)?;
        for g in measurement_rotation(p) {
            apply_gate(&mut psi, c.n_qubits, &g);
        }
        psi.iter().map(|a| a.norm_sqr()).collect()
    };
    if let Some(ro) = &nm.readout {
        apply_readout(&mut probs, c.n_qubits, ro);
    }
    Ok(probs)
}

/// Parity expectation of a distribution on the support of `p`.
pub fn parity_expectation(probs: &[f64], p: &PauliString) -> f64 {
    let mask = support_mask(p);
    probs
        .iter()
        .enumerate()
        .map(|(i, &pr)| pr * parity_sign(i, mask))
        .sum()
}

/// Infinite-shot expectation under the noise model.
pub fn noisy_expectation(c: &Circuit, o: &PauliOperator, nm: &NoiseModel) -> Result<f64> {
    check_width(c, o)?;
    if c.n_qubits > MAX_NOISY_QUBITS && nm.is_noisy() {
        return Err(Error::Resource(format!(
            "noisy simulation supports at most {MAX_NOISY_QUBITS} qubits, got {}",
            c.n_qubits
        )));
    }
    if !nm.is_noisy() && nm.readout.is_none() {
        return ideal_expectation(c, o);
    }
    let rho = if nm.is_noisy() {
        Some(evolve_density(c, nm, |_| {})?)
    } else {
        None
    };
    let mut total = 0.0;
    for (p, coef) in o.terms() {
        let mut probs = match &rho {
            Some(r) => r.rotated_probabilities(p),
            None => outcome_probabilities(c, nm, p)?,
        };
        if rho.is_some() {
            if let Some(ro) = &nm.readout {
                apply_readout(&mut probs, c.n_qubits, ro);
            }
        }
        total += coef * parity_expectation(&probs, p);
    }
    Ok(total)
}
