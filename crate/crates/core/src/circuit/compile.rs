//! Layout, SWAP routing and rebasing onto a [`Target`].
//!
//! The compiler has three fixed stages and no optimisation pass:
//!
//! 1. pick `n` physical qubits by breadth-first search from the lowest-index
//!    vertex of the coupling map and relabel them `0..n` in ascending order;
//! 2. route every two-qubit gate along a shortest path, inserting SWAPs that
//!    move the first operand next to the second (ties broken by lowest index);
//! 3. rewrite every non-native gate: SWAP as three CX, raw two-qubit unitaries
//!    through [`decompose_su4`](super::decompose_su4), single-qubit gates through
//!    an Euler rotation in `Rz`/`SX` (or `Rz`/`H`).
//!
//! Gates are never merged or cancelled, so a mirrored circuit keeps its
//! structure after compilation.

use std::collections::{BTreeMap, BTreeSet, VecDeque};

use super::gate::{Gate, GateKind, GateName};
use super::synth::{decompose_su4_with, euler_1q, EulerBasis};
use super::{Circuit, Target};
use crate::error::{Error, Result};

/// Compiled circuit together with its logical-to-physical layouts.
#[derive(Debug, Clone, PartialEq)]
pub struct Compiled {
    pub circuit: Circuit,
    /// `initial_layout[logical] = physical` before the first gate.
    pub initial_layout: Vec<usize>,
    /// `final_layout[logical] = physical` after the last gate.
    pub final_layout: Vec<usize>,
    /// Physical device qubit behind each compiled-circuit index.
    pub device_qubits: Vec<usize>,
}

fn euler_basis(t: &Target) -> Result<EulerBasis> {
    if !t.is_native(GateName::CX) || !t.is_native(GateName::Rz) {
        return Err(Error::invalid(
            "target is not universal: CX and Rz must be native",
        ));
    }
    if t.is_native(GateName::SX) {
        Ok(EulerBasis::ZSX)
    } else if t.is_native(GateName::H) {
        Ok(EulerBasis::ZH)
    } else {
        Err(Error::invalid(
            "target is not universal: SX or H must be native alongside Rz",
        ))
    }
}

/// Choose `n` connected device qubits. Returns the sorted device indices and
/// the induced adjacency on `0..n`, or `None` for all-to-all targets.
fn select_region(n: usize, t: &Target) -> Result<(Vec<usize>, Option<Vec<BTreeSet<usize>>>)> {
    if t.is_all_to_all() {
        return Ok(((0..n).collect(), None));
    }
    let adj = t.adjacency();
    let start = *adj.keys().next().expect("non-empty coupling");
    let mut seen = BTreeSet::from([start]);
    let mut order = vec![start];
    let mut queue = VecDeque::from([start]);
    while let Some(v) = queue.pop_front() {
        if order.len() >= n {
            break;
        }
        for &w in &adj[&v] {
            if order.len() >= n {
                break;
            }
            if seen.insert(w) {
                order.push(w);
                queue.push_back(w);
            }
        }
    }
    if order.len() < n {
        return Err(Error::invalid(format!(
            "circuit needs {n} qubits but the coupling map has {}",
            order.len()
        )));
    }
    order.truncate(n);
    order.sort_unstable();
    let index: BTreeMap<usize, usize> = order.iter().enumerate().map(|(i, &v)| (v, i)).collect();
    let mut local = vec![BTreeSet::new(); n];
    for &(a, b) in &t.coupling {
        if let (Some(&ia), Some(&ib)) = (index.get(&a), index.get(&b)) {
            local[ia].insert(ib);
            local[ib].insert(ia);
        }
    }
    Ok((order, Some(local)))
}

fn shortest_path(adj: &[BTreeSet<usize>], from: usize, to: usize) -> Vec<usize> {
    let mut prev = vec![usize::MAX; adj.len()];
    prev[from] = from;
    let mut queue = VecDeque::from([from]);
    while let Some(v) = queue.pop_front() {
        if v == to {
            break;
        }
        for &w in &adj[v] {
            if prev[w] == usize::MAX {
                prev[w] = v;
                queue.push_back(w);
            }
        }
    }
    let mut path = vec![to];
    let mut v = to;
    while v != from {
        v = prev[v];
        path.push(v);
    }
    path.reverse();
    path
}

struct Emitter<'a> {
    target: &'a Target,
    basis: EulerBasis,
    out: Vec<Gate>,
}

impl Emitter<'_> {
    fn emit(&mut self, g: Gate) -> Result<()> {
        if self.target.is_native(g.name()) {
            self.out.push(g);
            return Ok(());
        }
        match &g.kind {
            GateKind::SWAP => {
                let (a, b) = (g.qubits[0], g.qubits[1]);
                for gate in [Gate::cx(a, b), Gate::cx(b, a), Gate::cx(a, b)] {
                    self.emit(gate)?;
                }
            }
            GateKind::U2q(m) => {
                let (a, b) = (g.qubits[0], g.qubits[1]);
                let sub = decompose_su4_with(m, self.basis)?;
                for mut gate in sub.gates {
                    for q in gate.qubits.iter_mut() {
                        *q = if *q == 0 { a } else { b };
                    }
                    self.emit(gate)?;
                }
            }
            GateKind::CX => unreachable!("CX is required to be native"),
            _ => {
                let m = g.matrix1().expect("single-qubit gate");
                self.out.extend(euler_1q(&m, g.qubits[0], self.basis));
            }
        }
        Ok(())
    }
}

/// Compile `c` onto `t`.
pub fn compile(c: &Circuit, t: &Target) -> Result<Compiled> {
    c.validate()?;
    let basis = euler_basis(t)?;
    let n = c.n_qubits;
    let (device_qubits, adj) = select_region(n, t)?;
    let mut pos: Vec<usize> = (0..n).collect();
    let mut occ: Vec<usize> = (0..n).collect();
    let mut em = Emitter {
        target: t,
        basis,
        out: Vec::with_capacity(c.gates.len()),
    };
    for g in &c.gates {
        if g.qubits.len() == 2 {
            if let Some(adj) = &adj {
                let (la, lb) = (g.qubits[0], g.qubits[1]);
                let path = shortest_path(adj, pos[la], pos[lb]);
                for w in path.windows(2).take(path.len().saturating_sub(2)) {
                    let (x, y) = (w[0], w[1]);
                    em.emit(Gate::swap(x, y))?;
                    let (lx, ly) = (occ[x], occ[y]);
                    occ.swap(x, y);
                    pos[lx] = y;
                    pos[ly] = x;
                }
            }
        }
        let mut mapped = g.clone();
        for q in mapped.qubits.iter_mut() {
            *q = pos[*q];
        }
        em.emit(mapped)?;
    }
    Ok(Compiled {
        circuit: Circuit {
            n_qubits: n,
            gates: em.out,
            measured: c.measured,
        },
        initial_layout: (0..n).collect(),
        final_layout: pos,
        device_qubits,
    })
}
