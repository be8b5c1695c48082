use rand::seq::SliceRandom;
use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::circuit::synth::haar_unitary4;
use crate::circuit::{build_pauli_gadget, decompose_su4, invert, Circuit, Gate, Pauli, PauliOperator, PauliString};
use crate::error::{Error, Result};
use crate::sim::ideal_expectation;
use crate::sim::rng::{derive_seed, rng_from_seed, SimRng};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CircuitKind {
    /// Layers of Haar-random two-qubit blocks on random disjoint pairs.
    RandomSu4,
    /// Layers each holding one `exp(iαP)` with a random Pauli string `P`.
    PauliGadget,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CircuitClass {
    pub kind: CircuitKind,
    /// Follow every layer immediately by its inverse.
    #[serde(default)]
    pub mirrored: bool,
}

/// A benchmark circuit with its layer structure.
#[derive(Debug, Clone, PartialEq)]
pub struct GeneratedCircuit {
    pub circuit: Circuit,
    /// Blocks (two-qubit unitaries or gadgets) per layer, in order, inverse
    /// layers included.
    pub layer_blocks: Vec<usize>,
}

fn su4_layer(n: usize, rng: &mut SimRng) -> Result<(Circuit, usize)> {
    let mut qubits: Vec<usize> = (0..n).collect();
    qubits.shuffle(rng);
    let mut layer = Circuit::new(n);
    for pair in qubits.chunks_exact(2) {
        let block = decompose_su4(&haar_unitary4(rng))?;
        for g in block.gates {
            let qs = g.qubits.iter().map(|&q| pair[q]).collect();
            layer.push(Gate { kind: g.kind, qubits: qs })?;
        }
    }
    Ok((layer, n / 2))
}

/// Uniform string over `{I,X,Y,Z}ⁿ`, redrawn while its weight is below
/// `min(2, n)` so every layer entangles when it can.
pub(crate) fn random_pauli(n: usize, rng: &mut SimRng) -> PauliString {
    const LETTERS: [Pauli; 4] = [Pauli::I, Pauli::X, Pauli::Y, Pauli::Z];
    loop {
        let p = PauliString::new((0..n).map(|_| LETTERS[rng.random_range(0..4)]).collect());
        if p.weight() >= n.min(2) {
            return p;
        }
    }
}

fn gadget_layer(n: usize, rng: &mut SimRng) -> Result<(Circuit, usize)> {
    let p = random_pauli(n, rng);
    let alpha = rng.random_range(0.0..std::f64::consts::TAU);
    Ok((build_pauli_gadget(&p, alpha)?, 1))
}

/// Benchmark circuit of width `n` and depth `d`, measured at the end.
pub fn generate_circuit(class: CircuitClass, n: usize, d: usize, seed: u64) -> Result<GeneratedCircuit> {
    if n < 2 || d < 1 {
        return Err(Error::invalid(format!("need n ≥ 2 and d ≥ 1, got n = {n}, d = {d}")));
    }
    if class.mirrored && d % 2 == 1 {
        return Err(Error::invalid(format!("mirrored circuits need an even depth, got {d}")));
    }
    let mut rng = rng_from_seed(seed);
    let layers = if class.mirrored { d / 2 } else { d };
    let mut circuit = Circuit::new(n);
    let mut layer_blocks = Vec::with_capacity(d);
    for _ in 0..layers {
        let (layer, blocks) = match class.kind {
            CircuitKind::RandomSu4 => su4_layer(n, &mut rng)?,
            CircuitKind::PauliGadget => gadget_layer(n, &mut rng)?,
        };
        circuit.extend(&layer)?;
        layer_blocks.push(blocks);
        if class.mirrored {
            circuit.extend(&invert(&layer)?)?;
            layer_blocks.push(blocks);
        }
    }
    Ok(GeneratedCircuit {
        circuit: circuit.measure_all(),
        layer_blocks,
    })
}

/// `count` circuits whose ideal `|⟨O⟩|` lies in `[lo, hi]`. Circuit `j`
/// draws candidates from the streams `derive_seed(seed, [j, attempt])`, at
/// most `max_attempts` of them. Mirrored classes are not filtered.
pub fn sample_filtered_circuits(
    class: CircuitClass,
    n: usize,
    d: usize,
    count: usize,
    range: (f64, f64),
    observable: &PauliOperator,
    seed: u64,
    max_attempts: usize,
) -> Result<Vec<GeneratedCircuit>> {
    let (lo, hi) = range;
    if !(0.0 <= lo && lo <= hi) {
        return Err(Error::invalid(format!("invalid filter range [{lo}, {hi}]")));
    }
    if observable.width() != n {
        return Err(Error::invalid("observable width does not match circuit width"));
    }
    let max_attempts = max_attempts.max(1);
    let results: Vec<(Option<GeneratedCircuit>, usize)> = (0..count)
        .into_par_iter()
        .map(|j| -> Result<(Option<GeneratedCircuit>, usize)> {
            for a in 0..max_attempts {
                let g = generate_circuit(class, n, d, derive_seed(seed, &[j as u64, a as u64]))?;
                if class.mirrored {
                    return Ok((Some(g), a + 1));
                }
                let v = ideal_expectation(&g.circuit, observable)?.abs();
                if (lo..=hi).contains(&v) {
                    return Ok((Some(g), a + 1));
                }
            }
            Ok((None, max_attempts))
        })
        .collect::<Result<_>>()?;
    let attempts: usize = results.iter().map(|r| r.1).sum();
    let accepted = results.iter().filter(|r| r.0.is_some()).count();
    if accepted < count {
        return Err(Error::SamplingExhausted {
            requested: count,
            accepted,
            attempts,
            rate: accepted as f64 / attempts as f64,
        });
    }
    Ok(results.into_iter().filter_map(|r| r.0).collect())
}
