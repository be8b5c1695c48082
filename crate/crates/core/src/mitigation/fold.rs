use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::circuit::{invert, Circuit, Gate};
use crate::error::{Error, Result};
use crate::sim::rng::rng_from_seed;

/// How a circuit is stretched to noise scale `λ`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum FoldMode {
    /// `C (C†C)^k` with `k = (λ−1)/2`.
    #[default]
    Circuit,
    /// Every gate `G` becomes `G (G†G)^k`.
    OddGate,
    /// `d(λ−1)/2` fold pairs assigned to uniformly drawn gates (with
    /// replacement), so the mean per-gate scale is exactly `λ`.
    RandomGate,
}

fn check_lambda(lambda: u32) -> Result<u32> {
    if lambda == 0 || lambda % 2 == 0 {
        return Err(Error::invalid(format!(
            "noise scale must be a positive odd integer, got {lambda}"
        )));
    }
    Ok((lambda - 1) / 2)
}

fn fold_gate(out: &mut Vec<Gate>, g: &Gate, pairs: usize) {
    out.push(g.clone());
    let inv = g.inverse();
    for _ in 0..pairs {
        out.push(inv.clone());
        out.push(g.clone());
    }
}

/// Fold `c` to noise scale `lambda`. The unitary is unchanged and the
/// measurement flag is carried over.
pub fn fold(c: &Circuit, lambda: u32, mode: FoldMode, seed: u64) -> Result<Circuit> {
    let k = check_lambda(lambda)? as usize;
    if k == 0 || c.gates.is_empty() {
        return Ok(c.clone());
    }
    let mut gates = Vec::with_capacity(c.len() * lambda as usize);
    match mode {
        FoldMode::Circuit => {
            let body = c.without_measurement();
            let inv = invert(&body)?;
            gates.extend(body.gates.iter().cloned());
            for _ in 0..k {
                gates.extend(inv.gates.iter().cloned());
                gates.extend(body.gates.iter().cloned());
            }
        }
        FoldMode::OddGate => {
            for g in &c.gates {
                fold_gate(&mut gates, g, k);
            }
        }
        FoldMode::RandomGate => {
            let d = c.len();
            let mut alpha = vec![0usize; d];
            let mut rng = rng_from_seed(seed);
            for _ in 0..d * k {
                alpha[rng.random_range(0..d)] += 1;
            }
            for (g, &a) in c.gates.iter().zip(&alpha) {
                fold_gate(&mut gates, g, a);
            }
        }
    }
    Ok(Circuit {
        n_qubits: c.n_qubits,
        gates,
        measured: c.measured,
    })
}
