use std::collections::BTreeMap;

use rand::Rng;
use rand_distr::{Binomial, Distribution};
use serde::de::Error as _;
use serde::{Deserialize, Deserializer, Serialize, Serializer};

use super::noise::NoiseModel;
use super::rng::rng_from_seed;
use super::state::{outcome_probabilities, support_mask, MAX_NOISY_QUBITS};
use crate::circuit::{Circuit, PauliString};
use crate::error::{Error, Result};

/// Shot histogram keyed by bitstrings; character `i` is qubit `i`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Counts {
    pub counts: BTreeMap<String, u64>,
    pub total_shots: u64,
}

impl Counts {
    pub fn new(counts: BTreeMap<String, u64>) -> Result<Counts> {
        let total_shots = counts.values().sum();
        if total_shots == 0 {
            return Err(Error::invalid("counts must contain at least one shot"));
        }
        let mut lens = counts.keys().map(|k| k.len());
        let first = lens.next().unwrap_or(0);
        if lens.any(|l| l != first) || counts.keys().any(|k| k.chars().any(|c| c != '0' && c != '1')) {
            return Err(Error::invalid("bitstrings must be binary and of equal length"));
        }
        Ok(Counts {
            counts,
            total_shots,
        })
    }

    pub fn get(&self, bits: &str) -> u64 {
        self.counts.get(bits).copied().unwrap_or(0)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("counts serialize")
    }

    pub fn from_json(s: &str) -> Result<Counts> {
        serde_json::from_str(s).map_err(|e| Error::Serialization(e.to_string()))
    }
}

impl Serialize for Counts {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        let mut m: BTreeMap<&str, u64> = self.counts.iter().map(|(k, &v)| (k.as_str(), v)).collect();
        m.insert("_shots", self.total_shots);
        m.serialize(s)
    }
}

impl<'de> Deserialize<'de> for Counts {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        let mut m = BTreeMap::<String, u64>::deserialize(d)?;
        let shots = m.remove("_shots").ok_or_else(|| D::Error::custom("missing _shots"))?;
        let c = Counts::new(m).map_err(D::Error::custom)?;
        if c.total_shots != shots {
            return Err(D::Error::custom(format!(
                "_shots = {shots} but counts sum to {}",
                c.total_shots
            )));
        }
        Ok(c)
    }
}

/// Sample mean of an observable with its estimated variance.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct EstimatorValue {
    pub value: f64,
    pub n_shots: u64,
    /// Variance of `value` as an estimator (already divided by `n_shots`).
    pub sample_variance: f64,
}

/// Multinomial draw by sequential conditional binomials in index order.
pub fn multinomial<R: Rng + ?Sized>(probs: &[f64], shots: u64, rng: &mut R) -> Vec<u64> {
    let clean: Vec<f64> = probs.iter().map(|&p| p.max(0.0)).collect();
    let total: f64 = clean.iter().sum();
    let mut out = vec![0u64; probs.len()];
    let mut remaining = shots;
    let mut mass = total;
    for (i, &p) in clean.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        if i + 1 == clean.len() || mass <= 0.0 {
            out[i] = remaining;
            break;
        }
        let q = (p / mass).clamp(0.0, 1.0);
        let k = if q >= 1.0 {
            remaining
        } else if q <= 0.0 {
            0
        } else {
            Binomial::new(remaining, q).expect("valid binomial").sample(rng)
        };
        out[i] = k;
        remaining -= k;
        mass -= p;
    }
    out
}

fn to_counts(n: usize, hist: &[u64]) -> Counts {
    let counts = hist
        .iter()
        .enumerate()
        .filter(|(_, &k)| k > 0)
        .map(|(i, &k)| (format!("{i:0n$b}"), k))
        .collect();
    Counts {
        counts,
        total_shots: hist.iter().sum(),
    }
}

fn check_sampling(c: &Circuit, nm: &NoiseModel, shots: u64) -> Result<()> {
    if shots == 0 {
        return Err(Error::invalid("shots must be positive"));
    }
    if nm.is_noisy() && c.n_qubits > MAX_NOISY_QUBITS {
        return Err(Error::Resource(format!(
            "noisy sampling supports at most {MAX_NOISY_QUBITS} qubits, got {}",
            c.n_qubits
        )));
    }
    Ok(())
}

/// Computational-basis shots from a measured circuit.
pub fn sample_counts(c: &Circuit, nm: &NoiseModel, shots: u64, seed: u64) -> Result<Counts> {
    if !c.measured {
        return Err(Error::invalid("sample_counts requires a measured circuit"));
    }
    check_sampling(c, nm, shots)?;
    let probs = outcome_probabilities(c, nm, &PauliString::global_z(c.n_qubits))?;
    let hist = multinomial(&probs, shots, &mut rng_from_seed(seed));
    Ok(to_counts(c.n_qubits, &hist))
}

/// Shots in the eigenbasis of `p`, with the basis change applied noise free
/// after the circuit. The circuit need not carry a measurement flag.
pub fn sample_pauli(
    c: &Circuit,
    p: &PauliString,
    nm: &NoiseModel,
    shots: u64,
    seed: u64,
) -> Result<Counts> {
    check_sampling(c, nm, shots)?;
    if p.len() != c.n_qubits {
        return Err(Error::invalid("Pauli string width does not match circuit"));
    }
    let probs = outcome_probabilities(c, nm, p)?;
    let hist = multinomial(&probs, shots, &mut rng_from_seed(seed));
    Ok(to_counts(c.n_qubits, &hist))
}

/// Parity estimator `(1/n)Σ count(z)·(−1)^{parity of z on supp p}`.
pub fn estimate_expectation(counts: &Counts, p: &PauliString) -> Result<EstimatorValue> {
    if counts.total_shots == 0 || counts.counts.is_empty() {
        return Err(Error::invalid("empty counts"));
    }
    let n = p.len();
    if counts.counts.keys().any(|k| k.len() != n) {
        return Err(Error::invalid(format!(
            "bitstring length does not match Pauli string width {n}"
        )));
    }
    let mask = support_mask(p);
    let mut acc: i128 = 0;
    for (bits, &k) in &counts.counts {
        let idx = usize::from_str_radix(bits, 2).map_err(|_| Error::invalid("non-binary bitstring"))?;
        let sign: i128 = if (idx & mask).count_ones() % 2 == 0 { 1 } else { -1 };
        acc += sign * k as i128;
    }
    let n_shots = counts.total_shots;
    let value = acc as f64 / n_shots as f64;
    Ok(EstimatorValue {
        value,
        n_shots,
        sample_variance: ((1.0 - value * value) / n_shots as f64).max(0.0),
    })
}
