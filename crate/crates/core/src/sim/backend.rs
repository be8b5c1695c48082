use super::counts::{estimate_expectation, multinomial, Counts, EstimatorValue};
use super::noise::NoiseModel;
use super::rng::{derive_seed, rng_from_seed};
use super::state::{
    apply_readout, evolve_density, ideal_expectation, noisy_expectation, statevector,
    measurement_rotation, MAX_NOISY_QUBITS,
};
use crate::circuit::{apply_gate, Circuit, PauliOperator, PauliString};
use crate::error::{Error, Result};

/// Something that estimates `⟨O⟩` for a circuit given a shot allowance and a
/// seed. Closures with the same signature are backends too.
pub trait Backend: Send + Sync {
    fn evaluate(&self, c: &Circuit, o: &PauliOperator, shots: u64, seed: u64) -> Result<EstimatorValue>;
}

impl<F> Backend for F
where
    F: Fn(&Circuit, &PauliOperator, u64, u64) -> Result<EstimatorValue> + Send + Sync,
{
    fn evaluate(&self, c: &Circuit, o: &PauliOperator, shots: u64, seed: u64) -> Result<EstimatorValue> {
        self(c, o, shots, seed)
    }
}

fn exact(value: f64, shots: u64) -> EstimatorValue {
    EstimatorValue {
        value,
        n_shots: shots,
        sample_variance: 0.0,
    }
}

/// Noise-free statevector expectation; variance zero.
#[derive(Debug, Clone, Copy, Default)]
pub struct IdealBackend;

impl Backend for IdealBackend {
    fn evaluate(&self, c: &Circuit, o: &PauliOperator, shots: u64, _seed: u64) -> Result<EstimatorValue> {
        Ok(exact(ideal_expectation(c, o)?, shots))
    }
}

/// Infinite-shot expectation under a noise model; variance zero.
#[derive(Debug, Clone)]
pub struct ExactBackend {
    pub noise: NoiseModel,
}

impl Backend for ExactBackend {
    fn evaluate(&self, c: &Circuit, o: &PauliOperator, shots: u64, _seed: u64) -> Result<EstimatorValue> {
        Ok(exact(noisy_expectation(c, o, &self.noise)?, shots))
    }
}

/// Finite-shot estimate: each non-identity term is measured in its own basis
/// with `shots` shots drawn from the stream `derive_seed(seed, [term index])`.
#[derive(Debug, Clone)]
pub struct SampledBackend {
    pub noise: NoiseModel,
}

impl SampledBackend {
    /// Shot histograms per term, in operator order (identity terms skipped).
    pub fn term_counts(&self, c: &Circuit, o: &PauliOperator, shots: u64, seed: u64) -> Result<Vec<(PauliString, f64, Counts)>> {
        if shots == 0 {
            return Err(Error::invalid("shots must be positive"));
        }
        if o.width() != c.n_qubits {
            return Err(Error::invalid("observable width does not match circuit"));
        }
        let nm = &self.noise;
        if nm.is_noisy() && c.n_qubits > MAX_NOISY_QUBITS {
            return Err(Error::Resource(format!(
                "noisy sampling supports at most {MAX_NOISY_QUBITS} qubits, got {}",
                c.n_qubits
            )));
        }
        let rho = if nm.is_noisy() {
            Some(evolve_density(c, nm, |_| {})?)
        } else {
            nm.validate(c.n_qubits)?;
            None
        };
        let psi = if rho.is_none() { Some(statevector(c)?) } else { None };
        let n = c.n_qubits;
        let mut out = Vec::new();
        for (k, (p, coef)) in o.terms().enumerate() {
            if p.weight() == 0 {
                continue;
            }
            let mut probs = match (&rho, &psi) {
                (Some(r), _) => r.rotated_probabilities(p),
                (None, Some(psi)) => {
                    let mut phi = psi.clone();
                    for g in measurement_rotation(p) {
                        apply_gate(&mut phi, n, &g);
                    }
                    phi.iter().map(|a| a.norm_sqr()).collect()
                }
                _ => unreachable!(),
            };
            if let Some(ro) = &nm.readout {
                apply_readout(&mut probs, n, ro);
            }
            let mut rng = rng_from_seed(derive_seed(seed, &[k as u64]));
            let hist = multinomial(&probs, shots, &mut rng);
            let counts = hist
                .iter()
                .enumerate()
                .filter(|(_, &h)| h > 0)
                .map(|(i, &h)| (format!("{i:0n$b}"), h))
                .collect();
            out.push((p.clone(), coef, Counts { counts, total_shots: shots }));
        }
        Ok(out)
    }
}

impl Backend for SampledBackend {
    fn evaluate(&self, c: &Circuit, o: &PauliOperator, shots: u64, seed: u64) -> Result<EstimatorValue> {
        let constant: f64 = o.terms().filter(|(p, _)| p.weight() == 0).map(|(_, c)| c).sum();
        let mut value = constant;
        let mut var = 0.0;
        for (p, coef, counts) in self.term_counts(c, o, shots, seed)? {
            let e = estimate_expectation(&counts, &p)?;
            value += coef * e.value;
            var += coef * coef * e.sample_variance;
        }
        Ok(EstimatorValue {
            value,
            n_shots: shots,
            sample_variance: var,
        })
    }
}
