use crate::error::{Error, Result};

/// Inputs for the finite-shot variance of a mitigated estimate.
#[derive(Debug, Clone, PartialEq)]
pub enum VarianceContext {
    /// Linear regression `noisy = F₁·ideal + F₀` over the training set.
    Cdr {
        /// Variance of the unmitigated estimate `⟨Ô⟩_N`.
        sigma_n2: f64,
        noisy: f64,
        f0: f64,
        f1: f64,
        /// Exact expectation values of the training circuits.
        training_ideal: Vec<f64>,
    },
    /// Log-linear exponential extrapolation over the noise scales.
    ZneExponential {
        sigma_n2: f64,
        noisy: f64,
        lambdas: Vec<f64>,
    },
}

/// Propagated variance. `Cdr` gives `σ²_EM`; `ZneExponential` gives the
/// relative variance `σ²_EM/⟨Ô⟩²_EM`.
///
/// ```text
/// cdr:  σ²_EM = (K+1)σ²_N/(K F₁²) · [1 + ((⟨Ô⟩_N − F₀)² + F₁² D̄²)/(F₁² Σ(Dᵢ − D̄)²)]
/// zne:  σ²_EM/⟨Ô⟩²_EM = σ²_N/(|λ|⟨Ô⟩²_N) + λ̄ σ²_N (|λ|+1)/(|λ| Σ(λᵢ − λ̄)²)
/// ```
pub fn propagate_variance(ctx: &VarianceContext) -> Result<f64> {
    match ctx {
        VarianceContext::Cdr {
            sigma_n2,
            noisy,
            f0,
            f1,
            training_ideal,
        } => {
            let k = training_ideal.len() as f64;
            let (mean, spread) = mean_spread(training_ideal);
            if !(spread > 0.0) {
                return Err(Error::SingularVariance("training ideal values have no spread".into()));
            }
            if *sigma_n2 == 0.0 {
                return Ok(0.0);
            }
            if f1.abs() < 1e-12 {
                return Err(Error::SingularVariance("regression slope is zero".into()));
            }
            let f1sq = f1 * f1;
            let bracket = 1.0 + ((noisy - f0).powi(2) + f1sq * mean * mean) / (f1sq * spread);
            Ok((k + 1.0) * sigma_n2 / (k * f1sq) * bracket)
        }
        VarianceContext::ZneExponential {
            sigma_n2,
            noisy,
            lambdas,
        } => {
            let k = lambdas.len() as f64;
            let (mean, spread) = mean_spread(lambdas);
            if !(spread > 0.0) {
                return Err(Error::SingularVariance("noise scales have no spread".into()));
            }
            if *sigma_n2 == 0.0 {
                return Ok(0.0);
            }
            if *noisy == 0.0 {
                return Err(Error::SingularVariance("unmitigated value is zero".into()));
            }
            let var_f1 = sigma_n2 * (k + 1.0) / (k * spread);
            Ok(sigma_n2 / (k * noisy * noisy) + mean * var_f1)
        }
    }
}

fn mean_spread(xs: &[f64]) -> (f64, f64) {
    if xs.is_empty() {
        return (0.0, 0.0);
    }
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    (mean, xs.iter().map(|x| (x - mean).powi(2)).sum())
}
