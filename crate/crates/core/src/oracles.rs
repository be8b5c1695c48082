//! Closed-form predictions under depolarising noise and the statistical
//! checks that decide whether a relative error can be trusted.
//!
//! Everything here is computed independently of the simulator and the
//! mitigation engines so that each can be checked against the other.

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, PauliOperator};
use crate::error::{Error, Result};
use crate::sim::{ideal_expectation, Backend, EstimatorValue, NoiseMode, NoiseModel};

/// Gate counts and error rates of a depolarising circuit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DepolarisingProfile {
    pub p1: f64,
    pub p2: f64,
    pub d1: usize,
    pub d2: usize,
}

impl DepolarisingProfile {
    pub fn of(c: &Circuit, p1: f64, p2: f64) -> DepolarisingProfile {
        let (d1, d2) = c.gate_counts();
        DepolarisingProfile { p1, p2, d1, d2 }
    }

    /// `γ = (1 − p₁)^{d₁} (1 − p₂)^{d₂}`.
    pub fn gamma(&self) -> f64 {
        (1.0 - self.p1).powi(self.d1 as i32) * (1.0 - self.p2).powi(self.d2 as i32)
    }
}

/// Noisy expectation of a traceless observable under global depolarising
/// noise: `γ·ideal`.
pub fn depolarising_noisy_expectation(ideal: f64, prof: &DepolarisingProfile) -> f64 {
    prof.gamma() * ideal
}

/// Lagrange weights at zero, `F_i = Π_{j≠i} α_j/(α_j − α_i)`.
pub fn richardson_coefficients(alphas: &[f64]) -> Result<Vec<f64>> {
    if alphas.len() < 2 {
        return Err(Error::invalid("need at least two noise scales"));
    }
    for (i, a) in alphas.iter().enumerate() {
        if alphas[..i].contains(a) {
            return Err(Error::invalid(format!("duplicate noise scale {a}")));
        }
    }
    Ok(alphas
        .iter()
        .enumerate()
        .map(|(i, ai)| {
            alphas
                .iter()
                .enumerate()
                .filter(|&(j, _)| j != i)
                .map(|(_, aj)| aj / (aj - ai))
                .product()
        })
        .collect())
}

/// Relative error of Richardson ZNE under global depolarising noise,
/// `(1 − Σ F_i γ^{α_i})/(1 − γ)`.
pub fn predicted_zne_poly_error(gamma: f64, alphas: &[f64]) -> Result<f64> {
    if !(gamma > 0.0 && gamma < 1.0) {
        return Err(Error::invalid(format!("gamma must lie in (0, 1), got {gamma}")));
    }
    let f = richardson_coefficients(alphas)?;
    let s: f64 = f.iter().zip(alphas).map(|(f, a)| f * gamma.powf(*a)).sum();
    Ok((1.0 - s) / (1.0 - gamma))
}

/// Whether the ratio `X/Y` of two normal variables is itself close to normal.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct NormalityCheck {
    /// Coefficient of variation `σ_Y/μ_Y` of the denominator.
    pub delta_y: f64,
    pub threshold: f64,
    pub passes: bool,
    /// `(μ − σ/λ, μ + σ/λ)` around the denominator mean.
    pub valid_interval: (f64, f64),
}

/// Default `λ` used when a check is attached to benchmark output.
pub const DEFAULT_NORMALITY_THRESHOLD: f64 = 0.5;

/// Check `δ_Y = σ_N/gap ≤ λ`, where `gap = |E⟨Ô⟩_N − ⟨O⟩|`.
pub fn ratio_normality_check(mu_n_gap: f64, sigma_n: f64, lambda: f64) -> Result<NormalityCheck> {
    if !(mu_n_gap > 0.0) {
        return Err(Error::invalid(format!("noisy gap must be positive, got {mu_n_gap}")));
    }
    if !(lambda > 0.0 && lambda < 1.0) {
        return Err(Error::invalid(format!("threshold must lie in (0, 1), got {lambda}")));
    }
    if !(sigma_n >= 0.0) {
        return Err(Error::invalid("standard deviation must be non-negative"));
    }
    let delta_y = sigma_n / mu_n_gap;
    Ok(NormalityCheck {
        delta_y,
        threshold: lambda,
        passes: delta_y <= lambda,
        valid_interval: (mu_n_gap - sigma_n / lambda, mu_n_gap + sigma_n / lambda),
    })
}

/// Largest gate error rate for depolarising models; `None` when the model
/// carries thermal relaxation and the rate must be supplied by the user.
pub fn e_max(nm: &NoiseModel) -> Option<f64> {
    match nm.mode {
        NoiseMode::Ideal => Some(0.0),
        _ if nm.thermal.is_some() => None,
        _ => Some(nm.p1.max(nm.p2)),
    }
}

/// Minimum shots `n₀` with `σ₀/√n₀ ≤ λ·d·e_max·‖O‖_∞`, the regime in which
/// the noisy gap can dominate sampling noise.
pub fn low_noise_min_shots(sigma0: f64, lambda: f64, depth: usize, e_max: f64, o_norm: f64) -> Result<f64> {
    let rhs = lambda * depth as f64 * e_max * o_norm;
    if !(rhs > 0.0) {
        return Err(Error::invalid("bound is zero: depth, error rate and norm must be positive"));
    }
    Ok((sigma0 / rhs).powi(2))
}

/// `γ·ideal` per traceless term, with `γ` from the circuit's gate counts.
/// The dual route to the global-depolarising simulator.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct AnalyticDepolarisingBackend {
    pub p1: f64,
    pub p2: f64,
}

impl Backend for AnalyticDepolarisingBackend {
    fn evaluate(&self, c: &Circuit, o: &PauliOperator, shots: u64, _seed: u64) -> Result<EstimatorValue> {
        let gamma = DepolarisingProfile::of(c, self.p1, self.p2).gamma();
        let mut value = 0.0;
        for (p, coef) in o.terms() {
            let single = PauliOperator::single(p.clone());
            let ideal = ideal_expectation(c, &single)?;
            value += coef * if p.weight() == 0 { ideal } else { gamma * ideal };
        }
        Ok(EstimatorValue {
            value,
            n_shots: shots,
            sample_variance: 0.0,
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::Gate;
    use crate::sim::noisy_expectation;

    #[test]
    fn gamma_examples() {
        let p = DepolarisingProfile { p1: 0.0, p2: 0.01, d1: 0, d2: 10 };
        assert!((depolarising_noisy_expectation(1.0, &p) - 0.904_382_075_1).abs() < 1e-10);
        assert_eq!(depolarising_noisy_expectation(0.0, &p), 0.0);
        let p = DepolarisingProfile { p1: 0.0, p2: 0.0, d1: 4, d2: 4 };
        assert_eq!(depolarising_noisy_expectation(0.3, &p), 0.3);
    }

    #[test]
    fn richardson_examples() {
        let f = richardson_coefficients(&[1.0, 3.0, 5.0]).unwrap();
        assert_eq!(f, vec![15.0 / 8.0, -5.0 / 4.0, 3.0 / 8.0]);
        let f = richardson_coefficients(&[1.0, 2.0]).unwrap();
        assert_eq!(f, vec![2.0, -1.0]);
        assert!(richardson_coefficients(&[1.0, 1.0]).is_err());
    }

    #[test]
    fn richardson_moments_vanish() {
        let a = [1.0, 3.0, 5.0, 7.0, 9.0];
        let f = richardson_coefficients(&a).unwrap();
        assert!((f.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        for m in 1..a.len() as i32 {
            let s: f64 = f.iter().zip(&a).map(|(f, a)| f * a.powi(m)).sum();
            assert!(s.abs() < 1e-10, "moment {m}: {s}");
        }
    }

    #[test]
    fn poly_error_examples() {
        let a = [1.0, 3.0, 5.0];
        let v = predicted_zne_poly_error(0.5, &a).unwrap();
        let hand = (1.0 - (15.0 / 8.0 * 0.5 - 5.0 / 4.0 * 0.125 + 3.0 / 8.0 * 0.03125)) / 0.5;
        assert!((v - hand).abs() < 1e-15);
        assert!(predicted_zne_poly_error(1.0 - 1e-6, &a).unwrap().abs() < 1e-3);
        assert!(predicted_zne_poly_error(1.0, &a).is_err());
    }

    #[test]
    fn normality_examples() {
        assert!(ratio_normality_check(0.3, 0.0, 0.1).unwrap().passes);
        let c = ratio_normality_check(0.1, 0.05, 0.6).unwrap();
        assert!((c.delta_y - 0.5).abs() < 1e-15 && c.passes);
        let c = ratio_normality_check(0.01, 0.05, 0.9).unwrap();
        assert!((c.delta_y - 5.0).abs() < 1e-12 && !c.passes);
        assert!(ratio_normality_check(0.0, 0.05, 0.9).is_err());
    }

    #[test]
    fn e_max_and_shot_bound() {
        assert_eq!(e_max(&NoiseModel::local(1e-3, 1e-2)), Some(1e-2));
        let n = low_noise_min_shots(1.0, 0.5, 10, 1e-2, 1.0).unwrap();
        assert!((n - 400.0).abs() < 1e-9);
    }

    #[test]
    fn analytic_backend_matches_simulator() {
        let c = Circuit::from_gates(3, vec![Gate::h(0), Gate::t(0), Gate::cx(0, 1), Gate::h(1), Gate::cx(1, 2), Gate::t(2), Gate::h(2)]).unwrap();
        let o = PauliOperator::new([("ZZZ".parse().unwrap(), 1.0), ("XII".parse().unwrap(), 0.5)]).unwrap();
        let a = AnalyticDepolarisingBackend { p1: 0.01, p2: 0.03 }.evaluate(&c, &o, 1, 0).unwrap().value;
        let s = noisy_expectation(&c, &o, &NoiseModel::global(0.01, 0.03)).unwrap();
        assert!((a - s).abs() < 1e-12);
    }
}
