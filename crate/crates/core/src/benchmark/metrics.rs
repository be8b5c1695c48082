use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Absolute errors with and without mitigation and their ratio.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ErrorTriple {
    pub eps_n: f64,
    pub eps_em: f64,
    /// `eps_em / eps_n`; `None` when the unmitigated error is exactly zero.
    pub eps_rel: Option<f64>,
}

/// `ε_N = |noisy − ideal|`, `ε_EM = |mitigated − ideal|`, `ε = ε_EM/ε_N`.
pub fn mitigation_errors(mitigated: f64, noisy: f64, ideal: f64) -> ErrorTriple {
    let eps_n = (noisy - ideal).abs();
    let eps_em = (mitigated - ideal).abs();
    ErrorTriple {
        eps_n,
        eps_em,
        eps_rel: (eps_n > 0.0).then(|| eps_em / eps_n),
    }
}

/// Variance of the relative error for independent normal estimators,
/// `σ²_EM/(μ_N − ⟨O⟩)² + σ²_N (μ_EM − ⟨O⟩)²/(μ_N − ⟨O⟩)⁴`.
pub fn relative_error_variance(sigma_em2: f64, sigma_n2: f64, mu_em: f64, mu_n: f64, ideal: f64) -> Result<f64> {
    let gap = mu_n - ideal;
    if gap == 0.0 {
        return Err(Error::DivisionDegenerate(
            "noisy mean equals the ideal value".into(),
        ));
    }
    let g2 = gap * gap;
    Ok(sigma_em2 / g2 + sigma_n2 * (mu_em - ideal).powi(2) / (g2 * g2))
}

/// Median and worst relative error of a cell.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CellSummary {
    /// Lower median of the defined values; `None` for an empty cell.
    pub median_eps: Option<f64>,
    pub worst_eps: Option<f64>,
    pub n_defined: usize,
    /// Circuits whose relative error was undefined (zero unmitigated error).
    pub n_undefined: usize,
}

impl CellSummary {
    pub fn is_empty(&self) -> bool {
        self.n_defined == 0
    }
}

/// Lower median and maximum of the defined values.
pub fn aggregate_cell(eps: &[Option<f64>]) -> CellSummary {
    let mut v: Vec<f64> = eps.iter().flatten().copied().collect();
    v.sort_by(f64::total_cmp);
    CellSummary {
        median_eps: (!v.is_empty()).then(|| v[(v.len() - 1) / 2]),
        worst_eps: v.last().copied(),
        n_defined: v.len(),
        n_undefined: eps.len() - v.len(),
    }
}
