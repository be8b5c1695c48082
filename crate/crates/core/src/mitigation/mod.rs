//! Zero-noise extrapolation, Clifford data regression and the task-graph
//! executor that composes them.

mod cdr;
mod fit;
mod fold;
pub mod graph;
mod variance;
mod zne;

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::circuit::{Circuit, PauliOperator};
use crate::error::{Error, Result};

pub use cdr::{
    cdr, cdr_collate, cdr_noisy_original, cdr_noisy_training, cdr_shots, cdr_training,
    generate_training_set, nearest_clifford_angle, CdrTraining,
};
pub use fit::{extrapolate, FitModel, FitPoint, FitResult};
pub use fold::{fold, FoldMode};
pub use graph::{cdr_graph, run_estimate, zne_graph, TaskGraph};
pub use variance::{propagate_variance, VarianceContext};
pub use zne::{zne, zne_collate, zne_evaluate, zne_plan, ZneLevel};

/// A circuit, an observable and the shots available to estimate it.
#[derive(Debug, Clone, PartialEq)]
pub struct Experiment {
    pub circuit: Circuit,
    pub observable: PauliOperator,
    pub shot_budget: u64,
}

impl Experiment {
    pub fn new(circuit: Circuit, observable: PauliOperator, shot_budget: u64) -> Result<Experiment> {
        if observable.width() != circuit.n_qubits {
            return Err(Error::invalid(format!(
                "observable width {} does not match circuit width {}",
                observable.width(),
                circuit.n_qubits
            )));
        }
        if shot_budget == 0 {
            return Err(Error::invalid("shot budget must be positive"));
        }
        Ok(Experiment {
            circuit,
            observable,
            shot_budget,
        })
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ZneConfig {
    #[serde(default = "ZneConfig::default_lambdas")]
    pub lambdas: Vec<u32>,
    #[serde(default)]
    pub folding: FoldMode,
    #[serde(default = "ZneConfig::default_fit")]
    pub fit: FitModel,
    #[serde(default)]
    pub seed: u64,
}

impl Default for ZneConfig {
    fn default() -> Self {
        ZneConfig {
            lambdas: Self::default_lambdas(),
            folding: FoldMode::default(),
            fit: Self::default_fit(),
            seed: 0,
        }
    }
}

impl ZneConfig {
    fn default_lambdas() -> Vec<u32> {
        vec![1, 3, 5, 7, 9]
    }

    fn default_fit() -> FitModel {
        FitModel::Exponential
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Error::Validation {
            key: "zne.lambdas".into(),
            message: m,
        };
        if self.lambdas.first() != Some(&1) {
            return Err(bad("noise scales must start at 1".into()));
        }
        if self.lambdas.iter().any(|l| l % 2 == 0) {
            return Err(bad("noise scales must be odd".into()));
        }
        if self.lambdas.windows(2).any(|w| w[1] <= w[0]) {
            return Err(bad("noise scales must be strictly increasing".into()));
        }
        let need = self.fit.n_params(self.lambdas.len()).max(2);
        if self.lambdas.len() < need {
            return Err(Error::Validation {
                key: "zne.fit".into(),
                message: format!("{:?} needs at least {need} noise scales, got {}", self.fit, self.lambdas.len()),
            });
        }
        if let FitModel::Polynomial(0) | FitModel::PolyExponential(0) = self.fit {
            return Err(Error::Validation {
                key: "zne.fit".into(),
                message: "polynomial degree must be at least 1".into(),
            });
        }
        Ok(())
    }
}

/// Which way the CDR regression runs.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
#[serde(rename_all = "snake_case")]
pub enum CdrDirection {
    /// `ideal = F₁·noisy + F₀`, mitigated `F₁·D₀ + F₀`.
    #[default]
    IdealFromNoisy,
    /// `noisy = A·ideal + B`, mitigated `(D₀ − B)/A`.
    NoisyFromIdeal,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CdrConfig {
    #[serde(default = "CdrConfig::default_non_clifford")]
    pub n_non_clifford: usize,
    #[serde(default = "CdrConfig::default_pairs")]
    pub n_pairs: usize,
    #[serde(default = "CdrConfig::default_training")]
    pub n_training: usize,
    #[serde(default)]
    pub fit_direction: CdrDirection,
    #[serde(default = "CdrConfig::default_tol")]
    pub conditioning_tol: f64,
    #[serde(default)]
    pub seed: u64,
}

impl Default for CdrConfig {
    fn default() -> Self {
        CdrConfig {
            n_non_clifford: Self::default_non_clifford(),
            n_pairs: Self::default_pairs(),
            n_training: Self::default_training(),
            fit_direction: CdrDirection::default(),
            conditioning_tol: Self::default_tol(),
            seed: 0,
        }
    }
}

impl CdrConfig {
    fn default_non_clifford() -> usize {
        10
    }

    fn default_pairs() -> usize {
        1
    }

    fn default_training() -> usize {
        20
    }

    fn default_tol() -> f64 {
        1e-6
    }

    pub fn validate(&self) -> Result<()> {
        if self.n_training < 2 {
            return Err(Error::Validation {
                key: "cdr.n_training".into(),
                message: format!("need at least 2 training circuits, got {}", self.n_training),
            });
        }
        if self.n_pairs == 0 {
            return Err(Error::Validation {
                key: "cdr.n_pairs".into(),
                message: "must be positive".into(),
            });
        }
        if !(self.conditioning_tol > 0.0) {
            return Err(Error::Validation {
                key: "cdr.conditioning_tol".into(),
                message: "must be positive".into(),
            });
        }
        Ok(())
    }
}

/// Mitigated value with the unmitigated reference and the fit behind it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MitigatedEstimate {
    pub mitigated: f64,
    /// Unmitigated estimate of the original circuit.
    pub noisy: f64,
    pub fit: FitResult,
    /// Propagated finite-shot variance of `mitigated`.
    pub variance: f64,
    /// Per-level values (ZNE) or training pairs (CDR), plus shot totals.
    pub metadata: BTreeMap<String, serde_json::Value>,
}

impl MitigatedEstimate {
    pub fn new(mitigated: f64, noisy: f64, fit: FitResult, variance: f64) -> MitigatedEstimate {
        MitigatedEstimate {
            mitigated,
            noisy,
            fit,
            variance: variance.max(0.0),
            metadata: BTreeMap::new(),
        }
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string(self).expect("estimate serializes")
    }
}
