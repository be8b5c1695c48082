use rayon::prelude::*;
use serde::{Deserialize, Serialize};
use sha2::{Digest, Sha256};

use super::generate::{sample_filtered_circuits, CircuitClass};
use super::metrics::{aggregate_cell, mitigation_errors, relative_error_variance, CellSummary, ErrorTriple};
use crate::circuit::text::to_text;
use crate::circuit::{compile, PauliOperator, Target};
use crate::config::{BenchmarkConfig, Evaluation, Method};
use crate::error::Result;
use crate::mitigation::{cdr, zne, CdrConfig, Experiment, ZneConfig};
use crate::oracles::{ratio_normality_check, NormalityCheck};
use crate::sim::rng::derive_seed;
use crate::sim::{ideal_expectation, Backend, EstimatorValue, ExactBackend, IdealBackend, SampledBackend};

/// Outcome of one method on one circuit.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CircuitRecord {
    pub circuit_id: usize,
    /// SHA-256 of the compiled circuit text.
    pub circuit_hash: String,
    pub ideal: f64,
    pub noisy: f64,
    pub mitigated: Option<f64>,
    pub errors: Option<ErrorTriple>,
    /// Standard deviation of the relative error; `None` when undefined.
    pub sigma_eps: Option<f64>,
    pub normality: Option<NormalityCheck>,
    /// Error message when the method failed on this circuit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub failure: Option<String>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CellResult {
    pub n: usize,
    pub d: usize,
    pub per_circuit: Vec<CircuitRecord>,
    pub summary: CellSummary,
    /// Why the cell has no circuits (e.g. the filter was exhausted).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub error: Option<String>,
}

impl CellResult {
    pub fn status(&self) -> &'static str {
        if self.summary.is_empty() {
            "empty"
        } else {
            "ok"
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct VolumetricGrid {
    pub method: Method,
    pub class: CircuitClass,
    /// Cells in configuration order.
    pub cells: Vec<CellResult>,
}

/// Per-circuit data shared by every method.
struct Prepared {
    id: usize,
    hash: String,
    experiment_circuit: crate::circuit::Circuit,
    observable: PauliOperator,
    ideal: f64,
    noisy: EstimatorValue,
}

fn hash_text(s: &str) -> String {
    hex::encode(Sha256::digest(s.as_bytes()))
}

fn record(p: &Prepared, method_result: Result<(f64, f64)>, threshold: f64) -> CircuitRecord {
    let noisy = p.noisy.value;
    let sigma_n2 = p.noisy.sample_variance;
    let normality = ratio_normality_check((noisy - p.ideal).abs(), sigma_n2.sqrt(), threshold).ok();
    let base = CircuitRecord {
        circuit_id: p.id,
        circuit_hash: p.hash.clone(),
        ideal: p.ideal,
        noisy,
        mitigated: None,
        errors: None,
        sigma_eps: None,
        normality,
        failure: None,
    };
    match method_result {
        Ok((mitigated, var_em)) => CircuitRecord {
            mitigated: Some(mitigated),
            errors: Some(mitigation_errors(mitigated, noisy, p.ideal)),
            sigma_eps: relative_error_variance(var_em, sigma_n2, mitigated, noisy, p.ideal)
                .ok()
                .map(f64::sqrt),
            ..base
        },
        Err(e) => CircuitRecord {
            failure: Some(e.to_string()),
            ..base
        },
    }
}

fn prepare(
    cfg: &BenchmarkConfig,
    target: &Target,
    backend: &dyn Backend,
    n: usize,
    d: usize,
    cell_seed: u64,
) -> Result<Vec<Prepared>> {
    let observable = cfg.observable.resolve(n)?;
    let circuits = sample_filtered_circuits(
        cfg.class,
        n,
        d,
        cfg.circuits_per_cell,
        (cfg.filter_range[0], cfg.filter_range[1]),
        &observable,
        derive_seed(cell_seed, &[0]),
        cfg.max_attempts,
    )?;
    let shots = cfg.budgets.effective_unmitigated();
    circuits
        .par_iter()
        .enumerate()
        .map(|(id, g)| {
            let compiled = compile(&g.circuit, target)?;
            let obs = observable.permuted(&compiled.final_layout);
            let circuit = compiled.circuit;
            let ideal = ideal_expectation(&circuit, &obs)?;
            let noisy = backend.evaluate(&circuit, &obs, shots, derive_seed(cell_seed, &[1, id as u64]))?;
            Ok(Prepared {
                id,
                hash: hash_text(&to_text(&circuit)),
                experiment_circuit: circuit,
                observable: obs,
                ideal,
                noisy,
            })
        })
        .collect()
}

fn run_method(
    cfg: &BenchmarkConfig,
    backend: &dyn Backend,
    method: Method,
    p: &Prepared,
    cell_seed: u64,
) -> Result<(f64, f64)> {
    let stream = |tag: u64, user: u64| derive_seed(cell_seed, &[2, p.id as u64, tag, user]);
    match method {
        Method::None => Ok((p.noisy.value, p.noisy.sample_variance)),
        Method::Zne => {
            let e = Experiment::new(p.experiment_circuit.clone(), p.observable.clone(), cfg.budgets.effective_mitigated())?;
            let zc = ZneConfig { seed: stream(1, cfg.zne.seed), ..cfg.zne.clone() };
            let r = zne(&e, &zc, backend)?;
            Ok((r.mitigated, r.variance))
        }
        Method::Cdr => {
            let e = Experiment::new(p.experiment_circuit.clone(), p.observable.clone(), cfg.budgets.effective_mitigated())?;
            let cc = CdrConfig { seed: stream(2, cfg.cdr.seed), ..cfg.cdr.clone() };
            let r = cdr(&e, &cc, backend, &IdealBackend)?;
            Ok((r.mitigated, r.variance))
        }
    }
}

/// Run every configured method over the grid. Cells and circuits run in
/// parallel; each (cell, circuit, method) has its own seed stream, so the
/// result does not depend on scheduling. Per-circuit and per-cell failures
/// are recorded rather than returned.
pub fn run_volumetric(cfg: &BenchmarkConfig) -> Result<Vec<VolumetricGrid>> {
    cfg.validate()?;
    let target = cfg.target()?;
    let backend: Box<dyn Backend> = match cfg.evaluation {
        Evaluation::Sampled => Box::new(SampledBackend { noise: cfg.noise.clone() }),
        Evaluation::InfiniteShot => Box::new(ExactBackend { noise: cfg.noise.clone() }),
    };
    let backend = backend.as_ref();
    let cells: Vec<Vec<CellResult>> = cfg
        .grid
        .par_iter()
        .map(|&[n, d]| {
            let cell_seed = derive_seed(cfg.seed, &[n as u64, d as u64]);
            let prepared = prepare(cfg, &target, backend, n, d, cell_seed);
            cfg.methods
                .iter()
                .map(|&m| match &prepared {
                    Ok(ps) => {
                        let per_circuit: Vec<CircuitRecord> = ps
                            .par_iter()
                            .map(|p| record(p, run_method(cfg, backend, m, p, cell_seed), cfg.normality_threshold))
                            .collect();
                        let eps: Vec<Option<f64>> = per_circuit
                            .iter()
                            .map(|r| r.errors.and_then(|e| e.eps_rel))
                            .collect();
                        CellResult {
                            n,
                            d,
                            summary: aggregate_cell(&eps),
                            per_circuit,
                            error: None,
                        }
                    }
                    Err(e) => CellResult {
                        n,
                        d,
                        per_circuit: Vec::new(),
                        summary: aggregate_cell(&[]),
                        error: Some(e.to_string()),
                    },
                })
                .collect()
        })
        .collect();
    Ok(cfg
        .methods
        .iter()
        .enumerate()
        .map(|(k, &method)| VolumetricGrid {
            method,
            class: cfg.class,
            cells: cells.iter().map(|per_method| per_method[k].clone()).collect(),
        })
        .collect())
}
