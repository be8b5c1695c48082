use rayon::prelude::*;
use serde_json::json;

use super::fit::{extrapolate, FitModel, FitPoint, FitResult};
use super::fold::fold;
use super::variance::{propagate_variance, VarianceContext};
use super::{Experiment, MitigatedEstimate, ZneConfig};
use crate::error::{Error, Result};
use crate::sim::rng::derive_seed;
use crate::sim::{Backend, EstimatorValue};

/// One noise level of a ZNE run with its shot allocation and seeds.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct ZneLevel {
    pub lambda: u32,
    pub shots: u64,
    pub fold_seed: u64,
    pub eval_seed: u64,
}

/// Split the budget equally over the noise levels, remainder to `λ = 1`.
pub fn zne_plan(e: &Experiment, cfg: &ZneConfig) -> Result<Vec<ZneLevel>> {
    cfg.validate()?;
    let k = cfg.lambdas.len() as u64;
    if e.shot_budget < k {
        return Err(Error::invalid(format!(
            "shot budget {} is smaller than the number of noise levels {k}",
            e.shot_budget
        )));
    }
    let base = e.shot_budget / k;
    let rem = e.shot_budget % k;
    Ok(cfg
        .lambdas
        .iter()
        .enumerate()
        .map(|(i, &lambda)| ZneLevel {
            lambda,
            shots: base + if i == 0 { rem } else { 0 },
            fold_seed: derive_seed(cfg.seed, &[0, i as u64]),
            eval_seed: derive_seed(cfg.seed, &[1, i as u64]),
        })
        .collect())
}

/// Evaluate one planned level.
pub fn zne_evaluate(e: &Experiment, cfg: &ZneConfig, level: &ZneLevel, backend: &dyn Backend) -> Result<EstimatorValue> {
    let folded = fold(&e.circuit, level.lambda, cfg.folding, level.fold_seed)?;
    backend.evaluate(&folded, &e.observable, level.shots, level.eval_seed)
}

/// Extrapolate the per-level estimates and propagate their variance.
pub fn zne_collate(cfg: &ZneConfig, levels: &[ZneLevel], values: &[EstimatorValue]) -> Result<MitigatedEstimate> {
    if levels.len() != values.len() || levels.is_empty() {
        return Err(Error::invalid("one estimate per noise level is required"));
    }
    let points: Vec<FitPoint> = levels
        .iter()
        .zip(values)
        .map(|(l, v)| FitPoint::new(l.lambda as f64, v.value, v.sample_variance))
        .collect();
    let partial = || points.iter().map(|p| (p.lambda, p.value, p.variance)).collect::<Vec<_>>();
    let fit = extrapolate(&points, cfg.fit).map_err(|err| match err {
        Error::FitFailure {
            message,
            diagnostics,
            ..
        } => Error::FitFailure {
            message,
            diagnostics,
            partial: partial(),
        },
        other => other,
    })?;
    let noisy = values[0];
    let variance = if fit.model == FitModel::Exponential {
        let rel = propagate_variance(&VarianceContext::ZneExponential {
            sigma_n2: noisy.sample_variance,
            noisy: noisy.value,
            lambdas: points.iter().map(|p| p.lambda).collect(),
        })?;
        rel * fit.extrapolated * fit.extrapolated
    } else {
        let g = gradient(&points, &fit)?;
        g.iter().zip(&points).map(|(g, p)| g * g * p.variance).sum()
    };
    let mut est = MitigatedEstimate::new(fit.extrapolated, noisy.value, fit, variance);
    est.metadata.insert(
        "levels".into(),
        json!(levels
            .iter()
            .zip(values)
            .map(|(l, v)| json!({"lambda": l.lambda, "value": v.value, "variance": v.sample_variance, "shots": l.shots}))
            .collect::<Vec<_>>()),
    );
    est.metadata.insert("shots".into(), json!(levels.iter().map(|l| l.shots).sum::<u64>()));
    if est.fit.fallback {
        est.metadata.insert("fit_fallback".into(), json!(format!("{:?} -> Linear", cfg.fit)));
    }
    Ok(est)
}

/// `∂ extrapolated / ∂ value_i`; exact for linear models, central
/// differences otherwise.
fn gradient(points: &[FitPoint], fit: &FitResult) -> Result<Vec<f64>> {
    let linear = matches!(fit.model, FitModel::Linear | FitModel::Polynomial(_) | FitModel::Richardson);
    (0..points.len())
        .map(|i| {
            if linear {
                let unit: Vec<FitPoint> = points
                    .iter()
                    .enumerate()
                    .map(|(j, p)| FitPoint::new(p.lambda, if i == j { 1.0 } else { 0.0 }, p.variance))
                    .collect();
                Ok(extrapolate(&unit, fit.model)?.extrapolated)
            } else {
                let h = 1e-6 * points[i].value.abs().max(1e-3);
                let shifted = |d: f64| {
                    let mut q = points.to_vec();
                    q[i].value += d;
                    extrapolate(&q, fit.model).map(|r| r.extrapolated)
                };
                Ok((shifted(h)? - shifted(-h)?) / (2.0 * h))
            }
        })
        .collect()
}

/// Zero-noise extrapolation of `⟨O⟩`.
pub fn zne(e: &Experiment, cfg: &ZneConfig, backend: &dyn Backend) -> Result<MitigatedEstimate> {
    let levels = zne_plan(e, cfg)?;
    let values = levels
        .par_iter()
        .map(|l| zne_evaluate(e, cfg, l, backend))
        .collect::<Result<Vec<_>>>()?;
    zne_collate(cfg, &levels, &values)
}
