use std::f64::consts::FRAC_PI_2;

use rand::seq::index::sample;
use rayon::prelude::*;
use serde_json::json;

use super::fit::{FitModel, FitResult};
use super::variance::{propagate_variance, VarianceContext};
use super::{CdrConfig, CdrDirection, Experiment, MitigatedEstimate};
use crate::circuit::synth::is_clifford_angle;
use crate::circuit::{Circuit, Gate, GateKind};
use crate::error::{Error, Result};
use crate::sim::rng::{derive_seed, rng_from_seed};
use crate::sim::{Backend, EstimatorValue};

const MAX_ATTEMPTS: usize = 5;

/// `Rz(kπ/2)` closest to `Rz(θ)` on the circle.
pub fn nearest_clifford_angle(theta: f64) -> f64 {
    let k = (theta.rem_euclid(std::f64::consts::TAU) / FRAC_PI_2).round() as u32 % 4;
    k as f64 * FRAC_PI_2
}

fn rotation_angle(g: &Gate) -> Option<f64> {
    match g.kind {
        GateKind::Rz(t) => Some(t),
        GateKind::T => Some(std::f64::consts::FRAC_PI_4),
        GateKind::Tdg => Some(7.0 * std::f64::consts::FRAC_PI_4),
        _ => None,
    }
}

fn non_clifford_positions(c: &Circuit) -> Result<Vec<usize>> {
    let mut out = Vec::new();
    for (i, g) in c.gates.iter().enumerate() {
        if matches!(g.kind, GateKind::U2q(_)) {
            return Err(Error::invalid(
                "training circuits need all non-Clifford content in Rz gates; compile the circuit first",
            ));
        }
        if rotation_angle(g).is_some_and(|t| !is_clifford_angle(t)) {
            out.push(i);
        }
    }
    Ok(out)
}

fn build(c: &Circuit, replaced: &[usize]) -> Circuit {
    let mut out = c.clone();
    for &i in replaced {
        let g = &c.gates[i];
        let theta = rotation_angle(g).expect("replaced gates are rotations");
        out.gates[i] = Gate::rz(g.qubits[0], nearest_clifford_angle(theta));
    }
    out
}

/// Near-Clifford training circuits for `c`.
///
/// The first circuit keeps `K = min(n_non_clifford, m − 1)` of the `m`
/// non-Clifford rotations (chosen uniformly) and snaps the rest to the
/// nearest `Rz(kπ/2)`; every later circuit starts from it and swaps
/// `n_pairs` kept/replaced positions uniformly at random. Gate positions and
/// counts are unchanged.
pub fn generate_training_set(c: &Circuit, cfg: &CdrConfig, seed: u64) -> Result<Vec<Circuit>> {
    cfg.validate()?;
    let positions = non_clifford_positions(c)?;
    let m = positions.len();
    let keep = cfg.n_non_clifford.min(m.saturating_sub(1));
    let mut rng = rng_from_seed(seed);
    let mut kept_mask = vec![false; m];
    for i in sample(&mut rng, m, keep) {
        kept_mask[i] = true;
    }
    let kept: Vec<usize> = (0..m).filter(|&i| kept_mask[i]).collect();
    let dropped: Vec<usize> = (0..m).filter(|&i| !kept_mask[i]).collect();
    let mut out = Vec::with_capacity(cfg.n_training);
    out.push(build(c, &dropped.iter().map(|&i| positions[i]).collect::<Vec<_>>()));
    let swaps = cfg.n_pairs.min(kept.len()).min(dropped.len());
    for _ in 1..cfg.n_training {
        let mut mask = kept_mask.clone();
        let out_of_kept = sample(&mut rng, kept.len(), swaps);
        let into_kept = sample(&mut rng, dropped.len(), swaps);
        for (a, b) in out_of_kept.iter().zip(into_kept.iter()) {
            mask[kept[a]] = false;
            mask[dropped[b]] = true;
        }
        let replaced: Vec<usize> = (0..m).filter(|&i| !mask[i]).map(|i| positions[i]).collect();
        out.push(build(c, &replaced));
    }
    Ok(out)
}

/// Training circuits with their exact expectation values.
#[derive(Debug, Clone)]
pub struct CdrTraining {
    pub circuits: Vec<Circuit>,
    pub ideal: Vec<f64>,
    /// Generation attempts used (1 when the first set was well conditioned).
    pub attempts: usize,
}

/// Shots for the original circuit and for each training circuit.
pub fn cdr_shots(e: &Experiment, cfg: &CdrConfig) -> Result<(u64, u64)> {
    let parts = cfg.n_training as u64 + 1;
    if e.shot_budget < parts {
        return Err(Error::invalid(format!(
            "shot budget {} is smaller than n_training + 1 = {parts}",
            e.shot_budget
        )));
    }
    let base = e.shot_budget / parts;
    Ok((base + e.shot_budget % parts, base))
}

fn spread(xs: &[f64]) -> f64 {
    let mean = xs.iter().sum::<f64>() / xs.len() as f64;
    xs.iter().map(|x| (x - mean).powi(2)).sum()
}

/// Generate a training set whose exact values are spread by at least the
/// conditioning tolerance, regenerating from derived seeds if needed.
pub fn cdr_training(e: &Experiment, cfg: &CdrConfig, ideal_backend: &dyn Backend) -> Result<CdrTraining> {
    let (_, shots) = cdr_shots(e, cfg)?;
    let mut last = 0.0;
    for attempt in 0..MAX_ATTEMPTS {
        let circuits = generate_training_set(&e.circuit, cfg, derive_seed(cfg.seed, &[0, attempt as u64]))?;
        let ideal = circuits
            .par_iter()
            .enumerate()
            .map(|(i, t)| {
                let seed = derive_seed(cfg.seed, &[1, attempt as u64, i as u64]);
                ideal_backend.evaluate(t, &e.observable, shots, seed).map(|v| v.value)
            })
            .collect::<Result<Vec<_>>>()?;
        last = spread(&ideal);
        if last >= cfg.conditioning_tol {
            return Ok(CdrTraining {
                circuits,
                ideal,
                attempts: attempt + 1,
            });
        }
    }
    Err(Error::DegenerateTraining {
        attempts: MAX_ATTEMPTS,
        message: format!(
            "spread of exact training values {last:.3e} below tolerance {:.3e}",
            cfg.conditioning_tol
        ),
    })
}

/// Noisy estimates of the training circuits.
pub fn cdr_noisy_training(
    e: &Experiment,
    cfg: &CdrConfig,
    training: &CdrTraining,
    noisy_backend: &dyn Backend,
) -> Result<Vec<EstimatorValue>> {
    let (_, shots) = cdr_shots(e, cfg)?;
    training
        .circuits
        .par_iter()
        .enumerate()
        .map(|(i, t)| noisy_backend.evaluate(t, &e.observable, shots, derive_seed(cfg.seed, &[2, i as u64])))
        .collect()
}

/// Noisy estimate of the original circuit.
pub fn cdr_noisy_original(e: &Experiment, cfg: &CdrConfig, noisy_backend: &dyn Backend) -> Result<EstimatorValue> {
    let (shots, _) = cdr_shots(e, cfg)?;
    noisy_backend.evaluate(&e.circuit, &e.observable, shots, derive_seed(cfg.seed, &[3]))
}

struct Line {
    intercept: f64,
    slope: f64,
    residual: f64,
    var_intercept: f64,
    var_slope: f64,
}

fn ols(x: &[f64], y: &[f64]) -> Line {
    let k = x.len() as f64;
    let mx = x.iter().sum::<f64>() / k;
    let my = y.iter().sum::<f64>() / k;
    let sxx: f64 = x.iter().map(|a| (a - mx).powi(2)).sum();
    let sxy: f64 = x.iter().zip(y).map(|(a, b)| (a - mx) * (b - my)).sum();
    let slope = sxy / sxx;
    let intercept = my - slope * mx;
    let residual: f64 = x.iter().zip(y).map(|(a, b)| (b - intercept - slope * a).powi(2)).sum();
    let s2 = if x.len() > 2 { residual / (k - 2.0) } else { 0.0 };
    Line {
        intercept,
        slope,
        residual,
        var_intercept: s2 * (1.0 / k + mx * mx / sxx),
        var_slope: s2 / sxx,
    }
}

/// Regress the training pairs and correct the original estimate.
pub fn cdr_collate(
    cfg: &CdrConfig,
    training: &CdrTraining,
    noisy_training: &[EstimatorValue],
    original: EstimatorValue,
) -> Result<MitigatedEstimate> {
    let xs = &training.ideal;
    let ys: Vec<f64> = noisy_training.iter().map(|v| v.value).collect();
    if xs.len() != ys.len() || xs.len() < 2 {
        return Err(Error::invalid("need at least two training pairs"));
    }
    let noisy_spread = spread(&ys);
    if noisy_spread < cfg.conditioning_tol {
        return Err(Error::DegenerateTraining {
            attempts: training.attempts,
            message: format!(
                "spread of noisy training values {noisy_spread:.3e} below tolerance {:.3e}",
                cfg.conditioning_tol
            ),
        });
    }
    let forward = ols(xs, &ys);
    let d0 = original.value;
    let (line, mitigated) = match cfg.fit_direction {
        CdrDirection::IdealFromNoisy => {
            let l = ols(&ys, xs);
            if l.slope.abs() < 1e-12 {
                return Err(Error::SingularFit(format!("slope F1 = {:e}", l.slope)));
            }
            let m = l.slope * d0 + l.intercept;
            (l, m)
        }
        CdrDirection::NoisyFromIdeal => {
            if forward.slope.abs() < 1e-12 {
                return Err(Error::SingularFit(format!("slope A = {:e}", forward.slope)));
            }
            let m = (d0 - forward.intercept) / forward.slope;
            (ols(xs, &ys), m)
        }
    };
    let variance = propagate_variance(&VarianceContext::Cdr {
        sigma_n2: original.sample_variance,
        noisy: d0,
        f0: forward.intercept,
        f1: forward.slope,
        training_ideal: xs.clone(),
    })?;
    let fit = FitResult {
        model: FitModel::Linear,
        params: vec![line.intercept, line.slope],
        extrapolated: mitigated,
        residual: line.residual,
        param_variances: vec![line.var_intercept, line.var_slope],
        fallback: false,
    };
    let mut est = MitigatedEstimate::new(mitigated, d0, fit, variance);
    est.metadata.insert("direction".into(), json!(cfg.fit_direction));
    est.metadata.insert("attempts".into(), json!(training.attempts));
    est.metadata.insert(
        "training".into(),
        json!(xs
            .iter()
            .zip(noisy_training)
            .map(|(x, y)| json!({"ideal": x, "noisy": y.value, "variance": y.sample_variance}))
            .collect::<Vec<_>>()),
    );
    let shots = original.n_shots + noisy_training.iter().map(|v| v.n_shots).sum::<u64>();
    est.metadata.insert("shots".into(), json!(shots));
    Ok(est)
}

/// Clifford data regression of `⟨O⟩`.
pub fn cdr(e: &Experiment, cfg: &CdrConfig, noisy_backend: &dyn Backend, ideal_backend: &dyn Backend) -> Result<MitigatedEstimate> {
    let training = cdr_training(e, cfg, ideal_backend)?;
    let noisy_training = cdr_noisy_training(e, cfg, &training, noisy_backend)?;
    let original = cdr_noisy_original(e, cfg, noisy_backend)?;
    cdr_collate(cfg, &training, &noisy_training, original)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::circuit::PauliOperator;
    use crate::sim::{ExactBackend, IdealBackend, NoiseModel, SampledBackend};

    fn rz_chain(angles: &[f64]) -> Circuit {
        let mut gates = Vec::new();
        for (i, &a) in angles.iter().enumerate() {
            gates.push(Gate::sx(i % 2));
            gates.push(Gate::rz(i % 2, a));
            gates.push(Gate::cx(i % 2, 1 - i % 2));
        }
        Circuit::from_gates(2, gates).unwrap()
    }

    fn count_non_clifford(c: &Circuit) -> usize {
        non_clifford_positions(c).unwrap().len()
    }

    #[test]
    fn nearest_clifford_examples() {
        assert_eq!(nearest_clifford_angle(0.2), 0.0);
        assert_eq!(nearest_clifford_angle(1.6), FRAC_PI_2);
        assert_eq!(nearest_clifford_angle(6.2), 0.0);
        assert_eq!(nearest_clifford_angle(3.0), 2.0 * FRAC_PI_2);
    }

    #[test]
    fn clifford_circuit_is_unchanged() {
        let c = rz_chain(&[0.0, FRAC_PI_2, std::f64::consts::PI]);
        let cfg = CdrConfig::default();
        let t = generate_training_set(&c, &cfg, 1).unwrap();
        assert_eq!(t.len(), cfg.n_training);
        assert!(t.iter().all(|x| *x == c));
    }

    #[test]
    fn keeps_requested_non_cliffords() {
        let angles: Vec<f64> = (0..15).map(|i| 0.3 + 0.1 * i as f64).collect();
        let c = rz_chain(&angles);
        assert_eq!(count_non_clifford(&c), 15);
        let cfg = CdrConfig { n_pairs: 3, ..CdrConfig::default() };
        for t in generate_training_set(&c, &cfg, 7).unwrap() {
            assert_eq!(count_non_clifford(&t), 10);
            assert_eq!(t.len(), c.len());
        }
    }

    #[test]
    fn few_non_cliffords_still_replaces_one() {
        let c = rz_chain(&[0.3, 0.9, 2.0]);
        for t in generate_training_set(&c, &CdrConfig::default(), 2).unwrap() {
            assert_eq!(count_non_clifford(&t), 2);
        }
    }

    #[test]
    fn u2q_rejected() {
        let mut c = Circuit::new(2);
        c.push(Gate::u2q(0, 1, crate::circuit::kron2(&crate::circuit::rz_matrix(0.1), &crate::circuit::rz_matrix(0.2))).unwrap()).unwrap();
        assert!(generate_training_set(&c, &CdrConfig::default(), 0).is_err());
    }

    #[test]
    fn hand_regression_example() {
        let cfg = CdrConfig {
            n_training: 3,
            fit_direction: CdrDirection::NoisyFromIdeal,
            ..CdrConfig::default()
        };
        let training = CdrTraining {
            circuits: vec![Circuit::new(1); 3],
            ideal: vec![1.0, 0.0, -1.0],
            attempts: 1,
        };
        let ev = |v: f64| EstimatorValue { value: v, n_shots: 25, sample_variance: 0.0 };
        let noisy = vec![ev(0.8), ev(0.1), ev(-0.6)];
        let r = cdr_collate(&cfg, &training, &noisy, ev(0.45)).unwrap();
        assert!((r.fit.params[1] - 0.7).abs() < 1e-14);
        assert!((r.fit.params[0] - 0.1).abs() < 1e-14);
        assert!((r.mitigated - 0.5).abs() < 1e-14);
    }

    fn compiled_experiment() -> Experiment {
        crate::mitigation::tests::haar_experiment(3, 21_000)
    }

    #[test]
    fn exact_under_global_depolarising() {
        let e = compiled_experiment();
        let ideal = IdealBackend.evaluate(&e.circuit, &e.observable, 1, 0).unwrap().value;
        let b = ExactBackend { noise: NoiseModel::global(0.001, 0.01) };
        for dir in [CdrDirection::IdealFromNoisy, CdrDirection::NoisyFromIdeal] {
            let cfg = CdrConfig { fit_direction: dir, ..CdrConfig::default() };
            let r = cdr(&e, &cfg, &b, &IdealBackend).unwrap();
            assert!(((r.mitigated - ideal) / (r.noisy - ideal)).abs() < 1e-9);
        }
    }

    #[test]
    fn noiseless_is_identity_regression() {
        let e = compiled_experiment();
        let r = cdr(&e, &CdrConfig::default(), &IdealBackend, &IdealBackend).unwrap();
        assert!((r.mitigated - r.noisy).abs() < 1e-12);
        assert!((r.fit.params[1] - 1.0).abs() < 1e-12);
    }

    #[test]
    fn budget_is_spent_exactly() {
        let e = compiled_experiment();
        let b = SampledBackend { noise: NoiseModel::local(1e-3, 1e-2) };
        let cfg = CdrConfig { n_training: 4, ..CdrConfig::default() };
        let e = Experiment { shot_budget: 10_007, ..e };
        let r = cdr(&e, &cfg, &b, &IdealBackend).unwrap();
        assert_eq!(r.metadata["shots"], json!(10_007));
    }

    #[test]
    fn degenerate_training_reported() {
        let c = rz_chain(&[0.0, FRAC_PI_2]);
        let e = Experiment::new(c, PauliOperator::global_z(2), 100).unwrap();
        let err = cdr(&e, &CdrConfig::default(), &IdealBackend, &IdealBackend).unwrap_err();
        assert!(matches!(err, Error::DegenerateTraining { attempts: 5, .. }));
    }
}
