use nalgebra::{DMatrix, DVector};
use serde::{Deserialize, Serialize};

use crate::error::{Error, FitDiagnostics, Result};

/// Extrapolation model for `value(λ)`.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitModel {
    /// `F₀ + F₁λ`.
    Linear,
    /// `Σ_{k≤K} F_k λ^k`, least squares.
    Polynomial(usize),
    /// Interpolating polynomial through all points, evaluated at 0.
    Richardson,
    /// `a·e^{−fλ}`.
    Exponential,
    /// `a·e^{−fλ} + b`.
    ExponentialOffset,
    /// `a·exp(Σ_{1≤k≤K} c_k λ^k)`.
    PolyExponential(usize),
}

impl FitModel {
    /// Free parameters for a fit over `n_points` points.
    pub fn n_params(self, n_points: usize) -> usize {
        match self {
            FitModel::Linear | FitModel::Exponential => 2,
            FitModel::Polynomial(k) | FitModel::PolyExponential(k) => k + 1,
            FitModel::Richardson => n_points,
            FitModel::ExponentialOffset => 3,
        }
    }
}

/// One noise level: `(λ, value, variance of value)`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitPoint {
    pub lambda: f64,
    pub value: f64,
    pub variance: f64,
}

impl FitPoint {
    pub fn new(lambda: f64, value: f64, variance: f64) -> FitPoint {
        FitPoint {
            lambda,
            value,
            variance,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    /// Model actually fitted (`Linear` after an exponential fallback).
    pub model: FitModel,
    /// Model parameters, or the Lagrange weights for `Richardson`.
    pub params: Vec<f64>,
    /// Model value at `λ = 0`.
    pub extrapolated: f64,
    /// Sum of squared residuals.
    pub residual: f64,
    pub param_variances: Vec<f64>,
    /// Set when an exponential model fell back to a linear fit because the
    /// values did not share a sign.
    #[serde(default, skip_serializing_if = "std::ops::Not::not")]
    pub fallback: bool,
}

const LM_MAX_ITER: usize = 200;
const LM_TOL: f64 = 1e-10;

/// Fit `points` with `model` and evaluate at zero noise. Least-squares fits
/// are weighted by `1/variance` when every variance is positive.
pub fn extrapolate(points: &[FitPoint], model: FitModel) -> Result<FitResult> {
    check_points(points, model)?;
    let weights = weights(points);
    match model {
        FitModel::Linear => poly_fit(points, 1, weights.as_deref(), model),
        FitModel::Polynomial(k) => poly_fit(points, k, weights.as_deref(), model),
        FitModel::Richardson => richardson(points),
        FitModel::Exponential | FitModel::PolyExponential(_) => {
            let k = if let FitModel::PolyExponential(k) = model { k } else { 1 };
            match log_fit(points, k, weights.as_deref())? {
                Some(p0) => refine(points, model, p0, weights.as_deref()),
                None => {
                    let mut r = poly_fit(points, 1, weights.as_deref(), FitModel::Linear)?;
                    r.fallback = true;
                    Ok(r)
                }
            }
        }
        FitModel::ExponentialOffset => {
            let p0 = offset_start(points, weights.as_deref())?;
            refine(points, model, p0, weights.as_deref())
        }
    }
}

fn check_points(points: &[FitPoint], model: FitModel) -> Result<()> {
    if let FitModel::Polynomial(0) | FitModel::PolyExponential(0) = model {
        return Err(Error::invalid("polynomial degree must be at least 1"));
    }
    let need = model.n_params(points.len()).max(2);
    if points.len() < need {
        return Err(Error::invalid(format!(
            "{model:?} needs at least {need} points, got {}",
            points.len()
        )));
    }
    if points.iter().any(|p| !(p.lambda.is_finite() && p.value.is_finite())) {
        return Err(Error::invalid("non-finite fit point"));
    }
    for (i, a) in points.iter().enumerate() {
        if points[..i].iter().any(|b| (a.lambda - b.lambda).abs() < 1e-12) {
            return Err(Error::invalid(format!("duplicate noise scale {}", a.lambda)));
        }
    }
    Ok(())
}

fn weights(points: &[FitPoint]) -> Option<Vec<f64>> {
    points
        .iter()
        .all(|p| p.variance > 0.0 && p.variance.is_finite())
        .then(|| points.iter().map(|p| 1.0 / p.variance).collect())
}

struct Lsq {
    params: DVector<f64>,
    /// `(AᵀWA)⁻¹`.
    cov: DMatrix<f64>,
}

fn lsq(a: &DMatrix<f64>, y: &DVector<f64>, w: Option<&[f64]>) -> Result<Lsq> {
    let mut a = a.clone();
    let mut y = y.clone();
    if let Some(w) = w {
        for (i, &wi) in w.iter().enumerate() {
            let s = wi.sqrt();
            a.row_mut(i).scale_mut(s);
            y[i] *= s;
        }
    }
    let ata = a.transpose() * &a;
    let scale = ata.diagonal().iter().fold(0.0f64, |m, v| m.max(v.abs()));
    let svd = a.clone().svd(true, true);
    let tol = 1e-13 * svd.singular_values.max() * (a.nrows().max(a.ncols()) as f64);
    if scale == 0.0 || svd.rank(tol) < a.ncols() {
        return Err(Error::SingularFit("design matrix is rank deficient".into()));
    }
    let params = svd.solve(&y, tol).map_err(|e| Error::SingularFit(e.to_string()))?;
    let cov = ata
        .try_inverse()
        .ok_or_else(|| Error::SingularFit("normal matrix is singular".into()))?;
    Ok(Lsq { params, cov })
}

fn variances(cov: &DMatrix<f64>, weighted: bool, rss_w: f64, n: usize, p: usize) -> Vec<f64> {
    let s2 = if weighted {
        1.0
    } else if n > p {
        rss_w / (n - p) as f64
    } else {
        0.0
    };
    cov.diagonal().iter().map(|v| (s2 * v).max(0.0)).collect()
}

fn vandermonde(points: &[FitPoint], k: usize) -> DMatrix<f64> {
    DMatrix::from_fn(points.len(), k + 1, |i, j| points[i].lambda.powi(j as i32))
}

fn poly_fit(points: &[FitPoint], k: usize, w: Option<&[f64]>, model: FitModel) -> Result<FitResult> {
    let a = vandermonde(points, k);
    let y = DVector::from_iterator(points.len(), points.iter().map(|p| p.value));
    let fit = lsq(&a, &y, w)?;
    let resid = &y - &a * &fit.params;
    let residual = resid.norm_squared();
    let rss_w = match w {
        Some(w) => resid.iter().zip(w).map(|(r, w)| r * r * w).sum(),
        None => residual,
    };
    Ok(FitResult {
        model,
        params: fit.params.iter().copied().collect(),
        extrapolated: fit.params[0],
        residual,
        param_variances: variances(&fit.cov, w.is_some(), rss_w, points.len(), k + 1),
        fallback: false,
    })
}

/// Weights `F` with `Σ F_i λ_i^m = δ_{m0}` for `m < k`, from the transposed
/// Vandermonde system.
fn richardson(points: &[FitPoint]) -> Result<FitResult> {
    let k = points.len();
    let vt = vandermonde(points, k - 1).transpose();
    let mut e0 = DVector::zeros(k);
    e0[0] = 1.0;
    let f = vt
        .lu()
        .solve(&e0)
        .ok_or_else(|| Error::SingularFit("Vandermonde system is singular".into()))?;
    let extrapolated = f.iter().zip(points).map(|(f, p)| f * p.value).sum();
    Ok(FitResult {
        model: FitModel::Richardson,
        params: f.iter().copied().collect(),
        extrapolated,
        residual: 0.0,
        param_variances: vec![0.0; k],
        fallback: false,
    })
}

/// Log-space polynomial fit of `|value|`; `None` when the values do not
/// share a strict sign. Returns `[a, c_1..c_k]` with `value ≈ a·exp(Σc_jλ^j)`.
fn log_fit(points: &[FitPoint], k: usize, w: Option<&[f64]>) -> Result<Option<Vec<f64>>> {
    let sign = points[0].value.signum();
    if points.iter().any(|p| p.value == 0.0 || p.value.signum() != sign) {
        return Ok(None);
    }
    let a = vandermonde(points, k);
    let y = DVector::from_iterator(points.len(), points.iter().map(|p| (p.value * sign).ln()));
    let lw: Option<Vec<f64>> = w.map(|w| w.iter().zip(points).map(|(w, p)| w * p.value * p.value).collect());
    let fit = lsq(&a, &y, lw.as_deref())?;
    let mut out = vec![sign * fit.params[0].exp()];
    out.extend(fit.params.iter().skip(1).copied());
    Ok(Some(out))
}

/// Starting point for `a·e^{−fλ} + b`: scan `f`, solve `(a, b)` linearly.
fn offset_start(points: &[FitPoint], w: Option<&[f64]>) -> Result<Vec<f64>> {
    let y = DVector::from_iterator(points.len(), points.iter().map(|p| p.value));
    let lmax = points.iter().fold(0.0f64, |m, p| m.max(p.lambda.abs())).max(1e-12);
    let mut best: Option<(f64, Vec<f64>)> = None;
    for i in -60i32..=60 {
        if i == 0 {
            continue;
        }
        let f = (i as f64).signum() * 10f64.powf((i.abs() as f64) / 10.0 - 4.0) / lmax;
        let a = DMatrix::from_fn(points.len(), 2, |r, c| if c == 0 { (-f * points[r].lambda).exp() } else { 1.0 });
        let Ok(fit) = lsq(&a, &y, w) else { continue };
        let rss = (&y - &a * &fit.params).norm_squared();
        if best.as_ref().is_none_or(|(b, _)| rss < *b) {
            best = Some((rss, vec![fit.params[0], f, fit.params[1]]));
        }
    }
    best.map(|(_, p)| p)
        .ok_or_else(|| Error::SingularFit("no usable starting point for offset exponential".into()))
}

/// Model value and gradient with respect to the parameters.
fn model_eval(model: FitModel, p: &[f64], lambda: f64) -> (f64, Vec<f64>) {
    match model {
        FitModel::Exponential => {
            let e = (-p[1] * lambda).exp();
            (p[0] * e, vec![e, -lambda * p[0] * e])
        }
        FitModel::ExponentialOffset => {
            let e = (-p[1] * lambda).exp();
            (p[0] * e + p[2], vec![e, -lambda * p[0] * e, 1.0])
        }
        FitModel::PolyExponential(k) => {
            let s: f64 = (1..=k).map(|j| p[j] * lambda.powi(j as i32)).sum();
            let e = s.exp();
            let v = p[0] * e;
            let mut g = vec![e];
            g.extend((1..=k).map(|j| lambda.powi(j as i32) * v));
            (v, g)
        }
        _ => unreachable!("linear models are solved directly"),
    }
}

fn extrapolated_of(model: FitModel, p: &[f64]) -> f64 {
    match model {
        FitModel::ExponentialOffset => p[0] + p[2],
        _ => p[0],
    }
}

/// Levenberg–Marquardt refinement of a nonlinear model.
fn refine(points: &[FitPoint], model: FitModel, start: Vec<f64>, w: Option<&[f64]>) -> Result<FitResult> {
    // The pure exponential is parameterised with a decay rate.
    let mut p = start;
    if model == FitModel::Exponential {
        p[1] = -p[1];
    }
    let n = points.len();
    let m = p.len();
    let wt = |i: usize| w.map_or(1.0, |w| w[i]);
    let system = |p: &[f64]| {
        let mut jac = DMatrix::zeros(n, m);
        let mut r = DVector::zeros(n);
        for (i, pt) in points.iter().enumerate() {
            let (v, g) = model_eval(model, p, pt.lambda);
            let s = wt(i).sqrt();
            r[i] = s * (pt.value - v);
            for (j, gj) in g.iter().enumerate() {
                jac[(i, j)] = s * gj;
            }
        }
        (jac, r)
    };
    let (mut jac, mut r) = system(&p);
    let mut cost = r.norm_squared();
    let mut mu = 1e-3;
    let mut last_step = f64::INFINITY;
    let mut converged = false;
    let mut iterations = 0;
    while iterations < LM_MAX_ITER {
        iterations += 1;
        if cost <= 1e-30 {
            converged = true;
            break;
        }
        let jtj = jac.transpose() * &jac;
        let g = jac.transpose() * &r;
        let mut accepted = false;
        while mu < 1e16 {
            let mut a = jtj.clone();
            for j in 0..m {
                a[(j, j)] += mu * jtj[(j, j)].max(1e-300);
            }
            let Some(step) = a.lu().solve(&g) else {
                mu *= 4.0;
                continue;
            };
            let trial: Vec<f64> = p.iter().zip(step.iter()).map(|(a, b)| a + b).collect();
            let (tj, tr) = system(&trial);
            let tcost = tr.norm_squared();
            if tcost.is_finite() && tcost <= cost {
                last_step = step.norm();
                let scale = DVector::from_column_slice(&p).norm() + LM_TOL;
                p = trial;
                jac = tj;
                r = tr;
                let improvement = cost - tcost;
                cost = tcost;
                mu = (mu / 3.0).max(1e-12);
                accepted = true;
                if last_step <= LM_TOL * scale || improvement <= 1e-15 * cost {
                    converged = true;
                }
                break;
            }
            mu *= 4.0;
        }
        if !accepted {
            // No descent direction left at working precision.
            converged = true;
        }
        if converged {
            break;
        }
    }
    if !converged || p.iter().any(|v| !v.is_finite()) {
        return Err(Error::FitFailure {
            message: format!("{model:?} fit did not converge"),
            diagnostics: FitDiagnostics {
                iterations,
                params: p,
                residual: cost,
                last_step,
            },
            partial: Vec::new(),
        });
    }
    let residual = points
        .iter()
        .map(|pt| (pt.value - model_eval(model, &p, pt.lambda).0).powi(2))
        .sum();
    let cov = (jac.transpose() * &jac).try_inverse().unwrap_or_else(|| DMatrix::zeros(m, m));
    let param_variances = variances(&cov, w.is_some(), cost, n, m);
    let extrapolated = extrapolated_of(model, &p);
    if !extrapolated.is_finite() {
        return Err(Error::SingularFit("non-finite extrapolation".into()));
    }
    Ok(FitResult {
        model,
        params: p,
        extrapolated,
        residual,
        param_variances,
        fallback: false,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn pts(data: &[(f64, f64)]) -> Vec<FitPoint> {
        data.iter().map(|&(l, v)| FitPoint::new(l, v, 0.0)).collect()
    }

    #[test]
    fn linear_two_points() {
        let r = extrapolate(&pts(&[(1.0, 0.8), (3.0, 0.6)]), FitModel::Linear).unwrap();
        assert!((r.params[1] + 0.1).abs() < 1e-14);
        assert!((r.extrapolated - 0.9).abs() < 1e-14);
    }

    #[test]
    fn richardson_weights() {
        let r = extrapolate(&pts(&[(1.0, 0.3), (3.0, 0.2), (5.0, 0.1)]), FitModel::Richardson).unwrap();
        for (f, e) in r.params.iter().zip([15.0 / 8.0, -5.0 / 4.0, 3.0 / 8.0]) {
            assert!((f - e).abs() < 1e-12);
        }
        let r = extrapolate(&pts(&[(1.0, 0.0), (2.0, 0.0)]), FitModel::Richardson).unwrap();
        assert!((r.params[0] - 2.0).abs() < 1e-12 && (r.params[1] + 1.0).abs() < 1e-12);
    }

    #[test]
    fn two_level_exponential_closed_form() {
        let (g, v): (f64, f64) = (0.9, 0.5);
        let (y1, y3) = (g * v, g.powi(3) * v);
        let r = extrapolate(&pts(&[(1.0, y1), (3.0, y3)]), FitModel::Exponential).unwrap();
        // ⟨O⟩ = y₁^{3/2}·y₃^{−1/2}
        let closed = y1.powf(1.5) * y3.powf(-0.5);
        assert!((closed - 0.5).abs() < 1e-12);
        assert!((r.extrapolated - 0.5).abs() < 1e-9);
    }

    #[test]
    fn exponential_recovers_negative_amplitude() {
        let data: Vec<_> = [1.0, 3.0, 5.0, 7.0, 9.0].iter().map(|&l| (l, -0.7 * (-0.05f64 * l).exp())).collect();
        let r = extrapolate(&pts(&data), FitModel::Exponential).unwrap();
        assert!((r.extrapolated + 0.7).abs() < 1e-10);
        assert!((r.params[1] - 0.05).abs() < 1e-10);
    }

    #[test]
    fn mixed_signs_fall_back_to_linear() {
        let r = extrapolate(&pts(&[(1.0, 0.1), (3.0, -0.1)]), FitModel::Exponential).unwrap();
        assert!(r.fallback);
        assert_eq!(r.model, FitModel::Linear);
        assert!((r.extrapolated - 0.2).abs() < 1e-12);
    }

    #[test]
    fn offset_exponential_exact_data() {
        let f = |l: f64| 0.6 * (-0.2 * l).exp() + 0.1;
        let data: Vec<_> = [1.0, 3.0, 5.0, 7.0, 9.0].iter().map(|&l| (l, f(l))).collect();
        let r = extrapolate(&pts(&data), FitModel::ExponentialOffset).unwrap();
        assert!((r.extrapolated - 0.7).abs() < 1e-7, "{}", r.extrapolated);
    }

    #[test]
    fn poly_exponential_exact_data() {
        let f = |l: f64| 0.8 * (-0.1 * l + 0.004 * l * l).exp();
        let data: Vec<_> = [1.0, 3.0, 5.0, 7.0].iter().map(|&l| (l, f(l))).collect();
        let r = extrapolate(&pts(&data), FitModel::PolyExponential(2)).unwrap();
        assert!((r.extrapolated - 0.8).abs() < 1e-10);
    }

    #[test]
    fn bad_inputs() {
        assert!(extrapolate(&pts(&[(1.0, 0.5), (1.0, 0.4)]), FitModel::Linear).is_err());
        assert!(extrapolate(&pts(&[(1.0, 0.5), (3.0, 0.4)]), FitModel::Polynomial(2)).is_err());
        assert!(extrapolate(&pts(&[(1.0, 0.5)]), FitModel::Richardson).is_err());
    }

    #[test]
    fn weighted_fit_prefers_precise_points() {
        let p = vec![
            FitPoint::new(1.0, 1.0, 1e-6),
            FitPoint::new(2.0, 2.0, 1e-6),
            FitPoint::new(3.0, 10.0, 1e6),
        ];
        let r = extrapolate(&p, FitModel::Linear).unwrap();
        assert!(r.extrapolated.abs() < 1e-3);
    }

    proptest! {
        #[test]
        fn richardson_recovers_constant_term(coefs in prop::collection::vec(-1.0f64..1.0, 1..5)) {
            let lambdas = [1.0f64, 3.0, 5.0, 7.0, 9.0];
            let k = coefs.len();
            let data: Vec<_> = lambdas[..k + 1]
                .iter()
                .map(|&l| (l, 0.3 + coefs.iter().enumerate().map(|(j, c)| c * l.powi(j as i32 + 1)).sum::<f64>()))
                .collect();
            let r = extrapolate(&pts(&data), FitModel::Richardson).unwrap();
            prop_assert!((r.extrapolated - 0.3).abs() < 1e-10);
            prop_assert!((r.params.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        }
    }
}
