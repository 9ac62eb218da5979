// Copyright 2026 The mwspin Authors
// SPDX-License-Identifier: Apache-2.0

//! Nonlinear least squares on top of Levenberg-Marquardt with a
//! central-difference Jacobian.

use levenberg_marquardt::{LeastSquaresProblem, LevenbergMarquardt};
use nalgebra::{DMatrix, DVector, Dyn, Owned};

use crate::error::{Error, Result};

/// Outcome of [`least_squares`].
#[derive(Clone, Debug, PartialEq)]
pub struct LeastSquaresFit {
    pub params: Vec<f64>,
    /// `s^2 diag((J^T J)^-1)` with `s^2 = RSS / (m - p)`; NaN when singular.
    pub covariance_diag: Vec<f64>,
    /// `sqrt(RSS)`.
    pub residual_norm: f64,
    pub evaluations: usize,
    pub converged: bool,
}

struct Problem<'a, F> {
    residuals: &'a F,
    params: DVector<f64>,
    scales: &'a [f64],
}

impl<F> Problem<'_, F>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    fn jacobian_at(&self, p: &DVector<f64>) -> Option<DMatrix<f64>> {
        let base = (self.residuals)(p.as_slice());
        let mut jac = DMatrix::zeros(base.len(), p.len());
        for k in 0..p.len() {
            let h = 1e-7 * p[k].abs().max(self.scales[k]);
            let mut up = p.clone();
            let mut down = p.clone();
            up[k] += h;
            down[k] -= h;
            let ru = (self.residuals)(up.as_slice());
            let rd = (self.residuals)(down.as_slice());
            for i in 0..base.len() {
                jac[(i, k)] = (ru[i] - rd[i]) / (2.0 * h);
            }
        }
        jac.iter().all(|v| v.is_finite()).then_some(jac)
    }
}

impl<F> LeastSquaresProblem<f64, Dyn, Dyn> for Problem<'_, F>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    type ResidualStorage = Owned<f64, Dyn>;
    type JacobianStorage = Owned<f64, Dyn, Dyn>;
    type ParameterStorage = Owned<f64, Dyn>;

    fn set_params(&mut self, p: &DVector<f64>) {
        self.params.copy_from(p);
    }

    fn params(&self) -> DVector<f64> {
        self.params.clone()
    }

    fn residuals(&self) -> Option<DVector<f64>> {
        let r = DVector::from_vec((self.residuals)(self.params.as_slice()));
        r.iter().all(|v| v.is_finite()).then_some(r)
    }

    fn jacobian(&self) -> Option<DMatrix<f64>> {
        self.jacobian_at(&self.params)
    }
}

/// Minimises `|r(p)|^2` from `p0`. `scales` sets the finite-difference step
/// floor per parameter. At most `patience * (p + 1)` residual evaluations.
pub fn least_squares<F>(residuals: F, p0: &[f64], scales: &[f64], patience: usize) -> Result<LeastSquaresFit>
where
    F: Fn(&[f64]) -> Vec<f64>,
{
    if scales.len() != p0.len() {
        return Err(Error::DimensionMismatch {
            expected: p0.len(),
            found: scales.len(),
        });
    }
    let m = residuals(p0).len();
    if m < p0.len() {
        return Err(Error::FitFailed(format!("{m} residuals for {} parameters", p0.len())));
    }
    let problem = Problem {
        residuals: &residuals,
        params: DVector::from_column_slice(p0),
        scales,
    };
    let (problem, report) = LevenbergMarquardt::new().with_patience(patience).minimize(problem);
    let params = problem.params.clone();
    let r = residuals(params.as_slice());
    let rss: f64 = r.iter().map(|v| v * v).sum();
    if !rss.is_finite() {
        return Err(Error::FitFailed("non-finite residuals".into()));
    }
    let dof = (m - p0.len()).max(1) as f64;
    let covariance_diag = problem
        .jacobian_at(&params)
        .and_then(|j| (j.transpose() * &j).try_inverse())
        .map(|inv| (0..p0.len()).map(|k| inv[(k, k)] * rss / dof).collect())
        .unwrap_or_else(|| vec![f64::NAN; p0.len()]);
    Ok(LeastSquaresFit {
        params: params.iter().copied().collect(),
        covariance_diag,
        residual_norm: rss.sqrt(),
        evaluations: report.number_of_evaluations,
        converged: report.termination.was_successful(),
    })
}

/// Ordinary linear least squares `min |A x - y|`, with the diagonal of the
/// parameter covariance.
pub fn linear_least_squares(design: &DMatrix<f64>, y: &[f64]) -> Result<(Vec<f64>, Vec<f64>, f64)> {
    let (m, p) = design.shape();
    if y.len() != m {
        return Err(Error::DimensionMismatch { expected: m, found: y.len() });
    }
    let ata = design.transpose() * design;
    let inv = ata
        .try_inverse()
        .ok_or_else(|| Error::FitFailed("singular design matrix".into()))?;
    let yv = DVector::from_column_slice(y);
    let x = &inv * design.transpose() * &yv;
    let r = design * &x - yv;
    let rss = r.norm_squared();
    let dof = (m.saturating_sub(p)).max(1) as f64;
    let cov = (0..p).map(|k| inv[(k, k)] * rss / dof).collect();
    Ok((x.iter().copied().collect(), cov, rss.sqrt()))
}
