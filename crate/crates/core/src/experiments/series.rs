// Copyright 2026 The mwspin Authors
// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::{PI, TAU};
use std::fmt::Write as _;

use nalgebra::DMatrix;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::fitting::{least_squares, linear_least_squares};

/// Sampled observable trace. `axis` names the abscissa column in CSV output
/// (`time_s` for dynamics).
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct TimeSeries {
    pub label: String,
    pub observable: String,
    pub axis: String,
    pub times: Vec<f64>,
    pub values: Vec<f64>,
    pub stderrs: Vec<f64>,
}

impl TimeSeries {
    pub fn new(
        label: impl Into<String>,
        observable: impl Into<String>,
        times: Vec<f64>,
        values: Vec<f64>,
        stderrs: Vec<f64>,
    ) -> Result<Self> {
        if values.len() != times.len() || stderrs.len() != times.len() {
            return Err(Error::DimensionMismatch {
                expected: times.len(),
                found: if values.len() != times.len() { values.len() } else { stderrs.len() },
            });
        }
        if times.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidConfig("sample times must be strictly increasing".into()));
        }
        Ok(TimeSeries {
            label: label.into(),
            observable: observable.into(),
            axis: "time_s".into(),
            times,
            values,
            stderrs,
        })
    }

    pub fn with_axis(mut self, axis: impl Into<String>) -> Self {
        self.axis = axis.into();
        self
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    /// Samples with `t0 <= t <= t1` (a small tolerance absorbs rounding of
    /// accumulated cycle times).
    pub fn window(&self, t0: f64, t1: f64) -> TimeSeries {
        let tol = 1e-6 * (t1 - t0).abs().max(f64::MIN_POSITIVE);
        let keep: Vec<usize> = (0..self.len())
            .filter(|&k| self.times[k] >= t0 - tol && self.times[k] <= t1 + tol)
            .collect();
        TimeSeries {
            label: self.label.clone(),
            observable: self.observable.clone(),
            axis: self.axis.clone(),
            times: keep.iter().map(|&k| self.times[k]).collect(),
            values: keep.iter().map(|&k| self.values[k]).collect(),
            stderrs: keep.iter().map(|&k| self.stderrs[k]).collect(),
        }
    }

    pub fn to_csv(&self) -> String {
        let mut out = format!("{},value,stderr\n", self.axis);
        for k in 0..self.len() {
            let _ = writeln!(out, "{},{},{}", self.times[k], self.values[k], self.stderrs[k]);
        }
        out
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FitModel {
    /// `c + A cos(2 pi f (t - t0) + phi)`
    Sinusoid,
    /// `c + A exp(-(t - t0)/tau) cos(2 pi f (t - t0) + phi)`
    Damped,
}

/// Fitted oscillation. `phase` refers to the first sample time; `decay_time`
/// is `None` for the undamped model or when no decay was resolved.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct FitResult {
    pub model: FitModel,
    pub frequency: f64,
    pub amplitude: f64,
    pub phase: f64,
    pub offset: f64,
    pub decay_time: Option<f64>,
    /// Variances of frequency, amplitude, phase, offset and (damped only)
    /// decay rate.
    pub covariance_diag: Vec<f64>,
    pub residual_norm: f64,
    pub samples: usize,
    /// False for flat traces and for fits covering less than one period.
    pub reliable: bool,
}

impl FitResult {
    pub fn frequency_stderr(&self) -> f64 {
        self.covariance_diag[0].max(0.0).sqrt()
    }
}

const MIN_SAMPLES: usize = 8;

fn median_spacing(t: &[f64]) -> f64 {
    let mut d: Vec<f64> = t.windows(2).map(|w| w[1] - w[0]).collect();
    d.sort_by(f64::total_cmp);
    d[d.len() / 2]
}

/// Coarse frequency guess: the trial frequency whose cosine/sine pair
/// explains most of the weighted variance.
fn periodogram_peak(u: &[f64], y: &[f64], w: &[f64], fmax: f64) -> Result<(f64, f64, f64, f64)> {
    let df = 1.0 / 16.0;
    let steps = (fmax / df).floor() as usize;
    let mut best: Option<(f64, f64, f64, f64, f64)> = None;
    for k in 1..=steps.max(1) {
        let f = k as f64 * df;
        let design = DMatrix::from_fn(u.len(), 3, |i, c| {
            w[i] * match c {
                0 => (TAU * f * u[i]).cos(),
                1 => (TAU * f * u[i]).sin(),
                _ => 1.0,
            }
        });
        let yw: Vec<f64> = y.iter().zip(w).map(|(a, b)| a * b).collect();
        let Ok((x, _, r)) = linear_least_squares(&design, &yw) else { continue };
        if best.map_or(true, |b| r < b.0) {
            best = Some((r, f, x[0], x[1], x[2]));
        }
    }
    let (_, f, a, b, c) = best.ok_or_else(|| Error::FitFailed("periodogram found no candidate".into()))?;
    // a cos + b sin = A cos(x + phi) with A = |(a, b)|, phi = atan2(-b, a)
    Ok((f, a.hypot(b), (-b).atan2(a), c))
}

/// Fits a sinusoid or damped sinusoid to `ts`. Points are weighted by their
/// inverse standard errors when all of those are positive.
pub fn fit_oscillation(ts: &TimeSeries, model: FitModel) -> Result<FitResult> {
    let n = ts.len();
    if n < MIN_SAMPLES {
        return Err(Error::FitFailed(format!("{n} samples, need at least {MIN_SAMPLES}")));
    }
    if ts.values.iter().any(|v| !v.is_finite()) {
        return Err(Error::FitFailed("non-finite sample".into()));
    }
    let t0 = ts.times[0];
    let span = ts.times[n - 1] - t0;
    let u: Vec<f64> = ts.times.iter().map(|t| (t - t0) / span).collect();
    let y = ts.values.clone();
    let w: Vec<f64> = if ts.stderrs.iter().all(|&s| s > 0.0) {
        ts.stderrs.iter().map(|s| 1.0 / s).collect()
    } else {
        vec![1.0; n]
    };
    let mean = y.iter().sum::<f64>() / n as f64;
    let spread = y.iter().map(|v| (v - mean).abs()).fold(0.0, f64::max);
    let n_params = if model == FitModel::Damped { 5 } else { 4 };
    if spread <= 1e-9 * mean.abs().max(1.0) {
        return Ok(FitResult {
            model,
            frequency: 0.0,
            amplitude: 0.0,
            phase: 0.0,
            offset: mean,
            decay_time: None,
            covariance_diag: vec![0.0; n_params],
            residual_norm: y.iter().map(|v| (v - mean).powi(2)).sum::<f64>().sqrt(),
            samples: n,
            reliable: false,
        });
    }
    let nyquist = 0.5 / (median_spacing(&u));
    let (f0, a0, phi0, c0) = periodogram_peak(&u, &y, &w, nyquist)?;

    let eval = |p: &[f64], ui: f64| -> f64 {
        let env = if model == FitModel::Damped { (-p[4] * ui).exp() } else { 1.0 };
        p[3] + p[1] * env * (TAU * p[0] * ui + p[2]).cos()
    };
    let residuals = |p: &[f64]| -> Vec<f64> { (0..n).map(|i| w[i] * (eval(p, u[i]) - y[i])).collect() };
    let mut p0 = vec![f0, a0, phi0, c0];
    let mut scales = vec![1e-3, a0.abs().max(1e-6), 1e-3, c0.abs().max(a0.abs()).max(1e-6)];
    if model == FitModel::Damped {
        p0.push(0.5);
        scales.push(1e-3);
    }
    let fit = least_squares(residuals, &p0, &scales, 200)?;
    if !fit.converged || fit.params.iter().any(|v| !v.is_finite()) {
        return Err(Error::FitFailed("oscillation fit did not converge".into()));
    }
    let mut p = fit.params.clone();
    if p[1] < 0.0 {
        p[1] = -p[1];
        p[2] += PI;
    }
    if p[0] < 0.0 {
        p[0] = -p[0];
        p[2] = -p[2];
    }
    p[2] = crate::compiler::wrap_phase(p[2]);
    let frequency = p[0] / span;
    if frequency > 0.5 / median_spacing(&ts.times) * (1.0 + 1e-9) {
        return Err(Error::FitFailed(format!(
            "fitted frequency {frequency:.4e} Hz is above the sampling Nyquist limit"
        )));
    }
    let mut cov = fit.covariance_diag.clone();
    cov[0] /= span * span;
    let decay_time = if model == FitModel::Damped {
        cov[4] /= span * span;
        (p[4] > 0.0).then(|| span / p[4])
    } else {
        None
    };
    Ok(FitResult {
        model,
        frequency,
        amplitude: p[1],
        phase: p[2],
        offset: p[3],
        decay_time,
        covariance_diag: cov,
        residual_norm: fit.residual_norm,
        samples: n,
        reliable: p[1] > 0.0 && frequency * span >= 1.0 - 1e-9,
    })
}
