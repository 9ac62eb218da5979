// Copyright 2026 The mwspin Authors
// SPDX-License-Identifier: Apache-2.0

//! Drive-phase and Rz-amplitude calibration on a coupled pair, run through
//! the lab-frame path so the hidden imperfections show up in the counts.

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use nalgebra::DMatrix;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::emulator::{derive_seed, Emulator, Estimate, Observable, RunOptions};
use super::DeviceParams;
use crate::compiler::{wrap_phase, Axis, FrameTracker, Segment, Sequence, DEFAULT_HALF_PI};
use crate::error::{Error, Result};
use crate::fitting::{least_squares, linear_least_squares};
use crate::qsim::StateVector;

/// Index of `|01>` (site 0 in `|0>`, site 1 in `|1>`).
const P01: usize = 1;

fn pair_coupling(dev: &DeviceParams) -> Result<f64> {
    if dev.nqubits() != 2 {
        return Err(Error::InvalidDevice(format!(
            "calibration needs a coupled pair, device has {} qubits",
            dev.nqubits()
        )));
    }
    let j: f64 = dev.edges.iter().map(|e| e.coupling).sum();
    if j == 0.0 || !j.is_finite() {
        return Err(Error::FitFailed("flat response: the pair is uncoupled".into()));
    }
    Ok(j)
}

/// `X/2` on both qubits, then virtual Z shifts that undo the idle-frame
/// drift accumulated during the pulses.
fn prepare_superpositions(dev: &DeviceParams) -> Vec<Segment> {
    let pulse = Segment::rotation(&[0, 1], Axis::X, FRAC_PI_2, DEFAULT_HALF_PI);
    let mut tracker = FrameTracker::from_device(dev);
    tracker.advance(&pulse);
    let mut segs = vec![pulse];
    for (q, &a) in tracker.raw_phases().iter().enumerate() {
        if a != 0.0 {
            segs.push(Segment::VirtualZ { site: q, phase: -a });
        }
    }
    segs
}

/// Resonant read-out interval `pi / (4 |J|)`; the sign of `J` orients the
/// response as `(1 + sin(phi + phi0)) / 4`.
fn readout_interval(j: f64) -> (Segment, f64) {
    (Segment::ResonantEvolve { duration: PI / (4.0 * j.abs()) }, -j.signum())
}

/// Phase-calibration program for virtual phase `phi` on qubit 1.
pub fn phase_calibration_sequence(dev: &DeviceParams, phi: f64) -> Result<Sequence> {
    let j = pair_coupling(dev)?;
    let (evolve, sign) = readout_interval(j);
    let mut segs = prepare_superpositions(dev);
    segs.push(Segment::VirtualZ { site: 1, phase: sign * phi });
    segs.push(evolve);
    Sequence::new(dev.graph()?, segs, 1)
}

/// `n` evenly spaced phases covering `[-pi, pi)`.
pub fn default_phase_grid(n: usize) -> Vec<f64> {
    (0..n).map(|k| -PI + TAU * k as f64 / n as f64).collect()
}

#[derive(Clone, Debug, PartialEq)]
pub struct PhaseCalOptions {
    pub grid: Vec<f64>,
    /// `None` uses exact probabilities.
    pub shots: Option<u64>,
    pub seed: u64,
    pub readout_error: bool,
}

impl Default for PhaseCalOptions {
    fn default() -> Self {
        PhaseCalOptions {
            grid: default_phase_grid(24),
            shots: Some(10_000),
            seed: 0,
            readout_error: false,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseCalibration {
    /// Estimated `phi0_1 - phi0_0`, wrapped to `(-pi, pi]`.
    pub offset: f64,
    pub offset_stderr: f64,
    pub amplitude: f64,
    pub baseline: f64,
    pub residual_norm: f64,
    pub points: Vec<(f64, Estimate)>,
}

/// Scans the virtual phase on qubit 1, records `P01`, and fits
/// `A sin(phi + phi0) + c`.
pub fn calibrate_phase(emu: &Emulator, opts: &PhaseCalOptions) -> Result<PhaseCalibration> {
    let dev = emu.device();
    pair_coupling(dev)?;
    if opts.grid.len() < 4 {
        return Err(Error::InvalidConfig("phase grid needs at least 4 points".into()));
    }
    let psi0 = StateVector::basis(2, 0)?;
    let obs = Observable::population(2, P01);
    let points = opts
        .grid
        .par_iter()
        .enumerate()
        .map(|(k, &phi)| {
            let seq = phase_calibration_sequence(dev, phi)?;
            let run = RunOptions {
                noise: false,
                shots: opts.shots,
                seed: derive_seed(opts.seed, k as u64),
                readout_error: opts.readout_error,
            };
            Ok((phi, emu.measure_lab(&seq, &psi0, &obs, &run)?))
        })
        .collect::<Result<Vec<_>>>()?;
    let design = DMatrix::from_fn(points.len(), 3, |r, c| match c {
        0 => points[r].0.sin(),
        1 => points[r].0.cos(),
        _ => 1.0,
    });
    let y: Vec<f64> = points.iter().map(|(_, e)| e.value).collect();
    let (x, cov, residual_norm) = linear_least_squares(&design, &y)?;
    let (a, b) = (x[0], x[1]);
    let amplitude = a.hypot(b);
    let amp_err = (cov[0] + cov[1]).max(0.0).sqrt();
    if amplitude < 1e-6 || amplitude < 3.0 * amp_err {
        return Err(Error::FitFailed(format!(
            "flat phase response (amplitude {amplitude:.3e}); check J and the evolution time"
        )));
    }
    // A sin(phi + phi0) = A cos(phi0) sin(phi) + A sin(phi0) cos(phi)
    let offset = wrap_phase(b.atan2(a));
    let offset_stderr = (a * a * cov[1] + b * b * cov[0]).max(0.0).sqrt() / (amplitude * amplitude);
    Ok(PhaseCalibration {
        offset,
        offset_stderr,
        amplitude,
        baseline: x[2],
        residual_norm,
        points,
    })
}

#[derive(Clone, Debug, PartialEq)]
pub struct RzCalOptions {
    /// Repetition counts `n` of the idle + compensation cycle.
    pub cycle_counts: Vec<usize>,
    /// Z-pulse amplitudes to scan; `None` uses [`default_rz_grid`].
    pub grid: Option<Vec<f64>>,
    pub idle: f64,
    pub pad: f64,
    /// Previously calibrated drive-phase offset, removed from the set phase.
    pub phase_correction: f64,
    pub shots: Option<u64>,
    pub seed: u64,
    pub readout_error: bool,
}

impl Default for RzCalOptions {
    fn default() -> Self {
        RzCalOptions {
            cycle_counts: vec![1, 2, 3, 4, 5],
            grid: None,
            idle: 40e-9,
            pad: 20e-9,
            phase_correction: 0.0,
            shots: Some(10_000),
            seed: 0,
            readout_error: false,
        }
    }
}

/// 41 amplitudes spanning a nominal phase of `+-1.25 pi` over the pad.
pub fn default_rz_grid(dev: &DeviceParams, pad: f64) -> Result<Vec<f64>> {
    let alpha = nominal_alpha(dev)?;
    let half = 1.25 * PI / (alpha.abs() * pad);
    Ok((0..41).map(|k| -half + 2.0 * half * k as f64 / 40.0).collect())
}

fn nominal_alpha(dev: &DeviceParams) -> Result<f64> {
    let a = dev.qubits.get(1).map(|q| q.alpha_flux).unwrap_or(0.0);
    if a == 0.0 {
        return Err(Error::InvalidDevice("qubit 1 has zero flux sensitivity".into()));
    }
    Ok(a)
}

/// Relative frame phase `A_1 - A_0` gained per idle + pad cycle with the
/// Z pulse off.
fn drift_per_cycle(dev: &DeviceParams, idle: f64, pad: f64) -> f64 {
    (dev.qubits[1].frame_detuning() - dev.qubits[0].frame_detuning()) * (idle + pad)
}

/// Smallest-magnitude amplitude closing the relative frame phase per cycle
/// at the nominal flux sensitivity.
pub fn analytic_rz_amplitude(dev: &DeviceParams, idle: f64, pad: f64) -> Result<f64> {
    pair_coupling(dev)?;
    let alpha = nominal_alpha(dev)?;
    Ok(wrap_phase(-drift_per_cycle(dev, idle, pad)) / (alpha * pad))
}

/// Rz-calibration program: `n` cycles of idle followed by a Z pulse of
/// amplitude `amplitude` on qubit 1 while qubit 0 pads, then the resonant
/// read-out interval.
pub fn rz_calibration_sequence(dev: &DeviceParams, n: usize, amplitude: f64, opts: &RzCalOptions) -> Result<Sequence> {
    let j = pair_coupling(dev)?;
    let alpha = nominal_alpha(dev)?;
    let (evolve, sign) = readout_interval(j);
    let mut segs = prepare_superpositions(dev);
    segs.push(Segment::VirtualZ {
        site: 1,
        phase: sign * (FRAC_PI_2 - opts.phase_correction),
    });
    for _ in 0..n {
        if opts.idle > 0.0 {
            segs.push(Segment::Idle { duration: opts.idle });
        }
        segs.push(Segment::PhysicalRz {
            detunings: vec![(1, alpha * amplitude)],
            duration: opts.pad,
        });
    }
    segs.push(evolve);
    Sequence::new(dev.graph()?, segs, 1)
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RzScan {
    pub cycles: usize,
    pub points: Vec<(f64, Estimate)>,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RzCalibration {
    /// Smallest-magnitude closing amplitude.
    pub amplitude: f64,
    /// Fitted phase per unit amplitude over one pad, `alpha_true * pad`.
    pub phase_per_unit: f64,
    pub contrast: f64,
    pub residual_norm: f64,
    pub scans: Vec<RzScan>,
}

/// Response model `c + a cos(n k (x - x0))`, parameters `[x0, k, a, c]`.
fn rz_model(p: &[f64], n: usize, x: f64) -> f64 {
    p[3] + p[2] * (n as f64 * p[1] * (x - p[0])).cos()
}

/// Scans the Z-pulse amplitude for every repetition count, then fits all
/// scans together with weights `exp(-n T_cycle / T2*)`, adding one
/// repetition count at a time so each stage starts inside the right basin.
pub fn calibrate_rz_amplitude(emu: &Emulator, opts: &RzCalOptions) -> Result<RzCalibration> {
    let dev = emu.device();
    pair_coupling(dev)?;
    let alpha = nominal_alpha(dev)?;
    if !(opts.pad > 0.0) || !(opts.idle >= 0.0) {
        return Err(Error::InvalidConfig("pad must be positive and idle non-negative".into()));
    }
    let mut counts = opts.cycle_counts.clone();
    counts.sort_unstable();
    counts.dedup();
    if counts.is_empty() || counts[0] == 0 {
        return Err(Error::InvalidConfig("cycle counts must be positive".into()));
    }
    let grid = match &opts.grid {
        Some(g) => g.clone(),
        None => default_rz_grid(dev, opts.pad)?,
    };
    if grid.len() < 5 {
        return Err(Error::InvalidConfig("amplitude grid needs at least 5 points".into()));
    }
    let psi0 = StateVector::basis(2, 0)?;
    let obs = Observable::population(2, P01);
    let jobs: Vec<(usize, usize, f64)> = counts
        .iter()
        .flat_map(|&n| grid.iter().enumerate().map(move |(k, &x)| (n, k, x)))
        .collect();
    let values = jobs
        .par_iter()
        .map(|&(n, k, x)| {
            let seq = rz_calibration_sequence(dev, n, x, opts)?;
            let run = RunOptions {
                noise: false,
                shots: opts.shots,
                seed: derive_seed(opts.seed, (n as u64) << 32 | k as u64),
                readout_error: opts.readout_error,
            };
            emu.measure_lab(&seq, &psi0, &obs, &run)
        })
        .collect::<Result<Vec<_>>>()?;
    let scans: Vec<RzScan> = counts
        .iter()
        .enumerate()
        .map(|(i, &n)| RzScan {
            cycles: n,
            points: grid
                .iter()
                .copied()
                .zip(values[i * grid.len()..(i + 1) * grid.len()].iter().copied())
                .collect(),
        })
        .collect();

    let t2 = dev.qubits.iter().map(|q| q.t2_star).fold(f64::INFINITY, f64::min);
    let t_cycle = opts.idle + opts.pad;
    let weight = |n: usize| (-(n as f64) * t_cycle / t2).exp().sqrt();

    let first = &scans[0];
    let (x_best, _) = first
        .points
        .iter()
        .fold((first.points[0].0, f64::NEG_INFINITY), |best, (x, e)| {
            if e.value > best.1 {
                (*x, e.value)
            } else {
                best
            }
        });
    let span = grid.iter().fold(0.0f64, |m, x| m.max(x.abs()));
    let mut p = vec![x_best, alpha * opts.pad, 0.25, 0.25];
    let scales = [span, (alpha * opts.pad).abs(), 1.0, 1.0];
    let mut fit = None;
    for stage in 1..=scans.len() {
        let used = &scans[..stage];
        let f = least_squares(
            |q| {
                used.iter()
                    .flat_map(|s| {
                        let w = weight(s.cycles);
                        s.points.iter().map(move |(x, e)| w * (rz_model(q, s.cycles, *x) - e.value))
                    })
                    .collect()
            },
            &p,
            &scales,
            200,
        )?;
        p = f.params.clone();
        fit = Some(f);
    }
    let fit = fit.expect("at least one stage");
    let (x0, k, contrast) = (p[0], p[1], p[2]);
    if !(contrast > 0.0) || k == 0.0 || !k.is_finite() {
        return Err(Error::NoClosure);
    }
    // all closing amplitudes are x0 + 2 pi m / k
    let period = TAU / k.abs();
    let amplitude = x0 - period * (x0 / period).round();
    let lo = grid.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = grid.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    if amplitude < lo || amplitude > hi {
        return Err(Error::NoClosure);
    }
    Ok(RzCalibration {
        amplitude,
        phase_per_unit: k.abs(),
        contrast,
        residual_norm: fit.residual_norm,
        scans,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    fn exact() -> PhaseCalOptions {
        PhaseCalOptions {
            shots: None,
            ..Default::default()
        }
    }

    #[test]
    fn phase_response_matches_formula() {
        let dev = DeviceParams::xyz_pair();
        let emu = Emulator::ideal(dev.clone()).unwrap();
        let psi0 = StateVector::basis(2, 0).unwrap();
        let obs = Observable::population(2, P01);
        for phi in [FRAC_PI_2, -FRAC_PI_2, 0.3, 2.0] {
            let seq = phase_calibration_sequence(&dev, phi).unwrap();
            let e = emu.measure_lab(&seq, &psi0, &obs, &RunOptions::default()).unwrap();
            assert!((e.value - (1.0 + phi.sin()) / 4.0).abs() < 1e-9, "{phi}: {}", e.value);
        }
    }

    #[test]
    fn positive_coupling_keeps_orientation() {
        let mut dev = DeviceParams::xyz_pair();
        dev.edges[0].coupling = dev.edges[0].coupling.abs();
        let emu = Emulator::ideal(dev.clone()).unwrap();
        let cal = calibrate_phase(&emu, &exact()).unwrap();
        assert!(cal.offset.abs() < 1e-9);
    }

    #[test]
    fn recovers_injected_offset() {
        let dev = DeviceParams::xyz_pair();
        let hidden = HiddenState::new(vec![0.1, 0.4], dev.qubits.iter().map(|q| q.alpha_flux).collect());
        let emu = Emulator::new(dev, hidden).unwrap();
        let cal = calibrate_phase(&emu, &exact()).unwrap();
        assert!((cal.offset - 0.3).abs() < 1e-9, "{}", cal.offset);
        assert!((cal.amplitude - 0.25).abs() < 1e-9);
    }

    #[test]
    fn uncoupled_pair_fails() {
        let mut dev = DeviceParams::xyz_pair();
        dev.edges[0].coupling = 0.0;
        let emu = Emulator::ideal(dev).unwrap();
        assert!(matches!(calibrate_phase(&emu, &exact()), Err(Error::FitFailed(_))));
    }

    fn rz_exact() -> RzCalOptions {
        RzCalOptions {
            shots: None,
            ..Default::default()
        }
    }

    #[test]
    fn rz_nominal_matches_analytic() {
        let dev = DeviceParams::xyz_pair();
        let emu = Emulator::ideal(dev.clone()).unwrap();
        let cal = calibrate_rz_amplitude(&emu, &rz_exact()).unwrap();
        let expected = analytic_rz_amplitude(&dev, 40e-9, 20e-9).unwrap();
        let alpha = dev.qubits[1].alpha_flux;
        assert!((alpha * 20e-9 * (cal.amplitude - expected)).abs() < 1e-6, "{} vs {expected}", cal.amplitude);
    }

    #[test]
    fn rz_without_mismatch_is_zero() {
        let dev = DeviceParams::xyz_pair().without_frame_mismatch();
        let emu = Emulator::ideal(dev.clone()).unwrap();
        let cal = calibrate_rz_amplitude(&emu, &rz_exact()).unwrap();
        assert!(cal.amplitude.abs() < 1e-9, "{}", cal.amplitude);
        assert_eq!(analytic_rz_amplitude(&dev, 40e-9, 20e-9).unwrap(), 0.0);
    }

    use super::super::HiddenState;
}
