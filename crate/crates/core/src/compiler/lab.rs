// Copyright 2026 The mwspin Authors
// SPDX-License-Identifier: Apache-2.0

//! Lab-frame target. Away from resonance each qubit sits at its idle
//! frequency and is driven by
//!
//! ```text
//! H_d(t) = sum_i Omega_i [cos(w_i t + phi_i) X_i/2 + sin(w_i t + phi_i) Y_i/2]
//! ```
//!
//! which is static in the frame rotating at `w_i`; on resonance the register
//! evolves under `H0_work + H_XY`. Each piece is therefore integrated exactly
//! as `exp(-i H0 t_b) exp(-i H~ (t_b - t_a)) exp(i H0 t_a)`.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::frame::FrameTracker;
use super::{Segment, Sequence};
use crate::device::DeviceParams;
use crate::error::{Error, Result};
use crate::hamiltonians::build_xy;
use crate::qsim::{gates, CMatrix, Pauli, PauliString, PauliSum, Propagator, StateVector};

/// A resonant drive on one qubit, phase referenced to its idle frame.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Drive {
    pub site: usize,
    /// Rabi rate in rad/s.
    pub rabi: f64,
    pub phase: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum LabPiece {
    /// Idle point, optional drives and Rz detunings (rad/s).
    Idle {
        start: f64,
        duration: f64,
        drives: Vec<Drive>,
        detunings: Vec<(usize, f64)>,
    },
    /// Working point with the native coupling on.
    Work { start: f64, duration: f64 },
    /// Exact zero-duration `Rz`.
    FrameShift { time: f64, site: usize, phase: f64 },
}

impl LabPiece {
    pub fn duration(&self) -> f64 {
        match self {
            LabPiece::Idle { duration, .. } | LabPiece::Work { duration, .. } => *duration,
            LabPiece::FrameShift { .. } => 0.0,
        }
    }
}

/// Imperfections applied on top of a schedule: per-qubit drive-phase offsets
/// and a multiplicative error on every Rz detuning.
#[derive(Clone, Debug, PartialEq, Default)]
pub struct LabPerturbation {
    pub phase_offsets: Vec<f64>,
    pub detuning_scale: Vec<f64>,
}

#[derive(Clone, Debug)]
pub struct LabSchedule {
    nqubits: usize,
    omega_idle: Vec<f64>,
    omega_work: Vec<f64>,
    coupling: PauliSum,
    pieces: Vec<LabPiece>,
    total: f64,
    final_phases: Vec<f64>,
}

impl LabSchedule {
    pub fn pieces(&self) -> &[LabPiece] {
        &self.pieces
    }

    pub fn total_duration(&self) -> f64 {
        self.total
    }

    pub fn is_empty(&self) -> bool {
        self.pieces.is_empty()
    }

    /// Tracked frame phases at the end of the schedule.
    pub fn final_phases(&self) -> &[f64] {
        &self.final_phases
    }

    fn h0(&self, work: bool) -> &[f64] {
        if work {
            &self.omega_work
        } else {
            &self.omega_idle
        }
    }

    /// Lab Hamiltonian of every timed piece as `(H0 + H~, duration)`, with
    /// `H~` written in the piece's rotating frame. Frame shifts are omitted.
    pub fn hamiltonians(&self) -> Vec<(PauliSum, f64)> {
        let n = self.nqubits;
        let mut out = Vec::new();
        for p in &self.pieces {
            let (work, mut h) = match p {
                LabPiece::FrameShift { .. } => continue,
                LabPiece::Work { .. } => (true, self.coupling.clone()),
                LabPiece::Idle { drives, detunings, .. } => {
                    let mut terms = Vec::new();
                    for d in drives {
                        terms.push(PauliString::single(d.rabi / 2.0 * d.phase.cos(), d.site, Pauli::X));
                        terms.push(PauliString::single(d.rabi / 2.0 * d.phase.sin(), d.site, Pauli::Y));
                    }
                    for &(s, w) in detunings {
                        terms.push(PauliString::single(w / 2.0, s, Pauli::Z));
                    }
                    (false, PauliSum::new(n, terms).expect("sites validated"))
                }
            };
            let h0 = PauliSum::new(
                n,
                self.h0(work)
                    .iter()
                    .enumerate()
                    .map(|(s, &w)| PauliString::single(w / 2.0, s, Pauli::Z))
                    .collect(),
            )
            .expect("sites validated");
            h = h0.add(&h).expect("same register").cleaned();
            out.push((h, p.duration()));
        }
        out
    }

    /// Applies `exp(-i sum_s omega_s Z_s t / 2)` (times `sign`) in place.
    fn apply_free(&self, psi: &mut StateVector, work: bool, t: f64, sign: f64) {
        let n = self.nqubits;
        let omegas = self.h0(work);
        let phases: Vec<f64> = (0..psi.dim())
            .map(|b| {
                (0..n)
                    .map(|s| {
                        let z = if b >> (n - 1 - s) & 1 == 0 { 1.0 } else { -1.0 };
                        -sign * omegas[s] * z * t / 2.0
                    })
                    .sum()
            })
            .collect();
        let amps: Vec<Complex64> = psi
            .amplitudes()
            .iter()
            .zip(&phases)
            .map(|(a, &p)| a * Complex64::from_polar(1.0, p))
            .collect();
        *psi = StateVector::from_amplitudes(amps).expect("unit norm preserved");
    }

    /// Evolves a lab-frame state through the whole schedule.
    pub fn simulate(&self, psi0: &StateVector, perturbation: Option<&LabPerturbation>) -> Result<StateVector> {
        if psi0.nqubits() != self.nqubits {
            return Err(Error::DimensionMismatch {
                expected: self.nqubits,
                found: psi0.nqubits(),
            });
        }
        let offset = |s: usize| perturbation.and_then(|p| p.phase_offsets.get(s).copied()).unwrap_or(0.0);
        let scale = |s: usize| perturbation.and_then(|p| p.detuning_scale.get(s).copied()).unwrap_or(1.0);
        let coupling = if self.pieces.iter().any(|p| matches!(p, LabPiece::Work { .. })) && !self.coupling.is_empty() {
            Some(Propagator::new(&self.coupling)?)
        } else {
            None
        };
        let mut psi = psi0.clone();
        for piece in &self.pieces {
            match piece {
                LabPiece::FrameShift { site, phase, .. } => {
                    psi.apply_gate_mut(&gates::rz(*phase), &[*site])?;
                }
                LabPiece::Work { start, duration } => {
                    self.apply_free(&mut psi, true, *start, -1.0);
                    if let Some(p) = &coupling {
                        psi = p.evolve(&psi, *duration)?;
                    }
                    self.apply_free(&mut psi, true, start + duration, 1.0);
                }
                LabPiece::Idle {
                    start,
                    duration,
                    drives,
                    detunings,
                } => {
                    self.apply_free(&mut psi, false, *start, -1.0);
                    for s in 0..self.nqubits {
                        let drive = drives.iter().find(|d| d.site == s);
                        let det = detunings
                            .iter()
                            .find(|(q, _)| *q == s)
                            .map(|&(_, w)| w * scale(s))
                            .unwrap_or(0.0);
                        if drive.is_none() && det == 0.0 {
                            continue;
                        }
                        let (hx, hy) = drive
                            .map(|d| {
                                let ph = d.phase + offset(s);
                                (d.rabi / 2.0 * ph.cos(), d.rabi / 2.0 * ph.sin())
                            })
                            .unwrap_or((0.0, 0.0));
                        let u = expm_su2(hx, hy, det / 2.0, *duration);
                        psi.apply_gate_mut(&u, &[s])?;
                    }
                    self.apply_free(&mut psi, false, start + duration, 1.0);
                }
            }
        }
        Ok(psi)
    }

    /// Maps a final lab state into the compensated work frame:
    /// `exp(i A Z/2) exp(i H0_work T) psi`.
    pub fn to_work_frame(&self, psi_lab: &StateVector) -> Result<StateVector> {
        let mut psi = psi_lab.clone();
        self.apply_free(&mut psi, true, self.total, -1.0);
        for (s, &a) in self.final_phases.iter().enumerate() {
            psi.apply_gate_mut(&gates::rz(-a), &[s])?;
        }
        Ok(psi)
    }

    /// [`simulate`](Self::simulate) followed by
    /// [`to_work_frame`](Self::to_work_frame).
    pub fn simulate_work_frame(&self, psi0: &StateVector, perturbation: Option<&LabPerturbation>) -> Result<StateVector> {
        let lab = self.simulate(psi0, perturbation)?;
        self.to_work_frame(&lab)
    }
}

/// `exp(-i (hx X + hy Y + hz Z) t)`.
pub(crate) fn expm_su2(hx: f64, hy: f64, hz: f64, t: f64) -> CMatrix {
    let norm = (hx * hx + hy * hy + hz * hz).sqrt();
    if norm == 0.0 {
        return CMatrix::identity(2, 2);
    }
    let (c, s) = ((norm * t).cos(), (norm * t).sin());
    let (nx, ny, nz) = (hx / norm, hy / norm, hz / norm);
    let z = Complex64::new;
    CMatrix::from_row_slice(
        2,
        2,
        &[
            z(c, -s * nz),
            z(-s * ny, -s * nx),
            z(s * ny, -s * nx),
            z(c, s * nz),
        ],
    )
}

/// Lowers a sequence (all cycles unrolled) to lab-frame pieces. Rotations
/// last `|theta| / Omega`, any extra recorded duration idles, and drive
/// phases carry the correction that keeps the tracked frame aligned.
pub fn compile_to_lab_schedule(seq: &Sequence, dev: &DeviceParams) -> Result<LabSchedule> {
    seq.validate()?;
    if dev.nqubits() != seq.nqubits {
        return Err(Error::DimensionMismatch {
            expected: seq.nqubits,
            found: dev.nqubits(),
        });
    }
    let mut tracker = FrameTracker::from_device(dev);
    let mut pieces = Vec::new();
    let idle = |start: f64, duration: f64| LabPiece::Idle {
        start,
        duration,
        drives: Vec::new(),
        detunings: Vec::new(),
    };
    for _ in 0..seq.cycles {
        for seg in &seq.segments {
            let t = tracker.time();
            match seg {
                Segment::Rotation { sites, axis, angle, duration } => {
                    match axis.phase() {
                        None => {
                            for &s in sites {
                                pieces.push(LabPiece::FrameShift { time: t, site: s, phase: *angle });
                            }
                            if *duration > 0.0 {
                                pieces.push(idle(t, *duration));
                            }
                        }
                        Some(phi) => {
                            let theta = angle.abs();
                            let phi = if *angle < 0.0 { phi + std::f64::consts::PI } else { phi };
                            let pulse = if theta == 0.0 {
                                0.0
                            } else if dev.drive_rabi > 0.0 {
                                theta / dev.drive_rabi
                            } else {
                                return Err(Error::ZeroDrive(sites[0]));
                            };
                            if *duration < pulse * (1.0 - 1e-9) {
                                return Err(Error::InvalidSequence(format!(
                                    "rotation of {theta} rad needs {pulse:.3e} s at the device drive, {duration:.3e} s recorded"
                                )));
                            }
                            if pulse > 0.0 {
                                let drives = sites
                                    .iter()
                                    .map(|&s| Drive {
                                        site: s,
                                        rabi: dev.drive_rabi,
                                        phase: phi - tracker.drive_correction(s),
                                    })
                                    .collect();
                                pieces.push(LabPiece::Idle {
                                    start: t,
                                    duration: pulse,
                                    drives,
                                    detunings: Vec::new(),
                                });
                            }
                            let rest = duration - pulse;
                            if rest > 0.0 {
                                pieces.push(idle(t + pulse, rest));
                            }
                        }
                    }
                }
                Segment::VirtualZ { site, phase } => {
                    pieces.push(LabPiece::FrameShift { time: t, site: *site, phase: *phase });
                }
                Segment::PhysicalRz { detunings, duration } => pieces.push(LabPiece::Idle {
                    start: t,
                    duration: *duration,
                    drives: Vec::new(),
                    detunings: detunings.clone(),
                }),
                Segment::ResonantEvolve { duration } => pieces.push(LabPiece::Work {
                    start: t,
                    duration: *duration,
                }),
                Segment::Idle { duration } => pieces.push(idle(t, *duration)),
            }
            tracker.advance(seg);
        }
    }
    Ok(LabSchedule {
        nqubits: seq.nqubits,
        omega_idle: dev.qubits.iter().map(|q| q.omega_idle).collect(),
        omega_work: dev.qubits.iter().map(|q| q.omega_work).collect(),
        coupling: build_xy(&seq.graph),
        pieces,
        total: tracker.time(),
        final_phases: tracker.raw_phases().to_vec(),
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::{apply_sequence, gen_xyz_sequence, insert_frame_compensation, Axis};
    use crate::qsim::materialize;
    use std::f64::consts::{FRAC_PI_2, TAU};

    #[test]
    fn expm_matches_rotation() {
        let theta = 0.83;
        let phi: f64 = 0.4;
        // Omega/2 (cos X + sin Y) for time theta/Omega
        let u = expm_su2(0.5 * phi.cos(), 0.5 * phi.sin(), 0.0, theta);
        let r = gates::rotation_equatorial(phi, theta);
        assert!((u - r).norm() < 1e-14);
        let z = expm_su2(0.0, 0.0, 0.5, 1.3);
        assert!((z - gates::rz(1.3)).norm() < 1e-14);
    }

    #[test]
    fn half_pi_lasts_twenty_ns() {
        let dev = DeviceParams::xyz_pair();
        let seq = Sequence::new(
            dev.graph().unwrap(),
            vec![Segment::rotation(&[0], Axis::X, FRAC_PI_2, 20e-9)],
            1,
        )
        .unwrap();
        let sched = compile_to_lab_schedule(&seq, &dev).unwrap();
        assert_eq!(sched.pieces().len(), 1);
        assert!((sched.pieces()[0].duration() - 20e-9).abs() < 1e-18);
        let empty = Sequence::new(dev.graph().unwrap(), vec![], 1).unwrap();
        assert!(compile_to_lab_schedule(&empty, &dev).unwrap().is_empty());
    }

    #[test]
    fn zero_drive_is_rejected() {
        let mut dev = DeviceParams::xyz_pair();
        dev.drive_rabi = 0.0;
        let seq = Sequence::new(
            dev.graph().unwrap(),
            vec![Segment::rotation(&[1], Axis::Y, 1.0, 20e-9)],
            1,
        )
        .unwrap();
        assert!(matches!(compile_to_lab_schedule(&seq, &dev), Err(Error::ZeroDrive(1))));
    }

    #[test]
    fn compensated_xyz_cycle_matches_work_frame() {
        let dev = DeviceParams::xyz_pair();
        let g = dev.graph().unwrap();
        let seq = gen_xyz_sequence(37e-9, 21e-9, 14e-9, 1, &g).unwrap();
        let psi0 = StateVector::from_bits("10").unwrap();
        let ideal = apply_sequence(&seq, &psi0).unwrap();
        let fixed = insert_frame_compensation(&seq, &dev).unwrap();
        let lab = compile_to_lab_schedule(&fixed, &dev).unwrap();
        let got = lab.simulate_work_frame(&psi0, None).unwrap();
        assert!(1.0 - got.fidelity(&ideal) < 1e-8, "{}", got.fidelity(&ideal));
        let raw = compile_to_lab_schedule(&seq, &dev).unwrap();
        let bad = raw.simulate_work_frame(&psi0, None).unwrap();
        assert!(bad.fidelity(&ideal) < 1.0 - 1e-3);
    }

    /// Brute-force RK4 of the explicitly time-dependent lab Hamiltonian on a
    /// slow toy device.
    #[test]
    fn piecewise_solution_matches_time_dependent_integration() {
        let mut dev = DeviceParams::xyz_pair();
        dev.qubits[0].omega_idle = TAU * 60e6;
        dev.qubits[1].omega_idle = TAU * 45e6;
        dev.qubits[0].omega_work = TAU * 30e6;
        dev.qubits[1].omega_work = TAU * 30e6;
        let g = dev.graph().unwrap();
        let seq = Sequence::new(
            g,
            vec![
                Segment::rotation(&[0, 1], Axis::X, FRAC_PI_2, 20e-9),
                Segment::PhysicalRz { detunings: vec![(1, TAU * 5e6)], duration: 7e-9 },
                Segment::ResonantEvolve { duration: 30e-9 },
                Segment::rotation(&[1], Axis::Y, -FRAC_PI_2, 20e-9),
            ],
            1,
        )
        .unwrap();
        let sched = compile_to_lab_schedule(&seq, &dev).unwrap();
        let psi0 = StateVector::from_bits("01").unwrap();
        let exact = sched.simulate(&psi0, None).unwrap();

        let hs = sched.hamiltonians();
        let mut psi: Vec<Complex64> = psi0.amplitudes().iter().copied().collect();
        let timed: Vec<&LabPiece> = sched.pieces().iter().filter(|p| p.duration() > 0.0).collect();
        assert_eq!(timed.len(), hs.len());
        let steps_per_ns = 200.0;
        for (piece, (_, dur)) in timed.iter().zip(&hs) {
            let (start, omegas, drives, detunings, work) = match piece {
                LabPiece::Idle { start, drives, detunings, .. } => (*start, &sched.omega_idle, drives.clone(), detunings.clone(), false),
                LabPiece::Work { start, .. } => (*start, &sched.omega_work, vec![], vec![], true),
                LabPiece::FrameShift { .. } => unreachable!(),
            };
            let h_at = |t: f64| -> CMatrix {
                let mut terms = Vec::new();
                for (s, &w) in omegas.iter().enumerate() {
                    terms.push(PauliString::single(w / 2.0, s, Pauli::Z));
                }
                for d in &drives {
                    let arg = sched.omega_idle[d.site] * t + d.phase;
                    terms.push(PauliString::single(d.rabi / 2.0 * arg.cos(), d.site, Pauli::X));
                    terms.push(PauliString::single(d.rabi / 2.0 * arg.sin(), d.site, Pauli::Y));
                }
                for &(s, w) in &detunings {
                    terms.push(PauliString::single(w / 2.0, s, Pauli::Z));
                }
                let mut h = PauliSum::new(2, terms).unwrap();
                if work {
                    h = h.add(&sched.coupling).unwrap();
                }
                materialize(&h).unwrap()
            };
            let steps = (dur * 1e9 * steps_per_ns).ceil() as usize;
            let dt = dur / steps as f64;
            let mi = Complex64::new(0.0, -1.0);
            let rhs = |t: f64, v: &[Complex64]| -> Vec<Complex64> {
                let h = h_at(t);
                (0..4).map(|r| (0..4).map(|c| mi * h[(r, c)] * v[c]).sum()).collect()
            };
            for k in 0..steps {
                let t = start + k as f64 * dt;
                let add = |a: &[Complex64], b: &[Complex64], s: f64| -> Vec<Complex64> {
                    a.iter().zip(b).map(|(x, y)| x + y * s).collect()
                };
                let k1 = rhs(t, &psi);
                let k2 = rhs(t + dt / 2.0, &add(&psi, &k1, dt / 2.0));
                let k3 = rhs(t + dt / 2.0, &add(&psi, &k2, dt / 2.0));
                let k4 = rhs(t + dt, &add(&psi, &k3, dt));
                for i in 0..4 {
                    psi[i] += (k1[i] + k2[i] * 2.0 + k3[i] * 2.0 + k4[i]) * (dt / 6.0);
                }
            }
        }
        let brute = StateVector::from_amplitudes(psi).unwrap();
        assert!(1.0 - brute.fidelity(&exact) < 1e-8, "{}", brute.fidelity(&exact));
    }
}
