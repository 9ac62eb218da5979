// Copyright 2026 The mwspin Authors
// SPDX-License-Identifier: Apache-2.0

//! Frame-phase bookkeeping between the idle and working points.
//!
//! Relative to a frame rotating at the working frequency, qubit `q` picks up
//! `A_q = integral (omega_q(t) - omega_work_q) dt`: it grows at
//! `omega_idle - omega_work` (plus any Rz detuning) away from resonance and is
//! frozen during resonant evolution. The native coupling is only reproduced
//! when every `A_q` is a multiple of `2 pi` at each resonance entry.

use std::f64::consts::{PI, TAU};

use super::{Segment, Sequence};
use crate::device::DeviceParams;
use crate::error::{Error, Result};

/// Residual below which a frame phase counts as closed, in radians.
pub const FRAME_TOL: f64 = 1e-8;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Frame {
    Idle,
    Work,
}

/// Wraps into `(-pi, pi]`.
pub fn wrap_phase(x: f64) -> f64 {
    let r = (x + PI).rem_euclid(TAU) - PI;
    if r <= -PI {
        r + TAU
    } else {
        r
    }
}

#[derive(Clone, Debug)]
pub struct FrameTracker {
    omega_idle: Vec<f64>,
    omega_work: Vec<f64>,
    phase: Vec<f64>,
    frame: Vec<Frame>,
    time: f64,
}

impl FrameTracker {
    pub fn new(omega_idle: Vec<f64>, omega_work: Vec<f64>) -> Result<Self> {
        if omega_idle.len() != omega_work.len() {
            return Err(Error::DimensionMismatch {
                expected: omega_idle.len(),
                found: omega_work.len(),
            });
        }
        let n = omega_idle.len();
        Ok(FrameTracker {
            omega_idle,
            omega_work,
            phase: vec![0.0; n],
            frame: vec![Frame::Idle; n],
            time: 0.0,
        })
    }

    pub fn from_device(dev: &DeviceParams) -> Self {
        FrameTracker {
            omega_idle: dev.qubits.iter().map(|q| q.omega_idle).collect(),
            omega_work: dev.qubits.iter().map(|q| q.omega_work).collect(),
            phase: vec![0.0; dev.nqubits()],
            frame: vec![Frame::Idle; dev.nqubits()],
            time: 0.0,
        }
    }

    pub fn nqubits(&self) -> usize {
        self.phase.len()
    }

    pub fn time(&self) -> f64 {
        self.time
    }

    pub fn detuning(&self, site: usize) -> f64 {
        self.omega_idle[site] - self.omega_work[site]
    }

    pub fn frames(&self) -> &[Frame] {
        &self.frame
    }

    /// Unwrapped accumulated phases.
    pub fn raw_phases(&self) -> &[f64] {
        &self.phase
    }

    /// Accumulated phases wrapped into `(-pi, pi]`.
    pub fn phases(&self) -> Vec<f64> {
        self.phase.iter().map(|&a| wrap_phase(a)).collect()
    }

    pub fn max_residual(&self) -> (usize, f64) {
        self.phases()
            .into_iter()
            .map(f64::abs)
            .enumerate()
            .fold((0, 0.0), |best, (k, r)| if r > best.1 { (k, r) } else { best })
    }

    /// Offset between the drive reference (locked to the idle frequency) and
    /// the tracked frame: `(omega_idle - omega_work) t - A`.
    pub fn drive_correction(&self, site: usize) -> f64 {
        self.detuning(site) * self.time - self.phase[site]
    }

    pub fn advance(&mut self, seg: &Segment) {
        let d = seg.duration();
        match seg {
            Segment::ResonantEvolve { .. } => {
                if d > 0.0 {
                    self.frame.fill(Frame::Work);
                }
            }
            Segment::VirtualZ { .. } => {}
            Segment::PhysicalRz { detunings, .. } => {
                for q in 0..self.nqubits() {
                    self.phase[q] += self.detuning(q) * d;
                }
                for &(s, w) in detunings {
                    self.phase[s] += w * d;
                }
                self.frame.fill(Frame::Idle);
            }
            Segment::Rotation { .. } | Segment::Idle { .. } => {
                for q in 0..self.nqubits() {
                    self.phase[q] += self.detuning(q) * d;
                }
                self.frame.fill(Frame::Idle);
            }
        }
        self.time += d;
    }

    /// True when `seg` moves the register onto resonance.
    pub fn is_work_entry(&self, seg: &Segment) -> bool {
        seg.is_resonant() && seg.duration() > 0.0 && self.frame.iter().any(|&f| f == Frame::Idle)
    }
}

/// Frame residuals seen at resonance entries.
#[derive(Clone, Debug, PartialEq)]
pub struct FrameAudit {
    pub work_entries: usize,
    pub max_residual: f64,
    pub worst_site: usize,
}

pub fn frame_audit(seq: &Sequence, dev: &DeviceParams) -> Result<FrameAudit> {
    check_device(seq, dev)?;
    let mut tracker = FrameTracker::from_device(dev);
    let mut audit = FrameAudit {
        work_entries: 0,
        max_residual: 0.0,
        worst_site: 0,
    };
    for _ in 0..seq.cycles {
        for seg in &seq.segments {
            if tracker.is_work_entry(seg) {
                audit.work_entries += 1;
                let (site, r) = tracker.max_residual();
                if r > audit.max_residual {
                    audit.max_residual = r;
                    audit.worst_site = site;
                }
            }
            tracker.advance(seg);
        }
    }
    Ok(audit)
}

fn check_device(seq: &Sequence, dev: &DeviceParams) -> Result<()> {
    if dev.nqubits() != seq.nqubits {
        return Err(Error::DimensionMismatch {
            expected: seq.nqubits,
            found: dev.nqubits(),
        });
    }
    Ok(())
}

/// Block that brings every accumulated phase to a multiple of `2 pi`. The
/// qubit with the largest frame detuning idles; the others receive Rz
/// detunings over the same window.
fn closing_block(tracker: &FrameTracker, dev: &DeviceParams) -> Result<Option<Segment>> {
    let n = tracker.nqubits();
    let residual = tracker.phases();
    if residual.iter().all(|r| r.abs() < FRAME_TOL) {
        return Ok(None);
    }
    let reference = (0..n)
        .max_by(|&a, &b| tracker.detuning(a).abs().total_cmp(&tracker.detuning(b).abs()))
        .unwrap_or(0);
    let d_ref = tracker.detuning(reference);
    if d_ref == 0.0 {
        // nothing idles away from resonance, so nothing can accumulate
        return Ok(None);
    }
    let period = TAU / d_ref.abs();
    let mut t = (-residual[reference] * d_ref.signum()).rem_euclid(TAU) / d_ref.abs();
    if period - t < FRAME_TOL / d_ref.abs() {
        t = 0.0;
    }
    let others_open = (0..n).any(|q| q != reference && residual[q].abs() >= FRAME_TOL);
    while t < dev.compensation_min || (t == 0.0 && others_open) {
        t += period;
    }
    if t > dev.compensation_cap {
        return Err(Error::CompensationTooLong {
            required: t,
            cap: dev.compensation_cap,
        });
    }
    let mut detunings = Vec::new();
    for q in (0..n).filter(|&q| q != reference) {
        let miss = wrap_phase(-residual[q] - tracker.detuning(q) * t);
        if miss.abs() >= FRAME_TOL * 1e-3 {
            detunings.push((q, miss / t));
        }
    }
    Ok(Some(Segment::PhysicalRz { detunings, duration: t }))
}

/// Inserts a compensation block right before every resonance entry (and at
/// the end of each cycle when the sequence repeats) so that every frame
/// phase is closed whenever the register is on resonance.
pub fn insert_frame_compensation(seq: &Sequence, dev: &DeviceParams) -> Result<Sequence> {
    check_device(seq, dev)?;
    if dev.qubits.iter().all(|q| q.frame_detuning() == 0.0) {
        return Ok(seq.clone());
    }
    let mut tracker = FrameTracker::from_device(dev);
    let mut out = Vec::with_capacity(seq.segments.len() * 2);
    for seg in &seq.segments {
        if tracker.is_work_entry(seg) {
            if let Some(block) = closing_block(&tracker, dev)? {
                tracker.advance(&block);
                out.push(block);
            }
        }
        tracker.advance(seg);
        out.push(seg.clone());
    }
    if seq.cycles > 1 {
        if let Some(block) = closing_block(&tracker, dev)? {
            out.push(block);
        }
    }
    Sequence::new(seq.graph.clone(), out, seq.cycles)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::{gen_xyz_sequence, Axis};
    use crate::hamiltonians::CouplingGraph;

    #[test]
    fn wrap_range() {
        assert_eq!(wrap_phase(PI), PI);
        assert_eq!(wrap_phase(-PI), PI);
        assert!((wrap_phase(3.0 * PI + 0.1) - (-PI + 0.1)).abs() < 1e-12);
    }

    #[test]
    fn no_mismatch_is_noop() {
        let dev = DeviceParams::xyz_pair().without_frame_mismatch();
        let g = dev.graph().unwrap();
        let seq = gen_xyz_sequence(1e-8, 2e-8, 3e-8, 2, &g).unwrap();
        assert_eq!(insert_frame_compensation(&seq, &dev).unwrap(), seq);
    }

    #[test]
    fn pair_compensation_closes_phases() {
        let dev = DeviceParams::xyz_pair();
        let g = dev.graph().unwrap();
        let seq = gen_xyz_sequence(31e-9, 17e-9, 23e-9, 3, &g).unwrap();
        let before = frame_audit(&seq, &dev).unwrap();
        assert!(before.max_residual > 1e-3);
        let fixed = insert_frame_compensation(&seq, &dev).unwrap();
        let after = frame_audit(&fixed, &dev).unwrap();
        assert_eq!(after.work_entries, before.work_entries);
        assert!(after.max_residual < 1e-9, "{}", after.max_residual);
        // distinct per-qubit treatment: Q1 pads, Q2 receives the Rz
        let block = fixed
            .segments
            .iter()
            .find_map(|s| match s {
                Segment::PhysicalRz { detunings, .. } => Some(detunings.clone()),
                _ => None,
            })
            .unwrap();
        assert_eq!(block.len(), 1);
        assert_eq!(block[0].0, 1);
    }

    #[test]
    fn cap_is_enforced() {
        let mut dev = DeviceParams::xyz_pair();
        dev.compensation_cap = 1e-9;
        dev.compensation_min = 0.0;
        let g = CouplingGraph::pair(dev.edges[0].coupling);
        let seq = Sequence::new(
            g,
            vec![
                Segment::rotation(&[0, 1], Axis::X, 1.0, 13e-9),
                Segment::ResonantEvolve { duration: 1e-8 },
            ],
            1,
        )
        .unwrap();
        assert!(matches!(
            insert_frame_compensation(&seq, &dev),
            Err(Error::CompensationTooLong { .. })
        ));
    }
}
