// Copyright 2026 The mwspin Authors
// SPDX-License-Identifier: Apache-2.0

//! Work-frame compilation: rotations are ideal instantaneous gates, virtual
//! Z shifts are `Rz` gates, and resonant intervals evolve under the native
//! coupling of the sequence's graph.

use std::collections::BTreeMap;

use num_complex::Complex64;

use super::frame::{frame_audit, FRAME_TOL};
use super::{Axis, Segment, Sequence};
use crate::device::DeviceParams;
use crate::error::{Error, Result};
use crate::hamiltonians::build_xy;
use crate::qsim::state::{apply_local, check_gate};
use crate::qsim::{gates, CMatrix, Propagator, StateVector};

#[derive(Clone, Copy, Debug, Default)]
pub struct CompileOptions<'a> {
    /// Audit frame phases against this device. Physical Rz pulses are then
    /// frame bookkeeping and compile to the identity.
    pub check_frames: Option<&'a DeviceParams>,
}

/// Segment-by-segment executor in the work frame.
pub(crate) struct WorkFrame {
    nqubits: usize,
    coupling: Option<Propagator>,
    rz_as_bookkeeping: bool,
}

impl WorkFrame {
    pub(crate) fn new(seq: &Sequence, rz_as_bookkeeping: bool) -> Result<Self> {
        let needs = seq.segments.iter().any(|s| s.is_resonant() && s.duration() > 0.0);
        let coupling = if needs && !seq.graph.edges().is_empty() {
            Some(Propagator::new(&build_xy(&seq.graph))?)
        } else {
            None
        };
        Ok(WorkFrame {
            nqubits: seq.nqubits,
            coupling,
            rz_as_bookkeeping,
        })
    }

    /// Local gates of a segment, in application order.
    fn local_gates(&self, seg: &Segment) -> Vec<(CMatrix, Vec<usize>)> {
        match seg {
            Segment::Rotation { sites, axis, angle, .. } => {
                let g = axis.gate(*angle);
                sites.iter().map(|&s| (g.clone(), vec![s])).collect()
            }
            Segment::VirtualZ { site, phase } => vec![(gates::rz(*phase), vec![*site])],
            Segment::PhysicalRz { detunings, duration } if !self.rz_as_bookkeeping => detunings
                .iter()
                .map(|&(s, w)| (gates::rz(w * duration), vec![s]))
                .collect(),
            _ => Vec::new(),
        }
    }

    pub(crate) fn apply_to_state(&self, seg: &Segment, psi: &mut StateVector) -> Result<()> {
        if let Segment::ResonantEvolve { duration } = seg {
            if let Some(p) = &self.coupling {
                *psi = p.evolve(psi, *duration)?;
            }
            return Ok(());
        }
        for (g, sites) in self.local_gates(seg) {
            psi.apply_gate_mut(&g, &sites)?;
        }
        Ok(())
    }

    /// `u <- S u` for the segment operator `S`.
    pub(crate) fn apply_to_matrix(&self, seg: &Segment, u: &mut CMatrix) -> Result<()> {
        if let Segment::ResonantEvolve { duration } = seg {
            if let (Some(p), true) = (&self.coupling, *duration != 0.0) {
                *u = p.unitary(*duration) * &*u;
            }
            return Ok(());
        }
        let dim = u.nrows();
        for (g, sites) in self.local_gates(seg) {
            check_gate(&g, &sites, self.nqubits)?;
            let mut col = vec![Complex64::new(0.0, 0.0); dim];
            for c in 0..dim {
                for (r, v) in col.iter_mut().enumerate() {
                    *v = u[(r, c)];
                }
                apply_local(&mut col, self.nqubits, &g, &sites);
                for (r, v) in col.iter().enumerate() {
                    u[(r, c)] = *v;
                }
            }
        }
        Ok(())
    }

    pub(crate) fn cycle_unitary(&self, seq: &Sequence) -> Result<CMatrix> {
        let dim = 1usize << self.nqubits;
        let mut u = CMatrix::identity(dim, dim);
        for seg in &seq.segments {
            self.apply_to_matrix(seg, &mut u)?;
        }
        Ok(u)
    }
}

fn matrix_power(u: &CMatrix, mut k: usize) -> CMatrix {
    let dim = u.nrows();
    let mut result = CMatrix::identity(dim, dim);
    let mut base = u.clone();
    while k > 0 {
        if k & 1 == 1 {
            result = &base * &result;
        }
        k >>= 1;
        if k > 0 {
            base = &base * &base;
        }
    }
    result
}

/// Work-frame unitary of the whole sequence, all cycles included.
pub fn compile_to_unitary(seq: &Sequence) -> Result<CMatrix> {
    compile_to_unitary_with(seq, &CompileOptions::default())
}

pub fn compile_to_unitary_with(seq: &Sequence, opts: &CompileOptions<'_>) -> Result<CMatrix> {
    seq.validate()?;
    if let Some(dev) = opts.check_frames {
        let audit = frame_audit(seq, dev)?;
        if audit.max_residual > FRAME_TOL {
            return Err(Error::UncompensatedFrame {
                site: audit.worst_site,
                residual: audit.max_residual,
            });
        }
    }
    let exec = WorkFrame::new(seq, opts.check_frames.is_some())?;
    let cycle = exec.cycle_unitary(seq)?;
    Ok(matrix_power(&cycle, seq.cycles))
}

/// Runs the sequence on a state without forming the full unitary.
pub fn apply_sequence(seq: &Sequence, psi: &StateVector) -> Result<StateVector> {
    seq.validate()?;
    if psi.nqubits() != seq.nqubits {
        return Err(Error::DimensionMismatch {
            expected: seq.nqubits,
            found: psi.nqubits(),
        });
    }
    let exec = WorkFrame::new(seq, false)?;
    let mut out = psi.clone();
    for _ in 0..seq.cycles {
        for seg in &seq.segments {
            exec.apply_to_state(seg, &mut out)?;
        }
    }
    Ok(out)
}

/// Moves virtual Z shifts forward through rotations, rewriting rotation axes,
/// until the next resonant interval or the end of the cycle. The compiled
/// unitary is unchanged.
pub fn push_virtual_z(seq: &Sequence) -> Result<Sequence> {
    seq.validate()?;
    let mut pending: BTreeMap<usize, f64> = BTreeMap::new();
    let mut out = Vec::with_capacity(seq.segments.len());
    let flush = |pending: &mut BTreeMap<usize, f64>, out: &mut Vec<Segment>| {
        for (site, phase) in std::mem::take(pending) {
            if phase != 0.0 {
                out.push(Segment::VirtualZ { site, phase });
            }
        }
    };
    for seg in &seq.segments {
        match seg {
            Segment::VirtualZ { site, phase } => {
                *pending.entry(*site).or_insert(0.0) += phase;
            }
            Segment::Rotation { sites, axis, angle, duration } => match axis.phase() {
                None => out.push(seg.clone()),
                Some(phi) => {
                    // Rz(a) then R(phi) equals R(phi - a) then Rz(a)
                    let mut groups: Vec<(f64, Vec<usize>)> = Vec::new();
                    for &s in sites {
                        let shift = pending.get(&s).copied().unwrap_or(0.0);
                        match groups.iter_mut().find(|(g, _)| *g == shift) {
                            Some((_, members)) => members.push(s),
                            None => groups.push((shift, vec![s])),
                        }
                    }
                    for (k, (shift, members)) in groups.into_iter().enumerate() {
                        let axis = if shift == 0.0 { *axis } else { Axis::Custom(phi - shift) };
                        out.push(Segment::Rotation {
                            sites: members,
                            axis,
                            angle: *angle,
                            duration: if k == 0 { *duration } else { 0.0 },
                        });
                    }
                }
            },
            Segment::ResonantEvolve { .. } => {
                flush(&mut pending, &mut out);
                out.push(seg.clone());
            }
            Segment::PhysicalRz { .. } | Segment::Idle { .. } => out.push(seg.clone()),
        }
    }
    flush(&mut pending, &mut out);
    Sequence::new(seq.graph.clone(), out, seq.cycles)
}
