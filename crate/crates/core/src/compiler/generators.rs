// Copyright 2026 The mwspin Authors
// SPDX-License-Identifier: Apache-2.0

//! Periodic sequences that engineer XYZ, transverse-field Ising and
//! XY+DM models out of the native flip-flop coupling.

use std::f64::consts::{FRAC_PI_2, PI};

use super::{Axis, Segment, Sequence};
use crate::error::{Error, Result};
use crate::hamiltonians::{build_xy, ring_phase_assignment, CouplingGraph, Topology};
use crate::qsim::{Pauli, PauliSum};

/// Length of a pi/2 pulse at the bundled 12.5 MHz Rabi rate.
pub const DEFAULT_HALF_PI: f64 = 20e-9;

/// Default TFIM interaction interval; two of them make a 40 ns cycle.
pub const DEFAULT_TFIM_TAU: f64 = 20e-9;

fn all_sites(g: &CouplingGraph) -> Vec<usize> {
    (0..g.nqubits()).collect()
}

fn check_interval(name: &str, t: f64) -> Result<()> {
    if !t.is_finite() || t < 0.0 {
        return Err(Error::InvalidSequence(format!("{name} must be finite and non-negative, got {t}")));
    }
    Ok(())
}

fn evolve(out: &mut Vec<Segment>, t: f64) {
    if t > 0.0 {
        out.push(Segment::ResonantEvolve { duration: t });
    }
}

/// XYZ cycle with 20 ns pi/2 pulses.
pub fn gen_xyz_sequence(t1: f64, t2: f64, t3: f64, cycles: usize, g: &CouplingGraph) -> Result<Sequence> {
    gen_xyz_sequence_timed(t1, t2, t3, cycles, g, DEFAULT_HALF_PI)
}

/// `-X/2, tau2, X/2, tau1, Y/2, tau3, -Y/2` on every site. Each pi/2 pulse
/// is recorded with duration `half_pi`.
pub fn gen_xyz_sequence_timed(
    t1: f64,
    t2: f64,
    t3: f64,
    cycles: usize,
    g: &CouplingGraph,
    half_pi: f64,
) -> Result<Sequence> {
    for (name, t) in [("tau1", t1), ("tau2", t2), ("tau3", t3), ("pulse length", half_pi)] {
        check_interval(name, t)?;
    }
    let sites = all_sites(g);
    let rot = |axis, angle| Segment::rotation(&sites, axis, angle, half_pi);
    let mut segs = vec![rot(Axis::X, -FRAC_PI_2)];
    evolve(&mut segs, t2);
    segs.push(rot(Axis::X, FRAC_PI_2));
    evolve(&mut segs, t1);
    segs.push(rot(Axis::Y, FRAC_PI_2));
    evolve(&mut segs, t3);
    segs.push(rot(Axis::Y, -FRAC_PI_2));
    Sequence::new(g.clone(), segs, cycles)
}

/// Checks that every edge has exactly one flipped endpoint.
fn check_bipartition(g: &CouplingGraph, flipped: &[usize]) -> Result<()> {
    for &s in flipped {
        if s >= g.nqubits() {
            return Err(Error::SiteOutOfRange { site: s, nqubits: g.nqubits() });
        }
    }
    for e in g.edges() {
        if flipped.contains(&e.i) == flipped.contains(&e.j) {
            return Err(Error::InvalidGraph(format!(
                "flipped sites must hold exactly one end of every edge, edge ({}, {}) violates this",
                e.i, e.j
            )));
        }
    }
    Ok(())
}

/// TFIM cycle with instantaneous pi pulses.
pub fn gen_tfim_sequence(tau: f64, b: f64, cycles: usize, g: &CouplingGraph, flipped: &[usize]) -> Result<Sequence> {
    gen_tfim_sequence_timed(tau, b, cycles, g, flipped, 0.0)
}

/// `tau, X_pi(flipped), tau, X_pi(flipped), VirtualZ(B T_c)` with
/// `T_c = 2 tau`. The pi pulses carry `pi_duration`, which does not enter
/// `T_c`.
pub fn gen_tfim_sequence_timed(
    tau: f64,
    b: f64,
    cycles: usize,
    g: &CouplingGraph,
    flipped: &[usize],
    pi_duration: f64,
) -> Result<Sequence> {
    check_interval("pulse length", pi_duration)?;
    if !(tau > 0.0) || !tau.is_finite() {
        return Err(Error::InvalidSequence(format!("tau must be positive, got {tau}")));
    }
    if !b.is_finite() {
        return Err(Error::InvalidSequence("non-finite field".into()));
    }
    if flipped.is_empty() {
        return Err(Error::InvalidSequence("no flipped sites".into()));
    }
    check_bipartition(g, flipped)?;
    let flip = Segment::rotation(flipped, Axis::X, PI, pi_duration);
    let mut segs = vec![
        Segment::ResonantEvolve { duration: tau },
        flip.clone(),
        Segment::ResonantEvolve { duration: tau },
        flip,
    ];
    let phase = b * 2.0 * tau;
    if phase != 0.0 {
        segs.extend((0..g.nqubits()).map(|s| Segment::VirtualZ { site: s, phase }));
    }
    Sequence::new(g.clone(), segs, cycles)
}

/// `VirtualZ(-phi_l), evolve t, VirtualZ(phi_l)` with the ring phases of
/// step `dphi`; realises `G = J cos(dphi)/2`, `D = J sin(dphi)/2`.
pub fn gen_dm_ring_sequence(n: usize, dphi: f64, t: f64, g: &CouplingGraph) -> Result<Sequence> {
    check_interval("evolution time", t)?;
    if g.topology() != Topology::Ring || g.nqubits() != n {
        return Err(Error::InvalidGraph(format!("expected a {n}-site ring")));
    }
    let phases = ring_phase_assignment(n, dphi)?;
    let mut segs: Vec<Segment> = phases
        .phases
        .iter()
        .enumerate()
        .filter(|(_, p)| **p != 0.0)
        .map(|(s, &p)| Segment::VirtualZ { site: s, phase: -p })
        .collect();
    evolve(&mut segs, t);
    segs.extend(
        phases
            .phases
            .iter()
            .enumerate()
            .filter(|(_, p)| **p != 0.0)
            .map(|(s, &p)| Segment::VirtualZ { site: s, phase: p }),
    );
    Sequence::new(g.clone(), segs, 1)
}

/// Native coupling of each resonant interval seen in the toggling frame of
/// the local gates applied before it, `P^dagger H P`, with its duration.
/// Physical Rz pulses count as `Rz` gates.
pub fn toggling_frame_pieces(seq: &Sequence) -> Result<Vec<(PauliSum, f64)>> {
    let h = build_xy(&seq.graph);
    // (axis, angle, site), in application order
    let mut applied: Vec<(Pauli, f64, usize)> = Vec::new();
    let mut out = Vec::new();
    for seg in &seq.segments {
        match seg {
            Segment::Rotation { sites, axis, angle, .. } => {
                for &s in sites {
                    match axis {
                        Axis::X => applied.push((Pauli::X, *angle, s)),
                        Axis::Y => applied.push((Pauli::Y, *angle, s)),
                        Axis::Z => applied.push((Pauli::Z, *angle, s)),
                        Axis::Custom(phi) => {
                            applied.push((Pauli::Z, -phi, s));
                            applied.push((Pauli::X, *angle, s));
                            applied.push((Pauli::Z, *phi, s));
                        }
                    }
                }
            }
            Segment::VirtualZ { site, phase } => applied.push((Pauli::Z, *phase, *site)),
            Segment::PhysicalRz { detunings, duration } => {
                applied.extend(detunings.iter().map(|&(s, w)| (Pauli::Z, w * duration, s)));
            }
            Segment::ResonantEvolve { duration } => {
                let mut piece = h.clone();
                for &(axis, angle, s) in applied.iter().rev() {
                    piece = piece.conjugate_by_rotation(axis, -angle, &[s])?;
                }
                out.push((piece.cleaned(), *duration));
            }
            Segment::Idle { .. } => {}
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::compiler::compile_to_unitary;
    use crate::hamiltonians::{average_hamiltonian, build_tfim, build_weighted_xyz, build_xy_dm, tau_to_delta};
    use crate::qsim::{operator_norm, phase_insensitive_distance, Propagator};

    #[test]
    fn xyz_pair_cycle_is_exact() {
        let g = CouplingGraph::pair(std::f64::consts::TAU * -3e6);
        for (t1, t2, t3) in [(10e-9, 20e-9, 30e-9), (50e-9, 0.0, 0.0), (7e-9, 41e-9, 3e-9)] {
            let seq = gen_xyz_sequence(t1, t2, t3, 1, &g).unwrap();
            let u = compile_to_unitary(&seq).unwrap();
            let w = tau_to_delta(t1, t2, t3).unwrap();
            let h = build_weighted_xyz(&g, &w);
            let expected = Propagator::new(&h).unwrap().unitary(t1 + t2 + t3);
            assert!(phase_insensitive_distance(&u, &expected) < 1e-9);
            assert!((&u - &expected).norm() < 1e-9);
        }
    }

    #[test]
    fn xyz_average_hamiltonian_matches_weights() {
        let g = CouplingGraph::open_chain(4, -2.0e7).unwrap();
        let seq = gen_xyz_sequence(13e-9, 29e-9, 5e-9, 1, &g).unwrap();
        let avg = average_hamiltonian(&toggling_frame_pieces(&seq).unwrap()).unwrap();
        let w = tau_to_delta(13e-9, 29e-9, 5e-9).unwrap();
        assert!(avg.max_difference(&build_weighted_xyz(&g, &w)) < 1e-6);
    }

    #[test]
    fn tfim_without_field_is_exact_on_a_pair() {
        let j = std::f64::consts::TAU * -8e6;
        let g = CouplingGraph::pair(j);
        let seq = gen_tfim_sequence(DEFAULT_TFIM_TAU, 0.0, 1, &g, &[1]).unwrap();
        assert!((seq.resonant_duration() - 40e-9).abs() < 1e-18);
        let u = compile_to_unitary(&seq).unwrap();
        let h = build_tfim(&g, j / 2.0, 0.0);
        let expected = Propagator::new(&h).unwrap().unitary(40e-9);
        assert!(phase_insensitive_distance(&u, &expected) < 1e-10);
    }

    #[test]
    fn tfim_average_hamiltonian() {
        let j = -5e7;
        let g = CouplingGraph::open_chain(4, j).unwrap();
        let seq = gen_tfim_sequence(20e-9, 0.0, 1, &g, &[1, 3]).unwrap();
        let avg = average_hamiltonian(&toggling_frame_pieces(&seq).unwrap()).unwrap();
        assert!(avg.max_difference(&build_tfim(&g, j / 2.0, 0.0)) < 1e-6);
        assert!(gen_tfim_sequence(20e-9, 0.0, 1, &g, &[0, 1]).is_err());
    }

    #[test]
    fn dm_ring_matches_target() {
        let j = std::f64::consts::TAU * -8e6;
        let g = CouplingGraph::ring(8, j).unwrap();
        for dphi in [0.0, std::f64::consts::FRAC_PI_4, FRAC_PI_2] {
            let t = 37e-9;
            let seq = gen_dm_ring_sequence(8, dphi, t, &g).unwrap();
            let u = compile_to_unitary(&seq).unwrap();
            let h = build_xy_dm(&g, j * dphi.cos() / 2.0, j * dphi.sin() / 2.0);
            let expected = Propagator::new(&h).unwrap().unitary(t);
            assert!(operator_norm(&(&u - &expected)) < 1e-10, "dphi {dphi}");
        }
        assert!(matches!(gen_dm_ring_sequence(6, std::f64::consts::FRAC_PI_4, 1e-8, &CouplingGraph::ring(6, j).unwrap()), Err(Error::Incommensurate { .. })));
    }
}
