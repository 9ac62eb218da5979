// Copyright 2026 The mwspin Authors
// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::{FRAC_PI_2, PI, TAU};

use mwspin::compiler::{
    apply_sequence, compile_to_lab_schedule, compile_to_unitary, gen_tfim_sequence, gen_xyz_sequence,
    insert_frame_compensation, push_virtual_z, toggling_frame_pieces, Axis, Segment, Sequence,
};
use mwspin::device::{derive_seed, DeviceParams, Emulator, Observable, ReadoutModel, RunOptions};
use mwspin::hamiltonians::{
    average_hamiltonian, build_phase_rotated_xy, build_tfim, build_weighted_xyz, build_xy, build_xy_dm,
    conjugate_by_global_rotation, delta_to_tau, tau_to_delta, CouplingGraph, PhaseAssignment, Spiral,
};
use mwspin::qsim::{
    evolve_lindblad, gates, materialize, operator_norm, unitarity_deviation, CMatrix, CollapseChannel, DensityMatrix,
    Pauli, PauliString, PauliSum, Propagator, StateVector,
};
use num_complex::Complex64;
use proptest::prelude::*;

const J: f64 = -TAU * 3e6;

fn pauli_of(k: u8) -> Option<Pauli> {
    match k {
        1 => Some(Pauli::X),
        2 => Some(Pauli::Y),
        3 => Some(Pauli::Z),
        _ => None,
    }
}

fn pauli_sum(n: usize) -> impl Strategy<Value = PauliSum> {
    prop::collection::vec((prop::collection::vec(0u8..4, n), -2.0f64..2.0), 1..6).prop_map(move |terms| {
        let strings = terms
            .into_iter()
            .map(|(letters, c)| {
                let f: Vec<(usize, Pauli)> = letters
                    .iter()
                    .enumerate()
                    .filter_map(|(s, &k)| pauli_of(k).map(|p| (s, p)))
                    .collect();
                PauliString::new(c, &f).unwrap()
            })
            .collect();
        PauliSum::new(n, strings).unwrap()
    })
}

fn random_state(n: usize, amps: &[(f64, f64)]) -> StateVector {
    let v: Vec<Complex64> = amps.iter().take(1 << n).map(|&(a, b)| Complex64::new(a, b)).collect();
    let norm = v.iter().map(|z| z.norm_sqr()).sum::<f64>().sqrt();
    if norm < 1e-3 {
        return StateVector::basis(n, 0).unwrap();
    }
    StateVector::from_amplitudes(v.iter().map(|z| z / norm).collect()).unwrap()
}

fn commutator(a: &CMatrix, b: &CMatrix) -> CMatrix {
    a * b - b * a
}

/// Pair, open chains and a ring on `n` sites.
fn graph(n: usize, ring: bool) -> CouplingGraph {
    match (n, ring) {
        (2, _) => CouplingGraph::pair(J),
        (_, true) => CouplingGraph::ring(n, J).unwrap(),
        _ => CouplingGraph::open_chain(n, J).unwrap(),
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(32))]

    #[test]
    fn propagator_is_unitary((n, h) in (1usize..=4).prop_flat_map(|n| (Just(n), pauli_sum(n))), t in 0.0f64..3.0) {
        prop_assert_eq!(h.nqubits(), n);
        let u = Propagator::new(&h).unwrap().unitary(t);
        prop_assert!(unitarity_deviation(&u) < 1e-9);
    }

    #[test]
    fn symbolic_commutator_matches_matrices(a in pauli_sum(3), b in pauli_sum(3)) {
        let ma = materialize(&a).unwrap();
        let mb = materialize(&b).unwrap();
        let sym = materialize(&a.commutator_over_i(&b).unwrap()).unwrap() * Complex64::new(0.0, 1.0);
        prop_assert!((commutator(&ma, &mb) - sym).norm() < 1e-10);
    }

    #[test]
    fn global_conjugation_matches_numerics(h in pauli_sum(2), theta in -PI..PI, y in any::<bool>()) {
        let axis = if y { Pauli::Y } else { Pauli::X };
        let sym = materialize(&conjugate_by_global_rotation(&h, axis, theta, &[0, 1]).unwrap()).unwrap();
        let r = gates::rotation(axis, theta);
        let u = r.kronecker(&r);
        let num = &u * materialize(&h).unwrap() * u.adjoint();
        prop_assert!((sym - num).iter().all(|z| z.norm() < 1e-10));
    }

    #[test]
    fn tau_delta_round_trip(a in 0.0f64..1.0, b in 0.0f64..1.0, c in 0.0f64..1.0) {
        prop_assume!(a + b + c > 1e-3);
        let w = tau_to_delta(a * 1e-8, b * 1e-8, c * 1e-8).unwrap();
        prop_assert!((w.dx + w.dy + w.dz - 1.0).abs() < 1e-12);
        let total = (a + b + c) * 1e-8;
        let (t1, t2, t3) = delta_to_tau(&w, total).unwrap();
        for (x, y) in [(t1, a), (t2, b), (t3, c)] {
            prop_assert!((x - y * 1e-8).abs() < 1e-20);
        }
    }

    #[test]
    fn phase_rotated_xy_is_rz_conjugated_xy(phases in prop::collection::vec(-PI..PI, 4)) {
        let g = CouplingGraph::open_chain(4, J).unwrap();
        let direct = materialize(&build_phase_rotated_xy(&g, &PhaseAssignment::new(phases.clone())).unwrap()).unwrap();
        let mut v = CMatrix::identity(1, 1);
        for &p in &phases {
            v = v.kronecker(&gates::rz(p));
        }
        let conj = &v * materialize(&build_xy(&g)).unwrap() * v.adjoint();
        prop_assert!((&direct - &conj).iter().all(|z| z.norm() < 1e-12 * J.abs()), "{}", (direct - conj).norm());
    }

    /// Average of the conjugated pieces equals the documented effective
    /// Hamiltonian of each generator.
    #[test]
    fn average_hamiltonian_consistency(
        n in 2usize..=4,
        t in (1.0f64..20.0, 1.0f64..20.0, 1.0f64..20.0),
        tau in 5.0f64..30.0,
        b in -1.0f64..1.0,
    ) {
        let g = graph(n, false);
        let seq = gen_xyz_sequence(t.0 * 1e-9, t.1 * 1e-9, t.2 * 1e-9, 1, &g).unwrap();
        let avg = average_hamiltonian(&toggling_frame_pieces(&seq).unwrap()).unwrap();
        let want = build_weighted_xyz(&g, &tau_to_delta(t.0, t.1, t.2).unwrap());
        prop_assert!(avg.max_difference(&want) < 1e-6 * J.abs());

        let flipped: Vec<usize> = (0..n).filter(|s| s % 2 == 1).collect();
        let seq = gen_tfim_sequence(tau * 1e-9, b * J.abs(), 1, &g, &flipped).unwrap();
        let avg = average_hamiltonian(&toggling_frame_pieces(&seq).unwrap()).unwrap();
        let ising = build_tfim(&g, J / 2.0, 0.0);
        prop_assert!(avg.max_difference(&ising) < 1e-6 * J.abs());
    }

    /// Lab-frame execution of compensated generator output equals the
    /// work-frame compilation.
    #[test]
    fn compiler_matches_lab_frame(
        n in 2usize..=4,
        t in (1.0f64..20.0, 1.0f64..20.0, 1.0f64..20.0),
        amps in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 16),
        cycles in 1usize..3,
    ) {
        let dev = DeviceParams::bundled_for(n).unwrap();
        let g = dev.graph().unwrap();
        let seq = gen_xyz_sequence(t.0 * 1e-9, t.1 * 1e-9, t.2 * 1e-9, cycles, &g).unwrap();
        let psi0 = random_state(n, &amps);
        let ideal = apply_sequence(&seq, &psi0).unwrap();
        let fixed = insert_frame_compensation(&seq, &dev).unwrap();
        let got = compile_to_lab_schedule(&fixed, &dev).unwrap().simulate_work_frame(&psi0, None).unwrap();
        prop_assert!(1.0 - got.fidelity(&ideal) < 1e-8, "fidelity {}", got.fidelity(&ideal));
    }

    #[test]
    fn virtual_z_push_preserves_unitary(
        phases in prop::collection::vec((0usize..3, -PI..PI), 1..5),
        angles in prop::collection::vec((0usize..3, 0u8..3, -PI..PI), 1..5),
    ) {
        let g = CouplingGraph::open_chain(3, J).unwrap();
        let mut segs = Vec::new();
        for (k, &(site, phase)) in phases.iter().enumerate() {
            segs.push(Segment::VirtualZ { site, phase });
            if let Some(&(s, a, th)) = angles.get(k) {
                let axis = [Axis::X, Axis::Y, Axis::Custom(0.3)][a as usize];
                segs.push(Segment::rotation(&[s], axis, th, 20e-9));
            }
            segs.push(Segment::ResonantEvolve { duration: 7e-9 });
        }
        let seq = Sequence::new(g, segs, 1).unwrap();
        let a = compile_to_unitary(&seq).unwrap();
        let b = compile_to_unitary(&push_virtual_z(&seq).unwrap()).unwrap();
        let overlap = (a.adjoint() * b).trace().norm() / 8.0;
        prop_assert!(1.0 - overlap * overlap < 1e-12);
    }

    #[test]
    fn readout_mitigation_round_trip(
        fids in prop::collection::vec((0.8f64..1.0, 0.8f64..1.0), 2),
        amps in prop::collection::vec((-1.0f64..1.0, -1.0f64..1.0), 4),
    ) {
        let model = ReadoutModel::from_fidelities(&fids).unwrap();
        let p = random_state(2, &amps).probabilities();
        let back = model.mitigate(&model.apply(&p).unwrap()).unwrap();
        prop_assert!(p.iter().zip(&back).all(|(a, b)| (a - b).abs() < 1e-6));
    }

    #[test]
    fn purity_never_increases(t1 in 2.0f64..20.0, t2 in 0.5f64..3.0, bits in 0usize..4) {
        let g = CouplingGraph::pair(J);
        let h = build_xy(&g);
        let channels: Vec<CollapseChannel> = (0..2)
            .flat_map(|s| CollapseChannel::from_coherence(s, t1 * 1e-6, t2 * 1e-6))
            .collect();
        let mut psi = StateVector::basis(2, bits).unwrap();
        psi.apply_gate_mut(&gates::ry(1.1), &[0]).unwrap();
        let mut rho = DensityMatrix::from_pure(&psi);
        let mut last = rho.purity();
        for _ in 0..10 {
            rho = evolve_lindblad(&h, &channels, &rho, 20e-9, 1e-10).unwrap();
            let p = rho.purity();
            prop_assert!(p <= last + 1e-12, "{p} > {last}");
            last = p;
        }
    }

    #[test]
    fn seeded_runs_are_identical(seed in any::<u64>(), noise in any::<bool>()) {
        let dev = DeviceParams::xyz_pair();
        let emu = Emulator::ideal(dev.clone()).unwrap();
        let seq = gen_xyz_sequence(10e-9, 10e-9, 10e-9, 3, &dev.graph().unwrap()).unwrap();
        let psi0 = StateVector::from_bits("10").unwrap();
        let obs = [Observable::magnetization(2, Pauli::X, &[0, 1]), Observable::population(2, 2)];
        let opts = RunOptions { noise, shots: Some(300), seed, readout_error: true };
        let a = emu.run_sequence(&seq, &psi0, &[0, 1, 3], &obs, &opts).unwrap();
        let b = emu.run_sequence(&seq, &psi0, &[0, 1, 3], &obs, &opts).unwrap();
        prop_assert_eq!(a, b);
    }
}

/// `|U_cycle - exp(-i H_eff T_c)|` shrinks as `T_c^2` on a 3-site chain where
/// the pieces do not commute.
#[test]
fn floquet_convergence_on_chain() {
    let g = CouplingGraph::open_chain(3, J).unwrap();
    let h_eff = build_weighted_xyz(&g, &tau_to_delta(2.0, 1.0, 1.0).unwrap());
    let prop = Propagator::new(&h_eff).unwrap();
    let err = |t_c: f64| {
        let seq = gen_xyz_sequence(t_c / 2.0, t_c / 4.0, t_c / 4.0, 1, &g).unwrap();
        let u = compile_to_unitary(&seq).unwrap();
        let target = prop.unitary(t_c);
        // remove the global phase before comparing
        let phase = (target.adjoint() * &u).trace();
        let phase = phase / phase.norm();
        operator_norm(&(u - target * phase))
    };
    let e1 = err(40e-9);
    let e2 = err(20e-9);
    let e3 = err(10e-9);
    assert!(e1 > 1e-4, "pieces should not commute on a chain: {e1}");
    for (a, b) in [(e1, e2), (e2, e3)] {
        let order = (a / b).log2();
        assert!((order - 2.0).abs() < 0.3, "order {order}");
    }
}

#[test]
fn pair_components_commute() {
    let g = CouplingGraph::pair(1.0);
    let xx_yy = build_weighted_xyz(&g, &mwspin::hamiltonians::AnisotropyWeights::new(0.5, 0.5, 0.0).unwrap());
    let xx_zz = build_weighted_xyz(&g, &mwspin::hamiltonians::AnisotropyWeights::new(0.5, 0.0, 0.5).unwrap());
    let yy_zz = build_weighted_xyz(&g, &mwspin::hamiltonians::AnisotropyWeights::new(0.0, 0.5, 0.5).unwrap());
    for (a, b) in [(&xx_yy, &xx_zz), (&xx_yy, &yy_zz), (&xx_zz, &yy_zz)] {
        assert!(a.commutator_over_i(b).unwrap().cleaned().is_empty());
    }
}

#[test]
fn spiral_is_zero_energy_on_the_ring() {
    let g = CouplingGraph::ring(8, -TAU * 8e6).unwrap();
    for x in [0.0f64, 1.0] {
        let d = mwspin::hamiltonians::gd_ratio_to_phase(x);
        let j = -TAU * 8e6;
        let h = build_xy_dm(&g, j * d.cos() / 2.0, j * d.sin() / 2.0);
        let psi = Spiral::with_step(8, mwspin::hamiltonians::spiral_step(x)).prepare().unwrap();
        let hpsi = psi.apply_pauli_sum(&h).unwrap();
        assert!(hpsi.norm() < 1e-9 * h.coefficient_norm(), "{}", hpsi.norm());
    }
}

#[test]
fn lindblad_trace_is_stable_over_many_steps() {
    let g = CouplingGraph::pair(J);
    let channels: Vec<CollapseChannel> = (0..2)
        .flat_map(|s| CollapseChannel::from_coherence(s, 10e-6, 1.5e-6))
        .collect();
    let psi = StateVector::plus(2).unwrap();
    let rho = evolve_lindblad(&build_xy(&g), &channels, &DensityMatrix::from_pure(&psi), 1e-6, 1e-10).unwrap();
    assert!((rho.trace().re - 1.0).abs() < 1e-8);
    assert!(rho.trace().im.abs() < 1e-8);
}

#[test]
fn shot_stderr_matches_binomial() {
    let dev = DeviceParams::xyz_pair();
    let emu = Emulator::ideal(dev.clone()).unwrap();
    let g = dev.graph().unwrap();
    let seq = Sequence::new(g, vec![Segment::rotation(&[0], Axis::Y, 1.2, 20e-9)], 1).unwrap();
    let psi0 = StateVector::basis(2, 0).unwrap();
    let obs = [Observable::population(2, 0)];
    let p = (0.6f64).cos().powi(2);
    let shots = 2000u64;
    let want = (p * (1.0 - p) / shots as f64).sqrt();
    let mut values = Vec::new();
    for k in 0..400 {
        let opts = RunOptions { shots: Some(shots), seed: derive_seed(5, k), ..Default::default() };
        let rec = emu.run_sequence(&seq, &psi0, &[1], &obs, &opts).unwrap();
        let e = rec[0].estimates[0];
        assert!((e.stderr / want - 1.0).abs() < 0.2, "reported {} vs {want}", e.stderr);
        values.push(e.value);
    }
    let mean = values.iter().sum::<f64>() / values.len() as f64;
    let sd = (values.iter().map(|v| (v - mean).powi(2)).sum::<f64>() / (values.len() - 1) as f64).sqrt();
    assert!((sd / want - 1.0).abs() < 0.2, "scatter {sd} vs {want}");
    assert!((mean - p).abs() < 4.0 * want / (values.len() as f64).sqrt());
}

#[test]
fn rotation_half_pi_prerotation_sanity() {
    let psi = StateVector::plus(1).unwrap().apply_gate(&gates::ry(-FRAC_PI_2), &[0]).unwrap();
    assert!((psi.probabilities()[0] - 1.0).abs() < 1e-12);
}
