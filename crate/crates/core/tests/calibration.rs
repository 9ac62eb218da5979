// Copyright 2026 The mwspin Authors
// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::PI;

use mwspin::compiler::wrap_phase;
use mwspin::device::{
    analytic_rz_amplitude, calibrate_phase, calibrate_rz_amplitude, default_phase_grid, derive_seed, DeviceParams,
    Emulator, HiddenState, PhaseCalOptions, RzCalOptions,
};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

fn emulator(offsets: [f64; 2], alpha_scale: f64) -> Emulator {
    let dev = DeviceParams::xyz_pair();
    let alpha: Vec<f64> = dev.qubits.iter().map(|q| q.alpha_flux * alpha_scale).collect();
    Emulator::new(dev, HiddenState::new(offsets.to_vec(), alpha)).unwrap()
}

#[test]
fn exact_response_is_the_sine_model() {
    let offsets = [0.3, -0.9];
    let phi0 = offsets[1] - offsets[0];
    let emu = emulator(offsets, 1.0);
    let cal = calibrate_phase(&emu, &PhaseCalOptions { shots: None, ..Default::default() }).unwrap();
    for (phi, e) in &cal.points {
        let want = (1.0 + (phi + phi0).sin()) / 4.0;
        assert!((e.value - want).abs() < 1e-9, "phi {phi}: {} vs {want}", e.value);
    }
    assert!(wrap_phase(cal.offset - phi0).abs() < 1e-6);
    assert!((cal.amplitude - 0.25).abs() < 1e-6);
}

#[test]
fn sampled_response_stays_within_four_sigma() {
    let offsets = [-1.2, 0.4];
    let phi0 = offsets[1] - offsets[0];
    let emu = emulator(offsets, 1.0);
    let opts = PhaseCalOptions { shots: Some(10_000), seed: 11, ..Default::default() };
    let cal = calibrate_phase(&emu, &opts).unwrap();
    for (phi, e) in &cal.points {
        let want = (1.0 + (phi + phi0).sin()) / 4.0;
        let sigma = (want * (1.0 - want) / 10_000.0).sqrt().max(1e-4);
        assert!((e.value - want).abs() < 4.0 * sigma, "phi {phi}: {} vs {want}", e.value);
    }
}

#[test]
fn random_offsets_are_recovered() {
    let mut rng = ChaCha8Rng::seed_from_u64(2026);
    let mut sq = 0.0;
    for trial in 0..20u64 {
        let offsets = [rng.gen_range(-PI..PI), rng.gen_range(-PI..PI)];
        let emu = emulator(offsets, 1.0);
        let opts = PhaseCalOptions {
            grid: default_phase_grid(24),
            shots: Some(100_000),
            seed: derive_seed(99, trial),
            readout_error: false,
        };
        let cal = calibrate_phase(&emu, &opts).unwrap();
        let err = wrap_phase(cal.offset - (offsets[1] - offsets[0]));
        assert!(err.abs() < 4.0 * cal.offset_stderr + 1e-3, "trial {trial}: error {err}");
        sq += err * err;
    }
    let rms = (sq / 20.0).sqrt();
    assert!(rms < 0.02, "rms {rms}");
}

#[test]
fn uncoupled_pair_is_rejected() {
    let mut dev = DeviceParams::xyz_pair();
    for e in &mut dev.edges {
        e.coupling = 0.0;
    }
    let emu = Emulator::new(dev.clone(), HiddenState::none(&dev)).unwrap();
    assert!(calibrate_phase(&emu, &PhaseCalOptions::default()).is_err());
}

fn expected_rz(emu: &Emulator, opts: &RzCalOptions, scale: f64) -> f64 {
    analytic_rz_amplitude(emu.device(), opts.idle, opts.pad).unwrap() / scale
}

#[test]
fn rz_amplitude_matches_analytic_value() {
    let emu = emulator([0.0, 0.0], 1.0);
    let opts = RzCalOptions { shots: None, ..Default::default() };
    let cal = calibrate_rz_amplitude(&emu, &opts).unwrap();
    let want = expected_rz(&emu, &opts, 1.0);
    assert!((cal.amplitude / want - 1.0).abs() < 1e-4, "{} vs {want}", cal.amplitude);
}

#[test]
fn rz_single_and_multi_cycle_agree() {
    let offsets = [0.2, 0.7];
    let emu = emulator(offsets, 1.0);
    let base = RzCalOptions {
        phase_correction: offsets[1] - offsets[0],
        shots: Some(10_000),
        seed: 3,
        ..Default::default()
    };
    let one = calibrate_rz_amplitude(&emu, &RzCalOptions { cycle_counts: vec![1], ..base.clone() }).unwrap();
    let five = calibrate_rz_amplitude(&emu, &base).unwrap();
    let want = expected_rz(&emu, &base, 1.0);
    assert!((one.amplitude / want - 1.0).abs() < 0.05, "n=1: {} vs {want}", one.amplitude);
    assert!((five.amplitude / want - 1.0).abs() < 0.02, "n=1..5: {} vs {want}", five.amplitude);
    assert!((five.amplitude - want).abs() <= (one.amplitude - want).abs() + 1e-3 * want.abs());
}

#[test]
fn rz_tracks_the_true_flux_sensitivity() {
    for scale in [0.95, 1.04] {
        let emu = emulator([0.0, 0.0], scale);
        let opts = RzCalOptions { shots: Some(10_000), seed: 8, ..Default::default() };
        let cal = calibrate_rz_amplitude(&emu, &opts).unwrap();
        let want = expected_rz(&emu, &opts, scale);
        assert!((cal.amplitude / want - 1.0).abs() < 0.02, "scale {scale}: {} vs {want}", cal.amplitude);
    }
}
