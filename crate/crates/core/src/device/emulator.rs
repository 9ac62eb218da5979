// Copyright 2026 The mwspin Authors
// SPDX-License-Identifier: Apache-2.0

//! Mock hardware: runs sequences in the work frame (pure or with Lindblad
//! decay during timed segments), samples readout, and hides drive-phase
//! offsets and the true flux sensitivity behind the lab-frame path.

use std::f64::consts::PI;

use rand::{Rng, RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::{DeviceParams, ReadoutModel};
use crate::compiler::{compile_to_lab_schedule, LabPerturbation, Segment, Sequence, WorkFrame};
use crate::error::{Error, Result, MAX_QUBITS};
use crate::hamiltonians::build_xy;
use crate::qsim::lindblad::evolve_lindblad_auto;
use crate::qsim::measure::sample_probabilities;
use crate::qsim::{
    CollapseChannel, DensityMatrix, MeasureBasis, Pauli, PauliString, PauliSum, QuantumState, StateVector,
};

/// Independent, reproducible seed for stream `stream` of a run seeded with
/// `master`.
pub fn derive_seed(master: u64, stream: u64) -> u64 {
    let mut rng = ChaCha8Rng::seed_from_u64(master);
    rng.set_stream(stream);
    rng.next_u64()
}

/// Ground truth the calibration loops have to discover.
#[derive(Clone, Debug, PartialEq)]
pub struct HiddenState {
    phase_offsets: Vec<f64>,
    alpha_true: Vec<f64>,
}

impl HiddenState {
    /// No offsets, nominal flux sensitivity.
    pub fn none(dev: &DeviceParams) -> Self {
        HiddenState {
            phase_offsets: vec![0.0; dev.nqubits()],
            alpha_true: dev.qubits.iter().map(|q| q.alpha_flux).collect(),
        }
    }

    pub fn new(phase_offsets: Vec<f64>, alpha_true: Vec<f64>) -> Self {
        HiddenState {
            phase_offsets,
            alpha_true,
        }
    }

    /// Offsets uniform in `[-pi, pi)` and `alpha_true = alpha (1 + u)` with
    /// `u` uniform in `[-spread, spread]`.
    pub fn sample(dev: &DeviceParams, seed: u64, spread: f64) -> Self {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let phase_offsets = (0..dev.nqubits()).map(|_| rng.gen_range(-PI..PI)).collect();
        let alpha_true = dev
            .qubits
            .iter()
            .map(|q| {
                let u = if spread > 0.0 { rng.gen_range(-spread..=spread) } else { 0.0 };
                q.alpha_flux * (1.0 + u)
            })
            .collect();
        HiddenState {
            phase_offsets,
            alpha_true,
        }
    }

    /// Injected drive-phase offsets. Only the harness that built the state
    /// should read these; the emulator never hands them out.
    pub fn phase_offsets(&self) -> &[f64] {
        &self.phase_offsets
    }

    pub fn alpha_true(&self) -> &[f64] {
        &self.alpha_true
    }

    fn perturbation(&self, dev: &DeviceParams) -> LabPerturbation {
        LabPerturbation {
            phase_offsets: self.phase_offsets.clone(),
            detuning_scale: self
                .alpha_true
                .iter()
                .zip(&dev.qubits)
                .map(|(a, q)| if q.alpha_flux != 0.0 { a / q.alpha_flux } else { 1.0 })
                .collect(),
        }
    }
}

/// A measured quantity: a product measurement basis and the value each
/// outcome contributes to the estimator.
#[derive(Clone, Debug, PartialEq)]
pub struct Observable {
    pub name: String,
    pub bases: Vec<MeasureBasis>,
    pub weights: Vec<f64>,
}

fn spin(b: usize, n: usize, site: usize) -> f64 {
    if b >> (n - 1 - site) & 1 == 0 {
        1.0
    } else {
        -1.0
    }
}

fn basis_of(p: Pauli) -> MeasureBasis {
    match p {
        Pauli::X => MeasureBasis::X,
        Pauli::Y => MeasureBasis::Y,
        Pauli::Z => MeasureBasis::Z,
    }
}

impl Observable {
    pub fn new(name: impl Into<String>, bases: Vec<MeasureBasis>, weights: Vec<f64>) -> Result<Self> {
        if weights.len() != 1usize << bases.len() {
            return Err(Error::DimensionMismatch {
                expected: 1usize << bases.len(),
                found: weights.len(),
            });
        }
        Ok(Observable {
            name: name.into(),
            bases,
            weights,
        })
    }

    /// `(1/|sites|) sum <sigma^axis_s>`.
    pub fn magnetization(n: usize, axis: Pauli, sites: &[usize]) -> Self {
        let bases = (0..n)
            .map(|s| if sites.contains(&s) { basis_of(axis) } else { MeasureBasis::Z })
            .collect();
        let weights = (0..1usize << n)
            .map(|b| sites.iter().map(|&s| spin(b, n, s)).sum::<f64>() / sites.len() as f64)
            .collect();
        let name = format!("mean_sigma_{}", format!("{axis:?}").to_lowercase());
        Observable { name, bases, weights }
    }

    /// Product of single-site Paulis.
    pub fn pauli_product(n: usize, factors: &[(usize, Pauli)]) -> Self {
        let mut bases = vec![MeasureBasis::Z; n];
        for &(s, p) in factors {
            bases[s] = basis_of(p);
        }
        let weights = (0..1usize << n)
            .map(|b| factors.iter().map(|&(s, _)| spin(b, n, s)).product())
            .collect();
        let name = factors
            .iter()
            .map(|(s, p)| format!("{}{s}", format!("{p:?}").to_lowercase()))
            .collect::<Vec<_>>()
            .join("_");
        Observable { name, bases, weights }
    }

    /// Probability of the computational basis outcome `index`.
    pub fn population(n: usize, index: usize) -> Self {
        let weights = (0..1usize << n).map(|b| if b == index { 1.0 } else { 0.0 }).collect();
        Observable {
            name: format!("p_{index:0n$b}"),
            bases: vec![MeasureBasis::Z; n],
            weights,
        }
    }

    fn nqubits(&self) -> usize {
        self.bases.len()
    }
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Estimate {
    pub value: f64,
    /// Standard error of the shot average; zero for exact readout.
    pub stderr: f64,
}

/// Estimates taken after `cycles` repetitions, at time
/// `cycles * resonant_duration`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct RunRecord {
    pub cycles: usize,
    pub time: f64,
    pub estimates: Vec<Estimate>,
}

#[derive(Clone, Copy, Debug, PartialEq)]
pub struct RunOptions {
    pub noise: bool,
    /// `None` returns exact expectation values.
    pub shots: Option<u64>,
    pub seed: u64,
    pub readout_error: bool,
}

impl Default for RunOptions {
    fn default() -> Self {
        RunOptions {
            noise: false,
            shots: None,
            seed: 0,
            readout_error: false,
        }
    }
}

#[derive(Clone, Debug)]
pub struct Emulator {
    dev: DeviceParams,
    hidden: HiddenState,
    readout: ReadoutModel,
}

enum Register {
    Pure(StateVector),
    Mixed(DensityMatrix),
}

impl Register {
    fn probabilities_in(&self, bases: &[MeasureBasis]) -> Result<Vec<f64>> {
        fn rotated<S: QuantumState>(s: &S, bases: &[MeasureBasis]) -> Result<Vec<f64>> {
            let mut s = s.clone();
            for (site, b) in bases.iter().enumerate() {
                if let Some(u) = b.prerotation() {
                    s.apply_local(&u, &[site])?;
                }
            }
            Ok(s.probabilities())
        }
        match self {
            Register::Pure(psi) => rotated(psi, bases),
            Register::Mixed(rho) => rotated(rho, bases),
        }
    }
}

impl Emulator {
    pub fn new(dev: DeviceParams, hidden: HiddenState) -> Result<Self> {
        dev.validate()?;
        let n = dev.nqubits();
        if hidden.phase_offsets.len() != n || hidden.alpha_true.len() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: hidden.phase_offsets.len().min(hidden.alpha_true.len()),
            });
        }
        let readout = ReadoutModel::from_device(&dev);
        Ok(Emulator { dev, hidden, readout })
    }

    /// Emulator without hidden imperfections.
    pub fn ideal(dev: DeviceParams) -> Result<Self> {
        let hidden = HiddenState::none(&dev);
        Self::new(dev, hidden)
    }

    pub fn device(&self) -> &DeviceParams {
        &self.dev
    }

    pub fn readout(&self) -> &ReadoutModel {
        &self.readout
    }

    fn check(&self, seq: &Sequence, psi0: &StateVector) -> Result<()> {
        seq.validate()?;
        let n = self.dev.nqubits();
        if n > MAX_QUBITS {
            return Err(Error::Capacity {
                requested: n,
                max: MAX_QUBITS,
            });
        }
        if seq.nqubits != n || psi0.nqubits() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: if seq.nqubits != n { seq.nqubits } else { psi0.nqubits() },
            });
        }
        Ok(())
    }

    /// Runs `seq` from `psi0` and estimates every observable after each
    /// entry of `sample_cycles` (stroboscopic sampling; `0` is the initial
    /// state).
    pub fn run_sequence(
        &self,
        seq: &Sequence,
        psi0: &StateVector,
        sample_cycles: &[usize],
        observables: &[Observable],
        opts: &RunOptions,
    ) -> Result<Vec<RunRecord>> {
        self.check(seq, psi0)?;
        let n = self.dev.nqubits();
        for o in observables {
            if o.nqubits() != n {
                return Err(Error::DimensionMismatch {
                    expected: n,
                    found: o.nqubits(),
                });
            }
        }
        if sample_cycles.windows(2).any(|w| w[1] <= w[0]) {
            return Err(Error::InvalidConfig("sample cycles must be strictly increasing".into()));
        }
        if let Some(&last) = sample_cycles.last() {
            if last > seq.cycles {
                return Err(Error::InvalidConfig(format!(
                    "sample cycle {last} beyond the {} cycles of the sequence",
                    seq.cycles
                )));
            }
        }
        if opts.shots == Some(0) {
            return Err(Error::InvalidConfig("shots must be at least 1".into()));
        }
        let mut register = if opts.noise {
            Register::Mixed(DensityMatrix::from_pure(psi0))
        } else {
            Register::Pure(psi0.clone())
        };
        let pure = WorkFrame::new(seq, false)?;
        let noisy = if opts.noise { Some(NoisyStepper::new(seq, &self.dev)) } else { None };
        let t_c = seq.resonant_duration();
        let mut records = Vec::with_capacity(sample_cycles.len());
        let mut done = 0usize;
        for (k, &target) in sample_cycles.iter().enumerate() {
            while done < target {
                for seg in &seq.segments {
                    match &mut register {
                        Register::Pure(psi) => pure.apply_to_state(seg, psi)?,
                        Register::Mixed(rho) => noisy.as_ref().expect("noisy path").apply(seg, rho)?,
                    }
                }
                done += 1;
            }
            let estimates = observables
                .iter()
                .enumerate()
                .map(|(j, o)| {
                    let stream = (k as u64) << 20 | j as u64;
                    self.estimate(&register, o, opts, derive_seed(opts.seed, stream))
                })
                .collect::<Result<Vec<_>>>()?;
            records.push(RunRecord {
                cycles: target,
                time: target as f64 * t_c,
                estimates,
            });
        }
        Ok(records)
    }

    /// Runs several periodic blocks back to back, carrying the state across,
    /// and samples before the first cycle and after every cycle. Times add
    /// up the resonant duration of each cycle.
    pub fn run_program(
        &self,
        blocks: &[Sequence],
        psi0: &StateVector,
        observables: &[Observable],
        opts: &RunOptions,
    ) -> Result<Vec<RunRecord>> {
        if opts.shots == Some(0) {
            return Err(Error::InvalidConfig("shots must be at least 1".into()));
        }
        for b in blocks {
            self.check(b, psi0)?;
        }
        let n = self.dev.nqubits();
        if let Some(o) = observables.iter().find(|o| o.nqubits() != n) {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: o.nqubits(),
            });
        }
        let mut register = if opts.noise {
            Register::Mixed(DensityMatrix::from_pure(psi0))
        } else {
            Register::Pure(psi0.clone())
        };
        let mut records = Vec::new();
        let mut time = 0.0;
        let mut index = 0usize;
        let mut sample = |reg: &Register, index: usize, time: f64| -> Result<()> {
            let estimates = observables
                .iter()
                .enumerate()
                .map(|(j, o)| self.estimate(reg, o, opts, derive_seed(opts.seed, (index as u64) << 20 | j as u64)))
                .collect::<Result<Vec<_>>>()?;
            records.push(RunRecord {
                cycles: index,
                time,
                estimates,
            });
            Ok(())
        };
        sample(&register, 0, 0.0)?;
        for b in blocks {
            let pure = WorkFrame::new(b, false)?;
            let noisy = if opts.noise { Some(NoisyStepper::new(b, &self.dev)) } else { None };
            let t_c = b.resonant_duration();
            for _ in 0..b.cycles {
                for seg in &b.segments {
                    match &mut register {
                        Register::Pure(psi) => pure.apply_to_state(seg, psi)?,
                        Register::Mixed(rho) => noisy.as_ref().expect("noisy path").apply(seg, rho)?,
                    }
                }
                index += 1;
                time += t_c;
                sample(&register, index, time)?;
            }
        }
        Ok(records)
    }

    /// Same as [`run_sequence`](Self::run_sequence) for a batch of
    /// independent sequences, run in parallel. Item `i` uses seed
    /// `derive_seed(opts.seed, i)`.
    pub fn run_batch(
        &self,
        jobs: &[(Sequence, StateVector, Vec<usize>)],
        observables: &[Observable],
        opts: &RunOptions,
    ) -> Result<Vec<Vec<RunRecord>>> {
        jobs.par_iter()
            .enumerate()
            .map(|(i, (seq, psi0, cycles))| {
                let o = RunOptions {
                    seed: derive_seed(opts.seed, 1 << 40 | i as u64),
                    ..*opts
                };
                self.run_sequence(seq, psi0, cycles, observables, &o)
            })
            .collect()
    }

    fn estimate(&self, reg: &Register, o: &Observable, opts: &RunOptions, seed: u64) -> Result<Estimate> {
        let mut probs = reg.probabilities_in(&o.bases)?;
        if opts.readout_error {
            probs = self.readout.apply(&probs)?;
        }
        Ok(estimate_from(&probs, &o.weights, opts.shots, seed))
    }

    /// Z-basis outcome counts after the full sequence.
    pub fn sample_counts(&self, seq: &Sequence, psi0: &StateVector, shots: u64, opts: &RunOptions) -> Result<Vec<u64>> {
        self.check(seq, psi0)?;
        if shots == 0 {
            return Err(Error::InvalidConfig("shots must be at least 1".into()));
        }
        let n = self.dev.nqubits();
        let reg = self.final_register(seq, psi0, opts)?;
        let mut probs = reg.probabilities_in(&vec![MeasureBasis::Z; n])?;
        if opts.readout_error {
            probs = self.readout.apply(&probs)?;
        }
        let mut rng = ChaCha8Rng::seed_from_u64(opts.seed);
        Ok(sample_probabilities(&probs, shots, &mut rng))
    }

    fn final_register(&self, seq: &Sequence, psi0: &StateVector, opts: &RunOptions) -> Result<Register> {
        if opts.noise {
            let stepper = NoisyStepper::new(seq, &self.dev);
            let mut rho = DensityMatrix::from_pure(psi0);
            for _ in 0..seq.cycles {
                for seg in &seq.segments {
                    stepper.apply(seg, &mut rho)?;
                }
            }
            Ok(Register::Mixed(rho))
        } else {
            let wf = WorkFrame::new(seq, false)?;
            let mut psi = psi0.clone();
            for _ in 0..seq.cycles {
                for seg in &seq.segments {
                    wf.apply_to_state(seg, &mut psi)?;
                }
            }
            Ok(Register::Pure(psi))
        }
    }

    /// Runs the sequence as physical pulses (hidden offsets and flux
    /// sensitivity applied) and returns the final state in the work frame.
    pub fn run_lab(&self, seq: &Sequence, psi0: &StateVector) -> Result<StateVector> {
        self.check(seq, psi0)?;
        let sched = compile_to_lab_schedule(seq, &self.dev)?;
        sched.simulate_work_frame(psi0, Some(&self.hidden.perturbation(&self.dev)))
    }

    /// Lab-frame run followed by a measurement of `o`.
    pub fn measure_lab(&self, seq: &Sequence, psi0: &StateVector, o: &Observable, opts: &RunOptions) -> Result<Estimate> {
        let psi = self.run_lab(seq, psi0)?;
        self.estimate(&Register::Pure(psi), o, opts, opts.seed)
    }
}

/// Shot-averaged (or exact) estimator of `sum_b w_b p_b`.
pub fn estimate_from(probs: &[f64], weights: &[f64], shots: Option<u64>, seed: u64) -> Estimate {
    match shots {
        None => Estimate {
            value: probs.iter().zip(weights).map(|(p, w)| p * w).sum(),
            stderr: 0.0,
        },
        Some(s) => {
            let mut rng = ChaCha8Rng::seed_from_u64(seed);
            let counts = sample_probabilities(probs, s, &mut rng);
            let total = s as f64;
            let mean: f64 = counts.iter().zip(weights).map(|(&c, w)| c as f64 * w).sum::<f64>() / total;
            let second: f64 = counts.iter().zip(weights).map(|(&c, w)| c as f64 * w * w).sum::<f64>() / total;
            let var = (second - mean * mean).max(0.0);
            Estimate {
                value: mean,
                stderr: (var / total).sqrt(),
            }
        }
    }
}

/// Density-matrix executor: gates are instantaneous, decay acts during
/// every timed segment.
struct NoisyStepper {
    nqubits: usize,
    coupling: PauliSum,
    channels: Vec<CollapseChannel>,
}

impl NoisyStepper {
    fn new(seq: &Sequence, dev: &DeviceParams) -> Self {
        let channels = dev
            .qubits
            .iter()
            .enumerate()
            .flat_map(|(s, q)| CollapseChannel::from_coherence(s, q.t1, q.t2_star))
            .collect();
        NoisyStepper {
            nqubits: seq.nqubits,
            coupling: build_xy(&seq.graph),
            channels,
        }
    }

    fn apply(&self, seg: &Segment, rho: &mut DensityMatrix) -> Result<()> {
        match seg {
            Segment::Rotation { sites, axis, angle, .. } => {
                let g = axis.gate(*angle);
                for &s in sites {
                    rho.apply_gate_mut(&g, &[s])?;
                }
            }
            Segment::VirtualZ { site, phase } => rho.apply_gate_mut(&crate::qsim::gates::rz(*phase), &[*site])?,
            Segment::ResonantEvolve { duration } => {
                *rho = evolve_lindblad_auto(&self.coupling, &self.channels, rho, *duration)?;
            }
            Segment::PhysicalRz { detunings, duration } => {
                let terms = detunings
                    .iter()
                    .map(|&(s, w)| PauliString::single(w / 2.0, s, Pauli::Z))
                    .collect();
                let h = PauliSum::new(self.nqubits, terms)?;
                *rho = evolve_lindblad_auto(&h, &self.channels, rho, *duration)?;
            }
            Segment::Idle { duration } => {
                *rho = evolve_lindblad_auto(&PauliSum::zero(self.nqubits), &self.channels, rho, *duration)?;
            }
        }
        Ok(())
    }
}
