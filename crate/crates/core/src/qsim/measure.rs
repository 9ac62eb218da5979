// Copyright 2026 The mwspin Authors
// SPDX-License-Identifier: Apache-2.0

//! Expectation values and shot sampling with per-site basis prerotations.

use std::f64::consts::FRAC_PI_2;

use num_complex::Complex64;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand_distr::{Binomial, Distribution};

use super::{gates, CMatrix, DensityMatrix, PauliSum, StateVector};
use crate::error::{Error, Result};

/// Residue above which an expectation value is rejected, relative to the
/// operator's coefficient norm.
const RESIDUE_TOL: f64 = 1e-8;

/// Measurement basis for one site. `X` and `Y` are mapped onto `Z` with a
/// prerotation before sampling.
#[derive(Clone, Debug, PartialEq)]
pub enum MeasureBasis {
    Z,
    X,
    Y,
    Custom(CMatrix),
}

impl MeasureBasis {
    pub(crate) fn prerotation(&self) -> Option<CMatrix> {
        match self {
            MeasureBasis::Z => None,
            // R^y(-pi/2) takes +x to +z
            MeasureBasis::X => Some(gates::ry(-FRAC_PI_2)),
            // R^x(pi/2) takes +y to +z
            MeasureBasis::Y => Some(gates::rx(FRAC_PI_2)),
            MeasureBasis::Custom(u) => Some(u.clone()),
        }
    }
}

/// Operations shared by pure and mixed states.
pub trait QuantumState: Clone {
    fn nqubits(&self) -> usize;
    fn probabilities(&self) -> Vec<f64>;
    fn apply_local(&mut self, u: &CMatrix, sites: &[usize]) -> Result<()>;
    /// `<O>` including any imaginary part.
    fn raw_expectation(&self, op: &PauliSum) -> Result<Complex64>;

    /// Real `<O>`; fails when the imaginary residue signals a non-Hermitian
    /// operator or a corrupted state.
    fn expectation(&self, op: &PauliSum) -> Result<f64> {
        let z = self.raw_expectation(op)?;
        let scale = op.coefficient_norm().max(1.0);
        if z.im.abs() >= RESIDUE_TOL * scale {
            return Err(Error::ImaginaryResidue(z.im));
        }
        Ok(z.re)
    }
}

impl QuantumState for StateVector {
    fn nqubits(&self) -> usize {
        StateVector::nqubits(self)
    }

    fn probabilities(&self) -> Vec<f64> {
        StateVector::probabilities(self)
    }

    fn apply_local(&mut self, u: &CMatrix, sites: &[usize]) -> Result<()> {
        self.apply_gate_mut(u, sites)
    }

    fn raw_expectation(&self, op: &PauliSum) -> Result<Complex64> {
        let v = self.apply_pauli_sum(op)?;
        Ok(self.amplitudes().dotc(&v))
    }
}

impl QuantumState for DensityMatrix {
    fn nqubits(&self) -> usize {
        DensityMatrix::nqubits(self)
    }

    fn probabilities(&self) -> Vec<f64> {
        DensityMatrix::probabilities(self)
    }

    fn apply_local(&mut self, u: &CMatrix, sites: &[usize]) -> Result<()> {
        self.apply_gate_mut(u, sites)
    }

    fn raw_expectation(&self, op: &PauliSum) -> Result<Complex64> {
        if op.nqubits() != self.nqubits() {
            return Err(Error::DimensionMismatch {
                expected: self.nqubits(),
                found: op.nqubits(),
            });
        }
        Ok(self.trace_with(op))
    }
}

/// Free-function form of [`QuantumState::expectation`].
pub fn expectation<S: QuantumState>(state: &S, op: &PauliSum) -> Result<f64> {
    state.expectation(op)
}

/// Outcome histogram indexed by computational basis index.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct Counts {
    pub nqubits: usize,
    pub counts: Vec<u64>,
}

impl Counts {
    pub fn shots(&self) -> u64 {
        self.counts.iter().sum()
    }

    pub fn get(&self, bits: &str) -> u64 {
        usize::from_str_radix(bits, 2)
            .ok()
            .and_then(|i| self.counts.get(i).copied())
            .unwrap_or(0)
    }

    pub fn fraction(&self, index: usize) -> f64 {
        self.counts[index] as f64 / self.shots().max(1) as f64
    }

    /// Non-zero outcomes as `(bitstring, count)`, site 0 first.
    pub fn nonzero(&self) -> Vec<(String, u64)> {
        self.counts
            .iter()
            .enumerate()
            .filter(|(_, &c)| c > 0)
            .map(|(i, &c)| (format!("{:0width$b}", i, width = self.nqubits), c))
            .collect()
    }
}

/// Draws `shots` samples from a probability vector with a seeded generator.
pub fn sample_probabilities(probs: &[f64], shots: u64, rng: &mut ChaCha8Rng) -> Vec<u64> {
    // multinomial via sequential conditional binomials
    let total: f64 = probs.iter().map(|p| p.max(0.0)).sum();
    let mut remaining = shots;
    let mut mass = total;
    let mut out = vec![0u64; probs.len()];
    for (i, &p) in probs.iter().enumerate() {
        if remaining == 0 {
            break;
        }
        let p = p.max(0.0);
        if i == probs.len() - 1 || mass <= 0.0 {
            out[i] = remaining;
            break;
        }
        let q = (p / mass).clamp(0.0, 1.0);
        let k = if q >= 1.0 {
            remaining
        } else if q <= 0.0 {
            0
        } else {
            Binomial::new(remaining, q).map(|b| b.sample(rng)).unwrap_or(0)
        };
        out[i] = k;
        remaining -= k;
        mass -= p;
    }
    out
}

/// Applies the per-site prerotations and samples `shots` Z-basis outcomes.
pub fn sample_measurement<S: QuantumState>(
    state: &S,
    bases: &[MeasureBasis],
    shots: u64,
    seed: u64,
) -> Result<Counts> {
    if shots == 0 {
        return Err(Error::InvalidConfig("shots must be at least 1".into()));
    }
    let n = state.nqubits();
    if !bases.is_empty() && bases.len() != n {
        return Err(Error::DimensionMismatch {
            expected: n,
            found: bases.len(),
        });
    }
    let mut s = state.clone();
    for (site, b) in bases.iter().enumerate() {
        if let Some(u) = b.prerotation() {
            s.apply_local(&u, &[site])?;
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let counts = sample_probabilities(&s.probabilities(), shots, &mut rng);
    Ok(Counts { nqubits: n, counts })
}
