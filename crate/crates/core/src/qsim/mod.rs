// Copyright 2026 The mwspin Authors
// SPDX-License-Identifier: Apache-2.0

//! Dense complex linear algebra for registers of up to
//! [`MAX_QUBITS`](crate::error::MAX_QUBITS) qubits.

use nalgebra::{DMatrix, DVector};
use num_complex::Complex64;

pub mod density;
pub mod gates;
pub mod lindblad;
pub mod measure;
pub mod pauli;
pub mod propagator;
pub mod state;

pub type CMatrix = DMatrix<Complex64>;
pub type CVector = DVector<Complex64>;

pub use density::DensityMatrix;
pub use lindblad::{evolve_lindblad, lindblad_step_bound, ChannelKind, CollapseChannel};
pub use measure::{sample_measurement, MeasureBasis, QuantumState};
pub use pauli::{materialize, Pauli, PauliString, PauliSum};
pub use propagator::{evolve_unitary, Propagator};
pub use state::StateVector;

/// Largest elementwise deviation of `U^dagger U` from the identity.
pub fn unitarity_deviation(u: &CMatrix) -> f64 {
    let p = u.adjoint() * u;
    let mut worst = 0.0f64;
    for r in 0..p.nrows() {
        for c in 0..p.ncols() {
            let target = if r == c { 1.0 } else { 0.0 };
            worst = worst.max((p[(r, c)] - Complex64::new(target, 0.0)).norm());
        }
    }
    worst
}

/// Largest elementwise deviation of `M` from `M^dagger`.
pub fn hermiticity_deviation(m: &CMatrix) -> f64 {
    let mut worst = 0.0f64;
    for r in 0..m.nrows() {
        for c in r..m.ncols() {
            worst = worst.max((m[(r, c)] - m[(c, r)].conj()).norm());
        }
    }
    worst
}

/// Spectral norm of a square matrix via its singular values.
pub fn operator_norm(m: &CMatrix) -> f64 {
    m.clone().singular_values().iter().copied().fold(0.0, f64::max)
}

/// Operator-norm distance between two unitaries, minimised over a global
/// phase.
pub fn phase_insensitive_distance(a: &CMatrix, b: &CMatrix) -> f64 {
    let overlap = (a.adjoint() * b).trace();
    let phase = if overlap.norm() > 0.0 {
        overlap / overlap.norm()
    } else {
        Complex64::new(1.0, 0.0)
    };
    operator_norm(&(a * phase - b))
}
