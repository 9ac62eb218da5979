// Copyright 2026 The mwspin Authors
// SPDX-License-Identifier: Apache-2.0

//! Exact propagators `exp(-i H t)` from a dense Hermitian eigendecomposition.

use num_complex::Complex64;

use super::{CMatrix, CVector, PauliSum, StateVector};
use crate::error::{Error, Result};

/// Cached eigendecomposition of a Hamiltonian, reusable across times.
#[derive(Clone, Debug)]
pub struct Propagator {
    nqubits: usize,
    energies: Vec<f64>,
    vectors: CMatrix,
}

impl Propagator {
    pub fn new(h: &PauliSum) -> Result<Self> {
        let m = h.materialize()?;
        Ok(Self::from_matrix(h.nqubits(), m))
    }

    pub fn from_matrix(nqubits: usize, m: CMatrix) -> Self {
        let (energies, vectors) = hermitian_eigen(&m);
        Propagator {
            nqubits,
            energies,
            vectors,
        }
    }

    pub fn energies(&self) -> &[f64] {
        &self.energies
    }

    pub fn eigenvectors(&self) -> &CMatrix {
        &self.vectors
    }

    /// Largest `|E|`.
    pub fn spectral_radius(&self) -> f64 {
        self.energies.iter().fold(0.0, |m, e| m.max(e.abs()))
    }

    fn phases(&self, t: f64) -> Vec<Complex64> {
        self.energies
            .iter()
            .map(|&e| Complex64::from_polar(1.0, -e * t))
            .collect()
    }

    /// Dense `exp(-i H t)`.
    pub fn unitary(&self, t: f64) -> CMatrix {
        let ph = self.phases(t);
        let mut scaled = self.vectors.clone();
        for (k, p) in ph.iter().enumerate() {
            scaled.column_mut(k).iter_mut().for_each(|z| *z *= p);
        }
        scaled * self.vectors.adjoint()
    }

    pub fn evolve(&self, psi: &StateVector, t: f64) -> Result<StateVector> {
        if psi.nqubits() != self.nqubits {
            return Err(Error::DimensionMismatch {
                expected: self.vectors.nrows(),
                found: psi.dim(),
            });
        }
        if t == 0.0 {
            return Ok(psi.clone());
        }
        let mut coords: CVector = self.vectors.adjoint() * psi.amplitudes();
        for (c, p) in coords.iter_mut().zip(self.phases(t)) {
            *c *= p;
        }
        let mut out = StateVector::from_raw(self.nqubits, &self.vectors * coords);
        out.renormalize();
        Ok(out)
    }
}

/// `exp(-i H t) |psi>`; negative `t` runs the evolution backwards.
pub fn evolve_unitary(h: &PauliSum, t: f64, psi: &StateVector) -> Result<StateVector> {
    if h.nqubits() != psi.nqubits() {
        return Err(Error::DimensionMismatch {
            expected: 1usize << h.nqubits(),
            found: psi.dim(),
        });
    }
    Propagator::new(h)?.evolve(psi, t)
}

/// Dense Hermitian eigendecomposition, eigenvalues ascending.
fn hermitian_eigen(m: &CMatrix) -> (Vec<f64>, CMatrix) {
    let n = m.nrows();
    let norm = m.iter().fold(0.0f64, |a, z| a.max(z.norm()));
    let scale = if norm > 0.0 { norm } else { 1.0 };
    let a = faer::Mat::<faer::c64>::from_fn(n, n, |r, c| {
        let z = (m[(r, c)] + m[(c, r)].conj()) * (0.5 / scale);
        faer::c64::new(z.re, z.im)
    });
    match a.self_adjoint_eigen(faer::Side::Lower) {
        Ok(eig) => {
            let s = eig.S();
            let u = eig.U();
            let energies = (0..n).map(|k| s[k].re * scale).collect();
            let vectors = CMatrix::from_fn(n, n, |r, c| {
                let z = u[(r, c)];
                Complex64::new(z.re, z.im)
            });
            (energies, vectors)
        }
        Err(_) => {
            let eig = m.clone().symmetric_eigen();
            (eig.eigenvalues.iter().copied().collect(), eig.eigenvectors)
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::{unitarity_deviation, Pauli, PauliString};
    use std::f64::consts::PI;

    #[test]
    fn larmor_half_period_flips_plus_to_minus() {
        let omega = 2.0 * PI * 5e6;
        let h = PauliSum::new(1, vec![PauliString::single(omega / 2.0, 0, Pauli::Z)]).unwrap();
        let psi = StateVector::plus(1).unwrap();
        let out = evolve_unitary(&h, PI / omega, &psi).unwrap();
        let r = std::f64::consts::FRAC_1_SQRT_2;
        let minus = StateVector::from_amplitudes(vec![Complex64::new(r, 0.0), Complex64::new(-r, 0.0)]).unwrap();
        assert!((out.fidelity(&minus) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn xy_full_swap() {
        let j = 2.0 * PI * -3e6;
        let h = PauliSum::new(
            2,
            vec![
                PauliString::pair(j / 2.0, 0, Pauli::X, 1, Pauli::X),
                PauliString::pair(j / 2.0, 0, Pauli::Y, 1, Pauli::Y),
            ],
        )
        .unwrap();
        let psi = StateVector::from_bits("10").unwrap();
        let out = evolve_unitary(&h, PI / (2.0 * j.abs()), &psi).unwrap();
        let target = StateVector::from_bits("01").unwrap();
        assert!((out.fidelity(&target) - 1.0).abs() < 1e-12);
    }

    #[test]
    fn zero_time_is_identity() {
        let h = PauliSum::new(1, vec![PauliString::single(3.0, 0, Pauli::X)]).unwrap();
        let psi = StateVector::from_amplitudes(vec![Complex64::new(0.3, 0.2), Complex64::new(0.1, -0.9)]).unwrap();
        let out = evolve_unitary(&h, 0.0, &psi).unwrap();
        assert_eq!(out, psi);
    }

    #[test]
    fn unitary_is_unitary() {
        let h = PauliSum::new(
            2,
            vec![
                PauliString::pair(0.7, 0, Pauli::X, 1, Pauli::Z),
                PauliString::single(-1.3, 1, Pauli::Y),
            ],
        )
        .unwrap();
        let u = Propagator::new(&h).unwrap().unitary(2.9);
        assert!(unitarity_deviation(&u) < 1e-12);
    }

    #[test]
    fn dimension_mismatch() {
        let h = PauliSum::zero(2);
        let psi = StateVector::basis(1, 0).unwrap();
        assert!(matches!(evolve_unitary(&h, 1.0, &psi), Err(Error::DimensionMismatch { .. })));
    }
}
