// Copyright 2026 The mwspin Authors
// SPDX-License-Identifier: Apache-2.0

use num_complex::Complex64;

use super::pauli::check_capacity;
use super::state::{apply_local, check_gate};
use super::{hermiticity_deviation, CMatrix, PauliSum, StateVector};
use crate::error::{Error, Result};

/// Mixed state of an `n`-qubit register.
#[derive(Clone, Debug, PartialEq)]
pub struct DensityMatrix {
    nqubits: usize,
    rho: CMatrix,
}

impl DensityMatrix {
    pub fn from_pure(psi: &StateVector) -> Self {
        let a = psi.amplitudes();
        DensityMatrix {
            nqubits: psi.nqubits(),
            rho: a * a.adjoint(),
        }
    }

    /// Validates Hermiticity, unit trace and positivity.
    pub fn from_matrix(rho: CMatrix) -> Result<Self> {
        let dim = rho.nrows();
        if dim != rho.ncols() || dim == 0 || !dim.is_power_of_two() {
            return Err(Error::DimensionMismatch {
                expected: dim.next_power_of_two().max(2),
                found: rho.ncols(),
            });
        }
        let nqubits = dim.trailing_zeros() as usize;
        check_capacity(nqubits)?;
        let out = DensityMatrix { nqubits, rho };
        out.validate()?;
        Ok(out)
    }

    #[cfg(test)]
    pub(crate) fn from_raw(nqubits: usize, rho: CMatrix) -> Self {
        DensityMatrix { nqubits, rho }
    }

    pub fn nqubits(&self) -> usize {
        self.nqubits
    }

    pub fn dim(&self) -> usize {
        self.rho.nrows()
    }

    pub fn matrix(&self) -> &CMatrix {
        &self.rho
    }

    pub(crate) fn matrix_mut(&mut self) -> &mut CMatrix {
        &mut self.rho
    }

    pub fn trace(&self) -> Complex64 {
        self.rho.trace()
    }

    pub fn purity(&self) -> f64 {
        // tr(rho^2) = sum |rho_ij|^2 for Hermitian rho
        self.rho.iter().map(|z| z.norm_sqr()).sum()
    }

    pub fn min_eigenvalue(&self) -> f64 {
        self.rho
            .clone()
            .symmetric_eigenvalues()
            .iter()
            .copied()
            .fold(f64::INFINITY, f64::min)
    }

    pub fn validate(&self) -> Result<()> {
        let herm = hermiticity_deviation(&self.rho);
        if herm > 1e-10 {
            return Err(Error::InvalidConfig(format!(
                "density matrix not Hermitian (deviation {herm:.3e})"
            )));
        }
        let tr = self.trace();
        if (tr - Complex64::new(1.0, 0.0)).norm() > 1e-8 {
            return Err(Error::InvalidConfig(format!("density matrix trace {tr}")));
        }
        let min = self.min_eigenvalue();
        if min < -1e-8 {
            return Err(Error::Unstable(min));
        }
        Ok(())
    }

    pub fn probabilities(&self) -> Vec<f64> {
        (0..self.dim()).map(|i| self.rho[(i, i)].re.max(0.0)).collect()
    }

    /// `<psi| rho |psi>`.
    pub fn fidelity_with_pure(&self, psi: &StateVector) -> f64 {
        let a = psi.amplitudes();
        (a.adjoint() * &self.rho * a)[(0, 0)].re
    }

    /// `rho -> U rho U^dagger` for a local gate.
    pub fn apply_gate_mut(&mut self, u: &CMatrix, sites: &[usize]) -> Result<()> {
        check_gate(u, sites, self.nqubits)?;
        let n = self.nqubits;
        let dim = self.dim();
        // U rho: act on every column
        for c in 0..dim {
            let mut col: Vec<Complex64> = self.rho.column(c).iter().copied().collect();
            apply_local(&mut col, n, u, sites);
            for (r, v) in col.into_iter().enumerate() {
                self.rho[(r, c)] = v;
            }
        }
        // (U rho) U^dagger = (U (U rho)^dagger)^dagger
        let mut adj = self.rho.adjoint();
        for c in 0..dim {
            let mut col: Vec<Complex64> = adj.column(c).iter().copied().collect();
            apply_local(&mut col, n, u, sites);
            for (r, v) in col.into_iter().enumerate() {
                adj[(r, c)] = v;
            }
        }
        self.rho = adj.adjoint();
        Ok(())
    }

    pub fn apply_unitary(&self, u: &CMatrix) -> Result<DensityMatrix> {
        if u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: u.ncols(),
            });
        }
        Ok(DensityMatrix {
            nqubits: self.nqubits,
            rho: u * &self.rho * u.adjoint(),
        })
    }

    /// Replaces `rho` by `(rho + rho^dagger)/2`.
    pub(crate) fn symmetrize(&mut self) {
        let adj = self.rho.adjoint();
        self.rho = (&self.rho + adj) * Complex64::new(0.5, 0.0);
    }

    /// Complex `tr(rho O)` without materialising `O`.
    pub(crate) fn trace_with(&self, op: &PauliSum) -> Complex64 {
        let mut acc = Complex64::new(0.0, 0.0);
        for t in op.terms() {
            let masks = t.masks(self.nqubits);
            let mut s = Complex64::new(0.0, 0.0);
            for b in 0..self.dim() {
                s += masks.phase(b) * self.rho[(b, b ^ masks.flip)];
            }
            acc += s * t.coeff;
        }
        acc
    }
}
