// Copyright 2026 The mwspin Authors
// SPDX-License-Identifier: Apache-2.0

use num_complex::Complex64;

use super::pauli::check_capacity;
use super::{unitarity_deviation, CMatrix, CVector, PauliSum};
use crate::error::{Error, Result};

const UNITARY_TOL: f64 = 1e-12;

/// Pure state of an `n`-qubit register.
#[derive(Clone, Debug, PartialEq)]
pub struct StateVector {
    nqubits: usize,
    amps: CVector,
}

impl StateVector {
    /// Computational basis state `|index>`.
    pub fn basis(nqubits: usize, index: usize) -> Result<Self> {
        check_capacity(nqubits)?;
        let dim = 1usize << nqubits;
        if index >= dim {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: index + 1,
            });
        }
        let mut amps = CVector::zeros(dim);
        amps[index] = Complex64::new(1.0, 0.0);
        Ok(StateVector { nqubits, amps })
    }

    /// Basis state from a bitstring such as `"0110"`; the first character is
    /// site 0.
    pub fn from_bits(bits: &str) -> Result<Self> {
        let n = bits.len();
        let idx = usize::from_str_radix(bits, 2)
            .map_err(|_| Error::InvalidConfig(format!("not a bitstring: {bits:?}")))?;
        Self::basis(n, idx)
    }

    /// Normalises the given amplitudes. Length must be a power of two.
    pub fn from_amplitudes(amps: Vec<Complex64>) -> Result<Self> {
        let dim = amps.len();
        if dim == 0 || !dim.is_power_of_two() {
            return Err(Error::DimensionMismatch {
                expected: dim.next_power_of_two().max(2),
                found: dim,
            });
        }
        let nqubits = dim.trailing_zeros() as usize;
        check_capacity(nqubits)?;
        let mut v = CVector::from_vec(amps);
        let norm = v.norm();
        if norm == 0.0 {
            return Err(Error::InvalidConfig("zero state vector".into()));
        }
        v /= Complex64::new(norm, 0.0);
        Ok(StateVector { nqubits, amps: v })
    }

    /// Tensor product of single-qubit states, site 0 first.
    pub fn product(sites: &[[Complex64; 2]]) -> Result<Self> {
        check_capacity(sites.len())?;
        let mut amps = vec![Complex64::new(1.0, 0.0)];
        for s in sites {
            let n = (s[0].norm_sqr() + s[1].norm_sqr()).sqrt();
            let mut next = Vec::with_capacity(amps.len() * 2);
            for a in &amps {
                next.push(*a * s[0] / n);
                next.push(*a * s[1] / n);
            }
            amps = next;
        }
        Self::from_amplitudes(amps)
    }

    /// `|+>^{n}`.
    pub fn plus(nqubits: usize) -> Result<Self> {
        let r = Complex64::new(std::f64::consts::FRAC_1_SQRT_2, 0.0);
        Self::product(&vec![[r, r]; nqubits])
    }

    pub(crate) fn from_raw(nqubits: usize, amps: CVector) -> Self {
        StateVector { nqubits, amps }
    }

    pub fn nqubits(&self) -> usize {
        self.nqubits
    }

    pub fn dim(&self) -> usize {
        self.amps.len()
    }

    pub fn amplitudes(&self) -> &CVector {
        &self.amps
    }

    pub fn norm(&self) -> f64 {
        self.amps.norm()
    }

    /// `|<self|other>|^2`; global phase never matters.
    pub fn fidelity(&self, other: &StateVector) -> f64 {
        self.amps.dotc(&other.amps).norm_sqr()
    }

    pub fn probabilities(&self) -> Vec<f64> {
        self.amps.iter().map(|a| a.norm_sqr()).collect()
    }

    /// Applies a `2^k x 2^k` unitary to the listed sites; `sites[0]` is the
    /// most significant bit of the gate's local index.
    pub fn apply_gate(&self, u: &CMatrix, sites: &[usize]) -> Result<StateVector> {
        let mut out = self.clone();
        out.apply_gate_mut(u, sites)?;
        Ok(out)
    }

    pub fn apply_gate_mut(&mut self, u: &CMatrix, sites: &[usize]) -> Result<()> {
        check_gate(u, sites, self.nqubits)?;
        apply_local(self.amps.as_mut_slice(), self.nqubits, u, sites);
        Ok(())
    }

    /// Applies a full-register matrix.
    pub fn apply_matrix(&self, u: &CMatrix) -> Result<StateVector> {
        if u.ncols() != self.dim() {
            return Err(Error::DimensionMismatch {
                expected: self.dim(),
                found: u.ncols(),
            });
        }
        Ok(StateVector {
            nqubits: self.nqubits,
            amps: u * &self.amps,
        })
    }

    /// `O |psi>` for a Pauli sum, without materialising `O`.
    pub fn apply_pauli_sum(&self, op: &PauliSum) -> Result<CVector> {
        if op.nqubits() != self.nqubits {
            return Err(Error::DimensionMismatch {
                expected: self.nqubits,
                found: op.nqubits(),
            });
        }
        let mut out = vec![Complex64::new(0.0, 0.0); self.dim()];
        op.apply_add(self.amps.as_slice(), &mut out);
        Ok(CVector::from_vec(out))
    }

    /// Rescales to unit norm (used after long products to shed round-off).
    pub fn renormalize(&mut self) {
        let n = self.amps.norm();
        if n > 0.0 {
            self.amps /= Complex64::new(n, 0.0);
        }
    }
}

pub(crate) fn check_gate(u: &CMatrix, sites: &[usize], nqubits: usize) -> Result<()> {
    let k = sites.len();
    let dim = 1usize << k;
    if u.nrows() != dim || u.ncols() != dim {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: u.nrows(),
        });
    }
    for (i, &s) in sites.iter().enumerate() {
        if s >= nqubits {
            return Err(Error::SiteOutOfRange { site: s, nqubits });
        }
        if sites[..i].contains(&s) {
            return Err(Error::RepeatedSite(s));
        }
    }
    let dev = unitarity_deviation(u);
    if dev > UNITARY_TOL {
        return Err(Error::NotUnitary { deviation: dev });
    }
    Ok(())
}

/// In-place local gate application on a strided amplitude buffer. The caller
/// has validated `u` and `sites`.
pub(crate) fn apply_local(amps: &mut [Complex64], nqubits: usize, u: &CMatrix, sites: &[usize]) {
    let k = sites.len();
    let local = 1usize << k;
    let bits: Vec<usize> = sites.iter().map(|&s| 1usize << (nqubits - 1 - s)).collect();
    let target_mask: usize = bits.iter().sum();
    // offsets[j] is the global bit pattern of local index j
    let offsets: Vec<usize> = (0..local)
        .map(|j| {
            (0..k)
                .filter(|&q| j & (1 << (k - 1 - q)) != 0)
                .map(|q| bits[q])
                .sum()
        })
        .collect();
    let mut buf = vec![Complex64::new(0.0, 0.0); local];
    for base in 0..amps.len() {
        if base & target_mask != 0 {
            continue;
        }
        for (j, off) in offsets.iter().enumerate() {
            buf[j] = amps[base | off];
        }
        for (r, off) in offsets.iter().enumerate() {
            let mut acc = Complex64::new(0.0, 0.0);
            for (cidx, b) in buf.iter().enumerate() {
                acc += u[(r, cidx)] * b;
            }
            amps[base | off] = acc;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::gates;
    use crate::qsim::Pauli;
    use std::f64::consts::{FRAC_1_SQRT_2, FRAC_PI_2};

    fn c(re: f64, im: f64) -> Complex64 {
        Complex64::new(re, im)
    }

    #[test]
    fn rx_half_pi_on_zero() {
        let psi = StateVector::basis(1, 0).unwrap();
        let out = psi.apply_gate(&gates::rx(FRAC_PI_2), &[0]).unwrap();
        let expected =
            StateVector::from_amplitudes(vec![c(FRAC_1_SQRT_2, 0.0), c(0.0, -FRAC_1_SQRT_2)]).unwrap();
        assert!((out.amplitudes() - expected.amplitudes()).norm() < 1e-15);
    }

    #[test]
    fn rz_adds_relative_phase() {
        let phi = 0.77;
        let psi = StateVector::plus(1).unwrap();
        let out = psi.apply_gate(&gates::rz(phi), &[0]).unwrap();
        let expected = StateVector::from_amplitudes(vec![c(1.0, 0.0), Complex64::from_polar(1.0, phi)]).unwrap();
        assert!((out.fidelity(&expected) - 1.0).abs() < 1e-14);
    }

    #[test]
    fn x_twice_is_identity() {
        let psi = StateVector::from_amplitudes(vec![c(0.6, 0.1), c(-0.2, 0.7)]).unwrap();
        let x = gates::pauli(Pauli::X);
        let out = psi.apply_gate(&x, &[0]).unwrap().apply_gate(&x, &[0]).unwrap();
        assert!((out.amplitudes() - psi.amplitudes()).norm() < 1e-15);
    }

    #[test]
    fn rejects_non_unitary_and_repeats() {
        let psi = StateVector::basis(2, 0).unwrap();
        let bad = CMatrix::from_element(2, 2, c(1.0, 0.0));
        assert!(matches!(psi.apply_gate(&bad, &[0]), Err(Error::NotUnitary { .. })));
        let cnot_like = CMatrix::identity(4, 4);
        assert!(matches!(psi.apply_gate(&cnot_like, &[1, 1]), Err(Error::RepeatedSite(1))));
        assert!(matches!(
            psi.apply_gate(&gates::rx(0.1), &[2]),
            Err(Error::SiteOutOfRange { .. })
        ));
    }

    #[test]
    fn two_site_gate_order_follows_site_list() {
        // SWAP-free check: X (x) I on sites [1, 0] acts on site 1
        let mut xi = CMatrix::zeros(4, 4);
        xi[(2, 0)] = c(1.0, 0.0);
        xi[(3, 1)] = c(1.0, 0.0);
        xi[(0, 2)] = c(1.0, 0.0);
        xi[(1, 3)] = c(1.0, 0.0);
        let psi = StateVector::basis(2, 0).unwrap();
        let out = psi.apply_gate(&xi, &[1, 0]).unwrap();
        assert!((out.amplitudes()[1] - c(1.0, 0.0)).norm() < 1e-15);
    }
}
