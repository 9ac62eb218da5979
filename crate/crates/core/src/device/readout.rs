// Copyright 2026 The mwspin Authors
// SPDX-License-Identifier: Apache-2.0

use serde::{Deserialize, Serialize};

use super::DeviceParams;
use crate::error::{Error, Result};

/// Independent per-qubit assignment errors. `confusion[q][true][measured]`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ReadoutModel {
    confusion: Vec<[[f64; 2]; 2]>,
}

impl ReadoutModel {
    pub fn ideal(nqubits: usize) -> Self {
        ReadoutModel {
            confusion: vec![[[1.0, 0.0], [0.0, 1.0]]; nqubits],
        }
    }

    pub fn from_fidelities(fidelities: &[(f64, f64)]) -> Result<Self> {
        let mut confusion = Vec::with_capacity(fidelities.len());
        for (q, &(fg, fe)) in fidelities.iter().enumerate() {
            if !(0.0..=1.0).contains(&fg) || !(0.0..=1.0).contains(&fe) {
                return Err(Error::InvalidDevice(format!("qubit {q}: readout fidelities must lie in [0, 1]")));
            }
            confusion.push([[fg, 1.0 - fg], [1.0 - fe, fe]]);
        }
        Ok(ReadoutModel { confusion })
    }

    pub fn from_device(dev: &DeviceParams) -> Self {
        let f: Vec<(f64, f64)> = dev.qubits.iter().map(|q| (q.fg, q.fe)).collect();
        Self::from_fidelities(&f).expect("validated device")
    }

    pub fn nqubits(&self) -> usize {
        self.confusion.len()
    }

    pub fn confusion(&self, site: usize) -> [[f64; 2]; 2] {
        self.confusion[site]
    }

    pub fn is_ideal(&self) -> bool {
        self.confusion.iter().all(|c| c[0][0] == 1.0 && c[1][1] == 1.0)
    }

    fn check(&self, probs: &[f64]) -> Result<()> {
        if probs.len() != 1usize << self.nqubits() {
            return Err(Error::DimensionMismatch {
                expected: 1usize << self.nqubits(),
                found: probs.len(),
            });
        }
        Ok(())
    }

    /// Applies a 2x2 map per site, `out[.. m ..] = sum_t m[t][m] p[.. t ..]`.
    fn transform(&self, probs: &[f64], maps: &[[[f64; 2]; 2]]) -> Vec<f64> {
        let n = self.nqubits();
        let mut p = probs.to_vec();
        for (site, m) in maps.iter().enumerate() {
            let bit = 1usize << (n - 1 - site);
            for b in 0..p.len() {
                if b & bit == 0 {
                    let (p0, p1) = (p[b], p[b | bit]);
                    p[b] = m[0][0] * p0 + m[1][0] * p1;
                    p[b | bit] = m[0][1] * p0 + m[1][1] * p1;
                }
            }
        }
        p
    }

    /// Distribution of recorded outcomes given the true one.
    pub fn apply(&self, probs: &[f64]) -> Result<Vec<f64>> {
        self.check(probs)?;
        Ok(self.transform(probs, &self.confusion))
    }

    /// Inverts [`apply`](Self::apply). Fails when some qubit has
    /// `F_g + F_e = 1`, i.e. carries no information.
    pub fn mitigate(&self, probs: &[f64]) -> Result<Vec<f64>> {
        self.check(probs)?;
        let mut inverse = Vec::with_capacity(self.nqubits());
        for (q, c) in self.confusion.iter().enumerate() {
            let det = c[0][0] * c[1][1] - c[0][1] * c[1][0];
            if det.abs() < 1e-12 {
                return Err(Error::InvalidDevice(format!("qubit {q}: readout is uninformative")));
            }
            inverse.push([[c[1][1] / det, -c[0][1] / det], [-c[1][0] / det, c[0][0] / det]]);
        }
        Ok(self.transform(probs, &inverse))
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn rows_are_distributions() {
        let m = ReadoutModel::from_fidelities(&[(0.97, 0.92), (0.9, 0.85)]).unwrap();
        for q in 0..2 {
            for row in m.confusion(q) {
                assert!((row.iter().sum::<f64>() - 1.0).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn excited_state_misread() {
        let m = ReadoutModel::from_fidelities(&[(0.97, 0.9)]).unwrap();
        let p = m.apply(&[0.0, 1.0]).unwrap();
        assert!((p[0] - 0.1).abs() < 1e-15 && (p[1] - 0.9).abs() < 1e-15);
    }

    #[test]
    fn mitigation_round_trip() {
        let m = ReadoutModel::from_fidelities(&[(0.97, 0.92), (0.9, 0.85), (0.99, 0.95)]).unwrap();
        let p = [0.1, 0.05, 0.2, 0.15, 0.0, 0.3, 0.12, 0.08];
        let back = m.mitigate(&m.apply(&p).unwrap()).unwrap();
        for (a, b) in p.iter().zip(&back) {
            assert!((a - b).abs() < 1e-12);
        }
        assert!(ReadoutModel::from_fidelities(&[(0.5, 0.5)]).unwrap().mitigate(&[0.5, 0.5]).is_err());
    }
}
