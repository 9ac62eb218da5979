// Copyright 2026 The mwspin Authors
// SPDX-License-Identifier: Apache-2.0

//! Constructors for the engineered spin-model families. Every builder
//! returns a [`PauliSum`] with coefficients in rad/s.

use serde::{Deserialize, Serialize};

use super::CouplingGraph;
use crate::error::{Error, Result};
use crate::qsim::{Pauli, PauliString, PauliSum};

/// Per-site longitudinal phases in radians.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PhaseAssignment {
    pub phases: Vec<f64>,
}

impl PhaseAssignment {
    pub fn new(phases: Vec<f64>) -> Self {
        PhaseAssignment { phases }
    }

    pub fn uniform(nqubits: usize) -> Self {
        PhaseAssignment {
            phases: vec![0.0; nqubits],
        }
    }

    /// `phi_j - phi_i` for a directed edge.
    pub fn difference(&self, i: usize, j: usize) -> f64 {
        self.phases[j] - self.phases[i]
    }

    /// Sum of `phi_j - phi_i` over the graph's directed edges.
    pub fn winding(&self, g: &CouplingGraph) -> f64 {
        g.edges().iter().map(|e| self.difference(e.i, e.j)).sum()
    }
}

fn flip_flop(coeff: f64, i: usize, j: usize) -> [PauliString; 2] {
    [
        PauliString::pair(coeff, i, Pauli::X, j, Pauli::X),
        PauliString::pair(coeff, i, Pauli::Y, j, Pauli::Y),
    ]
}

fn dm(coeff: f64, i: usize, j: usize) -> [PauliString; 2] {
    [
        PauliString::pair(coeff, i, Pauli::X, j, Pauli::Y),
        PauliString::pair(-coeff, i, Pauli::Y, j, Pauli::X),
    ]
}

fn assemble(n: usize, terms: Vec<PauliString>) -> PauliSum {
    PauliSum::new(n, terms).expect("graph sites are validated").cleaned()
}

/// Native flip-flop coupling `sum (J_ij/2)(X_i X_j + Y_i Y_j)`.
pub fn build_xy(g: &CouplingGraph) -> PauliSum {
    let terms = g
        .edges()
        .iter()
        .flat_map(|e| flip_flop(e.coupling / 2.0, e.i, e.j))
        .collect();
    assemble(g.nqubits(), terms)
}

/// `R H R^dagger` for a rotation of angle `theta` about `axis` on `sites`.
pub fn conjugate_by_global_rotation(h: &PauliSum, axis: Pauli, theta: f64, sites: &[usize]) -> Result<PauliSum> {
    if axis == Pauli::Z {
        return Err(Error::InvalidConfig("global conjugation axis must be x or y".into()));
    }
    h.conjugate_by_rotation(axis, theta, sites)
}

/// `sum (J_ij/2)[cos d (XX+YY) + sin d (XY-YX)]` with `d = phi_j - phi_i`.
pub fn build_phase_rotated_xy(g: &CouplingGraph, phi: &PhaseAssignment) -> Result<PauliSum> {
    if phi.phases.len() != g.nqubits() {
        return Err(Error::DimensionMismatch {
            expected: g.nqubits(),
            found: phi.phases.len(),
        });
    }
    let mut terms = Vec::new();
    for e in g.edges() {
        let d = phi.difference(e.i, e.j);
        let half = e.coupling / 2.0;
        terms.extend(flip_flop(half * d.cos(), e.i, e.j));
        terms.extend(dm(half * d.sin(), e.i, e.j));
    }
    Ok(assemble(g.nqubits(), terms))
}

/// `sum Jx XX + Jy YY + Jz ZZ` over edges; edge strengths are ignored.
pub fn build_xyz(g: &CouplingGraph, jx: f64, jy: f64, jz: f64) -> PauliSum {
    let mut terms = Vec::new();
    for e in g.edges() {
        terms.push(PauliString::pair(jx, e.i, Pauli::X, e.j, Pauli::X));
        terms.push(PauliString::pair(jy, e.i, Pauli::Y, e.j, Pauli::Y));
        terms.push(PauliString::pair(jz, e.i, Pauli::Z, e.j, Pauli::Z));
    }
    assemble(g.nqubits(), terms)
}

/// `sum J_ij (dx XX + dy YY + dz ZZ)`: the cycle-averaged XY Hamiltonian for
/// the given weights.
pub fn build_weighted_xyz(g: &CouplingGraph, w: &super::AnisotropyWeights) -> PauliSum {
    let mut terms = Vec::new();
    for e in g.edges() {
        terms.push(PauliString::pair(e.coupling * w.dx, e.i, Pauli::X, e.j, Pauli::X));
        terms.push(PauliString::pair(e.coupling * w.dy, e.i, Pauli::Y, e.j, Pauli::Y));
        terms.push(PauliString::pair(e.coupling * w.dz, e.i, Pauli::Z, e.j, Pauli::Z));
    }
    assemble(g.nqubits(), terms)
}

/// Transverse-field Ising model `sum Jt X_i X_j + (B/2) sum Z_i`.
pub fn build_tfim(g: &CouplingGraph, jt: f64, b: f64) -> PauliSum {
    let mut terms: Vec<PauliString> = g
        .edges()
        .iter()
        .map(|e| PauliString::pair(jt, e.i, Pauli::X, e.j, Pauli::X))
        .collect();
    terms.extend((0..g.nqubits()).map(|s| PauliString::single(b / 2.0, s, Pauli::Z)));
    assemble(g.nqubits(), terms)
}

/// `sum G(XX+YY) + D(XY-YX)` over directed edges.
pub fn build_xy_dm(g: &CouplingGraph, gc: f64, d: f64) -> PauliSum {
    let mut terms = Vec::new();
    for e in g.edges() {
        terms.extend(flip_flop(gc, e.i, e.j));
        terms.extend(dm(d, e.i, e.j));
    }
    assemble(g.nqubits(), terms)
}

/// Total magnetisation `sum_i P_i`.
pub fn total_magnetization(nqubits: usize, axis: Pauli) -> PauliSum {
    let terms = (0..nqubits).map(|s| PauliString::single(1.0, s, axis)).collect();
    PauliSum::new(nqubits, terms).expect("sites in range")
}

/// First-order average `(1/T) sum tau_k H_k` with `T = sum tau_k`.
pub fn average_hamiltonian(pieces: &[(PauliSum, f64)]) -> Result<PauliSum> {
    let Some(first) = pieces.first() else {
        return Err(Error::InvalidConfig("average over an empty piece list".into()));
    };
    let n = first.0.nqubits();
    let mut total = 0.0;
    for (h, tau) in pieces {
        if h.nqubits() != n {
            return Err(Error::DimensionMismatch {
                expected: n,
                found: h.nqubits(),
            });
        }
        if !(*tau >= 0.0) {
            return Err(Error::InvalidConfig(format!("negative duration {tau}")));
        }
        total += tau;
    }
    if total <= 0.0 {
        return Err(Error::InvalidConfig("total duration must be positive".into()));
    }
    let mut acc = PauliSum::zero(n);
    for (h, tau) in pieces {
        acc = acc.add(&h.scaled(tau / total))?;
    }
    Ok(acc.cleaned())
}
