// Copyright 2026 The mwspin Authors
// SPDX-License-Identifier: Apache-2.0

//! Phase bookkeeping for the XY+DM ring and its spiral product states.

use std::f64::consts::{PI, TAU};

use super::PhaseAssignment;
use crate::error::{Error, Result};
use crate::qsim::{gates, StateVector};

const CLOSURE_TOL: f64 = 1e-9;

/// `d = arccot(G/D)` in `(0, pi)`; `+inf` maps to the limit `0`.
pub fn gd_ratio_to_phase(g_over_d: f64) -> f64 {
    if g_over_d.is_nan() {
        return f64::NAN;
    }
    1f64.atan2(g_over_d)
}

/// Spiral winding `arctan(G/D) + pi`.
pub fn spiral_step(g_over_d: f64) -> f64 {
    g_over_d.atan() + PI
}

/// Product of Z rotations `V = prod_l exp(i angle_l Z / 2)`. Site `s`
/// carries `angle = (s+1) * step`.
#[derive(Clone, Debug, PartialEq)]
pub struct Spiral {
    step: f64,
    angles: Vec<f64>,
}

impl Spiral {
    pub fn with_step(nsites: usize, step: f64) -> Self {
        Spiral {
            step,
            angles: (1..=nsites).map(|l| l as f64 * step).collect(),
        }
    }

    pub fn step(&self) -> f64 {
        self.step
    }

    /// Per-site angles `l * step`, `l = 1..L`.
    pub fn angles(&self) -> &[f64] {
        &self.angles
    }

    pub fn inverse(&self) -> Spiral {
        Spiral {
            step: -self.step,
            angles: self.angles.iter().map(|a| -a).collect(),
        }
    }

    /// Opposite winding `V(-step)`.
    pub fn mirrored(&self) -> Spiral {
        self.inverse()
    }

    pub fn apply(&self, psi: &StateVector) -> Result<StateVector> {
        if psi.nqubits() != self.angles.len() {
            return Err(Error::DimensionMismatch {
                expected: self.angles.len(),
                found: psi.nqubits(),
            });
        }
        let mut out = psi.clone();
        for (s, &a) in self.angles.iter().enumerate() {
            // exp(i a Z/2) = Rz(-a)
            out.apply_gate_mut(&gates::rz(-a), &[s])?;
        }
        Ok(out)
    }

    pub fn apply_inverse(&self, psi: &StateVector) -> Result<StateVector> {
        self.inverse().apply(psi)
    }

    /// `V |+...+>`.
    pub fn prepare(&self) -> Result<StateVector> {
        self.apply(&StateVector::plus(self.angles.len())?)
    }
}

/// Spiral for the ratio `G/D` on `nsites` sites.
pub fn spiral_unitary(nsites: usize, g_over_d: f64) -> Result<Spiral> {
    if nsites == 0 {
        return Err(Error::InvalidConfig("spiral needs at least one site".into()));
    }
    Ok(Spiral::with_step(nsites, spiral_step(g_over_d)))
}

fn wrapped_distance(x: f64) -> f64 {
    let r = x.rem_euclid(TAU);
    r.min(TAU - r)
}

/// `phi_s = (s+1) * d` when the ring closes, i.e. `N d = 0 mod 2 pi`.
pub fn ring_phase_assignment(nsites: usize, step: f64) -> Result<PhaseAssignment> {
    if nsites < 3 {
        return Err(Error::InvalidGraph(format!("ring needs at least 3 sites, got {nsites}")));
    }
    if wrapped_distance(nsites as f64 * step) > CLOSURE_TOL {
        return Err(Error::Incommensurate { nsites, step });
    }
    Ok(PhaseAssignment::new(
        (1..=nsites).map(|l| l as f64 * step).collect(),
    ))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::hamiltonians::{build_phase_rotated_xy, build_xy_dm, CouplingGraph};
    use std::f64::consts::{FRAC_PI_2, FRAC_PI_4};

    #[test]
    fn gd_phase_examples() {
        assert!((gd_ratio_to_phase(1.0) - FRAC_PI_4).abs() < 1e-15);
        assert!((gd_ratio_to_phase(0.0) - FRAC_PI_2).abs() < 1e-15);
        assert_eq!(gd_ratio_to_phase(f64::INFINITY), 0.0);
        for x in [-3.0, -0.2, 0.4, 7.5] {
            let d = gd_ratio_to_phase(x);
            assert!(d > 0.0 && d < PI);
            assert!((1.0 / d.tan() - x).abs() < 1e-12);
        }
    }

    #[test]
    fn spiral_steps() {
        assert!((spiral_step(0.0) - PI).abs() < 1e-15);
        assert!((spiral_step(1.0) - 5.0 * FRAC_PI_4).abs() < 1e-15);
        let sp = spiral_unitary(4, 0.0).unwrap();
        assert!((sp.angles()[3] - 4.0 * PI).abs() < 1e-12);
    }

    #[test]
    fn inverse_round_trip() {
        let sp = spiral_unitary(3, 0.37).unwrap();
        let c = num_complex::Complex64::new;
        let psi = StateVector::from_amplitudes((0..8).map(|k| c(k as f64 * 0.1 + 0.2, 0.3 - 0.05 * k as f64)).collect()).unwrap();
        let back = sp.apply_inverse(&sp.apply(&psi).unwrap()).unwrap();
        assert!((back.amplitudes() - psi.amplitudes()).norm() < 1e-12);
    }

    #[test]
    fn commensurability() {
        assert!(ring_phase_assignment(8, FRAC_PI_4).is_ok());
        assert!(ring_phase_assignment(8, FRAC_PI_2).is_ok());
        assert!(matches!(ring_phase_assignment(6, FRAC_PI_4), Err(Error::Incommensurate { .. })));
        assert!(ring_phase_assignment(10, FRAC_PI_4).is_err());
    }

    #[test]
    fn ring_assignment_reproduces_uniform_dm() {
        let j = 2.0 * PI * -8e6;
        let g = CouplingGraph::ring(8, j).unwrap();
        let d = FRAC_PI_4;
        let phi = ring_phase_assignment(8, d).unwrap();
        let h = build_phase_rotated_xy(&g, &phi).unwrap();
        let direct = build_xy_dm(&g, j * d.cos() / 2.0, j * d.sin() / 2.0);
        assert!(h.max_difference(&direct) < 1e-6);
    }

    #[test]
    fn spiral_is_zero_energy_on_ring() {
        let j = 2.0 * PI * -8e6;
        let g = CouplingGraph::ring(8, j).unwrap();
        for ratio in [0.0, 1.0] {
            let d = gd_ratio_to_phase(ratio);
            let h = build_xy_dm(&g, j * d.cos() / 2.0, j * d.sin() / 2.0);
            let psi = spiral_unitary(8, ratio).unwrap().prepare().unwrap();
            let hpsi = psi.apply_pauli_sum(&h).unwrap();
            assert!(hpsi.norm() / h.coefficient_norm() < 1e-9, "G/D={ratio}: {}", hpsi.norm());
        }
    }
}
