// Copyright 2026 The mwspin Authors
// SPDX-License-Identifier: Apache-2.0

//! Single-qubit gate matrices. Rotations follow `R^n(theta) = exp(-i theta n.sigma / 2)`.

use num_complex::Complex64;

use super::{CMatrix, Pauli};

fn c(re: f64, im: f64) -> Complex64 {
    Complex64::new(re, im)
}

/// Rotation about an axis in the equatorial plane at azimuth `phi`
/// (`phi = 0` is x, `phi = pi/2` is y).
pub fn rotation_equatorial(phi: f64, theta: f64) -> CMatrix {
    let (s, co) = (theta / 2.0).sin_cos();
    let e = Complex64::from_polar(1.0, phi);
    // cos(t/2) I - i sin(t/2) (cos phi X + sin phi Y)
    CMatrix::from_row_slice(
        2,
        2,
        &[c(co, 0.0), c(0.0, -s) * e.conj(), c(0.0, -s) * e, c(co, 0.0)],
    )
}

pub fn rx(theta: f64) -> CMatrix {
    rotation_equatorial(0.0, theta)
}

pub fn ry(theta: f64) -> CMatrix {
    rotation_equatorial(std::f64::consts::FRAC_PI_2, theta)
}

pub fn rz(theta: f64) -> CMatrix {
    let h = theta / 2.0;
    CMatrix::from_row_slice(
        2,
        2,
        &[Complex64::from_polar(1.0, -h), c(0.0, 0.0), c(0.0, 0.0), Complex64::from_polar(1.0, h)],
    )
}

pub fn rotation(axis: Pauli, theta: f64) -> CMatrix {
    match axis {
        Pauli::X => rx(theta),
        Pauli::Y => ry(theta),
        Pauli::Z => rz(theta),
    }
}

pub fn pauli(p: Pauli) -> CMatrix {
    let m = p.matrix();
    CMatrix::from_row_slice(2, 2, &[m[0][0], m[0][1], m[1][0], m[1][1]])
}

pub fn hadamard() -> CMatrix {
    let r = std::f64::consts::FRAC_1_SQRT_2;
    CMatrix::from_row_slice(2, 2, &[c(r, 0.0), c(r, 0.0), c(r, 0.0), c(-r, 0.0)])
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::unitarity_deviation;

    #[test]
    fn rotations_are_unitary() {
        for &t in &[0.0, 0.3, 1.7, -2.2] {
            for m in [rx(t), ry(t), rz(t), rotation_equatorial(0.9, t)] {
                assert!(unitarity_deviation(&m) < 1e-15);
            }
        }
    }

    #[test]
    fn equatorial_matches_axes() {
        assert!((rotation_equatorial(0.0, 0.8) - rx(0.8)).norm() < 1e-15);
        let diff = rotation_equatorial(std::f64::consts::FRAC_PI_2, 0.8) - ry(0.8);
        assert!(diff.norm() < 1e-15);
    }
}
