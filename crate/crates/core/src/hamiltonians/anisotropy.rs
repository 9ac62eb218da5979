// Copyright 2026 The mwspin Authors
// SPDX-License-Identifier: Apache-2.0

//! Mapping between the three evolution intervals of the XYZ cycle and the
//! resulting anisotropy weights.
//!
//! With `T = t1 + t2 + t3` the cycle-averaged Hamiltonian is
//! `J (dx XX + dy YY + dz ZZ)` where
//!
//! ```text
//! dx = (t1 + t2) / 2T    dy = (t1 + t3) / 2T    dz = (t2 + t3) / 2T
//! ```

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

const SUM_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct AnisotropyWeights {
    pub dx: f64,
    pub dy: f64,
    pub dz: f64,
}

impl AnisotropyWeights {
    /// Checks `dx + dy + dz = 1` and reachability (every weight in `[0, 1/2]`).
    pub fn new(dx: f64, dy: f64, dz: f64) -> Result<Self> {
        let w = AnisotropyWeights { dx, dy, dz };
        w.check()?;
        Ok(w)
    }

    /// XXZ weights `dx = dy = 1/(2+eta)`, `dz = eta/(2+eta)`.
    pub fn xxz(eta: f64) -> Result<Self> {
        if !eta.is_finite() || eta < 0.0 {
            return Err(Error::InvalidWeights(format!("eta must be non-negative, got {eta}")));
        }
        let d = 1.0 / (2.0 + eta);
        Self::new(d, d, eta * d)
    }

    /// `Jz / Jx`.
    pub fn eta(&self) -> f64 {
        self.dz / self.dx
    }

    pub fn check(&self) -> Result<()> {
        let sum = self.dx + self.dy + self.dz;
        if !sum.is_finite() || (sum - 1.0).abs() > SUM_TOL {
            return Err(Error::InvalidWeights(format!("weights sum to {sum}, not 1")));
        }
        for (axis, v) in [('x', self.dx), ('y', self.dy), ('z', self.dz)] {
            if v < -SUM_TOL || v > 0.5 + SUM_TOL {
                return Err(Error::Infeasible { axis, value: v });
            }
        }
        Ok(())
    }
}

pub fn tau_to_delta(t1: f64, t2: f64, t3: f64) -> Result<AnisotropyWeights> {
    if [t1, t2, t3].iter().any(|t| !t.is_finite() || *t < 0.0) {
        return Err(Error::InvalidWeights("intervals must be finite and non-negative".into()));
    }
    let total = t1 + t2 + t3;
    if total <= 0.0 {
        return Err(Error::InvalidWeights("all intervals are zero".into()));
    }
    Ok(AnisotropyWeights {
        dx: (t1 + t2) / (2.0 * total),
        dy: (t1 + t3) / (2.0 * total),
        dz: (t2 + t3) / (2.0 * total),
    })
}

/// Inverse of [`tau_to_delta`] for a cycle of resonant length `total`.
pub fn delta_to_tau(w: &AnisotropyWeights, total: f64) -> Result<(f64, f64, f64)> {
    w.check()?;
    if !(total > 0.0) {
        return Err(Error::InvalidConfig(format!("cycle length must be positive, got {total}")));
    }
    let clamp = |x: f64| if x.abs() < 1e-15 { 0.0 } else { x };
    Ok((
        clamp(total * (w.dx + w.dy - w.dz)),
        clamp(total * (w.dx + w.dz - w.dy)),
        clamp(total * (w.dy + w.dz - w.dx)),
    ))
}
