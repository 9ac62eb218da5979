// Copyright 2026 The mwspin Authors
// SPDX-License-Identifier: Apache-2.0

//! Fixed-step RK4 integration of the Lindblad master equation
//!
//! ```text
//! d rho/dt = -i [H, rho] + sum_k ( L_k rho L_k^dagger - 1/2 {L_k^dagger L_k, rho} )
//! ```
//!
//! with relaxation `L = sqrt(1/T1) |0><1|` and pure dephasing
//! `L = sqrt(gamma_phi / 2) Z`, so that coherences decay at `gamma_phi`.
//! The Hamiltonian and the collapse operators are applied term by term in
//! `O(4^n)` work; nothing is materialised.

use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::{CMatrix, DensityMatrix, PauliSum, Propagator};
use crate::error::{Error, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ChannelKind {
    Relaxation,
    Dephasing,
}

/// A single-site decay channel. `rate` is in 1/s: `1/T1` for relaxation and
/// the pure dephasing rate `gamma_phi` for dephasing.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct CollapseChannel {
    pub kind: ChannelKind,
    pub site: usize,
    pub rate: f64,
}

impl CollapseChannel {
    pub fn relaxation(site: usize, t1: f64) -> Self {
        CollapseChannel {
            kind: ChannelKind::Relaxation,
            site,
            rate: if t1.is_finite() && t1 > 0.0 { 1.0 / t1 } else { 0.0 },
        }
    }

    pub fn dephasing(site: usize, rate: f64) -> Self {
        CollapseChannel {
            kind: ChannelKind::Dephasing,
            site,
            rate,
        }
    }

    /// Relaxation plus pure dephasing with `gamma_phi = 1/T2* - 1/(2 T1)`,
    /// clamped at zero.
    pub fn from_coherence(site: usize, t1: f64, t2_star: f64) -> Vec<CollapseChannel> {
        let relax = CollapseChannel::relaxation(site, t1);
        let gamma_phi = (1.0 / t2_star - relax.rate / 2.0).max(0.0);
        let mut out = vec![relax];
        if gamma_phi > 0.0 {
            out.push(CollapseChannel::dephasing(site, gamma_phi));
        }
        out
    }
}

/// Largest step allowed for evolving over `t`:
/// `min(t/10, 1/(50 max|E|), min(1/rate)/50)`.
pub fn lindblad_step_bound(h: &PauliSum, channels: &[CollapseChannel], t: f64) -> Result<f64> {
    let radius = if h.is_empty() {
        0.0
    } else {
        let m = h.materialize()?;
        m.symmetric_eigenvalues().iter().fold(0.0f64, |a, e| a.max(e.abs()))
    };
    Ok(step_bound(radius, channels, t))
}

fn step_bound(radius: f64, channels: &[CollapseChannel], t: f64) -> f64 {
    let mut bound = t.abs() / 10.0;
    if radius > 0.0 {
        bound = bound.min(1.0 / (50.0 * radius));
    }
    let max_rate = channels.iter().fold(0.0f64, |a, c| a.max(c.rate));
    if max_rate > 0.0 {
        bound = bound.min(1.0 / max_rate / 50.0);
    }
    bound
}

struct Generator<'a> {
    nqubits: usize,
    h: &'a PauliSum,
    channels: &'a [CollapseChannel],
}

impl Generator<'_> {
    fn rhs(&self, rho: &CMatrix) -> CMatrix {
        let n = self.nqubits;
        let dim = rho.nrows();
        let mut out = CMatrix::zeros(dim, dim);
        let mi = Complex64::new(0.0, -1.0);
        for t in self.h.terms() {
            let masks = t.masks(n);
            let coeff = mi * t.coeff;
            // (P rho)[b^f, c] = phase(b) rho[b, c];  (rho P)[r, c] = rho[r, c^f] phase(c^f)
            for c in 0..dim {
                for b in 0..dim {
                    let v = rho[(b, c)];
                    out[(b ^ masks.flip, c)] += coeff * masks.phase(b) * v;
                }
            }
            for c in 0..dim {
                let src = c ^ masks.flip;
                let ph = masks.phase(src);
                for r in 0..dim {
                    out[(r, c)] -= coeff * rho[(r, src)] * ph;
                }
            }
        }
        for ch in self.channels {
            if ch.rate == 0.0 {
                continue;
            }
            let bit = 1usize << (n - 1 - ch.site);
            match ch.kind {
                ChannelKind::Relaxation => {
                    let g = ch.rate;
                    for c in 0..dim {
                        for r in 0..dim {
                            let (br, bc) = (r & bit != 0, c & bit != 0);
                            let mut d = -0.5 * g * ((br as u8 + bc as u8) as f64) * rho[(r, c)];
                            if !br && !bc {
                                d += rho[(r | bit, c | bit)] * g;
                            }
                            out[(r, c)] += d;
                        }
                    }
                }
                ChannelKind::Dephasing => {
                    // (gamma/2)(Z rho Z - rho) kills coherences between bit values at rate gamma
                    let g = ch.rate;
                    for c in 0..dim {
                        for r in 0..dim {
                            if (r ^ c) & bit != 0 {
                                out[(r, c)] -= rho[(r, c)] * g;
                            }
                        }
                    }
                }
            }
        }
        out
    }
}

/// Integrates the master equation over `t` with steps no longer than `dt`.
pub fn evolve_lindblad(
    h: &PauliSum,
    channels: &[CollapseChannel],
    rho: &DensityMatrix,
    t: f64,
    dt: f64,
) -> Result<DensityMatrix> {
    let n = rho.nqubits();
    if h.nqubits() != n {
        return Err(Error::DimensionMismatch {
            expected: rho.dim(),
            found: 1usize << h.nqubits(),
        });
    }
    for ch in channels {
        if ch.site >= n {
            return Err(Error::SiteOutOfRange { site: ch.site, nqubits: n });
        }
        if !(ch.rate >= 0.0) {
            return Err(Error::InvalidConfig(format!("negative decay rate {}", ch.rate)));
        }
    }
    if t == 0.0 {
        return Ok(rho.clone());
    }
    let radius = if h.is_empty() {
        0.0
    } else {
        Propagator::new(h)?.spectral_radius()
    };
    let bound = step_bound(radius, channels, t);
    if !(dt > 0.0) || dt > bound * (1.0 + 1e-12) {
        return Err(Error::StepTooLarge { dt, bound });
    }
    let steps = (t.abs() / dt).ceil().max(1.0) as usize;
    let h_step = t / steps as f64;
    let generator = Generator {
        nqubits: n,
        h,
        channels,
    };
    let mut state = rho.clone();
    let half = Complex64::new(h_step / 2.0, 0.0);
    let full = Complex64::new(h_step, 0.0);
    let sixth = Complex64::new(h_step / 6.0, 0.0);
    let two = Complex64::new(2.0, 0.0);
    for _ in 0..steps {
        let r = state.matrix();
        let k1 = generator.rhs(r);
        let k2 = generator.rhs(&(r + &k1 * half));
        let k3 = generator.rhs(&(r + &k2 * half));
        let k4 = generator.rhs(&(r + &k3 * full));
        let next = r + (k1 + k2 * two + k3 * two + k4) * sixth;
        *state.matrix_mut() = next;
        state.symmetrize();
    }
    let min = state.min_eigenvalue();
    if min < -1e-6 {
        return Err(Error::Unstable(min));
    }
    Ok(state)
}

/// Same as [`evolve_lindblad`] with the largest admissible step.
pub fn evolve_lindblad_auto(
    h: &PauliSum,
    channels: &[CollapseChannel],
    rho: &DensityMatrix,
    t: f64,
) -> Result<DensityMatrix> {
    if t == 0.0 {
        return Ok(rho.clone());
    }
    let dt = lindblad_step_bound(h, channels, t)?;
    evolve_lindblad(h, channels, rho, t, dt)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::qsim::{Pauli, PauliString, StateVector};

    #[test]
    fn amplitude_damping_closed_form() {
        let t1 = 10e-6;
        let h = PauliSum::zero(1);
        let ch = [CollapseChannel::relaxation(0, t1)];
        let rho = DensityMatrix::from_pure(&StateVector::basis(1, 1).unwrap());
        let out = evolve_lindblad(&h, &ch, &rho, t1, t1 / 50.0).unwrap();
        let p1 = out.probabilities()[1];
        assert!((p1 - (-1.0f64).exp()).abs() < 1e-4, "{p1}");
    }

    #[test]
    fn pure_dephasing_closed_form() {
        let t2 = 1.5e-6;
        let h = PauliSum::zero(1);
        let ch = [CollapseChannel::dephasing(0, 1.0 / t2)];
        let rho = DensityMatrix::from_pure(&StateVector::plus(1).unwrap());
        let out = evolve_lindblad(&h, &ch, &rho, t2, t2 / 50.0).unwrap();
        let x = PauliSum::new(1, vec![PauliString::single(1.0, 0, Pauli::X)]).unwrap();
        let ex = out.trace_with(&x).re;
        assert!((ex - (-1.0f64).exp()).abs() < 1e-4, "{ex}");
    }

    #[test]
    fn rejects_oversized_step() {
        let h = PauliSum::zero(1);
        let rho = DensityMatrix::from_pure(&StateVector::plus(1).unwrap());
        let err = evolve_lindblad(&h, &[], &rho, 1.0, 0.5).unwrap_err();
        assert!(matches!(err, Error::StepTooLarge { .. }));
    }

    #[test]
    fn dephasing_rate_clamped() {
        // T2* > 2 T1 leaves no room for pure dephasing
        let chans = CollapseChannel::from_coherence(0, 1e-6, 5e-6);
        assert_eq!(chans.len(), 1);
        assert_eq!(chans[0].kind, ChannelKind::Relaxation);
    }
}
