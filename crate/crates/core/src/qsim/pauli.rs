// Copyright 2026 The mwspin Authors
// SPDX-License-Identifier: Apache-2.0

//! Weighted Pauli strings and sums.
//!
//! Every Hamiltonian in the crate is a [`PauliSum`]. Sums stay symbolic for as
//! long as possible: frame rotations and commutators act on the Pauli basis
//! directly, and only [`PauliSum::materialize`] produces a dense matrix.
//!
//! Basis convention: site 0 is the most significant bit of the computational
//! basis index, `|0>` is the `+1` eigenstate of `Z`.

use std::collections::BTreeMap;
use std::fmt;

use nalgebra::DMatrix;
use num_complex::Complex64;
use serde::{Deserialize, Serialize};

use super::CMatrix;
use crate::error::{Error, Result, MAX_QUBITS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub enum Pauli {
    X,
    Y,
    Z,
}

impl Pauli {
    pub const ALL: [Pauli; 3] = [Pauli::X, Pauli::Y, Pauli::Z];

    fn index(self) -> usize {
        match self {
            Pauli::X => 0,
            Pauli::Y => 1,
            Pauli::Z => 2,
        }
    }

    fn from_index(i: usize) -> Pauli {
        Pauli::ALL[i % 3]
    }

    /// Product `self * other` of two single-site Paulis as `(phase, result)`,
    /// with `None` standing for the identity.
    pub fn mul(self, other: Pauli) -> (Complex64, Option<Pauli>) {
        if self == other {
            return (Complex64::new(1.0, 0.0), None);
        }
        let (a, b) = (self.index(), other.index());
        let c = Pauli::from_index(3 - a - b);
        // X Y = i Z and cyclic permutations
        let cyclic = (a + 1) % 3 == b;
        let phase = if cyclic {
            Complex64::new(0.0, 1.0)
        } else {
            Complex64::new(0.0, -1.0)
        };
        (phase, Some(c))
    }

    /// `e^{-i theta axis/2} self e^{+i theta axis/2}` expanded as
    /// `cos(theta) self + sin(theta) sign * other`.
    fn rotate(self, axis: Pauli, theta: f64) -> [(f64, Pauli); 2] {
        if self == axis {
            return [(1.0, self), (0.0, self)];
        }
        let (a, f) = (axis.index(), self.index());
        let g = 3 - a - f;
        // Levi-Civita sign of (axis, self, other)
        let sign = if (a + 1) % 3 == f { 1.0 } else { -1.0 };
        [
            (theta.cos(), self),
            (sign * theta.sin(), Pauli::from_index(g)),
        ]
    }

    pub fn matrix(self) -> [[Complex64; 2]; 2] {
        let o = Complex64::new(0.0, 0.0);
        let l = Complex64::new(1.0, 0.0);
        let i = Complex64::new(0.0, 1.0);
        match self {
            Pauli::X => [[o, l], [l, o]],
            Pauli::Y => [[o, -i], [i, o]],
            Pauli::Z => [[l, o], [o, -l]],
        }
    }
}

impl fmt::Display for Pauli {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let c = match self {
            Pauli::X => 'X',
            Pauli::Y => 'Y',
            Pauli::Z => 'Z',
        };
        write!(f, "{c}")
    }
}

/// Bit masks describing how a Pauli string acts on computational basis states.
#[derive(Clone, Copy, Debug)]
pub(crate) struct PauliMasks {
    /// Bits flipped (X or Y factors).
    pub flip: usize,
    /// Bits contributing a `(-1)^bit` sign (Y or Z factors).
    pub sign: usize,
    /// `i^{number of Y factors}`.
    pub y_phase: Complex64,
}

impl PauliMasks {
    /// `P |b> = phase(b) |b ^ flip>`.
    #[inline]
    pub fn phase(&self, b: usize) -> Complex64 {
        if (b & self.sign).count_ones() % 2 == 1 {
            -self.y_phase
        } else {
            self.y_phase
        }
    }
}

/// A real-weighted tensor product of single-site Paulis.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliString {
    factors: BTreeMap<usize, Pauli>,
    pub coeff: f64,
}

impl PauliString {
    pub fn identity(coeff: f64) -> Self {
        PauliString {
            factors: BTreeMap::new(),
            coeff,
        }
    }

    /// Builds a string from `(site, axis)` pairs.
    pub fn new(coeff: f64, factors: &[(usize, Pauli)]) -> Result<Self> {
        let mut map = BTreeMap::new();
        for &(site, p) in factors {
            if map.insert(site, p).is_some() {
                return Err(Error::RepeatedSite(site));
            }
        }
        Ok(PauliString {
            factors: map,
            coeff,
        })
    }

    pub(crate) fn from_map(coeff: f64, factors: BTreeMap<usize, Pauli>) -> Self {
        PauliString { factors, coeff }
    }

    pub fn single(coeff: f64, site: usize, p: Pauli) -> Self {
        let mut factors = BTreeMap::new();
        factors.insert(site, p);
        PauliString { factors, coeff }
    }

    pub fn pair(coeff: f64, i: usize, pi: Pauli, j: usize, pj: Pauli) -> Self {
        assert_ne!(i, j, "two-site Pauli string needs distinct sites");
        let mut factors = BTreeMap::new();
        factors.insert(i, pi);
        factors.insert(j, pj);
        PauliString { factors, coeff }
    }

    pub fn factors(&self) -> &BTreeMap<usize, Pauli> {
        &self.factors
    }

    pub fn is_identity(&self) -> bool {
        self.factors.is_empty()
    }

    pub fn max_site(&self) -> Option<usize> {
        self.factors.keys().next_back().copied()
    }

    pub(crate) fn masks(&self, nqubits: usize) -> PauliMasks {
        let mut flip = 0usize;
        let mut sign = 0usize;
        let mut ny = 0u32;
        for (&site, &p) in &self.factors {
            let bit = 1usize << (nqubits - 1 - site);
            match p {
                Pauli::X => flip |= bit,
                Pauli::Y => {
                    flip |= bit;
                    sign |= bit;
                    ny += 1;
                }
                Pauli::Z => sign |= bit,
            }
        }
        let y_phase = Complex64::new(0.0, 1.0).powu(ny);
        PauliMasks {
            flip,
            sign,
            y_phase,
        }
    }

    /// Operator product of the two strings (coefficients multiplied).
    pub fn mul(&self, other: &PauliString) -> (Complex64, PauliString) {
        let mut phase = Complex64::new(self.coeff * other.coeff, 0.0);
        let mut factors = self.factors.clone();
        for (&site, &q) in &other.factors {
            match factors.get(&site).copied() {
                None => {
                    factors.insert(site, q);
                }
                Some(p) => {
                    let (ph, r) = p.mul(q);
                    phase *= ph;
                    match r {
                        Some(r) => {
                            factors.insert(site, r);
                        }
                        None => {
                            factors.remove(&site);
                        }
                    }
                }
            }
        }
        (phase, PauliString { factors, coeff: 1.0 })
    }

    /// True when the two strings anticommute.
    pub fn anticommutes(&self, other: &PauliString) -> bool {
        let mut n = 0;
        for (site, p) in &self.factors {
            if let Some(q) = other.factors.get(site) {
                if p != q {
                    n += 1;
                }
            }
        }
        n % 2 == 1
    }

    fn key(&self) -> Vec<(usize, Pauli)> {
        self.factors.iter().map(|(&s, &p)| (s, p)).collect()
    }
}

impl fmt::Display for PauliString {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:+e}", self.coeff)?;
        if self.factors.is_empty() {
            return write!(f, " I");
        }
        for (s, p) in &self.factors {
            write!(f, " {p}{s}")?;
        }
        Ok(())
    }
}

/// A Hermitian operator on `nqubits` sites as a sum of real-weighted strings.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct PauliSum {
    nqubits: usize,
    terms: Vec<PauliString>,
}

impl PauliSum {
    pub fn zero(nqubits: usize) -> Self {
        PauliSum {
            nqubits,
            terms: Vec::new(),
        }
    }

    pub fn new(nqubits: usize, terms: Vec<PauliString>) -> Result<Self> {
        if nqubits == 0 {
            return Err(Error::InvalidConfig("register needs at least one qubit".into()));
        }
        for t in &terms {
            if let Some(s) = t.max_site() {
                if s >= nqubits {
                    return Err(Error::SiteOutOfRange { site: s, nqubits });
                }
            }
        }
        Ok(PauliSum { nqubits, terms })
    }

    pub fn nqubits(&self) -> usize {
        self.nqubits
    }

    pub fn terms(&self) -> &[PauliString] {
        &self.terms
    }

    pub fn len(&self) -> usize {
        self.terms.len()
    }

    pub fn is_empty(&self) -> bool {
        self.terms.is_empty()
    }

    pub fn push(&mut self, term: PauliString) -> Result<()> {
        if let Some(s) = term.max_site() {
            if s >= self.nqubits {
                return Err(Error::SiteOutOfRange {
                    site: s,
                    nqubits: self.nqubits,
                });
            }
        }
        self.terms.push(term);
        Ok(())
    }

    /// Sum of absolute coefficients, an upper bound on the spectral radius.
    pub fn coefficient_norm(&self) -> f64 {
        self.terms.iter().map(|t| t.coeff.abs()).sum()
    }

    pub fn scaled(&self, s: f64) -> PauliSum {
        PauliSum {
            nqubits: self.nqubits,
            terms: self
                .terms
                .iter()
                .map(|t| PauliString {
                    factors: t.factors.clone(),
                    coeff: t.coeff * s,
                })
                .collect(),
        }
    }

    pub fn add(&self, other: &PauliSum) -> Result<PauliSum> {
        if self.nqubits != other.nqubits {
            return Err(Error::DimensionMismatch {
                expected: self.nqubits,
                found: other.nqubits,
            });
        }
        let mut terms = self.terms.clone();
        terms.extend(other.terms.iter().cloned());
        Ok(PauliSum {
            nqubits: self.nqubits,
            terms,
        })
    }

    /// Merges like strings and drops those whose weight is below `tol`.
    pub fn simplified(&self, tol: f64) -> PauliSum {
        let mut merged: BTreeMap<Vec<(usize, Pauli)>, f64> = BTreeMap::new();
        for t in &self.terms {
            *merged.entry(t.key()).or_insert(0.0) += t.coeff;
        }
        let terms = merged
            .into_iter()
            .filter(|(_, c)| c.abs() > tol)
            .map(|(k, c)| PauliString {
                factors: k.into_iter().collect(),
                coeff: c,
            })
            .collect();
        PauliSum {
            nqubits: self.nqubits,
            terms,
        }
    }

    /// Coefficient of the string with the given factors after merging.
    pub fn coefficient_of(&self, factors: &[(usize, Pauli)]) -> f64 {
        let mut key: Vec<(usize, Pauli)> = factors.to_vec();
        key.sort();
        self.terms
            .iter()
            .filter(|t| t.key() == key)
            .map(|t| t.coeff)
            .sum()
    }

    /// Largest coefficient difference between two sums after merging.
    pub fn max_difference(&self, other: &PauliSum) -> f64 {
        let diff = match self.add(&other.scaled(-1.0)) {
            Ok(d) => d.simplified(0.0),
            Err(_) => return f64::INFINITY,
        };
        diff.terms.iter().map(|t| t.coeff.abs()).fold(0.0, f64::max)
    }

    /// `R H R^dagger` with `R = prod_s exp(-i theta axis_s / 2)` over `sites`,
    /// evaluated in the Pauli basis.
    pub fn conjugate_by_rotation(&self, axis: Pauli, theta: f64, sites: &[usize]) -> Result<PauliSum> {
        let angles: Vec<(usize, f64)> = sites.iter().map(|&s| (s, theta)).collect();
        self.conjugate_by_local_rotations(axis, &angles)
    }

    /// Like [`conjugate_by_rotation`](Self::conjugate_by_rotation) with a
    /// separate angle per site.
    pub fn conjugate_by_local_rotations(&self, axis: Pauli, angles: &[(usize, f64)]) -> Result<PauliSum> {
        let mut per_site = BTreeMap::new();
        for &(s, a) in angles {
            if s >= self.nqubits {
                return Err(Error::SiteOutOfRange {
                    site: s,
                    nqubits: self.nqubits,
                });
            }
            if per_site.insert(s, a).is_some() {
                return Err(Error::RepeatedSite(s));
            }
        }
        let mut out = Vec::new();
        for t in &self.terms {
            let mut partial = vec![PauliString::from_map(t.coeff, BTreeMap::new())];
            for (&site, &p) in &t.factors {
                let theta = per_site.get(&site).copied().unwrap_or(0.0);
                let expansion = if theta == 0.0 {
                    [(1.0, p), (0.0, p)]
                } else {
                    p.rotate(axis, theta)
                };
                let mut next = Vec::with_capacity(partial.len() * 2);
                for ps in &partial {
                    for &(w, q) in &expansion {
                        if w == 0.0 {
                            continue;
                        }
                        let mut f = ps.factors.clone();
                        f.insert(site, q);
                        next.push(PauliString::from_map(ps.coeff * w, f));
                    }
                }
                partial = next;
            }
            out.extend(partial);
        }
        Ok(PauliSum {
            nqubits: self.nqubits,
            terms: out,
        }
        .cleaned())
    }

    /// Merges like strings and drops round-off below `1e-14` of the largest
    /// weight.
    pub fn cleaned(&self) -> PauliSum {
        let merged = self.simplified(0.0);
        let scale = merged.terms.iter().map(|t| t.coeff.abs()).fold(0.0, f64::max);
        merged.simplified(1e-14 * scale)
    }

    /// Symbolic commutator. Returns `C` with `[self, other] = i C`; `C` is
    /// Hermitian whenever both inputs are.
    pub fn commutator_over_i(&self, other: &PauliSum) -> Result<PauliSum> {
        if self.nqubits != other.nqubits {
            return Err(Error::DimensionMismatch {
                expected: self.nqubits,
                found: other.nqubits,
            });
        }
        let mut terms = Vec::new();
        for a in &self.terms {
            for b in &other.terms {
                if !a.anticommutes(b) {
                    continue;
                }
                // [a, b] = 2ab; ab carries a phase of +-i
                let (phase, s) = a.mul(b);
                let c = 2.0 * phase / Complex64::new(0.0, 1.0);
                debug_assert!(c.im.abs() < 1e-12 * c.norm().max(1.0));
                terms.push(PauliString::from_map(c.re, s.factors));
            }
        }
        Ok(PauliSum {
            nqubits: self.nqubits,
            terms,
        }
        .cleaned())
    }

    /// Dense `2^n x 2^n` matrix of the sum.
    pub fn materialize(&self) -> Result<CMatrix> {
        check_capacity(self.nqubits)?;
        let dim = 1usize << self.nqubits;
        let mut m = DMatrix::<Complex64>::zeros(dim, dim);
        for t in &self.terms {
            let masks = t.masks(self.nqubits);
            for b in 0..dim {
                m[(b ^ masks.flip, b)] += masks.phase(b) * t.coeff;
            }
        }
        Ok(m)
    }

    /// `out += self |psi>` without building the matrix.
    pub(crate) fn apply_add(&self, psi: &[Complex64], out: &mut [Complex64]) {
        for t in &self.terms {
            let masks = t.masks(self.nqubits);
            for (b, &a) in psi.iter().enumerate() {
                if a == Complex64::new(0.0, 0.0) {
                    continue;
                }
                out[b ^ masks.flip] += masks.phase(b) * t.coeff * a;
            }
        }
    }
}

impl fmt::Display for PauliSum {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        if self.terms.is_empty() {
            return write!(f, "0");
        }
        for (k, t) in self.terms.iter().enumerate() {
            if k > 0 {
                write!(f, " ")?;
            }
            write!(f, "{t}")?;
        }
        Ok(())
    }
}

pub(crate) fn check_capacity(nqubits: usize) -> Result<()> {
    if nqubits > MAX_QUBITS {
        return Err(Error::Capacity {
            requested: nqubits,
            max: MAX_QUBITS,
        });
    }
    Ok(())
}

/// Free-function form of [`PauliSum::materialize`].
pub fn materialize(ps: &PauliSum) -> Result<CMatrix> {
    ps.materialize()
}
