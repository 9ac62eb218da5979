// Copyright 2026 The mwspin Authors
// SPDX-License-Identifier: Apache-2.0

use std::f64::consts::FRAC_PI_2;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, MAX_QUBITS};
use crate::hamiltonians::CouplingGraph;
use crate::qsim::{gates, CMatrix};

/// Rotation axis. `Custom(phi)` is the equatorial axis `cos(phi) X + sin(phi) Y`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Axis {
    X,
    Y,
    Z,
    Custom(f64),
}

impl Axis {
    /// Equatorial angle, `None` for `Z`.
    pub fn phase(self) -> Option<f64> {
        match self {
            Axis::X => Some(0.0),
            Axis::Y => Some(FRAC_PI_2),
            Axis::Z => None,
            Axis::Custom(phi) => Some(phi),
        }
    }

    pub fn gate(self, angle: f64) -> CMatrix {
        match self {
            Axis::X => gates::rx(angle),
            Axis::Y => gates::ry(angle),
            Axis::Z => gates::rz(angle),
            Axis::Custom(phi) => gates::rotation_equatorial(phi, angle),
        }
    }
}

/// One instruction of the compiler IR. Durations are in seconds, angles and
/// phases in radians, detunings in rad/s.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Segment {
    Rotation {
        sites: Vec<usize>,
        axis: Axis,
        angle: f64,
        duration: f64,
    },
    /// Zero-duration `Rz(phase)`.
    VirtualZ { site: usize, phase: f64 },
    /// Rectangular detuning pulses of a common length; unlisted sites idle.
    PhysicalRz {
        detunings: Vec<(usize, f64)>,
        duration: f64,
    },
    ResonantEvolve { duration: f64 },
    Idle { duration: f64 },
}

impl Segment {
    pub fn rotation(sites: &[usize], axis: Axis, angle: f64, duration: f64) -> Segment {
        Segment::Rotation {
            sites: sites.to_vec(),
            axis,
            angle,
            duration,
        }
    }

    pub fn duration(&self) -> f64 {
        match self {
            Segment::Rotation { duration, .. }
            | Segment::PhysicalRz { duration, .. }
            | Segment::ResonantEvolve { duration }
            | Segment::Idle { duration } => *duration,
            Segment::VirtualZ { .. } => 0.0,
        }
    }

    pub fn is_resonant(&self) -> bool {
        matches!(self, Segment::ResonantEvolve { .. })
    }

    pub fn validate(&self, nqubits: usize) -> Result<()> {
        let bad = |m: String| Err(Error::InvalidSequence(m));
        let d = self.duration();
        if !d.is_finite() || d < 0.0 {
            return bad(format!("negative or non-finite duration {d}"));
        }
        let check_site = |s: usize| {
            if s >= nqubits {
                Err(Error::SiteOutOfRange { site: s, nqubits })
            } else {
                Ok(())
            }
        };
        match self {
            Segment::Rotation { sites, axis, angle, .. } => {
                if sites.is_empty() {
                    return bad("rotation without sites".into());
                }
                for (k, &s) in sites.iter().enumerate() {
                    check_site(s)?;
                    if sites[..k].contains(&s) {
                        return Err(Error::RepeatedSite(s));
                    }
                }
                if !angle.is_finite() || axis.phase().is_some_and(|p| !p.is_finite()) {
                    return bad("non-finite rotation parameter".into());
                }
            }
            Segment::VirtualZ { site, phase } => {
                check_site(*site)?;
                if !phase.is_finite() {
                    return bad("non-finite virtual-Z phase".into());
                }
            }
            Segment::PhysicalRz { detunings, .. } => {
                for (k, &(s, w)) in detunings.iter().enumerate() {
                    check_site(s)?;
                    if detunings[..k].iter().any(|&(o, _)| o == s) {
                        return Err(Error::RepeatedSite(s));
                    }
                    if !w.is_finite() {
                        return bad("non-finite detuning".into());
                    }
                }
            }
            Segment::ResonantEvolve { .. } | Segment::Idle { .. } => {}
        }
        Ok(())
    }
}

/// A periodic program: `segments` form one cycle, repeated `cycles` times.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Sequence {
    pub nqubits: usize,
    pub segments: Vec<Segment>,
    pub cycles: usize,
    pub graph: CouplingGraph,
}

impl Sequence {
    pub fn new(graph: CouplingGraph, segments: Vec<Segment>, cycles: usize) -> Result<Self> {
        let s = Sequence {
            nqubits: graph.nqubits(),
            segments,
            cycles,
            graph,
        };
        s.validate()?;
        Ok(s)
    }

    pub fn validate(&self) -> Result<()> {
        if self.nqubits == 0 || self.nqubits > MAX_QUBITS {
            return Err(Error::Capacity {
                requested: self.nqubits,
                max: MAX_QUBITS,
            });
        }
        if self.graph.nqubits() != self.nqubits {
            return Err(Error::InvalidSequence(format!(
                "graph has {} sites, sequence {}",
                self.graph.nqubits(),
                self.nqubits
            )));
        }
        self.graph.validate()?;
        for seg in &self.segments {
            seg.validate(self.nqubits)?;
        }
        if self.cycles > 0 && !self.segments.is_empty() && !(self.cycle_duration() > 0.0) {
            return Err(Error::InvalidSequence("cycle has zero duration".into()));
        }
        Ok(())
    }

    /// Sum of all segment durations in one cycle, gates included.
    pub fn cycle_duration(&self) -> f64 {
        self.segments.iter().map(Segment::duration).sum()
    }

    /// Resonant evolution time per cycle.
    pub fn resonant_duration(&self) -> f64 {
        self.segments
            .iter()
            .filter(|s| s.is_resonant())
            .map(Segment::duration)
            .sum()
    }

    pub fn total_duration(&self) -> f64 {
        self.cycle_duration() * self.cycles as f64
    }

    pub fn with_cycles(&self, cycles: usize) -> Sequence {
        Sequence {
            cycles,
            ..self.clone()
        }
    }

    /// One cycle holding `cycles` copies of the segment list.
    pub fn unrolled(&self) -> Sequence {
        let mut segments = Vec::with_capacity(self.segments.len() * self.cycles);
        for _ in 0..self.cycles {
            segments.extend(self.segments.iter().cloned());
        }
        Sequence {
            segments,
            cycles: 1,
            ..self.clone()
        }
    }

    /// Concatenates the unrolled programs of `self` and `other`.
    pub fn then(&self, other: &Sequence) -> Result<Sequence> {
        if other.nqubits != self.nqubits {
            return Err(Error::DimensionMismatch {
                expected: self.nqubits,
                found: other.nqubits,
            });
        }
        let mut out = self.unrolled();
        out.segments.extend(other.unrolled().segments);
        Ok(out)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn durations_and_validation() {
        let g = CouplingGraph::pair(1.0);
        let seq = Sequence::new(
            g.clone(),
            vec![
                Segment::rotation(&[0, 1], Axis::X, 1.0, 2e-8),
                Segment::VirtualZ { site: 1, phase: 0.3 },
                Segment::ResonantEvolve { duration: 1e-7 },
            ],
            3,
        )
        .unwrap();
        assert!((seq.cycle_duration() - 1.2e-7).abs() < 1e-20);
        assert!((seq.resonant_duration() - 1e-7).abs() < 1e-20);
        assert_eq!(seq.unrolled().segments.len(), 9);
        let bad = Sequence::new(g.clone(), vec![Segment::VirtualZ { site: 2, phase: 0.0 }], 1);
        assert!(matches!(bad, Err(Error::SiteOutOfRange { .. })));
        let neg = Sequence::new(g.clone(), vec![Segment::Idle { duration: -1.0 }], 1);
        assert!(neg.is_err());
        let rep = Sequence::new(g, vec![Segment::rotation(&[1, 1], Axis::Y, 1.0, 0.0)], 1);
        assert!(matches!(rep, Err(Error::RepeatedSite(1))));
    }
}
