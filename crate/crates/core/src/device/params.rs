// Copyright 2026 The mwspin Authors
// SPDX-License-Identifier: Apache-2.0

//! Device description: per-qubit frequencies, coherence and readout figures,
//! couplings, and drive settings. Frequencies are stored in rad/s and times
//! in seconds; the file format uses GHz, MHz, microseconds and nanoseconds.

use std::collections::BTreeMap;
use std::f64::consts::TAU;
use std::fmt;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, MAX_QUBITS};
use crate::hamiltonians::{CouplingGraph, Edge, Topology};

/// Bundled eight-qubit ring.
pub const RING8: &str = include_str!("../../data/ring8.toml");
/// Bundled two-qubit pair.
pub const XYZ_PAIR: &str = include_str!("../../data/xyz_pair.toml");

const GHZ: f64 = TAU * 1e9;
const MHZ: f64 = TAU * 1e6;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct QubitParams {
    pub omega_idle: f64,
    pub omega_work: f64,
    pub omega_max: Option<f64>,
    /// Stored for completeness; the two-level model never uses it.
    pub anharmonicity: Option<f64>,
    pub t1: f64,
    pub t2_star: f64,
    pub fg: f64,
    pub fe: f64,
    /// rad/s per unit of Z-pulse amplitude.
    pub alpha_flux: f64,
    pub work_above_idle: bool,
}

impl QubitParams {
    /// `omega_idle - omega_work`.
    pub fn frame_detuning(&self) -> f64 {
        self.omega_idle - self.omega_work
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DeviceParams {
    pub name: String,
    pub qubits: Vec<QubitParams>,
    pub edges: Vec<Edge>,
    pub topology: Option<Topology>,
    /// Drive Rabi rate in rad/s.
    pub drive_rabi: f64,
    pub default_shots: u64,
    /// Longest allowed compensation block, seconds.
    pub compensation_cap: f64,
    /// Shortest compensation block, seconds; bounds the Rz detuning.
    pub compensation_min: f64,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawFile {
    #[serde(default)]
    device: RawDevice,
    #[serde(default)]
    qubit: BTreeMap<String, RawQubit>,
    #[serde(default)]
    edge: BTreeMap<String, RawEdge>,
}

#[derive(Deserialize, Default)]
#[serde(deny_unknown_fields)]
struct RawDevice {
    name: Option<String>,
    topology: Option<String>,
    drive_rabi_mhz: Option<f64>,
    shots: Option<u64>,
    compensation_cap_ns: Option<f64>,
    compensation_min_ns: Option<f64>,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawQubit {
    omega_idle_ghz: f64,
    omega_work_ghz: f64,
    omega_max_ghz: Option<f64>,
    anharmonicity_mhz: Option<f64>,
    t1_us: f64,
    t2s_us: f64,
    fg: f64,
    fe: f64,
    /// MHz (frequency, not angular) per amplitude unit.
    alpha_flux: f64,
    #[serde(default)]
    work_above_idle: bool,
}

#[derive(Deserialize)]
#[serde(deny_unknown_fields)]
struct RawEdge {
    i: usize,
    j: usize,
    j_over_2pi_mhz: f64,
}

fn numbered<T>(map: BTreeMap<String, T>, what: &str) -> Result<Vec<T>> {
    let mut keyed = Vec::with_capacity(map.len());
    for (k, v) in map {
        let idx: usize = k
            .parse()
            .map_err(|_| Error::InvalidDevice(format!("[{what}.{k}]: section key must be an integer")))?;
        keyed.push((idx, v));
    }
    keyed.sort_by_key(|(i, _)| *i);
    for (expected, (idx, _)) in keyed.iter().enumerate() {
        if *idx != expected {
            return Err(Error::InvalidDevice(format!(
                "{what} sections must be numbered 0..{}, found {idx}",
                keyed.len()
            )));
        }
    }
    Ok(keyed.into_iter().map(|(_, v)| v).collect())
}

impl DeviceParams {
    pub fn from_toml_str(text: &str) -> Result<Self> {
        let raw: RawFile = toml::from_str(text).map_err(|e| Error::InvalidDevice(e.to_string()))?;
        let qubits = numbered(raw.qubit, "qubit")?
            .into_iter()
            .map(|q| QubitParams {
                omega_idle: q.omega_idle_ghz * GHZ,
                omega_work: q.omega_work_ghz * GHZ,
                omega_max: q.omega_max_ghz.map(|w| w * GHZ),
                anharmonicity: q.anharmonicity_mhz.map(|a| a * MHZ),
                t1: q.t1_us * 1e-6,
                t2_star: q.t2s_us * 1e-6,
                fg: q.fg,
                fe: q.fe,
                alpha_flux: q.alpha_flux * MHZ,
                work_above_idle: q.work_above_idle,
            })
            .collect();
        let edges = numbered(raw.edge, "edge")?
            .into_iter()
            .map(|e| Edge {
                i: e.i,
                j: e.j,
                coupling: e.j_over_2pi_mhz * MHZ,
            })
            .collect();
        let topology = raw.device.topology.as_deref().map(str::parse).transpose()?;
        let dev = DeviceParams {
            name: raw.device.name.unwrap_or_else(|| "device".into()),
            qubits,
            edges,
            topology,
            drive_rabi: raw.device.drive_rabi_mhz.unwrap_or(12.5) * MHZ,
            default_shots: raw.device.shots.unwrap_or(10_000),
            compensation_cap: raw.device.compensation_cap_ns.unwrap_or(200.0) * 1e-9,
            compensation_min: raw.device.compensation_min_ns.unwrap_or(5.0) * 1e-9,
        };
        dev.validate()?;
        Ok(dev)
    }

    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        Self::from_toml_str(&text)
    }

    /// The bundled eight-qubit ring.
    pub fn ring8() -> Self {
        Self::from_toml_str(RING8).expect("bundled device file is valid")
    }

    /// The bundled two-qubit pair.
    pub fn xyz_pair() -> Self {
        Self::from_toml_str(XYZ_PAIR).expect("bundled device file is valid")
    }

    /// Bundled device with at least `n` qubits, truncated to the first `n`
    /// sites (an open chain when a ring is cut).
    pub fn bundled_for(n: usize) -> Result<Self> {
        match n {
            2 => Ok(Self::xyz_pair()),
            8 => Ok(Self::ring8()),
            1..=7 => Self::ring8().truncated(n),
            _ => Err(Error::InvalidDevice(format!("no bundled device with {n} qubits"))),
        }
    }

    pub fn truncated(&self, n: usize) -> Result<Self> {
        if n == 0 || n > self.qubits.len() {
            return Err(Error::InvalidDevice(format!("cannot keep {n} of {} qubits", self.qubits.len())));
        }
        let mut out = self.clone();
        out.qubits.truncate(n);
        out.edges.retain(|e| e.i < n && e.j < n);
        if n < self.qubits.len() {
            out.topology = Some(if n == 2 { Topology::Pair } else { Topology::OpenChain });
        }
        out.validate()?;
        Ok(out)
    }

    pub fn nqubits(&self) -> usize {
        self.qubits.len()
    }

    /// Same device with every qubit's coherence replaced.
    pub fn with_coherence(&self, t1: f64, t2_star: f64) -> Self {
        let mut out = self.clone();
        for q in &mut out.qubits {
            q.t1 = t1;
            q.t2_star = t2_star;
        }
        out
    }

    /// Same device with perfect readout.
    pub fn with_ideal_readout(&self) -> Self {
        let mut out = self.clone();
        for q in &mut out.qubits {
            q.fg = 1.0;
            q.fe = 1.0;
        }
        out
    }

    /// Same device with every qubit idling at its working point.
    pub fn without_frame_mismatch(&self) -> Self {
        let mut out = self.clone();
        for q in &mut out.qubits {
            q.omega_idle = q.omega_work;
        }
        out
    }

    pub fn graph(&self) -> Result<CouplingGraph> {
        let n = self.nqubits();
        let topology = match self.topology {
            Some(t) => t,
            None if n == 2 => Topology::Pair,
            None if n >= 3 && self.edges.len() == n => Topology::Ring,
            None => Topology::OpenChain,
        };
        CouplingGraph::new(n, self.edges.clone(), topology)
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.qubits.len();
        if n == 0 {
            return Err(Error::InvalidDevice("no qubits".into()));
        }
        if n > MAX_QUBITS {
            return Err(Error::Capacity {
                requested: n,
                max: MAX_QUBITS,
            });
        }
        for (k, q) in self.qubits.iter().enumerate() {
            let bad = |m: &str| Err(Error::InvalidDevice(format!("qubit {k}: {m}")));
            if !(q.t1 > 0.0) || !(q.t2_star > 0.0) {
                return bad("T1 and T2* must be positive");
            }
            if !(0.0..=1.0).contains(&q.fg) || !(0.0..=1.0).contains(&q.fe) {
                return bad("readout fidelities must lie in [0, 1]");
            }
            if !(q.omega_idle > 0.0) || !(q.omega_work > 0.0) {
                return bad("frequencies must be positive");
            }
            if q.omega_work > q.omega_idle && !q.work_above_idle {
                return bad("working point above idle point needs work_above_idle = true");
            }
            if !q.alpha_flux.is_finite() {
                return bad("flux sensitivity must be finite");
            }
        }
        if !(self.drive_rabi >= 0.0) {
            return Err(Error::InvalidDevice("drive amplitude must be non-negative".into()));
        }
        if !(self.compensation_cap > 0.0) || !(self.compensation_min >= 0.0) || self.compensation_min > self.compensation_cap {
            return Err(Error::InvalidDevice("need 0 <= compensation_min <= compensation_cap".into()));
        }
        self.graph().map_err(|e| Error::InvalidDevice(e.to_string()))?;
        Ok(())
    }

    /// Serialises back to the device file format.
    pub fn to_toml_string(&self) -> String {
        let mut s = String::new();
        s.push_str("[device]\n");
        s.push_str(&format!("name = {:?}\n", self.name));
        if let Some(t) = self.topology {
            s.push_str(&format!("topology = \"{t}\"\n"));
        }
        s.push_str(&format!("drive_rabi_mhz = {}\n", self.drive_rabi / MHZ));
        s.push_str(&format!("shots = {}\n", self.default_shots));
        s.push_str(&format!("compensation_cap_ns = {}\n", self.compensation_cap * 1e9));
        s.push_str(&format!("compensation_min_ns = {}\n", self.compensation_min * 1e9));
        for (k, q) in self.qubits.iter().enumerate() {
            s.push_str(&format!("\n[qubit.{k}]\n"));
            s.push_str(&format!("omega_idle_ghz = {}\n", q.omega_idle / GHZ));
            s.push_str(&format!("omega_work_ghz = {}\n", q.omega_work / GHZ));
            if let Some(w) = q.omega_max {
                s.push_str(&format!("omega_max_ghz = {}\n", w / GHZ));
            }
            if let Some(a) = q.anharmonicity {
                s.push_str(&format!("anharmonicity_mhz = {}\n", a / MHZ));
            }
            s.push_str(&format!("t1_us = {}\n", q.t1 * 1e6));
            s.push_str(&format!("t2s_us = {}\n", q.t2_star * 1e6));
            s.push_str(&format!("fg = {}\nfe = {}\n", q.fg, q.fe));
            s.push_str(&format!("alpha_flux = {}\n", q.alpha_flux / MHZ));
            if q.work_above_idle {
                s.push_str("work_above_idle = true\n");
            }
        }
        for (k, e) in self.edges.iter().enumerate() {
            s.push_str(&format!(
                "\n[edge.{k}]\ni = {}\nj = {}\nj_over_2pi_mhz = {}\n",
                e.i,
                e.j,
                e.coupling / MHZ
            ));
        }
        s
    }
}

impl fmt::Display for DeviceParams {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(
            f,
            "device {:?}: {} qubits, {} edges, drive {:.3} MHz",
            self.name,
            self.nqubits(),
            self.edges.len(),
            self.drive_rabi / MHZ
        )?;
        writeln!(
            f,
            "{:>3} {:>10} {:>10} {:>9} {:>8} {:>8} {:>6} {:>6} {:>10}",
            "q", "idle_GHz", "work_GHz", "d_MHz", "T1_us", "T2*_us", "Fg", "Fe", "a_MHz/u"
        )?;
        for (k, q) in self.qubits.iter().enumerate() {
            writeln!(
                f,
                "{:>3} {:>10.4} {:>10.4} {:>9.2} {:>8.2} {:>8.2} {:>6.3} {:>6.3} {:>10.1}",
                k,
                q.omega_idle / GHZ,
                q.omega_work / GHZ,
                q.frame_detuning() / MHZ,
                q.t1 * 1e6,
                q.t2_star * 1e6,
                q.fg,
                q.fe,
                q.alpha_flux / MHZ
            )?;
        }
        for e in &self.edges {
            writeln!(f, "edge ({}, {}) J/2pi = {:.3} MHz", e.i, e.j, e.coupling / MHZ)?;
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn bundled_files_parse() {
        let ring = DeviceParams::ring8();
        assert_eq!(ring.nqubits(), 8);
        assert_eq!(ring.graph().unwrap().topology(), Topology::Ring);
        assert!((ring.qubits[7].t1 - 60.76e-6).abs() < 1e-12);
        assert!((ring.edges[0].coupling - TAU * -8e6).abs() < 1e-3);
        let pair = DeviceParams::xyz_pair();
        assert!((pair.qubits[0].frame_detuning() / TAU - 187e6).abs() < 1.0);
    }

    #[test]
    fn work_above_idle_needs_override() {
        let text = XYZ_PAIR.replace("omega_work_ghz = 4.513", "omega_work_ghz = 4.8");
        assert!(matches!(DeviceParams::from_toml_str(&text), Err(Error::InvalidDevice(_))));
    }

    #[test]
    fn rejects_bad_fidelity_and_unknown_keys() {
        let text = XYZ_PAIR.replacen("fg = 1.0", "fg = 1.2", 1);
        assert!(DeviceParams::from_toml_str(&text).is_err());
        let text = format!("{XYZ_PAIR}\n[qubit.0x]\n");
        assert!(DeviceParams::from_toml_str(&text).is_err());
    }

    #[test]
    fn toml_round_trip() {
        for dev in [DeviceParams::ring8(), DeviceParams::xyz_pair()] {
            let back = DeviceParams::from_toml_str(&dev.to_toml_string()).unwrap();
            assert_eq!(back.nqubits(), dev.nqubits());
            for (a, b) in back.qubits.iter().zip(&dev.qubits) {
                assert!((a.omega_idle - b.omega_idle).abs() < 1e-3);
                assert!((a.t2_star - b.t2_star).abs() < 1e-15);
            }
        }
    }

    #[test]
    fn truncation_cuts_ring() {
        let three = DeviceParams::ring8().truncated(3).unwrap();
        assert_eq!(three.edges.len(), 2);
        assert_eq!(three.graph().unwrap().topology(), Topology::OpenChain);
    }
}
