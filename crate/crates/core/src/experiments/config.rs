// Copyright 2026 The mwspin Authors
// SPDX-License-Identifier: Apache-2.0

use std::fmt;
use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use crate::device::DeviceParams;
use crate::error::{Error, Result};
use crate::hamiltonians::AnisotropyWeights;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ExperimentKind {
    XxzYmag,
    XyzZmag,
    EtaSweep,
    DynamicSwitch,
    TfimFieldSweep,
    DmRing,
    CalibPhase,
    CalibRz,
}

impl ExperimentKind {
    pub const ALL: [ExperimentKind; 8] = [
        ExperimentKind::XxzYmag,
        ExperimentKind::XyzZmag,
        ExperimentKind::EtaSweep,
        ExperimentKind::DynamicSwitch,
        ExperimentKind::TfimFieldSweep,
        ExperimentKind::DmRing,
        ExperimentKind::CalibPhase,
        ExperimentKind::CalibRz,
    ];

    pub fn name(self) -> &'static str {
        match self {
            ExperimentKind::XxzYmag => "xxz_ymag",
            ExperimentKind::XyzZmag => "xyz_zmag",
            ExperimentKind::EtaSweep => "eta_sweep",
            ExperimentKind::DynamicSwitch => "dynamic_switch",
            ExperimentKind::TfimFieldSweep => "tfim_field_sweep",
            ExperimentKind::DmRing => "dm_ring",
            ExperimentKind::CalibPhase => "calib_phase",
            ExperimentKind::CalibRz => "calib_rz",
        }
    }

    pub fn parse(s: &str) -> Result<Self> {
        Self::ALL
            .into_iter()
            .find(|k| k.name() == s)
            .ok_or_else(|| Error::InvalidConfig(format!("unknown experiment kind '{s}'")))
    }

    fn allowed(self) -> &'static [&'static str] {
        match self {
            ExperimentKind::XxzYmag | ExperimentKind::EtaSweep => &["eta", "cycle_time", "total_time", "points"],
            ExperimentKind::XyzZmag => &["weights", "cycle_time", "total_time", "points"],
            ExperimentKind::DynamicSwitch => &["cycle_time", "total_time", "switch_window"],
            ExperimentKind::TfimFieldSweep => &["fields", "nsites", "cycle_time", "cycles"],
            ExperimentKind::DmRing => &["gd_ratio", "nsites", "total_time", "points"],
            ExperimentKind::CalibPhase => &["points", "phase_offsets"],
            ExperimentKind::CalibRz => &[
                "points",
                "phase_offsets",
                "cycle_counts",
                "alpha_spread",
                "idle",
                "pad",
            ],
        }
    }
}

impl fmt::Display for ExperimentKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

/// Experiment configuration. All quantities are SI (seconds, Hz). Fields a
/// kind does not use must be absent.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub kind: ExperimentKind,
    #[serde(default)]
    pub noise: bool,
    /// `None` reports exact expectation values.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub shots: Option<u64>,
    #[serde(default)]
    pub seed: u64,
    /// Independent repetitions averaged per point (3 when sampling shots).
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub repeats: Option<usize>,
    #[serde(default)]
    pub readout_error: bool,
    /// Device TOML; relative paths resolve against the config file.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub device: Option<PathBuf>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t1: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub t2_star: Option<f64>,
    /// Uniform `J/2pi` in Hz replacing the device couplings.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub coupling: Option<f64>,

    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cycle_time: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub total_time: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub points: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cycles: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub eta: Option<Vec<f64>>,
    /// `[dx, dy, dz]` triples.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub weights: Option<Vec<[f64; 3]>>,
    /// Transverse fields as `B/|J|`.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fields: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub nsites: Option<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub gd_ratio: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub switch_window: Option<[f64; 2]>,
    /// Injected drive-phase offsets; sampled from the seed when absent.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub phase_offsets: Option<Vec<f64>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub alpha_spread: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub cycle_counts: Option<Vec<usize>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub idle: Option<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub pad: Option<f64>,
}

pub const DEFAULT_T1: f64 = 10e-6;
pub const DEFAULT_T2_STAR: f64 = 1.5e-6;

fn positive(name: &str, v: f64) -> Result<f64> {
    if v.is_finite() && v > 0.0 {
        Ok(v)
    } else {
        Err(Error::InvalidConfig(format!("{name} must be positive, got {v}")))
    }
}

impl ExperimentConfig {
    /// Bare config with every optional field unset.
    pub fn new(kind: ExperimentKind) -> Self {
        ExperimentConfig {
            kind,
            noise: false,
            shots: None,
            seed: 0,
            repeats: None,
            readout_error: false,
            device: None,
            t1: None,
            t2_star: None,
            coupling: None,
            cycle_time: None,
            total_time: None,
            points: None,
            cycles: None,
            eta: None,
            weights: None,
            fields: None,
            nsites: None,
            gd_ratio: None,
            switch_window: None,
            phase_offsets: None,
            alpha_spread: None,
            cycle_counts: None,
            idle: None,
            pad: None,
        }
    }

    pub fn from_toml_str(text: &str) -> Result<Self> {
        let cfg: ExperimentConfig =
            toml::from_str(text).map_err(|e| Error::InvalidConfig(e.message().to_string()))?;
        cfg.validate()?;
        Ok(cfg)
    }

    /// Reads a config; a relative `device` path is resolved against the
    /// config's directory.
    pub fn from_file(path: impl AsRef<Path>) -> Result<Self> {
        let path = path.as_ref();
        let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
        let mut cfg = Self::from_toml_str(&text)?;
        if let (Some(dev), Some(dir)) = (cfg.device.as_mut(), path.parent()) {
            if dev.is_relative() {
                *dev = dir.join(&*dev);
            }
        }
        Ok(cfg)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("config serializes")
    }

    pub fn from_json(text: &str) -> Result<Self> {
        serde_json::from_str(text).map_err(|e| Error::InvalidConfig(e.to_string()))
    }

    fn present(&self) -> Vec<&'static str> {
        let mut out = Vec::new();
        let mut mark = |set: bool, name: &'static str| {
            if set {
                out.push(name);
            }
        };
        mark(self.cycle_time.is_some(), "cycle_time");
        mark(self.total_time.is_some(), "total_time");
        mark(self.points.is_some(), "points");
        mark(self.cycles.is_some(), "cycles");
        mark(self.eta.is_some(), "eta");
        mark(self.weights.is_some(), "weights");
        mark(self.fields.is_some(), "fields");
        mark(self.nsites.is_some(), "nsites");
        mark(self.gd_ratio.is_some(), "gd_ratio");
        mark(self.switch_window.is_some(), "switch_window");
        mark(self.phase_offsets.is_some(), "phase_offsets");
        mark(self.alpha_spread.is_some(), "alpha_spread");
        mark(self.cycle_counts.is_some(), "cycle_counts");
        mark(self.idle.is_some(), "idle");
        mark(self.pad.is_some(), "pad");
        out
    }

    /// Checks that every field is used by the kind and in range.
    pub fn validate(&self) -> Result<()> {
        let allowed = self.kind.allowed();
        if let Some(f) = self.present().into_iter().find(|f| !allowed.contains(f)) {
            return Err(Error::InvalidConfig(format!("'{f}' is not a parameter of {}", self.kind)));
        }
        if self.shots == Some(0) {
            return Err(Error::InvalidConfig("shots must be at least 1".into()));
        }
        if self.repeats == Some(0) {
            return Err(Error::InvalidConfig("repeats must be at least 1".into()));
        }
        for (name, v) in [
            ("t1", self.t1),
            ("t2_star", self.t2_star),
            ("cycle_time", self.cycle_time),
            ("total_time", self.total_time),
            ("idle", self.idle),
            ("pad", self.pad),
        ] {
            if let Some(v) = v {
                positive(name, v)?;
            }
        }
        if let Some(j) = self.coupling {
            if !j.is_finite() || j == 0.0 {
                return Err(Error::InvalidConfig(format!("coupling must be finite and nonzero, got {j}")));
            }
        }
        if self.cycle_time()? > self.total_time()? && self.kind != ExperimentKind::TfimFieldSweep {
            return Err(Error::InvalidConfig("cycle_time exceeds total_time".into()));
        }
        let min_points = if self.kind == ExperimentKind::CalibPhase { 3 } else { 2 };
        if self.points() < min_points {
            return Err(Error::InvalidConfig(format!("points must be at least {min_points}")));
        }
        if self.cycles == Some(0) {
            return Err(Error::InvalidConfig("cycles must be at least 1".into()));
        }
        for &eta in &self.etas() {
            AnisotropyWeights::xxz(eta)?;
        }
        for w in self.weight_list() {
            w?;
        }
        if self.fields().iter().any(|b| !b.is_finite()) {
            return Err(Error::InvalidConfig("fields must be finite".into()));
        }
        if self.gd_ratios().iter().any(|x| !x.is_finite()) {
            return Err(Error::InvalidConfig("gd_ratio entries must be finite".into()));
        }
        let min_sites = if self.kind == ExperimentKind::DmRing { 3 } else { 2 };
        if self.nsites() < min_sites {
            return Err(Error::InvalidConfig(format!("nsites must be at least {min_sites}")));
        }
        if let Some([a, b]) = self.switch_window {
            if !(a > 0.0 && b > a && b < self.total_time()?) {
                return Err(Error::InvalidConfig(
                    "switch_window must satisfy 0 < start < end < total_time".into(),
                ));
            }
        }
        if let Some(s) = self.alpha_spread {
            if !(0.0..1.0).contains(&s) {
                return Err(Error::InvalidConfig(format!("alpha_spread must lie in [0, 1), got {s}")));
            }
        }
        if self.phase_offsets.as_ref().is_some_and(|p| p.iter().any(|v| !v.is_finite())) {
            return Err(Error::InvalidConfig("phase_offsets must be finite".into()));
        }
        if let Some(c) = &self.cycle_counts {
            if c.is_empty() || c.contains(&0) {
                return Err(Error::InvalidConfig("cycle_counts must be non-empty and positive".into()));
            }
        }
        Ok(())
    }

    pub fn cycle_time(&self) -> Result<f64> {
        Ok(self.cycle_time.unwrap_or(match self.kind {
            ExperimentKind::DynamicSwitch => 10e-9,
            ExperimentKind::TfimFieldSweep => 40e-9,
            _ => 30e-9,
        }))
    }

    pub fn total_time(&self) -> Result<f64> {
        Ok(self.total_time.unwrap_or(match self.kind {
            ExperimentKind::EtaSweep => 2e-6,
            ExperimentKind::DynamicSwitch => 0.75e-6,
            _ => 1e-6,
        }))
    }

    pub fn points(&self) -> usize {
        self.points.unwrap_or(match self.kind {
            ExperimentKind::CalibPhase => 24,
            ExperimentKind::CalibRz => 41,
            _ => 26,
        })
    }

    pub fn cycles(&self) -> usize {
        self.cycles.unwrap_or(10)
    }

    pub fn etas(&self) -> Vec<f64> {
        match (&self.eta, self.kind) {
            (Some(e), _) => e.clone(),
            (None, ExperimentKind::XxzYmag) => vec![0.18, 1.0, 1.8],
            (None, ExperimentKind::EtaSweep) => vec![0.18, 0.5, 1.0, 1.33, 1.8],
            _ => Vec::new(),
        }
    }

    pub fn weight_list(&self) -> Vec<Result<AnisotropyWeights>> {
        match (&self.weights, self.kind) {
            (Some(w), _) => w.iter().map(|&[x, y, z]| AnisotropyWeights::new(x, y, z)).collect(),
            (None, ExperimentKind::XyzZmag) => vec![
                AnisotropyWeights::new(0.4, 0.4, 0.2),
                AnisotropyWeights::new(5.0 / 11.0, 4.0 / 11.0, 2.0 / 11.0),
            ],
            _ => Vec::new(),
        }
    }

    pub fn fields(&self) -> Vec<f64> {
        match (&self.fields, self.kind) {
            (Some(f), _) => f.clone(),
            (None, ExperimentKind::TfimFieldSweep) => vec![0.0, 0.5, 1.0, 2.0],
            _ => Vec::new(),
        }
    }

    pub fn nsites(&self) -> usize {
        self.nsites.unwrap_or(if self.kind == ExperimentKind::DmRing { 8 } else { 2 })
    }

    pub fn gd_ratios(&self) -> Vec<f64> {
        match (&self.gd_ratio, self.kind) {
            (Some(g), _) => g.clone(),
            (None, ExperimentKind::DmRing) => vec![0.0, 1.0],
            _ => Vec::new(),
        }
    }

    pub fn switch_window(&self) -> [f64; 2] {
        self.switch_window.unwrap_or([0.25e-6, 0.5e-6])
    }

    pub fn cycle_counts(&self) -> Vec<usize> {
        self.cycle_counts.clone().unwrap_or_else(|| vec![1, 2, 3, 4, 5])
    }

    pub fn alpha_spread(&self) -> f64 {
        self.alpha_spread.unwrap_or(0.0)
    }

    pub fn idle(&self) -> f64 {
        self.idle.unwrap_or(40e-9)
    }

    pub fn pad(&self) -> f64 {
        self.pad.unwrap_or(20e-9)
    }

    /// Shots per point; calibrations sample by default.
    pub fn effective_shots(&self) -> Option<u64> {
        match self.kind {
            ExperimentKind::CalibPhase | ExperimentKind::CalibRz => self.shots.or(Some(10_000)),
            _ => self.shots,
        }
    }

    pub fn effective_repeats(&self) -> usize {
        match self.effective_shots() {
            None => 1,
            Some(_) => self.repeats.unwrap_or(3),
        }
    }

    /// Device for the run: the configured file or the bundled one for the
    /// kind, with coherence times and coupling overrides applied.
    pub fn load_device(&self) -> Result<DeviceParams> {
        let mut dev = match &self.device {
            Some(p) => DeviceParams::from_file(p)?,
            None => match self.kind {
                ExperimentKind::DmRing => DeviceParams::ring8(),
                ExperimentKind::TfimFieldSweep if self.nsites() > 2 => DeviceParams::ring8(),
                _ => DeviceParams::xyz_pair(),
            },
        };
        let need = match self.kind {
            ExperimentKind::DmRing | ExperimentKind::TfimFieldSweep => self.nsites(),
            _ => 2,
        };
        if dev.nqubits() < need {
            return Err(Error::InvalidConfig(format!(
                "device '{}' has {} qubits, {} needs {need}",
                dev.name,
                dev.nqubits(),
                self.kind
            )));
        }
        if dev.nqubits() > need {
            dev = dev.truncated(need)?;
        }
        let mut dev = dev.with_coherence(
            self.t1.unwrap_or(DEFAULT_T1),
            self.t2_star.unwrap_or(DEFAULT_T2_STAR),
        );
        if let Some(j) = self.coupling {
            for e in &mut dev.edges {
                e.coupling = std::f64::consts::TAU * j;
            }
        }
        dev.validate()?;
        Ok(dev)
    }
}
