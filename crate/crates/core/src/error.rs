// Copyright 2026 The mwspin Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;

use thiserror::Error;

/// Largest register the dense backend accepts.
pub const MAX_QUBITS: usize = 12;

#[derive(Debug, Error)]
pub enum Error {
    #[error("register of {requested} qubits exceeds the dense capacity of {max}")]
    Capacity { requested: usize, max: usize },

    #[error("site index {site} out of range for a {nqubits}-qubit register")]
    SiteOutOfRange { site: usize, nqubits: usize },

    #[error("dimension mismatch: expected {expected}, found {found}")]
    DimensionMismatch { expected: usize, found: usize },

    #[error("repeated site index {0}")]
    RepeatedSite(usize),

    #[error("matrix is not unitary (deviation {deviation:.3e})")]
    NotUnitary { deviation: f64 },

    #[error("expectation value has imaginary residue {0:.3e}")]
    ImaginaryResidue(f64),

    #[error("integration step {dt:.3e} s exceeds the allowed bound {bound:.3e} s")]
    StepTooLarge { dt: f64, bound: f64 },

    #[error("density matrix lost positivity (eigenvalue {0:.3e})")]
    Unstable(f64),

    #[error("invalid coupling graph: {0}")]
    InvalidGraph(String),

    #[error("invalid anisotropy weights: {0}")]
    InvalidWeights(String),

    #[error("infeasible anisotropy: weight {axis} = {value} exceeds 1/2")]
    Infeasible { axis: char, value: f64 },

    #[error("ring of {nsites} sites cannot close with phase step {step} rad")]
    Incommensurate { nsites: usize, step: f64 },

    #[error("invalid sequence: {0}")]
    InvalidSequence(String),

    #[error("uncompensated frame phase {residual:.3e} rad on site {site}")]
    UncompensatedFrame { site: usize, residual: f64 },

    #[error("compensation pulse of {required:.3e} s exceeds the cap of {cap:.3e} s")]
    CompensationTooLong { required: f64, cap: f64 },

    #[error("rotation requested with zero drive amplitude on site {0}")]
    ZeroDrive(usize),

    #[error("invalid device description: {0}")]
    InvalidDevice(String),

    #[error("fit failed: {0}")]
    FitFailed(String),

    #[error("no phase closure found within the scanned amplitude range")]
    NoClosure,

    #[error("invalid configuration: {0}")]
    InvalidConfig(String),

    #[error("parse error on line {line}: {message}")]
    Parse { line: usize, message: String },

    #[error("{path}: {source}")]
    Io {
        path: PathBuf,
        #[source]
        source: std::io::Error,
    },
}

pub type Result<T, E = Error> = std::result::Result<T, E>;

impl Error {
    pub(crate) fn io(path: impl Into<PathBuf>, source: std::io::Error) -> Self {
        Error::Io {
            path: path.into(),
            source,
        }
    }
}
