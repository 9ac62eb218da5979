// Copyright 2026 The mwspin Authors
// SPDX-License-Identifier: Apache-2.0

//! Simulation and pulse-compilation toolkit for microwave-engineered spin
//! models on superconducting qubit arrays.

pub mod compiler;
pub mod device;
pub mod error;
pub mod experiments;
pub mod fitting;
pub mod hamiltonians;
pub mod qsim;

pub use error::{Error, Result};
