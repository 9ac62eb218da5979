// Copyright 2026 The mwspin Authors
// SPDX-License-Identifier: Apache-2.0

//! Device parameters and the mock-hardware emulator.

mod calibration;
mod emulator;
mod params;
mod readout;

pub use calibration::*;
pub use emulator::{derive_seed, estimate_from, Emulator, Estimate, HiddenState, Observable, RunOptions, RunRecord};
pub use params::*;
pub use readout::ReadoutModel;
