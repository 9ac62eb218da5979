// Copyright 2026 The mwspin Authors
// SPDX-License-Identifier: Apache-2.0

//! Spin-model Hamiltonians on small coupling graphs.

mod anisotropy;
mod families;
mod graph;
mod spiral;

pub use anisotropy::{delta_to_tau, tau_to_delta, AnisotropyWeights};
pub use families::{
    average_hamiltonian, build_phase_rotated_xy, build_tfim, build_weighted_xyz, build_xy, build_xy_dm,
    build_xyz, conjugate_by_global_rotation, total_magnetization, PhaseAssignment,
};
pub use graph::{CouplingGraph, Edge, Topology};
pub use spiral::{gd_ratio_to_phase, ring_phase_assignment, spiral_step, spiral_unitary, Spiral};
