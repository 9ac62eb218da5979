// Copyright 2026 The mwspin Authors
// SPDX-License-Identifier: Apache-2.0

//! Sequence IR, generators, frame tracking and the two compilation targets:
//! the ideal work-frame unitary and the lab-frame pulse schedule.

mod frame;
mod generators;
mod lab;
mod segment;
mod text;
mod unitary;

pub use frame::{frame_audit, insert_frame_compensation, wrap_phase, Frame, FrameAudit, FrameTracker, FRAME_TOL};
pub use generators::{
    gen_dm_ring_sequence, gen_tfim_sequence, gen_tfim_sequence_timed, gen_xyz_sequence, gen_xyz_sequence_timed,
    toggling_frame_pieces, DEFAULT_HALF_PI, DEFAULT_TFIM_TAU,
};
pub use lab::{compile_to_lab_schedule, Drive, LabPerturbation, LabPiece, LabSchedule};
pub(crate) use unitary::WorkFrame;
pub use segment::{Axis, Segment, Sequence};
pub use text::{format_sequence, parse_sequence, read_sequence, write_sequence};
pub use unitary::{apply_sequence, compile_to_unitary, compile_to_unitary_with, push_virtual_z, CompileOptions};
