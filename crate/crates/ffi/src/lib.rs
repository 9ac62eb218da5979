// Copyright 2026 The mwspin Authors
// SPDX-License-Identifier: Apache-2.0

//! C ABI over the mwspin simulator.
//!
//! Every fallible call returns an [`MwspinStatus`]; on failure the message
//! is kept per thread and read back with [`mwspin_last_error_message`].
//! Handles are opaque and released with their `_free` function.

use std::cell::RefCell;
use std::ffi::{c_char, CStr, CString};
use std::panic::{catch_unwind, AssertUnwindSafe};
use std::ptr;

use mwspin::compiler::{compile_to_unitary, frame_audit, parse_sequence, read_sequence, Sequence};
use mwspin::device::{DeviceParams, Emulator, Observable, RunOptions};
use mwspin::experiments::{emit_outputs, run_experiment, ExperimentConfig};
use mwspin::qsim::{Pauli, StateVector};
use mwspin::Error;

/// Status codes returned by every fallible function.
#[repr(C)]
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum MwspinStatus {
    Ok = 0,
    NullPointer = 1,
    InvalidArgument = 2,
    Parse = 3,
    Io = 4,
    Capacity = 5,
    Infeasible = 6,
    UncompensatedFrame = 7,
    FitFailed = 8,
    BufferTooSmall = 9,
    Internal = 10,
}

/// Parsed device description.
pub struct MwspinDevice(DeviceParams);

/// Pulse sequence.
pub struct MwspinSequence(Sequence);

/// Device emulator without hidden imperfections.
pub struct MwspinEmulator(Emulator);

thread_local! {
    static LAST_ERROR: RefCell<Option<CString>> = const { RefCell::new(None) };
}

fn set_error(msg: impl Into<String>) {
    let msg = msg.into().replace('\0', " ");
    LAST_ERROR.with(|e| *e.borrow_mut() = CString::new(msg).ok());
}

fn status_of(e: &Error) -> MwspinStatus {
    match e {
        Error::Parse { .. } => MwspinStatus::Parse,
        Error::Io { .. } => MwspinStatus::Io,
        Error::Capacity { .. } => MwspinStatus::Capacity,
        Error::Infeasible { .. } | Error::Incommensurate { .. } => MwspinStatus::Infeasible,
        Error::UncompensatedFrame { .. } => MwspinStatus::UncompensatedFrame,
        Error::FitFailed(_) | Error::NoClosure => MwspinStatus::FitFailed,
        _ => MwspinStatus::InvalidArgument,
    }
}

/// Runs `f`, converting errors and panics into status codes.
fn guard(f: impl FnOnce() -> Result<(), (MwspinStatus, String)>) -> MwspinStatus {
    match catch_unwind(AssertUnwindSafe(f)) {
        Ok(Ok(())) => {
            LAST_ERROR.with(|e| *e.borrow_mut() = None);
            MwspinStatus::Ok
        }
        Ok(Err((status, msg))) => {
            set_error(msg);
            status
        }
        Err(_) => {
            set_error("internal panic");
            MwspinStatus::Internal
        }
    }
}

trait IntoFfi<T> {
    fn ffi(self) -> Result<T, (MwspinStatus, String)>;
}

impl<T> IntoFfi<T> for mwspin::Result<T> {
    fn ffi(self) -> Result<T, (MwspinStatus, String)> {
        self.map_err(|e| (status_of(&e), e.to_string()))
    }
}

fn null(what: &str) -> (MwspinStatus, String) {
    (MwspinStatus::NullPointer, format!("{what} is null"))
}

unsafe fn str_arg<'a>(p: *const c_char, what: &str) -> Result<&'a str, (MwspinStatus, String)> {
    if p.is_null() {
        return Err(null(what));
    }
    CStr::from_ptr(p)
        .to_str()
        .map_err(|_| (MwspinStatus::InvalidArgument, format!("{what} is not UTF-8")))
}

unsafe fn handle<'a, T>(p: *const T, what: &str) -> Result<&'a T, (MwspinStatus, String)> {
    p.as_ref().ok_or_else(|| null(what))
}

unsafe fn store<T>(out: *mut *mut T, value: T) -> Result<(), (MwspinStatus, String)> {
    if out.is_null() {
        return Err(null("output pointer"));
    }
    *out = Box::into_raw(Box::new(value));
    Ok(())
}

/// Copies the last error message of this thread into `buf` (NUL
/// terminated, truncated to `len`). Returns the full message length, 0 when
/// there is no error.
///
/// # Safety
/// `buf` must be valid for `len` bytes or null.
#[no_mangle]
pub unsafe extern "C" fn mwspin_last_error_message(buf: *mut c_char, len: usize) -> usize {
    LAST_ERROR.with(|e| match e.borrow().as_ref() {
        None => {
            if !buf.is_null() && len > 0 {
                *buf = 0;
            }
            0
        }
        Some(msg) => {
            let bytes = msg.as_bytes();
            if !buf.is_null() && len > 0 {
                let n = bytes.len().min(len - 1);
                ptr::copy_nonoverlapping(bytes.as_ptr(), buf as *mut u8, n);
                *buf.add(n) = 0;
            }
            bytes.len()
        }
    })
}

/// Library version as a static NUL-terminated string.
#[no_mangle]
pub extern "C" fn mwspin_version() -> *const c_char {
    concat!(env!("CARGO_PKG_VERSION"), "\0").as_ptr() as *const c_char
}

/// Loads a device TOML file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mwspin_device_load(path: *const c_char, out: *mut *mut MwspinDevice) -> MwspinStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        store(out, MwspinDevice(DeviceParams::from_file(path).ffi()?))
    })
}

/// Bundled device: the pair for 2 qubits, the 8-site ring for 8, and an
/// open chain cut from the ring otherwise.
///
/// # Safety
/// `out` must be a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mwspin_device_bundled(nqubits: usize, out: *mut *mut MwspinDevice) -> MwspinStatus {
    guard(|| store(out, MwspinDevice(DeviceParams::bundled_for(nqubits).ffi()?)))
}

/// # Safety
/// `dev` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn mwspin_device_nqubits(dev: *const MwspinDevice) -> usize {
    dev.as_ref().map_or(0, |d| d.0.nqubits())
}

/// # Safety
/// `dev` must come from this library or be null; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn mwspin_device_free(dev: *mut MwspinDevice) {
    if !dev.is_null() {
        drop(Box::from_raw(dev));
    }
}

/// Parses sequence text.
///
/// # Safety
/// `text` must be a NUL-terminated string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mwspin_sequence_parse(text: *const c_char, out: *mut *mut MwspinSequence) -> MwspinStatus {
    guard(|| {
        let text = str_arg(text, "text")?;
        store(out, MwspinSequence(parse_sequence(text).ffi()?))
    })
}

/// Reads a sequence file.
///
/// # Safety
/// `path` must be a NUL-terminated string; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mwspin_sequence_read(path: *const c_char, out: *mut *mut MwspinSequence) -> MwspinStatus {
    guard(|| {
        let path = str_arg(path, "path")?;
        store(out, MwspinSequence(read_sequence(path).ffi()?))
    })
}

/// # Safety
/// `seq` must come from this library or be null.
#[no_mangle]
pub unsafe extern "C" fn mwspin_sequence_nqubits(seq: *const MwspinSequence) -> usize {
    seq.as_ref().map_or(0, |s| s.0.nqubits)
}

/// # Safety
/// `seq` must come from this library or be null; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn mwspin_sequence_free(seq: *mut MwspinSequence) {
    if !seq.is_null() {
        drop(Box::from_raw(seq));
    }
}

/// Audits frame phases at every work-point entry. Writes the largest
/// residual (rad) to `residual` and returns `UncompensatedFrame` when it
/// exceeds the tolerance.
///
/// # Safety
/// Handles must come from this library; `residual` may be null.
#[no_mangle]
pub unsafe extern "C" fn mwspin_sequence_check_frames(
    seq: *const MwspinSequence,
    dev: *const MwspinDevice,
    residual: *mut f64,
) -> MwspinStatus {
    guard(|| {
        let seq = handle(seq, "sequence")?;
        let dev = handle(dev, "device")?;
        let audit = frame_audit(&seq.0, &dev.0).ffi()?;
        if !residual.is_null() {
            *residual = audit.max_residual;
        }
        if audit.max_residual > mwspin::compiler::FRAME_TOL {
            return Err((
                MwspinStatus::UncompensatedFrame,
                format!("residual {:.3e} rad on qubit {}", audit.max_residual, audit.worst_site),
            ));
        }
        Ok(())
    })
}

/// Work-frame unitary of the whole sequence, written column-major into
/// `re` and `im`, each of `len >= 4^n` doubles.
///
/// # Safety
/// `re` and `im` must be valid for `len` doubles.
#[no_mangle]
pub unsafe extern "C" fn mwspin_sequence_unitary(
    seq: *const MwspinSequence,
    re: *mut f64,
    im: *mut f64,
    len: usize,
) -> MwspinStatus {
    guard(|| {
        let seq = handle(seq, "sequence")?;
        if re.is_null() || im.is_null() {
            return Err(null("output buffer"));
        }
        let dim = 1usize << seq.0.nqubits;
        if len < dim * dim {
            return Err((MwspinStatus::BufferTooSmall, format!("need {} entries", dim * dim)));
        }
        let u = compile_to_unitary(&seq.0).ffi()?;
        for (k, z) in u.iter().enumerate() {
            *re.add(k) = z.re;
            *im.add(k) = z.im;
        }
        Ok(())
    })
}

/// Ideal emulator for a device.
///
/// # Safety
/// `dev` must come from this library; `out` a valid pointer.
#[no_mangle]
pub unsafe extern "C" fn mwspin_emulator_new(dev: *const MwspinDevice, out: *mut *mut MwspinEmulator) -> MwspinStatus {
    guard(|| {
        let dev = handle(dev, "device")?;
        store(out, MwspinEmulator(Emulator::ideal(dev.0.clone()).ffi()?))
    })
}

/// # Safety
/// `emu` must come from this library or be null; it is invalid afterwards.
#[no_mangle]
pub unsafe extern "C" fn mwspin_emulator_free(emu: *mut MwspinEmulator) {
    if !emu.is_null() {
        drop(Box::from_raw(emu));
    }
}

fn run_options(noise: bool, shots: u64, seed: u64) -> RunOptions {
    RunOptions {
        noise,
        shots: (shots > 0).then_some(shots),
        seed,
        readout_error: false,
    }
}

/// Runs `seq` from basis state `initial` and estimates the Pauli product
/// given as one letter per qubit (`I`, `X`, `Y`, `Z`; e.g. `"XZ"`).
/// `shots = 0` returns the exact value with zero standard error.
///
/// # Safety
/// Handles must come from this library; `paulis` a NUL-terminated string;
/// `value` valid, `stderr_out` valid or null.
#[no_mangle]
pub unsafe extern "C" fn mwspin_emulator_expectation(
    emu: *const MwspinEmulator,
    seq: *const MwspinSequence,
    initial: usize,
    paulis: *const c_char,
    noise: bool,
    shots: u64,
    seed: u64,
    value: *mut f64,
    stderr_out: *mut f64,
) -> MwspinStatus {
    guard(|| {
        let emu = handle(emu, "emulator")?;
        let seq = handle(seq, "sequence")?;
        let paulis = str_arg(paulis, "paulis")?;
        if value.is_null() {
            return Err(null("value"));
        }
        let n = seq.0.nqubits;
        if paulis.chars().count() != n {
            return Err((
                MwspinStatus::InvalidArgument,
                format!("need {n} Pauli letters, got '{paulis}'"),
            ));
        }
        let mut factors = Vec::new();
        for (site, c) in paulis.chars().enumerate() {
            match c.to_ascii_uppercase() {
                'I' => {}
                'X' => factors.push((site, Pauli::X)),
                'Y' => factors.push((site, Pauli::Y)),
                'Z' => factors.push((site, Pauli::Z)),
                other => return Err((MwspinStatus::InvalidArgument, format!("bad Pauli letter '{other}'"))),
            }
        }
        let psi0 = StateVector::basis(n, initial).ffi()?;
        let obs = Observable::pauli_product(n, &factors);
        let rec = emu
            .0
            .run_sequence(&seq.0, &psi0, &[seq.0.cycles], &[obs], &run_options(noise, shots, seed))
            .ffi()?;
        let est = rec[0].estimates[0];
        *value = est.value;
        if !stderr_out.is_null() {
            *stderr_out = est.stderr;
        }
        Ok(())
    })
}

/// Samples `shots` computational-basis outcomes after `seq` and writes the
/// counts per basis index into `counts` (`len >= 2^n`).
///
/// # Safety
/// Handles must come from this library; `counts` valid for `len` entries.
#[no_mangle]
pub unsafe extern "C" fn mwspin_emulator_sample(
    emu: *const MwspinEmulator,
    seq: *const MwspinSequence,
    initial: usize,
    noise: bool,
    shots: u64,
    seed: u64,
    counts: *mut u64,
    len: usize,
) -> MwspinStatus {
    guard(|| {
        let emu = handle(emu, "emulator")?;
        let seq = handle(seq, "sequence")?;
        if counts.is_null() {
            return Err(null("counts"));
        }
        let dim = 1usize << seq.0.nqubits;
        if len < dim {
            return Err((MwspinStatus::BufferTooSmall, format!("need {dim} entries")));
        }
        let psi0 = StateVector::basis(seq.0.nqubits, initial).ffi()?;
        let c = emu
            .0
            .sample_counts(&seq.0, &psi0, shots, &run_options(noise, shots, seed))
            .ffi()?;
        ptr::copy_nonoverlapping(c.as_ptr(), counts, dim);
        Ok(())
    })
}

/// Runs an experiment config and writes its CSV/JSON outputs to `out_dir`.
/// `noise` < 0 keeps the config setting, 0 forces off, > 0 forces on;
/// `shots` = 0 keeps the config setting; `seed` replaces the config seed.
/// `passed` (optional) receives whether every verdict passed.
///
/// # Safety
/// `config_path` and `out_dir` must be NUL-terminated strings; `passed`
/// valid or null.
#[no_mangle]
pub unsafe extern "C" fn mwspin_experiment_run(
    config_path: *const c_char,
    out_dir: *const c_char,
    noise: i32,
    shots: u64,
    seed: u64,
    passed: *mut bool,
) -> MwspinStatus {
    guard(|| {
        let path = str_arg(config_path, "config_path")?;
        let out = str_arg(out_dir, "out_dir")?;
        let mut cfg = ExperimentConfig::from_file(path).ffi()?;
        if noise >= 0 {
            cfg.noise = noise > 0;
        }
        if shots > 0 {
            cfg.shots = Some(shots);
        }
        cfg.seed = seed;
        let res = run_experiment(&cfg).ffi()?;
        emit_outputs(&res, out).ffi()?;
        if !passed.is_null() {
            *passed = res.passed();
        }
        Ok(())
    })
}
