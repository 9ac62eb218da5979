/* Copyright 2026 The mwspin Authors */
/* SPDX-License-Identifier: Apache-2.0 */

#ifndef MWSPIN_H
#define MWSPIN_H

/* Generated by cbindgen from src/lib.rs; do not edit. */

#include <stdarg.h>
#include <stdbool.h>
#include <stddef.h>
#include <stdint.h>
#include <stdlib.h>

/**
 * Status codes returned by every fallible function.
 */
typedef enum mwspin_status {
  MWSPIN_STATUS_OK = 0,
  MWSPIN_STATUS_NULL_POINTER = 1,
  MWSPIN_STATUS_INVALID_ARGUMENT = 2,
  MWSPIN_STATUS_PARSE = 3,
  MWSPIN_STATUS_IO = 4,
  MWSPIN_STATUS_CAPACITY = 5,
  MWSPIN_STATUS_INFEASIBLE = 6,
  MWSPIN_STATUS_UNCOMPENSATED_FRAME = 7,
  MWSPIN_STATUS_FIT_FAILED = 8,
  MWSPIN_STATUS_BUFFER_TOO_SMALL = 9,
  MWSPIN_STATUS_INTERNAL = 10,
} mwspin_status;

/**
 * Parsed device description.
 */
typedef struct mwspin_device mwspin_device;

/**
 * Device emulator without hidden imperfections.
 */
typedef struct mwspin_emulator mwspin_emulator;

/**
 * Pulse sequence.
 */
typedef struct mwspin_sequence mwspin_sequence;

#ifdef __cplusplus
extern "C" {
#endif // __cplusplus

/**
 * Copies the last error message of this thread into `buf` (NUL
 * terminated, truncated to `len`). Returns the full message length, 0 when
 * there is no error.
 *
 * # Safety
 * `buf` must be valid for `len` bytes or null.
 */
size_t mwspin_last_error_message(char *buf, size_t len);

/**
 * Library version as a static NUL-terminated string.
 */
const char *mwspin_version(void);

/**
 * Loads a device TOML file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` a valid pointer.
 */
enum mwspin_status mwspin_device_load(const char *path, struct mwspin_device **out);

/**
 * Bundled device: the pair for 2 qubits, the 8-site ring for 8, and an
 * open chain cut from the ring otherwise.
 *
 * # Safety
 * `out` must be a valid pointer.
 */
enum mwspin_status mwspin_device_bundled(size_t nqubits, struct mwspin_device **out);

/**
 * # Safety
 * `dev` must come from this library or be null.
 */
size_t mwspin_device_nqubits(const struct mwspin_device *dev);

/**
 * # Safety
 * `dev` must come from this library or be null; it is invalid afterwards.
 */
void mwspin_device_free(struct mwspin_device *dev);

/**
 * Parses sequence text.
 *
 * # Safety
 * `text` must be a NUL-terminated string; `out` a valid pointer.
 */
enum mwspin_status mwspin_sequence_parse(const char *text, struct mwspin_sequence **out);

/**
 * Reads a sequence file.
 *
 * # Safety
 * `path` must be a NUL-terminated string; `out` a valid pointer.
 */
enum mwspin_status mwspin_sequence_read(const char *path, struct mwspin_sequence **out);

/**
 * # Safety
 * `seq` must come from this library or be null.
 */
size_t mwspin_sequence_nqubits(const struct mwspin_sequence *seq);

/**
 * # Safety
 * `seq` must come from this library or be null; it is invalid afterwards.
 */
void mwspin_sequence_free(struct mwspin_sequence *seq);

/**
 * Audits frame phases at every work-point entry. Writes the largest
 * residual (rad) to `residual` and returns `UncompensatedFrame` when it
 * exceeds the tolerance.
 *
 * # Safety
 * Handles must come from this library; `residual` may be null.
 */
enum mwspin_status mwspin_sequence_check_frames(const struct mwspin_sequence *seq,
                                                const struct mwspin_device *dev,
                                                double *residual);

/**
 * Work-frame unitary of the whole sequence, written column-major into
 * `re` and `im`, each of `len >= 4^n` doubles.
 *
 * # Safety
 * `re` and `im` must be valid for `len` doubles.
 */
enum mwspin_status mwspin_sequence_unitary(const struct mwspin_sequence *seq,
                                           double *re,
                                           double *im,
                                           size_t len);

/**
 * Ideal emulator for a device.
 *
 * # Safety
 * `dev` must come from this library; `out` a valid pointer.
 */
enum mwspin_status mwspin_emulator_new(const struct mwspin_device *dev,
                                       struct mwspin_emulator **out);

/**
 * # Safety
 * `emu` must come from this library or be null; it is invalid afterwards.
 */
void mwspin_emulator_free(struct mwspin_emulator *emu);

/**
 * Runs `seq` from basis state `initial` and estimates the Pauli product
 * given as one letter per qubit (`I`, `X`, `Y`, `Z`; e.g. `"XZ"`).
 * `shots = 0` returns the exact value with zero standard error.
 *
 * # Safety
 * Handles must come from this library; `paulis` a NUL-terminated string;
 * `value` valid, `stderr_out` valid or null.
 */
enum mwspin_status mwspin_emulator_expectation(const struct mwspin_emulator *emu,
                                               const struct mwspin_sequence *seq,
                                               size_t initial,
                                               const char *paulis,
                                               bool noise,
                                               uint64_t shots,
                                               uint64_t seed,
                                               double *value,
                                               double *stderr_out);

/**
 * Samples `shots` computational-basis outcomes after `seq` and writes the
 * counts per basis index into `counts` (`len >= 2^n`).
 *
 * # Safety
 * Handles must come from this library; `counts` valid for `len` entries.
 */
enum mwspin_status mwspin_emulator_sample(const struct mwspin_emulator *emu,
                                          const struct mwspin_sequence *seq,
                                          size_t initial,
                                          bool noise,
                                          uint64_t shots,
                                          uint64_t seed,
                                          uint64_t *counts,
                                          size_t len);

/**
 * Runs an experiment config and writes its CSV/JSON outputs to `out_dir`.
 * `noise` < 0 keeps the config setting, 0 forces off, > 0 forces on;
 * `shots` = 0 keeps the config setting; `seed` replaces the config seed.
 * `passed` (optional) receives whether every verdict passed.
 *
 * # Safety
 * `config_path` and `out_dir` must be NUL-terminated strings; `passed`
 * valid or null.
 */
enum mwspin_status mwspin_experiment_run(const char *config_path,
                                         const char *out_dir,
                                         int32_t noise,
                                         uint64_t shots,
                                         uint64_t seed,
                                         bool *passed);

#ifdef __cplusplus
}  // extern "C"
#endif  // __cplusplus

#endif  /* MWSPIN_H */
