// Copyright 2026 The mwspin Authors
// SPDX-License-Identifier: Apache-2.0

//! Experiment drivers: configs, traces, oscillation fits and file output.

mod config;
mod output;
mod run;
mod series;

pub use config::{ExperimentConfig, ExperimentKind, DEFAULT_T1, DEFAULT_T2_STAR};
pub use output::{emit_outputs, eta_table_csv, summary_json};
pub use run::{
    build_emulator, dominant_frequency, eta_sweep, proportional_fit, run_experiment, run_experiment_on,
    run_phase_calibration, run_rz_calibration, sample_cycles, EtaRow, ExperimentResult, Trace, Verdict, EXACT_TOL,
};
pub use series::{fit_oscillation, FitModel, FitResult, TimeSeries};
