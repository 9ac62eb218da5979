// Copyright 2026 The mwspin Authors
// SPDX-License-Identifier: Apache-2.0

use std::path::PathBuf;
use std::process::ExitCode;

use clap::{Args, Parser, Subcommand, ValueEnum};

use mwspin::compiler::{
    compile_to_unitary_with, format_sequence, frame_audit, insert_frame_compensation, read_sequence, CompileOptions,
    FRAME_TOL,
};
use mwspin::device::{DeviceParams, Emulator, HiddenState};
use mwspin::experiments::{
    emit_outputs, run_experiment, run_phase_calibration, run_rz_calibration, ExperimentConfig, ExperimentKind,
};
use mwspin::qsim::unitarity_deviation;
use mwspin::{Error, Result};

#[derive(Parser)]
#[command(name = "mwspin", version, about = "Microwave-engineered spin dynamics on small qubit arrays")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Run an experiment config and write CSV/JSON results.
    Experiment(ExperimentArgs),
    /// Calibrate drive-phase offsets or the Z-pulse amplitude on an emulated device.
    Calibrate(CalibrateArgs),
    /// Parse a sequence file, compile it and optionally audit frame phases.
    Compile(CompileArgs),
    /// Device file utilities.
    Device {
        #[command(subcommand)]
        command: DeviceCommand,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum Switch {
    On,
    Off,
}

#[derive(Args)]
struct ExperimentArgs {
    /// Experiment kind, e.g. eta_sweep.
    kind: String,
    #[arg(long)]
    config: PathBuf,
    #[arg(long)]
    out: PathBuf,
    #[arg(long, value_enum)]
    noise: Option<Switch>,
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long)]
    seed: Option<u64>,
}

#[derive(Clone, Copy, ValueEnum)]
enum Target {
    Phase,
    Rz,
}

#[derive(Args)]
struct CalibrateArgs {
    #[arg(value_enum)]
    target: Target,
    #[arg(long)]
    device: PathBuf,
    #[arg(long)]
    shots: Option<u64>,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    /// Injected drive-phase offsets per qubit (rad); sampled from the seed otherwise.
    #[arg(long, value_delimiter = ',', allow_hyphen_values = true)]
    phase_offsets: Option<Vec<f64>>,
    /// Relative spread of the hidden flux sensitivity.
    #[arg(long, default_value_t = 0.0)]
    alpha_spread: f64,
}

#[derive(Args)]
struct CompileArgs {
    #[arg(long)]
    sequence: PathBuf,
    /// Audit the idle/work frame phase at every work-point entry.
    #[arg(long)]
    check_frames: bool,
    /// Device for the frame audit; defaults to the bundled device of matching size.
    #[arg(long)]
    device: Option<PathBuf>,
    /// Print the sequence with frame compensation inserted.
    #[arg(long)]
    compensate: bool,
}

#[derive(Subcommand)]
enum DeviceCommand {
    /// Print a parsed device file.
    Show { file: PathBuf },
}

fn experiment(a: ExperimentArgs) -> Result<bool> {
    let kind = ExperimentKind::parse(&a.kind)?;
    let mut cfg = ExperimentConfig::from_file(&a.config)?;
    if cfg.kind != kind {
        return Err(Error::InvalidConfig(format!(
            "config is for {}, command asked for {kind}",
            cfg.kind
        )));
    }
    if let Some(n) = a.noise {
        cfg.noise = matches!(n, Switch::On);
    }
    if a.shots.is_some() {
        cfg.shots = a.shots;
    }
    if let Some(s) = a.seed {
        cfg.seed = s;
    }
    cfg.validate()?;
    let res = run_experiment(&cfg)?;
    let paths = emit_outputs(&res, &a.out)?;
    println!("{}: {} traces, {} files in {}", kind, res.traces.len(), paths.len(), a.out.display());
    for (k, v) in &res.scalars {
        println!("  {k} = {v}");
    }
    for v in &res.verdicts {
        println!("  [{}] {}: {}", if v.passed { "PASS" } else { "FAIL" }, v.name, v.detail);
    }
    Ok(res.passed())
}

fn calibrate(a: CalibrateArgs) -> Result<bool> {
    let dev = DeviceParams::from_file(&a.device)?;
    let mut cfg = ExperimentConfig::new(match a.target {
        Target::Phase => ExperimentKind::CalibPhase,
        Target::Rz => ExperimentKind::CalibRz,
    });
    cfg.shots = a.shots;
    cfg.seed = a.seed;
    if a.alpha_spread != 0.0 {
        cfg.alpha_spread = Some(a.alpha_spread);
    }
    cfg.phase_offsets = a.phase_offsets;
    cfg.validate()?;
    let hidden = HiddenState::sample(&dev, mwspin::device::derive_seed(a.seed, 0xC0FFEE), cfg.alpha_spread());
    let hidden = match &cfg.phase_offsets {
        Some(p) if p.len() == dev.nqubits() => HiddenState::new(p.clone(), hidden.alpha_true().to_vec()),
        Some(p) => {
            return Err(Error::InvalidConfig(format!(
                "{} phase offsets for {} qubits",
                p.len(),
                dev.nqubits()
            )))
        }
        None => hidden,
    };
    let emu = Emulator::new(dev, hidden)?;
    match a.target {
        Target::Phase => {
            let cal = run_phase_calibration(&cfg, &emu)?;
            println!("phase_offset_rad = {}", cal.offset);
            println!("phase_offset_stderr_rad = {}", cal.offset_stderr);
            println!("contrast = {}", cal.amplitude);
            println!("residual_norm = {}", cal.residual_norm);
        }
        Target::Rz => {
            let (phase, rz) = run_rz_calibration(&cfg, &emu)?;
            println!("phase_offset_rad = {}", phase.offset);
            println!("rz_amplitude = {}", rz.amplitude);
            println!("phase_per_unit_rad = {}", rz.phase_per_unit);
            println!("contrast = {}", rz.contrast);
            println!("residual_norm = {}", rz.residual_norm);
        }
    }
    Ok(true)
}

fn compile(a: CompileArgs) -> Result<bool> {
    let seq = read_sequence(&a.sequence)?;
    println!(
        "{} qubits, {} segments x {} cycles, resonant {:.6e} s, total {:.6e} s",
        seq.nqubits,
        seq.segments.len(),
        seq.cycles,
        seq.resonant_duration() * seq.cycles as f64,
        seq.total_duration()
    );
    let needs_device = a.check_frames || a.compensate;
    let dev = match (&a.device, needs_device) {
        (Some(p), _) => Some(DeviceParams::from_file(p)?),
        (None, true) => Some(DeviceParams::bundled_for(seq.nqubits)?),
        (None, false) => None,
    };
    let mut ok = true;
    if a.check_frames {
        let dev = dev.as_ref().expect("device loaded");
        let audit = frame_audit(&seq, dev)?;
        ok = audit.max_residual <= FRAME_TOL;
        println!(
            "frame audit: {} work entries, max residual {:.3e} rad on qubit {} ({})",
            audit.work_entries,
            audit.max_residual,
            audit.worst_site,
            if ok { "ok" } else { "UNCOMPENSATED" }
        );
    }
    if a.compensate {
        let fixed = insert_frame_compensation(&seq, dev.as_ref().expect("device loaded"))?;
        print!("{}", format_sequence(&fixed));
    } else if ok {
        let u = compile_to_unitary_with(&seq, &CompileOptions { check_frames: None })?;
        println!("unitary {}x{}, unitarity deviation {:.3e}", u.nrows(), u.ncols(), unitarity_deviation(&u));
    }
    Ok(ok)
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    let outcome = match cli.command {
        Command::Experiment(a) => experiment(a),
        Command::Calibrate(a) => calibrate(a),
        Command::Compile(a) => compile(a),
        Command::Device {
            command: DeviceCommand::Show { file },
        } => DeviceParams::from_file(&file).map(|d| {
            print!("{d}");
            true
        }),
    };
    match outcome {
        Ok(true) => ExitCode::SUCCESS,
        Ok(false) => ExitCode::from(1),
        Err(e) => {
            eprintln!("error: {e}");
            ExitCode::from(2)
        }
    }
}
