// Copyright 2026 The mwspin Authors
// SPDX-License-Identifier: Apache-2.0

use std::fmt::Write as _;
use std::path::{Path, PathBuf};

use serde_json::json;

use super::run::{EtaRow, ExperimentResult};
use crate::error::{Error, Result};

fn write(path: PathBuf, text: &str) -> Result<PathBuf> {
    std::fs::write(&path, text).map_err(|e| Error::io(&path, e))?;
    Ok(path)
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |x| x.to_string())
}

pub fn eta_table_csv(rows: &[EtaRow]) -> String {
    let mut out = String::from(
        "eta,fitted_frequency_hz,frequency_stderr_hz,oracle_frequency_hz,predicted_frequency_hz,ratio,amplitude\n",
    );
    for r in rows {
        let _ = writeln!(
            out,
            "{},{},{},{},{},{},{}",
            r.eta,
            r.fitted_frequency,
            r.frequency_stderr,
            r.oracle_frequency,
            r.predicted_frequency,
            opt(r.ratio),
            r.amplitude
        );
    }
    out
}

/// JSON summary: config echo, fits, oracle deviations, scalars and verdicts.
pub fn summary_json(res: &ExperimentResult) -> serde_json::Value {
    let traces: Vec<_> = res
        .traces
        .iter()
        .map(|t| {
            json!({
                "label": t.series.label,
                "observable": t.series.observable,
                "file": format!("{}.csv", t.series.label),
                "samples": t.series.len(),
                "params": t.params,
                "fit": t.fit,
                "oracle_max_deviation": t.oracle_deviation(),
                "oracle_tolerance": t.oracle_tolerance,
            })
        })
        .collect();
    let mut v = json!({
        "kind": res.config.kind.name(),
        "device": res.device,
        "config": res.config,
        "traces": traces,
        "scalars": res.scalars,
        "verdicts": res.verdicts,
        "passed": res.passed(),
    });
    if let Some(rows) = &res.eta_table {
        v["eta_sweep"] = json!(rows);
    }
    v
}

/// Writes one CSV per trace (plus `<label>_oracle.csv` where an oracle
/// exists), `eta_sweep_summary.csv` for sweeps, and `summary.json`.
/// Returns the written paths in order.
pub fn emit_outputs(res: &ExperimentResult, dir: impl AsRef<Path>) -> Result<Vec<PathBuf>> {
    let dir = dir.as_ref();
    std::fs::create_dir_all(dir).map_err(|e| Error::io(dir, e))?;
    let mut paths = Vec::new();
    for t in &res.traces {
        paths.push(write(dir.join(format!("{}.csv", t.series.label)), &t.series.to_csv())?);
        if let Some(o) = &t.oracle {
            let mut s = t.series.clone();
            s.values = o.clone();
            s.stderrs = vec![0.0; o.len()];
            paths.push(write(dir.join(format!("{}_oracle.csv", t.series.label)), &s.to_csv())?);
        }
    }
    if let Some(rows) = &res.eta_table {
        paths.push(write(dir.join("eta_sweep_summary.csv"), &eta_table_csv(rows))?);
    }
    let text = serde_json::to_string_pretty(&summary_json(res)).expect("summary serializes");
    paths.push(write(dir.join("summary.json"), &(text + "\n"))?);
    Ok(paths)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::experiments::{run_experiment, ExperimentConfig, ExperimentKind};

    #[test]
    fn outputs_are_deterministic() {
        let mut cfg = ExperimentConfig::new(ExperimentKind::XxzYmag);
        cfg.eta = Some(vec![0.18]);
        cfg.shots = Some(200);
        cfg.seed = 11;
        let a = tempfile::tempdir().unwrap();
        let b = tempfile::tempdir().unwrap();
        let pa = emit_outputs(&run_experiment(&cfg).unwrap(), a.path()).unwrap();
        let pb = emit_outputs(&run_experiment(&cfg).unwrap(), b.path()).unwrap();
        assert_eq!(pa.len(), pb.len());
        for (x, y) in pa.iter().zip(&pb) {
            assert_eq!(std::fs::read(x).unwrap(), std::fs::read(y).unwrap());
        }
        let summary: serde_json::Value =
            serde_json::from_str(&std::fs::read_to_string(a.path().join("summary.json")).unwrap()).unwrap();
        let echo = ExperimentConfig::from_json(&summary["config"].to_string()).unwrap();
        assert_eq!(echo, cfg);
        let csv = std::fs::read_to_string(a.path().join("eta_0.18.csv")).unwrap();
        assert!(csv.starts_with("time_s,value,stderr\n"));
    }
}
