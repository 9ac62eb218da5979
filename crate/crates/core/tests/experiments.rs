// Copyright 2026 The mwspin Authors
// SPDX-License-Identifier: Apache-2.0

use mwspin::experiments::{emit_outputs, run_experiment, ExperimentConfig, ExperimentKind};

#[test]
fn every_kind_passes_exactly() {
    for kind in ExperimentKind::ALL {
        let mut cfg = ExperimentConfig::new(kind);
        if kind == ExperimentKind::DmRing {
            cfg.points = Some(11);
        }
        let res = run_experiment(&cfg).unwrap_or_else(|e| panic!("{kind}: {e}"));
        for v in &res.verdicts {
            assert!(v.passed, "{kind}: {} failed: {}", v.name, v.detail);
        }
        for t in &res.traces {
            if let (Some(dev), Some(tol)) = (t.oracle_deviation(), t.oracle_tolerance) {
                assert!(dev <= tol, "{kind}/{}: deviation {dev} above {tol}", t.series.label);
            }
        }
    }
}

#[test]
fn exact_traces_sit_on_the_oracle() {
    for kind in [ExperimentKind::XxzYmag, ExperimentKind::XyzZmag, ExperimentKind::EtaSweep] {
        let res = run_experiment(&ExperimentConfig::new(kind)).unwrap();
        for t in &res.traces {
            let dev = t.oracle_deviation().expect("oracle attached");
            assert!(dev < 1e-9, "{kind}/{}: {dev}", t.series.label);
        }
    }
}

#[test]
fn sampled_runs_stay_near_the_oracle() {
    let mut cfg = ExperimentConfig::new(ExperimentKind::XyzZmag);
    cfg.shots = Some(4000);
    cfg.seed = 12;
    let res = run_experiment(&cfg).unwrap();
    for t in &res.traces {
        let oracle = t.oracle.as_ref().unwrap();
        for (k, (&v, &se)) in t.series.values.iter().zip(&t.series.stderrs).enumerate() {
            assert!((v - oracle[k]).abs() < 5.0 * se.max(1e-3), "{}[{k}]", t.series.label);
        }
    }
}

#[test]
fn outputs_are_written_per_trace() {
    let res = run_experiment(&ExperimentConfig::new(ExperimentKind::EtaSweep)).unwrap();
    let dir = tempfile::tempdir().unwrap();
    let paths = emit_outputs(&res, dir.path()).unwrap();
    assert!(paths.iter().any(|p| p.ends_with("summary.json")));
    assert!(paths.iter().any(|p| p.ends_with("eta_sweep_summary.csv")));
    for t in &res.traces {
        assert!(dir.path().join(format!("{}.csv", t.series.label)).exists());
    }
}
