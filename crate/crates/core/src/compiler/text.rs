// Copyright 2026 The mwspin Authors
// SPDX-License-Identifier: Apache-2.0

//! Line-oriented sequence format. One directive per line, SI units, `#`
//! starts a comment:
//!
//! ```text
//! nqubits 2
//! cycles 1
//! topology pair
//! edge 0 1 -18849555.921538758
//! rotation 0,1 x -1.5707963267948966 2e-8
//! rotation 0 custom:0.25 3.141592653589793 4e-8
//! virtual_z 1 0.5
//! physical_rz 1:6.2e8 5e-9
//! evolve 1e-7
//! idle 1e-8
//! ```
//!
//! Floats are written in shortest round-trip form, so `parse(format(s)) == s`.

use std::fmt::Write as _;
use std::path::Path;
use std::str::FromStr;

use super::{Axis, Segment, Sequence};
use crate::error::{Error, Result};
use crate::hamiltonians::{CouplingGraph, Edge, Topology};

pub fn format_sequence(seq: &Sequence) -> String {
    let mut s = String::new();
    let _ = writeln!(s, "nqubits {}", seq.nqubits);
    let _ = writeln!(s, "cycles {}", seq.cycles);
    let _ = writeln!(s, "topology {}", seq.graph.topology());
    for e in seq.graph.edges() {
        let _ = writeln!(s, "edge {} {} {:?}", e.i, e.j, e.coupling);
    }
    for seg in &seq.segments {
        match seg {
            Segment::Rotation { sites, axis, angle, duration } => {
                let axis = match axis {
                    Axis::X => "x".to_string(),
                    Axis::Y => "y".to_string(),
                    Axis::Z => "z".to_string(),
                    Axis::Custom(phi) => format!("custom:{phi:?}"),
                };
                let _ = writeln!(s, "rotation {} {axis} {angle:?} {duration:?}", join_sites(sites));
            }
            Segment::VirtualZ { site, phase } => {
                let _ = writeln!(s, "virtual_z {site} {phase:?}");
            }
            Segment::PhysicalRz { detunings, duration } => {
                let list = if detunings.is_empty() {
                    "-".to_string()
                } else {
                    detunings
                        .iter()
                        .map(|(site, w)| format!("{site}:{w:?}"))
                        .collect::<Vec<_>>()
                        .join(",")
                };
                let _ = writeln!(s, "physical_rz {list} {duration:?}");
            }
            Segment::ResonantEvolve { duration } => {
                let _ = writeln!(s, "evolve {duration:?}");
            }
            Segment::Idle { duration } => {
                let _ = writeln!(s, "idle {duration:?}");
            }
        }
    }
    s
}

fn join_sites(sites: &[usize]) -> String {
    sites.iter().map(usize::to_string).collect::<Vec<_>>().join(",")
}

fn field<T: FromStr>(tok: Option<&str>, line: usize, what: &str) -> Result<T> {
    let tok = tok.ok_or_else(|| Error::Parse {
        line,
        message: format!("missing {what}"),
    })?;
    tok.parse().map_err(|_| Error::Parse {
        line,
        message: format!("bad {what} {tok:?}"),
    })
}

pub fn parse_sequence(text: &str) -> Result<Sequence> {
    let mut nqubits: Option<usize> = None;
    let mut cycles = 1usize;
    let mut topology: Option<Topology> = None;
    let mut edges = Vec::new();
    let mut segments = Vec::new();
    for (idx, raw) in text.lines().enumerate() {
        let line = idx + 1;
        let content = raw.split('#').next().unwrap_or("").trim();
        if content.is_empty() {
            continue;
        }
        let mut tok = content.split_whitespace();
        let head = tok.next().unwrap_or_default();
        match head {
            "nqubits" => nqubits = Some(field(tok.next(), line, "qubit count")?),
            "cycles" => cycles = field(tok.next(), line, "cycle count")?,
            "topology" => topology = Some(field(tok.next(), line, "topology")?),
            "edge" => edges.push(Edge {
                i: field(tok.next(), line, "site")?,
                j: field(tok.next(), line, "site")?,
                coupling: field(tok.next(), line, "coupling")?,
            }),
            "rotation" => {
                let sites = tok
                    .next()
                    .ok_or_else(|| Error::Parse { line, message: "missing sites".into() })?
                    .split(',')
                    .map(|s| field(Some(s), line, "site"))
                    .collect::<Result<Vec<usize>>>()?;
                let axis_tok: String = field(tok.next(), line, "axis")?;
                let axis = match axis_tok.as_str() {
                    "x" => Axis::X,
                    "y" => Axis::Y,
                    "z" => Axis::Z,
                    other => match other.strip_prefix("custom:") {
                        Some(phi) => Axis::Custom(field(Some(phi), line, "axis phase")?),
                        None => {
                            return Err(Error::Parse {
                                line,
                                message: format!("unknown axis {other:?}"),
                            })
                        }
                    },
                };
                segments.push(Segment::Rotation {
                    sites,
                    axis,
                    angle: field(tok.next(), line, "angle")?,
                    duration: field(tok.next(), line, "duration")?,
                });
            }
            "virtual_z" => segments.push(Segment::VirtualZ {
                site: field(tok.next(), line, "site")?,
                phase: field(tok.next(), line, "phase")?,
            }),
            "physical_rz" => {
                let list: String = field(tok.next(), line, "detuning list")?;
                let mut detunings = Vec::new();
                if list != "-" {
                    for item in list.split(',') {
                        let (site, w) = item.split_once(':').ok_or_else(|| Error::Parse {
                            line,
                            message: format!("expected site:detuning, got {item:?}"),
                        })?;
                        detunings.push((field(Some(site), line, "site")?, field(Some(w), line, "detuning")?));
                    }
                }
                segments.push(Segment::PhysicalRz {
                    detunings,
                    duration: field(tok.next(), line, "duration")?,
                });
            }
            "evolve" => segments.push(Segment::ResonantEvolve {
                duration: field(tok.next(), line, "duration")?,
            }),
            "idle" => segments.push(Segment::Idle {
                duration: field(tok.next(), line, "duration")?,
            }),
            other => {
                return Err(Error::Parse {
                    line,
                    message: format!("unknown directive {other:?}"),
                })
            }
        }
        if let Some(extra) = tok.next() {
            return Err(Error::Parse {
                line,
                message: format!("unexpected trailing token {extra:?}"),
            });
        }
    }
    let n = nqubits.ok_or_else(|| Error::Parse {
        line: 0,
        message: "missing nqubits directive".into(),
    })?;
    let topology = topology.unwrap_or(match n {
        2 => Topology::Pair,
        _ if n >= 3 && edges.len() == n => Topology::Ring,
        _ => Topology::OpenChain,
    });
    let graph = CouplingGraph::new(n, edges, topology)?;
    Sequence::new(graph, segments, cycles)
}

pub fn read_sequence(path: impl AsRef<Path>) -> Result<Sequence> {
    let path = path.as_ref();
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_sequence(&text)
}

pub fn write_sequence(seq: &Sequence, path: impl AsRef<Path>) -> Result<()> {
    let path = path.as_ref();
    std::fs::write(path, format_sequence(seq)).map_err(|e| Error::io(path, e))
}
