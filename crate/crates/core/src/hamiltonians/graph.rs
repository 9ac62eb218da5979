// Copyright 2026 The mwspin Authors
// SPDX-License-Identifier: Apache-2.0

use std::collections::BTreeSet;
use std::fmt;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result, MAX_QUBITS};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Topology {
    Pair,
    OpenChain,
    Ring,
}

impl fmt::Display for Topology {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Topology::Pair => "pair",
            Topology::OpenChain => "open-chain",
            Topology::Ring => "ring",
        })
    }
}

impl std::str::FromStr for Topology {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "pair" => Ok(Topology::Pair),
            "open-chain" | "chain" => Ok(Topology::OpenChain),
            "ring" => Ok(Topology::Ring),
            other => Err(Error::InvalidGraph(format!("unknown topology {other:?}"))),
        }
    }
}

/// A directed coupling `i -> j` with strength `coupling` in rad/s. The
/// direction only matters for phase-rotated Hamiltonians.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Edge {
    pub i: usize,
    pub j: usize,
    pub coupling: f64,
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct CouplingGraph {
    nqubits: usize,
    edges: Vec<Edge>,
    topology: Topology,
}

impl CouplingGraph {
    pub fn new(nqubits: usize, edges: Vec<Edge>, topology: Topology) -> Result<Self> {
        let g = CouplingGraph {
            nqubits,
            edges,
            topology,
        };
        g.validate()?;
        Ok(g)
    }

    /// Two sites joined by one edge.
    pub fn pair(coupling: f64) -> Self {
        CouplingGraph {
            nqubits: 2,
            edges: vec![Edge { i: 0, j: 1, coupling }],
            topology: Topology::Pair,
        }
    }

    pub fn open_chain(nqubits: usize, coupling: f64) -> Result<Self> {
        let edges = (1..nqubits)
            .map(|k| Edge { i: k - 1, j: k, coupling })
            .collect();
        Self::new(nqubits, edges, Topology::OpenChain)
    }

    /// Ring with edges `(0,1), (1,2), ..., (n-1,0)`.
    pub fn ring(nqubits: usize, coupling: f64) -> Result<Self> {
        let edges = (0..nqubits)
            .map(|k| Edge {
                i: k,
                j: (k + 1) % nqubits,
                coupling,
            })
            .collect();
        Self::new(nqubits, edges, Topology::Ring)
    }

    pub fn nqubits(&self) -> usize {
        self.nqubits
    }

    pub fn edges(&self) -> &[Edge] {
        &self.edges
    }

    pub fn topology(&self) -> Topology {
        self.topology
    }

    /// Copy with every coupling multiplied by `s`.
    pub fn scaled(&self, s: f64) -> CouplingGraph {
        let mut g = self.clone();
        for e in &mut g.edges {
            e.coupling *= s;
        }
        g
    }

    /// Sites `0, 2, 4, ...`; a bipartition for chains and even rings.
    pub fn even_sublattice(&self) -> Vec<usize> {
        (0..self.nqubits).step_by(2).collect()
    }

    pub fn validate(&self) -> Result<()> {
        let n = self.nqubits;
        if n == 0 {
            return Err(Error::InvalidGraph("empty register".into()));
        }
        if n > MAX_QUBITS {
            return Err(Error::Capacity {
                requested: n,
                max: MAX_QUBITS,
            });
        }
        let mut seen = BTreeSet::new();
        let mut degree = vec![0usize; n];
        for e in &self.edges {
            if e.i >= n || e.j >= n {
                return Err(Error::SiteOutOfRange {
                    site: e.i.max(e.j),
                    nqubits: n,
                });
            }
            if e.i == e.j {
                return Err(Error::InvalidGraph(format!("self-loop on site {}", e.i)));
            }
            if !e.coupling.is_finite() {
                return Err(Error::InvalidGraph(format!("non-finite coupling on ({}, {})", e.i, e.j)));
            }
            if !seen.insert((e.i.min(e.j), e.i.max(e.j))) {
                return Err(Error::InvalidGraph(format!("duplicate edge ({}, {})", e.i, e.j)));
            }
            degree[e.i] += 1;
            degree[e.j] += 1;
        }
        let components = self.components();
        match self.topology {
            Topology::Pair => {
                if n != 2 || self.edges.len() > 1 {
                    return Err(Error::InvalidGraph("pair needs 2 sites and at most one edge".into()));
                }
            }
            Topology::OpenChain => {
                // a disjoint union of paths: acyclic with degree <= 2
                if degree.iter().any(|&d| d > 2) || self.edges.len() + components != n {
                    return Err(Error::InvalidGraph("open chain must be a path".into()));
                }
            }
            Topology::Ring => {
                if n < 3 || self.edges.len() != n || degree.iter().any(|&d| d != 2) || components != 1 {
                    return Err(Error::InvalidGraph(
                        "ring edges must form a single cycle over all sites".into(),
                    ));
                }
            }
        }
        Ok(())
    }

    fn components(&self) -> usize {
        let mut parent: Vec<usize> = (0..self.nqubits).collect();
        fn find(p: &mut [usize], x: usize) -> usize {
            let mut r = x;
            while p[r] != r {
                r = p[r];
            }
            p[x] = r;
            r
        }
        for e in &self.edges {
            let (a, b) = (find(&mut parent, e.i), find(&mut parent, e.j));
            parent[a] = b;
        }
        (0..self.nqubits).filter(|&x| find(&mut parent, x) == x).count()
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn builders_validate() {
        assert_eq!(CouplingGraph::ring(8, 1.0).unwrap().edges().len(), 8);
        assert_eq!(CouplingGraph::open_chain(3, 1.0).unwrap().edges().len(), 2);
        CouplingGraph::pair(1.0).validate().unwrap();
    }

    #[test]
    fn rejects_bad_edges() {
        let e = |i, j| Edge { i, j, coupling: 1.0 };
        assert!(CouplingGraph::new(2, vec![e(0, 0)], Topology::Pair).is_err());
        assert!(CouplingGraph::new(3, vec![e(0, 1), e(1, 0)], Topology::OpenChain).is_err());
        assert!(CouplingGraph::new(3, vec![e(0, 1), e(1, 2)], Topology::Ring).is_err());
        assert!(CouplingGraph::new(3, vec![e(0, 1), e(1, 2), e(2, 0)], Topology::OpenChain).is_err());
        // two triangles are not a single ring
        let two = vec![e(0, 1), e(1, 2), e(2, 0), e(3, 4), e(4, 5), e(5, 3)];
        assert!(CouplingGraph::new(6, two, Topology::Ring).is_err());
    }

    #[test]
    fn empty_edge_list_is_a_chain() {
        CouplingGraph::new(3, vec![], Topology::OpenChain).unwrap();
    }
}
