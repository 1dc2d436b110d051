//! Combinatorial disjunctive constraints over a ground set: the feasibility
//! oracle, the conflict graph of infeasible pairs and the pairwise
//! independent-branching representability test.
//!
//! Ground-set indices are 0-based in memory; text dumps are 1-based.

use std::collections::BTreeSet;
use std::fmt::Write as _;

use thiserror::Error;

use crate::biclique::BicliqueCover;

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CdcError {
    #[error("index {0} outside ground set of size {1}")]
    OutOfRange(usize, usize),
    #[error("family {0} is contained in family {1}")]
    Redundant(usize, usize),
    #[error("ground-set element {0} belongs to no family")]
    Uncovered(usize),
}

/// The family `𝒮` of admissible supports over a ground set `0..n`.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct CdcInstance {
    ground_set_size: usize,
    families: Vec<Vec<usize>>,
}

impl CdcInstance {
    pub fn new(ground_set_size: usize, families: Vec<Vec<usize>>) -> Result<Self, CdcError> {
        let families: Vec<Vec<usize>> = families
            .into_iter()
            .map(|mut f| {
                f.sort_unstable();
                f.dedup();
                f
            })
            .collect();
        let mut covered = vec![false; ground_set_size];
        for f in &families {
            for &v in f {
                if v >= ground_set_size {
                    return Err(CdcError::OutOfRange(v, ground_set_size));
                }
                covered[v] = true;
            }
        }
        if let Some(v) = covered.iter().position(|c| !c) {
            return Err(CdcError::Uncovered(v));
        }
        for (i, s) in families.iter().enumerate() {
            for (j, t) in families.iter().enumerate() {
                if i != j && is_subset(s, t) {
                    return Err(CdcError::Redundant(i, j));
                }
            }
        }
        Ok(Self { ground_set_size, families })
    }

    pub fn ground_set_size(&self) -> usize {
        self.ground_set_size
    }

    pub fn families(&self) -> &[Vec<usize>] {
        &self.families
    }

    /// `t` is contained in some family member. The empty set is feasible.
    pub fn is_feasible(&self, t: &[usize]) -> bool {
        let mut t = t.to_vec();
        t.sort_unstable();
        t.dedup();
        self.families.iter().any(|f| is_subset(&t, f))
    }
}

/// Both slices sorted ascending.
fn is_subset(small: &[usize], big: &[usize]) -> bool {
    let mut it = big.iter();
    small.iter().all(|x| it.by_ref().any(|y| y == x))
}

/// Graph on the ground set whose edges are the infeasible pairs.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct ConflictGraph {
    n: usize,
    adjacency: Vec<Vec<bool>>,
}

impl ConflictGraph {
    pub fn from_edges(n: usize, edges: impl IntoIterator<Item = (usize, usize)>) -> Self {
        let mut adjacency = vec![vec![false; n]; n];
        for (u, v) in edges {
            assert!(u != v && u < n && v < n, "invalid conflict edge ({u}, {v})");
            adjacency[u][v] = true;
            adjacency[v][u] = true;
        }
        Self { n, adjacency }
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[u][v]
    }

    /// Edges as `(u, v)` with `u < v`, ascending.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in 0..self.n {
            for v in (u + 1)..self.n {
                if self.adjacency[u][v] {
                    out.push((u, v));
                }
            }
        }
        out
    }

    pub fn edge_count(&self) -> usize {
        self.adjacency.iter().map(|r| r.iter().filter(|&&b| b).count()).sum::<usize>() / 2
    }

    pub fn neighbors(&self, v: usize) -> Vec<usize> {
        (0..self.n).filter(|&u| self.adjacency[v][u]).collect()
    }

    /// Edges of the complement graph (the feasible pairs).
    pub fn complement_edges(&self) -> Vec<(usize, usize)> {
        let mut out = Vec::new();
        for u in 0..self.n {
            for v in (u + 1)..self.n {
                if !self.adjacency[u][v] {
                    out.push((u, v));
                }
            }
        }
        out
    }

    /// One `u v` line per edge, 1-based.
    pub fn to_edge_list(&self) -> String {
        let mut s = String::new();
        for (u, v) in self.edges() {
            writeln!(s, "{} {}", u + 1, v + 1).expect("write to string");
        }
        s
    }
}

pub fn conflict_graph(c: &CdcInstance) -> ConflictGraph {
    let n = c.ground_set_size();
    let mut feasible = vec![vec![false; n]; n];
    for f in c.families() {
        for (k, &u) in f.iter().enumerate() {
            for &v in &f[k + 1..] {
                feasible[u][v] = true;
                feasible[v][u] = true;
            }
        }
    }
    let edges = (0..n)
        .flat_map(|u| ((u + 1)..n).map(move |v| (u, v)))
        .filter(|&(u, v)| !feasible[u][v])
        .collect::<Vec<_>>();
    ConflictGraph::from_edges(n, edges)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct IbCheck {
    pub representable: bool,
    /// An infeasible triple whose three pairs are all feasible.
    pub witness: Option<[usize; 3]>,
}

/// Pairwise IB-representability of a planar-partition CDC: no triple may be
/// minimal infeasible, i.e. infeasible while each of its pairs is feasible.
pub fn is_pairwise_ib_representable(c: &CdcInstance) -> IbCheck {
    let n = c.ground_set_size();
    let conflict = conflict_graph(c);
    let mut sets: Vec<BTreeSet<usize>> = vec![BTreeSet::new(); n];
    for (fi, f) in c.families().iter().enumerate() {
        for &v in f {
            sets[v].insert(fi);
        }
    }
    for u in 0..n {
        for v in (u + 1)..n {
            if conflict.has_edge(u, v) {
                continue;
            }
            for w in (v + 1)..n {
                if conflict.has_edge(u, w) || conflict.has_edge(v, w) {
                    continue;
                }
                let common = sets[u].iter().any(|f| sets[v].contains(f) && sets[w].contains(f));
                if !common {
                    return IbCheck { representable: false, witness: Some([u, v, w]) };
                }
            }
        }
    }
    IbCheck { representable: true, witness: None }
}

/// Feasibility of `t` under the IB scheme given by a biclique cover:
/// for every level, `t` avoids one of the two sides.
pub fn ib_feasible(cover: &BicliqueCover, t: &[usize]) -> bool {
    cover.levels().iter().all(|level| {
        !t.iter().any(|v| level.a.contains(v)) || !t.iter().any(|v| level.b.contains(v))
    })
}
