//! Biclique covers of conflict graphs.
//!
//! The cover is computed by divide and conquer on the complement of the
//! conflict graph (a finite element graph for planar partitions): a vertex
//! separator `(A, B, C)` of that graph has no edge between `A` and `B`, so
//! `A × B` is a biclique of the conflict graph; recursing on `A ∪ C` and
//! `B ∪ C` covers the remaining conflict edges.

mod cover;
mod separator;

pub use cover::{biclique_cover, biclique_cover_with_report, CoverReport, CoverStats, SeparatorRecord};
pub use separator::{postprocess, separator, SeparatorResult};

use std::collections::BTreeSet;
use std::fmt::Write as _;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cdc::{CdcInstance, ConflictGraph};

/// One level `(A^j, B^j)` of an independent-branching scheme.
#[derive(Debug, Clone, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
pub struct Level {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
}

impl Level {
    pub fn new(mut a: Vec<usize>, mut b: Vec<usize>) -> Self {
        a.sort_unstable();
        a.dedup();
        b.sort_unstable();
        b.dedup();
        Self { a, b }
    }

    fn size(&self) -> usize {
        self.a.len() + self.b.len()
    }

    /// Order-insensitive key: `(A, B)` and `(B, A)` cover the same edges.
    fn unordered_key(&self) -> (Vec<usize>, Vec<usize>) {
        if self.a <= self.b {
            (self.a.clone(), self.b.clone())
        } else {
            (self.b.clone(), self.a.clone())
        }
    }

    /// Complete-bipartite in `conflict` with disjoint sides.
    pub fn is_biclique_of(&self, conflict: &ConflictGraph) -> bool {
        self.a.iter().all(|&u| self.b.iter().all(|&v| u != v && conflict.has_edge(u, v)))
    }
}

/// Ordered list of levels; the depth of the scheme is the number of levels.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct BicliqueCover {
    levels: Vec<Level>,
}

#[derive(Debug, Error, Clone, PartialEq, Eq)]
pub enum CoverViolation {
    #[error("level {0} has an empty side")]
    EmptySide(usize),
    #[error("level {level}: vertex {vertex} on both sides")]
    Overlap { level: usize, vertex: usize },
    #[error("level {level}: ({a}, {b}) is not a conflict edge")]
    NotBiclique { level: usize, a: usize, b: usize },
    #[error("conflict edge ({0}, {1}) is not covered")]
    Uncovered(usize, usize),
    #[error("level {level}: vertex {vertex} outside the ground set")]
    OutOfRange { level: usize, vertex: usize },
}

#[derive(Debug, Error)]
pub enum CoverParseError {
    #[error("line {0}: expected `level | A | B`")]
    Malformed(usize),
    #[error("line {0}: bad vertex list")]
    BadSet(usize),
    #[error("line {0}: vertex ids are 1-based")]
    ZeroIndex(usize),
    #[error("malformed cover JSON: {0}")]
    Json(#[from] serde_json::Error),
}

impl BicliqueCover {
    pub fn new(levels: Vec<Level>) -> Self {
        Self { levels }
    }

    pub fn levels(&self) -> &[Level] {
        &self.levels
    }

    pub fn depth(&self) -> usize {
        self.levels.len()
    }

    pub fn into_levels(self) -> Vec<Level> {
        self.levels
    }

    /// Text table in the `Level | A | B` layout with 1-based vertex ids.
    pub fn to_table(&self) -> String {
        let mut s = String::from("Level | A | B\n");
        let fmt_set = |v: &[usize]| {
            let items: Vec<String> = v.iter().map(|x| (x + 1).to_string()).collect();
            format!("{{{}}}", items.join(", "))
        };
        for (j, level) in self.levels.iter().enumerate() {
            writeln!(s, "{} | {} | {}", j + 1, fmt_set(&level.a), fmt_set(&level.b))
                .expect("write to string");
        }
        s
    }

    pub fn from_table(text: &str) -> Result<Self, CoverParseError> {
        let mut levels = Vec::new();
        for (lineno, line) in text.lines().enumerate() {
            let line = line.trim();
            if line.is_empty() || line.to_ascii_lowercase().starts_with("level") {
                continue;
            }
            let cols: Vec<&str> = line.split('|').map(str::trim).collect();
            if cols.len() != 3 {
                return Err(CoverParseError::Malformed(lineno + 1));
            }
            let parse_set = |s: &str| -> Result<Vec<usize>, CoverParseError> {
                let inner = s
                    .strip_prefix('{')
                    .and_then(|s| s.strip_suffix('}'))
                    .ok_or(CoverParseError::BadSet(lineno + 1))?;
                inner
                    .split(',')
                    .map(str::trim)
                    .filter(|t| !t.is_empty())
                    .map(|t| match t.parse::<usize>() {
                        Ok(0) => Err(CoverParseError::ZeroIndex(lineno + 1)),
                        Ok(v) => Ok(v - 1),
                        Err(_) => Err(CoverParseError::BadSet(lineno + 1)),
                    })
                    .collect()
            };
            levels.push(Level::new(parse_set(cols[1])?, parse_set(cols[2])?));
        }
        Ok(Self { levels })
    }

    /// `{"levels": [{"a": [...], "b": [...]}, ...]}` with 1-based ids.
    pub fn to_json(&self) -> String {
        let shifted: Vec<Level> = self
            .levels
            .iter()
            .map(|l| Level {
                a: l.a.iter().map(|v| v + 1).collect(),
                b: l.b.iter().map(|v| v + 1).collect(),
            })
            .collect();
        serde_json::to_string_pretty(&serde_json::json!({ "levels": shifted }))
            .expect("cover serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, CoverParseError> {
        #[derive(Deserialize)]
        struct File {
            levels: Vec<Level>,
        }
        let file: File = serde_json::from_str(text)?;
        let mut levels = Vec::with_capacity(file.levels.len());
        for l in file.levels {
            if l.a.contains(&0) || l.b.contains(&0) {
                return Err(CoverParseError::ZeroIndex(0));
            }
            levels.push(Level::new(
                l.a.into_iter().map(|v| v - 1).collect(),
                l.b.into_iter().map(|v| v - 1).collect(),
            ));
        }
        Ok(Self { levels })
    }
}

/// Checks every level is a biclique of `conflict` and every conflict edge is
/// covered; reports the first violation found.
pub fn validate_cover(cover: &BicliqueCover, conflict: &ConflictGraph) -> Result<(), CoverViolation> {
    let n = conflict.n();
    let mut covered = vec![vec![false; n]; n];
    for (j, level) in cover.levels().iter().enumerate() {
        if level.a.is_empty() || level.b.is_empty() {
            return Err(CoverViolation::EmptySide(j));
        }
        for &v in level.a.iter().chain(&level.b) {
            if v >= n {
                return Err(CoverViolation::OutOfRange { level: j, vertex: v });
            }
        }
        if let Some(&v) = level.a.iter().find(|v| level.b.contains(v)) {
            return Err(CoverViolation::Overlap { level: j, vertex: v });
        }
        for &a in &level.a {
            for &b in &level.b {
                if !conflict.has_edge(a, b) {
                    return Err(CoverViolation::NotBiclique { level: j, a, b });
                }
                covered[a][b] = true;
                covered[b][a] = true;
            }
        }
    }
    for (u, v) in conflict.edges() {
        if !covered[u][v] {
            return Err(CoverViolation::Uncovered(u, v));
        }
    }
    Ok(())
}

/// One level `({v}, N(v))` per vertex with a nonempty conflict
/// neighbourhood; levels covering the same edge set are kept once.
pub fn trivial_cover(conflict: &ConflictGraph) -> BicliqueCover {
    let mut seen = BTreeSet::new();
    let mut levels = Vec::new();
    for v in 0..conflict.n() {
        let nbrs = conflict.neighbors(v);
        if nbrs.is_empty() {
            continue;
        }
        let level = Level::new(vec![v], nbrs);
        if seen.insert(level.unordered_key()) {
            levels.push(level);
        }
    }
    BicliqueCover::new(levels)
}

/// Greedy pairwise merging to a fixpoint. Levels are visited by decreasing
/// size; for each pair both `(A∪A', B∪B')` and `(A∪B', B∪A')` are tried and
/// the first that is still a biclique of `conflict` replaces the pair.
pub fn merge_cover(cover: &BicliqueCover, conflict: &ConflictGraph) -> BicliqueCover {
    let mut seen = BTreeSet::new();
    let mut levels: Vec<Level> =
        cover.levels().iter().filter(|l| seen.insert(l.unordered_key())).cloned().collect();
    levels.sort_by(|x, y| y.size().cmp(&x.size()).then_with(|| x.cmp(y)));
    loop {
        let mut merged_any = false;
        let mut i = 0;
        while i < levels.len() {
            let mut j = i + 1;
            while j < levels.len() {
                let (li, lj) = (&levels[i], &levels[j]);
                let candidates = [
                    Level::new(union(&li.a, &lj.a), union(&li.b, &lj.b)),
                    Level::new(union(&li.a, &lj.b), union(&li.b, &lj.a)),
                ];
                if let Some(m) = candidates.into_iter().find(|c| c.is_biclique_of(conflict)) {
                    levels[i] = m;
                    levels.remove(j);
                    merged_any = true;
                    j = i + 1;
                } else {
                    j += 1;
                }
            }
            i += 1;
        }
        if !merged_any {
            break;
        }
    }
    BicliqueCover::new(levels)
}

fn union(x: &[usize], y: &[usize]) -> Vec<usize> {
    let mut v: Vec<usize> = x.iter().chain(y).copied().collect();
    v.sort_unstable();
    v.dedup();
    v
}

/// A planar graph whose elements (faces) are completed into cliques.
/// Vertices carry labels so induced subgraphs report results in the
/// parent's numbering.
#[derive(Debug, Clone)]
pub struct FiniteElementGraph {
    labels: Vec<usize>,
    elements: Vec<Vec<usize>>,
    adjacency: Vec<Vec<bool>>,
    neighbors: Vec<Vec<usize>>,
}

impl FiniteElementGraph {
    /// Vertices `0..n`; every pair inside an element becomes an edge.
    pub fn from_elements(n: usize, elements: Vec<Vec<usize>>) -> Self {
        let mut adjacency = vec![vec![false; n]; n];
        for e in &elements {
            for (k, &u) in e.iter().enumerate() {
                for &v in &e[k + 1..] {
                    if u != v {
                        adjacency[u][v] = true;
                        adjacency[v][u] = true;
                    }
                }
            }
        }
        Self::assemble((0..n).collect(), elements, adjacency)
    }

    /// The complement of the conflict graph of `cdc`, elements = families.
    pub fn from_cdc(cdc: &CdcInstance) -> Self {
        Self::from_elements(cdc.ground_set_size(), cdc.families().to_vec())
    }

    fn assemble(labels: Vec<usize>, elements: Vec<Vec<usize>>, adjacency: Vec<Vec<bool>>) -> Self {
        let neighbors = adjacency
            .iter()
            .map(|row| row.iter().enumerate().filter(|(_, &b)| b).map(|(v, _)| v).collect())
            .collect();
        Self { labels, elements, adjacency, neighbors }
    }

    pub fn n(&self) -> usize {
        self.labels.len()
    }

    pub fn labels(&self) -> &[usize] {
        &self.labels
    }

    pub fn elements(&self) -> &[Vec<usize>] {
        &self.elements
    }

    /// Largest number of boundary vertices of any element.
    pub fn k(&self) -> usize {
        self.elements.iter().map(Vec::len).max().unwrap_or(0)
    }

    pub fn has_edge(&self, u: usize, v: usize) -> bool {
        self.adjacency[u][v]
    }

    pub fn neighbors(&self, v: usize) -> &[usize] {
        &self.neighbors[v]
    }

    pub fn edge_count(&self) -> usize {
        self.neighbors.iter().map(Vec::len).sum::<usize>() / 2
    }

    pub fn is_complete(&self) -> bool {
        let n = self.n();
        self.neighbors.iter().all(|nb| nb.len() + 1 == n)
    }

    /// The conflict graph this graph is the complement of, on local indices.
    pub fn complement(&self) -> ConflictGraph {
        let n = self.n();
        ConflictGraph::from_edges(
            n,
            (0..n)
                .flat_map(|u| ((u + 1)..n).map(move |v| (u, v)))
                .filter(|&(u, v)| !self.adjacency[u][v]),
        )
    }

    /// Subgraph induced by the local vertices `subset` (sorted ascending).
    pub fn induced(&self, subset: &[usize]) -> Self {
        let mut local = vec![usize::MAX; self.n()];
        for (k, &v) in subset.iter().enumerate() {
            local[v] = k;
        }
        let elements = self
            .elements
            .iter()
            .map(|e| e.iter().filter(|&&v| local[v] != usize::MAX).map(|&v| local[v]).collect::<Vec<_>>())
            .filter(|e: &Vec<usize>| e.len() >= 2)
            .collect();
        let adjacency = subset
            .iter()
            .map(|&u| subset.iter().map(|&v| self.adjacency[u][v]).collect())
            .collect();
        let labels = subset.iter().map(|&v| self.labels[v]).collect();
        Self::assemble(labels, elements, adjacency)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lv(a: &[usize], b: &[usize]) -> Level {
        Level::new(a.iter().map(|x| x - 1).collect(), b.iter().map(|x| x - 1).collect())
    }

    fn graph(n: usize, edges: &[(usize, usize)]) -> ConflictGraph {
        ConflictGraph::from_edges(n, edges.iter().map(|&(u, v)| (u - 1, v - 1)))
    }

    #[test]
    fn table_one_shape_parses() {
        let text = "Level | A | B\n\
            1 | {3, 7} | {1, 9, 12}\n\
            2 | {9, 12} | {3, 5, 10}\n\
            3 | {4, 7} | {1, 9}\n\
            4 | {2, 10, 13} | {4, 5, 6, 7, 8}\n\
            5 | {3, 11} | {1, 5, 6, 7, 8, 9}\n\
            6 | {1, 2} | {11, 12}\n\
            7 | {2, 3, 4, 11} | {6, 9, 13}\n\
            8 | {8, 12} | {1, 5, 6, 10}\n";
        let cover = BicliqueCover::from_table(text).unwrap();
        assert_eq!(cover.depth(), 8);
        assert_eq!(cover.levels()[0], lv(&[3, 7], &[1, 9, 12]));
        let max = cover.levels().iter().flat_map(|l| l.a.iter().chain(&l.b)).max().unwrap();
        assert_eq!(*max, 12);
        assert_eq!(cover.to_table(), text);
        assert_eq!(BicliqueCover::from_json(&cover.to_json()).unwrap(), cover);
    }

    #[test]
    fn validate_reports_violations() {
        let g = graph(5, &[(1, 4), (1, 5), (2, 4), (2, 5)]);
        let good = BicliqueCover::new(vec![lv(&[1, 2], &[4, 5])]);
        assert_eq!(validate_cover(&good, &g), Ok(()));
        let missing = BicliqueCover::new(vec![lv(&[1], &[4, 5]), lv(&[2], &[4])]);
        assert_eq!(validate_cover(&missing, &g), Err(CoverViolation::Uncovered(1, 4)));
        let overlap = BicliqueCover::new(vec![lv(&[1, 4], &[4, 5])]);
        assert_eq!(validate_cover(&overlap, &g), Err(CoverViolation::Overlap { level: 0, vertex: 3 }));
        let bad = BicliqueCover::new(vec![lv(&[1, 3], &[4, 5])]);
        assert_eq!(
            validate_cover(&bad, &g),
            Err(CoverViolation::NotBiclique { level: 0, a: 2, b: 3 })
        );
    }

    #[test]
    fn trivial_cover_star_and_empty() {
        let star = graph(5, &[(1, 2), (1, 3), (1, 4), (1, 5)]);
        let cover = trivial_cover(&star);
        assert!(cover.depth() <= 5);
        assert_eq!(cover.levels()[0], lv(&[1], &[2, 3, 4, 5]));
        assert_eq!(validate_cover(&cover, &star), Ok(()));
        assert_eq!(trivial_cover(&graph(4, &[])).depth(), 0);
        let k2 = graph(2, &[(1, 2)]);
        let cover = trivial_cover(&k2);
        assert!(cover.depth() <= 2);
        assert_eq!(merge_cover(&cover, &k2).depth(), 1);
    }

    #[test]
    fn merge_examples() {
        let g = graph(3, &[(1, 2), (1, 3)]);
        let cover = BicliqueCover::new(vec![lv(&[1], &[2]), lv(&[1], &[3])]);
        let merged = merge_cover(&cover, &g);
        assert_eq!(merged.levels(), &[lv(&[1], &[2, 3])]);

        let g = graph(4, &[(1, 2), (3, 4)]);
        let cover = BicliqueCover::new(vec![lv(&[1], &[2]), lv(&[3], &[4])]);
        assert_eq!(merge_cover(&cover, &g).depth(), 2);
    }

    #[test]
    fn finite_element_graph_basics() {
        let g = FiniteElementGraph::from_elements(5, vec![vec![0, 1, 2], vec![2, 3, 4]]);
        assert_eq!(g.k(), 3);
        assert_eq!(g.edge_count(), 6);
        assert!(!g.is_complete());
        assert_eq!(g.complement().edges(), vec![(0, 3), (0, 4), (1, 3), (1, 4)]);
        let sub = g.induced(&[1, 2, 3]);
        assert_eq!(sub.labels(), &[1, 2, 3]);
        assert_eq!(sub.k(), 2);
        assert!(sub.has_edge(0, 1) && sub.has_edge(1, 2) && !sub.has_edge(0, 2));
    }
}
