//! Divide-and-conquer biclique cover of the complement of a finite element
//! graph.

use std::collections::BTreeSet;

use serde::Serialize;

use super::{merge_cover, postprocess, separator, BicliqueCover, FiniteElementGraph, Level, SeparatorResult};
use crate::cdc::ConflictGraph;

/// One separator call made during the recursion.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct SeparatorRecord {
    pub n: usize,
    pub k: usize,
    pub a: usize,
    pub b: usize,
    pub c: usize,
    /// Bounds of the separator as returned, before postprocessing.
    pub within_bounds: bool,
    pub postprocessed: bool,
}

#[derive(Debug, Clone, Default, PartialEq, Serialize)]
pub struct CoverStats {
    pub depth: usize,
    pub separator_calls: usize,
    /// Conflict edges left after the recursion and covered trivially.
    pub residual_edges: usize,
    pub max_recursion_depth: usize,
}

#[derive(Debug, Clone)]
pub struct CoverReport {
    pub cover: BicliqueCover,
    pub stats: CoverStats,
    pub separators: Vec<SeparatorRecord>,
}

impl CoverReport {
    pub fn all_within_bounds(&self) -> bool {
        self.separators.iter().all(|s| s.within_bounds)
    }
}

/// Biclique cover of `g`'s complement, indexed by `g`'s labels. The result
/// is not merged; see [`merge_cover`].
pub fn biclique_cover(g: &FiniteElementGraph) -> BicliqueCover {
    biclique_cover_with_report(g).cover
}

pub fn biclique_cover_with_report(g: &FiniteElementGraph) -> CoverReport {
    let mut levels: Vec<Level> = Vec::new();
    let mut emitted = BTreeSet::new();
    let mut separators = Vec::new();
    let mut visited: BTreeSet<Vec<usize>> = BTreeSet::new();
    let mut max_depth = 0;

    // Local indices of `g`; popped in insertion order reversed, so A∪C is
    // pushed last to be processed first.
    let mut stack: Vec<(Vec<usize>, usize)> = vec![((0..g.n()).collect(), 0)];
    while let Some((subset, depth)) = stack.pop() {
        if subset.len() < 2 || !visited.insert(subset.clone()) {
            continue;
        }
        let sub = g.induced(&subset);
        if sub.is_complete() {
            continue;
        }
        max_depth = max_depth.max(depth);
        let raw = separator(&sub);
        let (n, k) = (sub.n(), sub.k());
        let within_bounds = raw.within_bounds(n, k);
        let needs_fix = raw.a.is_empty() || raw.b.is_empty();
        let sep = if needs_fix { postprocess(&sub, raw.clone()) } else { raw.clone() };
        separators.push(SeparatorRecord {
            n,
            k,
            a: raw.a.len(),
            b: raw.b.len(),
            c: raw.c.len(),
            within_bounds,
            postprocessed: needs_fix,
        });
        debug_assert!(sep.is_separation_of(&sub));

        // Labels of `sub` are labels of `g`; map back to `g`'s local indices.
        let to_local = |labels: &[usize]| -> Vec<usize> {
            labels.iter().map(|l| local_of(g, *l)).collect()
        };
        let level = Level::new(sep.a.clone(), sep.b.clone());
        let key = if level.a <= level.b { (level.a.clone(), level.b.clone()) } else { (level.b.clone(), level.a.clone()) };
        if emitted.insert(key) {
            levels.push(level);
        }
        let SeparatorResult { a, b, c } = sep;
        let mut bc = to_local(&b);
        bc.extend(to_local(&c));
        bc.sort_unstable();
        let mut ac = to_local(&a);
        ac.extend(to_local(&c));
        ac.sort_unstable();
        stack.push((bc, depth + 1));
        stack.push((ac, depth + 1));
    }

    // Recursion covers every conflict edge on genuine finite element graphs;
    // sweep up anything left so the result is always a valid cover.
    let conflict = complement_by_label(g);
    let mut covered = BTreeSet::new();
    for level in &levels {
        for &u in &level.a {
            for &v in &level.b {
                covered.insert((u.min(v), u.max(v)));
            }
        }
    }
    let residual: Vec<(usize, usize)> =
        conflict.edges().into_iter().filter(|e| !covered.contains(e)).collect();
    if !residual.is_empty() {
        let rest = ConflictGraph::from_edges(conflict.n(), residual.iter().copied());
        let sweep = merge_cover(&super::trivial_cover(&rest), &rest);
        levels.extend(sweep.into_levels());
    }

    let cover = BicliqueCover::new(levels);
    let stats = CoverStats {
        depth: cover.depth(),
        separator_calls: separators.len(),
        residual_edges: residual.len(),
        max_recursion_depth: max_depth,
    };
    CoverReport { cover, stats, separators }
}

fn local_of(g: &FiniteElementGraph, label: usize) -> usize {
    g.labels().iter().position(|&l| l == label).expect("label belongs to graph")
}

/// Complement of `g` on the label space `0..=max label`.
fn complement_by_label(g: &FiniteElementGraph) -> ConflictGraph {
    let n = g.labels().iter().max().map_or(0, |m| m + 1);
    let edges: Vec<(usize, usize)> = g
        .complement()
        .edges()
        .into_iter()
        .map(|(u, v)| {
            let (a, b) = (g.labels()[u], g.labels()[v]);
            (a.min(b), a.max(b))
        })
        .collect();
    ConflictGraph::from_edges(n, edges)
}
