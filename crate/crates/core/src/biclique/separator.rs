//! Vertex separators for finite element graphs.
//!
//! Candidates come from breadth-first level structures: a single level, or a
//! pair of levels, is removed and the remaining components are packed into
//! two sides. Every candidate is then shrunk by moving separator vertices
//! that touch only one side into that side. The smallest separator meeting
//! the balance and size bounds wins; ties go to the better balance and then
//! to the first candidate generated, so the result is deterministic.

use std::collections::VecDeque;

use super::FiniteElementGraph;

/// Vertex partition `(A, B, C)` with no edge between `A` and `B`, reported
/// in the graph's labels.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct SeparatorResult {
    pub a: Vec<usize>,
    pub b: Vec<usize>,
    pub c: Vec<usize>,
}

impl SeparatorResult {
    /// `4⌊k/2⌋√n`.
    pub fn size_bound(n: usize, k: usize) -> f64 {
        4.0 * (k / 2) as f64 * (n as f64).sqrt()
    }

    /// `⌈2n/3⌉`.
    pub fn side_bound(n: usize) -> usize {
        (2 * n).div_ceil(3)
    }

    pub fn within_bounds(&self, n: usize, k: usize) -> bool {
        let side = Self::side_bound(n);
        self.a.len() <= side && self.b.len() <= side && self.c.len() as f64 <= Self::size_bound(n, k)
    }

    /// Partition of the vertex set and no `A`–`B` edge, checked against `g`.
    pub fn is_separation_of(&self, g: &FiniteElementGraph) -> bool {
        let pos = |label: usize| g.labels().iter().position(|&l| l == label);
        let mut seen = vec![false; g.n()];
        for &v in self.a.iter().chain(&self.b).chain(&self.c) {
            match pos(v) {
                Some(i) if !seen[i] => seen[i] = true,
                _ => return false,
            }
        }
        if !seen.iter().all(|&s| s) {
            return false;
        }
        self.a.iter().all(|&x| self.b.iter().all(|&y| !g.has_edge(pos(x).unwrap(), pos(y).unwrap())))
    }
}

#[derive(Debug, Clone)]
struct Candidate {
    side: Vec<u8>,
    sizes: [usize; 3],
}

const A: u8 = 0;
const B: u8 = 1;
const C: u8 = 2;

impl Candidate {
    fn score(&self, n: usize, k: usize) -> (bool, bool, usize, usize) {
        let [a, b, c] = self.sizes;
        let balanced = 3 * a.max(b) <= 2 * n;
        let small = c as f64 <= SeparatorResult::size_bound(n, k);
        (!(balanced && small), a == 0 || b == 0, c, a.max(b))
    }
}

/// Separator of `g` satisfying the finite-element separator bounds whenever
/// the candidate search finds one; disconnected graphs are separated along
/// components. Either side may come back empty for tiny or dense graphs; see
/// [`postprocess`].
pub fn separator(g: &FiniteElementGraph) -> SeparatorResult {
    let n = g.n();
    let k = g.k();
    let mut best: Option<Candidate> = None;
    let mut consider = |cand: Candidate| {
        let better = match &best {
            None => true,
            Some(b) => cand.score(n, k) < b.score(n, k),
        };
        if better {
            best = Some(cand);
        }
    };

    consider(split_components(g, &vec![false; n]));
    for root in roots(g) {
        let levels = bfs_levels(g, root);
        let r = levels.len();
        for i in 0..r {
            let mut in_c = vec![false; n];
            for &v in &levels[i] {
                in_c[v] = true;
            }
            consider(refine(g, split_components(g, &in_c)));
            for lj in levels.iter().skip(i + 2) {
                let mut in_c2 = in_c.clone();
                for &v in lj {
                    in_c2[v] = true;
                }
                consider(refine(g, split_components(g, &in_c2)));
            }
        }
    }
    let best = best.expect("at least one candidate");
    to_result(g, &best.side)
}

/// Makes both sides nonempty when the graph is not complete: the separator
/// vertex with the fewest neighbours on the nonempty side moves to the empty
/// side and those neighbours move into the separator. Falls back to a
/// non-adjacent pair when no separator vertex qualifies.
pub fn postprocess(g: &FiniteElementGraph, sep: SeparatorResult) -> SeparatorResult {
    if !sep.a.is_empty() && !sep.b.is_empty() {
        return sep;
    }
    if g.is_complete() {
        return sep;
    }
    let n = g.n();
    let local = |label: usize| g.labels().iter().position(|&l| l == label).expect("label in graph");
    let mut side = vec![C; n];
    for &v in &sep.a {
        side[local(v)] = A;
    }
    for &v in &sep.b {
        side[local(v)] = B;
    }
    let (full, empty) = if sep.a.is_empty() { (B, A) } else { (A, B) };
    let full_count = side.iter().filter(|&&s| s == full).count();
    let mut choice: Option<(usize, usize)> = None;
    if full_count > 0 {
        for v in (0..n).filter(|&v| side[v] == C) {
            let cost = g.neighbors(v).iter().filter(|&&u| side[u] == full).count();
            if cost < full_count && choice.is_none_or(|(_, c)| cost < c) {
                choice = Some((v, cost));
            }
        }
    }
    match choice {
        Some((v, _)) => {
            for &u in g.neighbors(v) {
                if side[u] == full {
                    side[u] = C;
                }
            }
            side[v] = empty;
        }
        None => {
            let (u, w) = (0..n)
                .flat_map(|u| ((u + 1)..n).map(move |w| (u, w)))
                .find(|&(u, w)| !g.has_edge(u, w))
                .expect("graph is not complete");
            side = vec![C; n];
            side[u] = A;
            side[w] = B;
        }
    }
    to_result(g, &side)
}

fn to_result(g: &FiniteElementGraph, side: &[u8]) -> SeparatorResult {
    let mut out = SeparatorResult { a: Vec::new(), b: Vec::new(), c: Vec::new() };
    for (v, &s) in side.iter().enumerate() {
        let label = g.labels()[v];
        match s {
            A => out.a.push(label),
            B => out.b.push(label),
            _ => out.c.push(label),
        }
    }
    out.a.sort_unstable();
    out.b.sort_unstable();
    out.c.sort_unstable();
    out
}

fn roots(g: &FiniteElementGraph) -> Vec<usize> {
    let n = g.n();
    if n <= 40 {
        return (0..n).collect();
    }
    let mut roots = vec![0];
    let mut current = 0;
    for _ in 0..4 {
        let levels = bfs_levels(g, current);
        let far = *levels.last().and_then(|l| l.iter().min()).expect("root reaches itself");
        if roots.contains(&far) {
            break;
        }
        roots.push(far);
        current = far;
    }
    let stride = n / 8;
    for v in (stride..n).step_by(stride.max(1)) {
        if !roots.contains(&v) {
            roots.push(v);
        }
    }
    roots
}

fn bfs_levels(g: &FiniteElementGraph, root: usize) -> Vec<Vec<usize>> {
    let mut dist = vec![usize::MAX; g.n()];
    dist[root] = 0;
    let mut queue = VecDeque::from([root]);
    let mut levels: Vec<Vec<usize>> = Vec::new();
    while let Some(v) = queue.pop_front() {
        let d = dist[v];
        if levels.len() <= d {
            levels.push(Vec::new());
        }
        levels[d].push(v);
        for &u in g.neighbors(v) {
            if dist[u] == usize::MAX {
                dist[u] = d + 1;
                queue.push_back(u);
            }
        }
    }
    levels
}

/// Packs the components of `g − C` into two sides, largest first, each
/// going to the currently lighter side.
fn split_components(g: &FiniteElementGraph, in_c: &[bool]) -> Candidate {
    let n = g.n();
    let mut comp = vec![usize::MAX; n];
    let mut comps: Vec<Vec<usize>> = Vec::new();
    for s in 0..n {
        if in_c[s] || comp[s] != usize::MAX {
            continue;
        }
        let id = comps.len();
        let mut members = vec![s];
        comp[s] = id;
        let mut k = 0;
        while k < members.len() {
            let v = members[k];
            k += 1;
            for &u in g.neighbors(v) {
                if !in_c[u] && comp[u] == usize::MAX {
                    comp[u] = id;
                    members.push(u);
                }
            }
        }
        comps.push(members);
    }
    comps.sort_by(|x, y| y.len().cmp(&x.len()).then_with(|| x.iter().min().cmp(&y.iter().min())));
    let mut side: Vec<u8> = in_c.iter().map(|&c| if c { C } else { A }).collect();
    let mut sizes = [0, 0, in_c.iter().filter(|&&c| c).count()];
    for members in comps {
        let target = if sizes[0] <= sizes[1] { A } else { B };
        sizes[target as usize] += members.len();
        for v in members {
            side[v] = target;
        }
    }
    Candidate { side, sizes }
}

/// Moves separator vertices adjacent to at most one side into that side
/// while balance allows.
fn refine(g: &FiniteElementGraph, mut cand: Candidate) -> Candidate {
    let n = g.n();
    let limit = 2 * n / 3;
    loop {
        let mut moved = false;
        for v in 0..n {
            if cand.side[v] != C {
                continue;
            }
            let touches_a = g.neighbors(v).iter().any(|&u| cand.side[u] == A);
            let touches_b = g.neighbors(v).iter().any(|&u| cand.side[u] == B);
            let target = match (touches_a, touches_b) {
                (true, true) => continue,
                (true, false) => A,
                (false, true) => B,
                (false, false) => {
                    if cand.sizes[0] <= cand.sizes[1] {
                        A
                    } else {
                        B
                    }
                }
            };
            if cand.sizes[target as usize] + 1 > limit.max(1) {
                continue;
            }
            cand.side[v] = target;
            cand.sizes[target as usize] += 1;
            cand.sizes[2] -= 1;
            moved = true;
        }
        if !moved {
            return cand;
        }
    }
}
