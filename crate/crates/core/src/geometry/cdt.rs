//! Constrained Delaunay triangulation without Steiner points.
//!
//! The triangulation is built in two passes. A greedy pass inserts every
//! constraint segment and then every other vertex pair (shortest first) that
//! crosses nothing already present; the result is a maximal planar straight
//! line graph, i.e. a triangulation of the convex hull honouring all
//! constraints. Lawson flips then restore the empty-circumcircle property on
//! every unconstrained edge. Cocircular ties are broken by symbolically
//! lowering the lifted height of lexicographically smaller vertices, which
//! makes the output unique for a given vertex set and constraint set.

use std::collections::{BTreeSet, HashMap};

use super::{
    incircle, orient, point_in_polygon, segments_cross, strictly_inside_segment, Environment,
    GeometryError, Location, Point2, MERGE_TOLERANCE,
};

#[derive(Debug, Clone, PartialEq)]
pub struct Triangulation {
    /// Vertices in lexicographic (x, y) order.
    pub vertices: Vec<Point2>,
    /// Counter-clockwise triangles, each rotated so the smallest index comes
    /// first, sorted.
    pub triangles: Vec<[usize; 3]>,
    /// Constrained edges as `(min, max)` index pairs.
    pub constrained_edges: BTreeSet<(usize, usize)>,
    /// Indices into `triangles` of the triangles outside every obstacle.
    pub free_triangles: Vec<usize>,
    /// For each triangle, the obstacle containing it (if any).
    pub obstacle_of: Vec<Option<usize>>,
}

impl Triangulation {
    pub fn triangle_points(&self, t: usize) -> [Point2; 3] {
        self.triangles[t].map(|i| self.vertices[i])
    }

    pub fn triangle_area(&self, t: usize) -> f64 {
        let [a, b, c] = self.triangle_points(t);
        super::cross(a, b, c) / 2.0
    }

    pub fn free_area(&self) -> f64 {
        self.free_triangles.iter().map(|&t| self.triangle_area(t)).sum()
    }

    pub fn is_constrained(&self, a: usize, b: usize) -> bool {
        self.constrained_edges.contains(&(a.min(b), a.max(b)))
    }

    /// Map from undirected edge to the triangles using it.
    pub fn edge_triangles(&self) -> HashMap<(usize, usize), Vec<usize>> {
        let mut map: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
        for (t, tri) in self.triangles.iter().enumerate() {
            for k in 0..3 {
                let (a, b) = (tri[k], tri[(k + 1) % 3]);
                map.entry((a.min(b), a.max(b))).or_default().push(t);
            }
        }
        map
    }

    /// Unconstrained edges that are not locally Delaunay (the opposite vertex
    /// of one adjacent triangle lies strictly inside the circumcircle of the
    /// other). Empty for a valid output; `free_only` restricts the check to
    /// edges between two free triangles.
    pub fn non_delaunay_edges(&self, free_only: bool) -> Vec<(usize, usize)> {
        let free: Vec<bool> = {
            let mut f = vec![false; self.triangles.len()];
            for &t in &self.free_triangles {
                f[t] = true;
            }
            f
        };
        let mut bad = Vec::new();
        for (&(a, b), ts) in &self.edge_triangles() {
            if ts.len() != 2 || self.is_constrained(a, b) {
                continue;
            }
            if free_only && !(free[ts[0]] && free[ts[1]]) {
                continue;
            }
            let opp = |t: usize| {
                *self.triangles[t].iter().find(|&&v| v != a && v != b).expect("triangle has 3 vertices")
            };
            let [p, q, r] = self.triangle_points(ts[0]);
            let d = self.vertices[opp(ts[1])];
            if incircle(p, q, r, d) > 0 {
                bad.push((a, b));
            }
        }
        bad.sort_unstable();
        bad
    }
}

/// Constrained Delaunay triangulation of `points` (whose convex hull is
/// triangulated) honouring the `constraints` index pairs. All triangles are
/// reported free.
pub fn triangulate(
    points: &[Point2],
    constraints: &[(usize, usize)],
) -> Result<Triangulation, GeometryError> {
    let raw = build(points, constraints)?;
    let free_triangles = (0..raw.triangles.len()).collect();
    let obstacle_of = vec![None; raw.triangles.len()];
    Ok(Triangulation {
        vertices: raw.vertices,
        triangles: raw.triangles,
        constrained_edges: raw.constrained,
        free_triangles,
        obstacle_of,
    })
}

/// Triangulates the bounding box of `env` with every obstacle edge and every
/// box edge constrained. Obstacle vertices lying on the box boundary split
/// the box edges.
pub fn constrained_delaunay(env: &Environment) -> Result<Triangulation, GeometryError> {
    env.validate_geometry()?;
    let mut points: Vec<Point2> = Vec::new();
    let index_of = |p: Point2, points: &mut Vec<Point2>| -> usize {
        if let Some(i) = points.iter().position(|q| q.dist(&p) <= MERGE_TOLERANCE) {
            i
        } else {
            points.push(p);
            points.len() - 1
        }
    };
    let mut constraints = Vec::new();
    let corners: Vec<usize> = env.bounds.corners().iter().map(|&c| index_of(c, &mut points)).collect();
    for k in 0..4 {
        constraints.push((corners[k], corners[(k + 1) % 4]));
    }
    for obs in &env.obstacles {
        let ids: Vec<usize> = obs.vertices().iter().map(|&v| index_of(v, &mut points)).collect();
        let unique: BTreeSet<usize> = ids.iter().copied().collect();
        if unique.len() != ids.len() {
            return Err(GeometryError::DegenerateInput("obstacle vertices coincide".into()));
        }
        for k in 0..ids.len() {
            constraints.push((ids[k], ids[(k + 1) % ids.len()]));
        }
    }
    let raw = build(&points, &constraints)?;

    let mut obstacle_of = Vec::with_capacity(raw.triangles.len());
    let mut free_triangles = Vec::new();
    for (t, tri) in raw.triangles.iter().enumerate() {
        let [a, b, c] = tri.map(|i| raw.vertices[i]);
        let centroid = Point2::new((a.x + b.x + c.x) / 3.0, (a.y + b.y + c.y) / 3.0);
        let mut owner = None;
        for (o, obs) in env.obstacles.iter().enumerate() {
            if point_in_polygon(centroid, obs) == Location::Inside {
                if owner.is_some() {
                    return Err(GeometryError::DegenerateInput("overlapping obstacles".into()));
                }
                owner = Some(o);
            }
        }
        if owner.is_none() {
            free_triangles.push(t);
        }
        obstacle_of.push(owner);
    }
    Ok(Triangulation {
        vertices: raw.vertices,
        triangles: raw.triangles,
        constrained_edges: raw.constrained,
        free_triangles,
        obstacle_of,
    })
}

struct Raw {
    vertices: Vec<Point2>,
    triangles: Vec<[usize; 3]>,
    constrained: BTreeSet<(usize, usize)>,
}

fn build(points: &[Point2], constraints: &[(usize, usize)]) -> Result<Raw, GeometryError> {
    if points.iter().any(|p| !p.is_finite()) {
        return Err(GeometryError::NonFinite);
    }
    if points.len() < 3 {
        return Err(GeometryError::DegenerateInput("fewer than 3 vertices".into()));
    }
    // Relabel lexicographically.
    let mut order: Vec<usize> = (0..points.len()).collect();
    order.sort_by(|&a, &b| points[a].lex_cmp(&points[b]));
    let mut new_index = vec![0; points.len()];
    for (k, &i) in order.iter().enumerate() {
        new_index[i] = k;
    }
    let vertices: Vec<Point2> = order.iter().map(|&i| points[i]).collect();
    for w in vertices.windows(2) {
        if w[0].dist(&w[1]) <= MERGE_TOLERANCE {
            return Err(GeometryError::DegenerateInput(format!("duplicate vertex {}", w[0])));
        }
    }
    let n = vertices.len();
    if (2..n).all(|k| orient(vertices[0], vertices[1], vertices[k]) == 0) {
        return Err(GeometryError::DegenerateInput("all vertices collinear".into()));
    }

    // Split constraint segments at vertices lying on them.
    let mut constrained = BTreeSet::new();
    for &(a, b) in constraints {
        let (a, b) = (new_index[a], new_index[b]);
        if a == b {
            return Err(GeometryError::DegenerateInput("zero-length constraint".into()));
        }
        let (pa, pb) = (vertices[a], vertices[b]);
        let mut on: Vec<usize> =
            (0..n).filter(|&k| strictly_inside_segment(pa, pb, vertices[k])).collect();
        on.push(a);
        on.push(b);
        on.sort_by(|&u, &v| {
            let du = vertices[u].sub(&pa);
            let dv = vertices[v].sub(&pa);
            (du.x * du.x + du.y * du.y).total_cmp(&(dv.x * dv.x + dv.y * dv.y))
        });
        for w in on.windows(2) {
            constrained.insert((w[0].min(w[1]), w[0].max(w[1])));
        }
    }
    let cons: Vec<(usize, usize)> = constrained.iter().copied().collect();
    for i in 0..cons.len() {
        for j in (i + 1)..cons.len() {
            let (a, b) = cons[i];
            let (c, d) = cons[j];
            if segments_cross(vertices[a], vertices[b], vertices[c], vertices[d]) {
                return Err(GeometryError::DegenerateInput(format!(
                    "constraint edges {a}-{b} and {c}-{d} cross"
                )));
            }
        }
    }

    let edges = greedy_edges(&vertices, &cons);
    let mut triangles = faces(&vertices, &edges)?;
    lawson_flips(&vertices, &mut triangles, &constrained);
    for t in triangles.iter_mut() {
        let k = (0..3).min_by_key(|&k| t[k]).expect("nonempty");
        t.rotate_left(k);
    }
    triangles.sort_unstable();
    Ok(Raw { vertices, triangles, constrained })
}

fn greedy_edges(vertices: &[Point2], constraints: &[(usize, usize)]) -> Vec<(usize, usize)> {
    let n = vertices.len();
    let mut present: BTreeSet<(usize, usize)> = constraints.iter().copied().collect();
    let mut edges: Vec<(usize, usize)> = constraints.to_vec();
    let mut candidates: Vec<(f64, usize, usize)> = Vec::with_capacity(n * (n - 1) / 2);
    for i in 0..n {
        for j in (i + 1)..n {
            if !present.contains(&(i, j)) {
                let d = vertices[i].sub(&vertices[j]);
                candidates.push((d.x * d.x + d.y * d.y, i, j));
            }
        }
    }
    candidates.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.cmp(&b.1)).then(a.2.cmp(&b.2)));
    for (_, i, j) in candidates {
        let (p, q) = (vertices[i], vertices[j]);
        if (0..n).any(|k| k != i && k != j && strictly_inside_segment(p, q, vertices[k])) {
            continue;
        }
        if edges.iter().any(|&(a, b)| {
            a != i && a != j && b != i && b != j && segments_cross(p, q, vertices[a], vertices[b])
        }) {
            continue;
        }
        present.insert((i, j));
        edges.push((i, j));
    }
    edges
}

/// Exact counter-clockwise angular comparison of directions `u` and `v`
/// (both nonzero), starting from the positive x axis.
fn angle_cmp(origin: Point2, u: Point2, v: Point2) -> std::cmp::Ordering {
    let half = |p: Point2| {
        let d = p.sub(&origin);
        if d.y > 0.0 || (d.y == 0.0 && d.x > 0.0) {
            0
        } else {
            1
        }
    };
    half(u).cmp(&half(v)).then_with(|| 0.cmp(&orient(origin, u, v)))
}

fn faces(vertices: &[Point2], edges: &[(usize, usize)]) -> Result<Vec<[usize; 3]>, GeometryError> {
    let n = vertices.len();
    let mut adj: Vec<Vec<usize>> = vec![Vec::new(); n];
    for &(a, b) in edges {
        adj[a].push(b);
        adj[b].push(a);
    }
    for (v, nbrs) in adj.iter_mut().enumerate() {
        nbrs.sort_by(|&a, &b| angle_cmp(vertices[v], vertices[a], vertices[b]));
    }
    let position: Vec<HashMap<usize, usize>> = adj
        .iter()
        .map(|nbrs| nbrs.iter().enumerate().map(|(k, &u)| (u, k)).collect())
        .collect();
    let mut used: BTreeSet<(usize, usize)> = BTreeSet::new();
    let mut triangles = Vec::new();
    for &(a, b) in edges {
        for (start, next) in [(a, b), (b, a)] {
            if used.contains(&(start, next)) {
                continue;
            }
            let mut cycle = vec![start];
            let (mut u, mut v) = (start, next);
            loop {
                used.insert((u, v));
                if v == start {
                    break;
                }
                cycle.push(v);
                // Next vertex: neighbour of v preceding u in counter-clockwise order.
                let k = position[v][&u];
                let w = adj[v][(k + adj[v].len() - 1) % adj[v].len()];
                u = v;
                v = w;
                if cycle.len() > n + 1 {
                    return Err(GeometryError::DegenerateInput("face walk did not close".into()));
                }
            }
            let area: f64 = super::signed_area(&cycle.iter().map(|&i| vertices[i]).collect::<Vec<_>>());
            if area > 0.0 {
                if cycle.len() != 3 {
                    return Err(GeometryError::DegenerateInput(format!(
                        "non-triangular bounded face of {} vertices",
                        cycle.len()
                    )));
                }
                triangles.push([cycle[0], cycle[1], cycle[2]]);
            }
        }
    }
    Ok(triangles)
}

/// Whether the unconstrained edge `ab` (between CCW triangles `abc` and
/// `bad`) should be flipped to `cd`.
fn illegal(vertices: &[Point2], a: usize, b: usize, c: usize, d: usize) -> bool {
    match incircle(vertices[a], vertices[b], vertices[c], vertices[d]) {
        1 => true,
        0 => c.min(d) < a.min(b),
        _ => false,
    }
}

fn lawson_flips(
    vertices: &[Point2],
    triangles: &mut [[usize; 3]],
    constrained: &BTreeSet<(usize, usize)>,
) {
    let key = |a: usize, b: usize| (a.min(b), a.max(b));
    let mut edge_map: HashMap<(usize, usize), Vec<usize>> = HashMap::new();
    for (t, tri) in triangles.iter().enumerate() {
        for k in 0..3 {
            edge_map.entry(key(tri[k], tri[(k + 1) % 3])).or_default().push(t);
        }
    }
    let mut stack: Vec<(usize, usize)> = {
        let mut all: Vec<_> = edge_map.keys().copied().filter(|e| !constrained.contains(e)).collect();
        all.sort_unstable();
        all.reverse();
        all
    };
    let opposite = |tri: &[usize; 3], a: usize, b: usize| -> usize {
        *tri.iter().find(|&&v| v != a && v != b).expect("triangle has a third vertex")
    };
    while let Some(e) = stack.pop() {
        if constrained.contains(&e) {
            continue;
        }
        let Some(ts) = edge_map.get(&e) else { continue };
        if ts.len() != 2 {
            continue;
        }
        let (t1, t2) = (ts[0], ts[1]);
        // Orient so that t1 = (a, b, c) is counter-clockwise.
        let tri1 = triangles[t1];
        let k = (0..3)
            .find(|&k| {
                let (x, y) = (tri1[k], tri1[(k + 1) % 3]);
                key(x, y) == e
            })
            .expect("edge belongs to triangle");
        let (a, b) = (tri1[k], tri1[(k + 1) % 3]);
        let c = opposite(&tri1, a, b);
        let d = opposite(&triangles[t2], a, b);
        if !illegal(vertices, a, b, c, d) {
            continue;
        }
        if orient(vertices[c], vertices[d], vertices[b]) <= 0
            || orient(vertices[d], vertices[c], vertices[a]) <= 0
        {
            continue;
        }
        triangles[t1] = [c, d, b];
        triangles[t2] = [d, c, a];
        edge_map.remove(&e);
        edge_map.insert(key(c, d), vec![t1, t2]);
        for (edge, from, to) in [((a, c), t1, t2), ((b, d), t2, t1)] {
            if let Some(v) = edge_map.get_mut(&key(edge.0, edge.1)) {
                for t in v.iter_mut() {
                    if *t == from {
                        *t = to;
                    }
                }
            }
        }
        for (x, y) in [(a, c), (c, b), (b, d), (d, a)] {
            stack.push(key(x, y));
        }
    }
}
