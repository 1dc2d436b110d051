//! Disjunctive "waypoint lies in one free face" constraints.

use serde::Serialize;

use super::{Group, MipModel, Sense};
use crate::biclique::BicliqueCover;
use crate::geometry::Rect;
use crate::partition::{FaceHalfspaces, Partition};

/// One `M` per halfspace row, per face.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BigMData {
    pub faces: Vec<FaceHalfspaces>,
    pub m: Vec<Vec<f64>>,
}

/// `M_k = Σ_j max(a_kj·lo_j, a_kj·hi_j)`: the largest value row `k` takes
/// over `bounds`.
pub fn big_m_values(faces: &[FaceHalfspaces], bounds: &Rect) -> BigMData {
    let lo = [bounds.min.x, bounds.min.y];
    let hi = [bounds.max.x, bounds.max.y];
    let m = faces
        .iter()
        .map(|f| f.rows.iter().map(|(a, _)| (0..2).map(|j| (a[j] * lo[j]).max(a[j] * hi[j])).sum()).collect())
        .collect();
    BigMData { faces: faces.to_vec(), m }
}

/// Indices of a waypoint's coordinate variables.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub struct WaypointVars {
    pub x: usize,
    pub y: usize,
}

/// One binary per face, `a·x + (M − b)·z ≤ M` per row, `Σz = 1`. Returns
/// the face binaries.
pub fn add_big_m_waypoint(model: &mut MipModel, data: &BigMData, w: WaypointVars, tag: &str) -> Vec<usize> {
    let z: Vec<usize> =
        (0..data.faces.len()).map(|i| model.add_binary(format!("z_{tag}_{}", i + 1), Group::Assignment)).collect();
    for (i, face) in data.faces.iter().enumerate() {
        for (k, (a, b)) in face.rows.iter().enumerate() {
            let m = data.m[i][k];
            model.add_constraint(
                format!("bm_{tag}_{}_{}", i + 1, k + 1),
                vec![(w.x, a[0]), (w.y, a[1]), (z[i], m - b)],
                Sense::Le,
                m,
                Group::Assignment,
            );
        }
    }
    model.add_constraint(
        format!("one_{tag}"),
        z.iter().map(|&v| (v, 1.0)).collect(),
        Sense::Eq,
        1.0,
        Group::Assignment,
    );
    z
}

/// Convex multipliers over the ground set with one binary per level:
/// `Σ_{A^j} λ ≤ z_j`, `Σ_{B^j} λ ≤ 1 − z_j`, `Σλ = 1`, and the waypoint is
/// `Σ λ_v v`. Returns `(λ, z)`.
pub fn add_ib_waypoint(
    model: &mut MipModel,
    p: &Partition,
    cover: &BicliqueCover,
    w: WaypointVars,
    tag: &str,
) -> (Vec<usize>, Vec<usize>) {
    let lambda: Vec<usize> = (0..p.ground_set.len())
        .map(|v| model.add_continuous(format!("lam_{tag}_{}", v + 1), 0.0, 1.0, Group::Assignment))
        .collect();
    let z: Vec<usize> = (0..cover.depth())
        .map(|j| model.add_binary(format!("z_{tag}_{}", j + 1), Group::Assignment))
        .collect();
    for (j, level) in cover.levels().iter().enumerate() {
        let mut left: Vec<(usize, f64)> = level.a.iter().map(|&v| (lambda[v], 1.0)).collect();
        left.push((z[j], -1.0));
        model.add_constraint(format!("ibl_{tag}_{}", j + 1), left, Sense::Le, 0.0, Group::Assignment);
        let mut right: Vec<(usize, f64)> = level.b.iter().map(|&v| (lambda[v], 1.0)).collect();
        right.push((z[j], 1.0));
        model.add_constraint(format!("ibr_{tag}_{}", j + 1), right, Sense::Le, 1.0, Group::Assignment);
    }
    model.add_constraint(
        format!("cvx_{tag}"),
        lambda.iter().map(|&l| (l, 1.0)).collect(),
        Sense::Eq,
        1.0,
        Group::Assignment,
    );
    for (coord, var) in [(0, w.x), (1, w.y)] {
        let mut terms = vec![(var, 1.0)];
        for (v, &l) in lambda.iter().enumerate() {
            let q = p.ground_set[v];
            terms.push((l, -if coord == 0 { q.x } else { q.y }));
        }
        let axis = if coord == 0 { "x" } else { "y" };
        model.add_constraint(format!("link{axis}_{tag}"), terms, Sense::Eq, 0.0, Group::Linking);
    }
    (lambda, z)
}

fn coordinates(model: &mut MipModel, p: &Partition) -> WaypointVars {
    let (lo_x, hi_x, lo_y, hi_y) = p.ground_set.iter().fold(
        (f64::INFINITY, f64::NEG_INFINITY, f64::INFINITY, f64::NEG_INFINITY),
        |(a, b, c, d), q| (a.min(q.x), b.max(q.x), c.min(q.y), d.max(q.y)),
    );
    WaypointVars {
        x: model.add_continuous("x", lo_x, hi_x, Group::Motion),
        y: model.add_continuous("y", lo_y, hi_y, Group::Motion),
    }
}

/// Stand-alone big-M fragment for one waypoint `(x, y)`.
pub fn big_m_waypoint(p: &Partition, data: &BigMData) -> MipModel {
    let mut model = MipModel::new();
    let w = coordinates(&mut model, p);
    add_big_m_waypoint(&mut model, data, w, "0");
    model
}

/// Stand-alone independent-branching fragment for one waypoint `(x, y)`.
pub fn ib_waypoint(p: &Partition, cover: &BicliqueCover) -> MipModel {
    let mut model = MipModel::new();
    let w = coordinates(&mut model, p);
    add_ib_waypoint(&mut model, p, cover, w, "0");
    model
}
