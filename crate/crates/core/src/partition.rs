//! Convex partition of free space over a shared vertex set.
//!
//! Faces start as the free triangles of a constrained Delaunay
//! triangulation and may be merged pairwise into convex polygons, provided
//! the partition keeps the properties the disjunctive formulations need.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::cdc::{is_pairwise_ib_representable, CdcInstance};
use crate::geometry::{
    convex_hull, convex_interiors_overlap, point_in_convex, signed_area, Location, Point2, Triangulation,
};

#[derive(Debug, Error, Clone, PartialEq)]
pub enum PartitionError {
    #[error("vertex {vertex} lies in face {face} without being one of its vertices")]
    InternalVertexViolation { vertex: usize, face: usize },
    #[error("triangulation has no free triangle")]
    NoFreeSpace,
    #[error("invalid partition dump: {0}")]
    Parse(String),
}

/// Why a merge was refused.
#[derive(Debug, Clone, PartialEq, Eq, Serialize)]
#[serde(tag = "reason", rename_all = "kebab-case")]
pub enum MergeRejection {
    /// The faces do not share an edge.
    NotAdjacent,
    /// The convex hull reaches into an obstacle.
    ObstacleOverlap,
    /// The convex hull reaches into another face.
    FaceOverlap { face: usize },
    /// A ground-set vertex would lie in the merged face, or on its boundary,
    /// without being one of its extreme points.
    InternalVertex { vertex: usize },
    /// The merged family admits no pairwise IB scheme.
    NotIbRepresentable { witness: [usize; 3] },
}

/// `a·x ≤ b` rows of one face, unit normals, one per edge.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct FaceHalfspaces {
    pub rows: Vec<([f64; 2], f64)>,
}

impl FaceHalfspaces {
    pub fn contains(&self, p: Point2, tol: f64) -> bool {
        self.rows.iter().all(|(a, b)| a[0] * p.x + a[1] * p.y <= b + tol)
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Partition {
    /// Vertices in lexicographic order.
    pub ground_set: Vec<Point2>,
    /// Each face as indices into `ground_set`, counter-clockwise, all extreme.
    pub faces: Vec<Vec<usize>>,
    /// Obstacle triangles, used to keep merged faces out of obstacles.
    pub blocked: Vec<[Point2; 3]>,
}

#[derive(Serialize, Deserialize)]
struct PartitionDump {
    vertices: Vec<Point2>,
    faces: Vec<Vec<usize>>,
}

impl Partition {
    pub fn len(&self) -> usize {
        self.faces.len()
    }

    pub fn is_empty(&self) -> bool {
        self.faces.is_empty()
    }

    pub fn face_points(&self, i: usize) -> Vec<Point2> {
        self.faces[i].iter().map(|&v| self.ground_set[v]).collect()
    }

    pub fn face_area(&self, i: usize) -> f64 {
        signed_area(&self.face_points(i))
    }

    pub fn area(&self) -> f64 {
        (0..self.len()).map(|i| self.face_area(i)).sum()
    }

    /// Supports sorted ascending, as the disjunctive constraint sees them.
    pub fn cdc(&self) -> CdcInstance {
        CdcInstance::new(self.ground_set.len(), self.sorted_faces())
            .expect("a valid partition is an irredundant cover of its ground set")
    }

    fn sorted_faces(&self) -> Vec<Vec<usize>> {
        self.faces
            .iter()
            .map(|f| {
                let mut f = f.clone();
                f.sort_unstable();
                f
            })
            .collect()
    }

    pub fn halfspaces(&self) -> Vec<FaceHalfspaces> {
        (0..self.len()).map(|i| face_halfspaces(self, i)).collect()
    }

    pub fn halfspace_count(&self) -> usize {
        self.faces.iter().map(Vec::len).sum()
    }

    /// Faces `i` and `j` share an edge.
    pub fn adjacent(&self, i: usize, j: usize) -> bool {
        let edges = |f: &Vec<usize>| -> Vec<(usize, usize)> {
            (0..f.len()).map(|k| (f[k], f[(k + 1) % f.len()])).collect()
        };
        let ej = edges(&self.faces[j]);
        i != j && edges(&self.faces[i]).iter().any(|&(a, b)| ej.contains(&(b, a)))
    }

    /// Ground-set vertex lying in or on face `face` without being one of its
    /// vertices, if any.
    pub fn internal_vertex(&self, face: &[usize]) -> Option<usize> {
        let pts: Vec<Point2> = face.iter().map(|&v| self.ground_set[v]).collect();
        (0..self.ground_set.len())
            .filter(|v| !face.contains(v))
            .find(|&v| point_in_convex(self.ground_set[v], &pts) != Location::Outside)
    }

    /// `{"vertices": [[x,y],...], "faces": [[i,...],...]}`, 1-based.
    pub fn to_json(&self) -> String {
        let dump = PartitionDump {
            vertices: self.ground_set.clone(),
            faces: self.faces.iter().map(|f| f.iter().map(|v| v + 1).collect()).collect(),
        };
        serde_json::to_string_pretty(&dump).expect("serialize partition")
    }

    /// Reads a dump produced by [`Partition::to_json`]; obstacle triangles
    /// are not part of the dump.
    pub fn from_json(text: &str) -> Result<Self, PartitionError> {
        let dump: PartitionDump =
            serde_json::from_str(text).map_err(|e| PartitionError::Parse(e.to_string()))?;
        let n = dump.vertices.len();
        let mut faces = Vec::with_capacity(dump.faces.len());
        for f in dump.faces {
            if f.len() < 3 || f.iter().any(|&v| v == 0 || v > n) {
                return Err(PartitionError::Parse("face index out of range".into()));
            }
            faces.push(f.into_iter().map(|v| v - 1).collect());
        }
        Ok(Self { ground_set: dump.vertices, faces, blocked: Vec::new() })
    }

    /// Checks the structural invariants; used by tests and after loading.
    pub fn check(&self) -> Result<(), PartitionError> {
        for (i, f) in self.faces.iter().enumerate() {
            if let Some(v) = self.internal_vertex(f) {
                return Err(PartitionError::InternalVertexViolation { vertex: v, face: i });
            }
        }
        Ok(())
    }
}

/// One face per free triangle over the vertices touching free space.
pub fn partition_from_cdt(tri: &Triangulation) -> Result<Partition, PartitionError> {
    if tri.free_triangles.is_empty() {
        return Err(PartitionError::NoFreeSpace);
    }
    let mut used = vec![false; tri.vertices.len()];
    for &t in &tri.free_triangles {
        for v in tri.triangles[t] {
            used[v] = true;
        }
    }
    let mut remap = vec![usize::MAX; tri.vertices.len()];
    let mut ground_set = Vec::new();
    for (v, &u) in used.iter().enumerate() {
        if u {
            remap[v] = ground_set.len();
            ground_set.push(tri.vertices[v]);
        }
    }
    let faces = tri.free_triangles.iter().map(|&t| tri.triangles[t].iter().map(|&v| remap[v]).collect()).collect();
    let blocked = (0..tri.triangles.len())
        .filter(|&t| tri.obstacle_of[t].is_some())
        .map(|t| tri.triangle_points(t))
        .collect();
    let p = Partition { ground_set, faces, blocked };
    p.check()?;
    Ok(p)
}

/// Replaces faces `i` and `j` by their convex hull. The merged face takes
/// index `min(i, j)`; the other index is removed.
pub fn merge_faces(p: &Partition, i: usize, j: usize) -> Result<Partition, MergeRejection> {
    if i == j || i >= p.len() || j >= p.len() || !p.adjacent(i, j) {
        return Err(MergeRejection::NotAdjacent);
    }
    let mut union: Vec<usize> = p.faces[i].iter().chain(&p.faces[j]).copied().collect();
    union.sort_unstable();
    union.dedup();
    let pts: Vec<Point2> = union.iter().map(|&v| p.ground_set[v]).collect();
    let hull: Vec<usize> = convex_hull(&pts).into_iter().map(|k| union[k]).collect();
    let hull_pts: Vec<Point2> = hull.iter().map(|&v| p.ground_set[v]).collect();

    if p.blocked.iter().any(|t| convex_interiors_overlap(&hull_pts, t)) {
        return Err(MergeRejection::ObstacleOverlap);
    }
    if let Some(face) = (0..p.len())
        .filter(|&f| f != i && f != j)
        .find(|&f| convex_interiors_overlap(&hull_pts, &p.face_points(f)))
    {
        return Err(MergeRejection::FaceOverlap { face });
    }
    if let Some(vertex) = p.internal_vertex(&hull) {
        return Err(MergeRejection::InternalVertex { vertex });
    }

    let (lo, hi) = (i.min(j), i.max(j));
    let mut faces = p.faces.clone();
    faces[lo] = rotate_to_min(hull);
    faces.remove(hi);
    let merged = Partition { ground_set: p.ground_set.clone(), faces, blocked: p.blocked.clone() };
    let check = is_pairwise_ib_representable(&merged.cdc());
    if let Some(witness) = check.witness {
        return Err(MergeRejection::NotIbRepresentable { witness });
    }
    Ok(merged)
}

fn rotate_to_min(mut f: Vec<usize>) -> Vec<usize> {
    let k = f.iter().enumerate().min_by_key(|(_, &v)| v).map_or(0, |(k, _)| k);
    f.rotate_left(k);
    f
}

/// Greedy merging: adjacent pairs in index order, restarting after every
/// accepted merge, until no pair merges. Returns the number of merges.
pub fn merge_all(p: &Partition) -> (Partition, usize) {
    let mut current = p.clone();
    let mut merges = 0;
    'sweep: loop {
        for i in 0..current.len() {
            for j in (i + 1)..current.len() {
                if !current.adjacent(i, j) {
                    continue;
                }
                if let Ok(next) = merge_faces(&current, i, j) {
                    current = next;
                    merges += 1;
                    continue 'sweep;
                }
            }
        }
        return (current, merges);
    }
}

/// One row per counter-clockwise edge `p → q`: outward unit normal
/// `(dy, −dx)/|d|` and offset `n·p`.
pub fn face_halfspaces(p: &Partition, i: usize) -> FaceHalfspaces {
    let pts = p.face_points(i);
    let rows = (0..pts.len())
        .map(|k| {
            let (a, b) = (pts[k], pts[(k + 1) % pts.len()]);
            let d = b.sub(&a);
            let len = d.x.hypot(d.y);
            let n = [d.y / len, -d.x / len];
            (n, n[0] * a.x + n[1] * a.y)
        })
        .collect();
    FaceHalfspaces { rows }
}
