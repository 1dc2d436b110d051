//! Planar primitives: points, simple polygons, the obstacle environment,
//! exact orientation predicates and the constrained Delaunay triangulation
//! of the obstacle-free box.

mod cdt;

pub use cdt::{constrained_delaunay, triangulate, Triangulation};

use std::cmp::Ordering;
use std::fmt;

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Coincidence tolerance used when merging vertices shared by several
/// polygons (for example an obstacle corner lying on the bounding box).
pub const MERGE_TOLERANCE: f64 = 1e-12;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum GeometryError {
    #[error("polygon needs at least 3 vertices, got {0}")]
    TooFewVertices(usize),
    #[error("non-finite coordinate in input")]
    NonFinite,
    #[error("polygon is not simple: {0}")]
    NotSimple(String),
    #[error("polygon has collinear consecutive vertices around index {0}")]
    CollinearVertices(usize),
    #[error("degenerate input: {0}")]
    DegenerateInput(String),
    #[error("obstacle {0} is not contained in the bounds")]
    OutOfBounds(usize),
    #[error("internal obstacle {0} is a triangle; internal obstacles need at least 4 vertices")]
    TriangularInternalObstacle(usize),
    #[error("invalid bounds")]
    InvalidBounds,
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
#[serde(from = "[f64; 2]", into = "[f64; 2]")]
pub struct Point2 {
    pub x: f64,
    pub y: f64,
}

impl Point2 {
    pub const fn new(x: f64, y: f64) -> Self {
        Self { x, y }
    }

    pub fn is_finite(&self) -> bool {
        self.x.is_finite() && self.y.is_finite()
    }

    /// Lexicographic order on (x, y); used for every deterministic vertex
    /// numbering in the crate.
    pub fn lex_cmp(&self, other: &Self) -> Ordering {
        self.x.total_cmp(&other.x).then(self.y.total_cmp(&other.y))
    }

    pub fn dist(&self, other: &Self) -> f64 {
        (self.x - other.x).hypot(self.y - other.y)
    }

    pub fn sub(&self, other: &Self) -> Self {
        Self::new(self.x - other.x, self.y - other.y)
    }

    fn as_coord(&self) -> robust::Coord<f64> {
        robust::Coord { x: self.x, y: self.y }
    }
}

impl From<[f64; 2]> for Point2 {
    fn from(v: [f64; 2]) -> Self {
        Self::new(v[0], v[1])
    }
}

impl From<Point2> for [f64; 2] {
    fn from(p: Point2) -> Self {
        [p.x, p.y]
    }
}

impl fmt::Display for Point2 {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "({}, {})", self.x, self.y)
    }
}

/// Sign of twice the signed area of `abc`: `1` for a counter-clockwise turn,
/// `-1` for clockwise, `0` when collinear. Exact for all finite doubles.
pub fn orient(a: Point2, b: Point2, c: Point2) -> i8 {
    let det = robust::orient2d(a.as_coord(), b.as_coord(), c.as_coord());
    sign(det)
}

/// Exact in-circle predicate: positive when `d` lies strictly inside the
/// circle through the counter-clockwise triangle `abc`.
pub fn incircle(a: Point2, b: Point2, c: Point2, d: Point2) -> i8 {
    let det = robust::incircle(a.as_coord(), b.as_coord(), c.as_coord(), d.as_coord());
    sign(det)
}

fn sign(v: f64) -> i8 {
    if v > 0.0 {
        1
    } else if v < 0.0 {
        -1
    } else {
        0
    }
}

/// Twice the signed area of the triangle `abc` in floating point.
pub fn cross(a: Point2, b: Point2, c: Point2) -> f64 {
    (b.x - a.x) * (c.y - a.y) - (b.y - a.y) * (c.x - a.x)
}

/// `p` lies on the closed segment `ab`.
pub fn on_segment(a: Point2, b: Point2, p: Point2) -> bool {
    orient(a, b, p) == 0
        && p.x >= a.x.min(b.x)
        && p.x <= a.x.max(b.x)
        && p.y >= a.y.min(b.y)
        && p.y <= a.y.max(b.y)
}

/// `p` lies on segment `ab` strictly between its endpoints.
pub fn strictly_inside_segment(a: Point2, b: Point2, p: Point2) -> bool {
    on_segment(a, b, p) && p != a && p != b
}

/// The open segments `ab` and `cd` cross at a single interior point.
pub fn segments_cross(a: Point2, b: Point2, c: Point2, d: Point2) -> bool {
    let o1 = orient(a, b, c);
    let o2 = orient(a, b, d);
    let o3 = orient(c, d, a);
    let o4 = orient(c, d, b);
    o1 * o2 < 0 && o3 * o4 < 0
}

/// Signed area of a vertex loop (positive for counter-clockwise).
pub fn signed_area(pts: &[Point2]) -> f64 {
    let n = pts.len();
    let mut acc = 0.0;
    for i in 0..n {
        let p = pts[i];
        let q = pts[(i + 1) % n];
        acc += p.x * q.y - q.x * p.y;
    }
    acc / 2.0
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Location {
    Inside,
    Boundary,
    Outside,
}

/// A simple polygon stored counter-clockwise.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<Point2>", into = "Vec<Point2>")]
pub struct Polygon {
    vertices: Vec<Point2>,
}

impl Polygon {
    /// Validates simplicity and reorients clockwise input.
    pub fn new(mut vertices: Vec<Point2>) -> Result<Self, GeometryError> {
        let n = vertices.len();
        if n < 3 {
            return Err(GeometryError::TooFewVertices(n));
        }
        if vertices.iter().any(|p| !p.is_finite()) {
            return Err(GeometryError::NonFinite);
        }
        for i in 0..n {
            for j in (i + 1)..n {
                if vertices[i].dist(&vertices[j]) <= MERGE_TOLERANCE {
                    return Err(GeometryError::NotSimple(format!(
                        "duplicate vertex {}",
                        vertices[i]
                    )));
                }
            }
        }
        for i in 0..n {
            let prev = vertices[(i + n - 1) % n];
            let next = vertices[(i + 1) % n];
            if orient(prev, vertices[i], next) == 0 {
                return Err(GeometryError::CollinearVertices(i));
            }
        }
        for i in 0..n {
            let (a, b) = (vertices[i], vertices[(i + 1) % n]);
            for j in (i + 1)..n {
                let (c, d) = (vertices[j], vertices[(j + 1) % n]);
                let adjacent = j == i + 1 || (i == 0 && j == n - 1);
                if adjacent {
                    continue;
                }
                if segments_cross(a, b, c, d)
                    || on_segment(a, b, c)
                    || on_segment(a, b, d)
                    || on_segment(c, d, a)
                    || on_segment(c, d, b)
                {
                    return Err(GeometryError::NotSimple(format!("edges {i} and {j} intersect")));
                }
            }
        }
        if signed_area(&vertices) < 0.0 {
            vertices.reverse();
        }
        Ok(Self { vertices })
    }

    pub fn vertices(&self) -> &[Point2] {
        &self.vertices
    }

    pub fn len(&self) -> usize {
        self.vertices.len()
    }

    pub fn is_empty(&self) -> bool {
        self.vertices.is_empty()
    }

    pub fn edges(&self) -> impl Iterator<Item = (Point2, Point2)> + '_ {
        let n = self.vertices.len();
        (0..n).map(move |i| (self.vertices[i], self.vertices[(i + 1) % n]))
    }

    pub fn area(&self) -> f64 {
        signed_area(&self.vertices)
    }

    pub fn contains(&self, p: Point2) -> Location {
        point_in_polygon(p, self)
    }
}

impl TryFrom<Vec<Point2>> for Polygon {
    type Error = GeometryError;

    fn try_from(v: Vec<Point2>) -> Result<Self, Self::Error> {
        Polygon::new(v)
    }
}

impl From<Polygon> for Vec<Point2> {
    fn from(p: Polygon) -> Self {
        p.vertices
    }
}

/// Classifies `p` against `poly` using only exact orientation tests
/// (winding number with boundary detection).
pub fn point_in_polygon(p: Point2, poly: &Polygon) -> Location {
    let mut winding = 0i32;
    for (a, b) in poly.edges() {
        if on_segment(a, b, p) {
            return Location::Boundary;
        }
        if a.y <= p.y {
            if b.y > p.y && orient(a, b, p) > 0 {
                winding += 1;
            }
        } else if b.y <= p.y && orient(a, b, p) < 0 {
            winding -= 1;
        }
    }
    if winding != 0 {
        Location::Inside
    } else {
        Location::Outside
    }
}

/// Axis-aligned bounding box.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Rect {
    pub min: Point2,
    pub max: Point2,
}

impl Rect {
    pub const UNIT: Rect = Rect { min: Point2::new(0.0, 0.0), max: Point2::new(1.0, 1.0) };

    pub fn new(min: Point2, max: Point2) -> Result<Self, GeometryError> {
        if !(min.is_finite() && max.is_finite()) || min.x >= max.x || min.y >= max.y {
            return Err(GeometryError::InvalidBounds);
        }
        Ok(Self { min, max })
    }

    /// Corners counter-clockwise from `min`.
    pub fn corners(&self) -> [Point2; 4] {
        [
            self.min,
            Point2::new(self.max.x, self.min.y),
            self.max,
            Point2::new(self.min.x, self.max.y),
        ]
    }

    pub fn area(&self) -> f64 {
        (self.max.x - self.min.x) * (self.max.y - self.min.y)
    }

    pub fn contains(&self, p: Point2) -> bool {
        p.x >= self.min.x && p.x <= self.max.x && p.y >= self.min.y && p.y <= self.max.y
    }

    pub fn on_boundary(&self, p: Point2) -> bool {
        self.contains(p)
            && (p.x == self.min.x || p.x == self.max.x || p.y == self.min.y || p.y == self.max.y)
    }
}

impl Default for Rect {
    fn default() -> Self {
        Rect::UNIT
    }
}

/// The input world: a bounding box and obstacle polygons.
#[derive(Debug, Clone, PartialEq, Default)]
pub struct Environment {
    pub bounds: Rect,
    pub obstacles: Vec<Polygon>,
    pub seed: Option<u64>,
}

#[derive(Serialize, Deserialize)]
struct EnvironmentFile {
    bounds: [[f64; 2]; 2],
    obstacles: Vec<Vec<[f64; 2]>>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    seed: Option<u64>,
}

impl Environment {
    pub fn unit(obstacles: Vec<Polygon>) -> Self {
        Self { bounds: Rect::UNIT, obstacles, seed: None }
    }

    /// An obstacle is internal when none of its edges lies on the bounds.
    pub fn is_internal(&self, i: usize) -> bool {
        !self.obstacles[i].edges().any(|(a, b)| {
            self.bounds.on_boundary(a)
                && self.bounds.on_boundary(b)
                && (a.x == b.x && (a.x == self.bounds.min.x || a.x == self.bounds.max.x)
                    || a.y == b.y && (a.y == self.bounds.min.y || a.y == self.bounds.max.y))
        })
    }

    pub fn obstacle_area(&self) -> f64 {
        self.obstacles.iter().map(Polygon::area).sum()
    }

    /// Checks containment, pairwise interior-disjointness (edge crossings and
    /// vertex containment) and the no-triangular-internal-obstacle rule.
    pub fn validate(&self) -> Result<(), GeometryError> {
        self.validate_geometry()?;
        for i in 0..self.obstacles.len() {
            if self.obstacles[i].len() == 3 && self.is_internal(i) {
                return Err(GeometryError::TriangularInternalObstacle(i));
            }
        }
        Ok(())
    }

    /// The subset of [`Environment::validate`] needed to triangulate.
    pub fn validate_geometry(&self) -> Result<(), GeometryError> {
        for (i, obs) in self.obstacles.iter().enumerate() {
            if !obs.vertices().iter().all(|p| self.bounds.contains(*p)) {
                return Err(GeometryError::OutOfBounds(i));
            }
        }
        for i in 0..self.obstacles.len() {
            for j in (i + 1)..self.obstacles.len() {
                let (p, q) = (&self.obstacles[i], &self.obstacles[j]);
                for (a, b) in p.edges() {
                    for (c, d) in q.edges() {
                        if segments_cross(a, b, c, d) {
                            return Err(GeometryError::DegenerateInput(format!(
                                "obstacles {i} and {j} overlap"
                            )));
                        }
                    }
                }
                let inside = p.vertices().iter().any(|v| point_in_polygon(*v, q) == Location::Inside)
                    || q.vertices().iter().any(|v| point_in_polygon(*v, p) == Location::Inside);
                if inside {
                    return Err(GeometryError::DegenerateInput(format!(
                        "obstacles {i} and {j} overlap"
                    )));
                }
            }
        }
        Ok(())
    }

    pub fn to_json(&self) -> String {
        let file = EnvironmentFile {
            bounds: [self.bounds.min.into(), self.bounds.max.into()],
            obstacles: self
                .obstacles
                .iter()
                .map(|p| p.vertices().iter().map(|&v| v.into()).collect())
                .collect(),
            seed: self.seed,
        };
        serde_json::to_string_pretty(&file).expect("environment serializes")
    }

    pub fn from_json(text: &str) -> Result<Self, EnvironmentParseError> {
        let file: EnvironmentFile = serde_json::from_str(text)?;
        let bounds = Rect::new(file.bounds[0].into(), file.bounds[1].into())?;
        let obstacles = file
            .obstacles
            .into_iter()
            .map(|pts| Polygon::new(pts.into_iter().map(Point2::from).collect()))
            .collect::<Result<Vec<_>, _>>()?;
        Ok(Self { bounds, obstacles, seed: file.seed })
    }
}

#[derive(Debug, Error)]
pub enum EnvironmentParseError {
    #[error("malformed environment JSON: {0}")]
    Json(#[from] serde_json::Error),
    #[error(transparent)]
    Geometry(#[from] GeometryError),
}

/// Convex hull (counter-clockwise, strictly convex: collinear points are
/// dropped). Returns indices into `pts`.
pub fn convex_hull(pts: &[Point2]) -> Vec<usize> {
    let mut idx: Vec<usize> = (0..pts.len()).collect();
    idx.sort_by(|&a, &b| pts[a].lex_cmp(&pts[b]));
    idx.dedup_by(|a, b| pts[*a] == pts[*b]);
    if idx.len() < 3 {
        return idx;
    }
    let mut lower: Vec<usize> = Vec::new();
    for &i in &idx {
        while lower.len() >= 2
            && orient(pts[lower[lower.len() - 2]], pts[lower[lower.len() - 1]], pts[i]) <= 0
        {
            lower.pop();
        }
        lower.push(i);
    }
    let mut upper: Vec<usize> = Vec::new();
    for &i in idx.iter().rev() {
        while upper.len() >= 2
            && orient(pts[upper[upper.len() - 2]], pts[upper[upper.len() - 1]], pts[i]) <= 0
        {
            upper.pop();
        }
        upper.push(i);
    }
    lower.pop();
    upper.pop();
    lower.extend(upper);
    lower
}

/// Location of `p` relative to a convex counter-clockwise polygon.
pub fn point_in_convex(p: Point2, ccw: &[Point2]) -> Location {
    let n = ccw.len();
    let mut boundary = false;
    for i in 0..n {
        match orient(ccw[i], ccw[(i + 1) % n], p) {
            -1 => return Location::Outside,
            0 => boundary = true,
            _ => {}
        }
    }
    if boundary {
        Location::Boundary
    } else {
        Location::Inside
    }
}

/// Exact separating-axis test: do the interiors of two convex
/// counter-clockwise polygons intersect?
pub fn convex_interiors_overlap(p: &[Point2], q: &[Point2]) -> bool {
    fn separated_by_edges(p: &[Point2], q: &[Point2]) -> bool {
        let n = p.len();
        (0..n).any(|i| {
            let (a, b) = (p[i], p[(i + 1) % n]);
            q.iter().all(|&v| orient(a, b, v) <= 0)
        })
    }
    !(separated_by_edges(p, q) || separated_by_edges(q, p))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn unit_square() -> Polygon {
        Polygon::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.0, 1.0),
        ])
        .unwrap()
    }

    #[test]
    fn orient_signs() {
        let o = Point2::new(0.0, 0.0);
        assert_eq!(orient(o, Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)), 1);
        assert_eq!(orient(o, Point2::new(1.0, 1.0), Point2::new(2.0, 2.0)), 0);
        assert_eq!(orient(o, Point2::new(0.0, 1.0), Point2::new(1.0, 0.0)), -1);
    }

    #[test]
    fn orient_is_exact_near_degeneracy() {
        // Naive floating evaluation of this determinant returns a nonzero value.
        let a = Point2::new(0.1, 0.1);
        let b = Point2::new(0.2, 0.2);
        let c = Point2::new(0.3, 0.3);
        assert_eq!(orient(a, b, Point2::new(0.5, 0.5)), 0);
        assert_eq!(orient(a, c, Point2::new(0.7, 0.7)), 0);
        let tiny = Point2::new(0.5, 0.5 + f64::EPSILON);
        assert_eq!(orient(a, b, tiny), 1);
    }

    #[test]
    fn point_in_unit_square() {
        let sq = unit_square();
        assert_eq!(point_in_polygon(Point2::new(0.5, 0.5), &sq), Location::Inside);
        assert_eq!(point_in_polygon(Point2::new(1.0, 0.5), &sq), Location::Boundary);
        assert_eq!(point_in_polygon(Point2::new(1.5, 0.5), &sq), Location::Outside);
        assert_eq!(point_in_polygon(Point2::new(0.0, 0.0), &sq), Location::Boundary);
    }

    #[test]
    fn point_in_nonconvex_polygon() {
        let l = Polygon::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(2.0, 0.0),
            Point2::new(2.0, 1.0),
            Point2::new(1.0, 1.0),
            Point2::new(1.0, 2.0),
            Point2::new(0.0, 2.0),
        ])
        .unwrap();
        assert_eq!(l.contains(Point2::new(1.5, 1.5)), Location::Outside);
        assert_eq!(l.contains(Point2::new(0.5, 1.5)), Location::Inside);
        assert_eq!(l.contains(Point2::new(1.0, 1.5)), Location::Boundary);
    }

    #[test]
    fn polygon_rejects_bad_input() {
        let p = |x, y| Point2::new(x, y);
        assert_eq!(
            Polygon::new(vec![p(0.0, 0.0), p(1.0, 0.0)]),
            Err(GeometryError::TooFewVertices(2))
        );
        assert!(matches!(
            Polygon::new(vec![p(0.0, 0.0), p(1.0, 1.0), p(1.0, 0.0), p(0.0, 1.0)]),
            Err(GeometryError::NotSimple(_))
        ));
        assert!(matches!(
            Polygon::new(vec![p(0.0, 0.0), p(0.5, 0.0), p(1.0, 0.0), p(0.0, 1.0)]),
            Err(GeometryError::CollinearVertices(_))
        ));
    }

    #[test]
    fn polygon_is_reoriented_ccw() {
        let p = |x, y| Point2::new(x, y);
        let cw = Polygon::new(vec![p(0.0, 0.0), p(0.0, 1.0), p(1.0, 1.0), p(1.0, 0.0)]).unwrap();
        assert!(cw.area() > 0.0);
    }

    #[test]
    fn environment_json_round_trip() {
        let env = Environment {
            bounds: Rect::UNIT,
            obstacles: vec![Polygon::new(vec![
                Point2::new(0.4, 0.4),
                Point2::new(0.6, 0.4),
                Point2::new(0.6, 0.6),
                Point2::new(0.4, 0.6),
            ])
            .unwrap()],
            seed: Some(7),
        };
        let back = Environment::from_json(&env.to_json()).unwrap();
        assert_eq!(back, env);
        let parsed = Environment::from_json(
            r#"{"bounds": [[0,0],[1,1]], "obstacles": [[[0.2,0.2],[0.3,0.2],[0.3,0.3],[0.2,0.3]]]}"#,
        )
        .unwrap();
        assert_eq!(parsed.seed, None);
        assert_eq!(parsed.obstacles.len(), 1);
    }

    #[test]
    fn environment_validation() {
        let sq = |x0: f64, y0: f64, s: f64| {
            Polygon::new(vec![
                Point2::new(x0, y0),
                Point2::new(x0 + s, y0),
                Point2::new(x0 + s, y0 + s),
                Point2::new(x0, y0 + s),
            ])
            .unwrap()
        };
        let ok = Environment::unit(vec![sq(0.1, 0.1, 0.2), sq(0.5, 0.5, 0.2)]);
        assert!(ok.validate().is_ok());
        let overlap = Environment::unit(vec![sq(0.1, 0.1, 0.3), sq(0.2, 0.2, 0.3)]);
        assert!(matches!(overlap.validate(), Err(GeometryError::DegenerateInput(_))));
        let nested = Environment::unit(vec![sq(0.1, 0.1, 0.5), sq(0.2, 0.2, 0.1)]);
        assert!(matches!(nested.validate(), Err(GeometryError::DegenerateInput(_))));
        let outside = Environment::unit(vec![sq(0.9, 0.9, 0.2)]);
        assert_eq!(outside.validate(), Err(GeometryError::OutOfBounds(0)));
        let tri = Polygon::new(vec![
            Point2::new(0.2, 0.2),
            Point2::new(0.4, 0.2),
            Point2::new(0.3, 0.4),
        ])
        .unwrap();
        let env = Environment::unit(vec![tri]);
        assert_eq!(env.validate(), Err(GeometryError::TriangularInternalObstacle(0)));
        let corner_tri = Polygon::new(vec![
            Point2::new(0.0, 0.0),
            Point2::new(0.3, 0.0),
            Point2::new(0.0, 0.3),
        ])
        .unwrap();
        let env = Environment::unit(vec![corner_tri]);
        assert!(!env.is_internal(0));
        assert!(env.validate().is_ok());
    }

    #[test]
    fn hull_drops_collinear_points() {
        let pts = vec![
            Point2::new(0.0, 0.0),
            Point2::new(0.5, 0.0),
            Point2::new(1.0, 0.0),
            Point2::new(1.0, 1.0),
            Point2::new(0.2, 0.2),
            Point2::new(0.0, 1.0),
        ];
        assert_eq!(convex_hull(&pts), vec![0, 2, 3, 5]);
    }

    #[test]
    fn convex_overlap() {
        let a = [Point2::new(0.0, 0.0), Point2::new(1.0, 0.0), Point2::new(0.0, 1.0)];
        let b = [Point2::new(1.0, 0.0), Point2::new(1.0, 1.0), Point2::new(0.0, 1.0)];
        let c = [Point2::new(0.2, 0.2), Point2::new(0.9, 0.2), Point2::new(0.2, 0.9)];
        assert!(!convex_interiors_overlap(&a, &b));
        assert!(convex_interiors_overlap(&a, &c));
        assert!(convex_interiors_overlap(&b, &c));
    }
}
