//! Deterministic SVG renderings of each pipeline stage. Coordinates are
//! printed with fixed precision so equal inputs give byte-equal files.

use std::fmt::Write as _;

use crate::biclique::SeparatorResult;
use crate::cdc::ConflictGraph;
use crate::geometry::{Environment, Point2, Rect, Triangulation};
use crate::partition::Partition;

const SIZE: f64 = 500.0;
const PAD: f64 = 20.0;
const FREE_FILL: &str = "#e8f0fa";
const OBSTACLE_FILL: &str = "#404040";

struct Canvas {
    bounds: Rect,
    scale: f64,
    body: String,
}

impl Canvas {
    fn new(bounds: Rect) -> Self {
        let w = bounds.max.x - bounds.min.x;
        let h = bounds.max.y - bounds.min.y;
        Self { bounds, scale: SIZE / w.max(h), body: String::new() }
    }

    fn map(&self, p: Point2) -> (f64, f64) {
        (
            PAD + (p.x - self.bounds.min.x) * self.scale,
            PAD + (self.bounds.max.y - p.y) * self.scale,
        )
    }

    fn polygon(&mut self, pts: &[Point2], class: &str, style: &str) {
        let coords: Vec<String> = pts
            .iter()
            .map(|&p| {
                let (x, y) = self.map(p);
                format!("{x:.3},{y:.3}")
            })
            .collect();
        let _ = writeln!(self.body, r##"<polygon class="{class}" points="{}" {style}/>"##, coords.join(" "));
    }

    fn line(&mut self, a: Point2, b: Point2, class: &str, style: &str) {
        let ((x1, y1), (x2, y2)) = (self.map(a), self.map(b));
        let _ = writeln!(
            self.body,
            r##"<line class="{class}" x1="{x1:.3}" y1="{y1:.3}" x2="{x2:.3}" y2="{y2:.3}" {style}/>"##
        );
    }

    fn circle(&mut self, p: Point2, r: f64, class: &str, fill: &str) {
        let (x, y) = self.map(p);
        let _ = writeln!(
            self.body,
            r##"<circle class="{class}" cx="{x:.3}" cy="{y:.3}" r="{r:.1}" fill="{fill}" stroke="black" stroke-width="0.5"/>"##
        );
    }

    fn text(&mut self, p: Point2, s: &str, class: &str) {
        let (x, y) = self.map(p);
        let _ = writeln!(
            self.body,
            r##"<text class="{class}" x="{x:.3}" y="{y:.3}" font-size="11" text-anchor="middle" dominant-baseline="middle">{s}</text>"##
        );
    }

    fn finish(self) -> String {
        let w = (self.bounds.max.x - self.bounds.min.x) * self.scale + 2.0 * PAD;
        let h = (self.bounds.max.y - self.bounds.min.y) * self.scale + 2.0 * PAD;
        format!(
            "<svg xmlns=\"http://www.w3.org/2000/svg\" width=\"{w:.0}\" height=\"{h:.0}\" viewBox=\"0 0 {w:.3} {h:.3}\">\n\
             <rect width=\"100%\" height=\"100%\" fill=\"white\"/>\n{}</svg>\n",
            self.body
        )
    }
}

fn centroid(pts: &[Point2]) -> Point2 {
    let n = pts.len() as f64;
    Point2::new(pts.iter().map(|p| p.x).sum::<f64>() / n, pts.iter().map(|p| p.y).sum::<f64>() / n)
}

fn partition_bounds(p: &Partition) -> Rect {
    let pts = p.ground_set.iter().chain(p.blocked.iter().flatten());
    let (mut lo, mut hi) = (Point2::new(f64::INFINITY, f64::INFINITY), Point2::new(f64::NEG_INFINITY, f64::NEG_INFINITY));
    for q in pts {
        lo = Point2::new(lo.x.min(q.x), lo.y.min(q.y));
        hi = Point2::new(hi.x.max(q.x), hi.y.max(q.y));
    }
    Rect::new(lo, hi).unwrap_or(Rect::UNIT)
}

/// Free triangles lightly filled, obstacle triangles dark, constrained
/// edges bold.
pub fn triangulation_svg(tri: &Triangulation, bounds: Rect) -> String {
    let mut c = Canvas::new(bounds);
    for (t, owner) in tri.obstacle_of.iter().enumerate() {
        let pts = tri.triangle_points(t);
        match owner {
            None => c.polygon(&pts, "free", &format!(r##"fill="{FREE_FILL}" stroke="#7090b0" stroke-width="0.7""##)),
            Some(_) => c.polygon(&pts, "obstacle", &format!(r##"fill="{OBSTACLE_FILL}" stroke="none""##)),
        }
    }
    for &(a, b) in &tri.constrained_edges {
        c.line(tri.vertices[a], tri.vertices[b], "constrained", r##"stroke="black" stroke-width="2.5""##);
    }
    c.finish()
}

fn draw_partition(c: &mut Canvas, p: &Partition, labels: bool) {
    for tri in &p.blocked {
        c.polygon(tri, "obstacle", &format!(r##"fill="{OBSTACLE_FILL}" stroke="{OBSTACLE_FILL}" stroke-width="0.5""##));
    }
    for i in 0..p.len() {
        let pts = p.face_points(i);
        c.polygon(&pts, "face", &format!(r##"fill="{FREE_FILL}" stroke="#305070" stroke-width="1""##));
        if labels {
            c.text(centroid(&pts), &(i + 1).to_string(), "face-label");
        }
    }
}

/// Faces with their 1-based indices, obstacles dark.
pub fn partition_svg(p: &Partition) -> String {
    let mut c = Canvas::new(partition_bounds(p));
    draw_partition(&mut c, p, true);
    for &q in &p.ground_set {
        c.circle(q, 3.0, "vertex", "white");
    }
    c.finish()
}

/// Conflict edges (infeasible vertex pairs) over the partition.
pub fn conflict_svg(p: &Partition, g: &ConflictGraph) -> String {
    let mut c = Canvas::new(partition_bounds(p));
    draw_partition(&mut c, p, false);
    for (u, v) in g.edges() {
        c.line(p.ground_set[u], p.ground_set[v], "conflict", r##"stroke="#c03030" stroke-width="1" stroke-opacity="0.6""##);
    }
    for (v, &q) in p.ground_set.iter().enumerate() {
        c.circle(q, 7.0, "vertex", "white");
        c.text(q, &(v + 1).to_string(), "vertex-label");
    }
    c.finish()
}

/// Ground-set vertices coloured by separator side: A red, B blue, C green.
/// Feasible pairs (the finite element graph) are drawn underneath.
pub fn separator_svg(p: &Partition, sep: &SeparatorResult) -> String {
    let mut c = Canvas::new(partition_bounds(p));
    draw_partition(&mut c, p, false);
    let n = p.ground_set.len();
    for u in 0..n {
        for v in (u + 1)..n {
            if p.faces.iter().any(|f| f.contains(&u) && f.contains(&v)) {
                c.line(p.ground_set[u], p.ground_set[v], "feasible", r##"stroke="#909090" stroke-width="0.6""##);
            }
        }
    }
    for (set, class, fill) in [(&sep.a, "sep-a", "#d62728"), (&sep.b, "sep-b", "#1f77b4"), (&sep.c, "sep-c", "#2ca02c")] {
        for &v in set {
            c.circle(p.ground_set[v], 6.0, class, fill);
        }
    }
    c.finish()
}

/// Obstacles, the foothold sequence and the goal.
pub fn solution_svg(env: &Environment, steps: &[Point2], goal: Point2) -> String {
    let mut c = Canvas::new(env.bounds);
    c.polygon(&env.bounds.corners(), "bounds", r##"fill="none" stroke="black" stroke-width="1.5""##);
    for o in &env.obstacles {
        c.polygon(o.vertices(), "obstacle", &format!(r##"fill="{OBSTACLE_FILL}" stroke="none""##));
    }
    for w in steps.windows(2) {
        c.line(w[0], w[1], "path", r##"stroke="#808080" stroke-width="1" stroke-dasharray="3,2""##);
    }
    c.circle(goal, 8.0, "goal", "none");
    for (s, &q) in steps.iter().enumerate() {
        let fill = if s % 2 == 0 { "#1f77b4" } else { "#ff7f0e" };
        c.circle(q, 4.0, "step", fill);
    }
    c.finish()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::biclique::{separator, FiniteElementGraph};
    use crate::geometry::constrained_delaunay;
    use crate::partition::partition_from_cdt;
    use crate::scenario::gen_env;

    fn count(svg: &str, class: &str) -> usize {
        svg.matches(&format!(r##"class="{class}""##)).count()
    }

    #[test]
    fn empty_square_renders_two_triangles() {
        let env = Environment::unit(vec![]);
        let tri = constrained_delaunay(&env).unwrap();
        let svg = triangulation_svg(&tri, env.bounds);
        assert_eq!(count(&svg, "free"), 2);
        assert_eq!(count(&svg, "constrained"), 4);
        let p = partition_from_cdt(&tri).unwrap();
        assert_eq!(count(&partition_svg(&p), "face"), 2);
    }

    #[test]
    fn separator_classes_match_sizes() {
        let env = gen_env(3, 2);
        let p = partition_from_cdt(&constrained_delaunay(&env).unwrap()).unwrap();
        let sep = separator(&FiniteElementGraph::from_cdc(&p.cdc()));
        let svg = separator_svg(&p, &sep);
        assert_eq!(count(&svg, "sep-a"), sep.a.len());
        assert_eq!(count(&svg, "sep-b"), sep.b.len());
        assert_eq!(count(&svg, "sep-c"), sep.c.len());
        assert_eq!(svg, separator_svg(&p, &sep));
    }
}
