//! Footstep planning program: `N` footholds from a start to a goal, each in
//! free space, with alternating-foot reachability, bounded heading changes
//! and trimming of unused trailing steps.

use std::f64::consts::PI;

use super::waypoint::{add_big_m_waypoint, add_ib_waypoint, BigMData, WaypointVars};
use super::{FormulationError, Group, MipModel, Sense};
use crate::biclique::BicliqueCover;
use crate::geometry::{point_in_convex, Environment, Location, Point2};
use crate::partition::Partition;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Objective {
    /// Linearised with absolute-value auxiliaries; solvable in-process.
    L1,
    /// Squared distances; for LP export only.
    Quadratic,
}

/// Convex region, in the stance foot's frame (x forward, y towards the
/// swing side), where the next foothold may land.
#[derive(Debug, Clone, PartialEq)]
pub struct ReachPolygon {
    pub vertices: Vec<Point2>,
}

impl ReachPolygon {
    /// Polygon inscribed in the intersection of the discs of radius
    /// `radius` about `(0, 0)` and `(0, lateral)`, with vertices at `sides`
    /// equally spaced directions about the lens centre.
    pub fn lens(radius: f64, lateral: f64, sides: usize) -> Self {
        assert!(sides >= 3 && radius > 0.0 && lateral >= 0.0 && lateral < 2.0 * radius);
        let centre = Point2::new(0.0, lateral / 2.0);
        let exit = |o: Point2, u: (f64, f64)| {
            let (cx, cy) = (centre.x - o.x, centre.y - o.y);
            let b = cx * u.0 + cy * u.1;
            -b + (b * b - (cx * cx + cy * cy) + radius * radius).sqrt()
        };
        let vertices = (0..sides)
            .map(|i| {
                let phi = 2.0 * PI * i as f64 / sides as f64;
                let u = (phi.cos(), phi.sin());
                let t = exit(Point2::new(0.0, 0.0), u).min(exit(Point2::new(0.0, lateral), u));
                Point2::new(centre.x + t * u.0, centre.y + t * u.1)
            })
            .collect();
        Self { vertices }
    }

    /// Reflection across the forward axis, for the other foot.
    pub fn mirrored(&self) -> Self {
        let mut vertices: Vec<Point2> = self.vertices.iter().map(|p| Point2::new(p.x, -p.y)).collect();
        vertices.reverse();
        Self { vertices }
    }

    /// Outward unit normals and offsets, one row per edge.
    pub fn rows(&self) -> Vec<([f64; 2], f64)> {
        let n = self.vertices.len();
        (0..n)
            .map(|k| {
                let (a, b) = (self.vertices[k], self.vertices[(k + 1) % n]);
                let d = b.sub(&a);
                let len = d.x.hypot(d.y);
                let nrm = [d.y / len, -d.x / len];
                (nrm, nrm[0] * a.x + nrm[1] * a.y)
            })
            .collect()
    }

    pub fn contains(&self, p: Point2) -> bool {
        point_in_convex(p, &self.vertices) != Location::Outside
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct FootstepParams {
    pub steps: usize,
    pub start: Point2,
    pub goal: Point2,
    pub objective: Objective,
    /// Number of discrete headings available to each step.
    pub headings: usize,
    pub dtheta_max: f64,
    pub reach_radius: f64,
    pub lateral_offset: f64,
    pub reach_sides: usize,
    pub w_goal: f64,
    pub w_disp: f64,
    /// Cost per step actually used; trimmed steps avoid it.
    pub w_used: f64,
    pub trim: bool,
}

impl Default for FootstepParams {
    fn default() -> Self {
        Self {
            steps: 25,
            start: Point2::new(0.05, 0.05),
            goal: Point2::new(0.95, 0.95),
            objective: Objective::L1,
            headings: 4,
            dtheta_max: PI / 8.0,
            reach_radius: 0.15,
            lateral_offset: 0.1,
            reach_sides: 8,
            w_goal: 10.0,
            w_disp: 1.0,
            w_used: 0.05,
            trim: true,
        }
    }
}

impl FootstepParams {
    pub fn heading_set(&self) -> Vec<f64> {
        let centre = (self.goal.y - self.start.y).atan2(self.goal.x - self.start.x);
        let mid = (self.headings as f64 - 1.0) / 2.0;
        (0..self.headings).map(|k| centre + (k as f64 - mid) * self.dtheta_max).collect()
    }

    pub fn reach(&self) -> ReachPolygon {
        ReachPolygon::lens(self.reach_radius, self.lateral_offset, self.reach_sides)
    }
}

/// Footholds `(x_s, y_s)` read from a solution of a [`footstep_model`].
pub fn footholds(m: &MipModel, values: &[f64]) -> Vec<Point2> {
    (0..)
        .map_while(|s| Some(Point2::new(values[m.var(&format!("x_{s}"))?], values[m.var(&format!("y_{s}"))?])))
        .collect()
}

/// Indices of the steps whose trim binary is set.
pub fn trimmed_steps(m: &MipModel, values: &[f64]) -> Vec<usize> {
    (1..)
        .map_while(|s| m.var(&format!("u_{s}")).map(|u| (s, values[u])))
        .filter(|&(_, v)| v > 0.5)
        .map(|(s, _)| s)
        .collect()
}

#[derive(Debug, Clone, Copy)]
pub enum Assignment<'a> {
    Ib(&'a BicliqueCover),
    BigM(&'a BigMData),
}

/// Builds the program. Variables `x_s`, `y_s` (0-based steps) hold the
/// footholds; step 0 is fixed at the start.
pub fn footstep_model(
    env: &Environment,
    p: &Partition,
    assignment: Assignment<'_>,
    params: &FootstepParams,
) -> Result<MipModel, FormulationError> {
    let n = params.steps;
    if n == 0 {
        return Err(FormulationError::InvalidParameter("steps must be positive".into()));
    }
    if params.headings == 0 {
        return Err(FormulationError::InvalidParameter("at least one heading required".into()));
    }
    let in_free = |q: Point2| (0..p.len()).any(|i| point_in_convex(q, &p.face_points(i)) != Location::Outside);
    if !in_free(params.start) {
        return Err(FormulationError::InfeasibleStart);
    }
    if !in_free(params.goal) {
        return Err(FormulationError::InfeasibleGoal);
    }

    let b = env.bounds;
    let mut m = MipModel::new();
    let pos: Vec<WaypointVars> = (0..n)
        .map(|s| {
            let (xl, xu, yl, yu) = if s == 0 {
                (params.start.x, params.start.x, params.start.y, params.start.y)
            } else {
                (b.min.x, b.max.x, b.min.y, b.max.y)
            };
            WaypointVars {
                x: m.add_continuous(format!("x_{s}"), xl, xu, Group::Motion),
                y: m.add_continuous(format!("y_{s}"), yl, yu, Group::Motion),
            }
        })
        .collect();

    for (s, &w) in pos.iter().enumerate() {
        let tag = s.to_string();
        match assignment {
            Assignment::Ib(cover) => {
                add_ib_waypoint(&mut m, p, cover, w, &tag);
            }
            Assignment::BigM(data) => {
                add_big_m_waypoint(&mut m, data, w, &tag);
            }
        }
    }

    // Headings and reachability for each transition s -> s + 1.
    let heads = params.heading_set();
    let (hmin, hmax) = (heads[0], heads[heads.len() - 1]);
    let left = params.reach();
    let right = left.mirrored();
    let reach_bound = params.reach_radius + params.lateral_offset;
    let mut theta = Vec::new();
    for s in 0..n.saturating_sub(1) {
        let th = m.add_continuous(format!("th_{s}"), hmin, hmax, Group::Motion);
        let w: Vec<usize> = (0..heads.len()).map(|k| m.add_binary(format!("w_{s}_{k}"), Group::Motion)).collect();
        m.add_constraint(format!("head_{s}"), w.iter().map(|&v| (v, 1.0)).collect(), Sense::Eq, 1.0, Group::Motion);
        let mut def = vec![(th, 1.0)];
        def.extend(w.iter().zip(&heads).map(|(&v, &h)| (v, -h)));
        m.add_constraint(format!("thdef_{s}"), def, Sense::Eq, 0.0, Group::Motion);
        if let Some(&prev) = theta.last() {
            m.add_constraint(format!("dthu_{s}"), vec![(th, 1.0), (prev, -1.0)], Sense::Le, params.dtheta_max, Group::Motion);
            m.add_constraint(format!("dthl_{s}"), vec![(prev, 1.0), (th, -1.0)], Sense::Le, params.dtheta_max, Group::Motion);
        }
        theta.push(th);

        let poly = if s % 2 == 0 { &left } else { &right };
        let rows = poly.rows();
        let mut sum_x = vec![(pos[s + 1].x, 1.0), (pos[s].x, -1.0)];
        let mut sum_y = vec![(pos[s + 1].y, 1.0), (pos[s].y, -1.0)];
        for (k, &h) in heads.iter().enumerate() {
            let dx = m.add_continuous(format!("dx_{s}_{k}"), -reach_bound, reach_bound, Group::Motion);
            let dy = m.add_continuous(format!("dy_{s}_{k}"), -reach_bound, reach_bound, Group::Motion);
            sum_x.push((dx, -1.0));
            sum_y.push((dy, -1.0));
            let (c, sn) = (h.cos(), h.sin());
            for (r, (a, off)) in rows.iter().enumerate() {
                // a · R(h)ᵀ d ≤ off · w
                m.add_constraint(
                    format!("reach_{s}_{k}_{r}"),
                    vec![(dx, a[0] * c - a[1] * sn), (dy, a[0] * sn + a[1] * c), (w[k], -off)],
                    Sense::Le,
                    0.0,
                    Group::Motion,
                );
            }
        }
        m.add_constraint(format!("stepx_{s}"), sum_x, Sense::Eq, 0.0, Group::Motion);
        m.add_constraint(format!("stepy_{s}"), sum_y, Sense::Eq, 0.0, Group::Motion);
    }

    // Trimming: once a step is trimmed, all later ones are, and trimmed
    // steps stand on the goal.
    let mut trim = Vec::new();
    if params.trim {
        let (mx, my) = (b.max.x - b.min.x, b.max.y - b.min.y);
        for (s, w) in pos.iter().enumerate().skip(1) {
            let u = m.add_binary(format!("u_{s}"), Group::Motion);
            if let Some(&prev) = trim.last() {
                m.add_constraint(format!("mono_{s}"), vec![(prev, 1.0), (u, -1.0)], Sense::Le, 0.0, Group::Motion);
            }
            for (var, g, big, axis) in [(w.x, params.goal.x, mx, "x"), (w.y, params.goal.y, my, "y")] {
                m.add_constraint(format!("trim{axis}u_{s}"), vec![(var, 1.0), (u, big)], Sense::Le, g + big, Group::Motion);
                m.add_constraint(format!("trim{axis}l_{s}"), vec![(var, -1.0), (u, big)], Sense::Le, big - g, Group::Motion);
            }
            trim.push(u);
        }
    }

    let last = pos[n - 1];
    let (gx, gy) = (params.goal.x, params.goal.y);
    match params.objective {
        Objective::L1 => {
            let span = (b.max.x - b.min.x).max(b.max.y - b.min.y);
            for (var, g, axis) in [(last.x, gx, "x"), (last.y, gy, "y")] {
                let t = m.add_continuous(format!("goal{axis}"), 0.0, span, Group::Objective);
                m.add_constraint(format!("goal{axis}u"), vec![(t, 1.0), (var, -1.0)], Sense::Ge, -g, Group::Objective);
                m.add_constraint(format!("goal{axis}l"), vec![(t, 1.0), (var, 1.0)], Sense::Ge, g, Group::Objective);
                m.objective.push((t, params.w_goal));
            }
            for s in 0..n.saturating_sub(1) {
                for (a, c, axis) in [(pos[s + 1].x, pos[s].x, "x"), (pos[s + 1].y, pos[s].y, "y")] {
                    let e = m.add_continuous(format!("e{axis}_{s}"), 0.0, reach_bound, Group::Objective);
                    m.add_constraint(format!("e{axis}u_{s}"), vec![(e, 1.0), (a, -1.0), (c, 1.0)], Sense::Ge, 0.0, Group::Objective);
                    m.add_constraint(format!("e{axis}l_{s}"), vec![(e, 1.0), (a, 1.0), (c, -1.0)], Sense::Ge, 0.0, Group::Objective);
                    m.objective.push((e, params.w_disp));
                }
            }
        }
        Objective::Quadratic => {
            for (var, g) in [(last.x, gx), (last.y, gy)] {
                m.quadratic.push((var, var, params.w_goal));
                m.objective.push((var, -2.0 * g * params.w_goal));
                m.constant += params.w_goal * g * g;
            }
            for s in 0..n.saturating_sub(1) {
                for (a, c) in [(pos[s + 1].x, pos[s].x), (pos[s + 1].y, pos[s].y)] {
                    m.quadratic.push((a, a, params.w_disp));
                    m.quadratic.push((a, c, -2.0 * params.w_disp));
                    m.quadratic.push((c, c, params.w_disp));
                }
            }
        }
    }
    // w_used · Σ (1 − u_s); without trimming every step counts as used.
    m.constant += params.w_used * (n - 1) as f64;
    m.objective.extend(trim.iter().map(|&u| (u, -params.w_used)));
    Ok(m)
}
