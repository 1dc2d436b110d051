//! Random unit-square scenarios and the end-to-end pipeline that turns one
//! into a solved footstep plan.

use std::fmt;
use std::str::FromStr;

use rand::distributions::{Distribution, WeightedIndex};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::Serialize;
use thiserror::Error;

use crate::biclique::{biclique_cover_with_report, merge_cover, BicliqueCover, CoverReport, FiniteElementGraph};
use crate::cdc::{conflict_graph, is_pairwise_ib_representable, ConflictGraph, IbCheck};
use crate::formulation::{
    big_m_values, footstep_model, Assignment, BigMData, FootstepParams, FormulationError, MipModel, ModelSummary,
};
use crate::geometry::{
    constrained_delaunay, convex_hull, point_in_polygon, segments_cross, Environment, GeometryError, Location, Point2,
    Polygon, Rect, Triangulation,
};
use crate::partition::{merge_all, partition_from_cdt, Partition, PartitionError};
use crate::solver::{solve_milp, BnbResult, Limits, MilpStatus, SolverError};

/// Clearance kept between obstacles, and between obstacles and the bounds.
const MARGIN: f64 = 0.02;
/// Clearance kept around the default start and goal.
const POSE_CLEARANCE: f64 = 0.05;
const MAX_ATTEMPTS: usize = 10_000;

fn point_segment_distance(p: Point2, a: Point2, b: Point2) -> f64 {
    let d = b.sub(&a);
    let len2 = d.x * d.x + d.y * d.y;
    let t = if len2 == 0.0 { 0.0 } else { (((p.x - a.x) * d.x + (p.y - a.y) * d.y) / len2).clamp(0.0, 1.0) };
    p.dist(&Point2::new(a.x + t * d.x, a.y + t * d.y))
}

/// Distance between polygon boundaries; zero when they touch or overlap.
fn polygon_distance(p: &Polygon, q: &Polygon) -> f64 {
    let mut best = f64::INFINITY;
    for (a, b) in p.edges() {
        for (c, d) in q.edges() {
            if segments_cross(a, b, c, d) {
                return 0.0;
            }
            best = best
                .min(point_segment_distance(a, c, d))
                .min(point_segment_distance(b, c, d))
                .min(point_segment_distance(c, a, b))
                .min(point_segment_distance(d, a, b));
        }
    }
    let nested = p.vertices().iter().any(|v| point_in_polygon(*v, q) != Location::Outside)
        || q.vertices().iter().any(|v| point_in_polygon(*v, p) != Location::Outside);
    if nested {
        0.0
    } else {
        best
    }
}

fn clearance(p: Point2, poly: &Polygon) -> f64 {
    if point_in_polygon(p, poly) != Location::Outside {
        return 0.0;
    }
    poly.edges().map(|(a, b)| point_segment_distance(p, a, b)).fold(f64::INFINITY, f64::min)
}

fn round3(v: f64) -> f64 {
    (v * 1000.0).round() / 1000.0
}

/// Convex hull of 4–8 random points in an ellipse inscribed in a random
/// sub-box, snapped to a 1e-3 grid. `None` when the hull is too small or
/// has a short edge.
fn candidate(rng: &mut ChaCha8Rng, min_vertices: usize) -> Option<Polygon> {
    let points = WeightedIndex::new([3, 3, 2, 1, 1]).expect("weights");
    let count = 4 + points.sample(rng);
    let (w, h) = (rng.gen_range(0.12..0.4), rng.gen_range(0.12..0.4));
    let x0 = rng.gen_range(MARGIN..1.0 - MARGIN - w);
    let y0 = rng.gen_range(MARGIN..1.0 - MARGIN - h);
    let (cx, cy) = (x0 + w / 2.0, y0 + h / 2.0);
    let pts: Vec<Point2> = (0..count)
        .map(|_| {
            let phi = rng.gen_range(0.0..std::f64::consts::TAU);
            let r = rng.gen_range(0.6f64..1.0).sqrt();
            Point2::new(round3(cx + r * w / 2.0 * phi.cos()), round3(cy + r * h / 2.0 * phi.sin()))
        })
        .collect();
    let hull: Vec<Point2> = convex_hull(&pts).into_iter().map(|i| pts[i]).collect();
    if hull.len() < min_vertices.max(3) {
        return None;
    }
    let n = hull.len();
    if (0..n).any(|i| hull[i].dist(&hull[(i + 1) % n]) < 0.02) {
        return None;
    }
    Polygon::new(hull).ok()
}

/// Deterministic random environment in the unit square. Obstacles are drawn
/// one after another from a single stream, so the first `k` obstacles of
/// `gen_env(seed, n)` are those of `gen_env(seed, k)`.
pub fn gen_env(seed: u64, n_obstacles: usize) -> Environment {
    gen_env_with(seed, n_obstacles, 4)
}

pub fn gen_env_with(seed: u64, n_obstacles: usize, min_vertices: usize) -> Environment {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let defaults = FootstepParams::default();
    let mut obstacles: Vec<Polygon> = Vec::with_capacity(n_obstacles);
    for _ in 0..n_obstacles {
        let mut placed = false;
        for _ in 0..MAX_ATTEMPTS {
            let Some(poly) = candidate(&mut rng, min_vertices) else { continue };
            let poses_clear = [defaults.start, defaults.goal].iter().all(|&p| clearance(p, &poly) >= POSE_CLEARANCE);
            if poses_clear && obstacles.iter().all(|o| polygon_distance(o, &poly) >= MARGIN) {
                obstacles.push(poly);
                placed = true;
                break;
            }
        }
        assert!(placed, "could not place obstacle {} for seed {seed}", obstacles.len() + 1);
    }
    Environment { bounds: Rect::UNIT, obstacles, seed: Some(seed) }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord, Serialize)]
pub enum Method {
    /// Independent branching on the merged cover.
    #[serde(rename = "ib")]
    Ib,
    /// Independent branching on the cover as produced, unmerged.
    #[serde(rename = "ib-orig")]
    IbOrig,
    #[serde(rename = "bigm")]
    BigM,
}

impl Method {
    pub const ALL: [Method; 3] = [Method::Ib, Method::IbOrig, Method::BigM];

    pub fn as_str(self) -> &'static str {
        match self {
            Method::Ib => "ib",
            Method::IbOrig => "ib-orig",
            Method::BigM => "bigm",
        }
    }
}

impl fmt::Display for Method {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.as_str())
    }
}

impl FromStr for Method {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, String> {
        match s {
            "ib" => Ok(Method::Ib),
            "ib-orig" => Ok(Method::IbOrig),
            "bigm" => Ok(Method::BigM),
            _ => Err(format!("unknown method {s:?} (expected ib, ib-orig or bigm)")),
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineParams {
    pub footstep: FootstepParams,
    pub limits: Limits,
    /// Greedily merge adjacent faces before building the conflict graph.
    pub merge_faces: bool,
}

impl Default for PipelineParams {
    fn default() -> Self {
        Self { footstep: FootstepParams::default(), limits: Limits::with_time(300.0), merge_faces: false }
    }
}

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error(transparent)]
    Geometry(#[from] GeometryError),
    #[error(transparent)]
    Partition(#[from] PartitionError),
    #[error(transparent)]
    Formulation(#[from] FormulationError),
    #[error(transparent)]
    Solver(#[from] SolverError),
    #[error("partition is not pairwise IB-representable (witness {0:?})")]
    NotIbRepresentable([usize; 3]),
}

/// Outcome of one (scenario, method) run.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum RunStatus {
    Optimal,
    Infeasible,
    Unbounded,
    TimeLimit,
    NodeLimit,
    /// An IB method was asked for on a partition without a pairwise IB
    /// scheme; nothing was solved.
    NotIbRepresentable,
}

impl From<MilpStatus> for RunStatus {
    fn from(s: MilpStatus) -> Self {
        match s {
            MilpStatus::Optimal => RunStatus::Optimal,
            MilpStatus::Infeasible => RunStatus::Infeasible,
            MilpStatus::Unbounded => RunStatus::Unbounded,
            MilpStatus::TimeLimit => RunStatus::TimeLimit,
            MilpStatus::NodeLimit => RunStatus::NodeLimit,
        }
    }
}

impl RunStatus {
    pub fn as_str(self) -> &'static str {
        match self {
            RunStatus::Optimal => "optimal",
            RunStatus::Infeasible => "infeasible",
            RunStatus::Unbounded => "unbounded",
            RunStatus::TimeLimit => "time-limit",
            RunStatus::NodeLimit => "node-limit",
            RunStatus::NotIbRepresentable => "not-ib-representable",
        }
    }

    pub fn solved(self) -> bool {
        self != RunStatus::NotIbRepresentable
    }
}

/// One (scenario, method) pair. `seconds` is timing-dependent; everything
/// else is a function of the inputs. Model counts are those of the
/// assignment constraints and are zero when nothing was solved.
#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BenchRecord {
    pub scenario: u64,
    pub obstacles: usize,
    pub method: Method,
    pub status: RunStatus,
    pub seconds: f64,
    pub nodes: usize,
    pub objective: Option<f64>,
    pub binaries: usize,
    pub continuous: usize,
    pub inequalities: usize,
    pub equalities: usize,
    pub depth_original: usize,
    pub depth_merged: usize,
    pub vertices: usize,
    pub free_faces: usize,
    pub halfspaces: usize,
}

/// CDT, partition, conflict graph and covers: the model-independent stages.
#[derive(Debug, Clone)]
pub struct Prepared {
    pub triangulation: Triangulation,
    pub partition: Partition,
    pub ib_check: IbCheck,
    pub conflict: ConflictGraph,
    pub cover: CoverReport,
    pub merged: BicliqueCover,
    pub big_m: BigMData,
}

pub fn prepare(env: &Environment, merge_faces: bool) -> Result<Prepared, PipelineError> {
    let triangulation = constrained_delaunay(env)?;
    let mut partition = partition_from_cdt(&triangulation)?;
    if merge_faces {
        partition = merge_all(&partition).0;
    }
    let cdc = partition.cdc();
    let ib_check = is_pairwise_ib_representable(&cdc);
    let conflict = conflict_graph(&cdc);
    let cover = biclique_cover_with_report(&FiniteElementGraph::from_cdc(&cdc));
    let merged = merge_cover(&cover.cover, &conflict);
    let big_m = big_m_values(&partition.halfspaces(), &env.bounds);
    Ok(Prepared { triangulation, partition, ib_check, conflict, cover, merged, big_m })
}

/// The footstep program for `method`. IB methods need a pairwise IB
/// scheme: without one the cover admits points inside obstacles.
pub fn build_model(env: &Environment, prep: &Prepared, method: Method, params: &FootstepParams) -> Result<MipModel, PipelineError> {
    if method != Method::BigM && !prep.ib_check.representable {
        return Err(PipelineError::NotIbRepresentable(prep.ib_check.witness.unwrap_or_default()));
    }
    let assignment = match method {
        Method::Ib => Assignment::Ib(&prep.merged),
        Method::IbOrig => Assignment::Ib(&prep.cover.cover),
        Method::BigM => Assignment::BigM(&prep.big_m),
    };
    Ok(footstep_model(env, &prep.partition, assignment, params)?)
}

/// Record with the model-independent columns filled in.
fn base_record(env: &Environment, prep: &Prepared, method: Method) -> BenchRecord {
    BenchRecord {
        scenario: env.seed.unwrap_or(0),
        obstacles: env.obstacles.len(),
        method,
        status: RunStatus::NotIbRepresentable,
        seconds: 0.0,
        nodes: 0,
        objective: None,
        binaries: 0,
        continuous: 0,
        inequalities: 0,
        equalities: 0,
        depth_original: prep.cover.cover.depth(),
        depth_merged: prep.merged.depth(),
        vertices: prep.partition.ground_set.len(),
        free_faces: prep.partition.len(),
        halfspaces: prep.partition.halfspace_count(),
    }
}

/// Everything the pipeline computed on the way to a record.
#[derive(Debug, Clone)]
pub struct PipelineRun {
    pub record: BenchRecord,
    pub prepared: Prepared,
    pub model: MipModel,
    pub result: BnbResult,
}

pub fn solve_prepared(
    env: &Environment,
    prep: &Prepared,
    method: Method,
    params: &PipelineParams,
) -> Result<(BenchRecord, MipModel, BnbResult), PipelineError> {
    let model = build_model(env, prep, method, &params.footstep)?;
    let result = solve_milp(&model, params.limits)?;
    let ModelSummary { binaries, continuous, inequalities, equalities } = model.summary();
    let record = BenchRecord {
        status: result.status.into(),
        seconds: result.seconds,
        nodes: result.nodes,
        objective: result.objective,
        binaries,
        continuous,
        inequalities,
        equalities,
        ..base_record(env, prep, method)
    };
    Ok((record, model, result))
}

pub fn run_pipeline(env: &Environment, method: Method, params: &PipelineParams) -> Result<PipelineRun, PipelineError> {
    let prepared = prepare(env, params.merge_faces)?;
    let (record, model, result) = solve_prepared(env, &prepared, method, params)?;
    Ok(PipelineRun { record, prepared, model, result })
}

/// Like [`run_pipeline`] but an unrepresentable partition yields a record
/// rather than an error.
pub fn bench_record(env: &Environment, method: Method, params: &PipelineParams) -> Result<BenchRecord, PipelineError> {
    let prep = prepare(env, params.merge_faces)?;
    match solve_prepared(env, &prep, method, params) {
        Ok((record, _, _)) => Ok(record),
        Err(PipelineError::NotIbRepresentable(_)) => Ok(base_record(env, &prep, method)),
        Err(e) => Err(e),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_obstacles_is_the_unit_square() {
        let env = gen_env(1, 0);
        assert!(env.obstacles.is_empty());
        assert_eq!(env.bounds, Rect::UNIT);
    }

    #[test]
    fn seed_47_three_obstacles() {
        let env = gen_env(47, 3);
        assert_eq!(env.obstacles.len(), 3);
        env.validate().unwrap();
        for o in &env.obstacles {
            assert!((4..=6).contains(&o.len()), "{} vertices", o.len());
        }
        assert_eq!(env.to_json(), gen_env(47, 3).to_json());
    }

    #[test]
    fn prefix_property() {
        let full = gen_env(9, 3);
        for k in 0..3 {
            assert_eq!(gen_env(9, k).obstacles[..], full.obstacles[..k]);
        }
    }

    #[test]
    fn distance_of_separated_squares() {
        let sq = |x: f64| {
            Polygon::new(vec![
                Point2::new(x, 0.0),
                Point2::new(x + 1.0, 0.0),
                Point2::new(x + 1.0, 1.0),
                Point2::new(x, 1.0),
            ])
            .unwrap()
        };
        assert!((polygon_distance(&sq(0.0), &sq(1.5)) - 0.5).abs() < 1e-12);
        assert_eq!(polygon_distance(&sq(0.0), &sq(0.5)), 0.0);
    }

    #[test]
    fn method_names_round_trip() {
        for m in Method::ALL {
            assert_eq!(m.as_str().parse::<Method>().unwrap(), m);
        }
    }

    #[test]
    fn empty_square_pipeline() {
        let mut params = PipelineParams::default();
        params.footstep.steps = 6;
        // Two triangles: the corners off the diagonal conflict.
        let run = run_pipeline(&gen_env(1, 0), Method::Ib, &params).unwrap();
        assert_eq!(run.record.depth_original, 1);
        assert_eq!(run.record.status, RunStatus::Optimal);

        // One face and no heading or trim choices: nothing to branch on.
        params.merge_faces = true;
        params.footstep.headings = 1;
        params.footstep.trim = false;
        let run = run_pipeline(&gen_env(1, 0), Method::Ib, &params).unwrap();
        assert_eq!((run.record.free_faces, run.record.depth_original), (1, 0));
        assert_eq!(run.record.status, RunStatus::Optimal);
        assert_eq!(run.record.nodes, 1);
    }
}
