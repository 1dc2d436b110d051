//! Best-bound branch and bound on the binary variables.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use serde::Serialize;

use super::simplex::{Basis, Simplex, Status, StdLp};
use super::{lp_solution, LpStatus, SolverError, INTEGRALITY_TOL};
use crate::formulation::MipModel;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct Limits {
    pub time: Option<Duration>,
    /// Relative gap at which the search stops.
    pub gap: f64,
    pub nodes: Option<usize>,
}

impl Default for Limits {
    fn default() -> Self {
        Self { time: None, gap: 1e-9, nodes: None }
    }
}

impl Limits {
    pub fn with_time(secs: f64) -> Self {
        Self { time: Some(Duration::from_secs_f64(secs)), ..Self::default() }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum MilpStatus {
    Optimal,
    Infeasible,
    Unbounded,
    TimeLimit,
    NodeLimit,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct BnbResult {
    pub status: MilpStatus,
    /// Incumbent objective, in the model's sense.
    pub objective: Option<f64>,
    pub bound: f64,
    pub gap: Option<f64>,
    pub nodes: usize,
    pub seconds: f64,
    pub lp_iterations: usize,
    #[serde(skip)]
    pub values: Option<Vec<f64>>,
}

impl BnbResult {
    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("serialize result")
    }
}

struct Node {
    id: usize,
    bound: f64,
    fixings: Vec<(usize, f64)>,
    basis: Basis,
    branch: usize,
}

impl PartialEq for Node {
    fn eq(&self, other: &Self) -> bool {
        self.cmp(other) == Ordering::Equal
    }
}

impl Eq for Node {}

impl PartialOrd for Node {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

impl Ord for Node {
    /// Max-heap order: smallest bound first, then oldest node.
    fn cmp(&self, other: &Self) -> Ordering {
        other.bound.total_cmp(&self.bound).then_with(|| other.id.cmp(&self.id))
    }
}

/// Most fractional binary, lowest index on ties.
fn branching_variable(binaries: &[usize], x: &[f64]) -> Option<usize> {
    let mut best: Option<(usize, f64)> = None;
    for &j in binaries {
        let f = (x[j] - x[j].floor()).min(x[j].ceil() - x[j]);
        if f > INTEGRALITY_TOL && best.is_none_or(|(_, b)| f > b) {
            best = Some((j, f));
        }
    }
    best.map(|(j, _)| j)
}

pub fn solve_milp(m: &MipModel, limits: Limits) -> Result<BnbResult, SolverError> {
    if m.is_quadratic() {
        return Err(SolverError::UnsupportedModel("quadratic objective".into()));
    }
    let start = Instant::now();
    let lp = StdLp::from_model(m);
    let binaries: Vec<usize> = m.binaries().collect();
    // Internal objective is minimised: sign · (model objective − constant).
    let to_model = |internal: f64| lp.sign * internal + m.constant;
    let tol = |v: f64| 1e-9 * v.abs().max(1.0);
    let out_of_time = || limits.time.is_some_and(|t| start.elapsed() >= t);

    let mut s = Simplex::new(&lp);
    let root_lo = s.lo.clone();
    let root_hi = s.hi.clone();
    let status = s.solve();
    let mut nodes = 1;
    let mut iterations = s.iterations;
    let finish = |status, incumbent: Option<(f64, Vec<f64>)>, bound: f64, nodes, iterations| {
        let objective = incumbent.as_ref().map(|(o, _)| to_model(*o));
        let gap = incumbent.as_ref().map(|(o, _)| ((o - bound) / o.abs().max(1.0)).max(0.0));
        BnbResult {
            status,
            objective,
            bound: to_model(bound),
            gap,
            nodes,
            seconds: start.elapsed().as_secs_f64(),
            lp_iterations: iterations,
            values: incumbent.map(|(_, v)| v),
        }
    };
    match status {
        Status::IterationLimit => return Err(SolverError::IterationLimit),
        Status::Infeasible => return Ok(finish(MilpStatus::Infeasible, None, f64::INFINITY, nodes, iterations)),
        Status::Optimal => {}
    }
    if lp_solution(m, &lp, &s, status)?.status == LpStatus::Unbounded {
        return Ok(finish(MilpStatus::Unbounded, None, f64::NEG_INFINITY, nodes, iterations));
    }
    let root_obj = s.objective();
    let mut incumbent: Option<(f64, Vec<f64>)> = None;
    let mut bound = root_obj;
    let Some(branch) = branching_variable(&binaries, &s.x) else {
        let values = s.x[..lp.n].to_vec();
        return Ok(finish(MilpStatus::Optimal, Some((root_obj, values)), root_obj, nodes, iterations));
    };

    let mut heap = BinaryHeap::new();
    let mut next_id = 1;
    heap.push(Node { id: 0, bound: root_obj, fixings: Vec::new(), basis: s.basis(), branch });
    let mut stop = None;
    let mut gap_stop = false;
    while let Some(node) = heap.pop() {
        let inc = incumbent.as_ref().map(|(o, _)| *o);
        if let Some(o) = inc {
            if node.bound >= o - tol(o) {
                continue;
            }
            if (o - node.bound) / o.abs().max(1.0) <= limits.gap {
                bound = bound.max(node.bound);
                gap_stop = true;
                break;
            }
        }
        bound = bound.max(node.bound);
        if out_of_time() {
            heap.push(node);
            stop = Some(MilpStatus::TimeLimit);
            break;
        }
        if limits.nodes.is_some_and(|n| nodes >= n) {
            heap.push(node);
            stop = Some(MilpStatus::NodeLimit);
            break;
        }

        s.lo.clone_from(&root_lo);
        s.hi.clone_from(&root_hi);
        for &(j, v) in &node.fixings {
            s.set_bounds(j, v, v);
        }
        s.load_basis(&node.basis);
        let parent = s.clone();
        for (k, value) in [0.0, 1.0].into_iter().enumerate() {
            if k == 1 {
                s = parent.clone();
            }
            s.set_bounds(node.branch, value, value);
            let before = s.iterations;
            let status = s.solve();
            iterations += s.iterations - before;
            nodes += 1;
            match status {
                Status::IterationLimit => return Err(SolverError::IterationLimit),
                Status::Infeasible => continue,
                Status::Optimal => {}
            }
            let obj = s.objective();
            if let Some((o, _)) = &incumbent {
                if obj >= o - tol(*o) {
                    continue;
                }
            }
            let mut fixings = node.fixings.clone();
            fixings.push((node.branch, value));
            match branching_variable(&binaries, &s.x) {
                None => incumbent = Some((obj, s.x[..lp.n].to_vec())),
                Some(branch) => {
                    heap.push(Node { id: next_id, bound: obj, fixings, basis: s.basis(), branch });
                    next_id += 1;
                }
            }
        }
    }

    let status = match (stop, &incumbent) {
        (Some(st), _) => st,
        (None, Some(_)) => MilpStatus::Optimal,
        (None, None) => MilpStatus::Infeasible,
    };
    // Lowest bound over open nodes and the incumbent, never below what
    // was already reported.
    let open = heap.iter().map(|n| n.bound).fold(f64::INFINITY, f64::min);
    let final_bound = match (&incumbent, status) {
        (Some((o, _)), MilpStatus::Optimal) if !gap_stop => *o,
        (Some((o, _)), _) => open.min(*o).max(bound.min(*o)),
        (None, MilpStatus::Infeasible) => f64::INFINITY,
        (None, _) => open.max(bound),
    };
    Ok(finish(status, incumbent, final_bound, nodes, iterations))
}
