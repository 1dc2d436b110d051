//! In-process LP and MILP solving: a dense dual simplex and best-bound
//! branch and bound over binary variables. No presolve, cuts or primal
//! heuristics, so node counts reflect formulation strength.

mod bnb;
mod simplex;

pub use bnb::{solve_milp, BnbResult, Limits, MilpStatus};

use serde::Serialize;
use thiserror::Error;

use crate::formulation::MipModel;
use simplex::{Simplex, Status, StdLp, BIG};

/// Feasibility tolerance on rows and bounds.
pub const FEASIBILITY_TOL: f64 = 1e-7;
/// Integrality tolerance on binaries.
pub const INTEGRALITY_TOL: f64 = 1e-6;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum SolverError {
    #[error("unsupported model: {0}")]
    UnsupportedModel(String),
    #[error("simplex iteration limit reached")]
    IterationLimit,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "kebab-case")]
pub enum LpStatus {
    Optimal,
    Infeasible,
    Unbounded,
}

#[derive(Debug, Clone, PartialEq, Serialize)]
pub struct LpSolution {
    pub status: LpStatus,
    pub objective: f64,
    pub values: Vec<f64>,
    /// Reduced costs of the model variables (minimisation sense).
    pub reduced_costs: Vec<f64>,
    /// Row duals.
    pub duals: Vec<f64>,
    /// Basic variables; indices `≥ values.len()` are row activities.
    pub basis: Vec<usize>,
    pub iterations: usize,
}

/// Solves the continuous relaxation of `m` (binaries relaxed to `[0, 1]`).
pub fn solve_lp(m: &MipModel) -> Result<LpSolution, SolverError> {
    if m.is_quadratic() {
        return Err(SolverError::UnsupportedModel("quadratic objective".into()));
    }
    let lp = StdLp::from_model(m);
    let mut s = Simplex::new(&lp);
    let status = s.solve();
    Ok(lp_solution(m, &lp, &s, status)?)
}

pub(crate) fn lp_solution(m: &MipModel, lp: &StdLp, s: &Simplex<'_>, status: Status) -> Result<LpSolution, SolverError> {
    let n = lp.n;
    let values: Vec<f64> = s.x[..n].to_vec();
    let status = match status {
        Status::IterationLimit => return Err(SolverError::IterationLimit),
        Status::Infeasible => LpStatus::Infeasible,
        Status::Optimal => {
            let hits_big = (0..n).any(|j| {
                let v = &m.variables[j];
                (v.upper.is_infinite() && values[j] >= BIG * (1.0 - 1e-9))
                    || (v.lower.is_infinite() && values[j] <= -BIG * (1.0 - 1e-9))
            });
            if hits_big {
                LpStatus::Unbounded
            } else {
                LpStatus::Optimal
            }
        }
    };
    let objective = match status {
        LpStatus::Optimal => m.objective_value(&values),
        LpStatus::Infeasible => f64::NAN,
        LpStatus::Unbounded => lp.sign * f64::NEG_INFINITY,
    };
    Ok(LpSolution {
        status,
        objective,
        values,
        reduced_costs: s.d[..n].to_vec(),
        duals: s.duals(),
        basis: (0..n + lp.m).filter(|&j| s.is_basic(j)).collect(),
        iterations: s.iterations,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::formulation::{Group, ObjectiveSense, Sense};

    #[test]
    fn single_lower_row() {
        let mut m = MipModel::new();
        let x = m.add_continuous("x", 0.0, 1.0, Group::Motion);
        m.objective.push((x, 1.0));
        m.add_constraint("c", vec![(x, 1.0)], Sense::Ge, 0.3, Group::Motion);
        let s = solve_lp(&m).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective - 0.3).abs() < 1e-12);
    }

    #[test]
    fn contradictory_rows() {
        let mut m = MipModel::new();
        let x = m.add_continuous("x", -5.0, 5.0, Group::Motion);
        m.add_constraint("a", vec![(x, 1.0)], Sense::Le, 0.0, Group::Motion);
        m.add_constraint("b", vec![(x, 1.0)], Sense::Ge, 1.0, Group::Motion);
        assert_eq!(solve_lp(&m).unwrap().status, LpStatus::Infeasible);
    }

    #[test]
    fn unbounded_direction() {
        let mut m = MipModel::new();
        let x = m.add_continuous("x", 0.0, f64::INFINITY, Group::Motion);
        m.sense = ObjectiveSense::Maximize;
        m.objective.push((x, 1.0));
        assert_eq!(solve_lp(&m).unwrap().status, LpStatus::Unbounded);
    }

    #[test]
    fn small_textbook_lp() {
        // max 3x + 5y, x ≤ 4, 2y ≤ 12, 3x + 2y ≤ 18 → (2, 6), 36.
        let mut m = MipModel::new();
        let x = m.add_continuous("x", 0.0, f64::INFINITY, Group::Motion);
        let y = m.add_continuous("y", 0.0, f64::INFINITY, Group::Motion);
        m.sense = ObjectiveSense::Maximize;
        m.objective = vec![(x, 3.0), (y, 5.0)];
        m.add_constraint("a", vec![(x, 1.0)], Sense::Le, 4.0, Group::Motion);
        m.add_constraint("b", vec![(y, 2.0)], Sense::Le, 12.0, Group::Motion);
        m.add_constraint("c", vec![(x, 3.0), (y, 2.0)], Sense::Le, 18.0, Group::Motion);
        let s = solve_lp(&m).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective - 36.0).abs() < 1e-9);
        assert!((s.values[0] - 2.0).abs() < 1e-9 && (s.values[1] - 6.0).abs() < 1e-9);
        assert!(m.max_violation(&s.values) < FEASIBILITY_TOL);
    }

    #[test]
    fn equality_rows_and_free_variables() {
        // min x + y s.t. x − y = 1, x + y ≥ 3 with x, y free → x = 2, y = 1.
        let mut m = MipModel::new();
        let x = m.add_continuous("x", f64::NEG_INFINITY, f64::INFINITY, Group::Motion);
        let y = m.add_continuous("y", f64::NEG_INFINITY, f64::INFINITY, Group::Motion);
        m.objective = vec![(x, 1.0), (y, 1.0)];
        m.add_constraint("e", vec![(x, 1.0), (y, -1.0)], Sense::Eq, 1.0, Group::Motion);
        m.add_constraint("g", vec![(x, 1.0), (y, 1.0)], Sense::Ge, 3.0, Group::Motion);
        let s = solve_lp(&m).unwrap();
        assert_eq!(s.status, LpStatus::Optimal);
        assert!((s.objective - 3.0).abs() < 1e-7);
        assert!(m.max_violation(&s.values) < FEASIBILITY_TOL);
    }

    #[test]
    fn quadratic_rejected() {
        let mut m = MipModel::new();
        let x = m.add_continuous("x", 0.0, 1.0, Group::Motion);
        m.quadratic.push((x, x, 1.0));
        assert!(matches!(solve_lp(&m), Err(SolverError::UnsupportedModel(_))));
    }
}
