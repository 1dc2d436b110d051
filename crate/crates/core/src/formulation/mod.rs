//! Mixed-integer models: big-M and independent-branching waypoint
//! fragments, the footstep planning program, and LP file I/O.

mod footstep;
mod lp;
mod waypoint;

pub use footstep::{footholds, footstep_model, trimmed_steps, Assignment, FootstepParams, Objective, ReachPolygon};
pub use lp::{parse_lp, write_lp, LpParseError};
pub use waypoint::{
    add_big_m_waypoint, add_ib_waypoint, big_m_values, big_m_waypoint, ib_waypoint, BigMData, WaypointVars,
};

use std::collections::HashMap;

use serde::Serialize;
use thiserror::Error;

#[derive(Debug, Error, Clone, PartialEq)]
pub enum FormulationError {
    #[error("start pose is not in free space")]
    InfeasibleStart,
    #[error("goal pose is not in free space")]
    InfeasibleGoal,
    #[error("invalid parameter: {0}")]
    InvalidParameter(String),
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum VarType {
    Continuous,
    Binary,
}

/// What part of the model a variable or row belongs to. Size summaries
/// count the [`Group::Assignment`] part: the disjunctive constraint that
/// keeps each waypoint in free space.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize)]
#[serde(rename_all = "lowercase")]
pub enum Group {
    Assignment,
    /// Ties the convex multipliers to the waypoint coordinates.
    Linking,
    Motion,
    Objective,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Variable {
    pub name: String,
    pub lower: f64,
    pub upper: f64,
    pub var_type: VarType,
    pub group: Group,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Sense {
    Le,
    Ge,
    Eq,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Constraint {
    pub name: String,
    pub terms: Vec<(usize, f64)>,
    pub sense: Sense,
    pub rhs: f64,
    pub group: Group,
}

impl Constraint {
    pub fn activity(&self, values: &[f64]) -> f64 {
        self.terms.iter().map(|&(j, a)| a * values[j]).sum()
    }

    /// Amount by which `values` violates the row; zero when satisfied.
    pub fn violation(&self, values: &[f64]) -> f64 {
        let lhs = self.activity(values);
        match self.sense {
            Sense::Le => (lhs - self.rhs).max(0.0),
            Sense::Ge => (self.rhs - lhs).max(0.0),
            Sense::Eq => (lhs - self.rhs).abs(),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ObjectiveSense {
    #[default]
    Minimize,
    Maximize,
}

#[derive(Debug, Clone, Default, PartialEq)]
pub struct MipModel {
    pub variables: Vec<Variable>,
    pub constraints: Vec<Constraint>,
    pub sense: ObjectiveSense,
    pub objective: Vec<(usize, f64)>,
    /// `(i, j, q)` adds `q·v_i·v_j` to the objective.
    pub quadratic: Vec<(usize, usize, f64)>,
    pub constant: f64,
    names: HashMap<String, usize>,
}

/// Variable and row counts, the shape of the size tables.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize)]
pub struct ModelSummary {
    pub binaries: usize,
    pub continuous: usize,
    pub inequalities: usize,
    pub equalities: usize,
}

impl MipModel {
    pub fn new() -> Self {
        Self::default()
    }

    /// Adds a variable; panics on a duplicate name or empty domain.
    pub fn add_var(&mut self, name: impl Into<String>, lower: f64, upper: f64, var_type: VarType, group: Group) -> usize {
        let name = name.into();
        assert!(lower <= upper, "empty domain for {name}: [{lower}, {upper}]");
        let id = self.variables.len();
        let previous = self.names.insert(name.clone(), id);
        assert!(previous.is_none(), "duplicate variable {name}");
        self.variables.push(Variable { name, lower, upper, var_type, group });
        id
    }

    pub fn add_binary(&mut self, name: impl Into<String>, group: Group) -> usize {
        self.add_var(name, 0.0, 1.0, VarType::Binary, group)
    }

    pub fn add_continuous(&mut self, name: impl Into<String>, lower: f64, upper: f64, group: Group) -> usize {
        self.add_var(name, lower, upper, VarType::Continuous, group)
    }

    /// Adds a row; repeated variables in `terms` are summed.
    pub fn add_constraint(
        &mut self,
        name: impl Into<String>,
        terms: Vec<(usize, f64)>,
        sense: Sense,
        rhs: f64,
        group: Group,
    ) -> usize {
        let mut merged: Vec<(usize, f64)> = Vec::with_capacity(terms.len());
        for (j, a) in terms {
            assert!(j < self.variables.len(), "row references undeclared variable {j}");
            match merged.iter_mut().find(|(k, _)| *k == j) {
                Some(t) => t.1 += a,
                None => merged.push((j, a)),
            }
        }
        merged.retain(|&(_, a)| a != 0.0);
        self.constraints.push(Constraint { name: name.into(), terms: merged, sense, rhs, group });
        self.constraints.len() - 1
    }

    pub fn var(&self, name: &str) -> Option<usize> {
        self.names.get(name).copied()
    }

    pub fn num_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn binaries(&self) -> impl Iterator<Item = usize> + '_ {
        (0..self.variables.len()).filter(|&j| self.variables[j].var_type == VarType::Binary)
    }

    pub fn is_quadratic(&self) -> bool {
        !self.quadratic.is_empty()
    }

    pub fn objective_value(&self, values: &[f64]) -> f64 {
        let lin: f64 = self.objective.iter().map(|&(j, c)| c * values[j]).sum();
        let quad: f64 = self.quadratic.iter().map(|&(i, j, q)| q * values[i] * values[j]).sum();
        lin + quad + self.constant
    }

    /// Largest bound or row violation of `values`, independent of any solver
    /// state.
    pub fn max_violation(&self, values: &[f64]) -> f64 {
        let bounds = self
            .variables
            .iter()
            .zip(values)
            .map(|(v, &x)| (v.lower - x).max(x - v.upper).max(0.0));
        let rows = self.constraints.iter().map(|c| c.violation(values));
        bounds.chain(rows).fold(0.0, f64::max)
    }

    /// Largest distance of a binary from the nearest integer.
    pub fn max_fractionality(&self, values: &[f64]) -> f64 {
        self.binaries().map(|j| (values[j] - values[j].round()).abs()).fold(0.0, f64::max)
    }

    pub fn summary_of(&self, group: Group) -> ModelSummary {
        let mut s = ModelSummary::default();
        for v in self.variables.iter().filter(|v| v.group == group) {
            match v.var_type {
                VarType::Binary => s.binaries += 1,
                VarType::Continuous => s.continuous += 1,
            }
        }
        for c in self.constraints.iter().filter(|c| c.group == group) {
            match c.sense {
                Sense::Eq => s.equalities += 1,
                _ => s.inequalities += 1,
            }
        }
        s
    }

    /// Counts of the disjunctive assignment constraints only.
    pub fn summary(&self) -> ModelSummary {
        self.summary_of(Group::Assignment)
    }

    pub fn totals(&self) -> ModelSummary {
        let mut s = ModelSummary::default();
        for v in &self.variables {
            match v.var_type {
                VarType::Binary => s.binaries += 1,
                VarType::Continuous => s.continuous += 1,
            }
        }
        for c in &self.constraints {
            match c.sense {
                Sense::Eq => s.equalities += 1,
                _ => s.inequalities += 1,
            }
        }
        s
    }

    /// `{"binaries": .., "continuous": .., "inequalities": .., "equalities": .., "total": {..}}`
    pub fn summary_json(&self) -> String {
        #[derive(Serialize)]
        struct Out {
            #[serde(flatten)]
            assignment: ModelSummary,
            total: ModelSummary,
        }
        serde_json::to_string_pretty(&Out { assignment: self.summary(), total: self.totals() }).expect("serialize summary")
    }

    /// Appends `other`, renaming nothing; variable names must not clash.
    pub fn append(&mut self, other: &MipModel) -> Vec<usize> {
        let map: Vec<usize> = other
            .variables
            .iter()
            .map(|v| self.add_var(v.name.clone(), v.lower, v.upper, v.var_type, v.group))
            .collect();
        for c in &other.constraints {
            let terms = c.terms.iter().map(|&(j, a)| (map[j], a)).collect();
            self.add_constraint(c.name.clone(), terms, c.sense, c.rhs, c.group);
        }
        self.objective.extend(other.objective.iter().map(|&(j, c)| (map[j], c)));
        self.quadratic.extend(other.quadratic.iter().map(|&(i, j, q)| (map[i], map[j], q)));
        self.constant += other.constant;
        map
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn violation_and_summary() {
        let mut m = MipModel::new();
        let x = m.add_continuous("x", 0.0, 1.0, Group::Motion);
        let z = m.add_binary("z", Group::Assignment);
        m.add_constraint("c", vec![(x, 1.0), (z, 1.0), (x, 1.0)], Sense::Le, 1.0, Group::Assignment);
        m.add_constraint("e", vec![(z, 1.0)], Sense::Eq, 1.0, Group::Assignment);
        assert_eq!(m.constraints[0].terms, vec![(x, 2.0), (z, 1.0)]);
        assert_eq!(m.max_violation(&[0.0, 1.0]), 0.0);
        assert!((m.max_violation(&[0.5, 1.0]) - 1.0).abs() < 1e-12);
        assert!((m.max_violation(&[1.5, 0.0]) - 2.0).abs() < 1e-12);
        assert_eq!(m.summary(), ModelSummary { binaries: 1, continuous: 0, inequalities: 1, equalities: 1 });
        assert_eq!(m.totals().continuous, 1);
        assert_eq!(m.max_fractionality(&[0.3, 0.75]), 0.25);
    }

    #[test]
    #[should_panic(expected = "duplicate variable")]
    fn duplicate_names_rejected() {
        let mut m = MipModel::new();
        m.add_binary("z", Group::Assignment);
        m.add_binary("z", Group::Assignment);
    }
}
