//! Bounded dual simplex on `A x − s = 0` with every variable boxed.
//!
//! Row activities `s` get finite bounds from the row sense and the
//! activity range implied by the variable bounds, so any basis is made
//! dual feasible by putting each nonbasic variable at the bound matching
//! the sign of its reduced cost. The basis inverse is kept explicitly and
//! updated by row operations; refactorisation exploits that slack columns
//! are unit vectors, so only the square block of structural columns
//! against rows with nonbasic slacks is inverted.

use crate::formulation::{MipModel, ObjectiveSense, Sense};

/// Substitute for infinite variable bounds.
pub const BIG: f64 = 1e9;
const PRIMAL_TOL: f64 = 1e-9;
const DUAL_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const REFACTOR_EVERY: usize = 50;
const DEGENERATE_LIMIT: usize = 60;
const PERTURBATION: f64 = 1e-7;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Status {
    Optimal,
    Infeasible,
    IterationLimit,
}

/// Model in computational form: columns, costs and bounds of the `n`
/// structural and `m` row-activity variables.
#[derive(Debug, Clone)]
pub struct StdLp {
    pub n: usize,
    pub m: usize,
    pub cols: Vec<Vec<(usize, f64)>>,
    pub rows: Vec<Vec<(usize, f64)>>,
    pub cost: Vec<f64>,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    /// `+1` to minimise the model objective, `−1` when it is maximised.
    pub sign: f64,
}

impl StdLp {
    pub fn from_model(model: &MipModel) -> Self {
        let n = model.variables.len();
        let m = model.constraints.len();
        let mut cols = vec![Vec::new(); n];
        let mut rows = vec![Vec::new(); m];
        let mut lo: Vec<f64> = model.variables.iter().map(|v| v.lower.max(-BIG)).collect();
        let mut hi: Vec<f64> = model.variables.iter().map(|v| v.upper.min(BIG)).collect();
        for (i, c) in model.constraints.iter().enumerate() {
            let (mut amin, mut amax) = (0.0, 0.0);
            for &(j, a) in &c.terms {
                cols[j].push((i, a));
                rows[i].push((j, a));
                amin += (a * lo[j]).min(a * hi[j]);
                amax += (a * lo[j]).max(a * hi[j]);
            }
            let slack = 1.0 + 1e-9 * (amin.abs() + amax.abs());
            let (l, u) = match c.sense {
                Sense::Le => ((amin - slack).min(c.rhs), c.rhs),
                Sense::Ge => (c.rhs, (amax + slack).max(c.rhs)),
                Sense::Eq => (c.rhs, c.rhs),
            };
            lo.push(l);
            hi.push(u);
        }
        let sign = match model.sense {
            ObjectiveSense::Minimize => 1.0,
            ObjectiveSense::Maximize => -1.0,
        };
        let mut cost = vec![0.0; n + m];
        for &(j, c) in &model.objective {
            cost[j] += sign * c;
        }
        Self { n, m, cols, rows, cost, lo, hi, sign }
    }
}

/// Basis head plus the side each nonbasic variable sits on.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct Basis {
    pub head: Vec<usize>,
    pub at_upper: Vec<bool>,
}

#[derive(Clone)]
pub struct Simplex<'a> {
    lp: &'a StdLp,
    pub lo: Vec<f64>,
    pub hi: Vec<f64>,
    head: Vec<usize>,
    /// Basis position of each variable, `usize::MAX` when nonbasic.
    pos: Vec<usize>,
    at_upper: Vec<bool>,
    pub x: Vec<f64>,
    pub d: Vec<f64>,
    /// Working costs: the model's, or a perturbed copy during a solve.
    cost: Vec<f64>,
    binv: Vec<f64>,
    since_refactor: usize,
    pub iterations: usize,
}

impl<'a> Simplex<'a> {
    pub fn new(lp: &'a StdLp) -> Self {
        let (n, m) = (lp.n, lp.m);
        let mut s = Self {
            lp,
            lo: lp.lo.clone(),
            hi: lp.hi.clone(),
            head: (n..n + m).collect(),
            pos: vec![usize::MAX; n + m],
            at_upper: vec![false; n + m],
            x: vec![0.0; n + m],
            d: lp.cost.clone(),
            cost: lp.cost.clone(),
            binv: vec![0.0; m * m],
            since_refactor: 0,
            iterations: 0,
        };
        for i in 0..m {
            s.pos[n + i] = i;
            s.binv[i * m + i] = -1.0;
        }
        for j in 0..n {
            s.at_upper[j] = lp.cost[j] < 0.0;
        }
        s.recompute();
        s
    }

    pub fn basis(&self) -> Basis {
        Basis { head: self.head.clone(), at_upper: self.at_upper.clone() }
    }

    /// Installs `basis`; refactorises only if the head differs.
    pub fn load_basis(&mut self, basis: &Basis) {
        if basis.head != self.head {
            self.head = basis.head.clone();
            self.pos.fill(usize::MAX);
            for (i, &j) in self.head.iter().enumerate() {
                self.pos[j] = i;
            }
            if !self.refactor() {
                self.reset_to_slacks();
            }
        }
        self.at_upper = basis.at_upper.clone();
        self.recompute();
    }

    pub fn set_bounds(&mut self, j: usize, lo: f64, hi: f64) {
        self.lo[j] = lo;
        self.hi[j] = hi;
    }

    fn reset_to_slacks(&mut self) {
        let (n, m) = (self.lp.n, self.lp.m);
        self.head = (n..n + m).collect();
        self.pos.fill(usize::MAX);
        self.binv.fill(0.0);
        for i in 0..m {
            self.pos[n + i] = i;
            self.binv[i * m + i] = -1.0;
        }
        self.since_refactor = 0;
    }

    /// Recomputes duals, reduced costs and basic values from `binv`, moving
    /// nonbasic variables to the bound their reduced cost calls for.
    fn recompute(&mut self) {
        let (n, m) = (self.lp.n, self.lp.m);
        let mut y = vec![0.0; m];
        for (i, &j) in self.head.iter().enumerate() {
            let c = self.cost[j];
            if c != 0.0 {
                let row = &self.binv[i * m..(i + 1) * m];
                for k in 0..m {
                    y[k] += c * row[k];
                }
            }
        }
        for j in 0..n + m {
            if self.pos[j] != usize::MAX {
                self.d[j] = 0.0;
                continue;
            }
            self.d[j] = if j < n {
                self.cost[j] - self.lp.cols[j].iter().map(|&(i, a)| y[i] * a).sum::<f64>()
            } else {
                self.cost[j] + y[j - n]
            };
            if self.d[j] < -DUAL_TOL {
                self.at_upper[j] = true;
            } else if self.d[j] > DUAL_TOL {
                self.at_upper[j] = false;
            }
            self.x[j] = if self.at_upper[j] { self.hi[j] } else { self.lo[j] };
        }
        self.recompute_basics();
    }

    /// Shifts every cost by a small deterministic amount in the direction
    /// that keeps its reduced cost's sign, so dual-degenerate problems get
    /// unique ratio tests.
    fn perturb_costs(&mut self) {
        for j in 0..self.cost.len() {
            let c = self.lp.cost[j];
            if self.lo[j] == self.hi[j] {
                self.cost[j] = c;
                continue;
            }
            let h = ((j as u64 + 1).wrapping_mul(0x9E37_79B9_7F4A_7C15) >> 11) as f64 / (1u64 << 53) as f64;
            let eps = PERTURBATION * (1.0 + c.abs()) * (1.0 + h);
            let up = if self.pos[j] == usize::MAX { !self.at_upper[j] } else { c >= 0.0 };
            self.cost[j] = if up { c + eps } else { c - eps };
        }
    }

    fn recompute_basics(&mut self) {
        let (n, m) = (self.lp.n, self.lp.m);
        let mut r = vec![0.0; m];
        for j in 0..n + m {
            if self.pos[j] != usize::MAX {
                continue;
            }
            let v = self.x[j];
            if v == 0.0 {
                continue;
            }
            if j < n {
                for &(i, a) in &self.lp.cols[j] {
                    r[i] += a * v;
                }
            } else {
                r[j - n] -= v;
            }
        }
        for i in 0..m {
            let row = &self.binv[i * m..(i + 1) * m];
            let mut s = 0.0;
            for k in 0..m {
                s += row[k] * r[k];
            }
            self.x[self.head[i]] = -s;
        }
    }

    /// Rebuilds `binv` from the basis head. Returns false if singular.
    fn refactor(&mut self) -> bool {
        let (n, m) = (self.lp.n, self.lp.m);
        self.since_refactor = 0;
        let structural: Vec<usize> = (0..m).filter(|&p| self.head[p] < n).collect();
        let slack_basic: Vec<bool> = (0..m).map(|i| self.pos[n + i] != usize::MAX).collect();
        let r_rows: Vec<usize> = (0..m).filter(|&i| !slack_basic[i]).collect();
        let k = structural.len();
        if r_rows.len() != k {
            return false;
        }
        let mut r_index = vec![usize::MAX; m];
        for (c, &i) in r_rows.iter().enumerate() {
            r_index[i] = c;
        }
        // Gauss-Jordan on [A_RK | I].
        let mut a = vec![0.0; k * k];
        for (c, &p) in structural.iter().enumerate() {
            for &(i, v) in &self.lp.cols[self.head[p]] {
                if r_index[i] != usize::MAX {
                    a[r_index[i] * k + c] = v;
                }
            }
        }
        let mut inv = vec![0.0; k * k];
        for c in 0..k {
            inv[c * k + c] = 1.0;
        }
        for col in 0..k {
            let (piv, best) = (col..k)
                .map(|r| (r, a[r * k + col].abs()))
                .fold((col, -1.0), |acc, x| if x.1 > acc.1 { x } else { acc });
            if best < 1e-11 {
                return false;
            }
            if piv != col {
                for c in 0..k {
                    a.swap(piv * k + c, col * k + c);
                    inv.swap(piv * k + c, col * k + c);
                }
            }
            let p = a[col * k + col];
            for c in 0..k {
                a[col * k + c] /= p;
                inv[col * k + c] /= p;
            }
            for r in 0..k {
                if r == col {
                    continue;
                }
                let f = a[r * k + col];
                if f != 0.0 {
                    for c in 0..k {
                        a[r * k + c] -= f * a[col * k + c];
                        inv[r * k + c] -= f * inv[col * k + c];
                    }
                }
            }
        }
        // inv = A_RK⁻¹: row index = structural position c, column = R row.
        self.binv.fill(0.0);
        for (c, &p) in structural.iter().enumerate() {
            for (rc, &i) in r_rows.iter().enumerate() {
                self.binv[p * m + i] = inv[c * k + rc];
            }
        }
        let mut col_of = vec![usize::MAX; n];
        for (c, &p) in structural.iter().enumerate() {
            col_of[self.head[p]] = c;
        }
        for s in (0..m).filter(|&i| slack_basic[i]) {
            let p = self.pos[n + s];
            let mut row = vec![0.0; k];
            for &(j, v) in &self.lp.rows[s] {
                let c = col_of[j];
                if c != usize::MAX {
                    for rc in 0..k {
                        row[rc] += v * inv[c * k + rc];
                    }
                }
            }
            for (rc, &i) in r_rows.iter().enumerate() {
                self.binv[p * m + i] = row[rc];
            }
            self.binv[p * m + s] = -1.0;
        }
        true
    }

    fn infeasibility(&self, j: usize) -> f64 {
        let tol = PRIMAL_TOL * (1.0 + self.lo[j].abs().max(self.hi[j].abs()).min(1e3));
        let v = self.x[j];
        if v < self.lo[j] - tol {
            self.lo[j] - v
        } else if v > self.hi[j] + tol {
            v - self.hi[j]
        } else {
            0.0
        }
    }

    pub fn objective(&self) -> f64 {
        (0..self.lp.n).map(|j| self.lp.cost[j] * self.x[j]).sum()
    }

    pub fn solve(&mut self) -> Status {
        let (n, m) = (self.lp.n, self.lp.m);
        if (0..n + m).any(|j| self.lo[j] > self.hi[j] + PRIMAL_TOL) {
            return Status::Infeasible;
        }
        // Bound changes since the last solve move nonbasic values; the
        // perturbation is removed again once the perturbed problem is solved.
        self.perturb_costs();
        self.recompute();
        let mut perturbed = true;
        let limit = self.iterations + 50 * (n + m) + 10_000;
        let mut degenerate = 0;
        let mut alpha = vec![0.0; n + m];
        let mut acol = vec![0.0; m];
        let mut checked_optimal = false;
        loop {
            if self.iterations >= limit {
                return Status::IterationLimit;
            }
            let bland = degenerate > DEGENERATE_LIMIT;
            // Leaving row.
            let mut r = usize::MAX;
            let mut best = 0.0;
            for i in 0..m {
                let inf = self.infeasibility(self.head[i]);
                if inf > 0.0 {
                    let better = if bland {
                        r == usize::MAX || self.head[i] < self.head[r]
                    } else {
                        inf > best
                    };
                    if better {
                        r = i;
                        best = inf;
                    }
                }
            }
            if r == usize::MAX && perturbed {
                self.cost.clone_from(&self.lp.cost);
                perturbed = false;
                degenerate = 0;
                if !self.refactor() {
                    self.reset_to_slacks();
                }
                self.recompute();
                continue;
            }
            if r == usize::MAX {
                // Confirm on a fresh factorisation before declaring optimality.
                if checked_optimal || self.since_refactor == 0 {
                    return Status::Optimal;
                }
                if !self.refactor() {
                    self.reset_to_slacks();
                }
                self.recompute();
                checked_optimal = true;
                continue;
            }
            checked_optimal = false;
            let leaving = self.head[r];
            let increase = self.x[leaving] < self.lo[leaving];
            let s = if increase { 1.0 } else { -1.0 };

            let rho = &self.binv[r * m..(r + 1) * m];
            for j in 0..n + m {
                alpha[j] = 0.0;
                if self.pos[j] != usize::MAX || self.lo[j] == self.hi[j] {
                    continue;
                }
                alpha[j] = if j < n {
                    self.lp.cols[j].iter().map(|&(i, a)| rho[i] * a).sum()
                } else {
                    -rho[j - n]
                };
            }

            // Ratio test (two-pass, Harris) over eligible nonbasics.
            let eligible = |j: usize, alpha: &[f64]| -> bool {
                if self.pos[j] != usize::MAX || self.lo[j] == self.hi[j] {
                    return false;
                }
                let dir = if self.at_upper[j] { -1.0 } else { 1.0 };
                s * (-alpha[j] * dir) > PIVOT_TOL
            };
            let mut bound = f64::INFINITY;
            for j in 0..n + m {
                if eligible(j, &alpha) {
                    let dj = self.d[j].abs();
                    let t = if bland { dj / alpha[j].abs() } else { (dj + DUAL_TOL) / alpha[j].abs() };
                    if t < bound {
                        bound = t;
                    }
                }
            }
            if bound == f64::INFINITY {
                return Status::Infeasible;
            }
            let mut q = usize::MAX;
            let mut qa = 0.0;
            for j in 0..n + m {
                if !eligible(j, &alpha) {
                    continue;
                }
                let ratio = self.d[j].abs() / alpha[j].abs();
                if bland {
                    if ratio <= bound * (1.0 + 1e-12) + 1e-15 && q == usize::MAX {
                        q = j;
                    }
                } else if ratio <= bound && alpha[j].abs() > qa {
                    q = j;
                    qa = alpha[j].abs();
                }
            }
            if q == usize::MAX {
                return Status::Infeasible;
            }

            // Entering column in the current basis.
            for i in 0..m {
                let row = &self.binv[i * m..(i + 1) * m];
                let mut v = 0.0;
                if q < n {
                    for &(k, a) in &self.lp.cols[q] {
                        v += row[k] * a;
                    }
                } else {
                    v = -row[q - n];
                }
                acol[i] = v;
            }
            let piv = acol[r];
            if piv.abs() < PIVOT_TOL || (piv - alpha[q]).abs() > 1e-6 * (1.0 + piv.abs()) {
                // Inverse has drifted: refactorise and retry.
                if !self.refactor() {
                    self.reset_to_slacks();
                }
                self.recompute();
                degenerate += 1;
                self.iterations += 1;
                continue;
            }

            let target = if increase { self.lo[leaving] } else { self.hi[leaving] };
            let delta = (self.x[leaving] - target) / piv;
            for i in 0..m {
                if acol[i] != 0.0 {
                    let j = self.head[i];
                    self.x[j] -= acol[i] * delta;
                }
            }
            self.x[q] += delta;
            self.x[leaving] = target;

            let theta = self.d[q] / piv;
            if theta.abs() < 1e-12 {
                degenerate += 1;
            } else {
                degenerate = 0;
            }
            for j in 0..n + m {
                if alpha[j] != 0.0 {
                    self.d[j] -= theta * alpha[j];
                }
            }
            self.d[q] = 0.0;
            self.d[leaving] = -theta;
            self.at_upper[leaving] = !increase;

            // Pivot the explicit inverse.
            let (before, rest) = self.binv.split_at_mut(r * m);
            let (pivot_row, after) = rest.split_at_mut(m);
            for v in pivot_row.iter_mut() {
                *v /= piv;
            }
            for (i, row) in before.chunks_mut(m).enumerate() {
                let f = acol[i];
                if f != 0.0 {
                    for k in 0..m {
                        row[k] -= f * pivot_row[k];
                    }
                }
            }
            for (off, row) in after.chunks_mut(m).enumerate() {
                let f = acol[r + 1 + off];
                if f != 0.0 {
                    for k in 0..m {
                        row[k] -= f * pivot_row[k];
                    }
                }
            }
            self.head[r] = q;
            self.pos[q] = r;
            self.pos[leaving] = usize::MAX;
            self.iterations += 1;
            self.since_refactor += 1;
            if self.since_refactor >= REFACTOR_EVERY {
                if !self.refactor() {
                    self.reset_to_slacks();
                }
                self.recompute();
            }
        }
    }

    /// Row duals `y` with `d_j = c_j − yᵀa_j`.
    pub fn duals(&self) -> Vec<f64> {
        (0..self.lp.m).map(|i| self.d[self.lp.n + i]).collect()
    }

    pub fn is_basic(&self, j: usize) -> bool {
        self.pos[j] != usize::MAX
    }
}
