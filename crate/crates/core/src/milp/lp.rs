//! Dense bounded-variable simplex.
//!
//! Every row gets a slack, `a_i·x + s_i = b_i`, bounded according to the
//! row's relation. The solve starts from the slack basis with each
//! structural at the bound its cost prefers, which is dual feasible, and
//! runs the dual simplex to primal feasibility. A few primal iterations then
//! remove any dual infeasibility left by rounding. Nonbasic columns always
//! sit at one of their bounds.

use std::time::Instant;

use serde::{Deserialize, Serialize};

use super::{MilpError, SolveReport, SolveStatus};
use crate::model::Relation;

/// Primal feasibility tolerance.
pub const FEAS_TOL: f64 = 1e-8;
/// Reduced-cost optimality tolerance.
pub const OPT_TOL: f64 = 1e-9;
const PIVOT_TOL: f64 = 1e-9;
const REINVERT_EVERY: usize = 100;
const DEGENERATE_RUN_FOR_BLAND: usize = 50;
/// Bound violation, relative to `1 + |bound|`, that makes a row leave.
const DUAL_PICK_TOL: f64 = 1e-10;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Row {
    pub coefs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

/// `min c·x` subject to linear rows and finite variable bounds.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearProgram {
    pub objective: Vec<f64>,
    pub rows: Vec<Row>,
    pub lower: Vec<f64>,
    pub upper: Vec<f64>,
}

impl LinearProgram {
    pub fn new(objective: Vec<f64>, lower: Vec<f64>, upper: Vec<f64>) -> Self {
        LinearProgram {
            objective,
            rows: Vec::new(),
            lower,
            upper,
        }
    }

    pub fn n_vars(&self) -> usize {
        self.objective.len()
    }

    pub fn add_row(&mut self, coefs: Vec<f64>, relation: Relation, rhs: f64) {
        self.rows.push(Row {
            coefs,
            relation,
            rhs,
        });
    }

    pub fn validate(&self) -> Result<(), MilpError> {
        let n = self.n_vars();
        if self.lower.len() != n || self.upper.len() != n {
            return Err(MilpError::Dimension(format!(
                "bounds have lengths {}/{}, expected {n}",
                self.lower.len(),
                self.upper.len()
            )));
        }
        for j in 0..n {
            let (l, u) = (self.lower[j], self.upper[j]);
            if !(l.is_finite() && u.is_finite() && l <= u) {
                return Err(MilpError::Bounds {
                    var: j,
                    lower: l,
                    upper: u,
                });
            }
        }
        for (i, r) in self.rows.iter().enumerate() {
            if r.coefs.len() != n {
                return Err(MilpError::Dimension(format!(
                    "row {i} has {} coefficients, expected {n}",
                    r.coefs.len()
                )));
            }
            if !r.rhs.is_finite() || r.coefs.iter().any(|c| !c.is_finite()) {
                return Err(MilpError::Dimension(format!("row {i} has non-finite data")));
            }
        }
        Ok(())
    }

    pub fn objective_value(&self, x: &[f64]) -> f64 {
        self.objective.iter().zip(x).map(|(c, v)| c * v).sum()
    }

    /// Largest row or bound violation of `x`.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for j in 0..self.n_vars() {
            worst = worst.max(self.lower[j] - x[j]).max(x[j] - self.upper[j]);
        }
        for r in &self.rows {
            let lhs: f64 = r.coefs.iter().zip(x).map(|(a, b)| a * b).sum();
            let v = match r.relation {
                Relation::Le => lhs - r.rhs,
                Relation::Ge => r.rhs - lhs,
                Relation::Eq => (lhs - r.rhs).abs(),
            };
            worst = worst.max(v);
        }
        worst
    }

    /// Plain-text dump in a fixed-width MPS-like layout.
    ///
    /// Sections are `NAME`, `ROWS`, `COLUMNS`, `RHS`, `BOUNDS`, `ENDATA`.
    /// Data lines start with four spaces; names occupy 10-character fields
    /// and numbers 14-character right-aligned fields in `{:.6e}` form. Row
    /// names are `OBJ` and `R<i>`, column names `X<j>`. Zero coefficients
    /// are omitted.
    pub fn to_mps(&self, name: &str) -> String {
        use std::fmt::Write;
        let mut s = String::new();
        let _ = writeln!(s, "NAME          {name}");
        let _ = writeln!(s, "ROWS");
        let _ = writeln!(s, " N  OBJ");
        for (i, r) in self.rows.iter().enumerate() {
            let tag = match r.relation {
                Relation::Le => 'L',
                Relation::Ge => 'G',
                Relation::Eq => 'E',
            };
            let _ = writeln!(s, " {tag}  R{i}");
        }
        let _ = writeln!(s, "COLUMNS");
        for j in 0..self.n_vars() {
            let col = format!("X{j}");
            if self.objective[j] != 0.0 {
                let _ = writeln!(
                    s,
                    "    {:<10}{:<10}{:>14.6e}",
                    col, "OBJ", self.objective[j]
                );
            }
            for (i, r) in self.rows.iter().enumerate() {
                if r.coefs[j] != 0.0 {
                    let _ = writeln!(
                        s,
                        "    {:<10}{:<10}{:>14.6e}",
                        col,
                        format!("R{i}"),
                        r.coefs[j]
                    );
                }
            }
        }
        let _ = writeln!(s, "RHS");
        for (i, r) in self.rows.iter().enumerate() {
            if r.rhs != 0.0 {
                let _ = writeln!(
                    s,
                    "    {:<10}{:<10}{:>14.6e}",
                    "RHS",
                    format!("R{i}"),
                    r.rhs
                );
            }
        }
        let _ = writeln!(s, "BOUNDS");
        for j in 0..self.n_vars() {
            let col = format!("X{j}");
            if self.lower[j] == self.upper[j] {
                let _ = writeln!(s, " FX {:<10}{:<10}{:>14.6e}", "BND", col, self.lower[j]);
            } else {
                let _ = writeln!(s, " LO {:<10}{:<10}{:>14.6e}", "BND", col, self.lower[j]);
                let _ = writeln!(s, " UP {:<10}{:<10}{:>14.6e}", "BND", col, self.upper[j]);
            }
        }
        let _ = writeln!(s, "ENDATA");
        s
    }
}

/// Optimal primal point with reduced costs, as returned by [`solve_lp_detailed`].
#[derive(Debug, Clone)]
pub struct LpSolution {
    pub x: Vec<f64>,
    pub value: f64,
    /// Reduced costs of the structural columns.
    pub reduced_costs: Vec<f64>,
    pub iterations: usize,
    /// Final basis, reusable as a warm start.
    pub basis: WarmBasis,
}

/// A simplex basis over the columns `[x, s]`, where `s_i` is the slack of
/// row `i` (`a_i·x + s_i = b_i`).
///
/// A basis taken from a program remains usable after bound changes and
/// after rows are appended; the new rows start with their slacks basic.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct WarmBasis {
    /// Basic column of each row.
    pub basic: Vec<usize>,
    /// Whether each nonbasic column rests at its upper bound.
    pub at_upper: Vec<bool>,
}

struct Tableau {
    m: usize,
    n: usize,
    ncols: usize,
    /// Original columns `[A | I]`, row-major.
    a: Vec<f64>,
    b: Vec<f64>,
    /// Current `B^{-1} [A | I]`, row-major.
    t: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    x: Vec<f64>,
    basis: Vec<usize>,
    in_basis: Vec<Option<usize>>,
    cost: Vec<f64>,
    d: Vec<f64>,
    iterations: usize,
    since_reinvert: usize,
}

enum Step {
    Optimal,
    Progress { degenerate: bool },
}

enum DualStep {
    Optimal,
    Infeasible,
    Progress { degenerate: bool },
}

impl Tableau {
    /// Columns, bounds and costs; basis left to the caller.
    fn skeleton(lp: &LinearProgram) -> Tableau {
        let m = lp.rows.len();
        let n = lp.n_vars();
        let ncols = n + m;
        let mut lower = lp.lower.clone();
        let mut upper = lp.upper.clone();
        for r in &lp.rows {
            let (lo, hi) = match r.relation {
                Relation::Le => (0.0, f64::INFINITY),
                Relation::Ge => (f64::NEG_INFINITY, 0.0),
                Relation::Eq => (0.0, 0.0),
            };
            lower.push(lo);
            upper.push(hi);
        }
        let mut a = vec![0.0; m * ncols];
        for (i, r) in lp.rows.iter().enumerate() {
            a[i * ncols..i * ncols + n].copy_from_slice(&r.coefs);
            a[i * ncols + n + i] = 1.0;
        }
        let mut cost = lp.objective.clone();
        cost.resize(ncols, 0.0);
        Tableau {
            m,
            n,
            ncols,
            t: Vec::new(),
            a,
            b: lp.rows.iter().map(|r| r.rhs).collect(),
            lower,
            upper,
            x: vec![0.0; ncols],
            basis: Vec::new(),
            in_basis: vec![None; ncols],
            d: cost.clone(),
            cost,
            iterations: 0,
            since_reinvert: 0,
        }
    }

    /// Slack basis with every structural at the bound its cost prefers.
    /// Reduced costs equal the costs, so the start is dual feasible.
    fn cold(lp: &LinearProgram) -> Tableau {
        let mut tab = Self::skeleton(lp);
        let (m, n, nc) = (tab.m, tab.n, tab.ncols);
        for j in 0..n {
            let (lo, hi, c) = (tab.lower[j], tab.upper[j], tab.cost[j]);
            tab.x[j] = if c > 0.0 || (c == 0.0 && lo.abs() <= hi.abs()) {
                lo
            } else {
                hi
            };
        }
        tab.basis = (n..nc).collect();
        for i in 0..m {
            tab.in_basis[n + i] = Some(i);
            let row = &tab.a[i * nc..i * nc + n];
            tab.x[n + i] = tab.b[i] - row.iter().zip(&tab.x[..n]).map(|(a, x)| a * x).sum::<f64>();
        }
        tab.t = tab.a.clone();
        tab
    }

    /// Tableau for a supplied basis, repaired to dual feasibility by bound
    /// flips. `None` when the basis does not fit or cannot be repaired.
    fn warm(lp: &LinearProgram, start: &WarmBasis) -> Option<Tableau> {
        let mut tab = Self::skeleton(lp);
        let (m, n, nc) = (tab.m, tab.n, tab.ncols);
        let old_m = start.basic.len();
        if old_m > m || start.at_upper.len() != n + old_m {
            return None;
        }
        let mut basis = start.basic.clone();
        basis.extend(n + old_m..nc);
        let mut at_upper = start.at_upper.clone();
        at_upper.resize(nc, false);
        let mut seen = vec![false; nc];
        for &c in &basis {
            if c >= nc || seen[c] {
                return None;
            }
            seen[c] = true;
        }
        for j in 0..nc {
            if !seen[j] {
                let (lo, hi) = (tab.lower[j], tab.upper[j]);
                tab.x[j] = if (at_upper[j] && hi.is_finite()) || !lo.is_finite() {
                    hi
                } else {
                    lo
                };
            }
        }
        tab.basis = basis;
        if tab.reinvert().is_err() {
            return None;
        }
        for j in 0..nc {
            if tab.in_basis[j].is_some() || tab.lower[j] == tab.upper[j] {
                continue;
            }
            let dj = tab.d[j];
            let target = if tab.x[j] == tab.lower[j] && dj < -OPT_TOL {
                tab.upper[j]
            } else if tab.x[j] == tab.upper[j] && dj > OPT_TOL {
                tab.lower[j]
            } else {
                continue;
            };
            if !target.is_finite() {
                return None;
            }
            tab.shift_nonbasic(j, target - tab.x[j]);
        }
        Some(tab)
    }

    /// Moves nonbasic `j` by `delta` and updates the basic values.
    fn shift_nonbasic(&mut self, j: usize, delta: f64) {
        let nc = self.ncols;
        self.x[j] += delta;
        for i in 0..self.m {
            let alpha = self.t[i * nc + j];
            if alpha != 0.0 {
                self.x[self.basis[i]] -= alpha * delta;
            }
        }
    }

    fn recompute_reduced_costs(&mut self) {
        let nc = self.ncols;
        let mut d = self.cost.clone();
        for i in 0..self.m {
            let cb = self.cost[self.basis[i]];
            if cb != 0.0 {
                let row = &self.t[i * nc..(i + 1) * nc];
                for (dj, tij) in d.iter_mut().zip(row) {
                    *dj -= cb * tij;
                }
            }
        }
        for &bcol in &self.basis {
            d[bcol] = 0.0;
        }
        self.d = d;
    }

    /// Rebuilds `B^{-1}A`, the basic values and the reduced costs from the
    /// original data.
    fn reinvert(&mut self) -> Result<(), MilpError> {
        let (m, nc) = (self.m, self.ncols);
        let mut t = self.a.clone();
        let mut rhs = self.b.clone();
        let mut assigned = vec![false; m];
        let mut new_basis = vec![usize::MAX; m];
        // slack columns first: they pivot without touching other rows
        let mut order: Vec<usize> = self.basis.clone();
        order.sort_by_key(|&c| c < self.n);
        for &col in &order {
            let mut best: Option<(usize, f64)> = None;
            for r in 0..m {
                if assigned[r] {
                    continue;
                }
                let v = t[r * nc + col].abs();
                if best.is_none_or(|(_, bv)| v > bv) {
                    best = Some((r, v));
                }
            }
            let (r, v) = best.ok_or(MilpError::Numerical("basis larger than row count"))?;
            if v < 1e-11 {
                return Err(MilpError::Numerical("singular basis during reinversion"));
            }
            assigned[r] = true;
            new_basis[r] = col;
            pivot_rows(&mut t, &mut rhs, nc, m, r, col);
        }
        self.t = t;
        self.basis = new_basis;
        for v in self.in_basis.iter_mut() {
            *v = None;
        }
        for (i, &c) in self.basis.iter().enumerate() {
            self.in_basis[c] = Some(i);
        }
        // x_B = B^{-1} b - B^{-1} N x_N
        for i in 0..m {
            let row = &self.t[i * nc..(i + 1) * nc];
            let mut v = rhs[i];
            for j in 0..nc {
                if self.in_basis[j].is_none() && row[j] != 0.0 {
                    v -= row[j] * self.x[j];
                }
            }
            self.x[self.basis[i]] = v;
        }
        self.recompute_reduced_costs();
        self.since_reinvert = 0;
        Ok(())
    }

    /// Pivots column `j` into row `r` and updates the reduced costs.
    fn pivot(&mut self, r: usize, j: usize) {
        let nc = self.ncols;
        let out = self.basis[r];
        let mut dummy = vec![0.0; self.m];
        pivot_rows(&mut self.t, &mut dummy, nc, self.m, r, j);
        let dj = self.d[j];
        if dj != 0.0 {
            let row = &self.t[r * nc..(r + 1) * nc];
            for (dk, tk) in self.d.iter_mut().zip(row) {
                *dk -= dj * tk;
            }
        }
        self.d[j] = 0.0;
        self.basis[r] = j;
        self.in_basis[j] = Some(r);
        self.in_basis[out] = None;
        self.since_reinvert += 1;
    }

    fn step(&mut self, bland: bool) -> Result<Step, MilpError> {
        let nc = self.ncols;
        // pricing
        let mut enter: Option<(usize, f64)> = None;
        for j in 0..nc {
            if self.in_basis[j].is_some() || self.lower[j] == self.upper[j] {
                continue;
            }
            let dj = self.d[j];
            let improving = (dj < -OPT_TOL && self.x[j] < self.upper[j])
                || (dj > OPT_TOL && self.x[j] > self.lower[j]);
            if !improving {
                continue;
            }
            if bland {
                enter = Some((j, dj));
                break;
            }
            if enter.is_none_or(|(_, best)| dj.abs() > best.abs()) {
                enter = Some((j, dj));
            }
        }
        let Some((j, dj)) = enter else {
            return Ok(Step::Optimal);
        };
        let dir = if dj < 0.0 { 1.0 } else { -1.0 };

        // ratio test; basic i moves by -dir * t_ij per unit step
        let mut step = self.upper[j] - self.lower[j];
        let mut leave: Option<usize> = None;
        for i in 0..self.m {
            let alpha = self.t[i * nc + j];
            if alpha.abs() <= PIVOT_TOL {
                continue;
            }
            let bcol = self.basis[i];
            let rate = -dir * alpha;
            let room = if rate < 0.0 {
                (self.x[bcol] - self.lower[bcol]).max(0.0) / -rate
            } else {
                (self.upper[bcol] - self.x[bcol]).max(0.0) / rate
            };
            let better = match leave {
                None => room < step,
                Some(l) => {
                    if room < step - 1e-12 {
                        true
                    } else if room <= step + 1e-12 {
                        let prev = self.t[l * nc + j].abs();
                        if bland {
                            bcol < self.basis[l]
                        } else {
                            alpha.abs() > prev || (alpha.abs() == prev && bcol < self.basis[l])
                        }
                    } else {
                        false
                    }
                }
            };
            if better {
                step = room.min(step);
                leave = Some(i);
            }
        }
        if !step.is_finite() {
            return Err(MilpError::Unbounded);
        }
        self.iterations += 1;

        self.shift_nonbasic(j, dir * step);
        let degenerate = step <= 1e-12;
        let Some(r) = leave else {
            // bound flip
            self.x[j] = if dir > 0.0 {
                self.upper[j]
            } else {
                self.lower[j]
            };
            return Ok(Step::Progress { degenerate });
        };
        let out = self.basis[r];
        let rate = -dir * self.t[r * nc + j];
        self.x[out] = if rate < 0.0 {
            self.lower[out]
        } else {
            self.upper[out]
        };
        self.pivot(r, j);
        Ok(Step::Progress { degenerate })
    }

    /// One bounded dual simplex iteration from a dual feasible basis.
    fn dual_step(&mut self, bland: bool) -> DualStep {
        let nc = self.ncols;
        // leaving row: largest bound violation (Bland: lowest basic column)
        let mut leave: Option<(usize, f64, f64)> = None;
        for i in 0..self.m {
            let c = self.basis[i];
            let (v, lo, hi) = (self.x[c], self.lower[c], self.upper[c]);
            let (viol, target) = if v < lo - DUAL_PICK_TOL * (1.0 + lo.abs()) {
                (lo - v, lo)
            } else if v > hi + DUAL_PICK_TOL * (1.0 + hi.abs()) {
                (v - hi, hi)
            } else {
                continue;
            };
            let better = match leave {
                None => true,
                Some((l, best, _)) => {
                    if bland {
                        c < self.basis[l]
                    } else {
                        viol > best
                    }
                }
            };
            if better {
                leave = Some((i, viol, target));
            }
        }
        let Some((r, _, target)) = leave else {
            return DualStep::Optimal;
        };
        let increase = target > self.x[self.basis[r]];

        // entering column: smallest |d_j / t_rj| among moves that push the
        // leaving value toward its bound
        let mut enter: Option<(usize, f64, f64)> = None;
        for j in 0..nc {
            if self.in_basis[j].is_some() || self.lower[j] == self.upper[j] {
                continue;
            }
            let alpha = self.t[r * nc + j];
            if alpha.abs() <= PIVOT_TOL {
                continue;
            }
            let at_lower = self.x[j] <= self.lower[j];
            let eligible = if increase {
                (at_lower && alpha < 0.0) || (!at_lower && alpha > 0.0)
            } else {
                (at_lower && alpha > 0.0) || (!at_lower && alpha < 0.0)
            };
            if !eligible {
                continue;
            }
            let ratio = self.d[j].abs() / alpha.abs();
            let better = match enter {
                None => true,
                Some((_, best, best_alpha)) => {
                    if ratio < best - 1e-12 {
                        true
                    } else if ratio <= best + 1e-12 {
                        !bland && alpha.abs() > best_alpha
                    } else {
                        false
                    }
                }
            };
            if better {
                enter = Some((j, ratio, alpha.abs()));
            }
        }
        let Some((j, ratio, _)) = enter else {
            return DualStep::Infeasible;
        };
        self.iterations += 1;
        let alpha = self.t[r * nc + j];
        let out = self.basis[r];
        let delta = (self.x[out] - target) / alpha;
        self.shift_nonbasic(j, delta);
        self.x[out] = target;
        self.pivot(r, j);
        DualStep::Progress {
            degenerate: ratio <= 1e-12,
        }
    }

    /// Dual simplex to primal feasibility. Returns `false` when some row
    /// cannot reach its bounds.
    fn optimize_dual(&mut self, max_iter: usize) -> Result<bool, MilpError> {
        let mut degenerate_run = 0;
        let mut bland = false;
        loop {
            if self.iterations > max_iter {
                return Err(MilpError::IterationLimit(max_iter));
            }
            if self.since_reinvert >= REINVERT_EVERY {
                self.reinvert()?;
            }
            match self.dual_step(bland) {
                DualStep::Optimal | DualStep::Infeasible if self.since_reinvert > 0 => {
                    // confirm on a fresh factorization
                    self.reinvert()?;
                }
                DualStep::Optimal => return Ok(true),
                DualStep::Infeasible => return Ok(false),
                DualStep::Progress { degenerate } => {
                    if degenerate {
                        degenerate_run += 1;
                        bland |= degenerate_run >= DEGENERATE_RUN_FOR_BLAND;
                    } else {
                        degenerate_run = 0;
                    }
                }
            }
        }
    }

    /// Primal simplex from a primal feasible basis.
    fn optimize(&mut self, max_iter: usize) -> Result<(), MilpError> {
        let mut degenerate_run = 0;
        let mut bland = false;
        loop {
            if self.iterations > max_iter {
                return Err(MilpError::IterationLimit(max_iter));
            }
            if self.since_reinvert >= REINVERT_EVERY {
                self.reinvert()?;
            }
            match self.step(bland)? {
                Step::Optimal if self.since_reinvert > 0 => self.reinvert()?,
                Step::Optimal => return Ok(()),
                Step::Progress { degenerate } => {
                    if degenerate {
                        degenerate_run += 1;
                        bland |= degenerate_run >= DEGENERATE_RUN_FOR_BLAND;
                    } else {
                        degenerate_run = 0;
                    }
                }
            }
        }
    }

    fn warm_basis(&self) -> WarmBasis {
        WarmBasis {
            basic: self.basis.clone(),
            at_upper: (0..self.ncols)
                .map(|j| {
                    self.in_basis[j].is_none()
                        && self.x[j] == self.upper[j]
                        && self.x[j] != self.lower[j]
                })
                .collect(),
        }
    }
}

fn pivot_rows(t: &mut [f64], rhs: &mut [f64], nc: usize, m: usize, r: usize, col: usize) {
    let piv = t[r * nc + col];
    {
        let row = &mut t[r * nc..(r + 1) * nc];
        for v in row.iter_mut() {
            *v /= piv;
        }
    }
    rhs[r] /= piv;
    let (prow, prhs) = (t[r * nc..(r + 1) * nc].to_vec(), rhs[r]);
    for i in 0..m {
        if i == r {
            continue;
        }
        let f = t[i * nc + col];
        if f == 0.0 {
            continue;
        }
        let row = &mut t[i * nc..(i + 1) * nc];
        for (v, p) in row.iter_mut().zip(&prow) {
            *v -= f * p;
        }
        row[col] = 0.0;
        rhs[i] -= f * prhs;
    }
}

/// Solves the LP and returns the optimal point with reduced costs, or
/// `Ok(None)` when the rows are infeasible within the bounds.
pub fn solve_lp_detailed(lp: &LinearProgram) -> Result<Option<LpSolution>, MilpError> {
    solve_lp_from(lp, None)
}

/// As [`solve_lp_detailed`], starting from `start` when it fits the program.
pub fn solve_lp_from(
    lp: &LinearProgram,
    start: Option<&WarmBasis>,
) -> Result<Option<LpSolution>, MilpError> {
    lp.validate()?;
    let n = lp.n_vars();
    let mut tab = match start.and_then(|b| Tableau::warm(lp, b)) {
        Some(t) => t,
        None => Tableau::cold(lp),
    };
    let max_iter = 50_000 + 200 * (tab.m + tab.ncols);
    if !tab.optimize_dual(max_iter)? {
        return Ok(None);
    }
    // clean up any dual infeasibility left by rounding
    tab.optimize(max_iter)?;
    if tab.since_reinvert > 0 {
        tab.reinvert()?;
    }

    let mut x: Vec<f64> = tab.x[..n].to_vec();
    for j in 0..n {
        x[j] = x[j].clamp(lp.lower[j], lp.upper[j]);
    }
    Ok(Some(LpSolution {
        value: lp.objective_value(&x),
        reduced_costs: tab.d[..n].to_vec(),
        iterations: tab.iterations,
        basis: tab.warm_basis(),
        x,
    }))
}

/// Solves `lp` and wraps the result in a [`SolveReport`].
pub fn solve_lp(lp: &LinearProgram) -> Result<SolveReport, MilpError> {
    let start = Instant::now();
    let sol = solve_lp_detailed(lp)?;
    Ok(match sol {
        Some(s) => SolveReport {
            status: SolveStatus::Optimal,
            value: s.value,
            bound: s.value,
            x: s.x,
            nodes: 1,
            wall_time: start.elapsed(),
        },
        None => SolveReport::infeasible(1, start.elapsed()),
    })
}
