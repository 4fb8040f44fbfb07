//! Exact solver for the square-search allocation model.
//!
//! A searcher picks at most `κ` of `s` squares and splits `τ` hours among
//! them. Square `k` is missed with probability `β_k exp(-c_k z_k)` where
//! `c_k = η u_k / α`. For a fixed selection the allocation is a convex
//! water-filling problem; the selection itself is enumerated.

use std::time::Instant;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::milp::{SolveReport, SolveStatus};
use crate::model::{
    FeasibleSet, LinearConstraint, MaxBlock, ModelError, NormKind, ProblemInstance, Relation, Term,
    Variable,
};

const BISECTION_STEPS: usize = 200;

#[derive(Debug, Error)]
pub enum SearchError {
    #[error("no squares selected")]
    EmptySelection,
    #[error("square {square} has nonpositive sweep parameter {value}")]
    NonPositiveSweep { square: usize, value: f64 },
    #[error("invalid search instance: {0}")]
    Invalid(String),
    #[error(transparent)]
    Model(#[from] ModelError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SearchInstance {
    /// Prior probability `β_k` that the target is in square `k`.
    pub weights: Vec<f64>,
    /// Nominal sweep width `ū_k` in miles.
    pub sweep: Vec<f64>,
    /// Searcher speed `η` in miles per hour.
    pub speed: f64,
    /// Area `α` of one square in square miles.
    pub cell_area: f64,
    /// Total search time `τ` in hours.
    pub budget: f64,
    /// At most this many squares may be searched.
    pub max_squares: usize,
    pub perturbable: Vec<bool>,
    /// Uncertainty radius `δ` on the sweep widths, in miles.
    #[serde(default)]
    pub radius: f64,
}

impl SearchInstance {
    pub fn n_squares(&self) -> usize {
        self.weights.len()
    }

    pub fn validate(&self) -> Result<(), SearchError> {
        let s = self.n_squares();
        let bad = |m: String| Err(SearchError::Invalid(m));
        if s == 0 {
            return bad("no squares".into());
        }
        if self.sweep.len() != s || self.perturbable.len() != s {
            return bad(format!(
                "weights, sweep and perturbable lengths differ ({s}, {}, {})",
                self.sweep.len(),
                self.perturbable.len()
            ));
        }
        if let Some(k) = self
            .weights
            .iter()
            .position(|&b| !(b > 0.0 && b.is_finite()))
        {
            return bad(format!("weight of square {k} must be positive"));
        }
        if let Some(k) = self.sweep.iter().position(|&u| !u.is_finite()) {
            return bad(format!("sweep of square {k} is not finite"));
        }
        if !(self.speed > 0.0 && self.cell_area > 0.0) {
            return bad("speed and cell area must be positive".into());
        }
        if !(self.budget >= 0.0 && self.budget.is_finite()) {
            return bad(format!(
                "budget {} must be finite and nonnegative",
                self.budget
            ));
        }
        if self.max_squares == 0 || self.max_squares > s {
            return bad(format!("max_squares {} outside 1..={s}", self.max_squares));
        }
        if !self.radius.is_finite() {
            return bad("radius is not finite".into());
        }
        Ok(())
    }

    pub fn rate_scale(&self) -> f64 {
        self.speed / self.cell_area
    }

    /// Sweep widths at the worst case of the ball: `ū_k - |δ|` on
    /// perturbable squares.
    pub fn worst_case_sweep(&self, delta: f64) -> Vec<f64> {
        self.sweep
            .iter()
            .zip(&self.perturbable)
            .map(|(&u, &p)| if p { u - delta.abs() } else { u })
            .collect()
    }

    /// The same model in the general instance format.
    ///
    /// Variables are `y_0..y_{s-1}` (binary) followed by `z_0..z_{s-1}`.
    pub fn to_problem(&self) -> Result<ProblemInstance, SearchError> {
        self.validate()?;
        let s = self.n_squares();
        let n = 2 * s;
        let mut variables = Vec::with_capacity(n);
        for k in 0..s {
            variables.push(Variable::binary().named(format!("y{}", k + 1)));
        }
        for k in 0..s {
            variables.push(Variable::continuous(0.0, self.budget).named(format!("z{}", k + 1)));
        }
        let row = |f: &dyn Fn(usize) -> f64, relation, rhs| LinearConstraint {
            coefficients: (0..n).map(f).collect(),
            relation,
            rhs,
        };
        let mut constraints = vec![
            row(
                &|j| if j >= s { 1.0 } else { 0.0 },
                Relation::Le,
                self.budget,
            ),
            row(
                &|j| if j < s { 1.0 } else { 0.0 },
                Relation::Le,
                self.max_squares as f64,
            ),
        ];
        for k in 0..s {
            let budget = self.budget;
            constraints.push(row(
                &move |j| {
                    if j == s + k {
                        1.0
                    } else if j == k {
                        -budget
                    } else {
                        0.0
                    }
                },
                Relation::Le,
                0.0,
            ));
        }
        let blocks = (0..s)
            .map(|k| MaxBlock {
                terms: vec![Term::NegExpDetection {
                    weight: self.weights[k],
                    rate: self.rate_scale(),
                    var: s + k,
                }],
                nominal: vec![self.sweep[k]],
                norm: NormKind::Abs,
                perturbable: self.perturbable[k],
            })
            .collect();
        Ok(ProblemInstance::new(
            FeasibleSet {
                variables,
                constraints,
            },
            vec![0.0; n],
            blocks,
        )?)
    }

    /// Decision vector `(y, z)` for a selection and allocation.
    pub fn decision(&self, selected: &[usize], z: &[f64]) -> Vec<f64> {
        let mut x = vec![0.0; self.n_squares()];
        for &k in selected {
            x[k] = 1.0;
        }
        x.extend_from_slice(z);
        x
    }
}

/// Miss probability `Σ β_k exp(-c_k z_k)`, summed in square order.
pub fn search_value(inst: &SearchInstance, u: &[f64], z: &[f64]) -> f64 {
    let r = inst.rate_scale();
    let mut total = 0.0;
    for k in 0..inst.n_squares() {
        total += inst.weights[k] * (-r * u[k] * z[k]).exp();
    }
    total
}

/// Optimal split of the budget over `selected` squares.
///
/// Returns the full-length allocation (zero off the selection) and the
/// resulting miss probability over all squares.
pub fn inner_allocation(
    selected: &[usize],
    inst: &SearchInstance,
    u: &[f64],
) -> Result<(Vec<f64>, f64), SearchError> {
    if selected.is_empty() {
        return Err(SearchError::EmptySelection);
    }
    let s = inst.n_squares();
    if u.len() != s {
        return Err(SearchError::Invalid(format!(
            "{} sweep values for {s} squares",
            u.len()
        )));
    }
    if let Some(&k) = selected.iter().find(|&&k| k >= s) {
        return Err(SearchError::Invalid(format!("square {k} out of range")));
    }
    if let Some(&k) = selected.iter().find(|&&k| u[k].is_nan() || u[k] <= 0.0) {
        return Err(SearchError::NonPositiveSweep {
            square: k,
            value: u[k],
        });
    }
    let tau = inst.budget;
    let mut z = vec![0.0; s];
    if tau == 0.0 {
        let value = search_value(inst, u, &z);
        return Ok((z, value));
    }

    let r = inst.rate_scale();
    let c: Vec<f64> = selected.iter().map(|&k| r * u[k]).collect();
    let marg: Vec<f64> = selected
        .iter()
        .zip(&c)
        .map(|(&k, &ck)| inst.weights[k] * ck)
        .collect();
    let spend = |lambda: f64| -> f64 {
        marg.iter()
            .zip(&c)
            .map(|(&m, &ck)| ((m / lambda).ln() / ck).max(0.0))
            .sum()
    };

    let mut lo = marg
        .iter()
        .zip(&c)
        .map(|(&m, &ck)| m * (-ck * tau).exp())
        .fold(f64::INFINITY, f64::min);
    let mut hi = marg.iter().copied().fold(0.0, f64::max);
    for _ in 0..BISECTION_STEPS {
        let mid = 0.5 * (lo + hi);
        if mid <= lo || mid >= hi {
            break;
        }
        if spend(mid) > tau {
            lo = mid;
        } else {
            hi = mid;
        }
    }

    // On the active set the multiplier has a closed form; use it so the
    // budget is met to rounding.
    let lambda = 0.5 * (lo + hi);
    let active: Vec<usize> = (0..selected.len()).filter(|&i| marg[i] > lambda).collect();
    let inv_sum: f64 = active.iter().map(|&i| 1.0 / c[i]).sum();
    let log_sum: f64 = active.iter().map(|&i| marg[i].ln() / c[i]).sum();
    let log_lambda = (log_sum - tau) / inv_sum;
    for &i in &active {
        z[selected[i]] = ((marg[i].ln() - log_lambda) / c[i]).max(0.0);
    }
    let value = search_value(inst, u, &z);
    Ok((z, value))
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize, Default)]
pub enum Enumeration {
    /// Skip selections containing a square dominated by an unselected one.
    #[default]
    Pruned,
    Exhaustive,
}

/// Lexicographic `m`-subsets of `0..n`.
struct Combinations {
    idx: Vec<usize>,
    n: usize,
    first: bool,
}

impl Combinations {
    fn new(n: usize, m: usize) -> Self {
        Combinations {
            idx: (0..m).collect(),
            n,
            first: true,
        }
    }

    fn next(&mut self) -> Option<&[usize]> {
        let m = self.idx.len();
        if self.first {
            self.first = false;
            return (m <= self.n).then_some(&self.idx[..]);
        }
        let mut i = m;
        while i > 0 {
            i -= 1;
            if self.idx[i] < self.n - m + i {
                self.idx[i] += 1;
                for j in i + 1..m {
                    self.idx[j] = self.idx[j - 1] + 1;
                }
                return Some(&self.idx[..]);
            }
        }
        None
    }
}

/// Whether square `j` should be preferred to square `i`: at least as
/// likely and at least as fast, with equal squares ordered by index.
fn dominates(inst: &SearchInstance, u: &[f64], j: usize, i: usize) -> bool {
    let (bj, bi) = (inst.weights[j], inst.weights[i]);
    let (uj, ui) = (u[j], u[i]);
    bj >= bi && uj >= ui && (bj > bi || uj > ui || j > i)
}

fn admissible(inst: &SearchInstance, u: &[f64], pool: &[usize], subset: &[usize]) -> bool {
    let mut chosen = vec![false; inst.n_squares()];
    for &p in subset {
        chosen[pool[p]] = true;
    }
    subset.iter().all(|&p| {
        let i = pool[p];
        pool.iter().all(|&j| chosen[j] || !dominates(inst, u, j, i))
    })
}

/// Best selection and allocation at sweep widths `u`.
///
/// Every admissible selection of `min(κ, #squares with u > 0)` squares is
/// evaluated. Values within `1e-12` relative count as ties, and later
/// selections in lexicographic order win ties. `nodes` reports the number
/// of allocations computed.
pub fn solve_search_with(
    inst: &SearchInstance,
    u: &[f64],
    mode: Enumeration,
) -> Result<SolveReport, SearchError> {
    inst.validate()?;
    let s = inst.n_squares();
    if u.len() != s {
        return Err(SearchError::Invalid(format!(
            "{} sweep values for {s} squares",
            u.len()
        )));
    }
    let start = Instant::now();
    let pool: Vec<usize> = (0..s).filter(|&k| u[k] > 0.0).collect();
    let m = inst.max_squares.min(pool.len());
    if m == 0 || inst.budget == 0.0 {
        let z = vec![0.0; s];
        let selected: Vec<usize> = pool.iter().copied().take(inst.max_squares).collect();
        let value = search_value(inst, u, &z);
        return Ok(SolveReport {
            status: SolveStatus::Optimal,
            x: inst.decision(&selected, &z),
            value,
            bound: value,
            nodes: 0,
            wall_time: start.elapsed(),
        });
    }

    let mut best: Option<(Vec<usize>, Vec<f64>, f64)> = None;
    let mut nodes = 0;
    let mut combos = Combinations::new(pool.len(), m);
    while let Some(subset) = combos.next() {
        if mode == Enumeration::Pruned && !admissible(inst, u, &pool, subset) {
            continue;
        }
        let selected: Vec<usize> = subset.iter().map(|&p| pool[p]).collect();
        let (z, value) = inner_allocation(&selected, inst, u)?;
        nodes += 1;
        let better = match &best {
            None => true,
            Some((_, _, b)) => value <= b + 1e-12 * (1.0 + b.abs()),
        };
        if better {
            best = Some((selected, z, value));
        }
    }
    let (selected, z, value) = best.expect("at least one selection");
    Ok(SolveReport {
        status: SolveStatus::Optimal,
        x: inst.decision(&selected, &z),
        value,
        bound: value,
        nodes,
        wall_time: start.elapsed(),
    })
}

pub fn solve_search(inst: &SearchInstance, u: &[f64]) -> Result<SolveReport, SearchError> {
    solve_search_with(inst, u, Enumeration::Pruned)
}
