//! Best-bound branch-and-bound over binary variables.

use std::cmp::Ordering;
use std::collections::BinaryHeap;
use std::time::{Duration, Instant};

use serde::{Deserialize, Serialize};

use super::lp::{solve_lp_from, LinearProgram, WarmBasis};
use super::{MilpError, SolveReport, SolveStatus};

/// Integrality tolerance on binaries.
pub const INT_TOL: f64 = 1e-6;

/// An LP plus the indices of variables restricted to `{0, 1}`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MilpModel {
    pub lp: LinearProgram,
    pub binaries: Vec<usize>,
}

impl MilpModel {
    pub fn validate(&self) -> Result<(), MilpError> {
        self.lp.validate()?;
        for &j in &self.binaries {
            if j >= self.lp.n_vars() {
                return Err(MilpError::Dimension(format!(
                    "binary index {j} out of range"
                )));
            }
            if self.lp.lower[j] < 0.0 || self.lp.upper[j] > 1.0 {
                return Err(MilpError::BinaryBounds(j));
            }
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct MilpOptions {
    /// Relative gap at which the search stops with `Optimal`.
    pub gap_tol: f64,
    pub time_limit: Duration,
}

impl Default for MilpOptions {
    fn default() -> Self {
        MilpOptions {
            gap_tol: 1e-9,
            time_limit: Duration::from_secs(600),
        }
    }
}

struct Node {
    bound: f64,
    id: u64,
    lower: Vec<f64>,
    upper: Vec<f64>,
    x: Vec<f64>,
    basis: WarmBasis,
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
    // max-heap: smallest bound first, then oldest node
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .bound
            .total_cmp(&self.bound)
            .then_with(|| other.id.cmp(&self.id))
    }
}

struct Search<'a> {
    model: &'a MilpModel,
    lp: LinearProgram,
    lps_solved: usize,
}

enum Relaxation {
    Infeasible,
    Solved {
        x: Vec<f64>,
        value: f64,
        basis: WarmBasis,
    },
}

impl Search<'_> {
    fn relax(
        &mut self,
        lower: &[f64],
        upper: &[f64],
        start: Option<&WarmBasis>,
    ) -> Result<Relaxation, MilpError> {
        self.lp.lower.copy_from_slice(lower);
        self.lp.upper.copy_from_slice(upper);
        self.lps_solved += 1;
        Ok(match solve_lp_from(&self.lp, start)? {
            None => Relaxation::Infeasible,
            Some(s) => Relaxation::Solved {
                x: s.x,
                value: s.value,
                basis: s.basis,
            },
        })
    }

    /// Most fractional binary, ties to the lowest index.
    fn branching_var(&self, x: &[f64]) -> Option<usize> {
        let mut best: Option<(usize, f64)> = None;
        for &j in &self.model.binaries {
            let frac = (x[j] - x[j].floor()).min(x[j].ceil() - x[j]);
            if frac > INT_TOL && best.is_none_or(|(bj, bf)| frac > bf || (frac == bf && j < bj)) {
                best = Some((j, frac));
            }
        }
        best.map(|(j, _)| j)
    }

    /// Integer point with binaries snapped exactly, re-solving the
    /// continuous part when snapping moved anything.
    fn polish(
        &mut self,
        x: Vec<f64>,
        value: f64,
        lower: &[f64],
        upper: &[f64],
        start: &WarmBasis,
    ) -> Result<Option<(Vec<f64>, f64)>, MilpError> {
        if self.model.binaries.iter().all(|&j| x[j] == x[j].round()) {
            return Ok(Some((x, value)));
        }
        let mut lo = lower.to_vec();
        let mut hi = upper.to_vec();
        for &j in &self.model.binaries {
            let v = x[j].round();
            lo[j] = v;
            hi[j] = v;
        }
        Ok(match self.relax(&lo, &hi, Some(start))? {
            Relaxation::Solved { x, value, .. } => Some((x, value)),
            Relaxation::Infeasible => None,
        })
    }
}

fn prune_slack(incumbent: f64) -> f64 {
    1e-9 * (1.0 + incumbent.abs())
}

/// Solves the MILP by best-bound branch-and-bound.
///
/// Returns `Optimal` once `(value - bound) <= gap_tol * |value|`, and
/// `GapReached` when the time limit stops the search with an incumbent.
pub fn solve_milp(model: &MilpModel, opts: MilpOptions) -> Result<SolveReport, MilpError> {
    solve_milp_from(model, opts, None).map(|(r, _)| r)
}

/// As [`solve_milp`], warm-starting the root relaxation from `start`. Also
/// returns the root relaxation's final basis.
pub fn solve_milp_from(
    model: &MilpModel,
    opts: MilpOptions,
    start: Option<&WarmBasis>,
) -> Result<(SolveReport, Option<WarmBasis>), MilpError> {
    if opts.gap_tol.is_nan() || opts.gap_tol < 0.0 {
        return Err(MilpError::GapTolerance(opts.gap_tol));
    }
    model.validate()?;
    let clock = Instant::now();
    let mut search = Search {
        model,
        lp: model.lp.clone(),
        lps_solved: 0,
    };
    let root_lower = model.lp.lower.clone();
    let root_upper = model.lp.upper.clone();

    let mut incumbent: Option<(Vec<f64>, f64)> = None;
    let mut heap = BinaryHeap::new();
    let mut next_id = 0u64;

    let root_basis = match search.relax(&root_lower, &root_upper, start)? {
        Relaxation::Infeasible => {
            return Ok((
                SolveReport::infeasible(search.lps_solved, clock.elapsed()),
                None,
            ));
        }
        Relaxation::Solved { x, value, basis } => {
            if search.branching_var(&x).is_none() {
                incumbent = search.polish(x, value, &root_lower, &root_upper, &basis)?;
            } else {
                heap.push(Node {
                    bound: value,
                    id: next_id,
                    lower: root_lower.clone(),
                    upper: root_upper.clone(),
                    x,
                    basis: basis.clone(),
                });
                next_id += 1;
            }
            basis
        }
    };

    let mut timed_out = false;
    while let Some(node) = heap.pop() {
        if let Some((_, inc)) = &incumbent {
            let inc = *inc;
            if node.bound >= inc - prune_slack(inc) {
                heap.clear();
                break;
            }
            if inc - node.bound <= opts.gap_tol * inc.abs().max(1e-10) {
                heap.push(node);
                break;
            }
        }
        if clock.elapsed() >= opts.time_limit {
            heap.push(node);
            timed_out = true;
            break;
        }
        let j = search
            .branching_var(&node.x)
            .expect("queued nodes are fractional");
        for v in [0.0, 1.0] {
            let mut lower = node.lower.clone();
            let mut upper = node.upper.clone();
            lower[j] = v;
            upper[j] = v;
            let Relaxation::Solved { x, value, basis } =
                search.relax(&lower, &upper, Some(&node.basis))?
            else {
                continue;
            };
            if let Some((_, inc)) = &incumbent {
                if value >= inc - prune_slack(*inc) {
                    continue;
                }
            }
            if search.branching_var(&x).is_none() {
                if let Some((px, pv)) = search.polish(x, value, &lower, &upper, &basis)? {
                    if incumbent.as_ref().is_none_or(|(_, inc)| pv < *inc) {
                        incumbent = Some((px, pv));
                    }
                }
            } else {
                heap.push(Node {
                    bound: value,
                    id: next_id,
                    lower,
                    upper,
                    x,
                    basis,
                });
                next_id += 1;
            }
        }
    }

    let nodes = search.lps_solved;
    let Some((x, value)) = incumbent else {
        if timed_out {
            return Err(MilpError::NoIncumbent);
        }
        return Ok((
            SolveReport::infeasible(nodes, clock.elapsed()),
            Some(root_basis),
        ));
    };
    let bound = heap.peek().map_or(value, |n| n.bound.min(value));
    let report = SolveReport {
        status: if timed_out {
            SolveStatus::GapReached
        } else {
            SolveStatus::Optimal
        },
        x,
        value,
        bound,
        nodes,
        wall_time: clock.elapsed(),
    };
    Ok((report, Some(root_basis)))
}
