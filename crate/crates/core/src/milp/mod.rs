//! LP simplex, branch-and-bound over binaries, and the epigraph
//! linearization of piecewise-affine sum-of-max instances.

mod bnb;
mod linearize;
mod lp;

use std::time::Duration;

use serde::{Deserialize, Serialize};
use thiserror::Error;

pub use bnb::{solve_milp, solve_milp_from, MilpModel, MilpOptions, INT_TOL};
pub use linearize::{
    linearize_summax, linearize_worst_case, BackMap, EpigraphBuilder, LinearizeError, Linearized,
};
pub use lp::{
    solve_lp, solve_lp_detailed, solve_lp_from, LinearProgram, LpSolution, Row, WarmBasis,
    FEAS_TOL, OPT_TOL,
};

#[derive(Debug, Error)]
pub enum MilpError {
    #[error("dimension mismatch: {0}")]
    Dimension(String),
    #[error("variable {var}: bounds [{lower}, {upper}] must be finite and ordered")]
    Bounds { var: usize, lower: f64, upper: f64 },
    #[error("variable {0} is marked integer but its bounds are not within [0, 1]")]
    BinaryBounds(usize),
    #[error("LP is unbounded")]
    Unbounded,
    #[error("simplex iteration limit {0} reached")]
    IterationLimit(usize),
    #[error("numerical trouble: {0}")]
    Numerical(&'static str),
    #[error("negative gap tolerance {0}")]
    GapTolerance(f64),
    #[error("time limit reached before any integer-feasible point was found")]
    NoIncumbent,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum SolveStatus {
    /// Solved to the requested gap.
    Optimal,
    /// Stopped on the time limit; `bound` is still valid.
    GapReached,
    Infeasible,
}

/// Outcome of an LP, MILP or search solve (minimization).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolveReport {
    pub status: SolveStatus,
    /// Incumbent; empty when infeasible.
    pub x: Vec<f64>,
    pub value: f64,
    pub bound: f64,
    pub nodes: usize,
    #[serde(skip)]
    pub wall_time: Duration,
}

impl SolveReport {
    pub fn infeasible(nodes: usize, wall_time: Duration) -> Self {
        SolveReport {
            status: SolveStatus::Infeasible,
            x: Vec::new(),
            value: f64::INFINITY,
            bound: f64::INFINITY,
            nodes,
            wall_time,
        }
    }

    pub fn is_feasible(&self) -> bool {
        self.status != SolveStatus::Infeasible
    }

    /// Relative gap `(value - bound) / max(|value|, 1e-10)`.
    pub fn relative_gap(&self) -> f64 {
        (self.value - self.bound).max(0.0) / self.value.abs().max(1e-10)
    }

    /// Same report without timing, for reproducibility comparisons.
    pub fn without_timing(&self) -> Self {
        SolveReport {
            wall_time: Duration::ZERO,
            ..self.clone()
        }
    }
}
