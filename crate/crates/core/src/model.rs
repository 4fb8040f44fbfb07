//! Nominal sum-of-max problem class.
//!
//! An instance is a compact feasible set `X`, a linear cost `f0`, and a list
//! of blocks. Each block holds one or more parametric terms `f_ik(u^k, x)`
//! and contributes `max_i f_ik(u^k, x)` to the objective.

use serde::{Deserialize, Serialize};
use thiserror::Error;

#[derive(Debug, Error)]
pub enum ModelError {
    #[error("block {block}: parameter vector has length {found}, expected {expected}")]
    BlockDimension {
        block: usize,
        expected: usize,
        found: usize,
    },
    #[error("expected {expected} parameter blocks, got {found}")]
    BlockCount { expected: usize, found: usize },
    #[error("decision vector has length {found}, expected {expected}")]
    VariableCount { expected: usize, found: usize },
    #[error("{what} has length {found}, expected {expected}")]
    Length {
        what: String,
        expected: usize,
        found: usize,
    },
    #[error("variable {var}: bounds [{lower}, {upper}] are not finite and ordered")]
    InvalidBounds { var: usize, lower: f64, upper: f64 },
    #[error("variable {var}: binary variables need bounds within [0, 1]")]
    BinaryBounds { var: usize },
    #[error("block {block}, term {term}: {detail}")]
    InvalidTerm {
        block: usize,
        term: usize,
        detail: String,
    },
    #[error("block {block}: absolute-value norm requires dimension 1, got {dim}")]
    AbsNormDimension { block: usize, dim: usize },
    #[error("block {block} has no terms")]
    EmptyBlock { block: usize },
    #[error("instance has neither blocks nor a nonzero linear cost")]
    EmptyObjective,
    #[error("invalid instance json: {0}")]
    Json(#[from] serde_json::Error),
}

/// Norm used to measure parameter perturbations within a block.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormKind {
    /// `|·|` on scalar blocks.
    Abs,
    L2,
    L1,
    Linf,
}

impl NormKind {
    pub fn dual(self) -> NormKind {
        match self {
            NormKind::Abs => NormKind::Abs,
            NormKind::L2 => NormKind::L2,
            NormKind::L1 => NormKind::Linf,
            NormKind::Linf => NormKind::L1,
        }
    }

    /// Evaluates the norm itself. `Abs` falls back to the absolute value of
    /// the single entry and ignores the rest.
    pub fn eval(self, v: &[f64]) -> f64 {
        match self {
            NormKind::Abs => v.first().map_or(0.0, |x| x.abs()),
            NormKind::L2 => v.iter().map(|x| x * x).sum::<f64>().sqrt(),
            NormKind::L1 => v.iter().map(|x| x.abs()).sum(),
            NormKind::Linf => v.iter().fold(0.0, |m, x| m.max(x.abs())),
        }
    }
}

/// One entry of the map `x -> z(x)` with `z_param += coef * x[var]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Loading {
    pub param: usize,
    pub var: usize,
    pub coef: f64,
}

/// A differentiable parametric term `f_ik(u, x)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Term {
    /// `slope * (base - <u, z(x)>) + intercept`, with `z(x)` linear in `x`.
    BilinearAffinePiece {
        slope: f64,
        intercept: f64,
        base: f64,
        loadings: Vec<Loading>,
    },
    /// `weight * exp(-rate * u * x[var])` on a scalar parameter.
    NegExpDetection { weight: f64, rate: f64, var: usize },
}

impl Term {
    /// The vector `z(x)` an affine piece pairs with `u`.
    pub fn inner_vector(loadings: &[Loading], dim: usize, x: &[f64]) -> Vec<f64> {
        let mut z = vec![0.0; dim];
        for l in loadings {
            z[l.param] += l.coef * x[l.var];
        }
        z
    }

    pub fn value(&self, u: &[f64], x: &[f64]) -> f64 {
        match self {
            Term::BilinearAffinePiece {
                slope,
                intercept,
                base,
                loadings,
            } => {
                let z = Self::inner_vector(loadings, u.len(), x);
                let dot: f64 = u.iter().zip(&z).map(|(a, b)| a * b).sum();
                slope * (base - dot) + intercept
            }
            Term::NegExpDetection { weight, rate, var } => weight * (-rate * u[0] * x[*var]).exp(),
        }
    }

    /// Gradient of the term in its parameter argument.
    pub fn grad_u(&self, u: &[f64], x: &[f64]) -> Vec<f64> {
        match self {
            Term::BilinearAffinePiece {
                slope, loadings, ..
            } => Self::inner_vector(loadings, u.len(), x)
                .into_iter()
                .map(|z| -slope * z)
                .collect(),
            Term::NegExpDetection { weight, rate, var } => {
                let z = x[*var];
                vec![-weight * rate * z * (-rate * u[0] * z).exp()]
            }
        }
    }

    pub fn is_affine(&self) -> bool {
        matches!(self, Term::BilinearAffinePiece { .. })
    }

    fn max_var(&self) -> Option<usize> {
        match self {
            Term::BilinearAffinePiece { loadings, .. } => loadings.iter().map(|l| l.var).max(),
            Term::NegExpDetection { var, .. } => Some(*var),
        }
    }
}

/// Analytic gradient of `t` in `u` at fixed `x`.
pub fn grad_u_term(t: &Term, u: &[f64], x: &[f64]) -> Vec<f64> {
    t.grad_u(u, x)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MaxBlock {
    pub terms: Vec<Term>,
    pub nominal: Vec<f64>,
    pub norm: NormKind,
    #[serde(default = "default_true")]
    pub perturbable: bool,
}

fn default_true() -> bool {
    true
}

impl MaxBlock {
    pub fn dim(&self) -> usize {
        self.nominal.len()
    }

    /// Values of every term at `(u, x)`, in term order.
    pub fn term_values(&self, u: &[f64], x: &[f64]) -> Vec<f64> {
        self.terms.iter().map(|t| t.value(u, x)).collect()
    }

    pub fn value(&self, u: &[f64], x: &[f64]) -> f64 {
        self.terms
            .iter()
            .map(|t| t.value(u, x))
            .fold(f64::NEG_INFINITY, f64::max)
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum Relation {
    #[serde(rename = "<=")]
    Le,
    #[serde(rename = "=")]
    Eq,
    #[serde(rename = ">=")]
    Ge,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LinearConstraint {
    pub coefficients: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

impl LinearConstraint {
    pub fn lhs(&self, x: &[f64]) -> f64 {
        self.coefficients.iter().zip(x).map(|(a, b)| a * b).sum()
    }

    /// Amount by which `x` violates the row (0 when satisfied).
    pub fn violation(&self, x: &[f64]) -> f64 {
        let lhs = self.lhs(x);
        match self.relation {
            Relation::Le => (lhs - self.rhs).max(0.0),
            Relation::Ge => (self.rhs - lhs).max(0.0),
            Relation::Eq => (lhs - self.rhs).abs(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Variable {
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub name: Option<String>,
    pub lower: f64,
    pub upper: f64,
    #[serde(default)]
    pub binary: bool,
}

impl Variable {
    pub fn continuous(lower: f64, upper: f64) -> Self {
        Variable {
            name: None,
            lower,
            upper,
            binary: false,
        }
    }

    pub fn binary() -> Self {
        Variable {
            name: None,
            lower: 0.0,
            upper: 1.0,
            binary: true,
        }
    }

    pub fn named(mut self, name: impl Into<String>) -> Self {
        self.name = Some(name.into());
        self
    }
}

/// Compact feasible set: bounded variables, some binary, plus linear rows.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FeasibleSet {
    pub variables: Vec<Variable>,
    #[serde(default)]
    pub constraints: Vec<LinearConstraint>,
}

impl FeasibleSet {
    pub fn n_vars(&self) -> usize {
        self.variables.len()
    }

    pub fn n_bin(&self) -> usize {
        self.variables.iter().filter(|v| v.binary).count()
    }

    pub fn n_cont(&self) -> usize {
        self.n_vars() - self.n_bin()
    }

    /// Largest bound or row violation of `x`, integrality included.
    pub fn max_violation(&self, x: &[f64]) -> f64 {
        let mut worst: f64 = 0.0;
        for (v, &xi) in self.variables.iter().zip(x) {
            worst = worst.max(v.lower - xi).max(xi - v.upper);
            if v.binary {
                worst = worst.max((xi - xi.round()).abs());
            }
        }
        for c in &self.constraints {
            worst = worst.max(c.violation(x));
        }
        worst
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ProblemInstance {
    #[serde(flatten)]
    pub feasible: FeasibleSet,
    pub f0: Vec<f64>,
    pub blocks: Vec<MaxBlock>,
}

impl ProblemInstance {
    pub fn new(
        feasible: FeasibleSet,
        f0: Vec<f64>,
        blocks: Vec<MaxBlock>,
    ) -> Result<Self, ModelError> {
        let inst = ProblemInstance {
            feasible,
            f0,
            blocks,
        };
        inst.validate()?;
        Ok(inst)
    }

    pub fn from_json(text: &str) -> Result<Self, ModelError> {
        let inst: ProblemInstance = serde_json::from_str(text)?;
        inst.validate()?;
        Ok(inst)
    }

    pub fn to_json(&self) -> String {
        serde_json::to_string_pretty(self).expect("instance serializes")
    }

    pub fn n_vars(&self) -> usize {
        self.feasible.n_vars()
    }

    pub fn validate(&self) -> Result<(), ModelError> {
        let n = self.n_vars();
        for (i, v) in self.feasible.variables.iter().enumerate() {
            if !(v.lower.is_finite() && v.upper.is_finite() && v.lower <= v.upper) {
                return Err(ModelError::InvalidBounds {
                    var: i,
                    lower: v.lower,
                    upper: v.upper,
                });
            }
            if v.binary && (v.lower < 0.0 || v.upper > 1.0) {
                return Err(ModelError::BinaryBounds { var: i });
            }
        }
        for (r, c) in self.feasible.constraints.iter().enumerate() {
            if c.coefficients.len() != n {
                return Err(ModelError::Length {
                    what: format!("constraint {r} coefficients"),
                    expected: n,
                    found: c.coefficients.len(),
                });
            }
        }
        if self.f0.len() != n {
            return Err(ModelError::Length {
                what: "f0".into(),
                expected: n,
                found: self.f0.len(),
            });
        }
        if self.blocks.is_empty() && self.f0.iter().all(|&c| c == 0.0) {
            return Err(ModelError::EmptyObjective);
        }
        for (k, b) in self.blocks.iter().enumerate() {
            if b.terms.is_empty() {
                return Err(ModelError::EmptyBlock { block: k });
            }
            let dim = b.dim();
            if b.norm == NormKind::Abs && dim != 1 {
                return Err(ModelError::AbsNormDimension { block: k, dim });
            }
            for (i, t) in b.terms.iter().enumerate() {
                let bad = |detail: String| ModelError::InvalidTerm {
                    block: k,
                    term: i,
                    detail,
                };
                if let Some(v) = t.max_var() {
                    if v >= n {
                        return Err(bad(format!(
                            "decision index {v} out of range ({n} variables)"
                        )));
                    }
                }
                match t {
                    Term::BilinearAffinePiece { loadings, .. } => {
                        if let Some(l) = loadings.iter().find(|l| l.param >= dim) {
                            return Err(bad(format!(
                                "loading parameter index {} exceeds block dimension {dim}",
                                l.param
                            )));
                        }
                    }
                    Term::NegExpDetection { .. } => {
                        if dim != 1 {
                            return Err(bad(format!(
                                "detection terms need a scalar parameter, block dimension is {dim}"
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }

    /// The nominal parameters `ū`, one vector per block.
    pub fn nominal(&self) -> Vec<Vec<f64>> {
        self.blocks.iter().map(|b| b.nominal.clone()).collect()
    }

    pub fn check_params(&self, u: &[Vec<f64>]) -> Result<(), ModelError> {
        if u.len() != self.blocks.len() {
            return Err(ModelError::BlockCount {
                expected: self.blocks.len(),
                found: u.len(),
            });
        }
        for (k, (b, uk)) in self.blocks.iter().zip(u).enumerate() {
            if uk.len() != b.dim() {
                return Err(ModelError::BlockDimension {
                    block: k,
                    expected: b.dim(),
                    found: uk.len(),
                });
            }
        }
        Ok(())
    }

    pub fn check_decision(&self, x: &[f64]) -> Result<(), ModelError> {
        if x.len() != self.n_vars() {
            return Err(ModelError::VariableCount {
                expected: self.n_vars(),
                found: x.len(),
            });
        }
        Ok(())
    }

    pub fn linear_cost(&self, x: &[f64]) -> f64 {
        self.f0.iter().zip(x).map(|(c, v)| c * v).sum()
    }
}

/// `f0(x) + Σ_k max_i f_ik(u^k, x)`, summed left to right in block order.
pub fn evaluate_objective(
    inst: &ProblemInstance,
    u: &[Vec<f64>],
    x: &[f64],
) -> Result<f64, ModelError> {
    inst.check_params(u)?;
    inst.check_decision(x)?;
    let mut total = inst.linear_cost(x);
    for (b, uk) in inst.blocks.iter().zip(u) {
        total += b.value(uk, x);
    }
    Ok(total)
}
