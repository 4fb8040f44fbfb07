//! Epigraph reformulation of piecewise-affine sum-of-max instances.
//!
//! Each block `k` gets an auxiliary `t_k` with one row `t_k >= f_ik(v, x)`
//! per piece (and per parameter point `v` when several are supplied). The
//! objective becomes `f0·x + Σ_k t_k`.

use thiserror::Error;

use super::bnb::MilpModel;
use super::lp::LinearProgram;
use crate::model::{Loading, ModelError, NormKind, ProblemInstance, Relation, Term};

#[derive(Debug, Error)]
pub enum LinearizeError {
    #[error("block {block}, term {term} is not piecewise affine; use the search solver for detection terms")]
    NonAffine { block: usize, term: usize },
    #[error("no exact rule: block {block} uses the {norm:?} norm, whose dual norm has no linear epigraph")]
    NoExactRule { block: usize, norm: NormKind },
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Maps MILP solutions back to the instance's decision space.
#[derive(Debug, Clone, PartialEq)]
pub struct BackMap {
    pub n_decisions: usize,
    /// Column of `t_k` for each block.
    pub block_aux: Vec<usize>,
}

impl BackMap {
    pub fn decision(&self, sol: &[f64]) -> Vec<f64> {
        sol[..self.n_decisions].to_vec()
    }

    pub fn block_values(&self, sol: &[f64]) -> Vec<f64> {
        self.block_aux.iter().map(|&c| sol[c]).collect()
    }
}

#[derive(Debug, Clone)]
pub struct Linearized {
    pub model: MilpModel,
    pub back: BackMap,
}

type Sparse = Vec<(usize, f64)>;

/// An affine piece written as `constant + Σ coef·x_j`.
#[derive(Debug, Clone)]
struct AffineRow {
    constant: f64,
    coefs: Sparse,
}

/// Incremental builder for epigraph models.
#[derive(Debug, Clone)]
pub struct EpigraphBuilder {
    n_x: usize,
    objective: Vec<f64>,
    lower: Vec<f64>,
    upper: Vec<f64>,
    binaries: Vec<usize>,
    rows: Vec<(Sparse, Relation, f64)>,
    t_cols: Vec<usize>,
    /// Running `[max lo, max hi]` over the rows attached to each `t_k`.
    t_range: Vec<(f64, f64)>,
    terms: Vec<Vec<Term>>,
    dims: Vec<usize>,
}

fn dot_interval(coefs: &Sparse, lower: &[f64], upper: &[f64]) -> (f64, f64) {
    coefs.iter().fold((0.0, 0.0), |(lo, hi), &(j, c)| {
        let (a, b) = (c * lower[j], c * upper[j]);
        (lo + a.min(b), hi + a.max(b))
    })
}

/// `z_t(x)` for one parameter index as a sparse row over decisions.
fn loading_row(loadings: &[Loading], param: usize) -> Sparse {
    let mut row: Sparse = Vec::new();
    for l in loadings.iter().filter(|l| l.param == param) {
        match row.iter_mut().find(|(j, _)| *j == l.var) {
            Some((_, c)) => *c += l.coef,
            None => row.push((l.var, l.coef)),
        }
    }
    row
}

impl EpigraphBuilder {
    /// Sets up decision columns, the original rows and one `t_k` per block.
    /// Fails if any term is not an affine piece.
    pub fn new(inst: &ProblemInstance) -> Result<Self, LinearizeError> {
        inst.validate()?;
        for (k, b) in inst.blocks.iter().enumerate() {
            if let Some(i) = b.terms.iter().position(|t| !t.is_affine()) {
                return Err(LinearizeError::NonAffine { block: k, term: i });
            }
        }
        let vars = &inst.feasible.variables;
        let n_x = vars.len();
        let mut objective = inst.f0.clone();
        let mut lower: Vec<f64> = vars.iter().map(|v| v.lower).collect();
        let mut upper: Vec<f64> = vars.iter().map(|v| v.upper).collect();
        let binaries = (0..n_x).filter(|&j| vars[j].binary).collect();
        let rows = inst
            .feasible
            .constraints
            .iter()
            .map(|c| {
                let coefs = c
                    .coefficients
                    .iter()
                    .enumerate()
                    .filter(|(_, v)| **v != 0.0)
                    .map(|(j, v)| (j, *v))
                    .collect();
                (coefs, c.relation, c.rhs)
            })
            .collect();
        let mut t_cols = Vec::with_capacity(inst.blocks.len());
        for _ in &inst.blocks {
            t_cols.push(objective.len());
            objective.push(1.0);
            lower.push(0.0);
            upper.push(0.0);
        }
        Ok(EpigraphBuilder {
            n_x,
            objective,
            lower,
            upper,
            binaries,
            rows,
            t_range: vec![(f64::NEG_INFINITY, f64::NEG_INFINITY); inst.blocks.len()],
            t_cols,
            terms: inst.blocks.iter().map(|b| b.terms.clone()).collect(),
            dims: inst.blocks.iter().map(|b| b.dim()).collect(),
        })
    }

    pub fn n_blocks(&self) -> usize {
        self.t_cols.len()
    }

    pub fn n_pieces(&self, block: usize) -> usize {
        self.terms[block].len()
    }

    fn affine_row(&self, block: usize, term: usize, v: &[f64]) -> AffineRow {
        let Term::BilinearAffinePiece {
            slope,
            intercept,
            base,
            loadings,
        } = &self.terms[block][term]
        else {
            unreachable!("checked in new")
        };
        let mut coefs: Sparse = Vec::new();
        for l in loadings {
            let c = -slope * v[l.param] * l.coef;
            match coefs.iter_mut().find(|(j, _)| *j == l.var) {
                Some((_, acc)) => *acc += c,
                None => coefs.push((l.var, c)),
            }
        }
        AffineRow {
            constant: slope * base + intercept,
            coefs,
        }
    }

    fn push_epigraph(&mut self, block: usize, row: AffineRow, extra_hi: f64) {
        let (lo, hi) = dot_interval(&row.coefs, &self.lower, &self.upper);
        let r = &mut self.t_range[block];
        r.0 = r.0.max(row.constant + lo);
        r.1 = r.1.max(row.constant + hi + extra_hi);
        // t_k - coefs·x >= constant
        let t = self.t_cols[block];
        let mut coefs: Sparse = row.coefs.into_iter().map(|(j, c)| (j, -c)).collect();
        coefs.push((t, 1.0));
        self.rows.push((coefs, Relation::Ge, row.constant));
    }

    /// Adds `t_block >= f_{term}(v, x)`.
    pub fn add_piece(&mut self, block: usize, term: usize, v: &[f64]) {
        let row = self.affine_row(block, term, v);
        self.push_epigraph(block, row, 0.0);
    }

    /// Adds every piece of every block at the parameters `u`.
    pub fn add_all_pieces(&mut self, u: &[Vec<f64>]) {
        for k in 0..self.n_blocks() {
            for i in 0..self.n_pieces(k) {
                self.add_piece(k, i, &u[k]);
            }
        }
    }

    fn new_column(&mut self, lower: f64, upper: f64) -> usize {
        self.objective.push(0.0);
        self.lower.push(lower);
        self.upper.push(upper);
        self.objective.len() - 1
    }

    /// Linear expression (over decisions and fresh auxiliaries) that equals
    /// `‖z(x)‖_*` at any optimum, with an upper bound on its value.
    fn dual_norm_expr(
        &mut self,
        block: usize,
        norm: NormKind,
        loadings: &[Loading],
    ) -> Result<(Sparse, f64), LinearizeError> {
        let dim = self.dims[block];
        let comps: Vec<(Sparse, (f64, f64))> = (0..dim)
            .map(|p| {
                let row = loading_row(loadings, p);
                let iv = dot_interval(&row, &self.lower, &self.upper);
                (row, iv)
            })
            .collect();
        match norm.dual() {
            NormKind::L2 => Err(LinearizeError::NoExactRule { block, norm }),
            // Abs on a scalar block behaves as ℓ1 of length one
            NormKind::L1 | NormKind::Abs => {
                let mut expr: Sparse = Vec::new();
                let mut hi = 0.0;
                for (row, (lo, up)) in comps {
                    hi += lo.abs().max(up.abs());
                    if lo >= 0.0 {
                        expr.extend(row);
                    } else if up <= 0.0 {
                        expr.extend(row.into_iter().map(|(j, c)| (j, -c)));
                    } else {
                        let a = self.new_column(0.0, lo.abs().max(up.abs()));
                        self.abs_rows(a, &row);
                        expr.push((a, 1.0));
                    }
                }
                Ok((expr, hi))
            }
            NormKind::Linf => {
                let hi = comps
                    .iter()
                    .fold(0.0f64, |m, (_, (lo, up))| m.max(lo.abs()).max(up.abs()));
                let w = self.new_column(0.0, hi);
                for (row, _) in &comps {
                    self.abs_rows(w, row);
                }
                Ok((vec![(w, 1.0)], hi))
            }
        }
    }

    /// Rows `a >= row·x` and `a >= -row·x`.
    fn abs_rows(&mut self, a: usize, row: &Sparse) {
        let mut plus: Sparse = row.iter().map(|&(j, c)| (j, -c)).collect();
        plus.push((a, 1.0));
        self.rows.push((plus, Relation::Ge, 0.0));
        let mut minus: Sparse = row.clone();
        minus.push((a, 1.0));
        self.rows.push((minus, Relation::Ge, 0.0));
    }

    /// Adds `t_block >= f_term(u, x) + delta·|slope|·‖z(x)‖_*` for every
    /// piece of the block.
    pub fn add_worst_case_pieces(
        &mut self,
        block: usize,
        u: &[f64],
        delta: f64,
        norm: NormKind,
    ) -> Result<(), LinearizeError> {
        let delta = delta.abs();
        for i in 0..self.n_pieces(block) {
            let Term::BilinearAffinePiece {
                slope, loadings, ..
            } = self.terms[block][i].clone()
            else {
                unreachable!("checked in new")
            };
            let mut row = self.affine_row(block, i, u);
            let weight = delta * slope.abs();
            let mut extra_hi = 0.0;
            if weight != 0.0 {
                let (expr, hi) = self.dual_norm_expr(block, norm, &loadings)?;
                extra_hi = weight * hi;
                for (j, c) in expr {
                    row.coefs.push((j, weight * c));
                }
            }
            self.push_epigraph(block, row, extra_hi);
        }
        Ok(())
    }

    /// Dense MILP for the rows added so far.
    pub fn to_model(&self) -> Linearized {
        let ncols = self.objective.len();
        let mut lower = self.lower.clone();
        let mut upper = self.upper.clone();
        for (k, &t) in self.t_cols.iter().enumerate() {
            let (lo, hi) = self.t_range[k];
            lower[t] = lo;
            upper[t] = hi.max(lo);
        }
        let mut lp = LinearProgram::new(self.objective.clone(), lower, upper);
        for (coefs, rel, rhs) in &self.rows {
            let mut dense = vec![0.0; ncols];
            for &(j, c) in coefs {
                dense[j] += c;
            }
            lp.add_row(dense, *rel, *rhs);
        }
        Linearized {
            model: MilpModel {
                lp,
                binaries: self.binaries.clone(),
            },
            back: BackMap {
                n_decisions: self.n_x,
                block_aux: self.t_cols.clone(),
            },
        }
    }
}

/// Epigraph MILP of the nominal problem at parameters `u`.
pub fn linearize_summax(
    inst: &ProblemInstance,
    u: &[Vec<f64>],
) -> Result<Linearized, LinearizeError> {
    inst.check_params(u)?;
    let mut b = EpigraphBuilder::new(inst)?;
    b.add_all_pieces(u);
    Ok(b.to_model())
}

/// Epigraph MILP of the robust problem over the ball of radius `delta`
/// around `u`, with each piece's sup written out through its dual norm.
/// With `delta == 0` this is exactly [`linearize_summax`].
pub fn linearize_worst_case(
    inst: &ProblemInstance,
    u: &[Vec<f64>],
    delta: f64,
) -> Result<Linearized, LinearizeError> {
    inst.check_params(u)?;
    let mut b = EpigraphBuilder::new(inst)?;
    for (k, blk) in inst.blocks.iter().enumerate() {
        if blk.perturbable && delta != 0.0 {
            b.add_worst_case_pieces(k, &u[k], delta, blk.norm)?;
        } else {
            for i in 0..blk.terms.len() {
                b.add_piece(k, i, &u[k]);
            }
        }
    }
    Ok(b.to_model())
}
