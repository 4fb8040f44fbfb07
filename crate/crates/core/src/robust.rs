//! Robust values `q(δ)`: exact where the worst case has a closed form,
//! bracketed by scenario sampling otherwise.

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rand_distr::StandardNormal;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::milp::{
    linearize_summax, linearize_worst_case, solve_milp, solve_milp_from, EpigraphBuilder,
    LinearizeError, MilpError, MilpOptions, SolveReport, SolveStatus,
};
use crate::model::{evaluate_objective, MaxBlock, ModelError, NormKind, ProblemInstance, Term};
use crate::search::{solve_search, SearchError, SearchInstance};
use crate::sensitivity::{dual_maximizer, dual_norm};

pub const DEFAULT_SAMPLES: usize = 500;
pub const DEFAULT_SEED: u64 = 20220101;

#[derive(Debug, Error)]
pub enum RobustError {
    #[error("no exact rule for block {block}: {reason}")]
    NoExactRule { block: usize, reason: String },
    #[error("cannot sample the {0:?} ball")]
    UnsupportedSampling(NormKind),
    #[error("sample count must be at least 1")]
    NoSamples,
    #[error("reference value is zero")]
    ZeroReference,
    #[error("solver and instance disagree: {0}")]
    SolverMismatch(String),
    #[error("nominal problem is infeasible")]
    Infeasible,
    #[error(transparent)]
    Model(#[from] ModelError),
    #[error(transparent)]
    Milp(#[from] MilpError),
    #[error(transparent)]
    Linearize(#[from] LinearizeError),
    #[error(transparent)]
    Search(#[from] SearchError),
}

/// The ball `U(u, δ)`; the center defaults to the nominal parameters.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct UncertaintySpec {
    #[serde(default)]
    pub center: Option<Vec<Vec<f64>>>,
    pub radius: f64,
}

impl UncertaintySpec {
    pub fn nominal(radius: f64) -> Self {
        UncertaintySpec {
            center: None,
            radius,
        }
    }

    pub fn center_for(&self, inst: &ProblemInstance) -> Result<Vec<Vec<f64>>, ModelError> {
        match &self.center {
            Some(c) => {
                inst.check_params(c)?;
                Ok(c.clone())
            }
            None => Ok(inst.nominal()),
        }
    }

    /// Only `|δ|` matters.
    pub fn size(&self) -> f64 {
        self.radius.abs()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub enum RobustMode {
    ExactMonotone,
    ExactAffine,
    SampledBracket,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RobustReport {
    pub mode: RobustMode,
    pub lower: f64,
    pub upper: f64,
    pub x: Vec<f64>,
    /// A parameter point in the ball attaining `upper` at `x`.
    pub witness: Vec<Vec<f64>>,
    pub samples: Option<usize>,
    pub seed: Option<u64>,
    pub nodes: usize,
}

impl RobustReport {
    /// The robust value when it was computed exactly.
    pub fn q_delta(&self) -> Option<f64> {
        (self.mode != RobustMode::SampledBracket).then_some(self.upper)
    }
}

/// How nominal subproblems get solved.
#[derive(Debug, Clone, PartialEq)]
pub enum Solver {
    /// Enumeration for the square-search model; the instance must be the
    /// general form of this search instance.
    Search(SearchInstance),
    Milp(MilpOptions),
}

/// Solves `min_x f0(x) + Σ_k max_i f_ik(u^k, x)`.
///
/// The reported `x` is in the instance's decision space and `value` is
/// recomputed with [`evaluate_objective`].
pub fn solve_nominal_at(
    inst: &ProblemInstance,
    u: &[Vec<f64>],
    solver: &Solver,
) -> Result<SolveReport, RobustError> {
    inst.check_params(u)?;
    match solver {
        Solver::Search(search) => {
            if search.n_squares() != inst.blocks.len() || 2 * search.n_squares() != inst.n_vars() {
                return Err(RobustError::SolverMismatch(format!(
                    "search model has {} squares, instance has {} blocks",
                    search.n_squares(),
                    inst.blocks.len()
                )));
            }
            let flat: Vec<f64> = u.iter().map(|uk| uk[0]).collect();
            Ok(solve_search(search, &flat)?)
        }
        Solver::Milp(opts) => {
            let lin = linearize_summax(inst, u)?;
            let r = solve_milp(&lin.model, *opts)?;
            if r.status == SolveStatus::Infeasible {
                return Ok(r);
            }
            let x = lin.back.decision(&r.x);
            let value = evaluate_objective(inst, u, &x)?;
            Ok(SolveReport { x, value, ..r })
        }
    }
}

enum BlockRule {
    Fixed,
    Monotone,
    Affine,
}

fn block_rule(k: usize, b: &MaxBlock, x: &[f64], delta: f64) -> Result<BlockRule, RobustError> {
    if !b.perturbable || delta == 0.0 {
        return Ok(BlockRule::Fixed);
    }
    if b.terms.iter().all(Term::is_affine) {
        return Ok(BlockRule::Affine);
    }
    let monotone = b.terms.iter().all(|t| match t {
        Term::NegExpDetection { weight, rate, var } => weight * rate * x[*var] >= 0.0,
        _ => false,
    });
    if monotone {
        Ok(BlockRule::Monotone)
    } else {
        Err(RobustError::NoExactRule {
            block: k,
            reason: "terms are neither all affine nor all nonincreasing detection terms".into(),
        })
    }
}

/// `sup_{v ∈ U(u, δ)} f0(x) + Σ_k max_i f_ik(v^k, x)` and a maximizing `v`.
pub fn worst_case_value(
    inst: &ProblemInstance,
    x: &[f64],
    spec: &UncertaintySpec,
) -> Result<(f64, Vec<Vec<f64>>), RobustError> {
    inst.check_decision(x)?;
    let center = spec.center_for(inst)?;
    let delta = spec.size();
    let mut total = inst.linear_cost(x);
    let mut witness = Vec::with_capacity(inst.blocks.len());
    for (k, (b, uk)) in inst.blocks.iter().zip(&center).enumerate() {
        match block_rule(k, b, x, delta)? {
            BlockRule::Fixed => {
                total += b.value(uk, x);
                witness.push(uk.clone());
            }
            BlockRule::Monotone => {
                let v = vec![uk[0] - delta];
                total += b.value(&v, x);
                witness.push(v);
            }
            BlockRule::Affine => {
                let mut best = (f64::NEG_INFINITY, 0);
                for (i, t) in b.terms.iter().enumerate() {
                    let g = t.grad_u(uk, x);
                    let sup = t.value(uk, x)
                        + delta
                            * dual_norm(&g, b.norm).map_err(|e| RobustError::NoExactRule {
                                block: k,
                                reason: e.to_string(),
                            })?;
                    if sup > best.0 {
                        best = (sup, i);
                    }
                }
                let g = b.terms[best.1].grad_u(uk, x);
                let w = dual_maximizer(&g, b.norm).expect("norm checked above");
                witness.push(uk.iter().zip(&w).map(|(u, w)| u + delta * w).collect());
                total += best.0;
            }
        }
    }
    Ok((total, witness))
}

/// Exact robust solve: worst-case substitution for detection blocks,
/// dual-norm offsets for affine blocks.
pub fn solve_robust_exact(
    inst: &ProblemInstance,
    spec: &UncertaintySpec,
    solver: &Solver,
) -> Result<RobustReport, RobustError> {
    let center = spec.center_for(inst)?;
    let delta = spec.size();
    let perturbed = |b: &MaxBlock| b.perturbable && delta != 0.0;
    let all_affine = inst
        .blocks
        .iter()
        .all(|b| !perturbed(b) || b.terms.iter().all(Term::is_affine));

    if all_affine && matches!(solver, Solver::Milp(_)) {
        let Solver::Milp(opts) = solver else {
            unreachable!()
        };
        let lin = linearize_worst_case(inst, &center, delta)?;
        let r = solve_milp(&lin.model, *opts)?;
        if r.status == SolveStatus::Infeasible {
            return Err(RobustError::Infeasible);
        }
        let x = lin.back.decision(&r.x);
        let (upper, witness) = worst_case_value(inst, &x, spec)?;
        return Ok(RobustReport {
            mode: RobustMode::ExactAffine,
            lower: r.bound.min(upper),
            upper,
            x,
            witness,
            samples: None,
            seed: None,
            nodes: r.nodes,
        });
    }

    // Monotone path: every perturbed block must be detection terms on
    // variables that cannot go negative.
    for (k, b) in inst.blocks.iter().enumerate().filter(|(_, b)| perturbed(b)) {
        for t in &b.terms {
            let ok = match t {
                Term::NegExpDetection { weight, rate, var } => {
                    *weight >= 0.0 && *rate >= 0.0 && inst.feasible.variables[*var].lower >= 0.0
                }
                _ => false,
            };
            if !ok {
                return Err(RobustError::NoExactRule {
                    block: k,
                    reason: "mixed or non-monotone terms".into(),
                });
            }
        }
    }
    let worst: Vec<Vec<f64>> = inst
        .blocks
        .iter()
        .zip(&center)
        .map(|(b, uk)| {
            if perturbed(b) {
                vec![uk[0] - delta]
            } else {
                uk.clone()
            }
        })
        .collect();
    let r = solve_nominal_at(inst, &worst, solver)?;
    if r.status == SolveStatus::Infeasible {
        return Err(RobustError::Infeasible);
    }
    let (upper, witness) = worst_case_value(inst, &r.x, spec)?;
    Ok(RobustReport {
        mode: RobustMode::ExactMonotone,
        lower: r.bound.min(upper),
        upper,
        x: r.x,
        witness,
        samples: None,
        seed: None,
        nodes: r.nodes,
    })
}

fn draw_offset(rng: &mut ChaCha8Rng, dim: usize, norm: NormKind, delta: f64) -> Vec<f64> {
    match norm {
        NormKind::L2 => loop {
            let g: Vec<f64> = (0..dim).map(|_| rng.sample(StandardNormal)).collect();
            let n = NormKind::L2.eval(&g);
            if n == 0.0 {
                continue;
            }
            let radius = delta * rng.random::<f64>().powf(1.0 / dim as f64);
            let mut w: Vec<f64> = g.iter().map(|v| v / n * radius).collect();
            let mut wn = NormKind::L2.eval(&w);
            while wn > delta {
                w.iter_mut().for_each(|v| *v *= delta / wn);
                wn = NormKind::L2.eval(&w);
            }
            break w;
        },
        _ => (0..dim).map(|_| rng.random_range(-delta..=delta)).collect(),
    }
}

/// `count` offsets uniform in the radius-`|δ|` ball of `norm`.
///
/// The stream is fixed by `seed`, and a longer request extends a shorter one.
pub fn sample_ball(
    dim: usize,
    norm: NormKind,
    delta: f64,
    count: usize,
    seed: u64,
) -> Result<Vec<Vec<f64>>, RobustError> {
    if norm == NormKind::L1 {
        return Err(RobustError::UnsupportedSampling(norm));
    }
    if count == 0 {
        return Err(RobustError::NoSamples);
    }
    let delta = delta.abs();
    if delta == 0.0 {
        return Ok(vec![vec![0.0; dim]; count]);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    Ok((0..count)
        .map(|_| draw_offset(&mut rng, dim, norm, delta))
        .collect())
}

/// Parameter points for the scenario expansion. Point 0 is the center; the
/// rest are drawn blockwise, each block within its own ball.
pub fn scenario_points(
    inst: &ProblemInstance,
    spec: &UncertaintySpec,
    count: usize,
    seed: u64,
) -> Result<Vec<Vec<Vec<f64>>>, RobustError> {
    if count == 0 {
        return Err(RobustError::NoSamples);
    }
    let center = spec.center_for(inst)?;
    let delta = spec.size();
    for b in inst.blocks.iter().filter(|b| b.perturbable && delta != 0.0) {
        if b.norm == NormKind::L1 {
            return Err(RobustError::UnsupportedSampling(b.norm));
        }
    }
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut points = vec![center.clone()];
    for _ in 1..count {
        let p = inst
            .blocks
            .iter()
            .zip(&center)
            .map(|(b, uk)| {
                if b.perturbable && delta != 0.0 {
                    let w = draw_offset(&mut rng, b.dim(), b.norm, delta);
                    uk.iter().zip(&w).map(|(u, w)| u + w).collect()
                } else {
                    uk.clone()
                }
            })
            .collect();
        points.push(p);
    }
    Ok(points)
}

/// Sampled robust solve.
///
/// The sup over the ball is replaced by a max over `count` sampled points;
/// the resulting MILP value is a lower bound on `q(δ)`. Scenario rows enter
/// lazily: only those violated at the current solution are added, which
/// gives the same optimum as the full expansion. The exact worst case at the
/// returned decision is the upper bound.
pub fn solve_robust_sampled(
    inst: &ProblemInstance,
    spec: &UncertaintySpec,
    count: usize,
    seed: u64,
    opts: MilpOptions,
) -> Result<RobustReport, RobustError> {
    let points = scenario_points(inst, spec, count, seed)?;
    let mut builder = EpigraphBuilder::new(inst)?;
    let s = inst.blocks.len();
    let mut added = vec![vec![false; points.len()]; s];
    for k in 0..s {
        for i in 0..builder.n_pieces(k) {
            builder.add_piece(k, i, &points[0][k]);
        }
        added[k][0] = true;
    }

    let mut nodes = 0;
    let mut basis = None;
    loop {
        let lin = builder.to_model();
        let (r, root) = solve_milp_from(&lin.model, opts, basis.as_ref())?;
        basis = root;
        nodes += r.nodes;
        if r.status == SolveStatus::Infeasible {
            return Err(RobustError::Infeasible);
        }
        let x = lin.back.decision(&r.x);
        let t = lin.back.block_values(&r.x);
        let mut grew = false;
        for (k, b) in inst.blocks.iter().enumerate() {
            let mut worst = (t[k] + 1e-9 * (1.0 + t[k].abs()), None);
            for (j, p) in points.iter().enumerate() {
                if added[k][j] {
                    continue;
                }
                let v = b.value(&p[k], &x);
                if v > worst.0 {
                    worst = (v, Some(j));
                }
            }
            if let (_, Some(j)) = worst {
                for i in 0..b.terms.len() {
                    builder.add_piece(k, i, &points[j][k]);
                }
                added[k][j] = true;
                grew = true;
            }
        }
        if !grew {
            let (upper, witness) = worst_case_value(inst, &x, spec)?;
            return Ok(RobustReport {
                mode: RobustMode::SampledBracket,
                lower: r.bound.min(upper),
                upper,
                x,
                witness,
                samples: Some(points.len()),
                seed: Some(seed),
                nodes,
            });
        }
    }
}

/// `100 · |q̃ − q| / |q|`.
pub fn error_pct(q_tilde: f64, q_delta: f64) -> Result<f64, RobustError> {
    if q_delta == 0.0 {
        return Err(RobustError::ZeroReference);
    }
    Ok(100.0 * (q_tilde - q_delta).abs() / q_delta.abs())
}
