//! Local sensitivity of the robust min-value function at the nominal point.
//!
//! Everything here works from a nominal minimizer `x̄`: the active pieces of
//! each block, the gradients of those pieces in the parameter, and dual norms
//! of the gradients. The inner maximizations over the unit ball are always
//! evaluated in closed form.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::model::{ModelError, NormKind, ProblemInstance};

/// Relative tie tolerance for active-set detection.
pub const DEFAULT_TIE_TOL: f64 = 1e-6;

#[derive(Debug, Error)]
pub enum SensitivityError {
    #[error("absolute-value norm applied to a vector of dimension {0}")]
    AbsDimension(usize),
    #[error("no minimizers supplied")]
    NoMinimizers,
    #[error(transparent)]
    Model(#[from] ModelError),
}

/// Active index sets `I_k(x̄)`, one per block.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ActiveSets {
    pub sets: Vec<Vec<usize>>,
    pub tol: f64,
}

/// Terms within `tol * (1 + |max|)` of the block maximum, at the nominal
/// parameters.
pub fn active_sets(inst: &ProblemInstance, x: &[f64], tol: f64) -> ActiveSets {
    let sets = inst
        .blocks
        .iter()
        .map(|b| {
            let vals = b.term_values(&b.nominal, x);
            let max = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
            let cut = max - tol * (1.0 + max.abs());
            vals.iter()
                .enumerate()
                .filter(|(_, &v)| v >= cut)
                .map(|(i, _)| i)
                .collect()
        })
        .collect();
    ActiveSets { sets, tol }
}

/// `max_{‖w‖ ≤ 1} <g, w>` for the given primal norm.
pub fn dual_norm(g: &[f64], norm: NormKind) -> Result<f64, SensitivityError> {
    if norm == NormKind::Abs && g.len() != 1 {
        return Err(SensitivityError::AbsDimension(g.len()));
    }
    Ok(norm.dual().eval(g))
}

/// A unit-ball point attaining [`dual_norm`]. Zero when `g` is zero.
pub fn dual_maximizer(g: &[f64], norm: NormKind) -> Result<Vec<f64>, SensitivityError> {
    let sign = |v: f64| {
        if v > 0.0 {
            1.0
        } else if v < 0.0 {
            -1.0
        } else {
            0.0
        }
    };
    match norm {
        NormKind::Abs => {
            if g.len() != 1 {
                return Err(SensitivityError::AbsDimension(g.len()));
            }
            Ok(vec![sign(g[0])])
        }
        NormKind::L2 => {
            let n = NormKind::L2.eval(g);
            if n == 0.0 {
                Ok(vec![0.0; g.len()])
            } else {
                Ok(g.iter().map(|v| v / n).collect())
            }
        }
        NormKind::Linf => Ok(g.iter().map(|&v| sign(v)).collect()),
        NormKind::L1 => {
            let mut w = vec![0.0; g.len()];
            // first index of largest magnitude
            let mut best: Option<usize> = None;
            for (j, v) in g.iter().enumerate() {
                if best.is_none_or(|b| v.abs() > g[b].abs()) {
                    best = Some(j);
                }
            }
            if let Some(j) = best {
                w[j] = sign(g[j]);
            }
            Ok(w)
        }
    }
}

/// Per-block sums over active pieces of `summand(g, dual_norm(g))`, at one
/// minimizer. Non-perturbable blocks contribute zero.
fn block_sums(
    inst: &ProblemInstance,
    x: &[f64],
    active: &ActiveSets,
    summand: impl Fn(&[f64], f64) -> f64,
) -> Result<Vec<f64>, SensitivityError> {
    let mut out = Vec::with_capacity(inst.blocks.len());
    for (b, set) in inst.blocks.iter().zip(&active.sets) {
        if !b.perturbable {
            out.push(0.0);
            continue;
        }
        let mut s = 0.0;
        for &i in set {
            let g = b.terms[i].grad_u(&b.nominal, x);
            s += summand(&g, dual_norm(&g, b.norm)?);
        }
        out.push(s);
    }
    Ok(out)
}

fn radius_summand(_: &[f64], dual: f64) -> f64 {
    dual
}

fn full_summand(g: &[f64], dual: f64) -> f64 {
    let sq: f64 = g.iter().map(|v| v * v).sum();
    (sq + dual * dual).sqrt()
}

fn max_over_minimizers(
    inst: &ProblemInstance,
    minimizers: &[Vec<f64>],
    tol: f64,
    summand: fn(&[f64], f64) -> f64,
) -> Result<(f64, usize), SensitivityError> {
    if minimizers.is_empty() {
        return Err(SensitivityError::NoMinimizers);
    }
    let mut best = (f64::NEG_INFINITY, 0);
    for (j, x) in minimizers.iter().enumerate() {
        inst.check_decision(x)?;
        let active = active_sets(inst, x, tol);
        let total: f64 = block_sums(inst, x, &active, summand)?.iter().sum();
        if total > best.0 {
            best = (total, j);
        }
    }
    Ok(best)
}

/// Bound on the local Lipschitz modulus of `q` at radius zero.
pub fn lip_radius_estimate(
    inst: &ProblemInstance,
    minimizers: &[Vec<f64>],
    tol: f64,
) -> Result<f64, SensitivityError> {
    max_over_minimizers(inst, minimizers, tol, radius_summand).map(|(v, _)| v)
}

/// Bound on the local Lipschitz modulus of `p` at `(ū, 0)`, center and
/// radius moving jointly.
pub fn lip_full_estimate(
    inst: &ProblemInstance,
    minimizers: &[Vec<f64>],
    tol: f64,
) -> Result<f64, SensitivityError> {
    max_over_minimizers(inst, minimizers, tol, full_summand).map(|(v, _)| v)
}

/// First-order prediction `q(0) + δ·lip` of the robust minimum value.
pub fn predict_robust_value(q0: f64, lip_radius: f64, delta: f64) -> f64 {
    q0 + delta * lip_radius
}

/// Sensitivity summary at a nominal solution.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SensitivityReport {
    /// Minimizer attaining the radius bound.
    pub minimizer: Vec<f64>,
    pub minimizer_index: usize,
    pub minimizers_considered: usize,
    pub active: ActiveSets,
    pub lip_radius: f64,
    pub lip_full: f64,
    pub q0: f64,
    /// Per-block `Σ_{i∈I_k} ‖∇₁f_ik‖_*` at the reported minimizer.
    pub block_gradient_norms: Vec<f64>,
    pub q0_display: String,
    pub lip_radius_display: String,
}

/// Runs the full sensitivity computation for the supplied minimizer set.
pub fn analyze(
    inst: &ProblemInstance,
    minimizers: &[Vec<f64>],
    q0: f64,
    tol: f64,
) -> Result<SensitivityReport, SensitivityError> {
    let (lip_radius, idx) = max_over_minimizers(inst, minimizers, tol, radius_summand)?;
    let (lip_full, _) = max_over_minimizers(inst, minimizers, tol, full_summand)?;
    let x = minimizers[idx].clone();
    let active = active_sets(inst, &x, tol);
    let block_gradient_norms = block_sums(inst, &x, &active, radius_summand)?;
    Ok(SensitivityReport {
        minimizer: x,
        minimizer_index: idx,
        minimizers_considered: minimizers.len(),
        active,
        lip_radius,
        lip_full,
        q0,
        block_gradient_norms,
        q0_display: format!("{q0:.3}"),
        lip_radius_display: format!("{lip_radius:.5}"),
    })
}

/// Multiplier pair `(y_i^k, w_i^k)` for one active term.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateEntry {
    pub block: usize,
    pub term: usize,
    pub y: f64,
    pub w: Vec<f64>,
}

/// Claimed subgradient `(g, γ)` of the min-value function together with the
/// multipliers that generate it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubgradientCertificate {
    pub x: Vec<f64>,
    pub entries: Vec<CertificateEntry>,
    pub g: Vec<f64>,
    pub gamma: f64,
}

impl SubgradientCertificate {
    /// Builds `(g, γ)` from the multipliers at the nominal parameters.
    pub fn assemble(inst: &ProblemInstance, x: Vec<f64>, entries: Vec<CertificateEntry>) -> Self {
        let offsets = block_offsets(inst);
        let mut g = vec![0.0; *offsets.last().unwrap_or(&0)];
        let mut gamma = 0.0;
        for e in &entries {
            let b = &inst.blocks[e.block];
            let grad = b.terms[e.term].grad_u(&b.nominal, &x);
            for (j, gj) in grad.iter().enumerate() {
                g[offsets[e.block] + j] += e.y * gj;
            }
            gamma += e.y * grad.iter().zip(&e.w).map(|(a, b)| a * b).sum::<f64>();
        }
        SubgradientCertificate {
            x,
            entries,
            g,
            gamma,
        }
    }
}

/// Start offset of each block inside the stacked parameter vector, with the
/// total length appended.
fn block_offsets(inst: &ProblemInstance) -> Vec<usize> {
    let mut off = Vec::with_capacity(inst.blocks.len() + 1);
    let mut acc = 0;
    off.push(0);
    for b in &inst.blocks {
        acc += b.dim();
        off.push(acc);
    }
    off
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub enum CertificateViolation {
    Dimension(String),
    NotActive {
        block: usize,
        term: usize,
    },
    NegativeMultiplier {
        block: usize,
        term: usize,
        y: f64,
    },
    Simplex {
        block: usize,
        sum: f64,
    },
    NormBound {
        block: usize,
        term: usize,
        norm: f64,
    },
    Gradient {
        index: usize,
        claimed: f64,
        assembled: f64,
    },
    Gamma {
        claimed: f64,
        assembled: f64,
    },
}

impl std::fmt::Display for CertificateViolation {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        match self {
            CertificateViolation::Dimension(s) => write!(f, "dimension mismatch: {s}"),
            CertificateViolation::NotActive { block, term } => {
                write!(f, "term {term} of block {block} is not active")
            }
            CertificateViolation::NegativeMultiplier { block, term, y } => {
                write!(f, "negative multiplier {y} on block {block} term {term}")
            }
            CertificateViolation::Simplex { block, sum } => {
                write!(
                    f,
                    "simplex violation in block {block}: multipliers sum to {sum}"
                )
            }
            CertificateViolation::NormBound { block, term, norm } => {
                write!(
                    f,
                    "direction for block {block} term {term} has norm {norm} > 1"
                )
            }
            CertificateViolation::Gradient {
                index,
                claimed,
                assembled,
            } => write!(f, "g[{index}] = {claimed}, assembly gives {assembled}"),
            CertificateViolation::Gamma { claimed, assembled } => {
                write!(f, "gamma = {claimed}, assembly gives {assembled}")
            }
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CertificateCheck {
    pub valid: bool,
    pub violations: Vec<CertificateViolation>,
}

/// Checks every structural condition on a subgradient certificate and
/// collects all violations.
pub fn check_subgradient_certificate(
    cert: &SubgradientCertificate,
    inst: &ProblemInstance,
    tol: f64,
) -> CertificateCheck {
    let mut violations = Vec::new();
    let offsets = block_offsets(inst);
    let m = *offsets.last().unwrap_or(&0);
    if cert.x.len() != inst.n_vars() {
        violations.push(CertificateViolation::Dimension(format!(
            "x has length {}, expected {}",
            cert.x.len(),
            inst.n_vars()
        )));
    }
    if cert.g.len() != m {
        violations.push(CertificateViolation::Dimension(format!(
            "g has length {}, expected {m}",
            cert.g.len()
        )));
    }
    for e in &cert.entries {
        let ok = e.block < inst.blocks.len()
            && e.term < inst.blocks[e.block].terms.len()
            && e.w.len() == inst.blocks[e.block].dim();
        if !ok {
            violations.push(CertificateViolation::Dimension(format!(
                "entry (block {}, term {}) does not match the instance",
                e.block, e.term
            )));
        }
    }
    if !violations.is_empty() {
        return CertificateCheck {
            valid: false,
            violations,
        };
    }

    let active = active_sets(inst, &cert.x, DEFAULT_TIE_TOL);
    let mut sums = vec![0.0; inst.blocks.len()];
    for e in &cert.entries {
        let b = &inst.blocks[e.block];
        if !active.sets[e.block].contains(&e.term) {
            violations.push(CertificateViolation::NotActive {
                block: e.block,
                term: e.term,
            });
        }
        if e.y < -tol {
            violations.push(CertificateViolation::NegativeMultiplier {
                block: e.block,
                term: e.term,
                y: e.y,
            });
        }
        let n = b.norm.eval(&e.w);
        if n > 1.0 + tol {
            violations.push(CertificateViolation::NormBound {
                block: e.block,
                term: e.term,
                norm: n,
            });
        }
        sums[e.block] += e.y;
    }
    for (k, s) in sums.iter().enumerate() {
        if (s - 1.0).abs() > tol {
            violations.push(CertificateViolation::Simplex { block: k, sum: *s });
        }
    }
    let rebuilt = SubgradientCertificate::assemble(inst, cert.x.clone(), cert.entries.clone());
    for (j, (c, a)) in cert.g.iter().zip(&rebuilt.g).enumerate() {
        if (c - a).abs() > tol * (1.0 + a.abs()) {
            violations.push(CertificateViolation::Gradient {
                index: j,
                claimed: *c,
                assembled: *a,
            });
        }
    }
    if (cert.gamma - rebuilt.gamma).abs() > tol * (1.0 + rebuilt.gamma.abs()) {
        violations.push(CertificateViolation::Gamma {
            claimed: cert.gamma,
            assembled: rebuilt.gamma,
        });
    }
    CertificateCheck {
        valid: violations.is_empty(),
        violations,
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::model::{FeasibleSet, Loading, MaxBlock, Term, Variable};
    use rand::{Rng, SeedableRng};
    use rand_chacha::ChaCha8Rng;

    fn penalty(alpha1: f64) -> ProblemInstance {
        let pieces = [
            (alpha1, 0.0),
            (4.0, -20.0),
            (40.0, -380.0),
            (400.0, -7580.0),
            (0.0, 0.0),
        ];
        let terms = pieces
            .iter()
            .map(|&(slope, intercept)| Term::BilinearAffinePiece {
                slope,
                intercept,
                base: 100.0,
                loadings: vec![Loading {
                    param: 0,
                    var: 0,
                    coef: 1.0,
                }],
            })
            .collect();
        ProblemInstance::new(
            FeasibleSet {
                variables: vec![Variable::continuous(0.0, 200.0)],
                constraints: vec![],
            },
            vec![0.0],
            vec![MaxBlock {
                terms,
                nominal: vec![1.0],
                norm: NormKind::Abs,
                perturbable: true,
            }],
        )
        .unwrap()
    }

    fn single_l2() -> ProblemInstance {
        // gradient in u is -slope * x, choose slope = -1 so grad = x
        ProblemInstance::new(
            FeasibleSet {
                variables: vec![
                    Variable::continuous(-10.0, 10.0),
                    Variable::continuous(-10.0, 10.0),
                ],
                constraints: vec![],
            },
            vec![0.0, 0.0],
            vec![MaxBlock {
                terms: vec![Term::BilinearAffinePiece {
                    slope: -1.0,
                    intercept: 0.0,
                    base: 0.0,
                    loadings: vec![
                        Loading {
                            param: 0,
                            var: 0,
                            coef: 1.0,
                        },
                        Loading {
                            param: 1,
                            var: 1,
                            coef: 1.0,
                        },
                    ],
                }],
                nominal: vec![0.5, 0.5],
                norm: NormKind::L2,
                perturbable: true,
            }],
        )
        .unwrap()
    }

    #[test]
    fn singleton_block_is_active() {
        let inst = single_l2();
        let a = active_sets(&inst, &[3.0, 4.0], DEFAULT_TIE_TOL);
        assert_eq!(a.sets, vec![vec![0]]);
    }

    #[test]
    fn penalty_ties_at_gap_five_and_ten() {
        let inst = penalty(-2.0);
        assert_eq!(
            active_sets(&inst, &[95.0], DEFAULT_TIE_TOL).sets,
            vec![vec![1, 4]]
        );
        assert_eq!(
            active_sets(&inst, &[90.0], DEFAULT_TIE_TOL).sets,
            vec![vec![1, 2]]
        );
        // exact ties survive a zero tolerance
        assert_eq!(active_sets(&inst, &[95.0], 0.0).sets, vec![vec![1, 4]]);
        assert_eq!(active_sets(&inst, &[90.0], 0.0).sets, vec![vec![1, 2]]);
    }

    #[test]
    fn dual_norm_closed_forms() {
        assert_eq!(dual_norm(&[3.0, 4.0], NormKind::L2).unwrap(), 5.0);
        assert_eq!(dual_norm(&[1.0, -2.0], NormKind::Linf).unwrap(), 3.0);
        assert_eq!(dual_norm(&[1.0, -2.0], NormKind::L1).unwrap(), 2.0);
        assert_eq!(dual_norm(&[-2.0], NormKind::Abs).unwrap(), 2.0);
        assert!(matches!(
            dual_norm(&[1.0, 2.0], NormKind::Abs),
            Err(SensitivityError::AbsDimension(2))
        ));
    }

    #[test]
    fn dual_norm_l2_against_sampled_unit_vectors() {
        let g = [1.0, -2.0];
        let mut rng = ChaCha8Rng::seed_from_u64(7);
        let mut best = f64::NEG_INFINITY;
        for _ in 0..100_000 {
            let th: f64 = rng.random_range(0.0..std::f64::consts::TAU);
            best = best.max(g[0] * th.cos() + g[1] * th.sin());
        }
        let d = dual_norm(&g, NormKind::L2).unwrap();
        assert!((best - d).abs() < 1e-3, "sampled {best} vs {d}");
        assert!(best <= d + 1e-12);
    }

    #[test]
    fn dual_maximizer_attains_dual_norm() {
        let g = [0.5, -3.0, 2.0];
        for norm in [NormKind::L2, NormKind::L1, NormKind::Linf] {
            let w = dual_maximizer(&g, norm).unwrap();
            assert!(norm.eval(&w) <= 1.0 + 1e-15);
            let ip: f64 = g.iter().zip(&w).map(|(a, b)| a * b).sum();
            assert!((ip - dual_norm(&g, norm).unwrap()).abs() < 1e-12);
        }
    }

    #[test]
    fn full_bound_single_l2_term() {
        let inst = single_l2();
        let x = vec![vec![3.0, 4.0]];
        let full = lip_full_estimate(&inst, &x, DEFAULT_TIE_TOL).unwrap();
        assert!((full - 2f64.sqrt() * 5.0).abs() < 1e-12);
        assert_eq!(
            lip_radius_estimate(&inst, &x, DEFAULT_TIE_TOL).unwrap(),
            5.0
        );
    }

    #[test]
    fn full_bound_abs_block_against_grid() {
        // single piece with gradient -2 in u: slope 2, z = x = 1
        let inst = ProblemInstance::new(
            FeasibleSet {
                variables: vec![Variable::continuous(0.0, 2.0)],
                constraints: vec![],
            },
            vec![0.0],
            vec![MaxBlock {
                terms: vec![Term::BilinearAffinePiece {
                    slope: 2.0,
                    intercept: 0.0,
                    base: 0.0,
                    loadings: vec![Loading {
                        param: 0,
                        var: 0,
                        coef: 1.0,
                    }],
                }],
                nominal: vec![1.0],
                norm: NormKind::Abs,
                perturbable: true,
            }],
        )
        .unwrap();
        let g = -2.0f64;
        let grid = (0..=2000)
            .map(|i| -1.0 + i as f64 / 1000.0)
            .map(|w| (g * g + (g * w) * (g * w)).sqrt())
            .fold(f64::NEG_INFINITY, f64::max);
        let full = lip_full_estimate(&inst, &[vec![1.0]], DEFAULT_TIE_TOL).unwrap();
        assert!((full - grid).abs() < 1e-12);
        assert!((full - 8f64.sqrt()).abs() < 1e-12);
    }

    #[test]
    fn zero_gradients_give_zero_bounds() {
        let inst = single_l2();
        let x = vec![vec![0.0, 0.0]];
        assert_eq!(
            lip_radius_estimate(&inst, &x, DEFAULT_TIE_TOL).unwrap(),
            0.0
        );
        assert_eq!(lip_full_estimate(&inst, &x, DEFAULT_TIE_TOL).unwrap(), 0.0);
    }

    #[test]
    fn non_perturbable_blocks_are_skipped() {
        let mut inst = single_l2();
        inst.blocks[0].perturbable = false;
        assert_eq!(
            lip_radius_estimate(&inst, &[vec![3.0, 4.0]], DEFAULT_TIE_TOL).unwrap(),
            0.0
        );
    }

    #[test]
    fn empty_minimizer_list_is_an_error() {
        let inst = single_l2();
        assert!(matches!(
            lip_radius_estimate(&inst, &[], DEFAULT_TIE_TOL),
            Err(SensitivityError::NoMinimizers)
        ));
    }

    #[test]
    fn prediction_is_linear_in_radius() {
        assert_eq!(predict_robust_value(0.448, 0.123, 0.0), 0.448);
        assert!((predict_robust_value(0.448, 0.00389, 5.0) - 0.46745).abs() < 1e-12);
        assert!((predict_robust_value(0.282, 0.01386, 10.0) - 0.4206).abs() < 1e-12);
    }

    #[test]
    fn analyze_reports_the_worst_minimizer() {
        let inst = single_l2();
        let xs = vec![vec![1.0, 0.0], vec![3.0, 4.0], vec![0.0, 2.0]];
        let r = analyze(&inst, &xs, 0.0, DEFAULT_TIE_TOL).unwrap();
        assert_eq!(r.minimizer_index, 1);
        assert_eq!(r.lip_radius, 5.0);
        assert_eq!(r.block_gradient_norms, vec![5.0]);
        assert_eq!(r.lip_radius_display, "5.00000");
    }

    #[test]
    fn trivial_certificate_is_valid() {
        let inst = single_l2();
        let cert = SubgradientCertificate::assemble(
            &inst,
            vec![3.0, 4.0],
            vec![CertificateEntry {
                block: 0,
                term: 0,
                y: 1.0,
                w: vec![0.0, 0.0],
            }],
        );
        let check = check_subgradient_certificate(&cert, &inst, 1e-9);
        assert!(check.valid, "{:?}", check.violations);
        assert_eq!(cert.gamma, 0.0);
        assert_eq!(cert.g, vec![3.0, 4.0]);
    }

    #[test]
    fn simplex_violation_is_reported() {
        let inst = single_l2();
        let cert = SubgradientCertificate::assemble(
            &inst,
            vec![3.0, 4.0],
            vec![CertificateEntry {
                block: 0,
                term: 0,
                y: 0.9,
                w: vec![0.0, 0.0],
            }],
        );
        let check = check_subgradient_certificate(&cert, &inst, 1e-9);
        assert!(!check.valid);
        assert!(check.violations[0]
            .to_string()
            .contains("simplex violation"));
    }

    #[test]
    fn tampered_certificate_flags_every_problem() {
        let inst = single_l2();
        let mut cert = SubgradientCertificate::assemble(
            &inst,
            vec![3.0, 4.0],
            vec![CertificateEntry {
                block: 0,
                term: 0,
                y: 1.0,
                w: vec![1.0, 1.0],
            }],
        );
        cert.g[1] += 0.5;
        cert.gamma -= 1.0;
        let check = check_subgradient_certificate(&cert, &inst, 1e-9);
        let kinds: Vec<_> = check
            .violations
            .iter()
            .map(std::mem::discriminant)
            .collect();
        assert_eq!(kinds.len(), 3);
    }

    #[test]
    fn random_two_term_certificates_assemble_exactly() {
        let inst = penalty(-2.0);
        // gap 10: pieces 2 and 3 tie
        let x = vec![90.0];
        let mut rng = ChaCha8Rng::seed_from_u64(11);
        for _ in 0..200 {
            let y: f64 = rng.random_range(0.0..=1.0);
            let w1: f64 = rng.random_range(-1.0..=1.0);
            let w2: f64 = rng.random_range(-1.0..=1.0);
            let entries = vec![
                CertificateEntry {
                    block: 0,
                    term: 1,
                    y,
                    w: vec![w1],
                },
                CertificateEntry {
                    block: 0,
                    term: 2,
                    y: 1.0 - y,
                    w: vec![w2],
                },
            ];
            let cert = SubgradientCertificate::assemble(&inst, x.clone(), entries);
            // independent assembly: grad of piece i is -slope_i * x
            let g = y * (-4.0 * 90.0) + (1.0 - y) * (-40.0 * 90.0);
            let gamma = y * (-4.0 * 90.0) * w1 + (1.0 - y) * (-40.0 * 90.0) * w2;
            assert!((cert.g[0] - g).abs() <= 1e-12 * g.abs());
            assert!((cert.gamma - gamma).abs() <= 1e-12 * (1.0 + gamma.abs()));
            assert!(check_subgradient_certificate(&cert, &inst, 1e-9).valid);
        }
    }
}
