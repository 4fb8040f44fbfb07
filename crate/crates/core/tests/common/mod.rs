//! Generators and brute-force oracles shared by the integration tests.
//!
//! Nothing here calls the library's solvers. The oracles enumerate binary
//! assignments and vertices, or breakpoints in one dimension.

#![allow(dead_code)]

use rand::seq::index::sample;
use rand::Rng;
use rand_chacha::ChaCha8Rng;

use robustsense::instances::{build_search_instance, search_prior, SearchCase, SEARCH_SQUARES};
use robustsense::milp::{LinearProgram, MilpModel};
use robustsense::model::{
    evaluate_objective, FeasibleSet, LinearConstraint, Loading, MaxBlock, NormKind,
    ProblemInstance, Relation, Term, Variable,
};
use robustsense::search::{search_value, SearchInstance};

/// Gaussian elimination with partial pivoting; `None` when singular.
pub fn dense_solve(mut a: Vec<Vec<f64>>, mut b: Vec<f64>) -> Option<Vec<f64>> {
    let n = b.len();
    for col in 0..n {
        let p = (col..n).max_by(|&i, &j| a[i][col].abs().total_cmp(&a[j][col].abs()))?;
        if a[p][col].abs() < 1e-10 {
            return None;
        }
        a.swap(col, p);
        b.swap(col, p);
        for r in col + 1..n {
            let f = a[r][col] / a[col][col];
            if f != 0.0 {
                for c in col..n {
                    a[r][c] -= f * a[col][c];
                }
                b[r] -= f * b[col];
            }
        }
    }
    let mut x = vec![0.0; n];
    for r in (0..n).rev() {
        let s: f64 = (r + 1..n).map(|c| a[r][c] * x[c]).sum();
        x[r] = (b[r] - s) / a[r][r];
    }
    Some(x)
}

/// Calls `f` on every `k`-subset of `0..n` in lexicographic order.
pub fn for_each_subset(n: usize, k: usize, mut f: impl FnMut(&[usize])) {
    if k > n {
        return;
    }
    let mut idx: Vec<usize> = (0..k).collect();
    loop {
        f(&idx);
        let Some(i) = (0..k).rev().find(|&i| idx[i] != i + n - k) else {
            return;
        };
        idx[i] += 1;
        for j in i + 1..k {
            idx[j] = idx[j - 1] + 1;
        }
    }
}

pub struct DenseRow {
    pub coefs: Vec<f64>,
    pub relation: Relation,
    pub rhs: f64,
}

fn row_ok(r: &DenseRow, x: &[f64]) -> bool {
    let lhs: f64 = r.coefs.iter().zip(x).map(|(a, b)| a * b).sum();
    let tol = 1e-9 * (1.0 + r.rhs.abs());
    match r.relation {
        Relation::Le => lhs <= r.rhs + tol,
        Relation::Ge => lhs >= r.rhs - tol,
        Relation::Eq => (lhs - r.rhs).abs() <= tol,
    }
}

/// Minimum of `c·x` over a bounded polyhedron by enumerating every basic
/// point. All bounds must be finite. `None` when infeasible.
pub fn lp_vertex_oracle(c: &[f64], rows: &[DenseRow], lower: &[f64], upper: &[f64]) -> Option<f64> {
    let n = c.len();
    if n == 0 {
        return rows.iter().all(|r| row_ok(r, &[])).then_some(0.0);
    }
    let mut planes: Vec<(Vec<f64>, f64)> = rows.iter().map(|r| (r.coefs.clone(), r.rhs)).collect();
    for j in 0..n {
        let mut e = vec![0.0; n];
        e[j] = 1.0;
        planes.push((e.clone(), lower[j]));
        planes.push((e, upper[j]));
    }
    let mut best: Option<f64> = None;
    for_each_subset(planes.len(), n, |pick| {
        let a = pick.iter().map(|&i| planes[i].0.clone()).collect();
        let b = pick.iter().map(|&i| planes[i].1).collect();
        let Some(x) = dense_solve(a, b) else {
            return;
        };
        let in_box = (0..n).all(|j| {
            let tol = 1e-9 * (1.0 + lower[j].abs().max(upper[j].abs()));
            x[j] >= lower[j] - tol && x[j] <= upper[j] + tol
        });
        if in_box && rows.iter().all(|r| row_ok(r, &x)) {
            let v: f64 = c.iter().zip(&x).map(|(a, b)| a * b).sum();
            if best.is_none_or(|b| v < b) {
                best = Some(v);
            }
        }
    });
    best
}

/// Brute force over every binary assignment with a vertex-enumeration
/// inner LP. Binaries must come first in the column order.
pub fn milp_brute_force(model: &MilpModel) -> Option<f64> {
    let lp = &model.lp;
    let nb = model.binaries.len();
    assert!(model.binaries.iter().enumerate().all(|(i, &j)| i == j));
    let n = lp.n_vars();
    let mut best: Option<f64> = None;
    for mask in 0u32..(1 << nb) {
        let y: Vec<f64> = (0..nb).map(|j| f64::from((mask >> j) & 1)).collect();
        if (0..nb).any(|j| y[j] < lp.lower[j] || y[j] > lp.upper[j]) {
            continue;
        }
        let rows: Vec<DenseRow> = lp
            .rows
            .iter()
            .map(|r| DenseRow {
                coefs: r.coefs[nb..].to_vec(),
                relation: r.relation,
                rhs: r.rhs - (0..nb).map(|j| r.coefs[j] * y[j]).sum::<f64>(),
            })
            .collect();
        let fixed: f64 = (0..nb).map(|j| lp.objective[j] * y[j]).sum();
        if let Some(v) = lp_vertex_oracle(
            &lp.objective[nb..n],
            &rows,
            &lp.lower[nb..],
            &lp.upper[nb..],
        ) {
            let v = v + fixed;
            if best.is_none_or(|b| v < b) {
                best = Some(v);
            }
        }
    }
    best
}

fn grid(rng: &mut ChaCha8Rng, lo: i32, hi: i32) -> f64 {
    f64::from(rng.random_range(lo..=hi)) * 0.5
}

/// Random MILP with `nb` leading binaries and `nc` boxed continuous columns.
/// Every row holds at a hidden random point, so most instances are feasible.
pub fn random_milp(rng: &mut ChaCha8Rng, nb: usize, nc: usize, m: usize) -> MilpModel {
    let n = nb + nc;
    let mut lower = vec![0.0; n];
    let mut upper = vec![1.0; n];
    let mut hidden = vec![0.0; n];
    for j in 0..n {
        if j < nb {
            hidden[j] = f64::from(rng.random_range(0..=1));
        } else {
            lower[j] = grid(rng, -6, 2);
            upper[j] = lower[j] + grid(rng, 1, 10);
            hidden[j] = rng.random_range(lower[j]..=upper[j]);
        }
    }
    let objective = (0..n).map(|_| grid(rng, -8, 8)).collect();
    let mut lp = LinearProgram::new(objective, lower, upper);
    for _ in 0..m {
        let coefs: Vec<f64> = (0..n)
            .map(|_| {
                if rng.random_bool(0.3) {
                    0.0
                } else {
                    grid(rng, -6, 6)
                }
            })
            .collect();
        let at: f64 = coefs.iter().zip(&hidden).map(|(a, b)| a * b).sum();
        let (relation, rhs) = match rng.random_range(0..10) {
            0 => (Relation::Eq, at),
            1..=5 => (Relation::Le, at + grid(rng, 0, 6)),
            _ => (Relation::Ge, at - grid(rng, 0, 6)),
        };
        lp.add_row(coefs, relation, rhs);
    }
    MilpModel {
        lp,
        binaries: (0..nb).collect(),
    }
}

/// Shape of a random sum-of-max instance: `nb` binaries followed by a
/// single continuous variable in `[0, cont_upper]`.
#[derive(Debug, Clone)]
pub struct AffineShape {
    pub nb: usize,
    pub blocks: usize,
    pub max_dim: usize,
    pub max_pieces: usize,
    pub rows: usize,
    pub norms: Vec<NormKind>,
    pub cont_upper: f64,
}

impl Default for AffineShape {
    fn default() -> Self {
        AffineShape {
            nb: 4,
            blocks: 2,
            max_dim: 3,
            max_pieces: 4,
            rows: 2,
            norms: vec![NormKind::Abs, NormKind::L2, NormKind::L1, NormKind::Linf],
            cont_upper: 5.0,
        }
    }
}

/// Random instance whose terms are all affine pieces.
pub fn random_affine_instance(rng: &mut ChaCha8Rng, shape: &AffineShape) -> ProblemInstance {
    let nb = shape.nb;
    let n = nb + 1;
    let mut variables: Vec<Variable> = (0..nb).map(|_| Variable::binary()).collect();
    variables.push(Variable::continuous(0.0, shape.cont_upper));
    let mut hidden: Vec<f64> = (0..nb)
        .map(|_| f64::from(rng.random_range(0..=1)))
        .collect();
    hidden.push(rng.random_range(0.0..=shape.cont_upper));

    let mut constraints = Vec::new();
    for _ in 0..shape.rows {
        let coefficients: Vec<f64> = (0..n)
            .map(|_| {
                if rng.random_bool(0.4) {
                    0.0
                } else {
                    grid(rng, -4, 4)
                }
            })
            .collect();
        let at: f64 = coefficients.iter().zip(&hidden).map(|(a, b)| a * b).sum();
        let (relation, rhs) = if rng.random_bool(0.5) {
            (Relation::Le, at + grid(rng, 0, 4))
        } else {
            (Relation::Ge, at - grid(rng, 0, 4))
        };
        constraints.push(LinearConstraint {
            coefficients,
            relation,
            rhs,
        });
    }

    let mut blocks = Vec::new();
    for _ in 0..shape.blocks {
        let norm = shape.norms[rng.random_range(0..shape.norms.len())];
        let dim = if norm == NormKind::Abs {
            1
        } else {
            rng.random_range(1..=shape.max_dim)
        };
        let pieces = rng.random_range(2..=shape.max_pieces);
        let terms = (0..pieces)
            .map(|_| {
                let loadings = (0..dim)
                    .flat_map(|p| {
                        let k = rng.random_range(1..=2);
                        (0..k)
                            .map(|_| Loading {
                                param: p,
                                var: rng.random_range(0..n),
                                coef: grid(rng, -4, 4),
                            })
                            .collect::<Vec<_>>()
                    })
                    .collect();
                Term::BilinearAffinePiece {
                    slope: grid(rng, -6, 6),
                    intercept: grid(rng, -10, 10),
                    base: grid(rng, -4, 4),
                    loadings,
                }
            })
            .collect();
        let nominal = (0..dim).map(|_| rng.random_range(0.5..2.0)).collect();
        blocks.push(MaxBlock {
            terms,
            nominal,
            norm,
            perturbable: true,
        });
    }
    let f0 = (0..n).map(|_| grid(rng, -4, 4)).collect();
    ProblemInstance::new(
        FeasibleSet {
            variables,
            constraints,
        },
        f0,
        blocks,
    )
    .expect("generator builds valid instances")
}

/// Calls `f(x, lo, hi)` for every binary assignment of an instance whose
/// last variable is the only continuous one. `x` holds the binaries and a
/// placeholder; `[lo, hi]` is the feasible interval of the continuous one.
fn for_each_assignment(inst: &ProblemInstance, mut f: impl FnMut(&mut Vec<f64>, f64, f64)) {
    let n = inst.n_vars();
    let nb = n - 1;
    assert!(inst.feasible.variables[..nb].iter().all(|v| v.binary));
    assert!(!inst.feasible.variables[nb].binary);
    let cont = &inst.feasible.variables[nb];
    for mask in 0u32..(1 << nb) {
        let mut x: Vec<f64> = (0..nb).map(|j| f64::from((mask >> j) & 1)).collect();
        x.push(0.0);
        let (mut lo, mut hi) = (cont.lower, cont.upper);
        let mut ok = true;
        for r in &inst.feasible.constraints {
            let a = r.coefficients[nb];
            let rest = r.rhs - (0..nb).map(|j| r.coefficients[j] * x[j]).sum::<f64>();
            let tol = 1e-9 * (1.0 + r.rhs.abs());
            if a == 0.0 {
                ok &= match r.relation {
                    Relation::Le => rest >= -tol,
                    Relation::Ge => rest <= tol,
                    Relation::Eq => rest.abs() <= tol,
                };
                continue;
            }
            let bound = rest / a;
            match (r.relation, a > 0.0) {
                (Relation::Le, true) | (Relation::Ge, false) => hi = hi.min(bound),
                (Relation::Le, false) | (Relation::Ge, true) => lo = lo.max(bound),
                (Relation::Eq, _) => {
                    lo = lo.max(bound);
                    hi = hi.min(bound);
                }
            }
        }
        if ok && lo <= hi + 1e-9 {
            let hi = hi.max(lo);
            f(&mut x, lo, hi);
        }
    }
}

/// Exact optimum of a sum-of-max instance with one trailing continuous
/// variable: enumerate the binaries, then evaluate the objective at the
/// ends of the feasible interval and at every pairwise crossing of pieces
/// within a block.
pub fn summax_brute_force(inst: &ProblemInstance, u: &[Vec<f64>]) -> Option<(f64, Vec<f64>)> {
    let nb = inst.n_vars() - 1;
    let mut best: Option<(f64, Vec<f64>)> = None;
    for_each_assignment(inst, |x, lo, hi| {
        let mut candidates = vec![lo, hi];
        for (b, uk) in inst.blocks.iter().zip(u) {
            let lines: Vec<(f64, f64)> = b
                .terms
                .iter()
                .map(|t| {
                    x[nb] = 0.0;
                    let v0 = t.value(uk, x);
                    x[nb] = 1.0;
                    (v0, t.value(uk, x) - v0)
                })
                .collect();
            for i in 0..lines.len() {
                for j in i + 1..lines.len() {
                    let (a1, b1) = lines[i];
                    let (a2, b2) = lines[j];
                    if b1 != b2 {
                        let c = (a2 - a1) / (b1 - b2);
                        if c > lo && c < hi {
                            candidates.push(c);
                        }
                    }
                }
            }
        }
        for c in candidates {
            x[nb] = c;
            let v = evaluate_objective(inst, u, x).expect("dimensions match");
            if best.as_ref().is_none_or(|(b, _)| v < *b) {
                best = Some((v, x.clone()));
            }
        }
    });
    best
}

/// Worst case over the ball of radius `delta` at `x`, piece by piece:
/// the value at the center plus `delta` times the dual norm of the gradient.
pub fn affine_worst_case(inst: &ProblemInstance, x: &[f64], delta: f64) -> f64 {
    let mut v = inst.linear_cost(x);
    for b in &inst.blocks {
        let d = if b.perturbable { delta.abs() } else { 0.0 };
        v += b
            .terms
            .iter()
            .map(|t| {
                let g = t.grad_u(&b.nominal, x);
                t.value(&b.nominal, x) + d * dual_norm_oracle(&g, b.norm)
            })
            .fold(f64::NEG_INFINITY, f64::max);
    }
    v
}

/// `q(δ)` for an affine instance with one trailing continuous variable.
///
/// For fixed binaries the worst-case objective is convex in the continuous
/// variable, so golden-section search on each feasible interval finds the
/// minimum to machine precision.
pub fn robust_convex_oracle(inst: &ProblemInstance, delta: f64) -> Option<f64> {
    let nb = inst.n_vars() - 1;
    let invphi = (5f64.sqrt() - 1.0) / 2.0;
    let mut best: Option<f64> = None;
    for_each_assignment(inst, |x, lo, hi| {
        let mut phi = |c: f64| {
            x[nb] = c;
            affine_worst_case(inst, x, delta)
        };
        let (mut a, mut b) = (lo, hi);
        let mut c = b - invphi * (b - a);
        let mut d = a + invphi * (b - a);
        let (mut fc, mut fd) = (phi(c), phi(d));
        for _ in 0..200 {
            if fc <= fd {
                b = d;
                d = c;
                fd = fc;
                c = b - invphi * (b - a);
                fc = phi(c);
            } else {
                a = c;
                c = d;
                fc = fd;
                d = a + invphi * (b - a);
                fd = phi(d);
            }
        }
        let v = [phi(lo), phi(hi), fc, fd]
            .into_iter()
            .fold(f64::INFINITY, f64::min);
        if best.is_none_or(|bv| v < bv) {
            best = Some(v);
        }
    });
    best
}

/// Dual norms written out from their definitions.
pub fn dual_norm_oracle(g: &[f64], norm: NormKind) -> f64 {
    match norm {
        NormKind::Abs => g[0].abs(),
        NormKind::L2 => g.iter().map(|v| v * v).sum::<f64>().sqrt(),
        NormKind::L1 => g.iter().fold(0.0, |m, v| m.max(v.abs())),
        NormKind::Linf => g.iter().map(|v| v.abs()).sum(),
    }
}

/// A handful of the twenty squares with jittered sweep widths, a random
/// budget and a random selection of at most four squares.
pub fn search_sub_instance(rng: &mut ChaCha8Rng) -> (SearchInstance, Vec<f64>, Vec<usize>) {
    let s = rng.random_range(2..=6);
    let picks = sample(rng, SEARCH_SQUARES, s).into_vec();
    let base = build_search_instance(SearchCase::A, s, 0.0);
    let inst = SearchInstance {
        weights: picks.iter().map(|&k| search_prior(k)).collect(),
        sweep: picks.iter().map(|_| rng.random_range(10.0..30.0)).collect(),
        budget: rng.random_range(0.5..25.0),
        max_squares: s,
        perturbable: vec![true; s],
        ..base
    };
    let m = rng.random_range(1..=s.min(4));
    let mut selected = sample(rng, s, m).into_vec();
    selected.sort_unstable();
    let u = inst.sweep.clone();
    (inst, u, selected)
}

/// Best miss probability over allocations of the budget on a uniform grid.
pub fn search_grid_oracle(inst: &SearchInstance, u: &[f64], selected: &[usize]) -> f64 {
    let steps = match selected.len() {
        1 => 1,
        2 => 4000,
        3 => 300,
        _ => 80,
    };
    let mut best = f64::INFINITY;
    let mut counts = vec![0usize; selected.len()];
    fn walk(pos: usize, left: usize, counts: &mut Vec<usize>, f: &mut dyn FnMut(&[usize])) {
        if pos + 1 == counts.len() {
            counts[pos] = left;
            f(counts);
            return;
        }
        for c in 0..=left {
            counts[pos] = c;
            walk(pos + 1, left - c, counts, f);
        }
    }
    let mut eval = |c: &[usize]| {
        let mut z = vec![0.0; inst.weights.len()];
        for (&k, &n) in selected.iter().zip(c) {
            z[k] = inst.budget * n as f64 / steps as f64;
        }
        best = best.min(search_value(inst, u, &z));
    };
    walk(0, steps, &mut counts, &mut eval);
    best
}

/// Largest gap between the analytic parameter gradient and a central
/// difference, relative to the gradient's largest entry.
pub fn gradient_error(t: &Term, u: &[f64], x: &[f64]) -> f64 {
    let g = t.grad_u(u, x);
    let scale = g
        .iter()
        .fold(0.0f64, |m, v| m.max(v.abs()))
        .max(f64::MIN_POSITIVE);
    let mut worst = 0.0f64;
    for j in 0..u.len() {
        let h = 1e-5 * (1.0 + u[j].abs());
        let mut up = u.to_vec();
        let mut dn = u.to_vec();
        up[j] += h;
        dn[j] -= h;
        let fd = (t.value(&up, x) - t.value(&dn, x)) / (2.0 * h);
        worst = worst.max((fd - g[j]).abs() / scale);
    }
    worst
}

/// A random term of either kind with a point to differentiate at.
pub fn random_term_point(rng: &mut ChaCha8Rng, affine: bool) -> (Term, Vec<f64>, Vec<f64>) {
    if affine {
        let dim = rng.random_range(1..=4);
        let nvars = 5;
        let loadings = (0..dim)
            .map(|p| Loading {
                param: p,
                var: rng.random_range(0..nvars),
                coef: rng.random_range(-3.0..3.0),
            })
            .collect();
        let t = Term::BilinearAffinePiece {
            slope: rng.random_range(-5.0..5.0),
            intercept: rng.random_range(-5.0..5.0),
            base: rng.random_range(-5.0..5.0),
            loadings,
        };
        let x = (0..nvars).map(|_| rng.random_range(-3.0..3.0)).collect();
        let u = (0..dim).map(|_| rng.random_range(-3.0..3.0)).collect();
        (t, u, x)
    } else {
        let t = Term::NegExpDetection {
            weight: rng.random_range(0.01..1.0),
            rate: rng.random_range(0.01..0.1),
            var: 0,
        };
        (
            t,
            vec![rng.random_range(5.0..30.0)],
            vec![rng.random_range(0.1..20.0)],
        )
    }
}
