//! Nominal solve, sensitivity estimate, prediction and robust solve for a
//! list of radii, plus table rendering.

use std::fmt::Write as _;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::instances::{build_search_instance, SearchCase};
use crate::milp::{MilpOptions, SolveReport, SolveStatus};
use crate::model::ProblemInstance;
use crate::robust::{
    error_pct, solve_nominal_at, solve_robust_exact, solve_robust_sampled, RobustError,
    RobustReport, Solver, UncertaintySpec, DEFAULT_SAMPLES, DEFAULT_SEED,
};
use crate::sensitivity::{analyze, predict_robust_value, SensitivityReport, DEFAULT_TIE_TOL};

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("nothing to render")]
    EmptyRows,
    #[error("nominal problem is infeasible")]
    Infeasible,
    #[error(transparent)]
    Robust(#[from] RobustError),
    #[error(transparent)]
    Sensitivity(#[from] crate::sensitivity::SensitivityError),
    #[error(transparent)]
    Search(#[from] crate::search::SearchError),
    #[error("csv: {0}")]
    Csv(#[from] csv::Error),
    #[error("json: {0}")]
    Json(#[from] serde_json::Error),
}

/// One line of a comparison table. Numeric fields are `None` when the
/// step that produces them failed; `status` then carries the reason.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineRow {
    pub case: String,
    pub delta: f64,
    pub kappa: Option<usize>,
    pub q0: Option<f64>,
    pub lip: Option<f64>,
    pub q_tilde: Option<f64>,
    /// Robust value, or the lower end of a bracket.
    pub q_lower: Option<f64>,
    pub q_upper: Option<f64>,
    pub error_pct: Option<f64>,
    pub status: String,
}

impl PipelineRow {
    pub fn is_bracket(&self) -> bool {
        matches!((self.q_lower, self.q_upper), (Some(l), Some(u)) if l != u)
    }
}

/// Relative prediction error. Against a bracket it is the larger of the
/// errors relative to the two ends.
pub fn row_error(q_tilde: f64, lower: f64, upper: f64) -> Result<f64, RobustError> {
    let a = error_pct(q_tilde, lower)?;
    if lower == upper {
        return Ok(a);
    }
    Ok(a.max(error_pct(q_tilde, upper)?))
}

#[derive(Debug, Clone, Copy, PartialEq, Default, Serialize, Deserialize)]
pub enum RobustChoice {
    #[default]
    Exact,
    Sampled {
        samples: usize,
        seed: u64,
    },
}

impl RobustChoice {
    pub fn sampled_default() -> Self {
        RobustChoice::Sampled {
            samples: DEFAULT_SAMPLES,
            seed: DEFAULT_SEED,
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct PipelineOptions {
    pub robust: RobustChoice,
    pub tie_tol: f64,
    pub milp: MilpOptions,
}

impl Default for PipelineOptions {
    fn default() -> Self {
        PipelineOptions {
            robust: RobustChoice::Exact,
            tie_tol: DEFAULT_TIE_TOL,
            milp: MilpOptions::default(),
        }
    }
}

/// An instance with its display labels and the solver to use.
#[derive(Debug, Clone)]
pub struct PipelineCase {
    pub label: String,
    pub kappa: Option<usize>,
    pub instance: ProblemInstance,
    pub solver: Solver,
    /// Extra minimizers for the sensitivity bound, besides the incumbent.
    pub extra_minimizers: Vec<Vec<f64>>,
}

impl PipelineCase {
    pub fn search(case: SearchCase, kappa: usize) -> Result<Self, PipelineError> {
        let search = build_search_instance(case, kappa, 0.0);
        Ok(PipelineCase {
            label: case.to_string(),
            kappa: Some(kappa),
            instance: search.to_problem()?,
            solver: Solver::Search(search),
            extra_minimizers: Vec::new(),
        })
    }

    pub fn general(label: impl Into<String>, instance: ProblemInstance, milp: MilpOptions) -> Self {
        PipelineCase {
            label: label.into(),
            kappa: None,
            instance,
            solver: Solver::Milp(milp),
            extra_minimizers: Vec::new(),
        }
    }
}

/// Nominal solve followed by the sensitivity summary at its incumbent.
pub fn nominal_and_sensitivity(
    case: &PipelineCase,
    tie_tol: f64,
) -> Result<(SolveReport, SensitivityReport), PipelineError> {
    let inst = &case.instance;
    let nominal = solve_nominal_at(inst, &inst.nominal(), &case.solver)?;
    if nominal.status == SolveStatus::Infeasible {
        return Err(PipelineError::Infeasible);
    }
    let mut minimizers = vec![nominal.x.clone()];
    minimizers.extend(case.extra_minimizers.iter().cloned());
    let sens = analyze(inst, &minimizers, nominal.value, tie_tol)?;
    Ok((nominal, sens))
}

pub fn robust_solve(
    case: &PipelineCase,
    delta: f64,
    opts: &PipelineOptions,
) -> Result<RobustReport, RobustError> {
    let spec = UncertaintySpec::nominal(delta);
    match opts.robust {
        RobustChoice::Exact => solve_robust_exact(&case.instance, &spec, &case.solver),
        RobustChoice::Sampled { samples, seed } => {
            solve_robust_sampled(&case.instance, &spec, samples, seed, opts.milp)
        }
    }
}

/// Runs every radius in `deltas`, in order. A failing robust solve only
/// affects its own row.
pub fn run_pipeline(
    case: &PipelineCase,
    deltas: &[f64],
    opts: &PipelineOptions,
) -> Vec<PipelineRow> {
    let blank = |delta: f64, status: String| PipelineRow {
        case: case.label.clone(),
        delta,
        kappa: case.kappa,
        q0: None,
        lip: None,
        q_tilde: None,
        q_lower: None,
        q_upper: None,
        error_pct: None,
        status,
    };
    let (nominal, sens) = match nominal_and_sensitivity(case, opts.tie_tol) {
        Ok(v) => v,
        Err(e) => return deltas.iter().map(|&d| blank(d, e.to_string())).collect(),
    };
    deltas
        .iter()
        .map(|&delta| {
            let q_tilde = predict_robust_value(nominal.value, sens.lip_radius, delta);
            let mut row = PipelineRow {
                q0: Some(nominal.value),
                lip: Some(sens.lip_radius),
                q_tilde: Some(q_tilde),
                ..blank(delta, "ok".into())
            };
            let robust = robust_solve(case, delta, opts).and_then(|r| {
                let (lo, hi) = match r.q_delta() {
                    Some(q) => (q, q),
                    None => (r.lower, r.upper),
                };
                Ok((lo, hi, row_error(q_tilde, lo, hi)?))
            });
            match robust {
                Ok((lo, hi, err)) => {
                    row.q_lower = Some(lo);
                    row.q_upper = Some(hi);
                    row.error_pct = Some(err);
                }
                Err(e) => row.status = e.to_string(),
            }
            row
        })
        .collect()
}

/// The twelve search configurations, ordered by case, then radius, then cap.
pub fn table1_configs() -> Vec<(SearchCase, f64, usize)> {
    let mut out = Vec::with_capacity(12);
    for case in SearchCase::ALL {
        for delta in [5.0, 10.0] {
            for kappa in [8, 16] {
                out.push((case, delta, kappa));
            }
        }
    }
    out
}

pub fn table1_rows(opts: &PipelineOptions) -> Result<Vec<PipelineRow>, PipelineError> {
    let mut rows = Vec::with_capacity(12);
    for (case, delta, kappa) in table1_configs() {
        let pc = PipelineCase::search(case, kappa)?;
        rows.extend(run_pipeline(&pc, &[delta], opts));
    }
    Ok(rows)
}

/// A printed row of the published comparison: values at 3 decimals, the
/// modulus at 5, the error at 1.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ReferenceRow {
    pub case: SearchCase,
    pub delta: f64,
    pub kappa: usize,
    pub q0: f64,
    pub lip: f64,
    pub q_tilde: f64,
    pub q_delta: f64,
    pub error_pct: f64,
}

const fn reference(case: SearchCase, delta: f64, kappa: usize, v: [f64; 5]) -> ReferenceRow {
    ReferenceRow {
        case,
        delta,
        kappa,
        q0: v[0],
        lip: v[1],
        q_tilde: v[2],
        q_delta: v[3],
        error_pct: v[4],
    }
}

pub const REFERENCE_ROWS: [ReferenceRow; 12] = {
    use SearchCase::*;
    [
        reference(A, 5.0, 8, [0.448, 0.00389, 0.467, 0.476, 1.8]),
        reference(A, 5.0, 16, [0.282, 0.01386, 0.351, 0.364, 3.5]),
        reference(A, 10.0, 8, [0.448, 0.00389, 0.486, 0.532, 8.5]),
        reference(A, 10.0, 16, [0.282, 0.01386, 0.421, 0.479, 12.2]),
        reference(B, 5.0, 8, [0.448, 0.00052, 0.450, 0.451, 0.1]),
        reference(B, 5.0, 16, [0.282, 0.00590, 0.312, 0.317, 1.6]),
        reference(B, 10.0, 8, [0.448, 0.00052, 0.453, 0.457, 0.9]),
        reference(B, 10.0, 16, [0.282, 0.00590, 0.341, 0.365, 6.5]),
        reference(C, 5.0, 8, [0.448, 0.00336, 0.464, 0.467, 0.5]),
        reference(C, 5.0, 16, [0.282, 0.00688, 0.317, 0.324, 2.3]),
        reference(C, 10.0, 8, [0.448, 0.00336, 0.481, 0.501, 3.8]),
        reference(C, 10.0, 16, [0.282, 0.00688, 0.351, 0.388, 9.4]),
    ]
};

/// Tolerances for comparing computed rows with [`REFERENCE_ROWS`].
pub const VALUE_TOL: f64 = 0.002;
pub const LIP_TOL: f64 = 0.00002;
pub const ERROR_TOL: f64 = 0.2;

/// Column-by-column mismatches between a computed row and a reference row.
pub fn compare_with_reference(row: &PipelineRow, reference: &ReferenceRow) -> Vec<String> {
    let mut out = Vec::new();
    let mut check = |name: &str, got: Option<f64>, want: f64, tol: f64| match got {
        Some(g) if (g - want).abs() <= tol + 1e-12 => {}
        Some(g) => out.push(format!("{name}: got {g:.6}, expected {want} ± {tol}")),
        None => out.push(format!("{name}: missing ({})", row.status)),
    };
    check("q0", row.q0, reference.q0, VALUE_TOL);
    check("lip", row.lip, reference.lip, LIP_TOL);
    check("q_tilde", row.q_tilde, reference.q_tilde, VALUE_TOL);
    check("q_delta", row.q_upper, reference.q_delta, VALUE_TOL);
    check("error_pct", row.error_pct, reference.error_pct, ERROR_TOL);
    out
}

pub fn median(values: &[f64]) -> Option<f64> {
    if values.is_empty() {
        return None;
    }
    let mut v = values.to_vec();
    v.sort_by(f64::total_cmp);
    let n = v.len();
    Some(if n % 2 == 1 {
        v[n / 2]
    } else {
        0.5 * (v[n / 2 - 1] + v[n / 2])
    })
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Format {
    Csv,
    Markdown,
    Json,
}

impl FromStr for Format {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "csv" => Ok(Format::Csv),
            "markdown" | "md" => Ok(Format::Markdown),
            "json" => Ok(Format::Json),
            other => Err(format!(
                "unknown format '{other}' (expected csv, markdown or json)"
            )),
        }
    }
}

fn fixed(v: Option<f64>, places: usize) -> String {
    v.map_or_else(|| "-".to_string(), |v| format!("{v:.places$}"))
}

fn markdown(rows: &[PipelineRow]) -> String {
    let mut out = String::from("case | δ | κ | q(0) | lip | q̃(δ) | q(δ) | % error\n");
    out.push_str("---|---|---|---|---|---|---|---\n");
    for r in rows {
        let q = if r.is_bracket() {
            format!("[{} {}]", fixed(r.q_lower, 3), fixed(r.q_upper, 3))
        } else {
            fixed(r.q_upper, 3)
        };
        let kappa = r.kappa.map_or_else(|| "-".to_string(), |k| k.to_string());
        let _ = write!(
            out,
            "{} | {} | {} | {} | {} | {} | {} | {}",
            r.case,
            r.delta,
            kappa,
            fixed(r.q0, 3),
            fixed(r.lip, 5),
            fixed(r.q_tilde, 3),
            q,
            fixed(r.error_pct, 1)
        );
        if r.status != "ok" {
            let _ = write!(out, " ({})", r.status);
        }
        out.push('\n');
    }
    out
}

pub fn render(rows: &[PipelineRow], format: Format) -> Result<String, PipelineError> {
    if rows.is_empty() {
        return Err(PipelineError::EmptyRows);
    }
    Ok(match format {
        Format::Markdown => markdown(rows),
        Format::Json => serde_json::to_string_pretty(rows)? + "\n",
        Format::Csv => {
            let mut w = csv::Writer::from_writer(Vec::new());
            for r in rows {
                w.serialize(r)?;
            }
            let bytes = w
                .into_inner()
                .map_err(|e| PipelineError::Csv(e.into_error().into()))?;
            String::from_utf8(bytes).expect("csv output is utf-8")
        }
    })
}

pub fn parse_csv(text: &str) -> Result<Vec<PipelineRow>, PipelineError> {
    let mut r = csv::Reader::from_reader(text.as_bytes());
    r.deserialize()
        .map(|row| row.map_err(PipelineError::from))
        .collect()
}

pub fn parse_json(text: &str) -> Result<Vec<PipelineRow>, PipelineError> {
    Ok(serde_json::from_str(text)?)
}
