use std::fs;
use std::path::PathBuf;
use std::process::ExitCode;
use std::time::Duration;

use anyhow::{anyhow, Context};
use clap::{Args, Parser, Subcommand, ValueEnum};
use serde::Serialize;

use robustsense::instances::{build_tech_instance, BoundsVariant, SearchCase, TechInvestConfig};
use robustsense::milp::{MilpOptions, SolveReport};
use robustsense::model::ProblemInstance;
use robustsense::pipeline::{
    compare_with_reference, median, nominal_and_sensitivity, render, run_pipeline, table1_rows,
    Format, PipelineCase, PipelineOptions, RobustChoice, ERROR_TOL, REFERENCE_ROWS,
};
use robustsense::robust::{Solver, DEFAULT_SAMPLES, DEFAULT_SEED};
use robustsense::search::SearchInstance;
use robustsense::sensitivity::{predict_robust_value, SensitivityReport, DEFAULT_TIE_TOL};

#[derive(Parser)]
#[command(
    name = "robustsense",
    version,
    about = "Sensitivity estimates and robust values for sum-of-max problems"
)]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve the nominal problem.
    Solve(Common),
    /// Nominal solve plus the sensitivity estimate and predictions.
    Sense(Common),
    /// Full pipeline: prediction versus robust value for each radius.
    Robust(Common),
    /// Regenerate the twelve-row search comparison.
    Table1 {
        #[command(flatten)]
        common: Common,
        /// Compare against the published rows; exit 4 on any mismatch.
        #[arg(long, env = "ROBUSTSENSE_CHECK")]
        check: bool,
    },
}

#[derive(Clone, Copy, ValueEnum)]
enum RobustModeArg {
    Exact,
    Sampled,
}

#[derive(Clone, Copy, ValueEnum)]
enum FormatArg {
    Csv,
    Markdown,
    Json,
}

impl From<FormatArg> for Format {
    fn from(f: FormatArg) -> Self {
        match f {
            FormatArg::Csv => Format::Csv,
            FormatArg::Markdown => Format::Markdown,
            FormatArg::Json => Format::Json,
        }
    }
}

#[derive(Args, Clone)]
struct Common {
    /// Instance JSON file, `builtin:search` or `builtin:tech`.
    #[arg(long, env = "ROBUSTSENSE_INSTANCE", default_value = "builtin:search")]
    instance: String,
    /// Perturbation case of the search model (A, B or C).
    #[arg(long = "case", env = "ROBUSTSENSE_CASE", default_value = "A")]
    case: String,
    /// Maximum number of searched squares.
    #[arg(long, env = "ROBUSTSENSE_KAPPA", default_value_t = 8)]
    kappa: usize,
    /// Uncertainty radius; repeat for several.
    #[arg(
        long = "delta",
        env = "ROBUSTSENSE_DELTA",
        value_delimiter = ',',
        allow_negative_numbers = true
    )]
    delta: Vec<f64>,
    #[arg(
        long,
        env = "ROBUSTSENSE_ROBUST_MODE",
        value_enum,
        default_value = "exact"
    )]
    robust_mode: RobustModeArg,
    #[arg(long, env = "ROBUSTSENSE_SAMPLES", default_value_t = DEFAULT_SAMPLES)]
    samples: usize,
    #[arg(long, env = "ROBUSTSENSE_SEED", default_value_t = DEFAULT_SEED)]
    seed: u64,
    #[arg(
        long,
        env = "ROBUSTSENSE_FORMAT",
        value_enum,
        default_value = "markdown"
    )]
    format: FormatArg,
    /// Write output here instead of stdout.
    #[arg(long, env = "ROBUSTSENSE_OUT")]
    out: Option<PathBuf>,
    /// Relative tie tolerance for active pieces.
    #[arg(long, env = "ROBUSTSENSE_TIE_TOL", default_value_t = DEFAULT_TIE_TOL)]
    tie_tol: f64,
    /// Relative optimality gap for branch-and-bound.
    #[arg(long, env = "ROBUSTSENSE_GAP_TOL", default_value_t = 1e-9)]
    gap_tol: f64,
    /// Branch-and-bound time limit in seconds.
    #[arg(long, env = "ROBUSTSENSE_TIME_LIMIT", default_value_t = 600.0)]
    time_limit: f64,
    /// Technologies in the generated investment model.
    #[arg(long, env = "ROBUSTSENSE_TECH_TECHNOLOGIES", default_value_t = 10)]
    tech_technologies: usize,
    /// Scenarios in the generated investment model.
    #[arg(long, env = "ROBUSTSENSE_TECH_SCENARIOS", default_value_t = 20)]
    tech_scenarios: usize,
    /// Slope of the first penalty piece.
    #[arg(long, env = "ROBUSTSENSE_TECH_ALPHA1", default_value_t = -2.0, allow_negative_numbers = true)]
    tech_alpha1: f64,
    /// Investment bounds variant: base, low-upper or high-lower.
    #[arg(long, env = "ROBUSTSENSE_TECH_BOUNDS", default_value = "base")]
    tech_bounds: String,
    /// Seed for the generated coefficients.
    #[arg(long, env = "ROBUSTSENSE_TECH_SEED", default_value_t = DEFAULT_SEED)]
    tech_seed: u64,
}

enum Failure {
    Config(anyhow::Error),
    Solver(anyhow::Error),
    Mismatch(String),
}

impl Failure {
    fn code(&self) -> u8 {
        match self {
            Failure::Config(_) => 2,
            Failure::Solver(_) => 3,
            Failure::Mismatch(_) => 4,
        }
    }
}

fn config<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Config(e.into())
}

fn solver<E: Into<anyhow::Error>>(e: E) -> Failure {
    Failure::Solver(e.into())
}

impl Common {
    fn milp(&self) -> Result<MilpOptions, Failure> {
        if self.time_limit.is_nan() || self.time_limit <= 0.0 {
            return Err(config(anyhow!("time limit must be positive")));
        }
        Ok(MilpOptions {
            gap_tol: self.gap_tol,
            time_limit: Duration::from_secs_f64(self.time_limit),
        })
    }

    fn options(&self) -> Result<PipelineOptions, Failure> {
        if self.samples == 0 {
            return Err(config(anyhow!("--samples must be at least 1")));
        }
        Ok(PipelineOptions {
            robust: match self.robust_mode {
                RobustModeArg::Exact => RobustChoice::Exact,
                RobustModeArg::Sampled => RobustChoice::Sampled {
                    samples: self.samples,
                    seed: self.seed,
                },
            },
            tie_tol: self.tie_tol,
            milp: self.milp()?,
        })
    }

    fn search_case(&self) -> Result<SearchCase, Failure> {
        self.case.parse().map_err(|e: String| config(anyhow!(e)))
    }

    fn load(&self) -> Result<PipelineCase, Failure> {
        let milp = self.milp()?;
        match self.instance.as_str() {
            "builtin:search" => {
                let case = self.search_case()?;
                if self.kappa == 0 || self.kappa > 20 {
                    return Err(config(anyhow!("--kappa must be between 1 and 20")));
                }
                PipelineCase::search(case, self.kappa).map_err(config)
            }
            "builtin:tech" => {
                let bounds: BoundsVariant = self
                    .tech_bounds
                    .parse()
                    .map_err(|e: String| config(anyhow!(e)))?;
                let cfg = TechInvestConfig {
                    technologies: self.tech_technologies,
                    scenarios: self.tech_scenarios,
                    alpha1: self.tech_alpha1,
                    bounds,
                    seed: self.tech_seed,
                    ..TechInvestConfig::default()
                };
                let inst = build_tech_instance(&cfg).map_err(|e| config(anyhow!(e)))?;
                Ok(PipelineCase::general("tech", inst, milp))
            }
            path => {
                let text = fs::read_to_string(path)
                    .with_context(|| format!("reading instance {path}"))
                    .map_err(config)?;
                let value: serde_json::Value = serde_json::from_str(&text)
                    .with_context(|| format!("parsing {path}"))
                    .map_err(config)?;
                let label = PathBuf::from(path)
                    .file_stem()
                    .map_or_else(|| "instance".into(), |s| s.to_string_lossy().into_owned());
                if value.get("weights").is_some() {
                    let search: SearchInstance = serde_json::from_value(value).map_err(config)?;
                    let instance = search.to_problem().map_err(config)?;
                    Ok(PipelineCase {
                        label,
                        kappa: Some(search.max_squares),
                        instance,
                        solver: Solver::Search(search),
                        extra_minimizers: Vec::new(),
                    })
                } else {
                    let inst = ProblemInstance::from_json(&text).map_err(config)?;
                    Ok(PipelineCase::general(label, inst, milp))
                }
            }
        }
    }

    fn deltas(&self, case: &PipelineCase) -> Vec<f64> {
        if !self.delta.is_empty() {
            self.delta.clone()
        } else if matches!(case.solver, Solver::Search(_)) {
            vec![5.0, 10.0]
        } else {
            vec![0.05, 0.1, 0.2]
        }
    }

    fn emit(&self, text: &str) -> Result<(), Failure> {
        match &self.out {
            Some(p) => fs::write(p, text)
                .with_context(|| format!("writing {}", p.display()))
                .map_err(config),
            None => {
                print!("{text}");
                Ok(())
            }
        }
    }
}

#[derive(Serialize)]
struct SenseOutput<'a> {
    nominal: &'a SolveReport,
    sensitivity: &'a SensitivityReport,
    predictions: Vec<(f64, f64)>,
}

fn summary(
    nominal: &SolveReport,
    sens: Option<&SensitivityReport>,
    preds: &[(f64, f64)],
) -> String {
    let mut out = format!(
        "status: {:?}\nq0: {:.6}\nbound: {:.6}\nnodes: {}\nx: {:?}\n",
        nominal.status, nominal.value, nominal.bound, nominal.nodes, nominal.x
    );
    if let Some(s) = sens {
        out += &format!(
            "lip_radius: {:.8}\nlip_full: {:.8}\nactive: {:?}\n",
            s.lip_radius, s.lip_full, s.active.sets
        );
        for (d, q) in preds {
            out += &format!("q_tilde({d}): {q:.6}\n");
        }
    }
    out
}

fn run(cli: Cli) -> Result<(), Failure> {
    match cli.command {
        Command::Solve(common) => {
            let case = common.load()?;
            let (nominal, _) = nominal_and_sensitivity(&case, common.tie_tol).map_err(solver)?;
            let text = match common.format {
                FormatArg::Json => serde_json::to_string_pretty(&nominal).map_err(solver)? + "\n",
                _ => summary(&nominal, None, &[]),
            };
            common.emit(&text)
        }
        Command::Sense(common) => {
            let case = common.load()?;
            let (nominal, sens) = nominal_and_sensitivity(&case, common.tie_tol).map_err(solver)?;
            let preds: Vec<(f64, f64)> = common
                .deltas(&case)
                .iter()
                .map(|&d| (d, predict_robust_value(nominal.value, sens.lip_radius, d)))
                .collect();
            let text = match common.format {
                FormatArg::Json => {
                    let out = SenseOutput {
                        nominal: &nominal,
                        sensitivity: &sens,
                        predictions: preds,
                    };
                    serde_json::to_string_pretty(&out).map_err(solver)? + "\n"
                }
                _ => summary(&nominal, Some(&sens), &preds),
            };
            common.emit(&text)
        }
        Command::Robust(common) => {
            let case = common.load()?;
            let opts = common.options()?;
            let rows = run_pipeline(&case, &common.deltas(&case), &opts);
            common.emit(&render(&rows, common.format.into()).map_err(config)?)?;
            match rows.iter().find(|r| r.status != "ok") {
                Some(r) => Err(solver(anyhow!("delta {}: {}", r.delta, r.status))),
                None => Ok(()),
            }
        }
        Command::Table1 { common, check } => {
            let opts = common.options()?;
            let rows = table1_rows(&opts).map_err(solver)?;
            common.emit(&render(&rows, common.format.into()).map_err(config)?)?;
            if let Some(r) = rows.iter().find(|r| r.status != "ok") {
                return Err(solver(anyhow!(
                    "{} δ={} κ={:?}: {}",
                    r.case,
                    r.delta,
                    r.kappa,
                    r.status
                )));
            }
            if !check {
                return Ok(());
            }
            let mut problems = Vec::new();
            for (row, reference) in rows.iter().zip(REFERENCE_ROWS.iter()) {
                for m in compare_with_reference(row, reference) {
                    problems.push(format!(
                        "{} δ={} κ={}: {m}",
                        reference.case, reference.delta, reference.kappa
                    ));
                }
            }
            let errs: Vec<f64> = rows.iter().filter_map(|r| r.error_pct).collect();
            let ref_median = median(&REFERENCE_ROWS.map(|r| r.error_pct)).unwrap_or(f64::NAN);
            if let Some(m) = median(&errs) {
                if (m - ref_median).abs() > ERROR_TOL {
                    problems.push(format!(
                        "median error {m:.2} differs from {ref_median:.1} by more than {ERROR_TOL}"
                    ));
                }
            }
            if problems.is_empty() {
                Ok(())
            } else {
                Err(Failure::Mismatch(problems.join("\n")))
            }
        }
    }
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(f) => {
            match &f {
                Failure::Config(e) => eprintln!("configuration error: {e:#}"),
                Failure::Solver(e) => eprintln!("solver failure: {e:#}"),
                Failure::Mismatch(m) => eprintln!("rows differ from the reference:\n{m}"),
            }
            ExitCode::from(f.code())
        }
    }
}
