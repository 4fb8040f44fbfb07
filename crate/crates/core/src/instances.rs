//! Concrete model instances: the 20-square search problem and a seeded
//! generator for technology-investment problems.

use std::fmt;
use std::str::FromStr;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::model::{
    FeasibleSet, LinearConstraint, Loading, MaxBlock, NormKind, ProblemInstance, Relation, Term,
    Variable,
};
use crate::search::SearchInstance;

pub const SEARCH_SQUARES: usize = 20;
pub const SEARCH_SPEED: f64 = 200.0;
pub const SEARCH_CELL_AREA: f64 = 3600.0;
pub const SEARCH_BUDGET: f64 = 20.0;
pub const SEARCH_SWEEP: f64 = 20.0;

/// Which squares carry sweep-width uncertainty.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum SearchCase {
    /// Every square.
    A,
    /// Squares 7 to 13.
    B,
    /// Squares 14 to 20.
    C,
}

impl SearchCase {
    pub const ALL: [SearchCase; 3] = [SearchCase::A, SearchCase::B, SearchCase::C];

    /// Whether square `k` (0-based) is perturbed.
    pub fn perturbs(self, k: usize) -> bool {
        let square = k + 1;
        match self {
            SearchCase::A => true,
            SearchCase::B => (7..=13).contains(&square),
            SearchCase::C => (14..=20).contains(&square),
        }
    }
}

impl fmt::Display for SearchCase {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        let s = match self {
            SearchCase::A => "A",
            SearchCase::B => "B",
            SearchCase::C => "C",
        };
        f.write_str(s)
    }
}

impl FromStr for SearchCase {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s.trim().to_ascii_uppercase().as_str() {
            "A" => Ok(SearchCase::A),
            "B" => Ok(SearchCase::B),
            "C" => Ok(SearchCase::C),
            other => Err(format!(
                "unknown search case '{other}' (expected A, B or C)"
            )),
        }
    }
}

/// Prior for square `k` (0-based): 0.02, 0.04, 0.06, 0.08 in groups of five.
pub fn search_prior(k: usize) -> f64 {
    [0.02, 0.04, 0.06, 0.08][k / 5]
}

pub fn build_search_instance(case: SearchCase, kappa: usize, delta: f64) -> SearchInstance {
    SearchInstance {
        weights: (0..SEARCH_SQUARES).map(search_prior).collect(),
        sweep: vec![SEARCH_SWEEP; SEARCH_SQUARES],
        speed: SEARCH_SPEED,
        cell_area: SEARCH_CELL_AREA,
        budget: SEARCH_BUDGET,
        max_squares: kappa,
        perturbable: (0..SEARCH_SQUARES).map(|k| case.perturbs(k)).collect(),
        radius: delta,
    }
}

/// Affine pieces `(α_i, β_i)` of the gap penalty `h(γ) = max_i α_i γ + β_i`.
pub fn penalty_pieces(alpha1: f64) -> [(f64, f64); 5] {
    [
        (alpha1, 0.0),
        (4.0, -20.0),
        (40.0, -380.0),
        (400.0, -7580.0),
        (0.0, 0.0),
    ]
}

pub fn penalty(alpha1: f64, gap: f64) -> f64 {
    penalty_pieces(alpha1)
        .iter()
        .map(|(a, b)| a * gap + b)
        .fold(f64::NEG_INFINITY, f64::max)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum BoundsVariant {
    Base,
    LowUpper,
    HighLower,
}

impl BoundsVariant {
    /// `(b̲, b̄)`, shared by every technology. These are placeholder values.
    pub fn bounds(self) -> (f64, f64) {
        match self {
            BoundsVariant::Base => (2.0, 20.0),
            BoundsVariant::LowUpper => (2.0, 12.0),
            BoundsVariant::HighLower => (6.0, 20.0),
        }
    }
}

impl FromStr for BoundsVariant {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "base" => Ok(BoundsVariant::Base),
            "low-upper" => Ok(BoundsVariant::LowUpper),
            "high-lower" => Ok(BoundsVariant::HighLower),
            other => Err(format!(
                "unknown bounds variant '{other}' (expected base, low-upper or high-lower)"
            )),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TechInvestConfig {
    pub technologies: usize,
    pub scenarios: usize,
    pub areas: usize,
    pub alpha1: f64,
    pub bounds: BoundsVariant,
    /// Contribution coefficients are drawn uniformly from `[coef_low, coef_high]`.
    pub coef_low: f64,
    pub coef_high: f64,
    /// Required capability level; the gap is `target - Σ u_t z_t`.
    pub target: f64,
    pub seed: u64,
}

impl Default for TechInvestConfig {
    fn default() -> Self {
        TechInvestConfig {
            technologies: 10,
            scenarios: 20,
            areas: 3,
            alpha1: -2.0,
            bounds: BoundsVariant::Base,
            coef_low: 0.7,
            coef_high: 1.3,
            target: 100.0,
            seed: 20220101,
        }
    }
}

impl TechInvestConfig {
    pub fn validate(&self) -> Result<(), String> {
        if self.technologies == 0 || self.scenarios == 0 || self.areas == 0 {
            return Err("technologies, scenarios and areas must be positive".into());
        }
        if !(self.coef_low > 0.0 && self.coef_low <= self.coef_high && self.coef_high.is_finite()) {
            return Err(format!(
                "coefficient range [{}, {}] must be positive and ordered",
                self.coef_low, self.coef_high
            ));
        }
        if !self.alpha1.is_finite() || !self.target.is_finite() {
            return Err("alpha1 and target must be finite".into());
        }
        Ok(())
    }
}

/// Technology-investment instance.
///
/// Variables are `y_1..y_T` (binary) then `z_1..z_T`. Blocks are ordered
/// scenario-major: block `n * areas + a` holds area `a` in scenario `n`.
pub fn build_tech_instance(cfg: &TechInvestConfig) -> Result<ProblemInstance, String> {
    cfg.validate()?;
    let t = cfg.technologies;
    let n_vars = 2 * t;
    let (lo, hi) = cfg.bounds.bounds();

    let mut variables = Vec::with_capacity(n_vars);
    for j in 0..t {
        variables.push(Variable::binary().named(format!("y{}", j + 1)));
    }
    for j in 0..t {
        variables.push(Variable::continuous(0.0, hi).named(format!("z{}", j + 1)));
    }
    let mut constraints = Vec::with_capacity(2 * t);
    for j in 0..t {
        let mut lower_row = vec![0.0; n_vars];
        lower_row[j] = lo;
        lower_row[t + j] = -1.0;
        constraints.push(LinearConstraint {
            coefficients: lower_row,
            relation: Relation::Le,
            rhs: 0.0,
        });
        let mut upper_row = vec![0.0; n_vars];
        upper_row[t + j] = 1.0;
        upper_row[j] = -hi;
        constraints.push(LinearConstraint {
            coefficients: upper_row,
            relation: Relation::Le,
            rhs: 0.0,
        });
    }

    let scale = 1.0 / cfg.scenarios as f64;
    let loadings: Vec<Loading> = (0..t)
        .map(|j| Loading {
            param: j,
            var: t + j,
            coef: 1.0,
        })
        .collect();
    let terms: Vec<Term> = penalty_pieces(cfg.alpha1)
        .iter()
        .map(|&(a, b)| Term::BilinearAffinePiece {
            slope: a * scale,
            intercept: b * scale,
            base: cfg.target,
            loadings: loadings.clone(),
        })
        .collect();

    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    let mut blocks = Vec::with_capacity(cfg.scenarios * cfg.areas);
    for _ in 0..cfg.scenarios * cfg.areas {
        let nominal: Vec<f64> = (0..t)
            .map(|_| rng.random_range(cfg.coef_low..=cfg.coef_high))
            .collect();
        blocks.push(MaxBlock {
            terms: terms.clone(),
            nominal,
            norm: NormKind::L2,
            perturbable: true,
        });
    }

    let mut f0 = vec![0.0; n_vars];
    f0[t..].iter_mut().for_each(|c| *c = 1.0);
    ProblemInstance::new(
        FeasibleSet {
            variables,
            constraints,
        },
        f0,
        blocks,
    )
    .map_err(|e| e.to_string())
}
