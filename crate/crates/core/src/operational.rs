//! Ten-gene project/tax coding used on the bundled demo scenario.
//!
//! The first five genes switch the five optional projects (fractional part
//! at least one half means active); the last five are yearly tax increase
//! fractions read modulo 7%.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::budget::{
    finite_capacity, simulate_multi_year, tax_levels_from_rates, BudgetError, BudgetSolution,
    MultiYearScenario, PRUDENTIAL_LIMIT_YEARS,
};

pub const OPTIONAL_PROJECTS: usize = 5;
pub const TAX_GENES: usize = 5;
pub const GENES: usize = OPTIONAL_PROJECTS + TAX_GENES;
/// Upper bound (exclusive) of a decoded yearly tax increase.
pub const TAX_MODULUS: f64 = 0.07;

const DEMO_SCENARIO: &str = include_str!("../data/demo_scenario.json");

#[derive(Debug, Error, PartialEq)]
pub enum OperationalError {
    #[error("expected {GENES} genes, got {0}")]
    GeneCount(usize),
    #[error(
        "scenario must have {expected} years and {OPTIONAL_PROJECTS} optional projects: {detail}"
    )]
    Scenario { expected: usize, detail: String },
    #[error(transparent)]
    Budget(#[from] BudgetError),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OperationalDecode {
    pub projects: Vec<bool>,
    pub tax_rates: Vec<f64>,
}

impl OperationalDecode {
    pub fn active_count(&self) -> usize {
        self.projects.iter().filter(|p| **p).count()
    }

    /// `Project k: ON/OFF` lines followed by the tax evolution line.
    pub fn describe(&self) -> String {
        let projects: Vec<String> = self
            .projects
            .iter()
            .enumerate()
            .map(|(k, on)| format!("Project {}: {}", k + 1, if *on { "ON" } else { "OFF" }))
            .collect();
        let taxes: Vec<String> = self
            .tax_rates
            .iter()
            .map(|r| format!("{:.2}%", r * 100.0))
            .collect();
        format!(
            "{}\nTax evolution : {}",
            projects.join(", "),
            taxes.join(", ")
        )
    }
}

/// Decodes a chromosome. Genes use the floor modulus, so negative genes wrap
/// into range. With `anchor_input`, a positive tax gene that is an exact
/// multiple of the modulus decodes to just under 7% instead of 0%.
pub fn decode_operational(
    genes: &[f64],
    anchor_input: bool,
) -> Result<OperationalDecode, OperationalError> {
    if genes.len() != GENES {
        return Err(OperationalError::GeneCount(genes.len()));
    }
    let projects = genes[..OPTIONAL_PROJECTS]
        .iter()
        .map(|g| g.rem_euclid(1.0) >= 0.5)
        .collect();
    let tax_rates = genes[OPTIONAL_PROJECTS..]
        .iter()
        .map(|g| {
            let r = g.rem_euclid(TAX_MODULUS);
            if anchor_input && r == 0.0 && *g > 0.0 {
                TAX_MODULUS.next_down()
            } else {
                r
            }
        })
        .collect();
    Ok(OperationalDecode {
        projects,
        tax_rates,
    })
}

/// The two anchor chromosomes: all projects with strong early tax rises,
/// and only the priority-one projects with mild ones.
pub fn anchor_vectors() -> ([f64; GENES], [f64; GENES]) {
    (
        [0.75, 0.75, 0.75, 0.75, 0.75, 0.07, 0.07, 0.07, 0.00, 0.00],
        [0.25, 0.25, 0.25, 0.25, 0.25, 0.03, 0.02, 0.02, 0.00, 0.00],
    )
}

fn w25() -> f64 {
    0.25
}
fn w10() -> f64 {
    0.10
}
fn w05() -> f64 {
    0.05
}
fn cdd_worst() -> f64 {
    PRUDENTIAL_LIMIT_YEARS
}
fn spare_optimum() -> f64 {
    0.05
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperationalFitnessSpec {
    #[serde(default = "w25")]
    pub weight_projects: f64,
    #[serde(default = "w10")]
    pub weight_tax_avg: f64,
    #[serde(default = "w05")]
    pub weight_tax_last_two: f64,
    #[serde(default = "w25")]
    pub weight_cdd: f64,
    #[serde(default = "w25")]
    pub weight_spare: f64,
    #[serde(default = "w10")]
    pub weight_no_variation: f64,
    #[serde(default = "cdd_worst")]
    pub cdd_worst: f64,
    #[serde(default = "spare_optimum")]
    pub spare_optimum: f64,
}

impl Default for OperationalFitnessSpec {
    fn default() -> Self {
        Self {
            weight_projects: 0.25,
            weight_tax_avg: 0.10,
            weight_tax_last_two: 0.05,
            weight_cdd: 0.25,
            weight_spare: 0.25,
            weight_no_variation: 0.10,
            cdd_worst: PRUDENTIAL_LIMIT_YEARS,
            spare_optimum: 0.05,
        }
    }
}

impl OperationalFitnessSpec {
    pub fn weight_sum(&self) -> f64 {
        self.weight_projects
            + self.weight_tax_avg
            + self.weight_tax_last_two
            + self.weight_cdd
            + self.weight_spare
            + self.weight_no_variation
    }
}

/// Individual satisfaction terms, each in `[0, 1]`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct OperationalTerms {
    pub projects: f64,
    pub tax_avg: f64,
    pub tax_last_two: f64,
    pub cdd: f64,
    pub spare: f64,
    pub no_variation: f64,
}

fn mean(v: &[f64]) -> f64 {
    if v.is_empty() {
        0.0
    } else {
        v.iter().sum::<f64>() / v.len() as f64
    }
}

/// Largest population standard deviation of `n` values in `[0, span]`.
fn max_stdev(n: usize, span: f64) -> f64 {
    let k = (n / 2) as f64;
    let n = n as f64;
    span * (k * (n - k)).sqrt() / n
}

/// Mean ratio of gross self-financing capacity to operating recipes.
pub fn spare_ratio(sim: &BudgetSolution) -> f64 {
    let ratios: Vec<f64> = sim
        .years
        .iter()
        .map(|y| {
            if y.operating_recipes > 0.0 {
                y.gross_sfc / y.operating_recipes
            } else {
                0.0
            }
        })
        .collect();
    mean(&ratios)
}

pub fn operational_terms(
    decoded: &OperationalDecode,
    sim: &BudgetSolution,
    spec: &OperationalFitnessSpec,
) -> OperationalTerms {
    let rates = &decoded.tax_rates;
    let unit = |x: f64| x.clamp(0.0, 1.0);
    let projects = decoded.active_count() as f64 / decoded.projects.len().max(1) as f64;
    let tax_avg = unit(1.0 - mean(rates) / TAX_MODULUS);
    let tail = &rates[rates.len().saturating_sub(2)..];
    let tax_last_two = unit(1.0 - mean(tail) / TAX_MODULUS);
    let worst_cdd = finite_capacity(sim.max_capacity());
    let cdd = 1.0 - worst_cdd.clamp(0.0, spec.cdd_worst) / spec.cdd_worst;
    let gap = (spare_ratio(sim) - spec.spare_optimum).abs();
    let spare = 1.0 - gap.clamp(0.0, spec.spare_optimum) / spec.spare_optimum;
    let m = mean(rates);
    let stdev =
        (rates.iter().map(|r| (r - m).powi(2)).sum::<f64>() / rates.len().max(1) as f64).sqrt();
    let cap = max_stdev(rates.len(), TAX_MODULUS);
    let no_variation = if cap > 0.0 {
        unit(1.0 - stdev / cap)
    } else {
        1.0
    };
    OperationalTerms {
        projects,
        tax_avg,
        tax_last_two,
        cdd,
        spare,
        no_variation,
    }
}

/// Weighted satisfaction of a decoded plan and its simulated budget.
pub fn fitness_operational(
    decoded: &OperationalDecode,
    sim: &BudgetSolution,
    spec: &OperationalFitnessSpec,
) -> f64 {
    let t = operational_terms(decoded, sim, spec);
    spec.weight_projects * t.projects
        + spec.weight_tax_avg * t.tax_avg
        + spec.weight_tax_last_two * t.tax_last_two
        + spec.weight_cdd * t.cdd
        + spec.weight_spare * t.spare
        + spec.weight_no_variation * t.no_variation
}

/// Synthetic five-year scenario with a dozen projects, most of the budget
/// in the always-on priority-one projects.
pub fn bundled_demo_scenario() -> MultiYearScenario {
    serde_json::from_str(DEMO_SCENARIO).expect("bundled demo scenario is valid JSON")
}

pub fn check_operational_scenario(scenario: &MultiYearScenario) -> Result<(), OperationalError> {
    scenario.validate()?;
    let optional = scenario.projects.optional_indices().len();
    if scenario.years != TAX_GENES || optional != OPTIONAL_PROJECTS {
        return Err(OperationalError::Scenario {
            expected: TAX_GENES,
            detail: format!("{} years, {} optional projects", scenario.years, optional),
        });
    }
    Ok(())
}

/// Simulates the budget a decoded chromosome stands for. Taxes compound
/// from the scenario's base tax.
pub fn simulate_decoded(
    scenario: &MultiYearScenario,
    decoded: &OperationalDecode,
) -> Result<BudgetSolution, OperationalError> {
    let active = scenario
        .projects
        .activation_from_optional(&decoded.projects)?;
    let investment = scenario.projects.investment(&active, scenario.years)?;
    let taxes = tax_levels_from_rates(scenario.base_tax, &decoded.tax_rates);
    Ok(simulate_multi_year(scenario, &investment, &taxes)?)
}
