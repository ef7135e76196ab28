//! Yearly budget system and its multi-year chaining.
//!
//! A year takes the tax and investment levels decided for it, the exogenous
//! finances (allocations, other recipes, expenditures, subventions) and the
//! debt carried from previous years. It produces the self-financing
//! capacities, the loan needed to balance the investment section and the
//! debt state handed to the next year. The capacity to be free of debt
//! (remaining capital over gross self-financing capacity) is reported for
//! every year.

use serde::{Deserialize, Serialize};
use thiserror::Error;

/// Capacity used in place of `+inf` wherever arithmetic has to stay finite.
pub const CAPACITY_SENTINEL_YEARS: f64 = 1e9;

/// Prudential ceiling on the capacity to be free of debt, in years.
pub const PRUDENTIAL_LIMIT_YEARS: f64 = 15.0;

pub const SCENARIO_VERSION: u32 = 1;

#[derive(Debug, Error, PartialEq)]
pub enum BudgetError {
    #[error("dimension mismatch: {what} has length {got}, expected {expected}")]
    DimensionMismatch {
        what: &'static str,
        expected: usize,
        got: usize,
    },
    #[error("invalid scenario: {0}")]
    InvalidScenario(String),
}

/// One repayment owed in a given (1-based) year of the horizon.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Annuity {
    pub year: usize,
    pub capital_due: f64,
    pub interest_due: f64,
}

/// Outstanding debt: remaining capital and the schedule that repays it.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DebtState {
    pub remaining_capital: f64,
    pub schedule: Vec<Annuity>,
}

impl DebtState {
    pub fn none() -> Self {
        Self {
            remaining_capital: 0.0,
            schedule: Vec::new(),
        }
    }

    /// Builds a debt state whose remaining capital is the sum of the schedule.
    pub fn from_schedule(schedule: Vec<Annuity>) -> Self {
        let remaining_capital = schedule.iter().map(|a| a.capital_due).sum();
        Self {
            remaining_capital,
            schedule,
        }
    }

    /// Capital and interest due in `year`.
    pub fn due(&self, year: usize) -> (f64, f64) {
        self.schedule
            .iter()
            .filter(|a| a.year == year)
            .fold((0.0, 0.0), |(c, i), a| {
                (c + a.capital_due, i + a.interest_due)
            })
    }

    pub fn validate(&self) -> Result<(), BudgetError> {
        if self
            .schedule
            .iter()
            .any(|a| a.capital_due < 0.0 || a.interest_due < 0.0 || a.year == 0)
        {
            return Err(BudgetError::InvalidScenario(
                "debt schedule entries must be non-negative with years starting at 1".into(),
            ));
        }
        let scheduled: f64 = self.schedule.iter().map(|a| a.capital_due).sum();
        if self.remaining_capital < 0.0 || !approx_eq(self.remaining_capital, scheduled, 1e-9) {
            return Err(BudgetError::InvalidScenario(format!(
                "remaining capital {} does not match scheduled capital {}",
                self.remaining_capital, scheduled
            )));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum AmortizationStyle {
    /// Equal capital tranches, interest on the declining balance.
    #[default]
    LevelCapital,
    /// Constant yearly payment (capital + interest).
    Annuity,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct LoanTerms {
    pub interest_rate: f64,
    pub maturity_years: usize,
    #[serde(default)]
    pub amortization: AmortizationStyle,
}

impl LoanTerms {
    /// Repayment schedule of a loan of `amount` contracted during `year`.
    /// The first repayment falls in `year + 1`.
    pub fn schedule(&self, amount: f64, year: usize) -> Vec<Annuity> {
        let m = self.maturity_years;
        let r = self.interest_rate;
        let mut out = Vec::with_capacity(m);
        match self.amortization {
            AmortizationStyle::LevelCapital => {
                let tranche = amount / m as f64;
                for j in 0..m {
                    let balance = amount - tranche * j as f64;
                    out.push(Annuity {
                        year: year + j + 1,
                        capital_due: tranche,
                        interest_due: r * balance,
                    });
                }
            }
            AmortizationStyle::Annuity => {
                let payment = if r == 0.0 {
                    amount / m as f64
                } else {
                    amount * r / (1.0 - (1.0 + r).powi(-(m as i32)))
                };
                let mut balance = amount;
                for j in 0..m {
                    let interest = r * balance;
                    // last tranche absorbs rounding so capital sums to the loan
                    let capital = if j + 1 == m {
                        balance
                    } else {
                        payment - interest
                    };
                    out.push(Annuity {
                        year: year + j + 1,
                        capital_due: capital,
                        interest_due: interest,
                    });
                    balance -= capital;
                }
            }
        }
        out
    }
}

/// Non-controllable per-year inputs.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ExogenousFinances {
    pub state_allocations: Vec<f64>,
    pub other_operating_recipes: Vec<f64>,
    pub operating_expenditures: Vec<f64>,
    pub subventions: Vec<f64>,
    pub loan_terms: LoanTerms,
}

impl ExogenousFinances {
    pub fn year(&self, index: usize) -> YearInputs {
        YearInputs {
            state_allocations: self.state_allocations[index],
            other_operating_recipes: self.other_operating_recipes[index],
            operating_expenditures: self.operating_expenditures[index],
            subventions: self.subventions[index],
        }
    }
}

/// One year's slice of [`ExogenousFinances`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct YearInputs {
    pub state_allocations: f64,
    pub other_operating_recipes: f64,
    pub operating_expenditures: f64,
    pub subventions: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Project {
    pub name: String,
    pub cost_by_year: Vec<f64>,
    pub priority: u8,
    #[serde(default)]
    pub always_on: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ProjectCatalog {
    pub projects: Vec<Project>,
}

impl ProjectCatalog {
    /// Indices of the projects that are not forced on, in catalog order.
    pub fn optional_indices(&self) -> Vec<usize> {
        self.projects
            .iter()
            .enumerate()
            .filter(|(_, p)| !p.always_on)
            .map(|(i, _)| i)
            .collect()
    }

    /// Per-year investment of the active projects. Always-on projects count
    /// whatever their flag says.
    pub fn investment(&self, active: &[bool], years: usize) -> Result<Vec<f64>, BudgetError> {
        if active.len() != self.projects.len() {
            return Err(BudgetError::DimensionMismatch {
                what: "project activation",
                expected: self.projects.len(),
                got: active.len(),
            });
        }
        let mut out = vec![0.0; years];
        for (project, &on) in self.projects.iter().zip(active) {
            if !(on || project.always_on) {
                continue;
            }
            for (slot, cost) in out.iter_mut().zip(&project.cost_by_year) {
                *slot += cost;
            }
        }
        Ok(out)
    }

    /// Activation vector with the optional projects set from `flags` (catalog
    /// order) and every always-on project active.
    pub fn activation_from_optional(&self, flags: &[bool]) -> Result<Vec<bool>, BudgetError> {
        let optional = self.optional_indices();
        if flags.len() != optional.len() {
            return Err(BudgetError::DimensionMismatch {
                what: "optional project flags",
                expected: optional.len(),
                got: flags.len(),
            });
        }
        let mut active: Vec<bool> = self.projects.iter().map(|p| p.always_on).collect();
        for (&idx, &flag) in optional.iter().zip(flags) {
            active[idx] = flag;
        }
        Ok(active)
    }
}

/// Investment of the active projects per year (see [`ProjectCatalog::investment`]).
pub fn investment_from_projects(
    catalog: &ProjectCatalog,
    active: &[bool],
    years: usize,
) -> Result<Vec<f64>, BudgetError> {
    catalog.investment(active, years)
}

/// How the tax values handed to the simulator are to be read.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum TaxMode {
    /// Absolute tax product per year.
    #[default]
    Levels,
    /// Yearly increase fraction applied to the previous year's level,
    /// starting from the scenario's base tax.
    Rates,
}

/// Everything that defines the budget system apart from the decision
/// variables (investment and tax per year).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MultiYearScenario {
    pub version: u32,
    pub name: String,
    pub years: usize,
    /// Tax product of the year preceding the horizon.
    pub base_tax: f64,
    #[serde(default)]
    pub tax_mode: TaxMode,
    pub exogenous: ExogenousFinances,
    pub debt: DebtState,
    pub projects: ProjectCatalog,
    #[serde(default)]
    pub initial_reserve: f64,
}

impl MultiYearScenario {
    pub fn validate(&self) -> Result<(), BudgetError> {
        let bad = |msg: String| Err(BudgetError::InvalidScenario(msg));
        if self.version != SCENARIO_VERSION {
            return bad(format!("unsupported scenario version {}", self.version));
        }
        let n = self.years;
        if n == 0 {
            return bad("years must be at least 1".into());
        }
        let exo = &self.exogenous;
        for (what, series) in [
            ("exogenous.state_allocations", &exo.state_allocations),
            (
                "exogenous.other_operating_recipes",
                &exo.other_operating_recipes,
            ),
            (
                "exogenous.operating_expenditures",
                &exo.operating_expenditures,
            ),
            ("exogenous.subventions", &exo.subventions),
        ] {
            if series.len() != n {
                return Err(BudgetError::DimensionMismatch {
                    what,
                    expected: n,
                    got: series.len(),
                });
            }
            if series.iter().any(|v| !v.is_finite()) {
                return bad(format!("{what} contains a non-finite value"));
            }
        }
        let loan = &exo.loan_terms;
        if !(0.0..1.0).contains(&loan.interest_rate) {
            return bad(format!(
                "loan interest rate {} outside [0,1)",
                loan.interest_rate
            ));
        }
        if loan.maturity_years < 1 {
            return bad("loan maturity must be at least 1 year".into());
        }
        if !(self.base_tax >= 0.0) {
            return bad("base_tax must be non-negative".into());
        }
        if !(self.initial_reserve >= 0.0) {
            return bad("initial_reserve must be non-negative".into());
        }
        self.debt.validate()?;
        if self.projects.projects.is_empty() {
            return bad("at least one project is required".into());
        }
        for p in &self.projects.projects {
            if p.cost_by_year.len() != n {
                return bad(format!(
                    "project '{}' has {} yearly costs, expected {}",
                    p.name,
                    p.cost_by_year.len(),
                    n
                ));
            }
            if p.cost_by_year.iter().any(|c| !(*c >= 0.0)) {
                return bad(format!("project '{}' has a negative cost", p.name));
            }
            if !(1..=4).contains(&p.priority) {
                return bad(format!("project '{}' priority must be in 1..=4", p.name));
            }
            if p.always_on && p.priority != 1 {
                return bad(format!(
                    "project '{}' is always_on but not priority 1",
                    p.name
                ));
            }
        }
        Ok(())
    }

    /// Converts tax values given in the scenario's [`TaxMode`] into levels.
    pub fn tax_levels(&self, values: &[f64]) -> Vec<f64> {
        match self.tax_mode {
            TaxMode::Levels => values.to_vec(),
            TaxMode::Rates => tax_levels_from_rates(self.base_tax, values),
        }
    }
}

/// Compounds yearly increase fractions onto `base`.
pub fn tax_levels_from_rates(base: f64, rates: &[f64]) -> Vec<f64> {
    let mut level = base;
    rates
        .iter()
        .map(|r| {
            level *= 1.0 + r;
            level
        })
        .collect()
}

/// Budget lines of one simulated year.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct YearLines {
    pub tax: f64,
    pub investment: f64,
    pub operating_recipes: f64,
    pub operating_expenditures: f64,
    pub interest: f64,
    pub gross_sfc: f64,
    pub capital_repayment: f64,
    pub net_sfc: f64,
    pub subventions: f64,
    pub new_loan: f64,
    pub reserve_drawn: f64,
    /// Reserve carried to the next year.
    pub reserve: f64,
    /// Debt capital outstanding at the end of the year.
    pub remaining_capital: f64,
}

/// One year of the budget system. `year` is 1-based and selects the
/// repayments due from `debt`.
pub fn simulate_year(
    debt: &DebtState,
    year: usize,
    tax_level: f64,
    investment: f64,
    exo: &YearInputs,
    loan_terms: &LoanTerms,
    reserve_in: f64,
) -> (YearLines, DebtState, f64) {
    let (capital_due, interest_due) = debt.due(year);
    let operating_recipes = exo.state_allocations + exo.other_operating_recipes + tax_level;
    let gross_sfc = operating_recipes - exo.operating_expenditures - interest_due;
    let net_sfc = gross_sfc - capital_due;
    let available = net_sfc + exo.subventions + reserve_in;
    let new_loan = (investment - available).max(0.0);
    let reserve_out = (available - investment).max(0.0);

    let mut schedule: Vec<Annuity> = debt
        .schedule
        .iter()
        .filter(|a| a.year > year)
        .copied()
        .collect();
    if new_loan > 0.0 {
        schedule.extend(loan_terms.schedule(new_loan, year));
    }
    let remaining_capital = debt.remaining_capital - capital_due + new_loan;
    let next = DebtState {
        remaining_capital,
        schedule,
    };

    let lines = YearLines {
        tax: tax_level,
        investment,
        operating_recipes,
        operating_expenditures: exo.operating_expenditures,
        interest: interest_due,
        gross_sfc,
        capital_repayment: capital_due,
        net_sfc,
        subventions: exo.subventions,
        new_loan,
        reserve_drawn: reserve_in,
        reserve: reserve_out,
        remaining_capital,
    };
    (lines, next, reserve_out)
}

/// Years needed to repay `remaining_capital` at constant gross capacity.
/// `f64::INFINITY` stands for "never" (non-positive capacity with debt left).
pub fn capacity_to_be_free_of_debt(remaining_capital: f64, gross_sfc: f64) -> f64 {
    if remaining_capital <= 0.0 {
        0.0
    } else if gross_sfc > 0.0 {
        remaining_capital / gross_sfc
    } else {
        f64::INFINITY
    }
}

/// Replaces the infinite capacity by [`CAPACITY_SENTINEL_YEARS`].
pub fn finite_capacity(years: f64) -> f64 {
    years.min(CAPACITY_SENTINEL_YEARS)
}

/// A simulated multi-year budget `S(I, T)`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BudgetSolution {
    pub investment: Vec<f64>,
    pub taxes: Vec<f64>,
    pub years: Vec<YearLines>,
    /// Capacity to be free of debt per year; `null` in JSON when infinite.
    #[serde(with = "capacity_serde")]
    pub capacities: Vec<f64>,
}

impl BudgetSolution {
    pub fn max_capacity(&self) -> f64 {
        self.capacities.iter().copied().fold(0.0, f64::max)
    }
}

/// Chains [`simulate_year`] over the horizon. `taxes` are levels.
pub fn simulate_multi_year(
    scenario: &MultiYearScenario,
    investment: &[f64],
    taxes: &[f64],
) -> Result<BudgetSolution, BudgetError> {
    let n = scenario.years;
    for (what, v) in [("investment", investment), ("taxes", taxes)] {
        if v.len() != n {
            return Err(BudgetError::DimensionMismatch {
                what,
                expected: n,
                got: v.len(),
            });
        }
    }
    let mut debt = scenario.debt.clone();
    let mut reserve = scenario.initial_reserve;
    let mut years = Vec::with_capacity(n);
    let mut capacities = Vec::with_capacity(n);
    for i in 0..n {
        let exo = scenario.exogenous.year(i);
        let (lines, next, reserve_out) = simulate_year(
            &debt,
            i + 1,
            taxes[i],
            investment[i],
            &exo,
            &scenario.exogenous.loan_terms,
            reserve,
        );
        capacities.push(capacity_to_be_free_of_debt(
            lines.remaining_capital,
            lines.gross_sfc,
        ));
        years.push(lines);
        debt = next;
        reserve = reserve_out;
    }
    Ok(BudgetSolution {
        investment: investment.to_vec(),
        taxes: taxes.to_vec(),
        years,
        capacities,
    })
}

pub(crate) fn approx_eq(a: f64, b: f64, rel: f64) -> bool {
    (a - b).abs() <= rel * a.abs().max(b.abs()).max(1.0)
}

mod capacity_serde {
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(values: &[f64], s: S) -> Result<S::Ok, S::Error> {
        s.collect_seq(values.iter().map(|v| v.is_finite().then_some(*v)))
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<Vec<f64>, D::Error> {
        let raw: Vec<Option<f64>> = Vec::deserialize(d)?;
        Ok(raw
            .into_iter()
            .map(|v| v.unwrap_or(f64::INFINITY))
            .collect())
    }
}
