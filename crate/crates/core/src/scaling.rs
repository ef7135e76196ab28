//! Dimensionless problem setting built from two anchor budgets.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::budget::{
    finite_capacity, simulate_multi_year, BudgetError, BudgetSolution, MultiYearScenario,
};

#[derive(Debug, Error, PartialEq)]
pub enum ScalingError {
    #[error("degenerate scaling: characteristic {0} is not strictly positive and finite")]
    Degenerate(&'static str),
    #[error("anchors have different horizons ({0} and {1} years)")]
    HorizonMismatch(usize, usize),
    #[error(transparent)]
    Budget(#[from] BudgetError),
}

/// The two expert budgets: one reaching the investment goal, one reaching
/// the capacity goal.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnchorPair {
    pub goal_investment: BudgetSolution,
    pub goal_capacity: BudgetSolution,
}

impl AnchorPair {
    /// Simulates both anchors on `scenario`. Taxes are levels.
    pub fn simulate(
        scenario: &MultiYearScenario,
        goal_investment: (&[f64], &[f64]),
        goal_capacity: (&[f64], &[f64]),
    ) -> Result<Self, ScalingError> {
        Ok(Self {
            goal_investment: simulate_multi_year(scenario, goal_investment.0, goal_investment.1)?,
            goal_capacity: simulate_multi_year(scenario, goal_capacity.0, goal_capacity.1)?,
        })
    }

    pub fn years(&self) -> usize {
        self.goal_investment.investment.len()
    }
}

/// Characteristic investment, tax and capacity magnitudes.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct CharacteristicValues {
    pub investment: f64,
    pub tax: f64,
    pub capacity: f64,
}

impl CharacteristicValues {
    pub const UNIT: Self = Self {
        investment: 1.0,
        tax: 1.0,
        capacity: 1.0,
    };
}

fn positive(value: f64, name: &'static str) -> Result<f64, ScalingError> {
    if value > 0.0 && value.is_finite() {
        Ok(value)
    } else {
        Err(ScalingError::Degenerate(name))
    }
}

/// Means over both anchors of the investment levels, tax levels and
/// capacities reached.
pub fn characteristic_values(anchors: &AnchorPair) -> Result<CharacteristicValues, ScalingError> {
    let (a, b) = (&anchors.goal_investment, &anchors.goal_capacity);
    if a.investment.len() != b.investment.len() {
        return Err(ScalingError::HorizonMismatch(
            a.investment.len(),
            b.investment.len(),
        ));
    }
    let two_n = 2.0 * a.investment.len() as f64;
    let mean = |x: &[f64], y: &[f64]| (x.iter().sum::<f64>() + y.iter().sum::<f64>()) / two_n;
    Ok(CharacteristicValues {
        investment: positive(mean(&a.investment, &b.investment), "investment")?,
        tax: positive(mean(&a.taxes, &b.taxes), "tax")?,
        capacity: positive(mean(&a.capacities, &b.capacities), "capacity")?,
    })
}

/// Packs `(I, T)` into a `2n` dimensionless point `(I/i, T/t)`.
pub fn to_dimensionless(investment: &[f64], taxes: &[f64], cv: &CharacteristicValues) -> Vec<f64> {
    investment
        .iter()
        .map(|v| v / cv.investment)
        .chain(taxes.iter().map(|v| v / cv.tax))
        .collect()
}

/// Inverse of [`to_dimensionless`]: returns physical `(I, T)`.
pub fn from_dimensionless(point: &[f64], cv: &CharacteristicValues) -> (Vec<f64>, Vec<f64>) {
    let n = point.len() / 2;
    let investment = point[..n].iter().map(|v| v * cv.investment).collect();
    let taxes = point[n..].iter().map(|v| v * cv.tax).collect();
    (investment, taxes)
}

/// Capacities in units of the characteristic capacity. Infinite capacities
/// are first replaced by the finite sentinel.
pub fn scale_capacities(capacities: &[f64], cv: &CharacteristicValues) -> Vec<f64> {
    capacities
        .iter()
        .map(|c| finite_capacity(*c) / cv.capacity)
        .collect()
}

/// A budget expressed in dimensionless variables.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DimensionlessSolution {
    pub investment: Vec<f64>,
    pub taxes: Vec<f64>,
    pub capacities: Vec<f64>,
}

impl DimensionlessSolution {
    pub fn from_solution(sol: &BudgetSolution, cv: &CharacteristicValues) -> Self {
        Self {
            investment: sol.investment.iter().map(|v| v / cv.investment).collect(),
            taxes: sol.taxes.iter().map(|v| v / cv.tax).collect(),
            capacities: scale_capacities(&sol.capacities, cv),
        }
    }
}

/// Capacity ceiling and tax growth cap, in dimensionless units.
///
/// The cap of year `i` is `(1 + max_tax_growth) * T_{i-1}` with `T_0` the
/// base tax. `None` disables a constraint.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct ConstraintSet {
    pub c_max: Option<f64>,
    pub max_tax_growth: Option<f64>,
    pub base_tax: f64,
}

impl ConstraintSet {
    pub fn unconstrained() -> Self {
        Self {
            c_max: None,
            max_tax_growth: None,
            base_tax: 0.0,
        }
    }

    /// Builds the dimensionless constraint set from physical limits.
    pub fn from_physical(
        c_max_years: Option<f64>,
        max_tax_growth: Option<f64>,
        base_tax: f64,
        cv: &CharacteristicValues,
    ) -> Self {
        Self {
            c_max: c_max_years.map(|c| c / cv.capacity),
            max_tax_growth,
            base_tax: base_tax / cv.tax,
        }
    }

    /// Tax cap of every year given the taxes actually chosen.
    pub fn tax_caps(&self, taxes: &[f64]) -> Option<Vec<f64>> {
        let rho = self.max_tax_growth?;
        let mut prev = self.base_tax;
        Some(
            taxes
                .iter()
                .map(|t| {
                    let cap = (1.0 + rho) * prev;
                    prev = *t;
                    cap
                })
                .collect(),
        )
    }
}

/// Per-constraint slacks; every entry is zero on the feasible set.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ViolationReport {
    pub capacity_below_zero: Vec<f64>,
    pub capacity_above_max: Vec<f64>,
    pub tax_above_cap: Vec<f64>,
}

impl ViolationReport {
    pub fn total(&self) -> f64 {
        self.capacity_below_zero.iter().sum::<f64>()
            + self.capacity_above_max.iter().sum::<f64>()
            + self.tax_above_cap.iter().sum::<f64>()
    }

    pub fn is_feasible(&self) -> bool {
        self.capacity_below_zero
            .iter()
            .chain(&self.capacity_above_max)
            .chain(&self.tax_above_cap)
            .all(|s| *s == 0.0)
    }
}

pub fn check_constraints(sol: &DimensionlessSolution, cs: &ConstraintSet) -> ViolationReport {
    let capacity_below_zero = sol.capacities.iter().map(|c| (-c).max(0.0)).collect();
    let capacity_above_max = match cs.c_max {
        Some(max) => sol.capacities.iter().map(|c| (c - max).max(0.0)).collect(),
        None => vec![0.0; sol.capacities.len()],
    };
    let tax_above_cap = match cs.tax_caps(&sol.taxes) {
        Some(caps) => sol
            .taxes
            .iter()
            .zip(caps)
            .map(|(t, cap)| (t - cap).max(0.0))
            .collect(),
        None => vec![0.0; sol.taxes.len()],
    };
    ViolationReport {
        capacity_below_zero,
        capacity_above_max,
        tax_above_cap,
    }
}
