//! Composite fitness of a dimensionless budget and the constraint penalty.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::scaling::{check_constraints, ConstraintSet, DimensionlessSolution};

#[derive(Debug, Error, PartialEq)]
pub enum FitnessError {
    #[error("tax evolution pattern must be non-negative and sum to 1 (sum = {0})")]
    Pattern(f64),
    #[error("fitness weights must be non-negative with a sum in [0.9, 1.1] (sum = {0})")]
    Weights(f64),
    #[error("penalty weight must be at least 1 (got {0})")]
    PenaltyWeight(f64),
    #[error("{what} has length {got}, expected {expected}")]
    Dimension {
        what: &'static str,
        expected: usize,
        got: usize,
    },
}

/// Share of the total tax effort wished for each year.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct TaxEvolutionPattern(Vec<f64>);

impl TaxEvolutionPattern {
    pub fn new(shares: Vec<f64>) -> Result<Self, FitnessError> {
        let sum: f64 = shares.iter().sum();
        if shares.is_empty() || shares.iter().any(|a| !(*a >= 0.0)) || (sum - 1.0).abs() > 1e-12 {
            return Err(FitnessError::Pattern(sum));
        }
        Ok(Self(shares))
    }

    pub fn uniform(years: usize) -> Self {
        Self(vec![1.0 / years as f64; years])
    }

    pub fn shares(&self) -> &[f64] {
        &self.0
    }
}

impl TryFrom<Vec<f64>> for TaxEvolutionPattern {
    type Error = FitnessError;
    fn try_from(v: Vec<f64>) -> Result<Self, Self::Error> {
        Self::new(v)
    }
}

impl From<TaxEvolutionPattern> for Vec<f64> {
    fn from(p: TaxEvolutionPattern) -> Self {
        p.0
    }
}

fn default_decay() -> f64 {
    5.0
}

fn default_penalty_weight() -> f64 {
    10.0
}

fn default_penalty_rate() -> f64 {
    1.0
}

/// Decay rates of the `exp(-rate * x)` shaping functions.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct DecayRates {
    #[serde(default = "default_decay")]
    pub tax: f64,
    #[serde(default = "default_decay")]
    pub investment: f64,
    #[serde(default = "default_decay")]
    pub capacity: f64,
}

impl Default for DecayRates {
    fn default() -> Self {
        Self {
            tax: 5.0,
            investment: 5.0,
            capacity: 5.0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct FitnessWeights {
    pub tax: f64,
    pub investment: f64,
    pub capacity: f64,
}

impl FitnessWeights {
    pub fn thirds() -> Self {
        Self {
            tax: 1.0 / 3.0,
            investment: 1.0 / 3.0,
            capacity: 1.0 / 3.0,
        }
    }

    pub fn sum(&self) -> f64 {
        self.tax + self.investment + self.capacity
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FitnessSpec {
    /// Dimensionless investment goal.
    pub target_investment: Vec<f64>,
    /// Dimensionless capacity goal.
    pub target_capacity: Vec<f64>,
    pub pattern: TaxEvolutionPattern,
    pub weights: FitnessWeights,
    #[serde(default)]
    pub decay: DecayRates,
    #[serde(default = "default_penalty_weight")]
    pub penalty_weight: f64,
    /// Rate of the saturating penalty shape `1 - exp(-rate * s)`.
    #[serde(default = "default_penalty_rate")]
    pub penalty_rate: f64,
}

impl FitnessSpec {
    pub fn validate(&self) -> Result<(), FitnessError> {
        let n = self.pattern.shares().len();
        for (what, v) in [
            ("target_investment", &self.target_investment),
            ("target_capacity", &self.target_capacity),
        ] {
            if v.len() != n {
                return Err(FitnessError::Dimension {
                    what,
                    expected: n,
                    got: v.len(),
                });
            }
        }
        let w = &self.weights;
        let sum = w.sum();
        if w.tax < 0.0 || w.investment < 0.0 || w.capacity < 0.0 || !(0.9..=1.1).contains(&sum) {
            return Err(FitnessError::Weights(sum));
        }
        if !(self.penalty_weight >= 1.0) {
            return Err(FitnessError::PenaltyWeight(self.penalty_weight));
        }
        Ok(())
    }
}

pub fn decay(rate: f64, x: f64) -> f64 {
    (-rate * x).exp()
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct TaxScore {
    pub score: f64,
    /// Set when the taxes sum to zero and no pattern can be read from them.
    pub degenerate: bool,
}

/// Closeness of the tax profile to the evolution pattern.
pub fn fitness_tax(taxes: &[f64], pattern: &TaxEvolutionPattern, rate: f64) -> TaxScore {
    let total: f64 = taxes.iter().sum();
    if total == 0.0 {
        return TaxScore {
            score: 0.0,
            degenerate: true,
        };
    }
    let deviation: f64 = taxes
        .iter()
        .zip(pattern.shares())
        .map(|(t, a)| (t / total - a).abs())
        .sum();
    TaxScore {
        score: decay(rate, deviation),
        degenerate: false,
    }
}

/// Closeness to the investment goal and to the capacity goal.
pub fn fitness_goals(investment: &[f64], capacities: &[f64], spec: &FitnessSpec) -> (f64, f64) {
    let dev = |x: &[f64], y: &[f64]| -> f64 { x.iter().zip(y).map(|(a, b)| (a - b).abs()).sum() };
    (
        decay(
            spec.decay.investment,
            dev(investment, &spec.target_investment),
        ),
        decay(spec.decay.capacity, dev(capacities, &spec.target_capacity)),
    )
}

/// Weighted sum of the three sub-scores (larger is better).
pub fn fitness_total(sol: &DimensionlessSolution, spec: &FitnessSpec) -> f64 {
    let tax = fitness_tax(&sol.taxes, &spec.pattern, spec.decay.tax).score;
    let (inv, cap) = fitness_goals(&sol.investment, &sol.capacities, spec);
    spec.weights.tax * tax + spec.weights.investment * inv + spec.weights.capacity * cap
}

/// Saturating penalty `-w * (1 - exp(-rate * s))` on the total slack `s`.
pub fn penalty_from_slack(slack: f64, weight: f64, rate: f64) -> f64 {
    if slack <= 0.0 {
        0.0
    } else {
        weight * (-rate * slack).exp_m1()
    }
}

pub fn penalty(sol: &DimensionlessSolution, cs: &ConstraintSet, spec: &FitnessSpec) -> f64 {
    let slack = check_constraints(sol, cs).total();
    penalty_from_slack(slack, spec.penalty_weight, spec.penalty_rate)
}

pub fn penalized_fitness(
    sol: &DimensionlessSolution,
    cs: &ConstraintSet,
    spec: &FitnessSpec,
) -> f64 {
    fitness_total(sol, spec) + penalty(sol, cs, spec)
}
