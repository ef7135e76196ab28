//! End-to-end runs: a versioned run configuration is resolved into a
//! search problem over the anchors' box, optimized, and its final population
//! resized back into physical budgets.

use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::budget::{
    simulate_multi_year, BudgetError, BudgetSolution, MultiYearScenario, PRUDENTIAL_LIMIT_YEARS,
};
use crate::fitness::{
    penalized_fitness, penalty_from_slack, DecayRates, FitnessError, FitnessSpec, FitnessWeights,
    TaxEvolutionPattern,
};
use crate::frame::{build_frame, Coding, Frame, FrameError};
use crate::ga::{
    self, Evaluation, GaConfig, GaError, GenerationStats, Population, Problem, ProgressSink,
};
use crate::operational::{
    anchor_vectors, bundled_demo_scenario, check_operational_scenario, decode_operational,
    fitness_operational, simulate_decoded, OperationalDecode, OperationalError,
    OperationalFitnessSpec, GENES,
};
use crate::scaling::{
    characteristic_values, check_constraints, from_dimensionless, to_dimensionless, AnchorPair,
    CharacteristicValues, ConstraintSet, DimensionlessSolution, ScalingError,
};

pub const RUN_CONFIG_VERSION: u32 = 1;

#[derive(Debug, Error)]
pub enum PipelineError {
    #[error("unsupported run config version {0}")]
    Version(u32),
    #[error("scenario '{0}' could not be resolved: {1}")]
    Scenario(String, String),
    #[error("invalid configuration: {0}")]
    Config(String),
    #[error(transparent)]
    Budget(#[from] BudgetError),
    #[error(transparent)]
    Scaling(#[from] ScalingError),
    #[error(transparent)]
    Frame(#[from] FrameError),
    #[error(transparent)]
    Fitness(#[from] FitnessError),
    #[error(transparent)]
    Operational(#[from] OperationalError),
    #[error(transparent)]
    Ga(#[from] GaError),
}

impl PipelineError {
    pub fn is_infeasible_init(&self) -> bool {
        matches!(self, Self::Ga(GaError::InfeasibleInit { .. }))
    }
}

/// A scenario given inline or by reference (file path on the command line,
/// stored scenario id in the service).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(untagged)]
pub enum ScenarioRef {
    Inline(Box<MultiYearScenario>),
    Named(String),
}

/// Looks up named scenarios.
pub trait ScenarioResolver {
    fn resolve(&self, name: &str) -> Result<MultiYearScenario, String>;
}

/// Resolver that knows no names; only inline scenarios work.
pub struct InlineOnly;

impl ScenarioResolver for InlineOnly {
    fn resolve(&self, name: &str) -> Result<MultiYearScenario, String> {
        Err(format!("no resolver for named scenario '{name}'"))
    }
}

impl<F: Fn(&str) -> Result<MultiYearScenario, String>> ScenarioResolver for F {
    fn resolve(&self, name: &str) -> Result<MultiYearScenario, String> {
        self(name)
    }
}

impl ScenarioRef {
    pub fn load(
        &self,
        resolver: &dyn ScenarioResolver,
    ) -> Result<MultiYearScenario, PipelineError> {
        let scenario = match self {
            Self::Inline(s) => (**s).clone(),
            Self::Named(name) => resolver
                .resolve(name)
                .map_err(|e| PipelineError::Scenario(name.clone(), e))?,
        };
        scenario.validate()?;
        Ok(scenario)
    }
}

fn default_c_max() -> Option<f64> {
    Some(PRUDENTIAL_LIMIT_YEARS)
}
fn default_growth() -> Option<f64> {
    Some(0.07)
}

/// Physical limits. An explicit `null` disables a limit.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct PhysicalConstraints {
    /// Ceiling on the capacity to be free of debt, in years.
    #[serde(default = "default_c_max")]
    pub c_max_years: Option<f64>,
    /// Largest yearly relative tax increase.
    #[serde(default = "default_growth")]
    pub max_tax_growth: Option<f64>,
}

impl Default for PhysicalConstraints {
    fn default() -> Self {
        Self {
            c_max_years: default_c_max(),
            max_tax_growth: default_growth(),
        }
    }
}

/// Investment and tax per year; taxes are read in the scenario's tax mode.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetPlan {
    pub investment: Vec<f64>,
    pub taxes: Vec<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetAnchors {
    pub goal_investment: BudgetPlan,
    pub goal_capacity: BudgetPlan,
}

fn default_penalty_weight() -> f64 {
    10.0
}
fn default_penalty_rate() -> f64 {
    1.0
}
fn default_weights() -> FitnessWeights {
    FitnessWeights::thirds()
}

/// Fitness settings of a budget run. Missing targets default to the
/// investment of the first anchor and the capacities of the second, and a
/// missing pattern to equal yearly shares.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetFitnessConfig {
    #[serde(default)]
    pub target_investment: Option<Vec<f64>>,
    #[serde(default)]
    pub target_capacity: Option<Vec<f64>>,
    #[serde(default)]
    pub pattern: Option<TaxEvolutionPattern>,
    #[serde(default = "default_weights")]
    pub weights: FitnessWeights,
    #[serde(default)]
    pub decay: DecayRates,
    #[serde(default = "default_penalty_weight")]
    pub penalty_weight: f64,
    #[serde(default = "default_penalty_rate")]
    pub penalty_rate: f64,
}

impl Default for BudgetFitnessConfig {
    fn default() -> Self {
        Self {
            target_investment: None,
            target_capacity: None,
            pattern: None,
            weights: default_weights(),
            decay: DecayRates::default(),
            penalty_weight: default_penalty_weight(),
            penalty_rate: default_penalty_rate(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct BudgetProblemConfig {
    pub scenario: ScenarioRef,
    pub anchors: BudgetAnchors,
    #[serde(default)]
    pub fitness: BudgetFitnessConfig,
    #[serde(default)]
    pub constraints: PhysicalConstraints,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperationalAnchors {
    pub v1: Vec<f64>,
    pub v2: Vec<f64>,
}

impl Default for OperationalAnchors {
    fn default() -> Self {
        let (v1, v2) = anchor_vectors();
        Self {
            v1: v1.to_vec(),
            v2: v2.to_vec(),
        }
    }
}

/// Ten-gene run. Without a scenario the bundled demo is used.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct OperationalProblemConfig {
    #[serde(default)]
    pub scenario: Option<ScenarioRef>,
    #[serde(default)]
    pub anchors: OperationalAnchors,
    #[serde(default)]
    pub fitness: OperationalFitnessSpec,
    #[serde(default)]
    pub constraints: PhysicalConstraints,
    #[serde(default = "default_penalty_weight")]
    pub penalty_weight: f64,
    #[serde(default = "default_penalty_rate")]
    pub penalty_rate: f64,
}

impl Default for OperationalProblemConfig {
    fn default() -> Self {
        Self {
            scenario: None,
            anchors: OperationalAnchors::default(),
            fitness: OperationalFitnessSpec::default(),
            constraints: PhysicalConstraints::default(),
            penalty_weight: default_penalty_weight(),
            penalty_rate: default_penalty_rate(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum ProblemConfig {
    Budget(BudgetProblemConfig),
    Operational(OperationalProblemConfig),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct RunConfig {
    pub version: u32,
    #[serde(default)]
    pub ga: GaConfig,
    pub problem: ProblemConfig,
}

impl RunConfig {
    /// Operational run on the bundled demo with default settings.
    pub fn demo_operational(seed: u64) -> Self {
        Self {
            version: RUN_CONFIG_VERSION,
            ga: GaConfig {
                rng_seed: seed,
                ..GaConfig::default()
            },
            problem: ProblemConfig::Operational(OperationalProblemConfig::default()),
        }
    }
}

/// Search on `2n` dimensionless investment and tax levels.
#[derive(Debug, Clone)]
pub struct BudgetProblem {
    pub scenario: MultiYearScenario,
    pub frame: Frame,
    pub cv: CharacteristicValues,
    pub constraints: ConstraintSet,
    pub spec: FitnessSpec,
}

impl BudgetProblem {
    pub fn new(
        cfg: &BudgetProblemConfig,
        resolver: &dyn ScenarioResolver,
    ) -> Result<Self, PipelineError> {
        let scenario = cfg.scenario.load(resolver)?;
        let (a, b) = (&cfg.anchors.goal_investment, &cfg.anchors.goal_capacity);
        let (ta, tb) = (scenario.tax_levels(&a.taxes), scenario.tax_levels(&b.taxes));
        let anchors = AnchorPair::simulate(&scenario, (&a.investment, &ta), (&b.investment, &tb))?;
        let cv = characteristic_values(&anchors)?;
        let a1 = to_dimensionless(&a.investment, &ta, &cv);
        let a2 = to_dimensionless(&b.investment, &tb, &cv);
        let frame = build_frame(&a1, &a2)?;

        let f = &cfg.fitness;
        let n = scenario.years;
        let spec = FitnessSpec {
            target_investment: f
                .target_investment
                .clone()
                .unwrap_or_else(|| a1[..n].to_vec()),
            target_capacity: f.target_capacity.clone().unwrap_or_else(|| {
                DimensionlessSolution::from_solution(&anchors.goal_capacity, &cv).capacities
            }),
            pattern: f
                .pattern
                .clone()
                .unwrap_or_else(|| TaxEvolutionPattern::uniform(n)),
            weights: f.weights,
            decay: f.decay,
            penalty_weight: f.penalty_weight,
            penalty_rate: f.penalty_rate,
        };
        spec.validate()?;
        let constraints = ConstraintSet::from_physical(
            cfg.constraints.c_max_years,
            cfg.constraints.max_tax_growth,
            scenario.base_tax,
            &cv,
        );
        Ok(Self {
            scenario,
            frame,
            cv,
            constraints,
            spec,
        })
    }

    /// Physical levels of a coding; negative amounts are cut to zero.
    pub fn physical(&self, p: &[f64]) -> (Vec<f64>, Vec<f64>) {
        let r: Vec<f64> = self
            .frame
            .p_to_r_values(p)
            .into_iter()
            .map(|v| v.max(0.0))
            .collect();
        from_dimensionless(&r, &self.cv)
    }

    fn simulate(&self, p: &[f64]) -> BudgetSolution {
        let (investment, taxes) = self.physical(p);
        simulate_multi_year(&self.scenario, &investment, &taxes)
            .expect("frame dimension matches the scenario horizon")
    }

    fn score(&self, sol: &BudgetSolution) -> Evaluation {
        let dim = DimensionlessSolution::from_solution(sol, &self.cv);
        Evaluation {
            score: penalized_fitness(&dim, &self.constraints, &self.spec),
            feasible: check_constraints(&dim, &self.constraints).is_feasible(),
        }
    }
}

impl Problem for BudgetProblem {
    fn dimension(&self) -> usize {
        self.frame.dimension()
    }

    fn evaluate(&self, p: &[f64]) -> Evaluation {
        self.score(&self.simulate(p))
    }
}

/// Search on the ten genes, read by [`decode_operational`].
#[derive(Debug, Clone)]
pub struct OperationalProblem {
    pub scenario: MultiYearScenario,
    pub frame: Frame,
    /// Only the capacity scale is used; it is the mean capacity of the two
    /// anchors as intended.
    pub cv: CharacteristicValues,
    /// Tax caps apply to levels in currency.
    pub constraints: ConstraintSet,
    pub spec: OperationalFitnessSpec,
    pub penalty_weight: f64,
    pub penalty_rate: f64,
}

impl OperationalProblem {
    pub fn new(
        cfg: &OperationalProblemConfig,
        resolver: &dyn ScenarioResolver,
    ) -> Result<Self, PipelineError> {
        let scenario = match &cfg.scenario {
            Some(r) => r.load(resolver)?,
            None => bundled_demo_scenario(),
        };
        check_operational_scenario(&scenario)?;
        let (v1, v2) = (&cfg.anchors.v1, &cfg.anchors.v2);
        for v in [v1, v2] {
            if v.len() != GENES {
                return Err(OperationalError::GeneCount(v.len()).into());
            }
        }
        let s1 = simulate_decoded(&scenario, &decode_operational(v1, true)?)?;
        let s2 = simulate_decoded(&scenario, &decode_operational(v2, true)?)?;
        let cv = characteristic_values(&AnchorPair {
            goal_investment: s1,
            goal_capacity: s2,
        })?;
        let cv = CharacteristicValues {
            capacity: cv.capacity,
            ..CharacteristicValues::UNIT
        };
        let frame = build_frame(v1, v2)?;
        let w = cfg.fitness.weight_sum();
        if (w - 1.0).abs() > 1e-9 {
            return Err(PipelineError::Config(format!(
                "operational weights sum to {w}, expected 1"
            )));
        }
        if !(cfg.penalty_weight >= 1.0) {
            return Err(FitnessError::PenaltyWeight(cfg.penalty_weight).into());
        }
        let constraints = ConstraintSet::from_physical(
            cfg.constraints.c_max_years,
            cfg.constraints.max_tax_growth,
            scenario.base_tax,
            &cv,
        );
        Ok(Self {
            scenario,
            frame,
            cv,
            constraints,
            spec: cfg.fitness,
            penalty_weight: cfg.penalty_weight,
            penalty_rate: cfg.penalty_rate,
        })
    }

    pub fn genes(&self, p: &[f64]) -> Vec<f64> {
        self.frame.p_to_r_values(p)
    }

    pub fn decode(&self, genes: &[f64]) -> OperationalDecode {
        decode_operational(genes, false).expect("frame has ten genes")
    }

    fn simulate(&self, decoded: &OperationalDecode) -> BudgetSolution {
        simulate_decoded(&self.scenario, decoded).expect("scenario checked at construction")
    }

    /// Penalized score of a decoded plan and its simulation.
    pub fn score(&self, decoded: &OperationalDecode, sim: &BudgetSolution) -> Evaluation {
        let dim = DimensionlessSolution::from_solution(sim, &self.cv);
        let report = check_constraints(&dim, &self.constraints);
        let fitness = fitness_operational(decoded, sim, &self.spec);
        Evaluation {
            score: fitness
                + penalty_from_slack(report.total(), self.penalty_weight, self.penalty_rate),
            feasible: report.is_feasible(),
        }
    }

    /// Score of a raw gene vector under the given decoding.
    pub fn evaluate_genes(
        &self,
        genes: &[f64],
        anchor_input: bool,
    ) -> Result<Evaluation, PipelineError> {
        let decoded = decode_operational(genes, anchor_input)?;
        Ok(self.score(&decoded, &self.simulate(&decoded)))
    }
}

impl Problem for OperationalProblem {
    fn dimension(&self) -> usize {
        GENES
    }

    fn evaluate(&self, p: &[f64]) -> Evaluation {
        let decoded = self.decode(&self.genes(p));
        let sim = self.simulate(&decoded);
        self.score(&decoded, &sim)
    }
}

/// A configuration turned into a ready-to-run problem.
#[derive(Debug, Clone)]
pub enum Prepared {
    Budget(Box<BudgetProblem>),
    Operational(Box<OperationalProblem>),
}

impl Problem for Prepared {
    fn dimension(&self) -> usize {
        match self {
            Self::Budget(p) => p.dimension(),
            Self::Operational(p) => p.dimension(),
        }
    }

    fn evaluate(&self, p: &[f64]) -> Evaluation {
        match self {
            Self::Budget(b) => b.evaluate(p),
            Self::Operational(o) => o.evaluate(p),
        }
    }
}

pub fn prepare(
    config: &RunConfig,
    resolver: &dyn ScenarioResolver,
) -> Result<Prepared, PipelineError> {
    if config.version != RUN_CONFIG_VERSION {
        return Err(PipelineError::Version(config.version));
    }
    config.ga.validate()?;
    Ok(match &config.problem {
        ProblemConfig::Budget(b) => Prepared::Budget(Box::new(BudgetProblem::new(b, resolver)?)),
        ProblemConfig::Operational(o) => {
            Prepared::Operational(Box::new(OperationalProblem::new(o, resolver)?))
        }
    })
}

/// One final member in physical terms.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SolutionReport {
    pub score: f64,
    pub feasible: bool,
    pub p_coding: Coding,
    pub r_coding: Coding,
    pub investment: Vec<f64>,
    /// Tax levels in currency.
    pub taxes: Vec<f64>,
    pub budget: BudgetSolution,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub operational: Option<OperationalDecode>,
}

impl Prepared {
    pub fn report(&self, p: &[f64]) -> SolutionReport {
        let p_coding = Coding::p(p.to_vec());
        match self {
            Self::Budget(b) => {
                let budget = b.simulate(p);
                let eval = b.score(&budget);
                SolutionReport {
                    score: eval.score,
                    feasible: eval.feasible,
                    r_coding: b.frame.p_to_r(&p_coding),
                    p_coding,
                    investment: budget.investment.clone(),
                    taxes: budget.taxes.clone(),
                    budget,
                    operational: None,
                }
            }
            Self::Operational(o) => {
                let genes = o.genes(p);
                let decoded = o.decode(&genes);
                let budget = o.simulate(&decoded);
                let eval = o.score(&decoded, &budget);
                SolutionReport {
                    score: eval.score,
                    feasible: eval.feasible,
                    p_coding,
                    r_coding: Coding::r(genes),
                    investment: budget.investment.clone(),
                    taxes: budget.taxes.clone(),
                    budget,
                    operational: Some(decoded),
                }
            }
        }
    }
}

/// Resizes every member to a physical budget, best score first (stable for
/// equal scores).
pub fn resize_results(prepared: &Prepared, population: &Population) -> Vec<SolutionReport> {
    let mut out: Vec<SolutionReport> = population
        .members
        .iter()
        .map(|m| prepared.report(&m.coding))
        .collect();
    out.sort_by(|a, b| b.score.total_cmp(&a.score));
    out
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunOutcome {
    pub trace: Vec<GenerationStats>,
    pub results: Vec<SolutionReport>,
    pub cancelled: bool,
}

pub fn execute(
    config: &RunConfig,
    resolver: &dyn ScenarioResolver,
    sink: &mut dyn ProgressSink,
) -> Result<RunOutcome, PipelineError> {
    let prepared = prepare(config, resolver)?;
    execute_prepared(&prepared, &config.ga, sink)
}

pub fn execute_prepared(
    prepared: &Prepared,
    ga_cfg: &GaConfig,
    sink: &mut dyn ProgressSink,
) -> Result<RunOutcome, PipelineError> {
    let result = ga::run(prepared, ga_cfg, sink)?;
    Ok(RunOutcome {
        results: resize_results(prepared, &result.population),
        trace: result.trace,
        cancelled: result.cancelled,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::ga::NoProgress;

    fn budget_config() -> RunConfig {
        let scenario = bundled_demo_scenario();
        let plan = |inv: f64, rate: f64| BudgetPlan {
            investment: vec![inv; 5],
            taxes: vec![rate; 5],
        };
        RunConfig {
            version: 1,
            ga: GaConfig {
                population_size: 12,
                generations: 5,
                rng_seed: 9,
                ..GaConfig::default()
            },
            problem: ProblemConfig::Budget(BudgetProblemConfig {
                scenario: ScenarioRef::Inline(Box::new(scenario)),
                anchors: BudgetAnchors {
                    goal_investment: plan(20.0, 0.04),
                    goal_capacity: plan(12.0, 0.02),
                },
                fitness: BudgetFitnessConfig::default(),
                // a 7% cap on levels rejects nearly all of this wide box
                constraints: PhysicalConstraints {
                    c_max_years: Some(40.0),
                    max_tax_growth: None,
                },
            }),
        }
    }

    #[test]
    fn config_defaults_from_minimal_json() {
        let cfg: RunConfig =
            serde_json::from_str(r#"{"version":1,"problem":{"kind":"operational"}}"#).unwrap();
        assert_eq!(cfg, RunConfig::demo_operational(0));
        let none: PhysicalConstraints = serde_json::from_str(r#"{"c_max_years":null}"#).unwrap();
        assert_eq!(none.c_max_years, None);
        assert_eq!(none.max_tax_growth, Some(0.07));
    }

    #[test]
    fn named_scenario_needs_resolver() {
        let cfg: RunConfig = serde_json::from_str(
            r#"{"version":1,"problem":{"kind":"operational","scenario":"demo"}}"#,
        )
        .unwrap();
        assert!(matches!(
            prepare(&cfg, &InlineOnly),
            Err(PipelineError::Scenario(..))
        ));
        let resolver = |name: &str| {
            if name == "demo" {
                Ok(bundled_demo_scenario())
            } else {
                Err("missing".to_string())
            }
        };
        assert!(prepare(&cfg, &resolver).is_ok());
    }

    #[test]
    fn wrong_version_rejected() {
        let mut cfg = RunConfig::demo_operational(1);
        cfg.version = 2;
        assert!(matches!(
            prepare(&cfg, &InlineOnly),
            Err(PipelineError::Version(2))
        ));
    }

    #[test]
    fn anchor_codings_resize_to_anchor_budgets() {
        let cfg = budget_config();
        let Prepared::Budget(b) = prepare(&cfg, &InlineOnly).unwrap() else {
            unreachable!()
        };
        let prepared = Prepared::Budget(b.clone());
        let rep = prepared.report(&[-0.5, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0, 0.0]);
        for v in &rep.investment {
            assert!((v - 20.0).abs() < 1e-9, "{v}");
        }
        let expected = b.scenario.tax_levels(&[0.04; 5]);
        for (t, e) in rep.taxes.iter().zip(&expected) {
            assert!((t - e).abs() < 1e-9);
        }
        assert_eq!(rep.r_coding.kind, crate::frame::CodingKind::R);
    }

    #[test]
    fn budget_run_reports_sorted_and_reevaluates() {
        let cfg = budget_config();
        let prepared = prepare(&cfg, &InlineOnly).unwrap();
        let out = execute_prepared(&prepared, &cfg.ga, &mut NoProgress).unwrap();
        assert_eq!(out.results.len(), 12);
        assert_eq!(out.trace.len(), 6);
        assert!(out.results.windows(2).all(|w| w[0].score >= w[1].score));
        for r in &out.results {
            assert_eq!(prepared.evaluate(&r.p_coding.values).score, r.score);
        }
    }

    #[test]
    fn operational_anchor_scores() {
        let o = OperationalProblem::new(&OperationalProblemConfig::default(), &InlineOnly).unwrap();
        let (v1, v2) = anchor_vectors();
        assert!(o.evaluate_genes(&v1, true).unwrap().feasible);
        assert!(!o.evaluate_genes(&v1, false).unwrap().feasible);
        assert!(o.evaluate_genes(&v2, false).unwrap().feasible);
        // the anchors sit at P1 = -1/2 and +1/2
        let p1 = o.frame.r_to_p_values(&v1);
        assert!((p1[0] + 0.5).abs() < 1e-12);
    }

    #[test]
    fn infeasible_init_is_flagged() {
        let mut cfg = RunConfig::demo_operational(3);
        if let ProblemConfig::Operational(o) = &mut cfg.problem {
            o.constraints.c_max_years = Some(0.5);
        }
        cfg.ga.init_draws_per_member = 2;
        let err = execute(&cfg, &InlineOnly, &mut NoProgress).unwrap_err();
        assert!(err.is_infeasible_init());
    }
}
