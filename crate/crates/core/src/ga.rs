//! Genetic-like search over P-codings of the box.
//!
//! One generation: random pairing and single-point crossover, component
//! mutation of the children, evaluation of the `2N` pool, then elitist +
//! roulette selection back to `N` members. Every random draw happens in the
//! sequential loop from a single seeded ChaCha stream, so a run is fully
//! determined by its configuration and seed.

use rand::seq::SliceRandom;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};
use thiserror::Error;

use crate::frame::{box_half_width, clamp_to_box, in_box};

/// Floor of the roulette weights.
pub const ROULETTE_EPSILON: f64 = 1e-9;

pub type GaRng = ChaCha8Rng;

#[derive(Debug, Error, PartialEq)]
pub enum GaError {
    #[error("invalid GA configuration: {0}")]
    Config(String),
    #[error(
        "initial population infeasible: {accepted} of {needed} feasible members after {draws} draws (feasibility ratio {ratio:.2e})"
    )]
    InfeasibleInit {
        accepted: usize,
        needed: usize,
        draws: usize,
        ratio: f64,
    },
}

#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MutationStyle {
    /// Each child mutates with probability `mutation_rate`.
    #[default]
    Rate,
    /// A uniform number of children in `0..=N/50` mutates.
    Count,
}

fn default_population() -> usize {
    50
}
fn default_generations() -> usize {
    100
}
fn default_crossover() -> f64 {
    0.75
}
fn default_mutation() -> f64 {
    0.1
}
fn default_true() -> bool {
    true
}
fn default_init_budget() -> usize {
    10_000
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GaConfig {
    #[serde(default = "default_population")]
    pub population_size: usize,
    #[serde(default = "default_generations")]
    pub generations: usize,
    #[serde(default = "default_crossover")]
    pub crossover_rate: f64,
    #[serde(default = "default_mutation")]
    pub mutation_rate: f64,
    #[serde(default)]
    pub mutation_style: MutationStyle,
    /// Members kept deterministically; `None` means half the population.
    #[serde(default)]
    pub elite_count: Option<usize>,
    #[serde(default)]
    pub rng_seed: u64,
    #[serde(default = "default_true")]
    pub clamp_to_box: bool,
    #[serde(default)]
    pub shuffle_after_selection: bool,
    /// Rejection-sampling budget per requested member.
    #[serde(default = "default_init_budget")]
    pub init_draws_per_member: usize,
}

impl Default for GaConfig {
    fn default() -> Self {
        Self {
            population_size: default_population(),
            generations: default_generations(),
            crossover_rate: default_crossover(),
            mutation_rate: default_mutation(),
            mutation_style: MutationStyle::Rate,
            elite_count: None,
            rng_seed: 0,
            clamp_to_box: true,
            shuffle_after_selection: false,
            init_draws_per_member: default_init_budget(),
        }
    }
}

impl GaConfig {
    pub fn elites(&self) -> usize {
        self.elite_count.unwrap_or(self.population_size / 2)
    }

    pub fn validate(&self) -> Result<(), GaError> {
        let bad = |m: String| Err(GaError::Config(m));
        if self.population_size < 2 {
            return bad(format!(
                "population_size must be >= 2 (got {})",
                self.population_size
            ));
        }
        for (name, r) in [
            ("crossover_rate", self.crossover_rate),
            ("mutation_rate", self.mutation_rate),
        ] {
            if !(0.0..=1.0).contains(&r) {
                return bad(format!("{name} must lie in [0,1] (got {r})"));
            }
        }
        if self.elites() > self.population_size {
            return bad(format!(
                "elite_count {} exceeds population_size {}",
                self.elites(),
                self.population_size
            ));
        }
        if self.init_draws_per_member == 0 {
            return bad("init_draws_per_member must be positive".into());
        }
        Ok(())
    }
}

/// Score of one coding.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Evaluation {
    /// Penalized fitness; larger is better.
    pub score: f64,
    pub feasible: bool,
}

/// What the engine optimizes: a penalized fitness over P-codings.
pub trait Problem: Sync {
    fn dimension(&self) -> usize;
    fn evaluate(&self, p: &[f64]) -> Evaluation;
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Member {
    pub coding: Vec<f64>,
    pub score: f64,
    pub feasible: bool,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Population {
    pub members: Vec<Member>,
    pub generation: usize,
}

impl Population {
    pub fn stats(&self) -> GenerationStats {
        let n = self.members.len() as f64;
        GenerationStats {
            generation: self.generation,
            best: self
                .members
                .iter()
                .map(|m| m.score)
                .fold(f64::NEG_INFINITY, f64::max),
            mean: self.members.iter().map(|m| m.score).sum::<f64>() / n,
            feasible_count: self.members.iter().filter(|m| m.feasible).count(),
        }
    }

    pub fn best(&self) -> Option<&Member> {
        self.members
            .iter()
            .reduce(|a, b| if b.score > a.score { b } else { a })
    }
}

/// Progress of one generation; also the event streamed to observers.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct GenerationStats {
    pub generation: usize,
    pub best: f64,
    pub mean: f64,
    pub feasible_count: usize,
}

/// Receives per-generation progress and may ask the run to stop.
pub trait ProgressSink {
    fn on_generation(&mut self, stats: &GenerationStats);
    fn cancelled(&self) -> bool {
        false
    }
}

pub struct NoProgress;

impl ProgressSink for NoProgress {
    fn on_generation(&mut self, _: &GenerationStats) {}
}

impl<F: FnMut(&GenerationStats)> ProgressSink for F {
    fn on_generation(&mut self, stats: &GenerationStats) {
        self(stats)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RunResult {
    pub population: Population,
    pub trace: Vec<GenerationStats>,
    pub cancelled: bool,
}

pub fn sample_in_box(dim: usize, rng: &mut GaRng) -> Vec<f64> {
    (0..dim)
        .map(|i| {
            let h = box_half_width(i);
            rng.random_range(-h..=h)
        })
        .collect()
}

/// Draws uniform points of the box until `N` feasible ones are found.
pub fn init_population<P: Problem + ?Sized>(
    problem: &P,
    cfg: &GaConfig,
    rng: &mut GaRng,
) -> Result<Population, GaError> {
    let n = cfg.population_size;
    let budget = cfg.init_draws_per_member.saturating_mul(n);
    let mut members = Vec::with_capacity(n);
    let mut draws = 0;
    while members.len() < n {
        if draws == budget {
            return Err(GaError::InfeasibleInit {
                accepted: members.len(),
                needed: n,
                draws,
                ratio: members.len() as f64 / draws as f64,
            });
        }
        draws += 1;
        let coding = sample_in_box(problem.dimension(), rng);
        let eval = problem.evaluate(&coding);
        if eval.feasible {
            members.push(Member {
                coding,
                score: eval.score,
                feasible: true,
            });
        }
    }
    Ok(Population {
        members,
        generation: 0,
    })
}

/// Single-point crossover with a cut drawn uniformly in `1..=d` (1-based):
/// the children keep their own head before the cut and take the other's tail.
pub fn crossover(a: &[f64], b: &[f64], rng: &mut GaRng) -> (Vec<f64>, Vec<f64>) {
    let cut = rng.random_range(1..=a.len());
    crossover_at(a, b, cut)
}

pub fn crossover_at(a: &[f64], b: &[f64], cut: usize) -> (Vec<f64>, Vec<f64>) {
    let k = cut - 1;
    let c1 = a[..k].iter().chain(&b[k..]).copied().collect();
    let c2 = b[..k].iter().chain(&a[k..]).copied().collect();
    (c1, c2)
}

/// Adds a uniform draw in `[-1, 1]` to one uniformly chosen component.
pub fn mutate_component(coding: &mut [f64], rng: &mut GaRng) {
    let idx = rng.random_range(0..coding.len());
    let nu: f64 = rng.random_range(-1.0..=1.0);
    coding[idx] += nu;
}

/// Applies the configured mutation policy to a batch of children.
pub fn mutate_children(children: &mut [Vec<f64>], cfg: &GaConfig, rng: &mut GaRng) {
    match cfg.mutation_style {
        MutationStyle::Rate => {
            for child in children.iter_mut() {
                if rng.random_bool(cfg.mutation_rate) {
                    mutate_component(child, rng);
                }
            }
        }
        MutationStyle::Count => {
            let max = cfg.population_size / 50;
            let count = rng.random_range(0..=max).min(children.len());
            let mut idx: Vec<usize> = (0..children.len()).collect();
            idx.shuffle(rng);
            for &i in &idx[..count] {
                mutate_component(&mut children[i], rng);
            }
        }
    }
}

/// Keeps the `elites` best members (ties to the lower index) and fills the
/// rest by fitness-proportional sampling without replacement.
pub fn select(pool: &[Member], n: usize, elites: usize, rng: &mut GaRng) -> Vec<Member> {
    let mut order: Vec<usize> = (0..pool.len()).collect();
    order.sort_by(|&i, &j| pool[j].score.total_cmp(&pool[i].score).then(i.cmp(&j)));
    let elites = elites.min(n);
    let mut chosen: Vec<usize> = order[..elites].to_vec();
    let mut remaining: Vec<usize> = order[elites..].to_vec();
    remaining.sort_unstable();

    let min_score = pool.iter().map(|m| m.score).fold(f64::INFINITY, f64::min);
    let weight = |m: &Member| (m.score - min_score + ROULETTE_EPSILON).max(ROULETTE_EPSILON);
    while chosen.len() < n && !remaining.is_empty() {
        let total: f64 = remaining.iter().map(|&i| weight(&pool[i])).sum();
        let mut target = rng.random::<f64>() * total;
        let mut pick = remaining.len() - 1;
        for (pos, &i) in remaining.iter().enumerate() {
            target -= weight(&pool[i]);
            if target < 0.0 {
                pick = pos;
                break;
            }
        }
        chosen.push(remaining.remove(pick));
    }
    chosen.into_iter().map(|i| pool[i].clone()).collect()
}

/// Produces generation `m + 1` from generation `m`.
pub fn next_generation<P: Problem + ?Sized>(
    problem: &P,
    population: &Population,
    cfg: &GaConfig,
    rng: &mut GaRng,
) -> Population {
    let parents = &population.members;
    let n = parents.len();

    let mut order: Vec<usize> = (0..n).collect();
    order.shuffle(rng);
    let mut children: Vec<Vec<f64>> = Vec::with_capacity(n);
    for pair in order.chunks(2) {
        match *pair {
            [i, j] => {
                if rng.random_bool(cfg.crossover_rate) {
                    let (c1, c2) = crossover(&parents[i].coding, &parents[j].coding, rng);
                    children.push(c1);
                    children.push(c2);
                } else {
                    children.push(parents[i].coding.clone());
                    children.push(parents[j].coding.clone());
                }
            }
            [i] => children.push(parents[i].coding.clone()),
            _ => unreachable!(),
        }
    }

    mutate_children(&mut children, cfg, rng);
    if cfg.clamp_to_box {
        children.iter_mut().for_each(|c| clamp_to_box(c));
    }

    let mut pool: Vec<Member> = parents.clone();
    pool.extend(children.into_iter().map(|coding| {
        let eval = problem.evaluate(&coding);
        Member {
            coding,
            score: eval.score,
            feasible: eval.feasible,
        }
    }));

    let mut members = select(&pool, n, cfg.elites(), rng);
    if cfg.shuffle_after_selection {
        members.shuffle(rng);
    }
    Population {
        members,
        generation: population.generation + 1,
    }
}

/// Full run: initialization, then `cfg.generations` generations. The sink
/// sees generation 0 and every later one; cancellation is checked between
/// generations.
pub fn run<P: Problem + ?Sized>(
    problem: &P,
    cfg: &GaConfig,
    sink: &mut dyn ProgressSink,
) -> Result<RunResult, GaError> {
    cfg.validate()?;
    let mut rng = GaRng::seed_from_u64(cfg.rng_seed);
    let mut population = init_population(problem, cfg, &mut rng)?;
    let mut trace = vec![population.stats()];
    sink.on_generation(&trace[0]);
    let mut cancelled = false;
    for _ in 0..cfg.generations {
        if sink.cancelled() {
            cancelled = true;
            break;
        }
        population = next_generation(problem, &population, cfg, &mut rng);
        let stats = population.stats();
        sink.on_generation(&stats);
        trace.push(stats);
    }
    Ok(RunResult {
        population,
        trace,
        cancelled,
    })
}

/// Fraction of members inside the box.
pub fn in_box_fraction(population: &Population) -> f64 {
    let inside = population
        .members
        .iter()
        .filter(|m| in_box(&m.coding))
        .count();
    inside as f64 / population.members.len() as f64
}
