//! `altbudget` command line.
//!
//! Exit status: 0 on success, 1 on I/O failures, 2 on malformed or invalid
//! input (argument errors included), 3 when no feasible initial population
//! could be drawn.

use std::ffi::OsString;
use std::fmt::Write as _;
use std::io::Write;
use std::path::{Path, PathBuf};

use altbudget_core::budget::{simulate_multi_year, BudgetSolution, MultiYearScenario};
use altbudget_core::ga::{GaConfig, GenerationStats, NoProgress, ProgressSink};
use altbudget_core::operational::anchor_vectors;
use altbudget_core::pipeline::{
    execute, OperationalProblem, OperationalProblemConfig, PipelineError, ProblemConfig, RunConfig,
    ScenarioResolver, SolutionReport,
};
use altbudget_core::testbed::{run_1d, testbed_config, Curve1D, CurveKind, PLATEAU};
use clap::{Parser, Subcommand};
use serde::de::DeserializeOwned;

use crate::store::{RunRecord, RunStatus};

#[derive(Debug, Parser)]
#[command(
    name = "altbudget",
    version,
    about = "Search for alternative multi-year budgets"
)]
pub struct Cli {
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Simulate a scenario for given investments and taxes (n values each,
    /// taxes in the scenario's tax mode) and print the yearly lines.
    Simulate {
        scenario: PathBuf,
        #[arg(allow_negative_numbers = true, num_args = 0..)]
        values: Vec<f64>,
        /// Print the solution as JSON instead of a table.
        #[arg(long)]
        json: bool,
    },
    /// Run the search described by a run configuration file.
    Run {
        config: PathBuf,
        /// Write the full run record here.
        #[arg(long)]
        out: Option<PathBuf>,
        /// Write only the sorted solutions here.
        #[arg(long)]
        results: Option<PathBuf>,
        /// Override the configured seed.
        #[arg(long)]
        seed: Option<u64>,
        /// No per-generation progress on stderr.
        #[arg(long, short)]
        quiet: bool,
    },
    /// Search one of the 1-D verification curves and print the final population.
    #[command(name = "demo-1d")]
    Demo1d {
        curve: CurveKind,
        #[arg(long, default_value_t = 42)]
        seed: u64,
        #[arg(long, default_value_t = 500)]
        generations: usize,
        #[arg(long, default_value_t = 35)]
        population: usize,
        /// Also write the points as CSV.
        #[arg(long)]
        csv: Option<PathBuf>,
    },
    /// Ten-gene search on the bundled demo scenario.
    #[command(name = "demo-operational")]
    DemoOperational {
        #[arg(long, default_value_t = 0)]
        seed: u64,
        #[arg(long, default_value_t = 100)]
        generations: usize,
        #[arg(long, default_value_t = 50)]
        population: usize,
        /// How many of the best solutions to print.
        #[arg(long, default_value_t = 3)]
        top: usize,
    },
    /// Serve the HTTP API.
    Serve {
        #[arg(long, default_value_t = 8080)]
        port: u16,
        #[arg(long, default_value = "127.0.0.1")]
        host: String,
        #[arg(long, env = "ALTBUDGET_DATA_DIR", default_value = "data")]
        data_dir: PathBuf,
        /// Runs executed at the same time.
        #[arg(long, default_value_t = 1)]
        workers: usize,
    },
}

#[derive(Debug)]
pub struct CliError {
    pub code: i32,
    pub message: String,
}

impl CliError {
    fn usage(message: impl Into<String>) -> Self {
        Self {
            code: 2,
            message: message.into(),
        }
    }

    fn io(path: &Path, e: std::io::Error) -> Self {
        Self {
            code: 1,
            message: format!("{}: {e}", path.display()),
        }
    }
}

impl From<PipelineError> for CliError {
    fn from(e: PipelineError) -> Self {
        Self {
            code: if e.is_infeasible_init() { 3 } else { 2 },
            message: e.to_string(),
        }
    }
}

type CliResult = Result<(), CliError>;

/// Parses arguments and runs the command. Returns the exit status.
pub fn run<I, T>(args: I, out: &mut dyn Write, err: &mut dyn Write) -> i32
where
    I: IntoIterator<Item = T>,
    T: Into<OsString> + Clone,
{
    let cli = match Cli::try_parse_from(args) {
        Ok(c) => c,
        Err(e) => {
            let code = e.exit_code();
            let _ = if e.use_stderr() {
                write!(err, "{}", e.render())
            } else {
                write!(out, "{}", e.render())
            };
            return code;
        }
    };
    match dispatch(cli.command, out, err) {
        Ok(()) => 0,
        Err(e) => {
            let _ = writeln!(err, "error: {}", e.message);
            e.code
        }
    }
}

fn dispatch(cmd: Command, out: &mut dyn Write, err: &mut dyn Write) -> CliResult {
    match cmd {
        Command::Simulate {
            scenario,
            values,
            json,
        } => simulate(&scenario, &values, json, out),
        Command::Run {
            config,
            out: record,
            results,
            seed,
            quiet,
        } => run_config(
            &config,
            record.as_deref(),
            results.as_deref(),
            seed,
            quiet,
            out,
            err,
        ),
        Command::Demo1d {
            curve,
            seed,
            generations,
            population,
            csv,
        } => demo_1d(curve, seed, generations, population, csv.as_deref(), out),
        Command::DemoOperational {
            seed,
            generations,
            population,
            top,
        } => demo_operational(seed, generations, population, top, out),
        Command::Serve {
            port,
            host,
            data_dir,
            workers,
        } => serve(&host, port, &data_dir, workers),
    }
}

fn read_json<T: DeserializeOwned>(path: &Path) -> Result<T, CliError> {
    let bytes = std::fs::read(path).map_err(|e| CliError::io(path, e))?;
    let de = &mut serde_json::Deserializer::from_slice(&bytes);
    serde_path_to_error::deserialize(de).map_err(|e| {
        CliError::usage(format!(
            "{}: at {}: {}",
            path.display(),
            e.path(),
            e.inner()
        ))
    })
}

fn write_json<T: serde::Serialize>(path: &Path, value: &T) -> CliResult {
    let mut bytes = serde_json::to_vec_pretty(value).map_err(|e| CliError::usage(e.to_string()))?;
    bytes.push(b'\n');
    std::fs::write(path, bytes).map_err(|e| CliError::io(path, e))
}

fn io_out(e: std::io::Error) -> CliError {
    CliError {
        code: 1,
        message: format!("writing output: {e}"),
    }
}

fn simulate(path: &Path, values: &[f64], json: bool, out: &mut dyn Write) -> CliResult {
    let scenario: MultiYearScenario = read_json(path)?;
    scenario
        .validate()
        .map_err(|e| CliError::usage(format!("{}: {e}", path.display())))?;
    let n = scenario.years;
    if values.len() != 2 * n {
        return Err(CliError::usage(format!(
            "expected {} values ({n} investments then {n} taxes), got {}",
            2 * n,
            values.len()
        )));
    }
    let taxes = scenario.tax_levels(&values[n..]);
    let sol = simulate_multi_year(&scenario, &values[..n], &taxes)
        .map_err(|e| CliError::usage(e.to_string()))?;
    if json {
        let s = serde_json::to_string_pretty(&sol).map_err(|e| CliError::usage(e.to_string()))?;
        writeln!(out, "{s}").map_err(io_out)
    } else {
        write!(out, "{}", solution_table(&sol)).map_err(io_out)
    }
}

/// Yearly lines of a solution as an aligned table.
pub fn solution_table(sol: &BudgetSolution) -> String {
    let mut s = String::new();
    let _ = writeln!(
        s,
        "{:>4} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9} {:>9} {:>7}",
        "year",
        "tax",
        "invest",
        "recipes",
        "expend",
        "interest",
        "gross",
        "capital",
        "net",
        "loan",
        "reserve",
        "debt",
        "CDD"
    );
    for (i, (y, c)) in sol.years.iter().zip(&sol.capacities).enumerate() {
        let cdd = if c.is_finite() {
            format!("{c:.2}")
        } else {
            "inf".into()
        };
        let _ = writeln!(
            s,
            "{:>4} {:>9.2} {:>9.2} {:>9.2} {:>9.2} {:>9.2} {:>9.2} {:>9.2} {:>9.2} {:>9.2} {:>9.2} {:>9.2} {:>7}",
            i + 1,
            y.tax,
            y.investment,
            y.operating_recipes,
            y.operating_expenditures,
            y.interest,
            y.gross_sfc,
            y.capital_repayment,
            y.net_sfc,
            y.new_loan,
            y.reserve,
            y.remaining_capital,
            cdd
        );
    }
    s
}

/// Named scenarios in a config file are paths relative to that file.
struct FileResolver {
    base: PathBuf,
}

impl ScenarioResolver for FileResolver {
    fn resolve(&self, name: &str) -> Result<MultiYearScenario, String> {
        let path = self.base.join(name);
        let text = std::fs::read(&path).map_err(|e| format!("{}: {e}", path.display()))?;
        serde_json::from_slice(&text).map_err(|e| format!("{}: {e}", path.display()))
    }
}

struct StderrProgress<'a> {
    err: &'a mut dyn Write,
    every: usize,
}

impl ProgressSink for StderrProgress<'_> {
    fn on_generation(&mut self, s: &GenerationStats) {
        if s.generation.is_multiple_of(self.every) {
            let _ = writeln!(
                self.err,
                "generation {:>5}  best {:.6}  mean {:.6}  feasible {}",
                s.generation, s.best, s.mean, s.feasible_count
            );
        }
    }
}

fn describe_solution(rank: usize, r: &SolutionReport) -> String {
    let mut s = format!("#{rank}  score {:.6}  feasible {}\n", r.score, r.feasible);
    if let Some(d) = &r.operational {
        let _ = writeln!(s, "{}", d.describe());
    } else {
        let fmt = |v: &[f64]| {
            v.iter()
                .map(|x| format!("{x:.2}"))
                .collect::<Vec<_>>()
                .join(", ")
        };
        let _ = writeln!(s, "Investment : {}", fmt(&r.investment));
        let _ = writeln!(s, "Tax        : {}", fmt(&r.taxes));
    }
    let cdd: Vec<String> = r
        .budget
        .capacities
        .iter()
        .map(|c| {
            if c.is_finite() {
                format!("{c:.2}")
            } else {
                "inf".into()
            }
        })
        .collect();
    let _ = writeln!(s, "CDD (years) : {}", cdd.join(", "));
    s
}

fn run_config(
    path: &Path,
    record_path: Option<&Path>,
    results_path: Option<&Path>,
    seed: Option<u64>,
    quiet: bool,
    out: &mut dyn Write,
    err: &mut dyn Write,
) -> CliResult {
    let mut config: RunConfig = read_json(path)?;
    if let Some(seed) = seed {
        config.ga.rng_seed = seed;
    }
    let resolver = FileResolver {
        base: path.parent().map(Path::to_path_buf).unwrap_or_default(),
    };
    let mut record = RunRecord::new(config.clone());
    record.advance(RunStatus::Running);
    let every = (config.ga.generations / 20).max(1);
    let outcome = if quiet {
        execute(&config, &resolver, &mut NoProgress)?
    } else {
        execute(&config, &resolver, &mut StderrProgress { err, every })?
    };
    record.trace = outcome.trace;
    record.results = outcome.results;
    record.advance(RunStatus::Done);

    if let Some(p) = record_path {
        write_json(p, &record)?;
    }
    if let Some(p) = results_path {
        write_json(p, &record.results)?;
    }
    for (i, r) in record.results.iter().take(3).enumerate() {
        write!(out, "{}", describe_solution(i + 1, r)).map_err(io_out)?;
    }
    Ok(())
}

fn demo_1d(
    curve: CurveKind,
    seed: u64,
    generations: usize,
    population: usize,
    csv: Option<&Path>,
    out: &mut dyn Write,
) -> CliResult {
    let cfg = GaConfig {
        generations,
        population_size: population,
        ..testbed_config(seed)
    };
    let run = run_1d(Curve1D::new(curve), &cfg, &mut NoProgress)
        .map_err(|e| CliError::usage(e.to_string()))?;
    let mut text = run.table();
    match curve {
        CurveKind::Plateau => {
            let _ = writeln!(
                text,
                "on plateau [{}, {}]: {:.1}%",
                PLATEAU.0,
                PLATEAU.1,
                100.0 * run.plateau_fraction(1e-3)
            );
        }
        CurveKind::Single => {
            let _ = writeln!(text, "median x: {:.4}", run.median_x());
        }
    }
    write!(out, "{text}").map_err(io_out)?;
    if let Some(p) = csv {
        std::fs::write(p, run.csv()).map_err(|e| CliError::io(p, e))?;
    }
    Ok(())
}

fn demo_operational(
    seed: u64,
    generations: usize,
    population: usize,
    top: usize,
    out: &mut dyn Write,
) -> CliResult {
    let mut config = RunConfig::demo_operational(seed);
    config.ga.generations = generations;
    config.ga.population_size = population;
    let problem_cfg = match &config.problem {
        ProblemConfig::Operational(o) => o.clone(),
        ProblemConfig::Budget(_) => OperationalProblemConfig::default(),
    };
    let problem = OperationalProblem::new(&problem_cfg, &altbudget_core::pipeline::InlineOnly)?;
    let (v1, v2) = anchor_vectors();
    let mut text = String::new();
    for (name, genes) in [("v1", v1), ("v2", v2)] {
        let e = problem.evaluate_genes(&genes, true)?;
        let _ = writeln!(
            text,
            "anchor {name}: score {:.6}  feasible {}",
            e.score, e.feasible
        );
    }
    let outcome = execute(
        &config,
        &altbudget_core::pipeline::InlineOnly,
        &mut NoProgress,
    )?;
    let _ = writeln!(
        text,
        "{} generations, population {}, best {:.6}\n",
        generations,
        population,
        outcome.trace.last().map_or(f64::NAN, |s| s.best)
    );
    for (i, r) in outcome.results.iter().take(top).enumerate() {
        let _ = writeln!(text, "{}", describe_solution(i + 1, r));
    }
    write!(out, "{text}").map_err(io_out)
}

fn serve(host: &str, port: u16, data_dir: &Path, workers: usize) -> CliResult {
    let _ = tracing_subscriber::fmt()
        .with_writer(std::io::stderr)
        .try_init();
    let store = crate::store::Store::open(data_dir).map_err(|e| CliError::io(data_dir, e))?;
    let state = crate::api::AppState::new(store, workers).map_err(|e| CliError::io(data_dir, e))?;
    let rt = tokio::runtime::Runtime::new().map_err(|e| CliError {
        code: 1,
        message: e.to_string(),
    })?;
    rt.block_on(async move {
        let addr = format!("{host}:{port}");
        let listener = tokio::net::TcpListener::bind(&addr)
            .await
            .map_err(|e| CliError {
                code: 1,
                message: format!("bind {addr}: {e}"),
            })?;
        tracing::info!(%addr, data_dir = %data_dir.display(), "serving");
        axum::serve(listener, crate::api::router(state))
            .with_graceful_shutdown(async {
                let _ = tokio::signal::ctrl_c().await;
            })
            .await
            .map_err(|e| CliError {
                code: 1,
                message: e.to_string(),
            })
    })
}
