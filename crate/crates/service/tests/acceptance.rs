//! Acceptance criteria. Prints one PASS/FAIL line per criterion and exits
//! non-zero if any fails.

use std::time::{Duration, Instant};

use altbudget_core::budget::{
    simulate_multi_year, AmortizationStyle, Annuity, DebtState, ExogenousFinances, LoanTerms,
    MultiYearScenario, Project, ProjectCatalog, TaxMode, PRUDENTIAL_LIMIT_YEARS, SCENARIO_VERSION,
};
use altbudget_core::frame::build_frame;
use altbudget_core::ga::{GaRng, NoProgress};
use altbudget_core::operational::{anchor_vectors, decode_operational, GENES};
use altbudget_core::pipeline::{
    execute, InlineOnly, OperationalProblem, OperationalProblemConfig, RunConfig,
};
use altbudget_core::testbed::{
    fitness_plateau, fitness_single_max, run_1d, testbed_config, Curve1D, CurveKind, PLATEAU,
    PLATEAU_VALUE,
};
use altbudget_service::api::{router, AppState};
use altbudget_service::store::Store;
use axum::body::Body;
use axum::http::{Request, StatusCode};
use axum::Router;
use http_body_util::BodyExt;
use rand::{Rng, SeedableRng};
use tower::ServiceExt;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn plateau_reproduction() -> Outcome {
    let mut good = 0;
    let mut slowest = Duration::ZERO;
    let mut rows = Vec::new();
    for seed in 0..10 {
        let t = Instant::now();
        let run = run_1d(
            Curve1D::new(CurveKind::Plateau),
            &testbed_config(seed),
            &mut NoProgress,
        )
        .unwrap();
        let elapsed = t.elapsed();
        slowest = slowest.max(elapsed);
        let on: Vec<f64> = run.on_plateau(1e-3).map(|p| p.x).collect();
        let frac = on.len() as f64 / run.points.len() as f64;
        let span = on.iter().cloned().fold(f64::NEG_INFINITY, f64::max)
            - on.iter().cloned().fold(f64::INFINITY, f64::min);
        let ok = frac >= 0.8 && span >= 0.015 && elapsed < Duration::from_secs(10);
        good += ok as usize;
        rows.push(format!("seed {seed}: {:.0}% span {span:.4}", 100.0 * frac));
    }
    outcome(
        good >= 8,
        format!(
            "{good}/10 runs on [{}, {}] with spread; slowest {slowest:.2?}; {}",
            PLATEAU.0,
            PLATEAU.1,
            rows.join(", ")
        ),
    )
}

fn single_maximum() -> Outcome {
    let f = fitness_single_max(0.5);
    let mut good = 0;
    let mut medians = Vec::new();
    for seed in 0..10 {
        let run = run_1d(
            Curve1D::new(CurveKind::Single),
            &testbed_config(seed),
            &mut NoProgress,
        )
        .unwrap();
        let m = run.median_x();
        good += ((m - 0.5).abs() <= 0.02) as usize;
        medians.push(format!("{m:.4}"));
    }
    outcome(
        good >= 8 && (f - 0.925).abs() < 1e-12,
        format!(
            "{good}/10 medians within 0.02 of 0.5 [{}]; F(0.5) = {f}",
            medians.join(", ")
        ),
    )
}

fn plateau_spot_values() -> Outcome {
    let rows = [
        (0.489, 0.910),
        (0.534, 0.860),
        (0.435, 0.646),
        (1.471, 0.000),
    ];
    let worst = rows
        .iter()
        .map(|(x, f)| (fitness_plateau(*x) - f).abs())
        .fold(0.0, f64::max);
    let top = (fitness_plateau(0.5) - PLATEAU_VALUE).abs();
    outcome(
        worst <= 2e-3 && top < 1e-12,
        format!("largest deviation {worst:.2e}"),
    )
}

fn chromosome_decode() -> Outcome {
    let genes = [
        1.11266759532518,
        0.0838990704498006,
        0.565754259647956,
        0.440107396614116,
        0.813652694225311,
        0.642521321773529,
        0.575349082741285,
        0.447334636593206,
        0.488786454202292,
        0.990373758336907,
    ];
    let d = decode_operational(&genes, false).unwrap();
    let pct: Vec<String> = d
        .tax_rates
        .iter()
        .map(|r| format!("{:.2}", 100.0 * r))
        .collect();
    let projects_ok = d.projects == [false, false, true, false, true];
    let taxes_ok = pct == ["1.25", "1.53", "2.73", "6.88", "1.04"];
    let (v1, v2) = anchor_vectors();
    let a1 = decode_operational(&v1, true).unwrap();
    let a2 = decode_operational(&v2, true).unwrap();
    let anchors_ok = a1.projects.iter().all(|p| *p) && a2.projects.iter().all(|p| !*p);
    outcome(
        projects_ok && taxes_ok && anchors_ok,
        format!(
            "{} | v1 {} ON, v2 {} ON",
            d.describe().replace('\n', " | "),
            a1.active_count(),
            a2.active_count()
        ),
    )
}

fn frame_properties() -> Outcome {
    let mut rng = GaRng::seed_from_u64(2024);
    let (mut orth, mut anchor, mut round) = (0.0f64, 0.0f64, 0.0f64);
    for _ in 0..1000 {
        let d = rng.random_range(2..=20);
        let a1: Vec<f64> = (0..d).map(|_| rng.random_range(-10.0..10.0)).collect();
        let a2: Vec<f64> = (0..d).map(|_| rng.random_range(-10.0..10.0)).collect();
        let f = build_frame(&a1, &a2).unwrap();
        for j in 0..d {
            for k in 0..d {
                let dot: f64 = f.basis[j].iter().zip(&f.basis[k]).map(|(x, y)| x * y).sum();
                orth = orth.max((dot - if j == k { 1.0 } else { 0.0 }).abs());
            }
        }
        for (a, target) in [(&a1, -0.5), (&a2, 0.5)] {
            let p = f.r_to_p_values(a);
            anchor = anchor.max((p[0] - target).abs());
            anchor = p[1..].iter().fold(anchor, |m, v| m.max(v.abs()));
        }
        let p: Vec<f64> = (0..d)
            .map(|i| {
                let h = if i == 0 { 1.0 } else { 0.5 };
                rng.random_range(-h..=h)
            })
            .collect();
        let back = f.r_to_p_values(&f.p_to_r_values(&p));
        round = p
            .iter()
            .zip(&back)
            .fold(round, |m, (x, y)| m.max((x - y).abs()));
    }
    outcome(
        orth <= 1e-10 && anchor <= 1e-10 && round <= 1e-12,
        format!("max |BB^T - I| {orth:.1e}, anchor offset {anchor:.1e}, round trip {round:.1e}"),
    )
}

fn random_scenario(rng: &mut GaRng) -> MultiYearScenario {
    let n = rng.random_range(1..=8);
    let mut series = |lo: f64, hi: f64| {
        (0..n)
            .map(|_| rng.random_range(lo..hi))
            .collect::<Vec<f64>>()
    };
    let state_allocations = series(10.0, 60.0);
    let other_operating_recipes = series(0.0, 40.0);
    let operating_expenditures = series(40.0, 140.0);
    let subventions = series(0.0, 10.0);
    let costs = series(0.0, 30.0);
    let debt_years = rng.random_range(0..=12);
    let rate = rng.random_range(0.0..0.08);
    let mut outstanding = rng.random_range(0.0..150.0);
    let per_year = if debt_years > 0 {
        outstanding / debt_years as f64
    } else {
        0.0
    };
    let schedule = (1..=debt_years)
        .map(|year| {
            let a = Annuity {
                year,
                capital_due: per_year,
                interest_due: rate * outstanding,
            };
            outstanding -= per_year;
            a
        })
        .collect();
    MultiYearScenario {
        version: SCENARIO_VERSION,
        name: "random".into(),
        years: n,
        base_tax: rng.random_range(0.0..60.0),
        tax_mode: TaxMode::Levels,
        exogenous: ExogenousFinances {
            state_allocations,
            other_operating_recipes,
            operating_expenditures,
            subventions,
            loan_terms: LoanTerms {
                interest_rate: rng.random_range(0.0..0.1),
                maturity_years: rng.random_range(1..=25),
                amortization: if rng.random_bool(0.5) {
                    AmortizationStyle::LevelCapital
                } else {
                    AmortizationStyle::Annuity
                },
            },
        },
        debt: if debt_years > 0 {
            DebtState::from_schedule(schedule)
        } else {
            DebtState::none()
        },
        projects: ProjectCatalog {
            projects: vec![Project {
                name: "works".into(),
                cost_by_year: costs,
                priority: 1,
                always_on: true,
            }],
        },
        initial_reserve: rng.random_range(0.0..20.0),
    }
}

fn rel_close(a: f64, b: f64) -> bool {
    (a - b).abs() <= 1e-9 * a.abs().max(b.abs()).max(1.0)
}

fn budget_invariants() -> Outcome {
    let mut rng = GaRng::seed_from_u64(77);
    let mut failures = Vec::new();
    for case in 0..1000 {
        let s = random_scenario(&mut rng);
        if let Err(e) = s.validate() {
            failures.push(format!("case {case}: invalid scenario {e}"));
            continue;
        }
        let n = s.years;
        let inv: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..60.0)).collect();
        let tax: Vec<f64> = (0..n).map(|_| rng.random_range(0.0..80.0)).collect();
        let sol = simulate_multi_year(&s, &inv, &tax).unwrap();
        let mut remaining = s.debt.remaining_capital;
        for (i, y) in sol.years.iter().enumerate() {
            let lhs = y.net_sfc + y.subventions + y.new_loan + y.reserve_drawn;
            let rhs = y.investment + y.reserve;
            if !rel_close(lhs, rhs) {
                failures.push(format!(
                    "case {case} year {}: balance {lhs} vs {rhs}",
                    i + 1
                ));
            }
            let expected = remaining - y.capital_repayment + y.new_loan;
            if !rel_close(y.remaining_capital, expected) {
                failures.push(format!(
                    "case {case} year {}: debt {} vs {expected}",
                    i + 1,
                    y.remaining_capital
                ));
            }
            if y.new_loan < 0.0 || y.reserve < 0.0 {
                failures.push(format!(
                    "case {case} year {}: negative loan or reserve",
                    i + 1
                ));
            }
            remaining = y.remaining_capital;
        }
        if sol.capacities.iter().any(|c| c.is_nan() || *c < 0.0) {
            failures.push(format!(
                "case {case}: negative capacity {:?}",
                sol.capacities
            ));
        }
        let k = rng.random_range(0..n);
        let mut raised = tax.clone();
        raised[k] += rng.random_range(0.0..20.0);
        let after = simulate_multi_year(&s, &inv, &raised).unwrap();
        if after.capacities[k] > sol.capacities[k] * (1.0 + 1e-9) {
            failures.push(format!(
                "case {case}: raising tax of year {} raised its capacity {} -> {}",
                k + 1,
                sol.capacities[k],
                after.capacities[k]
            ));
        }
    }
    let detail = if failures.is_empty() {
        "1000 random scenarios: balance, debt conservation, C >= 0, tax monotonicity".to_string()
    } else {
        format!("{} violations, first: {}", failures.len(), failures[0])
    };
    outcome(failures.is_empty(), detail)
}

async fn call(
    app: &Router,
    method: &str,
    uri: &str,
    body: Option<&serde_json::Value>,
) -> (StatusCode, Vec<u8>) {
    let req = Request::builder().method(method).uri(uri);
    let req = match body {
        Some(b) => req
            .header("content-type", "application/json")
            .body(Body::from(serde_json::to_vec(b).unwrap())),
        None => req.body(Body::empty()),
    }
    .unwrap();
    let resp = app.clone().oneshot(req).await.unwrap();
    let status = resp.status();
    (
        status,
        resp.into_body()
            .collect()
            .await
            .unwrap()
            .to_bytes()
            .to_vec(),
    )
}

async fn run_to_results(app: &Router, cfg: &serde_json::Value) -> Vec<u8> {
    let (s, b) = call(app, "POST", "/api/runs", Some(cfg)).await;
    assert_eq!(s, StatusCode::ACCEPTED);
    let id = serde_json::from_slice::<serde_json::Value>(&b).unwrap()["run_id"]
        .as_str()
        .unwrap()
        .to_string();
    loop {
        let (_, b) = call(app, "GET", &format!("/api/runs/{id}"), None).await;
        let v: serde_json::Value = serde_json::from_slice(&b).unwrap();
        match v["status"].as_str().unwrap() {
            "done" => break,
            "pending" | "running" => tokio::time::sleep(Duration::from_millis(10)).await,
            other => panic!("run ended {other}"),
        }
    }
    call(app, "GET", &format!("/api/runs/{id}/results"), None)
        .await
        .1
}

fn determinism() -> Outcome {
    let dir = tempfile::tempdir().unwrap();
    let cfg = serde_json::to_value(RunConfig::demo_operational(123)).unwrap();
    let rt = tokio::runtime::Runtime::new().unwrap();
    let (a, b, c, stored) = rt.block_on(async {
        let app = router(AppState::new(Store::open(dir.path()).unwrap(), 1).unwrap());
        let a = run_to_results(&app, &cfg).await;
        let b = run_to_results(&app, &cfg).await;
        drop(app);
        let restarted = router(AppState::new(Store::open(dir.path()).unwrap(), 1).unwrap());
        let c = run_to_results(&restarted, &cfg).await;
        let (_, list) = call(&restarted, "GET", "/api/runs", None).await;
        let first = serde_json::from_slice::<serde_json::Value>(&list).unwrap()[0]["run_id"]
            .as_str()
            .unwrap()
            .to_string();
        let stored = call(
            &restarted,
            "GET",
            &format!("/api/runs/{first}/results"),
            None,
        )
        .await
        .1;
        (a, b, c, stored)
    });
    let same = a == b && a == c && a == stored;
    outcome(
        same && !a.is_empty(),
        format!(
            "{} result bytes; two runs, a run after restart and a reloaded record agree: {same}",
            a.len()
        ),
    )
}

fn operational_pipeline() -> Outcome {
    let problem =
        OperationalProblem::new(&OperationalProblemConfig::default(), &InlineOnly).unwrap();
    let (v1, v2) = anchor_vectors();
    let v1_intent = problem.evaluate_genes(&v1, true).unwrap().score;
    let v1_strict = problem.evaluate_genes(&v1, false).unwrap().score;
    let v2_score = problem.evaluate_genes(&v2, false).unwrap().score;
    let floor = v1_intent.max(v1_strict).max(v2_score);

    let cfg = RunConfig::demo_operational(0);
    assert_eq!((cfg.ga.generations, cfg.ga.population_size), (100, 50));
    let t = Instant::now();
    let out = execute(&cfg, &InlineOnly, &mut NoProgress).unwrap();
    let elapsed = t.elapsed();
    let best = &out.results[0];
    let base = problem.scenario.base_tax;
    let growth_ok = best
        .taxes
        .iter()
        .scan(base, |prev, t| {
            let ok = *t <= 1.07 * *prev;
            *prev = *t;
            Some(ok)
        })
        .all(|ok| ok);
    let cdd_ok = best
        .budget
        .capacities
        .iter()
        .all(|c| *c < PRUDENTIAL_LIMIT_YEARS);
    let monotone = out.trace.windows(2).all(|w| w[1].best >= w[0].best);
    let pass = elapsed < Duration::from_secs(60)
        && best.feasible
        && cdd_ok
        && growth_ok
        && monotone
        && best.score >= floor
        && best.r_coding.values.len() == GENES;
    outcome(
        pass,
        format!(
            "{elapsed:.2?}; best {:.4} (v1 {v1_intent:.4}, v1 as genes {v1_strict:.4}, v2 {v2_score:.4}); max CDD {:.2}; trace monotone {monotone}",
            best.score,
            best.budget.max_capacity()
        ),
    )
}

type Check = fn() -> Outcome;

fn main() {
    let criteria: [(&str, Check); 8] = [
        ("plateau reproduction", plateau_reproduction),
        ("single maximum", single_maximum),
        ("plateau spot values", plateau_spot_values),
        ("chromosome decode", chromosome_decode),
        ("frame properties", frame_properties),
        ("budget invariants", budget_invariants),
        ("determinism", determinism),
        ("operational pipeline", operational_pipeline),
    ];
    let mut failed = 0;
    for (name, check) in criteria {
        let o = check();
        failed += !o.pass as usize;
        println!(
            "{} {name}: {}",
            if o.pass { "PASS" } else { "FAIL" },
            o.detail
        );
    }
    println!(
        "acceptance: {} of {} criteria passed",
        criteria.len() - failed,
        criteria.len()
    );
    if failed > 0 {
        std::process::exit(1);
    }
}
