//! One-dimensional verification problems: a single-maximum curve and a
//! curve whose maximum is a plateau, both searched in the 1-D box spanned by
//! the maxima of their two summands.

use std::fmt::Write as _;

use serde::{Deserialize, Serialize};

use crate::frame::{build_frame, Frame};
use crate::ga::{
    self, Evaluation, GaConfig, GaError, GenerationStats, Problem, ProgressSink, RunResult,
};

/// Flat top of [`fitness_plateau`].
pub const PLATEAU: (f64, f64) = (0.48, 0.52);
pub const PLATEAU_VALUE: f64 = 0.91;

fn quadratic_bump(x: f64, center: f64) -> f64 {
    0.5 * (1.0 - 30.0 * (x - center).powi(2)).max(0.0)
}

/// Sum of two clipped quadratics peaking at 0.45 and 0.55.
pub fn fitness_single_max(x: f64) -> f64 {
    quadratic_bump(x, 0.45) + quadratic_bump(x, 0.55)
}

/// Sum of two clipped piecewise-linear tents whose overlap is flat on
/// `[0.48, 0.52]`.
pub fn fitness_plateau(x: f64) -> f64 {
    let f1 = 1.0 - 10.0 * (x - 0.45).abs();
    let f2 = 1.0 - 10.0 * (x - 0.55).abs();
    let g1 = (1.0 - 10.0 * (x - 0.48)).min(1.0);
    let g2 = (1.0 - 10.0 * (0.52 - x)).min(1.0);
    let l1 = 0.7 * (0.5 * f1 + 0.5 * g1).max(0.0);
    let l2 = 0.7 * (0.5 * f2 + 0.5 * g2).max(0.0);
    l1 + l2
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum CurveKind {
    Single,
    Plateau,
}

impl std::str::FromStr for CurveKind {
    type Err = String;
    fn from_str(s: &str) -> Result<Self, Self::Err> {
        match s {
            "single" => Ok(Self::Single),
            "plateau" => Ok(Self::Plateau),
            other => Err(format!(
                "unknown curve '{other}' (expected single or plateau)"
            )),
        }
    }
}

/// A closed-form fitness on the real line with its two anchor points.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Curve1D {
    pub kind: CurveKind,
    pub anchors: (f64, f64),
}

impl Curve1D {
    pub fn new(kind: CurveKind) -> Self {
        Self {
            kind,
            anchors: (0.45, 0.55),
        }
    }

    pub fn eval(&self, x: f64) -> f64 {
        match self.kind {
            CurveKind::Single => fitness_single_max(x),
            CurveKind::Plateau => fitness_plateau(x),
        }
    }
}

struct CurveProblem {
    curve: Curve1D,
    frame: Frame,
}

impl CurveProblem {
    fn decode(&self, p: &[f64]) -> f64 {
        self.frame.p_to_r_values(p)[0]
    }
}

impl Problem for CurveProblem {
    fn dimension(&self) -> usize {
        1
    }

    fn evaluate(&self, p: &[f64]) -> Evaluation {
        Evaluation {
            score: self.curve.eval(self.decode(p)),
            feasible: true,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CurvePoint {
    pub x: f64,
    pub f: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Run1D {
    /// Final population in population order.
    pub points: Vec<CurvePoint>,
    pub trace: Vec<GenerationStats>,
}

impl Run1D {
    /// Fraction of points on the plateau at its maximal value.
    pub fn plateau_fraction(&self, tol: f64) -> f64 {
        let on = self.on_plateau(tol).count();
        on as f64 / self.points.len() as f64
    }

    pub fn on_plateau(&self, tol: f64) -> impl Iterator<Item = &CurvePoint> {
        self.points.iter().filter(move |p| {
            (PLATEAU.0..=PLATEAU.1).contains(&p.x) && (p.f - PLATEAU_VALUE).abs() <= tol
        })
    }

    pub fn median_x(&self) -> f64 {
        let mut xs: Vec<f64> = self.points.iter().map(|p| p.x).collect();
        xs.sort_by(f64::total_cmp);
        let n = xs.len();
        if n % 2 == 1 {
            xs[n / 2]
        } else {
            0.5 * (xs[n / 2 - 1] + xs[n / 2])
        }
    }

    /// Aligned text table, seven columns per block, three decimals.
    pub fn table(&self) -> String {
        let mut out = String::new();
        for chunk in self.points.chunks(7) {
            out.push_str("x ");
            for p in chunk {
                let _ = write!(out, "| {:>7.3} ", p.x);
            }
            out.push_str("\nF ");
            for p in chunk {
                let _ = write!(out, "| {:>7.3} ", p.f);
            }
            out.push('\n');
        }
        out
    }

    pub fn csv(&self) -> String {
        let mut out = String::from("x,f\n");
        for p in &self.points {
            let _ = writeln!(out, "{},{}", p.x, p.f);
        }
        out
    }
}

/// Simplified search on a curve: the box is the interval
/// `midpoint +- distance(anchors)` and members are never clamped.
pub fn run_1d(
    curve: Curve1D,
    cfg: &GaConfig,
    sink: &mut dyn ProgressSink,
) -> Result<Run1D, GaError> {
    let frame = build_frame(&[curve.anchors.0], &[curve.anchors.1])
        .map_err(|e| GaError::Config(e.to_string()))?;
    let problem = CurveProblem { curve, frame };
    let mut cfg = cfg.clone();
    cfg.clamp_to_box = false;
    let RunResult {
        population, trace, ..
    } = ga::run(&problem, &cfg, sink)?;
    let points = population
        .members
        .iter()
        .map(|m| {
            let x = problem.decode(&m.coding);
            CurvePoint {
                x,
                f: curve.eval(x),
            }
        })
        .collect();
    Ok(Run1D { points, trace })
}

/// GA settings of the 1-D experiments: 35 members, 500 generations.
pub fn testbed_config(seed: u64) -> GaConfig {
    GaConfig {
        population_size: 35,
        generations: 500,
        rng_seed: seed,
        ..GaConfig::default()
    }
}
