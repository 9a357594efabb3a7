//! Numerical compatibility decisions.
//!
//! [`compat_margin`] computes the largest `s` for which a grid with the right
//! marginals and every cell `>= s 1` exists. A non-negative optimum means the
//! observables admit a joint observable, and the returned grid is one.
//! Status thresholds:
//!
//! | status         | condition                                   |
//! |----------------|---------------------------------------------|
//! | `compatible`   | certified lower bound `>= -1e-7`            |
//! | `incompatible` | upper bound `< -1e-6`                       |
//! | `boundary`     | everything in between, bracket inside band  |

mod engine;
mod robustness;
mod specker;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurement::{JointCandidate, Observable};
use crate::operator::HermitianOperator;

use engine::{Engine, ProbeOutcome, Problem};

pub use robustness::{robustness_optimal, robustness_uniform, NoiseModel, RobustnessReport, ROBUSTNESS_TOL};
pub use specker::{specker_check, SpeckerReport, SpeckerVerdict};

/// Certified margins at or above this value are reported compatible.
pub const COMPATIBLE_MARGIN: f64 = -1e-7;
/// Margins below this value are reported incompatible.
pub const INCOMPATIBLE_MARGIN: f64 = -1e-6;
/// Half-width of the band in which no verdict is asserted.
pub const BOUNDARY_BAND: f64 = 1e-6;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Status {
    Compatible,
    Incompatible,
    Boundary,
}

impl Status {
    /// Verdict for a margin value on its own, without bounds.
    pub fn from_margin(margin: f64) -> Self {
        if margin >= COMPATIBLE_MARGIN {
            Status::Compatible
        } else if margin < INCOMPATIBLE_MARGIN {
            Status::Incompatible
        } else {
            Status::Boundary
        }
    }

    pub fn as_str(&self) -> &'static str {
        match self {
            Status::Compatible => "compatible",
            Status::Incompatible => "incompatible",
            Status::Boundary => "boundary",
        }
    }
}

impl std::fmt::Display for Status {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        f.write_str(self.as_str())
    }
}

/// How far the solver pushes once a verdict is available.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum SolveMode {
    /// Bisect until the margin bracket is narrower than `tol`.
    Margin,
    /// Stop at the first certified verdict outside the boundary band.
    Decide,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub enum Projection {
    /// Plain alternating projections.
    Alternating,
    /// Dykstra's correction on the cone step.
    Dykstra,
}

#[derive(Clone, Debug)]
pub struct SolverConfig {
    /// Width of the final margin bracket in [`SolveMode::Margin`].
    pub tol: f64,
    /// Iterations allowed for one fixed-level feasibility probe.
    pub max_iter: usize,
    /// Iterations allowed for a whole solve.
    pub max_total_iter: usize,
    /// Largest product outcome grid accepted.
    pub grid_cap: usize,
    pub mode: SolveMode,
    pub projection: Projection,
    /// Iterations between weak-duality bound evaluations.
    pub dual_every: usize,
    /// Projection residual at which a level is declared feasible.
    pub feasible_residual: f64,
    /// Window and relative decrease of the residual plateau test.
    pub plateau_window: usize,
    pub plateau_rel: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            tol: 1e-7,
            max_iter: 200_000,
            max_total_iter: 2_000_000,
            grid_cap: 4096,
            mode: SolveMode::Margin,
            projection: Projection::Alternating,
            dual_every: 10,
            feasible_residual: 1e-9,
            plateau_window: 500,
            plateau_rel: 1e-12,
        }
    }
}

impl SolverConfig {
    pub fn decide() -> Self {
        Self {
            mode: SolveMode::Decide,
            ..Self::default()
        }
    }

    pub fn with_mode(mut self, mode: SolveMode) -> Self {
        self.mode = mode;
        self
    }
}

/// Outcome of a compatibility decision.
#[derive(Clone, Debug)]
pub struct MarginReport {
    /// Estimate of the optimal margin: the certified lower bound when
    /// compatible, the upper bound when incompatible.
    pub margin: f64,
    pub lower_bound: f64,
    pub upper_bound: f64,
    /// Whether `upper_bound` comes from a weak-duality certificate rather
    /// than the plateau/iteration heuristics.
    pub upper_certified: bool,
    /// Joint observable certifying compatibility.
    pub joint: Option<JointCandidate>,
    /// Trivial-noise probability vectors, when they were optimized over.
    pub noise: Option<Vec<Vec<f64>>>,
    pub iterations: usize,
    /// Largest marginal-constraint violation of the returned grid.
    pub residual: f64,
    pub status: Status,
}

impl MarginReport {
    pub fn is_compatible(&self) -> bool {
        self.status == Status::Compatible
    }
}

fn check_collection(obs: &[Observable]) -> Result<usize> {
    let dim = obs.first().ok_or(Error::NoOutcomes)?.dim();
    if let Some(bad) = obs.iter().find(|o| o.dim() != dim) {
        return Err(Error::DimensionMismatch {
            expected: dim,
            found: bad.dim(),
        });
    }
    Ok(dim)
}

/// Joint-observable margin of a finite collection of observables.
pub fn compat_margin(obs: &[Observable], cfg: &SolverConfig) -> Result<MarginReport> {
    check_collection(obs)?;
    let problem = Problem::fixed(obs.iter().map(|o| o.effects().to_vec()).collect(), cfg.grid_cap)?;
    solve(&problem, cfg)
}

/// Decides compatibility of the mixtures `w A_i + (1 - w) I_i` where the
/// trivial observables `I_i` are optimized over.
pub(crate) fn compat_with_free_noise(obs: &[Observable], w: f64, cfg: &SolverConfig) -> Result<MarginReport> {
    check_collection(obs)?;
    let problem = Problem::free_noise(obs, w, cfg.grid_cap)?;
    solve(&problem, cfg)
}

fn solve(problem: &Problem, cfg: &SolverConfig) -> Result<MarginReport> {
    let mut engine = Engine::new(problem, cfg);
    match cfg.mode {
        SolveMode::Decide => {
            // the target sits just above the acceptance level so that a
            // compatible instance is reached through the interior
            engine.probe(COMPATIBLE_MARGIN, INCOMPATIBLE_MARGIN, 1e-7, cfg.max_iter);
            bisect(&mut engine, cfg, true);
        }
        SolveMode::Margin => bisect(&mut engine, cfg, false),
    }
    finish(engine)
}

fn decided(engine: &Engine<'_>) -> bool {
    engine.lower >= COMPATIBLE_MARGIN || engine.upper_certified < INCOMPATIBLE_MARGIN
}

fn bisect(engine: &mut Engine<'_>, cfg: &SolverConfig, stop_when_decided: bool) {
    while engine.upper - engine.lower > cfg.tol && engine.budget_left() {
        if stop_when_decided && decided(engine) {
            break;
        }
        let level = 0.5 * (engine.lower + engine.upper);
        let overshoot = 0.25 * (engine.upper - engine.lower);
        engine.probe(level, level, level + overshoot, cfg.max_iter);
    }
}

fn finish(engine: Engine<'_>) -> Result<MarginReport> {
    let lower = engine.lower;
    let upper = engine.upper.max(lower);
    let status = if lower >= COMPATIBLE_MARGIN {
        Status::Compatible
    } else if upper < INCOMPATIBLE_MARGIN {
        Status::Incompatible
    } else if lower >= -BOUNDARY_BAND && upper <= BOUNDARY_BAND {
        Status::Boundary
    } else {
        return Err(Error::NoConvergence(format!(
            "margin bracket [{lower:e}, {upper:e}] after {} iterations",
            engine.iterations
        )));
    };
    let margin = match status {
        Status::Compatible => lower,
        Status::Incompatible => upper,
        Status::Boundary => 0.5 * (lower + upper),
    };
    let problem = engine.problem;
    let residual = problem.marginal_residual(&engine.best);
    let joint = match status {
        Status::Compatible => Some(JointCandidate::from_cells(
            problem.shape().to_vec(),
            engine.best.cells.clone(),
        )?),
        _ => None,
    };
    Ok(MarginReport {
        margin,
        lower_bound: lower,
        upper_bound: upper,
        upper_certified: engine.upper_certified <= upper,
        noise: problem.noise_vectors(&engine.best),
        joint,
        iterations: engine.iterations,
        residual,
        status,
    })
}

/// Single-operator program for a dichotomic pair:
/// `inf { t : t 1 + G >= A(1) + B(1) }` over `G >= 0`, `G <= A(1)`,
/// `G <= B(1)`. The pair is compatible iff the optimum is at most one.
#[derive(Clone, Debug)]
pub struct DichotomicReport {
    /// Bracket on the optimum `t*`.
    pub t_lower: f64,
    pub t_upper: f64,
    /// Optimal operator found at `t_upper`.
    pub operator: HermitianOperator,
    /// `margin = 1 - t_upper`, with the usual status thresholds.
    pub report: MarginReport,
}

/// Solves the dichotomic single-operator program by bisection on `t`.
pub fn dichotomic_sdp(a: &Observable, b: &Observable, cfg: &SolverConfig) -> Result<DichotomicReport> {
    for o in [a, b] {
        if !o.is_dichotomic() {
            return Err(Error::NotDichotomic(o.outcomes()));
        }
    }
    if a.dim() != b.dim() {
        return Err(Error::DimensionMismatch {
            expected: a.dim(),
            found: b.dim(),
        });
    }
    let dim = a.dim();
    let a1 = a.effect(0).clone();
    let b1 = b.effect(0).clone();
    let both = &a1 + &b1;

    // G = 0 is feasible at t = lambda_max(A(1) + B(1)); A(1) - G >= 0 forces
    // t >= lambda_max(B(1)) and symmetrically for A(1).
    let mut t_upper = both.max_eigenvalue();
    let mut operator = HermitianOperator::zeros(dim);
    let mut t_lower = a1.max_eigenvalue().max(b1.max_eigenvalue());
    let mut lower_certified = true;
    let mut iterations = 0;
    let tol = cfg.tol.max(1e-12);
    let probe_budget = cfg.max_iter.min(20_000);

    while t_upper - t_lower > tol {
        let t = 0.5 * (t_lower + t_upper);
        let shifted = |e: &HermitianOperator| {
            let mut r = e.scale(-1.0);
            r.shift_diagonal(t);
            r
        };
        let problem = Problem::fixed(
            vec![vec![a1.clone(), shifted(&a1)], vec![b1.clone(), shifted(&b1)]],
            cfg.grid_cap,
        )?;
        let mut engine = Engine::new(&problem, cfg);
        let outcome = engine.probe(-1e-12, 0.0, 1e-9, probe_budget);
        iterations += engine.iterations;
        match outcome {
            ProbeOutcome::Accepted => {
                let g = engine.best.cells[0].clone();
                let t_cert = (&both - &g).max_eigenvalue().min(t);
                if t_cert < t_upper {
                    t_upper = t_cert;
                    operator = g;
                }
                t_upper = t_upper.min(t);
            }
            ProbeOutcome::Rejected { certified } => {
                t_lower = t;
                lower_certified &= certified;
            }
            ProbeOutcome::Exhausted => {
                t_lower = t;
                lower_certified = false;
            }
        }
    }

    let margin = 1.0 - t_upper;
    let status = if margin >= COMPATIBLE_MARGIN {
        Status::Compatible
    } else if 1.0 - t_lower < INCOMPATIBLE_MARGIN {
        Status::Incompatible
    } else {
        Status::Boundary
    };
    let cells = vec![
        operator.clone(),
        &a1 - &operator,
        &b1 - &operator,
        {
            let mut c = &operator - &both;
            c.shift_diagonal(1.0);
            c
        },
    ];
    let joint = JointCandidate::from_cells(vec![2, 2], cells)?;
    let residual = joint.marginal_residual(&[a.clone(), b.clone()]);
    let report = MarginReport {
        margin: if status == Status::Incompatible { 1.0 - t_lower } else { margin },
        lower_bound: 1.0 - t_upper,
        upper_bound: 1.0 - t_lower,
        upper_certified: lower_certified,
        joint: (status == Status::Compatible).then_some(joint),
        noise: None,
        iterations,
        residual,
        status,
    };
    Ok(DichotomicReport {
        t_lower,
        t_upper,
        operator,
        report,
    })
}
