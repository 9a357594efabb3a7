use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::measurement::{mix_pairs, uniform_trivial, Observable};

use super::{compat_margin, compat_with_free_noise, MarginReport, SolveMode, SolverConfig, Status};

/// Default bracket width on the mixing weight.
pub const ROBUSTNESS_TOL: f64 = 1e-4;

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NoiseModel {
    /// Mixing with trivial observables of uniform distribution.
    UniformTrivial,
    /// Mixing with the best trivial observables at every weight.
    OptimalTrivial,
}

/// Largest mixing weight `t` at which `t (A, B) + (1 - t) (I, I')` is still
/// compatible, bracketed by bisection.
#[derive(Clone, Debug)]
pub struct RobustnessReport {
    pub t_star: f64,
    /// Compatible at `bracket.0`, incompatible at `bracket.1` (equal to
    /// `(1, 1)` when the pair itself is compatible).
    pub bracket: (f64, f64),
    pub noise_model: NoiseModel,
    /// Decision at the compatible end of the bracket; carries its joint observable.
    pub certificate: Option<MarginReport>,
    pub probes: usize,
}

fn decide_cfg(cfg: &SolverConfig) -> SolverConfig {
    cfg.clone().with_mode(SolveMode::Decide)
}

fn bisect_weight(
    tol: f64,
    noise_model: NoiseModel,
    mut decide: impl FnMut(f64) -> Result<MarginReport>,
) -> Result<RobustnessReport> {
    if !(tol > 0.0) {
        return Err(Error::InvalidParameter(format!("bisection tolerance {tol}")));
    }
    let at_one = decide(1.0)?;
    let mut probes = 1;
    if at_one.status != Status::Incompatible {
        return Ok(RobustnessReport {
            t_star: 1.0,
            bracket: (1.0, 1.0),
            noise_model,
            certificate: Some(at_one),
            probes,
        });
    }
    // every pair becomes trivial, hence compatible, at t = 0
    let mut lo = 0.0;
    let mut hi = 1.0;
    let mut certificate = None;
    while hi - lo > tol {
        let t = 0.5 * (lo + hi);
        probes += 1;
        let report = decide(t).map_err(|e| {
            Error::NoConvergence(format!("robustness bisection stopped with bracket [{lo}, {hi}]: {e}"))
        })?;
        // a boundary verdict lies within the solver band of the threshold
        if report.status == Status::Incompatible {
            hi = t;
        } else {
            lo = t;
            certificate = Some(report);
        }
    }
    Ok(RobustnessReport {
        t_star: 0.5 * (lo + hi),
        bracket: (lo, hi),
        noise_model,
        certificate,
        probes,
    })
}

fn check_pair(obs: (&Observable, &Observable)) -> Result<()> {
    if obs.0.dim() != obs.1.dim() {
        return Err(Error::DimensionMismatch {
            expected: obs.0.dim(),
            found: obs.1.dim(),
        });
    }
    Ok(())
}

/// Robustness against uniform trivial noise.
pub fn robustness_uniform(obs: (&Observable, &Observable), tol: f64, cfg: &SolverConfig) -> Result<RobustnessReport> {
    check_pair(obs)?;
    let cfg = decide_cfg(cfg);
    let dim = obs.0.dim();
    let noise = (
        uniform_trivial(dim, obs.0.outcomes()),
        uniform_trivial(dim, obs.1.outcomes()),
    );
    bisect_weight(tol, NoiseModel::UniformTrivial, |t| {
        let (a, b) = mix_pairs(obs, (&noise.0, &noise.1), t)?;
        compat_margin(&[a, b], &cfg)
    })
}

/// Robustness against the most favourable trivial noise: at every weight the
/// noise distributions are free variables of the feasibility problem.
pub fn robustness_optimal(obs: (&Observable, &Observable), tol: f64, cfg: &SolverConfig) -> Result<RobustnessReport> {
    check_pair(obs)?;
    let cfg = decide_cfg(cfg);
    let pair = [obs.0.clone(), obs.1.clone()];
    bisect_weight(tol, NoiseModel::OptimalTrivial, |t| compat_with_free_noise(&pair, t, &cfg))
}
