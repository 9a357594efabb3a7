//! Discrimination witnesses.
//!
//! `xi(A, B) = Pg(E1; A) / 2 + Pg(E2; B) / 2` is affine in the pair, so any
//! upper bound it obeys on compatible pairs separates incompatible ones.

use serde::Serialize;

use crate::error::{Error, Result};
use crate::measurement::{Observable, QubitDichotomic};
use crate::operator::{BlochVector, DensityOperator};

/// `(1 + 1/sqrt 2) / 2`, the largest value of the canonical qubit witness on
/// compatible dichotomic pairs.
pub const QUBIT_WITNESS_BOUND: f64 = 0.5 * (1.0 + std::f64::consts::FRAC_1_SQRT_2);
pub const VIOLATION_TOL: f64 = 1e-12;

/// Labelled test states, one per outcome.
#[derive(Clone, Debug)]
pub struct TestEnsemble {
    dim: usize,
    states: Vec<DensityOperator>,
}

impl TestEnsemble {
    pub fn new(states: Vec<DensityOperator>) -> Result<Self> {
        let dim = states.first().ok_or(Error::NoOutcomes)?.dim();
        if let Some(bad) = states.iter().find(|s| s.dim() != dim) {
            return Err(Error::DimensionMismatch {
                expected: dim,
                found: bad.dim(),
            });
        }
        Ok(Self { dim, states })
    }

    /// Eigenstates `(1 +- sigma_k) / 2` of a Pauli matrix, `+` first.
    pub fn pauli_eigenstates(k: usize) -> Result<Self> {
        let plus = BlochVector::axis(k, 1.0)?;
        let minus = BlochVector::axis(k, -1.0)?;
        Self::new(vec![DensityOperator::from_bloch(plus), DensityOperator::from_bloch(minus)])
    }

    pub fn dim(&self) -> usize {
        self.dim
    }

    pub fn len(&self) -> usize {
        self.states.len()
    }

    pub fn is_empty(&self) -> bool {
        self.states.is_empty()
    }

    pub fn states(&self) -> &[DensityOperator] {
        &self.states
    }
}

fn check_shape(e: &TestEnsemble, a: &Observable) -> Result<()> {
    if e.dim() != a.dim() {
        return Err(Error::DimensionMismatch {
            expected: e.dim(),
            found: a.dim(),
        });
    }
    if e.len() != a.outcomes() {
        return Err(Error::ShapeMismatch(format!(
            "{} test states for {} outcomes",
            e.len(),
            a.outcomes()
        )));
    }
    Ok(())
}

fn check_priors(priors: &[f64], m: usize) -> Result<()> {
    let total: f64 = priors.iter().sum();
    if priors.len() != m || priors.iter().any(|&p| !(p >= 0.0)) || (total - 1.0).abs() > 1e-9 {
        return Err(Error::InvalidProbabilities(format!("priors {priors:?} for {m} states")));
    }
    Ok(())
}

/// Average guessing probability `(1/m) sum_x tr[rho_x A(x)]`.
pub fn guessing_probability(e: &TestEnsemble, a: &Observable) -> Result<f64> {
    let m = a.outcomes();
    guessing_probability_weighted(e, a, &vec![1.0 / m as f64; m])
}

/// Guessing probability `sum_x p(x) tr[rho_x A(x)]` with explicit priors.
pub fn guessing_probability_weighted(e: &TestEnsemble, a: &Observable, priors: &[f64]) -> Result<f64> {
    check_shape(e, a)?;
    check_priors(priors, a.outcomes())?;
    Ok(e.states
        .iter()
        .zip(a.effects())
        .zip(priors)
        .map(|((rho, eff), p)| p * rho.expectation(eff))
        .sum())
}

/// `xi = Pg(e1; a) / 2 + Pg(e2; b) / 2`.
pub fn xi(a: &Observable, b: &Observable, e1: &TestEnsemble, e2: &TestEnsemble) -> Result<f64> {
    Ok(0.5 * guessing_probability(e1, a)? + 0.5 * guessing_probability(e2, b)?)
}

/// Optional prior weights for [`xi_weighted`].
#[derive(Clone, Debug, Default)]
pub struct XiWeights {
    /// Weight of the first ensemble; the second gets the complement.
    pub first: Option<f64>,
    pub priors1: Option<Vec<f64>>,
    pub priors2: Option<Vec<f64>>,
}

/// `xi` with non-uniform priors. Missing entries default to the uniform ones.
pub fn xi_weighted(
    a: &Observable,
    b: &Observable,
    e1: &TestEnsemble,
    e2: &TestEnsemble,
    w: &XiWeights,
) -> Result<f64> {
    let lambda = w.first.unwrap_or(0.5);
    if !(0.0..=1.0).contains(&lambda) {
        return Err(Error::InvalidParameter(format!("ensemble weight {lambda}")));
    }
    let uniform = |m: usize| vec![1.0 / m as f64; m];
    let p1 = w.priors1.clone().unwrap_or_else(|| uniform(a.outcomes()));
    let p2 = w.priors2.clone().unwrap_or_else(|| uniform(b.outcomes()));
    Ok(lambda * guessing_probability_weighted(e1, a, &p1)? + (1.0 - lambda) * guessing_probability_weighted(e2, b, &p2)?)
}

/// Closed form of `xi` for qubit pairs tested on the `sigma_1` and `sigma_2`
/// eigenstates: `(1 + (a_1 + b_2) / 2) / 2`.
pub fn qubit_witness_value(q1: &QubitDichotomic, q2: &QubitDichotomic) -> f64 {
    0.5 * (1.0 + 0.5 * (q1.bloch.components()[0] + q2.bloch.components()[1]))
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize)]
pub struct WitnessReport {
    pub value: f64,
    pub bound: f64,
    pub violated: bool,
}

/// Compares the qubit witness with its compatible-pair bound. A violation
/// certifies incompatibility; no violation proves nothing.
pub fn witness_bound_violation(q1: &QubitDichotomic, q2: &QubitDichotomic) -> WitnessReport {
    let value = qubit_witness_value(q1, q2);
    WitnessReport {
        value,
        bound: QUBIT_WITNESS_BOUND,
        violated: value > QUBIT_WITNESS_BOUND + VIOLATION_TOL,
    }
}
