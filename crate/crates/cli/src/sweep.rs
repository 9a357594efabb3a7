//! Reproducible comparison of the criteria on random pairs.
//!
//! Pair `k` is drawn from its own ChaCha stream `k` under the given seed, so
//! the output does not depend on thread scheduling or on `n`.

use anyhow::{bail, Result};
use clap::ValueEnum;
use jointmeas_core::criteria::{busch_slack, jordan_check, ylo_slack, COMMUTE_TOL};
use jointmeas_core::measurement::max_commutator_norm;
use jointmeas_core::random::{random_observable, random_qubit_dichotomic, random_unbiased_qubit, seeded};
use jointmeas_core::sdp::{compat_margin, SolveMode};
use jointmeas_core::witness::witness_bound_violation;
use jointmeas_core::{Error, Observable, QubitDichotomic, SolverConfig};
use rayon::prelude::*;
use serde_json::{json, Value};

use crate::report::Table;

#[derive(Clone, Copy, Debug, PartialEq, Eq, ValueEnum)]
pub enum Family {
    /// Random observables of the given dimension and outcome counts.
    General,
    /// Two-outcome qubit observables with random bias.
    Qubit,
    /// Two-outcome qubit observables without bias.
    Unbiased,
}

#[derive(Clone, Debug)]
pub struct SweepParams {
    pub n: usize,
    pub family: Family,
    pub dim: usize,
    pub outcomes: (usize, usize),
    pub seed: u64,
}

#[derive(Clone, Debug, PartialEq)]
pub struct Row {
    pub pair_id: usize,
    pub criterion: &'static str,
    pub verdict: &'static str,
    pub margin: Option<f64>,
}

type Pair = (Observable, Observable, Option<(QubitDichotomic, QubitDichotomic)>);

fn sample(p: &SweepParams, id: usize) -> Result<Pair> {
    let mut rng = seeded(p.seed);
    rng.set_stream(id as u64);
    Ok(match p.family {
        Family::General => (
            random_observable(&mut rng, p.dim, p.outcomes.0)?,
            random_observable(&mut rng, p.dim, p.outcomes.1)?,
            None,
        ),
        Family::Qubit | Family::Unbiased => {
            let draw = |rng: &mut _| match p.family {
                Family::Unbiased => random_unbiased_qubit(rng),
                _ => random_qubit_dichotomic(rng),
            };
            let (a, b) = (draw(&mut rng), draw(&mut rng));
            (a.observable(), b.observable(), Some((a, b)))
        }
    })
}

fn evaluate(id: usize, pair: &Pair, cfg: &SolverConfig) -> Result<Vec<Row>> {
    let (a, b, qubits) = pair;
    let row = |criterion, verdict, margin| Row {
        pair_id: id,
        criterion,
        verdict,
        margin,
    };
    let mut rows = Vec::with_capacity(5);

    let comm = max_commutator_norm(a, b)?;
    let v = if comm <= COMMUTE_TOL { "commuting" } else { "noncommuting" };
    rows.push(row("commute", v, Some(-comm)));

    let (jordan, grid) = jordan_check(a, b)?;
    let v = if jordan.holds() { "holds" } else { "fails" };
    rows.push(row("jordan", v, Some(grid.min_cell_eigenvalue().1)));

    if let Some((qa, qb)) = qubits {
        let slack = if qa.bias == 0.0 && qb.bias == 0.0 {
            Some(busch_slack(&qa.bloch, &qb.bloch))
        } else {
            ylo_slack(qa, qb)?
        };
        let margin = slack.map_or(-comm, |s| -s);
        let v = if margin.abs() <= 1e-9 {
            "boundary"
        } else if margin > 0.0 {
            "compatible"
        } else {
            "incompatible"
        };
        rows.push(row("analytic", v, Some(margin)));
        let w = witness_bound_violation(qa, qb);
        let v = if w.violated { "violated" } else { "not_violated" };
        rows.push(row("witness", v, Some(w.bound - w.value)));
    }

    match compat_margin(&[a.clone(), b.clone()], cfg) {
        Ok(r) => rows.push(row("sdp", r.status.as_str(), Some(r.margin))),
        Err(Error::NoConvergence(_)) => rows.push(row("sdp", "inconclusive", None)),
        Err(e) => return Err(e.into()),
    }
    Ok(rows)
}

pub fn run(p: &SweepParams, cfg: &SolverConfig) -> Result<Vec<Row>> {
    if p.n == 0 {
        bail!("sweep needs n >= 1");
    }
    if p.family == Family::General && (p.dim == 0 || p.outcomes.0 == 0 || p.outcomes.1 == 0) {
        bail!("dimension and outcome counts must be positive");
    }
    let cfg = cfg.clone().with_mode(SolveMode::Decide);
    // indexed parallel collect keeps pair_id order
    let per_pair: Vec<Vec<Row>> = (0..p.n)
        .into_par_iter()
        .map(|id| evaluate(id, &sample(p, id)?, &cfg))
        .collect::<Result<_>>()?;
    Ok(per_pair.into_iter().flatten().collect())
}

pub fn table(rows: &[Row]) -> Table {
    let mut t = Table::new(vec!["pair_id", "criterion", "verdict", "margin"]);
    for r in rows {
        t.push(vec![
            r.pair_id.to_string(),
            r.criterion.to_string(),
            r.verdict.to_string(),
            r.margin.map(|m| format!("{m:.9e}")).unwrap_or_default(),
        ]);
    }
    t
}

pub fn to_json(rows: &[Row]) -> Value {
    Value::Array(
        rows.iter()
            .map(|r| json!({ "pair_id": r.pair_id, "criterion": r.criterion, "verdict": r.verdict, "margin": r.margin }))
            .collect(),
    )
}

/// Count of pairs with the given verdict, per criterion.
pub fn count(rows: &[Row], criterion: &str, verdict: &str) -> usize {
    rows.iter().filter(|r| r.criterion == criterion && r.verdict == verdict).count()
}
