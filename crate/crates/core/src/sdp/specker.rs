use std::collections::BTreeMap;

use rayon::prelude::*;

use crate::error::{Error, Result};
use crate::measurement::Observable;

use super::{compat_margin, MarginReport, SolveMode, SolverConfig, Status};

#[derive(Clone, Debug, PartialEq, Eq)]
pub enum SpeckerVerdict {
    Specker,
    NotSpecker,
    /// The named subset (indices into the input) fell in the boundary band.
    Inconclusive { subset: Vec<usize> },
}

#[derive(Clone, Debug)]
pub struct SpeckerReport {
    pub verdict: SpeckerVerdict,
    pub full: MarginReport,
    /// Reports for every subset obtained by dropping one observable, keyed by
    /// the retained indices.
    pub subset_reports: BTreeMap<Vec<usize>, MarginReport>,
}

impl SpeckerReport {
    pub fn is_specker(&self) -> bool {
        self.verdict == SpeckerVerdict::Specker
    }
}

/// Tests whether the collection is incompatible while every proper subset is
/// compatible. Subsets of a compatible set are compatible, so only the
/// subsets of size `p - 1` are solved.
pub fn specker_check(obs: &[Observable], cfg: &SolverConfig) -> Result<SpeckerReport> {
    let p = obs.len();
    if p < 3 {
        return Err(Error::InvalidParameter(format!(
            "a Specker set needs at least three observables, got {p}"
        )));
    }
    let cfg = cfg.clone().with_mode(SolveMode::Decide);
    let full_idx: Vec<usize> = (0..p).collect();
    let mut jobs: Vec<Vec<usize>> = (0..p)
        .map(|drop| full_idx.iter().copied().filter(|&i| i != drop).collect())
        .collect();
    jobs.push(full_idx.clone());

    let results: Vec<(Vec<usize>, Result<MarginReport>)> = jobs
        .into_par_iter()
        .map(|idx| {
            let subset: Vec<Observable> = idx.iter().map(|&i| obs[i].clone()).collect();
            let report = compat_margin(&subset, &cfg);
            (idx, report)
        })
        .collect();

    let mut full = None;
    let mut subset_reports = BTreeMap::new();
    for (idx, report) in results {
        let report = report?;
        if idx.len() == p {
            full = Some(report);
        } else {
            subset_reports.insert(idx, report);
        }
    }
    let full = full.expect("full collection was solved");

    let verdict = match full.status {
        Status::Boundary => SpeckerVerdict::Inconclusive { subset: full_idx },
        Status::Compatible => SpeckerVerdict::NotSpecker,
        Status::Incompatible => {
            if subset_reports.values().any(|r| r.status == Status::Incompatible) {
                SpeckerVerdict::NotSpecker
            } else if let Some((idx, _)) = subset_reports.iter().find(|(_, r)| r.status == Status::Boundary) {
                SpeckerVerdict::Inconclusive { subset: idx.clone() }
            } else {
                SpeckerVerdict::Specker
            }
        }
    };
    Ok(SpeckerReport {
        verdict,
        full,
        subset_reports,
    })
}
