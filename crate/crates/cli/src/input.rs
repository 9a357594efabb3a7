use std::fs;
use std::path::Path;

use anyhow::{bail, Context, Result};
use jointmeas_core::json::{channel_from_json, observable_from_json, parse_document, state_from_json};
use jointmeas_core::channel::Channel;
use jointmeas_core::witness::TestEnsemble;
use jointmeas_core::{DensityOperator, Observable, QubitDichotomic};
use serde_json::Value;

/// `bias,a1,a2,a3`.
pub fn parse_qubit(s: &str) -> std::result::Result<QubitDichotomic, String> {
    let parts = s
        .split(',')
        .map(|p| p.trim().parse::<f64>().map_err(|e| format!("`{}`: {e}", p.trim())))
        .collect::<std::result::Result<Vec<_>, _>>()?;
    if parts.len() != 4 {
        return Err(format!("expected bias,a1,a2,a3, found {} numbers", parts.len()));
    }
    QubitDichotomic::from_parts(parts[0], [parts[1], parts[2], parts[3]]).map_err(|e| e.to_string())
}

/// `a,b` for bipartite dimensions.
pub fn parse_dims(s: &str) -> std::result::Result<(usize, usize), String> {
    match s.split_once(',') {
        Some((a, b)) => {
            let a = a.trim().parse::<usize>().map_err(|e| e.to_string())?;
            let b = b.trim().parse::<usize>().map_err(|e| e.to_string())?;
            if a == 0 || b == 0 {
                return Err("dimensions must be positive".into());
            }
            Ok((a, b))
        }
        None => Err(format!("expected two comma-separated sizes, found `{s}`")),
    }
}

pub fn read_json(path: &Path) -> Result<Value> {
    let text = fs::read_to_string(path).with_context(|| format!("cannot read {}", path.display()))?;
    Ok(parse_document(&text, &path.display().to_string())?)
}

/// A file holds one observable or an array of them.
pub fn observables_from_file(path: &Path) -> Result<Vec<Observable>> {
    let doc = read_json(path)?;
    let parsed = match &doc {
        Value::Array(items) => items
            .iter()
            .enumerate()
            .map(|(i, v)| observable_from_json(v, &format!("[{i}]")))
            .collect::<jointmeas_core::Result<Vec<_>>>(),
        v => observable_from_json(v, "").map(|o| vec![o]),
    };
    parsed.with_context(|| format!("in {}", path.display()))
}

pub fn load_observables(files: &[impl AsRef<Path>], qubits: &[QubitDichotomic]) -> Result<Vec<Observable>> {
    let mut out = Vec::new();
    for f in files {
        out.extend(observables_from_file(f.as_ref())?);
    }
    out.extend(qubits.iter().map(QubitDichotomic::observable));
    Ok(out)
}

pub fn require_count(obs: &[Observable], min: usize, max: Option<usize>, what: &str) -> Result<()> {
    let n = obs.len();
    if n < min || max.is_some_and(|m| n > m) {
        match max {
            Some(m) if m == min => bail!("{what} needs exactly {min} observables, got {n}"),
            _ => bail!("{what} needs at least {min} observables, got {n}"),
        }
    }
    Ok(())
}

pub fn channel_from_file(path: &Path) -> Result<Channel> {
    let doc = read_json(path)?;
    channel_from_json(&doc, "").with_context(|| format!("in {}", path.display()))
}

pub fn state_from_file(path: &Path) -> Result<DensityOperator> {
    let doc = read_json(path)?;
    state_from_json(&doc, "").with_context(|| format!("in {}", path.display()))
}

/// An ensemble file is an array of state matrices.
pub fn ensemble_from_file(path: &Path) -> Result<TestEnsemble> {
    let doc = read_json(path)?;
    let states = match &doc {
        Value::Array(items) => items
            .iter()
            .enumerate()
            .map(|(i, v)| state_from_json(v, &format!("[{i}]")))
            .collect::<jointmeas_core::Result<Vec<_>>>()
            .with_context(|| format!("in {}", path.display()))?,
        _ => bail!("in {}: expected an array of states", path.display()),
    };
    Ok(TestEnsemble::new(states)?)
}
