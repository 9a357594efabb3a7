//! JSON formats.
//!
//! * matrix: row-major nested arrays of `[re, im]` pairs
//! * observable: `{"dim": d, "effects": [matrix, ...]}` or the qubit
//!   shorthand `{"bias": a, "bloch": [x, y, z]}`
//! * channel: `{"dim_in": d, "dim_out": d', "kraus": [matrix, ...]}`
//! * state: a matrix
//! * report: `{"margin", "status", "residual", "iterations", "joint"}` where
//!   `joint` is the grid nested by axis, or `null`
//!
//! Parse errors carry the path of the offending field, e.g. `effects[1][0][2]`.

use serde_json::{json, Map, Value};

use crate::channel::Channel;
use crate::error::{Error, Result};
use crate::measurement::{JointCandidate, Observable, QubitDichotomic};
use crate::operator::{BlochVector, CMatrix, DensityOperator, HermitianOperator, C64};
use crate::sdp::MarginReport;

fn err(path: &str, msg: impl Into<String>) -> Error {
    Error::Parse {
        path: if path.is_empty() { "<root>".into() } else { path.into() },
        msg: msg.into(),
    }
}

fn child(path: &str, key: &str) -> String {
    if path.is_empty() {
        key.to_string()
    } else {
        format!("{path}.{key}")
    }
}

fn as_array<'a>(v: &'a Value, path: &str) -> Result<&'a Vec<Value>> {
    v.as_array().ok_or_else(|| err(path, "expected an array"))
}

fn as_f64(v: &Value, path: &str) -> Result<f64> {
    v.as_f64().ok_or_else(|| err(path, "expected a number"))
}

fn as_usize(v: &Value, path: &str) -> Result<usize> {
    v.as_u64()
        .map(|n| n as usize)
        .ok_or_else(|| err(path, "expected a non-negative integer"))
}

fn field<'a>(obj: &'a Map<String, Value>, key: &str, path: &str) -> Result<&'a Value> {
    obj.get(key).ok_or_else(|| err(path, format!("missing field `{key}`")))
}

pub fn matrix_to_json(m: &CMatrix) -> Value {
    Value::Array(
        (0..m.nrows())
            .map(|i| Value::Array((0..m.ncols()).map(|j| json!([m[(i, j)].re, m[(i, j)].im])).collect()))
            .collect(),
    )
}

pub fn matrix_from_json(v: &Value, path: &str) -> Result<CMatrix> {
    let rows = as_array(v, path)?;
    if rows.is_empty() {
        return Err(err(path, "matrix has no rows"));
    }
    let mut data = Vec::new();
    let mut ncols = None;
    for (i, row) in rows.iter().enumerate() {
        let rp = format!("{path}[{i}]");
        let row = as_array(row, &rp)?;
        match ncols {
            None => ncols = Some(row.len()),
            Some(n) if n != row.len() => return Err(err(&rp, format!("row has {} entries, expected {n}", row.len()))),
            _ => {}
        }
        for (j, z) in row.iter().enumerate() {
            let zp = format!("{rp}[{j}]");
            let pair = as_array(z, &zp)?;
            if pair.len() != 2 {
                return Err(err(&zp, "expected a [re, im] pair"));
            }
            data.push(C64::new(as_f64(&pair[0], &format!("{zp}[0]"))?, as_f64(&pair[1], &format!("{zp}[1]"))?));
        }
    }
    let ncols = ncols.unwrap_or(0);
    Ok(CMatrix::from_row_slice(rows.len(), ncols, &data))
}

pub fn hermitian_from_json(v: &Value, path: &str) -> Result<HermitianOperator> {
    HermitianOperator::new(matrix_from_json(v, path)?).map_err(|e| err(path, e.to_string()))
}

pub fn state_from_json(v: &Value, path: &str) -> Result<DensityOperator> {
    DensityOperator::new(hermitian_from_json(v, path)?).map_err(|e| err(path, e.to_string()))
}

pub fn observable_to_json(o: &Observable) -> Value {
    json!({
        "dim": o.dim(),
        "effects": o.effects().iter().map(|e| matrix_to_json(e.matrix())).collect::<Vec<_>>(),
    })
}

pub fn qubit_to_json(q: &QubitDichotomic) -> Value {
    json!({ "bias": q.bias, "bloch": q.bloch.components() })
}

/// Reads either observable form.
pub fn observable_from_json(v: &Value, path: &str) -> Result<Observable> {
    let obj = v.as_object().ok_or_else(|| err(path, "expected an object"))?;
    if obj.contains_key("bloch") {
        let bias = match obj.get("bias") {
            Some(b) => as_f64(b, &child(path, "bias"))?,
            None => 0.0,
        };
        let bp = child(path, "bloch");
        let comps = as_array(field(obj, "bloch", path)?, &bp)?;
        if comps.len() != 3 {
            return Err(err(&bp, "expected three components"));
        }
        let mut a = [0.0; 3];
        for (k, c) in comps.iter().enumerate() {
            a[k] = as_f64(c, &format!("{bp}[{k}]"))?;
        }
        let q = BlochVector::new(a)
            .and_then(|b| QubitDichotomic::new(bias, b))
            .map_err(|e| err(path, e.to_string()))?;
        return Ok(q.observable());
    }
    let dim = as_usize(field(obj, "dim", path)?, &child(path, "dim"))?;
    let ep = child(path, "effects");
    let effects = as_array(field(obj, "effects", path)?, &ep)?
        .iter()
        .enumerate()
        .map(|(i, e)| {
            let p = format!("{ep}[{i}]");
            let h = hermitian_from_json(e, &p)?;
            if h.dim() != dim {
                return Err(err(&p, format!("effect has dimension {}, declared {dim}", h.dim())));
            }
            Ok(h)
        })
        .collect::<Result<Vec<_>>>()?;
    Observable::new(effects).map_err(|e| err(path, e.to_string()))
}

pub fn channel_to_json(ch: &Channel) -> Value {
    json!({
        "dim_in": ch.dim_in(),
        "dim_out": ch.dim_out(),
        "kraus": ch.kraus().iter().map(matrix_to_json).collect::<Vec<_>>(),
    })
}

pub fn channel_from_json(v: &Value, path: &str) -> Result<Channel> {
    let obj = v.as_object().ok_or_else(|| err(path, "expected an object"))?;
    let dim_in = as_usize(field(obj, "dim_in", path)?, &child(path, "dim_in"))?;
    let dim_out = as_usize(field(obj, "dim_out", path)?, &child(path, "dim_out"))?;
    let kp = child(path, "kraus");
    let kraus = as_array(field(obj, "kraus", path)?, &kp)?
        .iter()
        .enumerate()
        .map(|(i, k)| matrix_from_json(k, &format!("{kp}[{i}]")))
        .collect::<Result<Vec<_>>>()?;
    Channel::new(dim_in, dim_out, kraus).map_err(|e| err(path, e.to_string()))
}

/// Grid of matrices nested by axis: `joint[x][y]` for a pair.
pub fn joint_to_json(j: &JointCandidate) -> Value {
    fn nest(j: &JointCandidate, prefix: &mut Vec<usize>) -> Value {
        let axis = prefix.len();
        if axis == j.shape().len() {
            return matrix_to_json(j.cell(prefix).matrix());
        }
        Value::Array(
            (0..j.shape()[axis])
                .map(|x| {
                    prefix.push(x);
                    let v = nest(j, prefix);
                    prefix.pop();
                    v
                })
                .collect(),
        )
    }
    nest(j, &mut Vec::new())
}

pub fn report_to_json(r: &MarginReport) -> Value {
    json!({
        "margin": r.margin,
        "status": r.status.as_str(),
        "residual": r.residual,
        "iterations": r.iterations,
        "joint": r.joint.as_ref().map(joint_to_json),
    })
}

/// Parses a whole document, reporting serde's line and column on syntax errors.
pub fn parse_document(text: &str, origin: &str) -> Result<Value> {
    serde_json::from_str(text).map_err(|e| {
        let full = e.to_string();
        let msg = full.rsplit_once(" at line ").map_or(full.as_str(), |(m, _)| m);
        err(origin, format!("line {}, column {}: {msg}", e.line(), e.column()))
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::operator::pauli;
    use crate::sdp::{compat_margin, SolverConfig};

    #[test]
    fn matrix_round_trip() {
        let m = pauli(2).into_matrix();
        let v = matrix_to_json(&m);
        assert_eq!(v, json!([[[0.0, 0.0], [0.0, -1.0]], [[0.0, 1.0], [0.0, 0.0]]]));
        assert_eq!(matrix_from_json(&v, "m").unwrap(), m);
    }

    #[test]
    fn observable_forms() {
        let q = QubitDichotomic::from_parts(0.1, [0.2, 0.0, -0.3]).unwrap();
        let from_short = observable_from_json(&qubit_to_json(&q), "").unwrap();
        let full = observable_to_json(&q.observable());
        let from_full = observable_from_json(&full, "").unwrap();
        assert!(from_short.approx_eq(&from_full, 1e-15));
    }

    #[test]
    fn errors_name_the_field() {
        let bad = json!({"dim": 2, "effects": [[[[1.0, 0.0], [0.0, 0.0]], [[0.0, 0.0], "x"]]]});
        let e = observable_from_json(&bad, "").unwrap_err().to_string();
        assert!(e.contains("effects[0][1][1]"), "{e}");
        let e = observable_from_json(&json!({"effects": []}), "a.json").unwrap_err().to_string();
        assert!(e.contains("a.json") && e.contains("dim"), "{e}");
        let e = parse_document("{\n \"dim\": ,\n}", "b.json").unwrap_err().to_string();
        assert!(e.contains("line 2"), "{e}");
    }

    #[test]
    fn channel_and_report() {
        let ch = crate::channel::depolarizing(0.5, 2).unwrap();
        let back = channel_from_json(&channel_to_json(&ch), "").unwrap();
        assert_eq!(back.kraus().len(), ch.kraus().len());
        let a = QubitDichotomic::from_parts(0.0, [0.5, 0.0, 0.0]).unwrap().observable();
        let r = compat_margin(&[a.clone(), a], &SolverConfig::decide()).unwrap();
        let v = report_to_json(&r);
        assert_eq!(v["status"], "compatible");
        assert_eq!(v["joint"].as_array().unwrap().len(), 2);
        assert_eq!(v["joint"][1][1].as_array().unwrap().len(), 2);
    }
}
