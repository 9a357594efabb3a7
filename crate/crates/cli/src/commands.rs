use anyhow::{bail, Context, Result};
use jointmeas_core::channel::{breaks_incompatibility_of, Channel};
use jointmeas_core::criteria::{busch_slack, jordan_check, ylo_slack, COMMUTE_TOL};
use jointmeas_core::entanglement::{partial_state_checks, three_qubit_reductions};
use jointmeas_core::json::report_to_json;
use jointmeas_core::measurement::max_commutator_norm;
use jointmeas_core::operator::{Side, PSD_TOL};
use jointmeas_core::sdp::{
    compat_margin, robustness_optimal, robustness_uniform, specker_check, NoiseModel, SpeckerVerdict,
};
use jointmeas_core::witness::{witness_bound_violation, xi, TestEnsemble};
use jointmeas_core::{DensityOperator, MarginReport, Observable, QubitDichotomic, SolverConfig, Status};
use serde_json::{json, Value};

use crate::input::require_count;
use crate::report::{num, Exit, Report, Table};

/// Slack band inside which a closed-form test is reported as boundary.
const ANALYTIC_BAND: f64 = 1e-9;
const SHARP_TOL: f64 = 1e-9;
const UNBIASED_TOL: f64 = 1e-12;

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
enum Verdict {
    Compatible,
    Incompatible,
    Boundary,
    Undecided,
}

impl Verdict {
    fn as_str(self) -> &'static str {
        match self {
            Verdict::Compatible => "compatible",
            Verdict::Incompatible => "incompatible",
            Verdict::Boundary => "boundary",
            Verdict::Undecided => "undecided",
        }
    }

    fn from_status(s: Status) -> Self {
        match s {
            Status::Compatible => Verdict::Compatible,
            Status::Incompatible => Verdict::Incompatible,
            Status::Boundary => Verdict::Boundary,
        }
    }

    fn from_slack(slack: f64) -> Self {
        if slack.abs() <= ANALYTIC_BAND {
            Verdict::Boundary
        } else if slack < 0.0 {
            Verdict::Compatible
        } else {
            Verdict::Incompatible
        }
    }
}

fn exit_for(status: Status) -> Exit {
    if status == Status::Boundary {
        Exit::Inconclusive
    } else {
        Exit::Conclusive
    }
}

fn qubit_pair(obs: &[Observable]) -> Option<(QubitDichotomic, QubitDichotomic)> {
    match obs {
        [a, b] => Some((QubitDichotomic::from_observable(a).ok()?, QubitDichotomic::from_observable(b).ok()?)),
        _ => None,
    }
}

fn unbiased(q: &QubitDichotomic) -> bool {
    q.bias.abs() <= UNBIASED_TOL
}

/// Every applicable criterion, with margins signed so that positive values
/// favor compatibility.
pub fn check(obs: &[Observable], cfg: &SolverConfig) -> Result<Report> {
    require_count(obs, 2, None, "check")?;
    let mut rows: Vec<(&'static str, Verdict, f64)> = Vec::new();

    // commuting effects give a product joint; a sharp observable must commute
    let mut worst = 0.0f64;
    let mut sharp_conflict = false;
    for i in 0..obs.len() {
        for j in i + 1..obs.len() {
            let n = max_commutator_norm(&obs[i], &obs[j])?;
            worst = worst.max(n);
            if n > COMMUTE_TOL && (obs[i].is_sharp(SHARP_TOL) || obs[j].is_sharp(SHARP_TOL)) {
                sharp_conflict = true;
            }
        }
    }
    let v = if worst <= COMMUTE_TOL {
        Verdict::Compatible
    } else if sharp_conflict {
        Verdict::Incompatible
    } else {
        Verdict::Undecided
    };
    rows.push(("commutativity", v, -worst));

    let qubits = qubit_pair(obs);
    if obs.len() == 2 {
        let (jordan, grid) = jordan_check(&obs[0], &obs[1])?;
        // for unbiased qubit pairs the Jordan product is also necessary
        let exact = qubits.is_some_and(|(a, b)| unbiased(&a) && unbiased(&b));
        let v = match (jordan.holds(), exact) {
            (true, _) => Verdict::Compatible,
            (false, true) => Verdict::Incompatible,
            (false, false) => Verdict::Undecided,
        };
        rows.push(("jordan", v, grid.min_cell_eigenvalue().1));
    }

    if let Some((a, b)) = qubits {
        if unbiased(&a) && unbiased(&b) {
            let s = busch_slack(&a.bloch, &b.bloch);
            rows.push(("unbiased qubit", Verdict::from_slack(s), -s));
        } else {
            match ylo_slack(&a, &b)? {
                Some(s) => rows.push(("biased qubit", Verdict::from_slack(s), -s)),
                None => {
                    // a sharp member: compatible iff the pair commutes
                    let n = max_commutator_norm(&obs[0], &obs[1])?;
                    let v = if n <= COMMUTE_TOL { Verdict::Compatible } else { Verdict::Incompatible };
                    rows.push(("biased qubit", v, -n));
                }
            }
        }
    }

    let sdp = compat_margin(obs, cfg)?;
    rows.push(("sdp", Verdict::from_status(sdp.status), sdp.margin));

    let decided: Vec<Verdict> = rows
        .iter()
        .map(|r| r.1)
        .filter(|v| matches!(v, Verdict::Compatible | Verdict::Incompatible))
        .collect();
    let (overall, exit) = match decided.first() {
        None => ("inconclusive", Exit::Inconclusive),
        Some(first) if decided.iter().any(|v| v != first) => ("conflict", Exit::Inconclusive),
        Some(first) => (first.as_str(), Exit::Conclusive),
    };

    let mut table = Table::new(vec!["criterion", "verdict", "margin"]);
    for (name, v, m) in &rows {
        table.push(vec![name.to_string(), v.as_str().to_string(), num(*m)]);
    }
    let json = json!({
        "verdict": overall,
        "criteria": rows
            .iter()
            .map(|(name, v, m)| json!({ "criterion": name, "verdict": v.as_str(), "margin": m }))
            .collect::<Vec<_>>(),
        "sdp": report_to_json(&sdp),
    });
    let mut report = Report::new(json, exit);
    report.table = Some(table);
    report.field("verdict", overall);
    Ok(report)
}

fn margin_json(r: &MarginReport) -> Value {
    let mut v = report_to_json(r);
    let obj = v.as_object_mut().expect("report is an object");
    obj.insert("lower_bound".into(), json!(r.lower_bound));
    obj.insert("upper_bound".into(), json!(r.upper_bound));
    obj.insert("upper_certified".into(), json!(r.upper_certified));
    v
}

pub fn margin(obs: &[Observable], cfg: &SolverConfig) -> Result<Report> {
    require_count(obs, 1, None, "margin")?;
    let r = compat_margin(obs, cfg)?;
    let mut report = Report::new(margin_json(&r), exit_for(r.status));
    report.field("status", r.status);
    report.field("margin", num(r.margin));
    report.field("lower bound", num(r.lower_bound));
    let cert = if r.upper_certified { "certified" } else { "heuristic" };
    report.field("upper bound", format!("{} ({cert})", num(r.upper_bound)));
    report.field("iterations", r.iterations);
    report.field("residual", num(r.residual));
    Ok(report)
}

pub fn robustness(obs: &[Observable], model: NoiseModel, precision: f64, cfg: &SolverConfig) -> Result<Report> {
    require_count(obs, 2, Some(2), "robustness")?;
    let pair = (&obs[0], &obs[1]);
    let r = match model {
        NoiseModel::UniformTrivial => robustness_uniform(pair, precision, cfg)?,
        NoiseModel::OptimalTrivial => robustness_optimal(pair, precision, cfg)?,
    };
    let noise = r.certificate.as_ref().and_then(|c| c.noise.clone());
    let json = json!({
        "t_star": r.t_star,
        "bracket": [r.bracket.0, r.bracket.1],
        "noise_model": r.noise_model,
        "probes": r.probes,
        "noise": noise,
    });
    let mut report = Report::new(json, Exit::Conclusive);
    report.field("t*", num(r.t_star));
    report.field("bracket", format!("[{}, {}]", num(r.bracket.0), num(r.bracket.1)));
    report.field("noise model", serde_json::to_value(r.noise_model)?.as_str().unwrap_or_default());
    report.field("probes", r.probes);
    if let Some(p) = noise {
        for (k, pv) in p.iter().enumerate() {
            let s: Vec<String> = pv.iter().map(|v| num(*v)).collect();
            report.field(format!("noise {k}"), format!("({})", s.join(", ")));
        }
    }
    Ok(report)
}

pub fn witness(obs: &[Observable], ensembles: Option<(TestEnsemble, TestEnsemble)>) -> Result<Report> {
    require_count(obs, 2, Some(2), "witness")?;
    match ensembles {
        None => {
            let q: Vec<QubitDichotomic> = obs
                .iter()
                .map(QubitDichotomic::from_observable)
                .collect::<jointmeas_core::Result<_>>()
                .context("the qubit witness needs two-outcome qubit observables")?;
            let w = witness_bound_violation(&q[0], &q[1]);
            let verdict = if w.violated { "violated: incompatible" } else { "not violated: no conclusion" };
            let mut json = serde_json::to_value(w)?;
            json["verdict"] = json!(if w.violated { "incompatible" } else { "undecided" });
            let mut report = Report::new(json, Exit::Conclusive);
            report.field("value", num(w.value));
            report.field("bound", num(w.bound));
            report.field("verdict", verdict);
            Ok(report)
        }
        Some((e1, e2)) => {
            let value = xi(&obs[0], &obs[1], &e1, &e2)?;
            let json = json!({ "value": value, "bound": null, "violated": null, "verdict": "undecided" });
            let mut report = Report::new(json, Exit::Inconclusive);
            report.field("value", num(value));
            report.field("bound", "unknown for these ensembles");
            report.field("verdict", "no conclusion");
            Ok(report)
        }
    }
}

pub fn triplet(t: f64) -> Result<Vec<Observable>> {
    (0..3)
        .map(|k| {
            let mut a = [0.0; 3];
            a[k] = t;
            Ok(QubitDichotomic::from_parts(0.0, a)?.observable())
        })
        .collect()
}

fn subset_label(indices: &[usize]) -> String {
    indices.iter().map(|i| i.to_string()).collect::<Vec<_>>().join("+")
}

pub fn specker(obs: &[Observable], cfg: &SolverConfig) -> Result<Report> {
    require_count(obs, 3, None, "specker")?;
    let r = specker_check(obs, cfg)?;
    let (verdict, exit) = match &r.verdict {
        SpeckerVerdict::Specker => ("specker".to_string(), Exit::Conclusive),
        SpeckerVerdict::NotSpecker => ("not specker".to_string(), Exit::Conclusive),
        SpeckerVerdict::Inconclusive { subset } => {
            (format!("inconclusive at subset {}", subset_label(subset)), Exit::Inconclusive)
        }
    };
    let all: Vec<usize> = (0..obs.len()).collect();
    let mut table = Table::new(vec!["subset", "status", "margin"]);
    table.push(vec![subset_label(&all), r.full.status.to_string(), num(r.full.margin)]);
    for (idx, s) in &r.subset_reports {
        table.push(vec![subset_label(idx), s.status.to_string(), num(s.margin)]);
    }
    let json = json!({
        "is_specker": r.is_specker(),
        "verdict": verdict,
        "full": { "status": r.full.status.as_str(), "margin": r.full.margin },
        "subsets": r.subset_reports
            .iter()
            .map(|(idx, s)| json!({ "indices": idx, "status": s.status.as_str(), "margin": s.margin }))
            .collect::<Vec<_>>(),
    });
    let mut report = Report::new(json, exit);
    report.table = Some(table);
    report.field("is_specker", r.is_specker());
    report.field("verdict", verdict);
    Ok(report)
}

pub fn channel(ch: &Channel, obs: &[Observable], cfg: &SolverConfig) -> Result<Report> {
    let pt = ch.choi().partial_transpose_min_eigenvalue();
    let qubit = ch.dim_in() == 2 && ch.dim_out() == 2;
    // an entanglement breaking channel has a PPT Choi matrix; the converse holds for qubits
    let eb = if pt < -PSD_TOL {
        Some(false)
    } else if qubit {
        Some(true)
    } else {
        None
    };
    let eb_str = match eb {
        Some(true) => "yes",
        Some(false) => "no",
        None => "undecided",
    };
    let mut exit = if eb.is_some() { Exit::Conclusive } else { Exit::Inconclusive };
    let mut json = json!({
        "dim_in": ch.dim_in(),
        "dim_out": ch.dim_out(),
        "kraus": ch.kraus().len(),
        "trace_preservation_error": ch.trace_preservation_error(),
        "choi_pt_min_eigenvalue": pt,
        "entanglement_breaking": eb,
    });
    let mut fields = vec![
        ("dimensions".to_string(), format!("{} -> {}", ch.dim_in(), ch.dim_out())),
        ("kraus operators".to_string(), ch.kraus().len().to_string()),
        ("trace preservation error".to_string(), num(ch.trace_preservation_error())),
        ("choi pt min eigenvalue".to_string(), num(pt)),
        ("entanglement breaking".to_string(), eb_str.to_string()),
    ];
    if !obs.is_empty() {
        if let Some(bad) = obs.iter().find(|o| o.dim() != ch.dim_out()) {
            bail!("observables must act on the output space of dimension {}, got {}", ch.dim_out(), bad.dim());
        }
        let r = breaks_incompatibility_of(ch, obs, cfg)?;
        if r.status == Status::Boundary {
            exit = Exit::Inconclusive;
        } else if eb.is_none() {
            exit = Exit::Conclusive;
        }
        fields.push(("dual images".to_string(), r.status.to_string()));
        fields.push(("dual images margin".to_string(), num(r.margin)));
        json["dual_images"] = json!({ "status": r.status.as_str(), "margin": r.margin });
    }
    let mut report = Report::new(json, exit);
    report.fields = fields;
    Ok(report)
}

fn pt_verdict(pt: f64, exact: bool) -> &'static str {
    if pt < -PSD_TOL {
        "entangled"
    } else if exact {
        "separable"
    } else {
        "undecided"
    }
}

pub fn entanglement(state: &DensityOperator, dims: Option<(usize, usize)>) -> Result<Report> {
    let d = state.dim();
    if dims.is_none() && d == 8 {
        let reductions = three_qubit_reductions(state)?;
        let labels = ["1-2", "1-3", "2-3"];
        let mut table = Table::new(vec!["qubits", "pt_min_eigenvalue", "verdict"]);
        let mut items = Vec::new();
        for (label, r) in labels.iter().zip(&reductions) {
            let pt = r.op().partial_transpose((2, 2), Side::Second)?.min_eigenvalue();
            let v = pt_verdict(pt, true);
            table.push(vec![label.to_string(), num(pt), v.to_string()]);
            items.push(json!({ "qubits": label, "pt_min_eigenvalue": pt, "verdict": v }));
        }
        let mut report = Report::new(json!({ "purity": state.purity(), "reductions": items }), Exit::Conclusive);
        report.table = Some(table);
        report.field("purity", num(state.purity()));
        return Ok(report);
    }
    let dims = match dims {
        Some(p) => p,
        None if d == 4 => (2, 2),
        None => bail!("--dims is required for a state of dimension {d}"),
    };
    if dims.0 * dims.1 != d {
        bail!("dimensions {}x{} do not match a state of dimension {d}", dims.0, dims.1);
    }
    let pt = state.op().partial_transpose(dims, Side::Second)?.min_eigenvalue();
    let checks = partial_state_checks(state, dims)?;
    // a pure marginal or a vanishing distance to the product means a product state
    let product = checks.pure_marginal || checks.product_distance <= PSD_TOL;
    let verdict = if pt >= -PSD_TOL && product {
        "separable"
    } else {
        pt_verdict(pt, dims == (2, 2))
    };
    let exit = if verdict == "undecided" { Exit::Inconclusive } else { Exit::Conclusive };
    let json = json!({
        "dims": [dims.0, dims.1],
        "pt_min_eigenvalue": pt,
        "verdict": verdict,
        "partial_states": checks,
    });
    let mut report = Report::new(json, exit);
    report.field("pt min eigenvalue", num(pt));
    report.field("verdict", verdict);
    report.field("purity of first part", num(checks.purity_first));
    report.field("purity of second part", num(checks.purity_second));
    report.field("pure marginal", checks.pure_marginal);
    report.field("distance to product", num(checks.product_distance));
    Ok(report)
}
