use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn fixture(name: &str) -> String {
    let p: PathBuf = [env!("CARGO_MANIFEST_DIR"), "tests", "fixtures", name].iter().collect();
    p.to_string_lossy().into_owned()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_jointmeas"))
        .args(args)
        .output()
        .expect("binary runs")
}

fn code(out: &Output) -> i32 {
    out.status.code().expect("exited normally")
}

fn json(args: &[&str]) -> (Value, i32) {
    let mut full = vec!["--json"];
    full.extend_from_slice(args);
    let out = run(&full);
    let stdout = String::from_utf8(out.stdout.clone()).unwrap();
    let v = serde_json::from_str(&stdout).unwrap_or_else(|e| panic!("{e}: {stdout}"));
    (v, code(&out))
}

const SIGMA_X: &str = "0,1,0,0";
const SIGMA_Y: &str = "0,0,1,0";

#[test]
fn sharp_pair_every_criterion_says_incompatible() {
    let (v, code) = json(&["check", "--qubit", SIGMA_X, "--qubit", SIGMA_Y]);
    assert_eq!(code, 0);
    assert_eq!(v["verdict"], "incompatible");
    let criteria = v["criteria"].as_array().unwrap();
    assert_eq!(criteria.len(), 4);
    assert!(criteria.iter().all(|c| c["verdict"] == "incompatible"), "{v}");
    assert_eq!(v["sdp"]["joint"], Value::Null);
}

#[test]
fn identical_files_are_compatible() {
    let a = fixture("qubit_effects.json");
    let (v, code) = json(&["check", &a, &a]);
    assert_eq!(code, 0);
    assert_eq!(v["verdict"], "compatible");
    assert_eq!(v["sdp"]["status"], "compatible");
    assert!(v["sdp"]["joint"].is_array());
}

#[test]
fn half_length_unbiased_pair_is_compatible() {
    let (v, code) = json(&["check", "--qubit", "0,0.5,0,0", "--qubit", "0,0,0.5,0"]);
    assert_eq!(code, 0);
    assert_eq!(v["verdict"], "compatible");
    let text = String::from_utf8(run(&["check", "--qubit", "0,0.5,0,0", "--qubit", "0,0,0.5,0"]).stdout).unwrap();
    assert!(text.contains("unbiased qubit  compatible"), "{text}");
}

#[test]
fn array_file_and_higher_dimension() {
    let (v, code) = json(&["check", &fixture("qutrit_pair.json")]);
    assert_eq!(code, 0);
    assert_eq!(v["verdict"], "compatible");
    let (v, _) = json(&["check", &fixture("sharp_pair.json")]);
    assert_eq!(v["verdict"], "incompatible");
}

#[test]
fn specker_triplet() {
    let (v, code) = json(&["specker", "--triplet-t", "0.65"]);
    assert_eq!(code, 0);
    assert_eq!(v["is_specker"], true);
    assert_eq!(v["subsets"].as_array().unwrap().len(), 3);
    let (v, _) = json(&["specker", "--triplet-t", "0.5"]);
    assert_eq!(v["is_specker"], false);
}

#[test]
fn witness_on_sharp_pair() {
    let (v, code) = json(&["witness", "--qubit", SIGMA_X, "--qubit", SIGMA_Y]);
    assert_eq!(code, 0);
    assert!((v["value"].as_f64().unwrap() - 1.0).abs() < 1e-12);
    assert!((v["bound"].as_f64().unwrap() - 0.853553).abs() < 1e-6);
    assert_eq!(v["violated"], true);
    let text = String::from_utf8(run(&["witness", "--qubit", SIGMA_X, "--qubit", SIGMA_Y]).stdout).unwrap();
    assert!(text.contains("bound    0.853553"), "{text}");
}

#[test]
fn robustness_of_sharp_pair() {
    let (v, code) = json(&["robustness", "--qubit", SIGMA_X, "--qubit", SIGMA_Y]);
    assert_eq!(code, 0);
    let t = v["t_star"].as_f64().unwrap();
    assert!((t - 0.5f64.sqrt()).abs() <= 1e-4, "{v}");
    assert_eq!(v["noise_model"], "uniform_trivial");
    let (o, _) = json(&["robustness", "--noise", "optimal", "--precision", "1e-3", "--qubit", SIGMA_X, "--qubit", SIGMA_Y]);
    assert!(o["t_star"].as_f64().unwrap() >= t - 1e-3, "{o}");
}

#[test]
fn channel_reports() {
    let (v, code) = json(&["channel", "--depolarizing", "0.5", "--qubit", SIGMA_X, "--qubit", SIGMA_Y]);
    assert_eq!(code, 0);
    assert_eq!(v["entanglement_breaking"], false);
    assert_eq!(v["dual_images"]["status"], "compatible");
    let (v, code) = json(&["channel", "--channel", &fixture("depolarizing_03.json")]);
    assert_eq!(code, 0);
    assert_eq!(v["entanglement_breaking"], true);
    let (v, _) = json(&["channel", "--depolarizing", "1", "--qubit", SIGMA_X, "--qubit", SIGMA_Y]);
    assert_eq!(v["dual_images"]["status"], "incompatible");
}

#[test]
fn entanglement_reports() {
    let (v, code) = json(&["entanglement", "--bell"]);
    assert_eq!(code, 0);
    assert_eq!(v["verdict"], "entangled");
    assert!((v["pt_min_eigenvalue"].as_f64().unwrap() + 0.5).abs() < 1e-12);
    let (v, code) = json(&["entanglement", "--ghz"]);
    assert_eq!(code, 0);
    assert!(v["reductions"].as_array().unwrap().iter().all(|r| r["verdict"] == "separable"));
}

#[test]
fn csv_output() {
    let out = run(&["--csv", "check", "--qubit", SIGMA_X, "--qubit", SIGMA_Y]);
    let text = String::from_utf8(out.stdout).unwrap();
    assert!(text.starts_with("criterion,verdict,margin\ncommutativity,incompatible,"), "{text}");
}

#[test]
fn exit_codes() {
    let inconclusive: [&[&str]; 3] = [
        &["margin", "--qubit", "0,0.707108,0,0", "--qubit", "0,0,0.707108,0"],
        &["entanglement", "--dims", "3,3", &fixture("isotropic_qutrit.json")],
        &[
            "witness",
            "--qubit",
            SIGMA_X,
            "--qubit",
            SIGMA_Y,
            "--ensembles",
            &fixture("ensemble_x.json"),
            &fixture("ensemble_y.json"),
        ],
    ];
    for args in inconclusive {
        let out = run(args);
        assert_eq!(code(&out), 2, "{args:?}: {}", String::from_utf8_lossy(&out.stderr));
    }

    let malformed = fixture("malformed.json");
    let bad_entry = fixture("bad_entry.json");
    let not_normalized = fixture("not_normalized.json");
    let input_errors: [(&[&str], &str); 8] = [
        (&["check", &malformed, &malformed], "line 6, column 1"),
        (&["check", &bad_entry, &bad_entry], "effects[1][1][1]"),
        (&["check", &not_normalized, "--qubit", SIGMA_X], "do not sum to the identity"),
        (&["check", "no-such-file.json", "--qubit", SIGMA_X], "cannot read"),
        (&["check", "--qubit", SIGMA_X], "at least 2"),
        (&["check", "--qubit", "0,2,0,0", "--qubit", SIGMA_Y], "exceeds 1"),
        (&["--json", "--csv", "margin", "--qubit", SIGMA_X], "cannot be used"),
        (&["entanglement", "--dims", "2,2", &fixture("isotropic_qutrit.json")], "do not match"),
    ];
    for (args, message) in input_errors {
        let out = run(args);
        let stderr = String::from_utf8_lossy(&out.stderr);
        assert_eq!(code(&out), 1, "{args:?}: {stderr}");
        assert!(stderr.contains(message), "{args:?}: {stderr}");
    }
    assert_eq!(code(&run(&["--help"])), 0);
}

struct Row {
    pair: usize,
    criterion: String,
    verdict: String,
    margin: f64,
}

fn sweep(args: &[&str]) -> (String, Vec<Row>) {
    let mut full = vec!["sweep"];
    full.extend_from_slice(args);
    let out = run(&full);
    assert_eq!(code(&out), 0, "{}", String::from_utf8_lossy(&out.stderr));
    let text = String::from_utf8(out.stdout).unwrap();
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("pair_id,criterion,verdict,margin"));
    let rows = lines
        .map(|l| {
            let f: Vec<&str> = l.split(',').collect();
            Row {
                pair: f[0].parse().unwrap(),
                criterion: f[1].to_string(),
                verdict: f[2].to_string(),
                margin: f[3].parse().unwrap_or(f64::NAN),
            }
        })
        .collect();
    (text, rows)
}

fn verdict<'a>(rows: &'a [Row], pair: usize, criterion: &str) -> &'a Row {
    rows.iter().find(|r| r.pair == pair && r.criterion == criterion).unwrap()
}

#[test]
fn sweep_is_reproducible_and_ordered() {
    let (a, rows) = sweep(&["--n", "40", "--seed", "3"]);
    let (b, _) = sweep(&["--n", "40", "--seed", "3"]);
    assert_eq!(a, b);
    let (c, _) = sweep(&["--n", "40", "--seed", "4"]);
    assert_ne!(a, c);
    let ids: Vec<usize> = rows.iter().map(|r| r.pair).collect();
    assert!(ids.windows(2).all(|w| w[0] <= w[1]));
    assert_eq!(ids.last(), Some(&39));
    // a shorter sweep is a prefix of a longer one
    let (short, _) = sweep(&["--n", "10", "--seed", "3"]);
    assert!(a.starts_with(&short));
}

#[test]
fn sweep_containments_for_qubit_pairs() {
    let (_, rows) = sweep(&["--n", "100", "--seed", "11", "--family", "qubit"]);
    let count = |c: &str, v: &str| rows.iter().filter(|r| r.criterion == c && r.verdict == v).count();
    assert!(count("commute", "commuting") <= count("jordan", "holds"));
    assert!(count("jordan", "holds") <= count("sdp", "compatible"));
    for id in 0..100 {
        if verdict(&rows, id, "jordan").verdict == "holds" {
            assert_eq!(verdict(&rows, id, "sdp").verdict, "compatible", "pair {id}");
        }
        let analytic = verdict(&rows, id, "analytic");
        if analytic.margin.abs() > 1e-6 {
            let expect = if analytic.margin > 0.0 { "compatible" } else { "incompatible" };
            assert_eq!(verdict(&rows, id, "sdp").verdict, expect, "pair {id}");
        }
    }
    // the witness misses some incompatible pairs
    assert!((0..100).any(|id| {
        verdict(&rows, id, "sdp").verdict == "incompatible" && verdict(&rows, id, "witness").verdict == "not_violated"
    }));
}

#[test]
fn sweep_unbiased_jordan_is_exact() {
    let (_, rows) = sweep(&["--n", "100", "--seed", "5", "--family", "unbiased"]);
    let mut compared = 0;
    for id in 0..100 {
        if verdict(&rows, id, "sdp").margin.abs() <= 1e-6 {
            continue;
        }
        compared += 1;
        let jordan = verdict(&rows, id, "jordan").verdict == "holds";
        let sdp = verdict(&rows, id, "sdp").verdict == "compatible";
        assert_eq!(jordan, sdp, "pair {id}");
    }
    assert!(compared >= 90);
}

#[test]
fn sweep_general_family() {
    let (_, rows) = sweep(&["--n", "6", "--family", "general", "--dim", "3", "--outcomes", "2,3"]);
    assert_eq!(rows.len(), 6 * 3);
    assert!(rows.iter().all(|r| r.criterion != "analytic"));
    let out = run(&["sweep", "--n", "0"]);
    assert_eq!(code(&out), 1);
}
