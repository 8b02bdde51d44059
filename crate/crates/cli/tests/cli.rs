use std::path::{Path, PathBuf};
use std::process::{Command, Output};

use serde_json::Value;

fn zaktop(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_zaktop"))
        .args(args)
        .output()
        .expect("run zaktop")
}

fn stdout(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).unwrap()
}

fn stderr(out: &Output) -> String {
    String::from_utf8(out.stderr.clone()).unwrap()
}

fn golden(name: &str) -> PathBuf {
    Path::new(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name)
}

/// Location of an argmin over a flat |E| band; depends on rounding noise.
const UNSTABLE: [&str; 2] = ["k_at_min", "worst_k"];

fn same_shape(expected: &Value, actual: &Value, path: &str) {
    match (expected, actual) {
        (Value::Object(e), Value::Object(a)) => {
            let ek: Vec<_> = e.keys().collect();
            let ak: Vec<_> = a.keys().collect();
            assert_eq!(ek, ak, "keys differ at {path}");
            for (k, v) in e {
                if UNSTABLE.contains(&k.as_str()) {
                    assert!(a[k].is_number(), "{path}.{k} is not a number");
                    continue;
                }
                same_shape(v, &a[k], &format!("{path}.{k}"));
            }
        }
        (Value::Array(e), Value::Array(a)) => {
            assert_eq!(e.len(), a.len(), "length differs at {path}");
            for (i, (e, a)) in e.iter().zip(a).enumerate() {
                same_shape(e, a, &format!("{path}[{i}]"));
            }
        }
        (Value::Number(e), Value::Number(a)) => {
            let (e, a) = (e.as_f64().unwrap(), a.as_f64().unwrap());
            assert!((e - a).abs() <= 1e-6, "{path}: expected {e}, got {a}");
        }
        (e, a) => assert_eq!(e, a, "value differs at {path}"),
    }
}

fn check_golden(name: &str, args: &[&str]) {
    let out = zaktop(args);
    assert!(out.status.success(), "{}", stderr(&out));
    let actual: Value = serde_json::from_str(&stdout(&out)).unwrap();
    let expected: Value =
        serde_json::from_str(&std::fs::read_to_string(golden(name)).unwrap()).unwrap();
    same_shape(&expected, &actual, "$");
}

#[test]
fn golden_invariant_topological_kitaev() {
    check_golden(
        "invariant_kitaev_1.json",
        &["invariant", "--preset", "kitaev", "--coeffs", "1:1", "--format", "json"],
    );
}

#[test]
fn golden_invariant_trivial_kitaev() {
    check_golden(
        "invariant_kitaev_0_2_1_1.json",
        &["invariant", "--preset", "kitaev", "--coeffs", "0:2,1:1", "--format", "json"],
    );
}

#[test]
fn golden_invariant_doubled_kitaev() {
    check_golden(
        "invariant_kitaev_1_diii.json",
        &[
            "invariant", "--preset", "kitaev", "--coeffs", "1:1", "--double", "particle-hole",
            "--format", "json",
        ],
    );
}

#[test]
fn golden_classify_kitaev() {
    check_golden(
        "classify_kitaev_1.json",
        &["classify", "--preset", "kitaev", "--coeffs", "1:1", "--format", "json"],
    );
}

#[test]
fn invariant_topological_chain() {
    let out = zaktop(&["invariant", "--preset", "kitaev", "--coeffs", "1:1", "--format", "json"]);
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["z2"], 1);
    assert_eq!(v["oracle_winding"], 1);
    assert_eq!(v["parity_consistent"], true);
    assert_eq!(v["config"]["steps"], 2048);
}

#[test]
fn invariant_trivial_chain() {
    let out = zaktop(&["invariant", "--preset", "kitaev", "--coeffs", "0:2,1:1", "--format", "csv"]);
    assert!(out.status.success());
    let text = stdout(&out);
    let mut rows = csv::Reader::from_reader(text.as_bytes());
    let headers = rows.headers().unwrap().clone();
    let row = rows.records().next().unwrap().unwrap();
    let field = |name: &str| &row[headers.iter().position(|h| h == name).unwrap()];
    assert_eq!(field("z2"), "0");
    assert_eq!(field("oracle_winding"), "0");
    assert_eq!(field("class"), "BDI");
}

#[test]
fn gapless_chain_exits_with_gapless_code() {
    let out = zaktop(&["invariant", "--preset", "kitaev", "--coeffs", "0:1,1:1"]);
    assert_eq!(out.status.code(), Some(4));
    assert!(stderr(&out).contains("gapless"));
    assert!(stdout(&out).is_empty());
}

#[test]
fn classify_preset_file() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("kitaev.json");
    let out = zaktop(&[
        "export", "--preset", "kitaev", "--coeffs", "1:1", "-o", file.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let out = zaktop(&["classify", "--input", file.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(stdout(&out)
        .lines()
        .any(|l| l == "class: BDI, K-theory(1D): Z, I-support: Z2, quaternionic: no"));
    assert!(stdout(&out).contains("symmetry T: max deviation"));
    assert!(stdout(&out).contains("config: steps=2048"));
}

#[test]
fn classify_without_symmetries_is_class_a() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("a.json");
    std::fs::write(
        &file,
        r#"{"N": 2, "R": 0, "hoppings": [{"offset": 0, "matrix": [[[1, 0], [0, 0]], [[0, 0], [-1, 0]]]}]}"#,
    )
    .unwrap();
    let out = zaktop(&["classify", "-i", file.to_str().unwrap()]);
    assert!(out.status.success());
    assert!(stdout(&out).lines().any(|l| l.starts_with("class: A,")));
}

#[test]
fn malformed_row_reports_line() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("bad.json");
    std::fs::write(
        &file,
        "{\"N\": 2, \"R\": 0, \"hoppings\": [{\"offset\": 0, \"matrix\": [\n[[1, 0], [0, 0]],\n[[0, 0]]\n]}]}",
    )
    .unwrap();
    let out = zaktop(&["classify", "-i", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("line 3"), "{}", stderr(&out));
}

#[test]
fn symmetry_failure_exit_code() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("broken.json");
    // S commutes with H here instead of anticommuting.
    std::fs::write(
        &file,
        r#"{"N": 2, "R": 0,
"hoppings": [{"offset": 0, "matrix": [[[1, 0], [0, 0]], [[0, 0], [-1, 0]]]}],
"symmetries": {"S": {"antiunitary": false, "matrix": [[[1, 0], [0, 0]], [[0, 0], [-1, 0]]]}}}"#,
    )
    .unwrap();
    let out = zaktop(&["classify", "-i", file.to_str().unwrap()]);
    assert_eq!(out.status.code(), Some(3), "{}", stderr(&out));
}

#[test]
fn sweep_finds_single_transition() {
    let out = zaktop(&[
        "sweep", "--preset", "kitaev", "--coeffs", "0:0,1:1", "--to-coeffs", "0:2,1:1", "--format",
        "csv",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    assert_eq!(text.lines().next(), Some("t,gap,z2"));
    let mut z2 = Vec::new();
    for record in csv::Reader::from_reader(text.as_bytes()).records() {
        let record = record.unwrap();
        let t: f64 = record[0].parse().unwrap();
        z2.push((t, record[2].to_string()));
    }
    assert_eq!(z2.len(), 101);
    for (t, z) in &z2 {
        let expected = if *t < 0.5 {
            "1"
        } else if *t > 0.5 {
            "0"
        } else {
            "NA"
        };
        assert_eq!(z, expected, "t = {t}");
    }
    let summary = stderr(&out);
    assert!(summary.contains("1 transition(s)"), "{summary}");
    assert!(summary.contains("t = 0.500000"), "{summary}");
}

#[test]
fn constant_sweep_has_no_transitions() {
    let out = zaktop(&[
        "sweep", "--preset", "kitaev", "--coeffs", "1:1", "--to-coeffs", "0:0.5,1:1", "--samples", "21",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    assert!(stdout(&out).contains("0 transition(s)"));
}

#[test]
fn sweep_rejects_different_dimensions() {
    let dir = tempfile::tempdir().unwrap();
    let file = dir.path().join("big.json");
    let out = zaktop(&[
        "export", "--preset", "multichannel", "--coeffs", "0:1,0,0,1", "-o", file.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let out = zaktop(&[
        "sweep", "--preset", "kitaev", "--coeffs", "1:1", "--to", file.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2), "{}", stderr(&out));
}

fn spectrum_rows(args: &[&str]) -> (Vec<String>, Vec<Vec<f64>>) {
    let out = zaktop(args);
    assert!(out.status.success(), "{}", stderr(&out));
    let text = stdout(&out);
    let mut reader = csv::Reader::from_reader(text.as_bytes());
    let headers = reader.headers().unwrap().iter().map(String::from).collect();
    let rows = reader
        .records()
        .map(|r| r.unwrap().iter().map(|x| x.parse().unwrap()).collect())
        .collect();
    (headers, rows)
}

#[test]
fn spectrum_flat_bands() {
    let (headers, rows) = spectrum_rows(&[
        "spectrum", "--preset", "kitaev", "--coeffs", "1:1", "--kgrid", "64", "--format", "csv",
    ]);
    assert_eq!(headers, ["k", "E_1", "E_2"]);
    assert_eq!(rows.len(), 64);
    for row in rows {
        assert!((row[1] + 1.0).abs() < 1e-12 && (row[2] - 1.0).abs() < 1e-12);
    }
}

#[test]
fn spectrum_gap_minimum() {
    let (_, rows) = spectrum_rows(&[
        "spectrum", "--preset", "kitaev", "--coeffs", "0:0.5,1:1", "--kgrid", "64", "--format", "csv",
    ]);
    let (k, e) = rows
        .iter()
        .map(|r| (r[0], r[2].abs().min(r[1].abs())))
        .min_by(|a, b| a.1.total_cmp(&b.1))
        .unwrap();
    assert!((e - 0.5).abs() < 1e-12);
    assert!((k - std::f64::consts::PI).abs() < 1e-12);
}

#[test]
fn spectrum_chiral_symmetric() {
    let (headers, rows) = spectrum_rows(&[
        "spectrum", "--preset", "multichannel", "--coeffs", "0:0.3,0,0,0.2;1:1,0.4,0,1", "--kgrid",
        "32", "--format", "csv",
    ]);
    assert_eq!(headers.len(), 5);
    for row in rows {
        for i in 1..=4 {
            assert!((row[i] + row[5 - i]).abs() < 1e-10);
        }
    }
}

#[test]
fn export_round_trip_is_bit_exact() {
    let dir = tempfile::tempdir().unwrap();
    let first = dir.path().join("first.json");
    let second = dir.path().join("second.json");
    let out = zaktop(&[
        "export", "--preset", "multichannel", "--coeffs", "0:0.1,0.7,-0.3,0.2;1:1,0.3333333333333333,0,1",
        "-o", first.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let out = zaktop(&["export", "-i", first.to_str().unwrap(), "-o", second.to_str().unwrap()]);
    assert!(out.status.success());
    let (a, sa) = zaktop::format::load_model(&first).unwrap();
    let (b, sb) = zaktop::format::load_model(&second).unwrap();
    assert_eq!(a.hoppings(), b.hoppings());
    assert_eq!(sa.declared(), sb.declared());
    assert_eq!(
        std::fs::read_to_string(&first).unwrap(),
        std::fs::read_to_string(&second).unwrap()
    );
}

#[test]
fn tolerance_overrides() {
    let out = zaktop(&[
        "invariant", "--preset", "kitaev", "--coeffs", "1:1", "--tol", "gap=1e-6", "--tol", "zak=1e-4",
        "--format", "json",
    ]);
    assert!(out.status.success());
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["config"]["tolerances"]["gap"], 1e-6);
    assert_eq!(v["config"]["tolerances"]["zak"], 1e-4);

    let out = zaktop(&["invariant", "--preset", "kitaev", "--coeffs", "1:1", "--tol", "nope=1"]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn config_file_rejects_unknown_keys() {
    let dir = tempfile::tempdir().unwrap();
    let good = dir.path().join("good.json");
    let bad = dir.path().join("bad.json");
    std::fs::write(&good, r#"{"steps": 512, "tolerances": {"intw": 1e-5}}"#).unwrap();
    std::fs::write(&bad, r#"{"steps": 512, "stpes": 4}"#).unwrap();

    let out = zaktop(&[
        "invariant", "--preset", "kitaev", "--coeffs", "1:1", "--config", good.to_str().unwrap(),
        "--format", "json",
    ]);
    assert!(out.status.success(), "{}", stderr(&out));
    let v: Value = serde_json::from_str(&stdout(&out)).unwrap();
    assert_eq!(v["config"]["steps"], 512);
    assert_eq!(v["config"]["tolerances"]["intw"], 1e-5);
    assert_eq!(v["config"]["tolerances"]["gap"], 1e-8);

    let out = zaktop(&[
        "invariant", "--preset", "kitaev", "--coeffs", "1:1", "--config", bad.to_str().unwrap(),
    ]);
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn step_bounds() {
    for steps in ["63", "1048577"] {
        let out = zaktop(&["invariant", "--preset", "kitaev", "--coeffs", "1:1", "--steps", steps]);
        assert_eq!(out.status.code(), Some(2));
    }
    let out = zaktop(&["invariant", "--preset", "kitaev", "--coeffs", "1:1", "--steps", "64"]);
    assert!(out.status.success(), "{}", stderr(&out));
}

#[test]
fn dump_transport_writes_samples() {
    let dir = tempfile::tempdir().unwrap();
    let dump = dir.path().join("dump.jsonl");
    let out = zaktop(&[
        "invariant", "--preset", "kitaev", "--coeffs", "1:1", "--steps", "64", "--dump-transport",
        dump.to_str().unwrap(),
    ]);
    assert!(out.status.success());
    let text = std::fs::read_to_string(dump).unwrap();
    let lines: Vec<&str> = text.lines().collect();
    assert_eq!(lines.len(), 66);
    let last: Value = serde_json::from_str(lines[65]).unwrap();
    assert!(last["X"].is_array() && last["phases"].is_array());
}

#[test]
fn usage_errors_exit_two() {
    assert_eq!(zaktop(&["classify"]).status.code(), Some(2));
    assert_eq!(zaktop(&["classify", "--preset", "kitaev"]).status.code(), Some(2));
    assert_eq!(zaktop(&["frobnicate"]).status.code(), Some(2));
}

#[test]
fn missing_file_is_io_error() {
    let out = zaktop(&["classify", "-i", "/nonexistent/model.json"]);
    assert_eq!(out.status.code(), Some(1));
}
