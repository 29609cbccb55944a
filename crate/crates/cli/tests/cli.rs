use std::path::Path;
use std::process::Command;

use num_rational::BigRational;
use posinv::exact::{parse_rational, rational};
use serde_json::{json, Value};
use tempfile::TempDir;

const GOLDEN: f64 = 0.6180339887498948;

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn posinv(args: &[&str], env: &[(&str, &str)]) -> Run {
    let mut cmd = Command::new(env!("CARGO_BIN_EXE_posinv"));
    cmd.args(args).env_remove("POSINV_SEED");
    for (k, v) in env {
        cmd.env(k, v);
    }
    let out = cmd.output().expect("binary runs");
    Run {
        code: out.status.code().expect("exit code"),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn write(dir: &TempDir, name: &str, content: &str) -> String {
    let p = dir.path().join(name);
    std::fs::write(&p, content).unwrap();
    p.to_str().unwrap().to_string()
}

fn json_of(r: &Run) -> Value {
    serde_json::from_str(&r.stdout).unwrap_or_else(|e| panic!("{e}: {}", r.stdout))
}

fn transpose_doc() -> Value {
    json!({"algebra": {"blocks": [2]}, "map": {"kind": "matrix", "data": [1,0,0,0, 0,0,1,0, 0,1,0,0, 0,0,0,1]}})
}

fn cycle_doc() -> Value {
    json!({"map": {"kind": "stochastic", "data": [[0,1,0],[0,0,1],[1,0,0]]}})
}

fn kraus_doc() -> Value {
    // Two operators on M₂ ⊕ ℂ with K₁*K₁ + K₂*K₂ = 1.
    let h = 0.6f64;
    let g = 0.8f64;
    json!({
        "algebra": {"blocks": [2, 1]},
        "map": {"kind": "kraus", "data": [
            [[[h, 0], [0, [0, h]]], [[h]]],
            [[[0, g], [g, 0]], [[[0, g]]]]
        ]},
        "metadata": {"source": "test"}
    })
}

fn status<'a>(report: &'a Value, key: &str) -> &'a str {
    report["report"][key]["status"].as_str().unwrap()
}

#[test]
fn transpose_document_reports_jordan_not_star() {
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "t.json", &transpose_doc().to_string());
    let r = posinv(&["analyze", &path, "--json"], &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let doc = json_of(&r);
    assert_eq!(status(&doc, "jordan_automorphism"), "certified");
    assert_eq!(status(&doc, "star_automorphism"), "refuted");
    assert_eq!(doc["report"]["star_automorphism"]["witness"]["kind"], "pair");
    assert_eq!(status(&doc, "inverse_positive"), "certified");
    assert_eq!(status(&doc, "completely_positive"), "refuted");
    assert_eq!(doc["consistent"], true);
    assert_eq!(doc["tool"], "posinv");
    assert!(doc["tolerances"]["psd"].is_number());

    let text = posinv(&["analyze", &path], &[]);
    assert_eq!(text.code, 0);
    assert!(text.stdout.contains("jordan automorphism    certified"), "{}", text.stdout);
    assert!(text.stdout.trim_end().ends_with("consistent"));
}

#[test]
fn permutation_document_certifies_permutation() {
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "p.json", &cycle_doc().to_string());
    let r = posinv(&["analyze", &path, "--json"], &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let doc = json_of(&r);
    assert_eq!(status(&doc, "permutation"), "certified");
    assert_eq!(doc["input_kind"], "stochastic");
}

#[test]
fn kraus_document_records_its_certificate() {
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "k.json", &kraus_doc().to_string());
    let r = posinv(&["analyze", &path, "--json"], &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let doc = json_of(&r);
    assert_eq!(doc["certificates"][0]["property"], "completely_positive");
    assert_eq!(doc["certificates"][0]["consistent"], true);
    assert_eq!(status(&doc, "completely_positive"), "certified");
    assert_eq!(doc["metadata"]["source"], "test");
}

#[test]
fn malformed_input_exits_one_with_position() {
    let dir = TempDir::new().unwrap();
    let full = transpose_doc().to_string();
    let cut = write(&dir, "cut.json", &full[..full.len() / 2]);
    let r = posinv(&["analyze", &cut], &[]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("line 1 column"), "{}", r.stderr);

    let shape = write(&dir, "shape.json", r#"{"algebra": {"blocks": [2]}, "map": {"kind": "matrix", "data": [1, 0]}}"#);
    let r = posinv(&["analyze", &shape], &[]);
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("map.data"), "{}", r.stderr);

    let kind = write(&dir, "kind.json", r#"{"map": {"kind": "spline", "data": []}}"#);
    assert_eq!(posinv(&["analyze", &kind], &[]).code, 1);
    assert_eq!(posinv(&["analyze", "/nonexistent/doc.json"], &[]).code, 1);
    assert_eq!(posinv(&["analyze", &cut, "--no-such-flag"], &[]).code, 1);
    assert_eq!(posinv(&["--help"], &[]).code, 0);
}

#[test]
fn reports_are_byte_identical_and_seeded() {
    let dir = TempDir::new().unwrap();
    for (name, doc) in [("t.json", transpose_doc()), ("k.json", kraus_doc()), ("p.json", cycle_doc())] {
        let path = write(&dir, name, &doc.to_string());
        let a = posinv(&["analyze", &path, "--json", "--seed", "3"], &[]);
        let b = posinv(&["analyze", &path, "--json", "--seed", "3"], &[]);
        assert_eq!(a.code, 0);
        assert_eq!(a.stdout, b.stdout, "{name}");
        let t1 = posinv(&["analyze", &path, "--text", "--seed", "3"], &[]);
        let t2 = posinv(&["analyze", &path, "--text", "--seed", "3"], &[]);
        assert_eq!(t1.stdout, t2.stdout);
    }
    let path = write(&dir, "k2.json", &kraus_doc().to_string());
    let env = posinv(&["analyze", &path, "--json", "--seed", "3"], &[("POSINV_SEED", "41")]);
    assert_eq!(json_of(&env)["seed"], 41);
    assert_eq!(posinv(&["analyze", &path], &[("POSINV_SEED", "x")]).code, 1);
}

#[test]
fn reingested_report_does_not_change_verdicts() {
    let dir = TempDir::new().unwrap();
    for (name, doc) in [("t.json", transpose_doc()), ("k.json", kraus_doc())] {
        let path = write(&dir, name, &doc.to_string());
        let first = json_of(&posinv(&["analyze", &path, "--json"], &[]));
        let mut again = doc.clone();
        again["metadata"] = first.clone();
        let path2 = write(&dir, &format!("again-{name}"), &again.to_string());
        let second = json_of(&posinv(&["analyze", &path2, "--json"], &[]));
        assert_eq!(second["report"], first["report"]);
        assert_eq!(second["consistent"], first["consistent"]);
        assert_eq!(second["metadata"], first);
    }
}

#[test]
fn density_flag() {
    let dir = TempDir::new().unwrap();
    let path = write(&dir, "t.json", &transpose_doc().to_string());
    let unit = write(&dir, "unit.json", r#"{"blocks": [[[[0.5, 0], [0, 0]], [[0, 0], [0.5, 0]]]]}"#);
    let r = posinv(&["analyze", &path, "--json", "--density", &unit], &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let doc = json_of(&r);
    assert_eq!(doc["settings"]["density_supplied"], true);
    assert_eq!(doc["report"]["density"]["faithful"], true);
    let wrong = write(&dir, "wrong.json", r#"{"blocks": [[[[1, 0]]]]}"#);
    assert_eq!(posinv(&["analyze", &path, "--density", &wrong], &[]).code, 1);
}

#[test]
fn counterexample_table_witness_and_eigenvectors() {
    let r = posinv(&["counterexample", "--max-power", "10", "--json"], &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let doc = json_of(&r);
    let norms = doc["norms"].as_array().unwrap();
    assert_eq!(norms.len(), 21);
    for row in norms {
        let want = if row["n"].as_i64().unwrap() >= 0 { "1" } else { "3" };
        assert_eq!(row["norm"], want, "{row}");
    }

    let r = posinv(&["counterexample", "--max-power", "2", "--witness", "--samples", "200"], &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    assert!(r.stdout.contains("T⁻¹(0, 1) = (−e₀, 1): not positive"), "{}", r.stdout);
    assert!(r.stdout.contains("200/200"));

    let r = posinv(&["counterexample", "--max-power", "1", "--eigen", "1/4", "--eigen", "0", "--json"], &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let doc = json_of(&r);
    let eig = doc["eigenvectors"].as_array().unwrap();
    assert_eq!(eig[0]["report"]["verified"], true);
    assert_eq!(eig[0]["report"]["dimension"], 1);
    assert!((eig[0]["report"]["lambda"][1].as_f64().unwrap() - 1.0).abs() < 1e-15);
    assert_eq!(eig[1]["report"]["dimension"], 2);

    assert_eq!(posinv(&["counterexample", "--eigen", "1/4x"], &[]).code, 1);
    assert_eq!(posinv(&["counterexample", "--max-power", "0"], &[]).code, 1);
}

fn rotation_doc(turns: f64) -> Value {
    let a = std::f64::consts::TAU * turns;
    json!({"algebra": {"blocks": [1, 1]}, "map": {"kind": "matrix", "data": [1, 0, 0, [a.cos(), a.sin()]]}})
}

#[test]
fn recurrence_examples() {
    let dir = TempDir::new().unwrap();
    let cycle = write(&dir, "c.json", &cycle_doc().to_string());
    let r = posinv(&["recurrence", &cycle, "--json"], &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let doc = json_of(&r);
    assert_eq!(doc["index"], 3);
    assert!(doc["witness"]["defects"].as_array().unwrap().last().unwrap().as_f64().unwrap() < 1e-12);
    assert!(doc["inverse_error"].as_f64().unwrap() < 1e-12);

    // Record minima of ‖nφ‖ are the Fibonacci numbers.
    let golden = write(&dir, "g.json", &rotation_doc(GOLDEN).to_string());
    let r = posinv(&["recurrence", &golden, "--eps", "1e-3", "--json"], &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let doc = json_of(&r);
    let indices: Vec<u64> = doc["witness"]["indices"].as_array().unwrap().iter().map(|v| v.as_u64().unwrap()).collect();
    let mut fib = vec![1u64, 2];
    while fib.len() < indices.len() {
        fib.push(fib[fib.len() - 1] + fib[fib.len() - 2]);
    }
    assert_eq!(indices, fib);
    let last = *indices.last().unwrap() as f64;
    let defect = doc["witness"]["defects"].as_array().unwrap().last().unwrap().as_f64().unwrap();
    let oracle = 2.0 * (std::f64::consts::PI * (last * GOLDEN - (last * GOLDEN).round()).abs()).sin();
    assert!(defect <= 1e-3 && (defect - oracle).abs() < 1e-9, "{defect} vs {oracle}");

    let jordan = write(&dir, "j.json", r#"{"algebra": {"blocks": [1, 1]}, "map": {"kind": "matrix", "data": [1, 1, 0, 1]}}"#);
    let r = posinv(&["recurrence", &jordan], &[]);
    assert_eq!(r.code, 2);
    assert!(r.stdout.contains("not doubly power bounded"), "{}", r.stdout);

    let r = posinv(&["recurrence", &golden, "--eps", "1e-9", "--budget", "100"], &[]);
    assert_eq!(r.code, 2);
    assert!(r.stderr.contains("budget"));
}

fn rationals(v: &Value) -> Vec<BigRational> {
    v.as_array().unwrap().iter().map(|s| parse_rational(s.as_str().unwrap()).unwrap()).collect()
}

fn split(dir: &TempDir, name: &str, content: &str) -> (Run, Option<Value>) {
    let path = write(dir, name, content);
    let r = posinv(&["split", &path, "--json"], &[]);
    let doc = (r.code == 0).then(|| json_of(&r));
    (r, doc)
}

#[test]
fn split_examples() {
    let dir = TempDir::new().unwrap();
    let geometric: Vec<String> = (1..=30).map(|k| format!("1/{}", 1u64 << k)).collect();
    let (r, doc) = split(&dir, "geo.txt", &geometric.join(" "));
    let doc = doc.unwrap_or_else(|| panic!("{}", r.stderr));
    let (x, y, z) = (rationals(&doc["x"]), rationals(&doc["y"]), rationals(&doc["z"]));
    for k in 0..30 {
        assert_eq!(x[k], rational(1, 1 << (k + 1)));
        assert_eq!(&y[k] * &z[k], x[k]);
    }
    // First stage: the tail from index 1 is 1/2 − 2⁻³⁰ ≤ 1/2.
    assert_eq!(doc["stage_indices"][0], 1);

    let (_, doc) = split(&dir, "zeros.json", "[0, 0, 0, 0]");
    let doc = doc.unwrap();
    assert!(rationals(&doc["y"]).iter().chain(&rationals(&doc["z"])).all(|v| *v == rational(0, 1)));

    let (_, doc) = split(&dir, "ind.json", r#"[0, 1, 0, "1", 1, 0]"#);
    let doc = doc.unwrap();
    assert_eq!(doc["z"], json!(["0", "1", "0", "1", "1", "0"]));
    assert_eq!(doc["y"], doc["x"]);

    let (r, _) = split(&dir, "neg.txt", "1/2 -1/4");
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("negative"), "{}", r.stderr);
    let (r, _) = split(&dir, "junk.txt", "1/2\n1/3 q");
    assert_eq!(r.code, 1);
    assert!(r.stderr.contains("line 2 column 5"), "{}", r.stderr);

    let p = write(&dir, "p2.txt", "1 1/2 1/3 1/4");
    let r = posinv(&["split", &p, "--p", "2", "--json"], &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let doc = json_of(&r);
    assert_eq!(doc["y_root"].as_array().unwrap().len(), 4);
    assert_eq!(posinv(&["split", &p, "--p", "0.5"], &[]).code, 1);
}

#[test]
fn experiment_finds_no_finite_counterexample() {
    let r = posinv(&["experiment", "--max-n", "3", "--powers", "8", "--trials", "30", "--max-dim", "3", "--json"], &[]);
    assert_eq!(r.code, 0, "{}", r.stderr);
    let doc = json_of(&r);
    let rows = doc["truncations"].as_array().unwrap();
    assert_eq!(rows.len(), 3);
    assert!(rows.iter().all(|r| r["inconsistencies"] == 0 && r["inverse_positive"] == false));
    assert!(doc["search"]["counterexamples"].as_array().unwrap().is_empty());
    assert!(Path::new(env!("CARGO_BIN_EXE_posinv")).exists());
}
