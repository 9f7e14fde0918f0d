use std::path::PathBuf;
use std::process::{Command, Output};

use serde_json::Value;

fn lcval(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_lcval"))
        .args(args)
        .env_remove("LCVAL_OUT_DIR")
        .output()
        .expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn stderr(o: &Output) -> String {
    String::from_utf8(o.stderr.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).unwrap()
}

fn tmp(name: &str) -> PathBuf {
    let dir = PathBuf::from(env!("CARGO_TARGET_TMPDIR")).join("cli-tests");
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

const SMALL: [&str; 8] = ["--pairs", "6", "--maps", "5", "--functions", "4", "--dirs", "40"];

#[test]
fn lemma21_rows() {
    let o = lcval(&["lemma21", "--format", "json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v = json(&o);
    let rows = v["sections"]["lemma21"].as_array().unwrap();
    assert_eq!(rows.len(), 4);
    let last = &rows[3];
    assert_eq!(last["lambda"], 3.0);
    assert_eq!(last["m_e1_ref"], 9.0 / 24.0);
    assert!(last["m_e1_res"].as_f64().unwrap() <= 1e-10);
    assert_eq!(lcval(&["lemma21", "--lambdas", "1,-1"]).status.code(), Some(2));
}

#[test]
fn vn_cone_reference_column() {
    let o = lcval(&["vn-cone", "--lambdas", "2", "--qs", "0.5"]);
    assert!(o.status.success());
    let text = stdout(&o);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,lambda,q,value,reference,rel_error"));
    let row: Vec<&str> = lines.next().unwrap().split(',').collect();
    assert_eq!(row[4], "1.6e1");
    assert!(row[5].parse::<f64>().unwrap() <= 1e-6);
}

#[test]
fn check_builtin_passes() {
    let mut args = vec!["check", "difference-body", "--format", "json"];
    args.extend(SMALL);
    let o = lcval(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    let v = json(&o);
    let props: Vec<&str> = v["sections"]["checks"]
        .as_array()
        .unwrap()
        .iter()
        .map(|r| r["property"].as_str().unwrap())
        .collect();
    assert_eq!(
        props,
        [
            "identity/cones",
            "identity/indicators",
            "identity/mixed",
            "sln_covariance",
            "translation_covariance",
            "translation_z0_formula",
            "homogeneity"
        ]
    );
    assert_eq!(v["pass"], true);
}

#[test]
fn check_real_spec() {
    let mut args = vec!["check", "real:1,-0.5,2", "--dim", "2"];
    args.extend(SMALL);
    let o = lcval(&args);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("real_invariance"));
    let o = lcval(&["check", "volume", "--properties", "sln"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn output_is_deterministic() {
    let mut args = vec!["check", "mixed", "--seed", "9", "--properties", "identity,sln"];
    args.extend(SMALL);
    let a = lcval(&args);
    let b = lcval(&args);
    assert!(a.status.success());
    assert_eq!(a.stdout, b.stdout);
}

#[test]
fn classify_echoes_constants() {
    let o = lcval(&["classify", "minkowski:0.3,1.1,-0.6,0.8", "--dim", "4", "--format", "json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v = json(&o);
    for row in v["sections"]["constants"].as_array().unwrap() {
        if let Some(d) = row["difference"].as_f64() {
            assert!(d <= 1e-4, "{row}");
        }
    }
    let o = lcval(&["classify", "real:0.5,2,1.3", "--dim", "2"]);
    assert!(o.status.success());
}

#[test]
fn limits_finite_case() {
    let o = lcval(&["limits", "difference-body", "--format", "json"]);
    assert!(o.status.success(), "{}", stderr(&o));
    let v = json(&o);
    let summary = v["sections"]["summary"].as_array().unwrap();
    assert_eq!(summary[1]["case"], "finite");
    assert_eq!(v["sections"]["c1c2"].as_array().unwrap().len(), 12);
    let perturbed = v["sections"]["perturbed"].as_array().unwrap();
    assert!(perturbed.iter().all(|p| p["pass"] == true));
}

#[test]
fn failing_check_exits_nonzero() {
    let o = lcval(&["zeta", "real:0.5,1,3"]);
    assert_eq!(o.status.code(), Some(1));
    assert!(stdout(&o).contains("zeta_relation"));
    let o = lcval(&["zeta", "real:0.5,1,1"]);
    assert!(o.status.success(), "{}", stderr(&o));
}

#[test]
fn dimension_hypotheses() {
    let o = lcval(&["classify", "difference-body", "--dim", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("--dim ≥ 3"));
    let o = lcval(&["lemma21", "--dim", "5"]);
    assert_eq!(o.status.code(), Some(2));
    let o = lcval(&["zeta", "difference-body"]);
    assert_eq!(o.status.code(), Some(2));
}

#[test]
fn spec_files() {
    let good = tmp("good.json");
    std::fs::write(
        &good,
        r#"{
  "minkowski": {"c1": 1, "c2": 0.5, "c3": 0.25, "q": 2},
  "functions": [
    {"kind": "cone", "body": {"t_lambda": 1.5}},
    {"logconcave": {"translate": [0.2, 0, -0.1], "of": {"kind": "indicator", "body": {"cube": 1}}}, "scale": 3},
    {"sln": [[1, 0.5, 0], [0, 1, 0], [0, 0, 1]], "of": {"kind": "pl", "pieces": [[1, 0, 0, 0], [-1, 0, 0, 0], [0, 1, 0, 0], [0, -1, 0, 0], [0, 0, 1, 0], [0, 0, -1, 0]], "shift": 0.5}},
    {"kind": "u_h", "family": "c3d4", "h": 0.25}
  ]
}"#,
    )
    .unwrap();
    let g = good.to_str().unwrap();
    let o = lcval(&["check", g, "--properties", "sln,translation,homogeneity", "--maps", "8", "--dirs", "40"]);
    assert!(o.status.success(), "{}", stderr(&o));
    assert!(stdout(&o).contains("sln_covariance,8,0,"));

    let bad = tmp("bad.json");
    std::fs::write(&bad, "{\n  \"minkowski\": {\"c1\": 1,\n  \"q\": }\n}").unwrap();
    let o = lcval(&["classify", bad.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("line 3"), "{}", stderr(&o));

    let field = tmp("field.json");
    std::fs::write(&field, r#"{"real": {"cn": 1}, "functions": [{"kind": "pl", "pieces": [[1, 0]]}]}"#).unwrap();
    let o = lcval(&["check", field.to_str().unwrap(), "--dim", "2"]);
    assert_eq!(o.status.code(), Some(2));
    assert!(stderr(&o).contains("$.functions[0].pieces[0]"), "{}", stderr(&o));
}

#[test]
fn output_destinations() {
    let out = tmp("lemma.csv");
    let _ = std::fs::remove_file(&out);
    let o = lcval(&["lemma21", "--out", out.to_str().unwrap()]);
    assert!(o.status.success());
    assert!(o.stdout.is_empty());
    assert!(std::fs::read_to_string(&out).unwrap().starts_with("lambda,"));

    let dir = tmp("outdir");
    let o = Command::new(env!("CARGO_BIN_EXE_lcval"))
        .args(["vn-cone", "--format", "json"])
        .env("LCVAL_OUT_DIR", &dir)
        .output()
        .unwrap();
    assert!(o.status.success());
    let v: Value = serde_json::from_str(&std::fs::read_to_string(dir.join("vn-cone.json")).unwrap()).unwrap();
    assert_eq!(v["pass"], true);
}
