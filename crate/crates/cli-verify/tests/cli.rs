use std::path::Path;
use std::process::{Command, Output};

use delta_series::SeriesDocument;
use expansions::q_slice_by_substitution;
use serde_json::Value;

fn bin() -> Command {
    let mut c = Command::new(env!("CARGO_BIN_EXE_delta-verify"));
    c.env_remove(cli_verify::THREADS_ENV);
    c
}

fn run(args: &[&str]) -> Output {
    bin().args(args).output().expect("binary runs")
}

fn stdout(o: &Output) -> String {
    String::from_utf8(o.stdout.clone()).unwrap()
}

fn json(o: &Output) -> Value {
    serde_json::from_slice(&o.stdout).expect("json output")
}

#[test]
fn passing_suite_exits_zero() {
    let o = run(&["check", "padic-laws"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rep = json(&o);
    assert_eq!(rep["format"], "suite-report/1");
    assert_eq!(rep["pass"], true);
    assert_eq!(rep["checks"].as_array().unwrap().len(), 3);
}

#[test]
fn configuration_errors_exit_two() {
    for args in [
        vec!["check", "nonsense"],
        vec!["check", "newform", "--p", "2"],
        vec!["check", "newform", "--profile", "/no/such/table.json"],
        vec!["expand", "fsharp", "--p", "11"],
        vec!["expand", "nonsense"],
    ] {
        let o = run(&args);
        assert_eq!(o.status.code(), Some(2), "{args:?}");
        assert!(!o.stderr.is_empty(), "{args:?} gave no message");
    }
}

#[test]
fn corrupted_table_fails_the_gate_and_skips_the_rest() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("table.json");
    let o = run(&["expand", "table", "--weight-cap", "300", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    let mut t: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    // a_4 = -2 in the true table
    t["a"][3] = Value::String("5".into());
    std::fs::write(&path, t.to_string()).unwrap();

    let o = run(&["check", "hecke", "--profile", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
    let rep = json(&o);
    let checks = rep["checks"].as_array().unwrap();
    assert_eq!(checks[0]["name"], "newform/gate");
    assert_eq!(checks[0]["status"], "fail");
    assert!(checks.len() > 1);
    assert!(checks[1..].iter().all(|c| c["status"] == "skipped"));
}

#[test]
fn a_good_table_file_passes_the_gate() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("table.json");
    run(&["expand", "table", "--weight-cap", "2000", "--out", path.to_str().unwrap()]);
    let o = run(&["check", "newform", "--profile", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(2));
    assert!(String::from_utf8_lossy(&o.stderr).contains("supply a longer table"));

    run(&["expand", "table", "--weight-cap", "5200", "--out", path.to_str().unwrap()]);
    let o = run(&["check", "newform", "--profile", path.to_str().unwrap(), "--format", "text"]);
    let text = stdout(&o);
    assert_eq!(o.status.code(), Some(0), "{text}");
    assert!(text.contains("PASS newform/gate"));
}

#[test]
fn psi_at_precision_one_is_a_single_term() {
    let o = run(&["expand", "psi", "--prec", "1"]);
    assert_eq!(o.status.code(), Some(0));
    let doc = json(&o);
    assert_eq!(doc["terms"].as_array().unwrap().len(), 1);
    assert_eq!(doc["terms"][0], serde_json::json!([[-5, 1], "1"]));
}

#[test]
fn level32_at_seven_takes_the_inert_branch() {
    let o = run(&["expand", "fsharp", "--profile", "level32", "--p", "7", "--weight-cap", "40"]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let doc = json(&o);
    assert_eq!(doc["header"]["case"], "cm-inert");
    assert_eq!(doc["header"]["a_p"], "0");
    let o = run(&["expand", "fsharp", "--profile", "level32", "--p", "5", "--weight-cap", "40"]);
    assert_eq!(json(&o)["header"]["case"], "cm-split");
    assert_eq!(json(&o)["order"], 1);
}

#[test]
fn f_sharp_slice_matches_the_f_minus_one_document() {
    let fs = stdout(&run(&["expand", "fsharp", "--profile", "level11", "--p", "5", "--prec", "6"]));
    let fm = stdout(&run(&["expand", "fminus1", "--profile", "level11", "--p", "5", "--prec", "6"]));
    let fs = SeriesDocument::from_json(&fs, None).unwrap().series;
    let fm = SeriesDocument::from_json(&fm, None).unwrap().series;
    let slice = q_slice_by_substitution(&fs).unwrap();
    let (cs, cm) = (&slice.ring().cfg, &fm.ring().cfg);
    for n in 1..=60 {
        let a = cs.display(slice.coeff(&[n, 0, 0]));
        let b = cm.display(fm.coeff(&[n]));
        assert_eq!(a, b, "q^{n}");
    }
    assert_eq!(slice.len(), fm.len());
}

#[test]
fn documents_round_trip_bit_exactly() {
    for args in
        [vec!["expand", "fsharp"], vec!["expand", "fcrys", "--r", "2", "--prec", "3"], vec!["expand", "psi-char"]]
    {
        let text = stdout(&run(&args));
        let doc = SeriesDocument::from_json(&text, None).unwrap();
        assert_eq!(doc.to_json(), text, "{args:?}");
    }
}

#[test]
fn text_format_is_a_listing() {
    let o = run(&["expand", "fminus1", "--weight-cap", "6", "--format", "text"]);
    let text = stdout(&o);
    assert!(text.starts_with("# "));
    assert!(text.lines().any(|l| l.trim() == "-1  q^2"), "{text}");
}

#[test]
fn thread_env_sets_the_default_only() {
    let o = bin().args(["check", "series-laws"]).env(cli_verify::THREADS_ENV, "3").output().unwrap();
    assert_eq!(json(&o)["runtime"]["threads"], 3);
    let o = bin().args(["check", "series-laws", "--threads", "2"]).env(cli_verify::THREADS_ENV, "3").output().unwrap();
    assert_eq!(json(&o)["runtime"]["threads"], 2);
    assert_eq!(json(&run(&["check", "series-laws"]))["runtime"]["threads"], 1);
}

#[test]
fn reports_agree_across_thread_counts() {
    let content = |threads: &str| {
        let mut rep = json(&run(&["check", "expansions", "--threads", threads]));
        rep.as_object_mut().unwrap().remove("runtime");
        rep.to_string()
    };
    assert_eq!(content("1"), content("4"));
    let a = stdout(&run(&["expand", "fsharp", "--threads", "1"]));
    let b = stdout(&run(&["expand", "fsharp", "--threads", "4"]));
    assert_eq!(a, b);
}

#[test]
fn small_prime_serre_run_passes_with_a_warning() {
    let o = run(&["check", "serre", "--p", "3"]);
    assert_eq!(o.status.code(), Some(0), "{}", stdout(&o));
    let rep = json(&o);
    let warnings = rep["warnings"].as_array().unwrap();
    assert_eq!(warnings.len(), 1);
    assert!(warnings[0].as_str().unwrap().contains("p = 3"));
}

#[test]
fn report_goes_to_the_out_file() {
    let dir = tempfile::tempdir().unwrap();
    let path = dir.path().join("r.json");
    let o = run(&["check", "padic-laws", "--out", path.to_str().unwrap()]);
    assert_eq!(o.status.code(), Some(0));
    assert!(o.stdout.is_empty());
    let rep: Value = serde_json::from_str(&std::fs::read_to_string(&path).unwrap()).unwrap();
    assert_eq!(rep["suite"], "padic-laws");
}

fn write(dir: &Path, name: &str, text: &str) -> String {
    let path = dir.join(name);
    std::fs::write(&path, text).unwrap();
    path.to_str().unwrap().to_string()
}

fn doc_p3(w: i64, terms: &str) -> String {
    format!(
        r#"{{
  "format": "delta-series/1",
  "p": 3,
  "prec": 4,
  "denom_exp": 0,
  "order": 1,
  "families": ["q"],
  "weights": [1,3],
  "weight_cap": {w},
  "laurent_floor": 0,
  "delta_deg_cap": null,
  "terms": [{terms}]
}}
"#
    )
}

#[test]
fn decompose_symmetric_input() {
    let dir = tempfile::tempdir().unwrap();
    // q + φ(q) = q + q³ + 3q′; its Σ_3 is S_1 + S_1³ − 3S_1S_2 + 3S_3 + 3δS_1
    let input = write(dir.path(), "f.json", &doc_p3(9, r#"[[0,1],"3"],[[1,0],"1"],[[3,0],"1"]"#));
    let o = run(&["decompose", &input]);
    assert_eq!(o.status.code(), Some(0), "{}", String::from_utf8_lossy(&o.stderr));
    let rep = json(&o);
    assert_eq!(rep["format"], "decomposition-report/1");
    assert_eq!(rep["families"], 3);
    assert_eq!(rep["g"]["format"], "delta-series/1");
    let seeded = run(&["decompose", &input, "--seed", "7"]);
    assert_eq!(json(&seeded)["g"], rep["g"]);
    assert_eq!(run(&["decompose", &input, "--sigma", "2"]).status.code(), Some(0));
}

#[test]
fn decompose_reports_non_symmetric_input() {
    let dir = tempfile::tempdir().unwrap();
    // Σ_m q·q′ at p = 3 is not δ-symmetric
    let doc = doc_p3(4, r#"[[1,1],"1"]"#);
    let input = write(dir.path(), "f.json", &doc);
    let o = run(&["decompose", &input]);
    assert_eq!(o.status.code(), Some(1), "{}", String::from_utf8_lossy(&o.stderr));
    let bad = write(dir.path(), "bad.json", "{\"format\": \"delta-series/1\"}");
    assert_eq!(run(&["decompose", &bad]).status.code(), Some(2));
    assert_eq!(run(&["decompose", "/no/such/file"]).status.code(), Some(2));
}
