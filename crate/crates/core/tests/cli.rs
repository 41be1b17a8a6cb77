//! End-to-end tests through the compiled binary.

mod common;

use std::path::PathBuf;
use std::process::Command;

use serde_json::Value;

use common::{CORPUS, OSCILLATORY};

struct Run {
    code: i32,
    stdout: String,
    stderr: String,
}

fn bin(args: &[&str]) -> Run {
    let out = Command::new(env!("CARGO_BIN_EXE_recseries"))
        .args(args)
        .output()
        .expect("binary runs");
    Run {
        code: out.status.code().expect("exit code"),
        stdout: String::from_utf8(out.stdout).unwrap(),
        stderr: String::from_utf8(out.stderr).unwrap(),
    }
}

fn scratch(name: &str) -> PathBuf {
    let dir = std::env::temp_dir().join(format!("recseries-cli-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    dir.join(name)
}

const TOP_KEYS: [&str; 11] = [
    "function", "x0", "mode", "verdict", "rule", "witnesses", "derivative", "fit", "orbit", "notes",
    "warnings",
];
const WITNESS_KEYS: [&str; 9] = [
    "c", "a", "k", "majorant", "delta", "margin", "coefficient_index", "coefficient", "sign_pattern",
];

fn is_decimal(v: &Value) -> bool {
    v.as_str().map_or(false, |s| s.parse::<f64>().is_ok())
}

fn is_string_list(v: &Value) -> bool {
    v.as_array().map_or(false, |a| a.iter().all(Value::is_string))
}

/// Top-level keys in the order they appear in the pretty-printed text.
fn top_level_order(json: &str) -> Vec<String> {
    json.lines()
        .filter_map(|l| l.strip_prefix("  \""))
        .filter_map(|l| l.split('"').next())
        .map(str::to_string)
        .collect()
}

/// Returns a list of schema problems; empty when the report conforms.
fn schema_errors(json: &str) -> Vec<String> {
    let mut errs = Vec::new();
    let v: Value = match serde_json::from_str(json) {
        Ok(v) => v,
        Err(e) => return vec![format!("not JSON: {e}")],
    };
    let order = top_level_order(json);
    let expected: Vec<&str> = TOP_KEYS.iter().copied().filter(|k| order.iter().any(|o| o == k)).collect();
    if order != expected {
        errs.push(format!("key order {order:?}"));
    }
    for required in TOP_KEYS.iter().filter(|k| **k != "fit") {
        if v.get(*required).is_none() {
            errs.push(format!("missing {required}"));
        }
    }
    for key in ["function", "x0", "mode", "verdict", "rule"] {
        if !v[key].is_string() {
            errs.push(format!("{key} is not a string"));
        }
    }
    if !["positive", "signed"].contains(&v["mode"].as_str().unwrap_or("")) {
        errs.push(format!("mode {}", v["mode"]));
    }
    let verdict = v["verdict"].as_str().unwrap_or("");
    let rule = v["rule"].as_str().unwrap_or("");
    if !["convergent", "divergent", "inconclusive"].contains(&verdict) {
        errs.push(format!("verdict {verdict}"));
    }
    if (verdict == "inconclusive") != (rule == "None") {
        errs.push(format!("verdict {verdict} with rule {rule}"));
    }
    match v["witnesses"].as_object() {
        Some(w) => {
            for (k, val) in w {
                if !WITNESS_KEYS.contains(&k.as_str()) || !val.is_string() {
                    errs.push(format!("witness {k} = {val}"));
                }
            }
            if (rule == "None") != w.is_empty() {
                errs.push("witnesses do not match the rule".into());
            }
        }
        None => errs.push("witnesses is not an object".into()),
    }
    let d = &v["derivative"];
    match d["kind"].as_str() {
        Some("value") | Some("out_of_range") if is_decimal(&d["c"]) => {}
        Some("dne") if d["band"].as_array().map_or(false, |b| b.len() == 2 && b.iter().all(is_decimal)) => {}
        _ => errs.push(format!("derivative {d}")),
    }
    if let Some(fit) = v.get("fit") {
        if !["a", "k", "residual"].iter().all(|k| is_decimal(&fit[*k])) {
            errs.push(format!("fit {fit}"));
        }
    }
    let o = &v["orbit"];
    if !(o["n"].is_u64() && is_decimal(&o["x_n"]) && is_decimal(&o["partial_sum"]) && o["status"].is_string()) {
        errs.push(format!("orbit {o}"));
    }
    if !is_string_list(&v["notes"]) || !is_string_list(&v["warnings"]) {
        errs.push("notes/warnings are not string lists".into());
    }
    errs
}

fn analyze(case: &common::Case, extra: &[&str]) -> Run {
    let mut args = vec!["analyze", "--f", case.f, "--x0", case.x0, "--mode", case.mode, "--max-n", "20000"];
    args.extend_from_slice(extra);
    bin(&args)
}

#[test]
fn corpus_reports_match_the_schema() {
    for case in &CORPUS {
        let run = analyze(case, &["--json"]);
        assert!(run.code == 0 || run.code == 2, "{}: exit {} {}", case.f, run.code, run.stderr);
        let errs = schema_errors(&run.stdout);
        assert!(errs.is_empty(), "{}: {errs:?}\n{}", case.f, run.stdout);
    }
}

#[test]
fn text_and_json_agree() {
    for case in &CORPUS {
        let json: Value = serde_json::from_str(&analyze(case, &["--json"]).stdout).unwrap();
        let text = analyze(case, &[]).stdout;
        let field = |name: &str| {
            text.lines()
                .find(|l| l.starts_with(&format!("{name:<12}")))
                .map(|l| l[12..].to_string())
                .unwrap_or_default()
        };
        assert_eq!(field("verdict"), json["verdict"].as_str().unwrap(), "{}", case.f);
        assert_eq!(field("rule"), json["rule"].as_str().unwrap(), "{}", case.f);
        assert_eq!(field("function"), json["function"].as_str().unwrap(), "{}", case.f);
        for (k, v) in json["witnesses"].as_object().unwrap() {
            assert!(field("witnesses").contains(&format!("{k} = {}", v.as_str().unwrap())), "{}", case.f);
        }
        let orbit = field("orbit");
        assert!(orbit.contains(&format!("x_n = {}", json["orbit"]["x_n"].as_str().unwrap())));
        assert!(orbit.contains(&format!("S_n = {}", json["orbit"]["partial_sum"].as_str().unwrap())));
        for note in json["notes"].as_array().unwrap() {
            assert!(text.contains(&format!("  - {}", note.as_str().unwrap())));
        }
    }
}

#[test]
fn binary_output_is_deterministic() {
    for case in CORPUS.iter().take(5) {
        let a = analyze(case, &["--json"]);
        let b = analyze(case, &["--json"]);
        assert_eq!(a.stdout, b.stdout, "{}", case.f);
        assert_eq!(a.code, b.code);
    }
}

#[test]
fn exit_codes() {
    assert_eq!(bin(&["analyze", "--f", "x/2"]).code, 0);
    // hypothesis violations and parse errors are errors
    assert_eq!(bin(&["analyze", "--f", "x+1"]).code, 1);
    assert_eq!(bin(&["analyze", "--f", "2*x"]).code, 1);
    assert_eq!(bin(&["analyze", "--f", "x/2", "--x0", "0"]).code, 1);
    assert_eq!(bin(&["analyze", "--f", "x/2", "--precision", "0"]).code, 1);
    assert_eq!(bin(&["bogus"]).code, 1);
    assert_eq!(bin(&["--help"]).code, 0);
    // a majorant that does not dominate
    assert_eq!(bin(&["compare", "--f", "x/2", "--majorant", "powerlaw:a=0.5,c=1"]).code, 2);
    assert_eq!(bin(&["compare", "--f", OSCILLATORY, "--x0", "0.3", "--majorant", "linear:5/6"]).code, 0);
    assert_eq!(bin(&["limit", "--f", "x/2", "--a", "search"]).code, 2);
    assert_eq!(bin(&["limit", "--f", "sin(x)", "--a", "2"]).code, 0);
}

#[test]
fn parse_errors_point_at_the_offset() {
    let run = bin(&["analyze", "--f", "x*"]);
    assert_eq!(run.code, 1);
    assert!(run.stdout.is_empty());
    let lines: Vec<&str> = run.stderr.lines().collect();
    let caret = lines.iter().position(|l| l.trim() == "^").expect("caret line");
    assert_eq!(lines[caret - 1], "  x*");
    assert_eq!(lines[caret].find('^'), Some(4));
}

#[test]
fn iterate_writes_the_harmonic_orbit() {
    let run = bin(&["iterate", "--f", "x/(1+x)", "--max-n", "100"]);
    assert_eq!(run.code, 0);
    let rows: Vec<&str> = run.stdout.lines().collect();
    assert_eq!(rows[0], "n,x_n,S_n");
    assert_eq!(rows.len(), 102);
    let last: Vec<&str> = rows[101].split(',').collect();
    assert_eq!(last[0], "100");
    let x: f64 = last[1].parse().unwrap();
    assert!((x - 1.0 / 101.0).abs() < 1e-15);
    // S_100 = H_101
    let h: f64 = (1..=101).map(|k| 1.0 / k as f64).sum();
    assert!((last[2].parse::<f64>().unwrap() - h).abs() < 1e-12);
    assert!(run.stderr.contains("N = 100"));
}

#[test]
fn iterate_to_file_and_thinning() {
    let path = scratch("thin.csv");
    let run = bin(&["iterate", "--f", "x/2", "--max-n", "50", "--thin", "10", "--orbit-csv", path.to_str().unwrap()]);
    assert_eq!(run.code, 0);
    let csv = std::fs::read_to_string(&path).unwrap();
    let indices: Vec<&str> = csv.lines().skip(1).map(|l| l.split(',').next().unwrap()).collect();
    assert_eq!(indices, ["0", "10", "20", "30", "40", "50"]);
    assert!(run.stdout.contains("N = 50"));
}

#[test]
fn analyze_orbit_csv_matches_report() {
    let path = scratch("analyze.csv");
    let run = bin(&["analyze", "--f", "-x/2", "--json", "--orbit-csv", path.to_str().unwrap()]);
    assert_eq!(run.code, 0);
    let json: Value = serde_json::from_str(&run.stdout).unwrap();
    let csv = std::fs::read_to_string(&path).unwrap();
    let last: Vec<&str> = csv.lines().last().unwrap().split(',').collect();
    assert_eq!(last[0], json["orbit"]["n"].to_string());
    assert_eq!(last[1], json["orbit"]["x_n"].as_str().unwrap());
    assert_eq!(last[2], json["orbit"]["partial_sum"].as_str().unwrap());
}

#[test]
fn taylor_only_input() {
    let run = bin(&["analyze", "--taylor", "1,-1", "--x0", "0.5", "--max-n", "1000", "--json"]);
    assert_eq!(run.code, 0);
    let json: Value = serde_json::from_str(&run.stdout).unwrap();
    assert_eq!(json["verdict"], "divergent");
    assert_eq!(json["rule"], "AnalyticRule");
    assert_eq!(json["witnesses"]["coefficient_index"], "2");
    assert_eq!(json["witnesses"]["coefficient"], "-1");
}

#[test]
fn compare_reports_the_table() {
    let run = bin(&["compare", "--f", OSCILLATORY, "--x0", "0.3", "--majorant", "linear:5/6", "--steps", "100"]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    assert!(run.stdout.contains("verdict     convergent"));
    assert!(run.stdout.contains("n,g^n(x0),m^n(x0)"));
    assert!(run.stdout.contains("first violation: none"), "{}", run.stdout);
}

#[test]
fn precision_guard_advises_more_digits() {
    let low = bin(&["limit", "--f", "x - x^5", "--a", "4", "--precision", "64"]);
    assert_eq!(low.code, 1);
    assert!(low.stderr.contains("--precision"), "{}", low.stderr);
    let high = bin(&["limit", "--f", "x - x^5", "--a", "4", "--precision", "120"]);
    assert_eq!(high.code, 0, "{}", high.stderr);
}

#[test]
fn grid_overrides_reach_the_probe() {
    let run = bin(&[
        "limit", "--f", "x/(1+x)", "--a", "1", "--json", "--grid-start", "1e-3", "--grid-per-decade", "2",
        "--grid-floor", "1e-10",
    ]);
    assert_eq!(run.code, 0, "{}", run.stderr);
    let json: Value = serde_json::from_str(&run.stdout).unwrap();
    assert_eq!(json["samples"].as_array().unwrap().len(), 15);
    assert_eq!(bin(&["analyze", "--f", "x/2", "--grid-floor", "1"]).code, 1);
    assert_eq!(bin(&["analyze", "--f", "x/2", "--grid-per-decade", "0"]).code, 1);
}
