use std::path::PathBuf;
use std::process::{Command, Output};

use bf_cli::commands::{sequences, MuSpec};
use bf_cli::config::{parse_coeff, parse_dimensions};
use bf_core::bv::BVContext;
use bf_core::loops::{build_observable, Family};
use bf_core::Coeff;
use serde_json::Value;

fn fixture(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("fixtures").join(name).display().to_string()
}

fn golden(name: &str) -> String {
    PathBuf::from(env!("CARGO_MANIFEST_DIR")).join("tests/golden").join(name).display().to_string()
}

fn run(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_bfcohom")).args(args).env_remove("BFCOHOM_THREADS").output().unwrap()
}

/// Exit code and parsed JSON report.
fn report(args: &[&str]) -> (i32, Value) {
    let out = run(args);
    let json = serde_json::from_slice(&out.stdout).unwrap_or(Value::Null);
    (out.status.code().unwrap(), json)
}

fn stderr(out: &Output) -> String {
    String::from_utf8_lossy(&out.stderr).into_owned()
}

#[test]
fn verify_master_passes_for_n_3_to_6() {
    let (code, r) = report(&["verify-master", "--n", "3..6"]);
    assert_eq!(code, 0);
    assert_eq!(r["schema"], "bfcohom-report/1");
    assert_eq!(r["passed"], true);
    let per_n = r["results"].as_array().unwrap();
    assert_eq!(per_n.len(), 4);
    for (i, entry) in per_n.iter().enumerate() {
        assert_eq!(entry["n"], 3 + i as u64);
        for id in entry["identities"].as_array().unwrap() {
            assert_eq!(id["status"], "pass", "{id}");
            assert_eq!(id["residual-terms"], 0);
        }
        assert!(entry["brst"]["entries"].as_array().unwrap().iter().all(|e| e["matches"] == true));
    }
}

#[test]
fn verify_master_gl2_backend() {
    let (code, r) = report(&["verify-master", "--n", "4", "--backend", "gl2"]);
    assert_eq!(code, 0);
    let check = &r["results"][0]["gl2"];
    for key in ["master-norm", "variation-norm", "square-norm"] {
        assert!(check[key].as_f64().unwrap() < 1e-12, "{key}");
    }
    assert!(check["action-components"].as_u64().unwrap() > 0);
}

#[test]
fn dimension_two_is_an_argument_error() {
    let out = run(&["verify-master", "--n", "2"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("n = 2"), "{}", stderr(&out));
    assert!(out.stdout.is_empty());
    assert!(parse_dimensions("9").is_err());
    assert!(parse_dimensions("6..3").is_err());
    assert_eq!(parse_dimensions("3..=5").unwrap(), vec![3, 4, 5]);
    assert_eq!(parse_dimensions("3, 5,7").unwrap(), vec![3, 5, 7]);
}

#[test]
fn expand_hhat_has_ghost_number_zero_and_matches_the_snapshot() {
    let g = golden("hhat_n5_k2.json");
    let (code, r) = report(&["expand", "--family", "hhat", "--n", "5", "--K", "2", "--golden", &g]);
    assert_eq!(code, 0);
    let series = &r["results"]["series"];
    assert_eq!(series["ghost-numbers"], serde_json::json!([0]));
    assert!(series["groups"].as_array().unwrap().iter().all(|g| g["gh"] == 0));
    assert_eq!(r["results"]["snapshot"]["matches"], true);
    assert!(r["config"]["inputs"].as_object().unwrap().contains_key(&g));
}

#[test]
fn snapshot_differences_fail_with_a_term_diff() {
    let dir = std::env::temp_dir().join(format!("bfcohom-golden-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("snap.json");
    let p = path.display().to_string();
    let (code, _) = report(&["expand", "--family", "hhat-odd", "--n", "4", "--K", "2", "--golden", &p, "--bless"]);
    assert_eq!(code, 0);
    assert_eq!(report(&["expand", "--family", "hhat-odd", "--n", "4", "--K", "2", "--golden", &p]).0, 0);
    let (code, r) = report(&["expand", "--family", "hhat-odd", "--n", "4", "--K", "3", "--golden", &p]);
    assert_eq!(code, 1);
    let snap = &r["results"]["snapshot"];
    assert_eq!(snap["matches"], false);
    assert!(!snap["unexpected"].as_array().unwrap().is_empty());
    assert!(snap["missing"].as_array().unwrap().is_empty());
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn odd_projection_negates_under_lambda_negation() {
    let (code, _) = report(&["expand", "--family", "hhat-odd", "--n", "4", "--K", "3", "--golden", &golden("hhat_odd_n4_k3.json")]);
    assert_eq!(code, 0);
    let ctx = BVContext::new(4).unwrap();
    let plus = sequences(4, Family::HhatOdd, Some(vec![parse_coeff("kappa").unwrap()]), MuSpec::Default).unwrap();
    let minus = sequences(4, Family::HhatOdd, Some(vec![parse_coeff("-kappa").unwrap()]), MuSpec::Default).unwrap();
    assert_eq!(plus.mu, minus.mu);
    let a = build_observable(&ctx, Family::HhatOdd, &plus, 3).unwrap();
    let b = build_observable(&ctx, Family::HhatOdd, &minus, 3).unwrap();
    assert!(!a.is_empty());
    assert!(a.map_coeffs(|c| -c.clone()).same_terms(&b));
}

#[test]
fn expand_htilde_emits_the_required_mu() {
    let (code, r) = report(&["expand", "--family", "htilde", "--n", "5", "--lambda", "1,0,0", "--mu", "auto"]);
    assert_eq!(code, 0);
    assert_eq!(r["results"]["series"]["mu"], serde_json::json!(["0", "1"]));
    assert_eq!(r["config"]["parameters"]["mu"][1], "1");
}

#[test]
fn closedness_of_the_even_part_is_an_expected_failure() {
    let (code, r) = report(&["closedness", "--family", "h-even-part", "--n", "4", "--K", "2"]);
    assert_eq!(code, 0);
    let c = &r["results"]["closedness"];
    assert_eq!(c["status"], "expected-failure");
    assert_eq!(c["endpoint-only"], true);
    let terms = c["residual-terms"].as_array().unwrap();
    assert_eq!(terms.len(), 1);
    assert_eq!(terms[0]["faces"], serde_json::json!(["start", "end"]));
    assert_eq!(r["results"]["auxiliary"].as_array().unwrap().len(), 3);
}

#[test]
fn closedness_passes_and_fails_where_expected() {
    assert_eq!(report(&["closedness", "--family", "hhat", "--n", "5", "--K", "3"]).0, 0);
    assert_eq!(report(&["closedness", "--family", "hhat-odd", "--n", "4", "--K", "3"]).0, 0);
    let (code, r) = report(&["closedness", "--family", "htilde", "--n", "5", "--K", "2", "--lambda", "1,0,1", "--mu", "0,1,0,1"]);
    assert_eq!(code, 1);
    assert_eq!(r["results"]["closedness"]["status"], "fail");
    let out = run(&["closedness", "--family", "hhat", "--n", "4"]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("hhat-odd"));
}

#[test]
fn theorem4_even_convolution() {
    let (code, r) = report(&["theorem4", "--parity", "even", "--lambda", "1,1"]);
    assert_eq!(code, 0);
    assert_eq!(r["results"]["required_mu"], serde_json::json!(["0", "1", "2", "1"]));
    let (code, r) = report(&["theorem4", "--parity", "odd", "--lambda", "kappa", "--mu", "0,kappa"]);
    assert_eq!(code, 1);
    assert_eq!(r["results"]["satisfied"], false);
    assert_eq!(report(&["theorem4", "--parity", "odd", "--lambda", "2,0,-1/2"]).0, 0);
    assert_eq!(report(&["theorem4", "--parity", "odd", "--lambda", "1,1"]).0, 1);
}

#[test]
fn coefficients_parse() {
    assert_eq!(parse_coeff("-1/2").unwrap(), Coeff::from_q(bf_core::coeff::qf(-1, 2)));
    assert_eq!(parse_coeff(" lambda1 ").unwrap(), Coeff::param("lambda1", 1));
    assert!(parse_coeff("2x").is_err());
    assert!(parse_coeff("").is_err());
}

#[test]
fn linking_of_the_hopf_companion() {
    let (code, r) = report(&["linking", "--curve", &fixture("hopf.csv")]);
    assert_eq!(code, 0);
    let v = r["results"]["value"].as_f64().unwrap();
    assert!((v - 1.0).abs() < 1e-3, "{v}");
    assert_eq!(r["results"]["rounded"], 1);
    let (code, r) = report(&["linking", "--curve", &fixture("circle.csv"), "--grid", "256"]);
    assert_eq!(code, 0);
    assert_eq!(r["results"]["rounded"], 0);
    assert_eq!(r["results"]["grid"], 256);
}

#[test]
fn holonomy_of_a_pure_gauge_fixture_is_trivial() {
    let (code, r) = report(&["holonomy", "--curve", &fixture("winding.csv"), "--fixture", &fixture("gauge.fix"), "--k", "1"]);
    assert_eq!(code, 0);
    let hol = &r["results"]["holonomy"];
    for i in 0..2 {
        for j in 0..2 {
            let want = if i == j { 1.0 } else { 0.0 };
            assert!((hol[i][j].as_f64().unwrap() - want).abs() < 1e-9);
        }
    }
    assert!(r["results"]["flag-check"]["curvature"].as_f64().unwrap() < 1e-8);
}

#[test]
fn flags_are_verified_before_use() {
    let dir = std::env::temp_dir().join(format!("bfcohom-flags-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("curved.fix");
    std::fs::write(&path, "flags = flat\nA[1][2] = x1 * dx2\nA[2][1] = dx1\n").unwrap();
    let out = run(&["holonomy", "--curve", &fixture("winding.csv"), "--fixture", &path.display().to_string()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("flagged flat"), "{}", stderr(&out));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn fixture_errors_report_the_position() {
    let dir = std::env::temp_dir().join(format!("bfcohom-bad-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let path = dir.join("bad.fix");
    std::fs::write(&path, "dim = 3\n\nB[1][1] = x1 * dz\n").unwrap();
    let out = run(&["crosscheck", "--curve", &fixture("winding.csv"), "--fixture", &path.display().to_string()]);
    assert_eq!(out.status.code(), Some(2));
    assert!(stderr(&out).contains("bad.fix:3:16: unknown name `dz`"), "{}", stderr(&out));
    std::fs::remove_dir_all(&dir).unwrap();
}

#[test]
fn crosscheck_fixtures_agree() {
    for f in ["constant.fix", "rotation.fix", "trigonometric.fix", "diagonal.fix", "gauge.fix"] {
        let (code, r) = report(&["crosscheck", "--curve", &fixture("winding.csv"), "--fixture", &fixture(f)]);
        assert_eq!(code, 0, "{f}");
        let res = &r["results"];
        assert!(res["numeric"].as_f64().unwrap().abs() > 1.0, "{f}: degenerate fixture");
        assert!(res["difference"].as_f64().unwrap() < 1e-6, "{f}");
        assert_eq!(res["terms"], serde_json::json!(["(kappa) Tr[⟨B⟩]"]));
    }
}

#[test]
fn reports_are_deterministic_and_hashed() {
    let args = ["holonomy", "--curve", &fixture("winding.csv"), "--fixture", &fixture("closed.fix"), "--k", "2"];
    let a = run(&args);
    let b = run(&args);
    assert_eq!(a.status.code(), Some(0));
    assert_eq!(a.stdout, b.stdout);
    let r: Value = serde_json::from_slice(&a.stdout).unwrap();
    assert_eq!(r["config-hash"].as_str().unwrap().len(), 64);
    let other: Value = serde_json::from_slice(&run(&["holonomy", "--curve", &fixture("winding.csv"), "--fixture", &fixture("closed.fix")]).stdout).unwrap();
    assert_ne!(r["config-hash"], other["config-hash"]);
    // flat A with covariantly closed B on a contractible loop: h_1 = h_2 = 0
    for h in r["results"]["h"].as_array().unwrap() {
        assert!(h.as_f64().unwrap().abs() < 1e-9);
    }
}

#[test]
fn thread_count_comes_from_the_environment() {
    let out = Command::new(env!("CARGO_BIN_EXE_bfcohom"))
        .args(["linking", "--curve", &fixture("hopf.csv")])
        .env("BFCOHOM_THREADS", "3")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(0));
    let r: Value = serde_json::from_slice(&out.stdout).unwrap();
    assert_eq!(r["threads"], 3);
    let out = Command::new(env!("CARGO_BIN_EXE_bfcohom"))
        .args(["linking", "--curve", &fixture("hopf.csv")])
        .env("BFCOHOM_THREADS", "many")
        .output()
        .unwrap();
    assert_eq!(out.status.code(), Some(2));
}

#[test]
fn tolerances_can_be_overridden_and_written_to_a_file() {
    let dir = std::env::temp_dir().join(format!("bfcohom-tol-{}", std::process::id()));
    std::fs::create_dir_all(&dir).unwrap();
    let tol = dir.join("tol.json");
    std::fs::write(&tol, r#"{ "linking-grid": 128, "framing-fraction": 0.04 }"#).unwrap();
    let out_path = dir.join("report.json");
    let out = run(&[
        "linking",
        "--curve",
        &fixture("hopf.csv"),
        "--tolerances",
        &tol.display().to_string(),
        "--output",
        &out_path.display().to_string(),
        "--quiet",
    ]);
    assert_eq!(out.status.code(), Some(0));
    assert!(out.stdout.is_empty() && out.stderr.is_empty());
    let r: Value = serde_json::from_str(&std::fs::read_to_string(&out_path).unwrap()).unwrap();
    assert_eq!(r["results"]["grid"], 128);
    assert_eq!(r["config"]["tolerances"]["linking-grid"], 128);
    assert_eq!(r["config"]["tolerances"]["transport-steps"], 2048);
    std::fs::write(&tol, r#"{ "linking-grdi": 128 }"#).unwrap();
    assert_eq!(run(&["linking", "--curve", &fixture("hopf.csv"), "--tolerances", &tol.display().to_string()]).status.code(), Some(2));
    std::fs::remove_dir_all(&dir).unwrap();
}
