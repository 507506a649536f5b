//! End-to-end checks of the apstats binary: output shapes, exit codes,
//! and determinism across thread counts.

use std::process::{Command, Output};

use serde_json::Value;

fn apstats(args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_apstats"))
        .args(args)
        .env_remove("APSTATS_BUDGET")
        .env_remove("APSTATS_THREADS")
        .output()
        .expect("binary launches")
}

fn stdout_of(out: &Output) -> String {
    String::from_utf8(out.stdout.clone()).expect("utf8 stdout")
}

fn json_of(out: &Output) -> Value {
    serde_json::from_str(&stdout_of(out)).expect("stdout parses as json")
}

#[test]
fn count_prints_key_value_csv_by_default() {
    let out = apstats(&["count", "5", "3"]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert!(text.starts_with("key,value\n"), "got: {text}");
    assert!(text.contains("count,4\n"), "got: {text}");
}

#[test]
fn count_json_carries_exact_expectation() {
    let out = apstats(&["count", "9", "4", "--p", "1/2", "--format", "json"]);
    assert!(out.status.success());
    let v = json_of(&out);
    assert_eq!(v["count"], 9);
    assert_eq!(v["expected"], "9/16");
    assert_eq!(v["expected_f64"], 0.5625);
}

#[test]
fn malformed_probability_is_a_usage_error() {
    // out-of-range and unparsable values both die in the argument parser
    for bad in ["1.5", "abc", "-1/2"] {
        let out = apstats(&["regime", "--n", "100", "--p", bad, "--ell1", "4", "--ell2", "3"]);
        assert_eq!(out.status.code(), Some(2), "p = {bad}");
    }
}

#[test]
fn pairs_csv_matches_the_frozen_census() {
    let out = apstats(&["pairs", "12", "4", "3"]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("n,ell,ellPrime,r,count"));
    // census of (12, 4, 3): [136, 266, 102, 36]
    assert!(text.contains("12,4,3,0,136\n"), "got: {text}");
    assert!(text.contains("12,4,3,3,36\n"), "got: {text}");
}

#[test]
fn pairs_brute_route_agrees() {
    let fast = apstats(&["pairs", "20", "3", "3"]);
    let brute = apstats(&["pairs", "20", "3", "3", "--brute"]);
    assert!(fast.status.success() && brute.status.success());
    assert_eq!(stdout_of(&fast), stdout_of(&brute));
}

#[test]
fn kernel_samples_hit_known_values() {
    let out = apstats(&["kernel", "--class", "3", "--points", "5"]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    let mut lines = text.lines();
    assert_eq!(lines.next(), Some("x,phi(x)"));
    let rows: Vec<(f64, f64)> = lines
        .map(|l| {
            let (x, y) = l.split_once(',').expect("two columns");
            (x.parse().unwrap(), y.parse().unwrap())
        })
        .collect();
    assert_eq!(rows.len(), 5);
    // phi_3 rises from 1/2 at the endpoints to 1 in the middle
    assert_eq!(rows[0], (0.0, 0.5));
    assert_eq!(rows[2], (0.5, 1.0));
    assert_eq!(rows[4], (1.0, 0.5));
}

#[test]
fn kappa_json_reports_constants() {
    let out = apstats(&[
        "kappa", "--ell", "4", "--ell-prime", "3", "--c", "5", "--format", "json",
    ]);
    assert!(out.status.success());
    let v = json_of(&out);
    assert_eq!(v["lambda"], "113/216");
    assert_eq!(v["lambda_tabulated"], "785/1296");
    let close = |field: &str, want: f64| {
        let got = v[field].as_f64().expect(field);
        assert!((got - want).abs() < 1e-12, "{field}: {got} vs {want}");
    };
    close("kappa_loose", 0.9967657002470139);
    close("gamma", 0.2823529411764706);
    close("kappa_intermediate", 0.8802160816915492);
}

#[test]
fn regime_json_carries_the_kappa_band() {
    let out = apstats(&[
        "regime", "--n", "10000", "--p", "0.05", "--ell1", "4", "--ell2", "3", "--format", "json",
    ]);
    assert!(out.status.success());
    let v = json_of(&out);
    assert_eq!(v["regime_pair"]["kind"], "intermediate");
    let band = v["kappa_band"].as_array().expect("band array");
    assert_eq!(band.len(), 2);
    let (lo, hi) = (band[0].as_f64().unwrap(), band[1].as_f64().unwrap());
    assert!(0.0 < lo && lo < hi && hi < 1.0, "band = [{lo}, {hi}]");
}

#[test]
fn covariance_json_is_exact() {
    let out = apstats(&[
        "covariance", "--n", "5", "--ell1", "3", "--ell2", "3", "--p", "1/2", "--format", "json",
    ]);
    assert!(out.status.success());
    let v = json_of(&out);
    // Var X_3 on {1,..,5} at p = 1/2 is 7/8
    assert_eq!(v["covariance"], "7/8");
    assert_eq!(v["variance1"], "7/8");
    assert_eq!(v["correlation"], 1.0);
}

#[test]
fn bounds_json_matches_hand_computed_deltas() {
    let out = apstats(&[
        "bounds", "--n", "5", "--ell", "3", "--p", "0.5", "--format", "json",
    ]);
    assert!(out.status.success());
    let v = json_of(&out);
    assert_eq!(v["delta1"], 0.25);
    assert_eq!(v["delta2"], 0.625);
    assert_eq!(v["tv_bound"], 0.875);
}

#[test]
fn moments_unit_direction_second_moment_is_one() {
    let out = apstats(&[
        "moments", "--n", "10", "--ell1", "3", "--ell2", "3", "--p", "1/2", "--k", "2", "--u1",
        "1", "--u2", "0", "--format", "json",
    ]);
    assert!(out.status.success());
    let v = json_of(&out);
    assert_eq!(v["total"]["exact"], "1");
    assert_eq!(v["total"]["value"], 1.0);
    assert_eq!(v["k"], 2);
}

#[test]
fn moments_budget_failure_reports_resource_kind() {
    let out = apstats(&[
        "moments", "--n", "60", "--ell1", "3", "--ell2", "3", "--p", "1/2", "--k", "6",
        "--budget", "10",
    ]);
    assert_eq!(out.status.code(), Some(1));
    let err: Value =
        serde_json::from_slice(&out.stderr).expect("stderr is a one-line json object");
    assert_eq!(err["error"]["kind"], "resource");
}

#[test]
fn oracle_refuses_large_universes() {
    let out = apstats(&["oracle", "--n", "30", "--ell1", "3", "--ell2", "3", "--p", "1/2"]);
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&out.stderr).expect("json error");
    assert_eq!(err["error"]["kind"], "resource");
}

#[test]
fn oracle_pmf_csv_and_json_summary_agree_with_theory() {
    let csv = apstats(&["oracle", "--n", "5", "--ell1", "3", "--ell2", "3", "--p", "1/2"]);
    assert!(csv.status.success());
    let text = stdout_of(&csv);
    assert!(text.starts_with("x_ell1,x_ell2,probability\n"), "got: {text}");
    assert!(text.contains("/32"), "rational weights expected: {text}");

    let json = apstats(&[
        "oracle", "--n", "5", "--ell1", "3", "--ell2", "3", "--p", "1/2", "--format", "json",
    ]);
    let v = json_of(&json);
    assert_eq!(v["variance1"], "7/8");
    assert_eq!(v["mean1"], "1/2");
}

#[test]
fn simulate_is_byte_identical_across_thread_counts() {
    let args = |threads: &'static str| {
        vec![
            "simulate", "--n", "200", "--p", "0.1", "--ell1", "3", "--ell2", "3", "--replicas",
            "40", "--seed", "7", "--threads", threads,
        ]
    };
    let one = apstats(&args("1"));
    let four = apstats(&args("4"));
    let global = apstats(&args("0"));
    assert!(one.status.success());
    let text = stdout_of(&one);
    assert!(
        text.starts_with("replica,x_ell1,x_ell2,std_x_ell1,std_x_ell2\n"),
        "got: {text}"
    );
    assert_eq!(text, stdout_of(&four));
    assert_eq!(text, stdout_of(&global));
}

#[test]
fn simulate_json_summarizes_the_batch() {
    let out = apstats(&[
        "simulate", "--n", "100", "--p", "0.2", "--ell1", "3", "--ell2", "3", "--replicas", "30",
        "--seed", "11", "--format", "json",
    ]);
    assert!(out.status.success());
    let v = json_of(&out);
    assert_eq!(v["replicas"], 30);
    assert_eq!(v["correlation"], 1.0); // equal lengths: the counts coincide
    assert!(v["model_sd1"].as_f64().unwrap() > 0.0);
}

#[test]
fn out_flag_writes_the_file_instead_of_stdout() {
    let path = std::env::temp_dir().join(format!("apstats-cli-test-{}.csv", std::process::id()));
    let path_str = path.to_str().expect("temp path is utf8");
    let out = apstats(&["count", "9", "3", "--out", path_str]);
    assert!(out.status.success());
    assert!(out.stdout.is_empty());
    let text = std::fs::read_to_string(&path).expect("file written");
    assert!(text.contains("count,16\n"), "got: {text}");
    std::fs::remove_file(&path).ok();
}

#[test]
fn repro_runs_a_single_criterion() {
    let out = apstats(&["repro", "--criterion", "1"]);
    assert!(out.status.success());
    let text = stdout_of(&out);
    assert!(text.contains("criterion  1 [PASS]"), "got: {text}");
    assert!(text.contains("1 of 1 criteria passed"), "got: {text}");
}

#[test]
fn repro_rejects_unknown_criteria() {
    let out = apstats(&["repro", "--criterion", "11"]);
    assert_eq!(out.status.code(), Some(1));
    let err: Value = serde_json::from_slice(&out.stderr).expect("json error");
    assert_eq!(err["error"]["kind"], "domain");
}
