//! Acceptance suite: one test per criterion, each printing a single
//! PASS/FAIL line with the criterion's own summary. Run with --nocapture
//! to watch the lines stream.

use apstats_core::run_criterion;

fn run(id: u32) {
    let report = run_criterion(id).expect("criterion must be runnable");
    println!("{}", report.line());
    assert!(report.passed, "{}", report.line());
}

#[test]
fn criterion_01_exact_count_matches_enumeration() {
    run(1);
}

#[test]
fn criterion_02_census_routes_agree() {
    run(2);
}

#[test]
fn criterion_03_positional_sum_identities() {
    run(3);
}

#[test]
fn criterion_04_small_case_oracle_agreement() {
    run(4);
}

#[test]
fn criterion_05_kernel_constants_and_census_trend() {
    run(5);
}

#[test]
fn criterion_06_poisson_regime_total_variation() {
    run(6);
}

#[test]
fn criterion_07_gaussian_regime_ks() {
    run(7);
}

#[test]
fn criterion_08_correlation_and_kappa_band() {
    run(8);
}

#[test]
fn criterion_09_moment_assembly_against_oracle() {
    run(9);
}

#[test]
fn criterion_10_exploration_laws_and_matchings() {
    run(10);
}
