//! Acceptance criteria at their stated tolerances, one test each.

use tmsm::verify::{run_criterion, CriterionReport, VerifyOptions};

fn check(n: u32) {
    let report: CriterionReport = run_criterion(n, &VerifyOptions::default()).expect("known criterion");
    println!("{}", report.summary_line());
    println!("  measured: {}", report.measured);
    assert!(report.pass, "criterion {n} failed: {}", report.measured);
}

#[test]
fn criterion_01_scaling_identity() {
    check(1);
}

#[test]
fn criterion_02_dependence_rates() {
    check(2);
}

#[test]
fn criterion_03_dependence_bands() {
    check(3);
}

#[test]
fn criterion_04_simulation_fidelity() {
    check(4);
}

#[test]
fn criterion_05_gaussian_oracle() {
    check(5);
}

#[test]
fn criterion_06_moment_limit() {
    check(6);
}

#[test]
fn criterion_07_quasinorm_slopes() {
    check(7);
}

#[test]
fn criterion_08_localisability() {
    check(8);
}

#[test]
fn criterion_09_semi_long_range_dependence() {
    check(9);
}

#[test]
fn criterion_10_property_suites() {
    check(10);
}
