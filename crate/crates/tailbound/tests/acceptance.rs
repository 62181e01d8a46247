//! Acceptance gate: one test per criterion, each printing a pass/fail
//! line (visible with `cargo test --test acceptance -- --nocapture`).
//! Tolerances are pinned in `tailbound::verify`; the two criteria with
//! runtime budgets assert them here.

use std::time::Instant;
use tailbound::cli::{render_table, Format};
use tailbound::montecarlo::{bound_scorecard, Generator, SimulationSpec};
use tailbound::verify::{run_suite, SuiteOptions, SuiteReport};

const SEED: u64 = 20250809;

fn seeded() -> SuiteOptions {
    SuiteOptions {
        seed: Some(SEED),
        max_n: None,
    }
}

fn report_and_assert(criterion: &str, report: &SuiteReport) {
    println!(
        "{criterion}: {}",
        if report.passed() { "PASS" } else { "FAIL" }
    );
    for check in &report.checks {
        println!(
            "    [{}] {}: {}",
            if check.passed { "pass" } else { "FAIL" },
            check.name,
            check.detail
        );
    }
    assert!(report.passed(), "{criterion} failed: {:?}", report.checks);
}

#[test]
fn criterion_01_domination_chain() {
    let start = Instant::now();
    let report = run_suite("domination", &SuiteOptions::default()).unwrap();
    let elapsed = start.elapsed();
    report_and_assert("criterion 1 (domination chain)", &report);
    println!("    runtime: {elapsed:.2?} (budget 60 s)");
    assert!(
        elapsed.as_secs_f64() < 60.0,
        "domination suite overran its 60 s budget"
    );
}

#[test]
fn criterion_02_optimum_coincidence() {
    let report = run_suite("optimality", &seeded()).unwrap();
    report_and_assert("criterion 2 (optimum coincidence)", &report);
}

#[test]
fn criterion_03_product_expectation_identity() {
    let start = Instant::now();
    let report = run_suite(
        "eq2",
        &SuiteOptions {
            seed: None,
            max_n: Some(10),
        },
    )
    .unwrap();
    let elapsed = start.elapsed();
    report_and_assert("criterion 3 (product-expectation identity)", &report);
    println!("    runtime: {elapsed:.2?} (budget 10 s)");
    assert!(
        elapsed.as_secs_f64() < 10.0,
        "eq2 suite overran its 10 s budget"
    );
}

#[test]
fn criterion_04_weight_function_budget() {
    let report = run_suite("weights", &seeded()).unwrap();
    report_and_assert("criterion 4 (weight-function budget)", &report);
}

#[test]
fn criterion_05_stable_selector() {
    let report = run_suite("selector", &seeded()).unwrap();
    report_and_assert("criterion 5 (stable selector)", &report);
}

#[test]
fn criterion_06_expected_max_with_floor() {
    let report = run_suite("max-floor", &SuiteOptions::default()).unwrap();
    report_and_assert("criterion 6 (expected max with mean floor)", &report);
}

#[test]
fn criterion_07_hypergeometric() {
    let report = run_suite("hypergeometric", &SuiteOptions::default()).unwrap();
    report_and_assert("criterion 7 (hypergeometric)", &report);
}

#[test]
fn criterion_08_weak_exponential_bound() {
    let report = run_suite("su-weak", &SuiteOptions::default()).unwrap();
    report_and_assert("criterion 8 (weak exponential bound)", &report);
}

#[test]
fn criterion_09_monte_carlo_soundness_and_determinism() {
    let report = run_suite("montecarlo", &seeded()).unwrap();
    report_and_assert("criterion 9 (monte carlo)", &report);

    // rendered documents must be byte-identical regardless of thread count
    let spec = SimulationSpec::new(Generator::Iid { n: 100, p: 0.5 }, 100_000, SEED).unwrap();
    let render = || {
        let rows = bound_scorecard(&spec, &[0.0, 0.05, 0.1]).unwrap();
        render_table(&rows, Format::Csv).unwrap()
    };
    let single = rayon::ThreadPoolBuilder::new()
        .num_threads(1)
        .build()
        .unwrap()
        .install(render);
    let several = rayon::ThreadPoolBuilder::new()
        .num_threads(4)
        .build()
        .unwrap()
        .install(render);
    println!(
        "criterion 9 (byte-identical documents across thread counts): {}",
        if single == several { "PASS" } else { "FAIL" }
    );
    assert_eq!(single, several);
}

#[test]
fn criterion_10_negative_correlation_pipeline() {
    let report = run_suite("negcorr", &SuiteOptions::default()).unwrap();
    report_and_assert("criterion 10 (negative-correlation pipeline)", &report);
}
