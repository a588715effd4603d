use cqed_core::scenario_a::concurrence_a_equal;
use cqed_core::validation::{self, CriterionReport};

fn check(report: CriterionReport) {
    println!("{report}");
    print!("{}", report.details());
    assert!(
        report.passed(),
        "criterion {} failed: {:?}",
        report.id,
        report.failures()
    );
}

#[test]
fn criterion_01_detailed_balance_row() {
    check(validation::criterion_1());
}

#[test]
fn criterion_02_damped_rows() {
    check(validation::criterion_2());
}

#[test]
fn criterion_03_scenario_a_optimum() {
    check(validation::criterion_3());
}

#[test]
fn criterion_03_rejects_perturbed_formula() {
    let tilted = validation::criterion_3_with(|gt, kt| concurrence_a_equal(gt, kt) + 1e-3 * kt);
    println!("perturbed (slope): {tilted}");
    assert!(!tilted.passed());
    let shifted = validation::criterion_3_with(|gt, kt| concurrence_a_equal(gt, kt) + 1e-3);
    println!("perturbed (offset): {shifted}");
    assert!(!shifted.passed());
}

#[test]
fn criterion_04_small_damping_slope() {
    check(validation::criterion_4());
}

#[test]
fn criterion_05_enhancement_threshold() {
    check(validation::criterion_5());
}

#[test]
fn criterion_06_scenario_b_optimum() {
    check(validation::criterion_6());
}

#[test]
fn criterion_07_zero_damping_oracles() {
    check(validation::criterion_7());
}

#[test]
fn criterion_08_weak_damping_gap() {
    check(validation::criterion_8());
}

#[test]
fn criterion_09_damping_ordering() {
    check(validation::criterion_9());
}

#[test]
fn criterion_10_concurrence_references() {
    check(validation::criterion_10());
}
