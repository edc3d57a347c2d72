//! One test per acceptance criterion; each prints a single PASS/FAIL line.

use std::sync::OnceLock;

use pinlab_core::acceptance::{determinism, run_criteria, AcceptanceSettings, CriterionResult};

fn first_run() -> &'static [CriterionResult] {
    static RUN: OnceLock<Vec<CriterionResult>> = OnceLock::new();
    RUN.get_or_init(|| run_criteria(&AcceptanceSettings::default()).expect("acceptance run"))
}

fn report(result: &CriterionResult) {
    println!("{}", result.summary_line());
    for c in result.checks.iter().filter(|c| !c.passed()) {
        println!("    failed {}: lhs={:e} rhs={:e}", c.name, c.lhs, c.rhs);
    }
    assert!(result.passed(), "{}", result.summary_line());
}

fn criterion(id: u8) {
    let r = first_run().iter().find(|r| r.id == id).expect("criterion present");
    report(r);
}

#[test]
fn criterion_01_homogeneous_exactness() {
    criterion(1);
}

#[test]
fn criterion_02_renewal_function_asymptotics() {
    criterion(2);
}

#[test]
fn criterion_03_jensen_chain() {
    criterion(3);
}

#[test]
fn criterion_04_free_energy_sandwich() {
    criterion(4);
}

#[test]
fn criterion_05_replica_symmetric_bound() {
    criterion(5);
}

#[test]
fn criterion_06_finite_size_law() {
    criterion(6);
}

#[test]
fn criterion_07_intersection_dichotomy() {
    criterion(7);
}

#[test]
fn criterion_08_geometric_intersection_tail() {
    criterion(8);
}

#[test]
fn criterion_09_interpolation_inequality() {
    criterion(9);
}

#[test]
fn criterion_10_psi_oracle() {
    criterion(10);
}

#[test]
fn criterion_11_superadditivity() {
    criterion(11);
}

#[test]
fn criterion_12_critical_exponent() {
    criterion(12);
}

#[test]
fn criterion_13_determinism() {
    let first = first_run();
    let pool = rayon::ThreadPoolBuilder::new().num_threads(3).build().unwrap();
    let second = pool.install(|| run_criteria(&AcceptanceSettings::default())).expect("rerun");
    report(&determinism(first, &second));
}
