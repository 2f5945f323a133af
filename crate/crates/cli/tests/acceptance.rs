//! One test per acceptance criterion. Each prints its PASS/FAIL line and
//! asserts at the tolerance the criterion itself carries.

use blockspec::verify::{criterion, run_criterion, VerifyOptions};

fn check(id: u8) {
    let r = run_criterion(criterion(id), &VerifyOptions::default());
    println!("{}", r.line());
    assert!(r.passed, "{}", r.line());
}

#[test]
fn criterion_01_bands_formula_and_sweep() {
    check(1);
}

#[test]
fn criterion_02_symbol_determinant_identity() {
    check(2);
}

#[test]
fn criterion_03_kappa_additivity() {
    check(3);
}

#[test]
fn criterion_04_frobenius_schur_residual() {
    check(4);
}

#[test]
fn criterion_05_spectrum_direct_vs_t() {
    check(5);
}

#[test]
fn criterion_06_spectral_symmetry_and_multiplicity() {
    check(6);
}

#[test]
fn criterion_07_direct_sum_projector_growth() {
    check(7);
}

#[test]
fn criterion_08_direct_sum_definitizability_probe() {
    check(8);
}

#[test]
fn criterion_09_lrg_failure_gl() {
    check(9);
}

#[test]
fn criterion_10_bands_spectral_gap() {
    check(10);
}

#[test]
fn criterion_11_positivity_equivalence() {
    check(11);
}

#[test]
fn criterion_12_factorization_identity() {
    check(12);
}

#[test]
fn criterion_13_greens_function() {
    check(13);
}

#[test]
fn criterion_14_convergence_order() {
    check(14);
}
