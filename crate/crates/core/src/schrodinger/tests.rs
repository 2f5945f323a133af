use std::f64::consts::PI;

use proptest::prelude::*;

use super::*;
use crate::block::testutil::Uniform;
use crate::block::{schur_s, schur_t, spectral_symmetry_check};
use crate::numerics::c;

/// Bound states of `−k d²/dx² + m² − depth·1_{|x|<w/2}` below zero on the line.
///
/// Levels of the well at energy `E` relative to the outside satisfy
/// `2 q a = jπ + 2 atan(κ/q)`, `q = √((E + depth)/k)`, `κ = √(−E/k)`; the left
/// side minus the arctangent increases with `E`, so counting levels below
/// `E = −m²` reduces to `ceil(F/π)` with `F` evaluated there.
fn well_phase(depth: f64, width: f64, m: f64, kinetic: f64) -> Option<f64> {
    if depth <= m * m {
        return None;
    }
    let q = ((depth - m * m) / kinetic).sqrt();
    let kappa = m / kinetic.sqrt();
    Some(q * width - 2.0 * (kappa / q).atan())
}

fn well_count(depth: f64, width: f64, m: f64, kinetic: f64) -> usize {
    match well_phase(depth, width, m, kinetic) {
        Some(f) if f > 0.0 => (f / PI).ceil() as usize,
        _ => 0,
    }
}

/// Distance of the phase from the nearest level crossing, in units of `π`.
fn well_margin(depth: f64, width: f64, m: f64, kinetic: f64) -> f64 {
    match well_phase(depth, width, m, kinetic) {
        Some(f) => {
            let t = f / PI;
            (t - t.round()).abs()
        }
        None => f64::INFINITY,
    }
}

fn free_gl(half_length: f64, points: usize, m: f64, nu: f64) -> GLDiscretization {
    assemble_gl(&Grid1D::new(half_length, points).unwrap(), m, nu, &Potential::Zero).unwrap()
}

#[test]
fn grid_geometry() {
    let g = Grid1D::new(40.0, 801).unwrap();
    assert!((g.spacing() - 0.1).abs() < 1e-15);
    assert_eq!(g.node(0), -40.0);
    assert!((g.node(800) - 40.0).abs() < 1e-12);
    assert_eq!(g.dim(), 799);
    assert_eq!(g.refined().points(), 1601);
    assert!(Grid1D::new(1.0, 2).is_err());
    assert!(Grid1D::new(0.0, 10).is_err());
}

#[test]
fn free_laplacian_eigenvalues() {
    let g = Grid1D::new(10.0, 201).unwrap();
    let h = g.spacing();
    let ev = hermitian_eigenvalues(&discretize_hv(&g, 1.0, &Potential::Zero)).unwrap();
    for j in 1..=10 {
        let k = j as f64 * PI / 20.0;
        let discrete = 1.0 + 4.0 / (h * h) * (k * h / 2.0).sin().powi(2);
        assert!((ev[j - 1] - discrete).abs() < 1e-10);
        let continuum = 1.0 + k * k;
        // sin² expansion: the stencil undershoots by k⁴h²/12.
        assert!((ev[j - 1] - continuum).abs() <= 1.01 * k.powi(4) * h * h / 12.0);
    }
}

#[test]
fn weyl_lower_bound() {
    let g = Grid1D::new(15.0, 301).unwrap();
    for v in [Potential::gaussian(-3.0, 1.0).unwrap(), Potential::square_well(2.5, 4.0).unwrap()] {
        let ev = hermitian_eigenvalues(&discretize_hv(&g, 1.0, &v)).unwrap();
        assert!(ev[0] >= 1.0 - v.sup_norm(&g) - 1e-12);
    }
}

#[test]
fn square_well_bound_states_match_transcendental_count() {
    let g = Grid1D::new(20.0, 1601).unwrap();
    assert_eq!(well_count(5.0, 2.0, 1.0, 1.0), 1);
    for (depth, width) in [(5.0, 2.0), (10.0, 2.0), (20.0, 2.5), (0.9, 2.0)] {
        // Depth 5 sits 0.022 from the next crossing; h = 0.025 still resolves it.
        assert!(well_margin(depth, width, 1.0, 1.0) > 0.02);
        let d = assemble_gl(&g, 1.0, 0.5, &Potential::square_well(depth, width).unwrap()).unwrap();
        assert_eq!(d.kappa_hv.n_neg, well_count(depth, width, 1.0, 1.0), "depth {depth}");
    }
}

#[test]
fn derivative_stencil() {
    let g = Grid1D::new(PI, 401).unwrap();
    let d = discretize_d(&g);
    assert_eq!((&d + &d.transpose()).max_abs(), 0.0);

    let xs: Vec<f64> = g.interior_nodes().collect();
    let f: Vec<C64> = xs.iter().map(|x| c(x.sin(), 0.0)).collect();
    let df = d.apply(&f);
    let h = g.spacing();
    let err = xs.iter().zip(&df).map(|(x, y)| (y.re - x.cos()).abs()).fold(0.0, f64::max);
    assert!(err <= h * h / 6.0 * 1.01, "{err}");

    let ones = vec![ONE; xs.len()];
    let d1 = d.apply(&ones);
    assert!(d1[1..xs.len() - 1].iter().all(|z| z.norm() == 0.0));
}

#[test]
fn assembly_errors_and_signatures() {
    let g = Grid1D::new(20.0, 401).unwrap();
    for nu in [0.0, 1.0, -1.2, f64::NAN] {
        assert!(matches!(assemble_gl(&g, 1.0, nu, &Potential::Zero), Err(Error::NuOutOfRange { .. })));
    }
    let d = assemble_gl(&g, 1.0, 0.5, &Potential::Zero).unwrap();
    assert_eq!(d.kappa_hv.n_neg, 0);
    assert_eq!((&d.h_v - &d.h_v.transpose()).max_abs(), 0.0);
    assert!(d.coeffs.truncated);

    assert_eq!(well_count(10.0, 2.0, 1.0, 1.0), 2);
    let deep = assemble_gl(&g, 1.0, 0.5, &Potential::square_well(10.0, 2.0).unwrap()).unwrap();
    assert_eq!(deep.kappa_hv.n_neg, 2);

    let wide = Potential::gaussian(1.0, 10.0).unwrap();
    assert!(matches!(assemble_gl(&g, 1.0, 0.5, &wide), Err(Error::PotentialNotDecaying { .. })));
}

#[test]
fn zero_eigenvalue_of_hv_is_rejected() {
    // Bisect the well depth onto the threshold where H_V picks up a zero eigenvalue.
    let g = Grid1D::new(10.0, 201).unwrap();
    let min_ev = |depth: f64| hermitian_eigenvalues(&discretize_hv(&g, 1.0, &Potential::square_well(depth, 2.0).unwrap())).unwrap()[0];
    let (mut lo, mut hi) = (1.0, 4.0);
    assert!(min_ev(lo) > 0.0 && min_ev(hi) < 0.0);
    for _ in 0..80 {
        let mid = 0.5 * (lo + hi);
        if min_ev(mid) > 0.0 {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    let err = assemble_gl(&g, 1.0, 0.5, &Potential::square_well(lo, 2.0).unwrap());
    assert!(matches!(err, Err(Error::SingularHV { .. })), "{err:?}");
}

#[test]
fn s0_spectrum_for_free_case() {
    let d = free_gl(40.0, 800, 1.0, 0.5);
    let s0 = schur_s0_gl(&d).unwrap();
    let reference = schur_s(&d.coeffs, ZERO).unwrap();
    assert!((&s0 - &reference).max_abs() <= 1e-12);
    let ev = hermitian_eigenvalues(&s0).unwrap();
    assert!(ev[0] >= 0.75 - 0.02 && ev[ev.len() - 1] <= 1.0 + 0.02, "{} {}", ev[0], ev[ev.len() - 1]);
    assert!(ev[0] > 0.0);

    let tiny = free_gl(10.0, 101, 1.0, 1e-8);
    assert!((&schur_s0_gl(&tiny).unwrap() - &CMatrix::identity(99)).max_abs() <= 1e-12);
}

#[test]
fn t_matches_block_core() {
    let d = assemble_gl(&Grid1D::new(10.0, 121).unwrap(), 1.0, 0.6, &Potential::gaussian(-1.5, 1.0).unwrap()).unwrap();
    for z in [ZERO, c(0.3, 0.0), c(0.0, 2.0), c(-1.0, 0.7)] {
        let t = t_gl(&d, z).unwrap();
        let reference = schur_t(&d.coeffs, z).unwrap();
        assert!((&t - &reference).max_abs() <= 1e-12 * reference.max_abs().max(1.0));
    }
    assert!((&t_gl(&d, ZERO).unwrap() - &schur_s0_gl(&d).unwrap()).max_abs() <= 1e-12);
}

#[test]
fn t_for_small_velocity() {
    let g = Grid1D::new(10.0, 101).unwrap();
    let z = c(0.4, 0.9);
    let mut last = f64::INFINITY;
    for nu in [1e-2, 1e-3, 1e-4] {
        let d = assemble_gl(&g, 1.0, nu, &Potential::Zero).unwrap();
        let hinv = Lu::new(&d.h_v).inverse();
        let approx = &CMatrix::identity(99) - &hinv.scale(z * z);
        let err = (&t_gl(&d, z).unwrap() - &approx).max_abs();
        assert!(err <= 10.0 * nu && err < last);
        last = err;
    }
}

#[test]
fn factorization_identity() {
    let d = free_gl(20.0, 400, 1.0, 0.5);
    assert!(factorization_identity_check(&d, 3.0).unwrap().residual <= 1e-10);
    for y in [0.5, 1.0, 3.0, 10.0, 50.0] {
        let f = factorization_identity_check(&d, y).unwrap();
        assert!(f.residual <= 1e-9, "y = {y}: {}", f.residual);
        assert!(f.bound_ok);
    }
    let flipped = free_gl(20.0, 400, 1.0, -0.5);
    assert!(factorization_identity_check(&flipped, 3.0).unwrap().residual <= 1e-10);
    assert!(factorization_identity_check(&d, 0.0).is_err());
}

#[test]
fn factorization_large_y_limit() {
    let d = free_gl(10.0, 101, 1.0, 0.5);
    let y = 50.0;
    let f = d.d.scale(c(0.5, 0.0)).shift(c(y, 0.0));
    let f_inv = Lu::new(&f).inverse();
    let hinv = Lu::new(&d.h_v).inverse();
    let rhs = &f_inv.matmul(&f_inv) + &hinv;
    let approx = &hinv + &CMatrix::identity(99).scale(c(1.0 / (y * y), 0.0));
    let dnorm = spectral_norm(&d.d) * 0.5;
    assert!(spectral_norm(&(&rhs - &approx)) <= 3.0 * dnorm / y.powi(3));
}

#[test]
fn free_greens_function() {
    let g = greens_check(&Grid1D::new(30.0, 1200).unwrap(), 1.0).unwrap();
    assert!(g.max_rel_error <= 1e-3, "{}", g.max_rel_error);
    assert!((g.center_value - 0.5).abs() <= 1e-3);
    assert!((g.decay_ratio / g.decay_expected - 1.0).abs() <= 1e-3);
    assert!((g.decay_expected - (-5.0f64).exp()).abs() <= 0.05 * (-5.0f64).exp());
    assert!(g.symmetry_defect <= 1e-12);
}

#[test]
fn positivity_free_and_tuned_well() {
    let g = Grid1D::new(12.0, 481).unwrap();
    let p = positivity_equivalence(&g, 1.0, 0.6, &Potential::Zero, 1e-8).unwrap();
    assert!(p.a_cal_nonneg && p.hv_nonneg && p.hnuv_nonneg && p.equivalent);

    // Between the two thresholds only the softer operator binds below zero.
    let (depth, width) = (1.65, 2.0);
    assert_eq!(well_count(depth, width, 1.0, 1.0), 0);
    assert_eq!(well_count(depth, width, 1.0, 1.0 - 0.36), 1);
    let p = positivity_equivalence(&g, 1.0, 0.6, &Potential::square_well(depth, width).unwrap(), 1e-8).unwrap();
    assert!(p.hv_nonneg && !p.hnuv_nonneg && !p.a_cal_nonneg && p.equivalent, "{p:?}");
}

#[test]
fn positivity_on_random_wells() {
    let g = Grid1D::new(12.0, 481).unwrap();
    let mut rnd = Uniform::seeded(41);
    let mut cases = 0;
    while cases < 12 {
        let nu = 0.3 + 0.2 * (rnd.next() + 1.0);
        let width = 1.0 + (rnd.next() + 1.0);
        let depth = 1.0 + 1.5 * (rnd.next() + 1.0);
        let kin = 1.0 - nu * nu;
        if well_margin(depth, width, 1.0, 1.0) < 0.05 || well_margin(depth, width, 1.0, kin) < 0.05 {
            continue;
        }
        let p = positivity_equivalence(&g, 1.0, nu, &Potential::square_well(depth, width).unwrap(), 1e-8).unwrap();
        assert!(p.equivalent, "{p:?}");
        assert_eq!(p.hnuv_nonneg, well_count(depth, width, 1.0, kin) == 0);
        cases += 1;
    }
}

#[test]
fn kappa_additivity_on_wells() {
    let g = Grid1D::new(10.0, 161).unwrap();
    for (depth, width) in [(0.5, 2.0), (5.0, 2.0), (10.0, 2.0), (3.0, 4.0)] {
        let d = assemble_gl(&g, 1.0, 0.5, &Potential::square_well(depth, width).unwrap()).unwrap();
        let k = kappa_decomposition(&d.coeffs, 1e-8).unwrap();
        assert!(k.consistent, "{k:?}");
        assert_eq!(k.kappa_a.n_neg, d.kappa_hv.n_neg);
    }
}

#[test]
fn gl_report_with_full_root_search() {
    let d = free_gl(3.0, 14, 1.0, 0.6);
    let report = gl_spectrum_report(&d, &GlReportOptions::default()).unwrap();
    assert_eq!(report.via_t.mode, ViaTMode::RootSearch);
    assert!(report.via_t.consistent, "{:?}", report.via_t);
    assert!(report.report.verdicts["real_spectrum"]);
    assert!((report.gap - 0.8).abs() < 1e-15);
}

#[test]
fn gl_report_free_case() {
    let d = free_gl(20.0, 201, 1.0, 0.6);
    let report = gl_spectrum_report(&d, &GlReportOptions::default()).unwrap();
    assert_eq!(report.via_t.mode, ViaTMode::Kernel);
    assert!(report.via_t.consistent, "{:?}", report.via_t);
    assert_eq!(report.kappa.kappa_a_cal.n_neg, 0);
    assert!(report.max_abs_im <= 1e-8);
    assert!(report.report.verdicts["real_spectrum"]);
    assert!(report.report.verdicts["gap_clear"]);
    assert!(report.report.verdicts["conjugation_symmetric"]);
    assert_eq!(report.t_norms.rows.len(), 6);
    assert!(report.report.truncated);
}

#[test]
fn refinement_is_second_order() {
    let study = refinement_study(&Grid1D::new(10.0, 101).unwrap(), 1.0, 0.6, 10).unwrap();
    for r in &study.ratios {
        assert!((3.5..=4.5).contains(r), "{:?}", study.ratios);
    }
}

proptest! {
    #![proptest_config(ProptestConfig::with_cases(12))]

    #[test]
    fn spectrum_is_conjugation_symmetric(amp in -4.0f64..2.0, sigma in 0.3f64..1.0, nu in 0.1f64..0.9) {
        let g = Grid1D::new(10.0, 61).unwrap();
        let d = match assemble_gl(&g, 1.0, nu, &Potential::gaussian(amp, sigma).unwrap()) {
            Ok(d) => d,
            Err(Error::SingularHV { .. }) => return Ok(()),
            Err(e) => panic!("{e}"),
        };
        let eig = general_eigenvalues(&jsa_unchecked(&d.coeffs)).unwrap();
        prop_assert!(spectral_symmetry_check(&eig, 1e-8).symmetric);
        prop_assert_eq!((&d.d + &d.d.transpose()).max_abs(), 0.0);
    }

    #[test]
    fn factorization_residual_small(y in 0.2f64..60.0, nu in -0.9f64..0.9) {
        prop_assume!(nu.abs() > 1e-3);
        let d = assemble_gl(&Grid1D::new(6.0, 61).unwrap(), 1.0, nu, &Potential::Zero).unwrap();
        prop_assert!(factorization_identity_check(&d, y).unwrap().residual <= 1e-9);
    }
}
