//! The acceptance suite at canonical parameters.
//!
//! Each criterion returns a measured value, the tolerance it was judged
//! against and a pass flag. `--filter` selects criteria by substring of their
//! names; `band_tol` overrides the band tolerance of the two band criteria.

use std::f64::consts::PI;
use std::time::Instant;

use blockspec_core::block::{
    frobenius_schur_check, hausdorff_distance, kappa_decomposition, lrg_scan, spectral_symmetry_check, spectrum_l_direct, spectrum_l_via_t, BlockCoefficients, InstanceSampler,
    Region, RootSearch, SignPattern, ROOT_MATCH_TOL,
};
use blockspec_core::dsum::{definitizability_probe, projector_growth_scan, projector_norm, t_inverse_norm_scan, BRule, DiagonalModel};
use blockspec_core::numerics::{general_eigenvalues, C64};
use blockspec_core::schrodinger::{
    assemble_gl, factorization_identity_check, greens_check, positivity_equivalence, refinement_study, Grid1D, Potential, GL_BAND_TOL,
};
use blockspec_core::symbol::{band_sweep, default_lambda_grid, ess_spectrum_bands, lrg_sup, symbol_det_a, symbol_matrix_a, GLSymbolParams, LrgIntegrand, BAND_TOL};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Context, Result};

/// Seed of the random instances in the suite.
pub const SUITE_SEED: u64 = 20_240_601;

#[derive(Clone, Debug, Default)]
pub struct VerifyOptions {
    pub filter: Option<String>,
    pub band_tol: Option<f64>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct CriterionResult {
    pub id: u8,
    pub name: String,
    pub passed: bool,
    pub measured: f64,
    pub tolerance: f64,
    pub detail: String,
    pub seconds: f64,
}

impl CriterionResult {
    pub fn line(&self) -> String {
        format!(
            "[{}] {:>2} {:<38} measured {:<12.6e} tol {:<10.3e} {:>7.2}s  {}",
            if self.passed { "PASS" } else { "FAIL" },
            self.id,
            self.name,
            self.measured,
            self.tolerance,
            self.seconds,
            self.detail
        )
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct VerifySummary {
    pub results: Vec<CriterionResult>,
}

impl VerifySummary {
    pub fn all_passed(&self) -> bool {
        self.results.iter().all(|r| r.passed)
    }

    pub fn failed(&self) -> Vec<String> {
        self.results.iter().filter(|r| !r.passed).map(|r| r.name.clone()).collect()
    }
}

/// Outcome before timing is attached.
pub struct Outcome {
    pub passed: bool,
    pub measured: f64,
    pub tolerance: f64,
    pub detail: String,
}

type Check = fn(&VerifyOptions) -> Result<Outcome>;

pub struct Criterion {
    pub id: u8,
    pub name: &'static str,
    pub run: Check,
}

pub const CRITERIA: [Criterion; 14] = [
    Criterion { id: 1, name: "bands_formula_and_sweep", run: bands_formula_and_sweep },
    Criterion { id: 2, name: "symbol_determinant_identity", run: symbol_determinant_identity },
    Criterion { id: 3, name: "kappa_additivity", run: kappa_additivity },
    Criterion { id: 4, name: "frobenius_schur_residual", run: frobenius_schur_residual },
    Criterion { id: 5, name: "spectrum_direct_vs_t", run: spectrum_direct_vs_t },
    Criterion { id: 6, name: "spectral_symmetry_and_multiplicity", run: spectral_symmetry_and_multiplicity },
    Criterion { id: 7, name: "direct_sum_projector_growth", run: direct_sum_projector_growth },
    Criterion { id: 8, name: "direct_sum_definitizability_probe", run: direct_sum_definitizability_probe },
    Criterion { id: 9, name: "lrg_failure_gl", run: lrg_failure_gl },
    Criterion { id: 10, name: "bands_spectral_gap", run: bands_spectral_gap },
    Criterion { id: 11, name: "positivity_equivalence", run: positivity_equivalence_wells },
    Criterion { id: 12, name: "factorization_identity", run: factorization_identity },
    Criterion { id: 13, name: "greens_function", run: greens_function },
    Criterion { id: 14, name: "convergence_order", run: convergence_order },
];

pub fn criterion(id: u8) -> &'static Criterion {
    CRITERIA.iter().find(|c| c.id == id).expect("criterion ids run from 1 to 14")
}

/// Runs one criterion; numerical errors count as a failure with the message as detail.
pub fn run_criterion(c: &Criterion, opts: &VerifyOptions) -> CriterionResult {
    let start = Instant::now();
    let outcome = (c.run)(opts).unwrap_or_else(|e| Outcome {
        passed: false,
        measured: f64::NAN,
        tolerance: f64::NAN,
        detail: format!("error: {e}"),
    });
    CriterionResult {
        id: c.id,
        name: c.name.to_string(),
        passed: outcome.passed,
        measured: outcome.measured,
        tolerance: outcome.tolerance,
        detail: outcome.detail,
        seconds: start.elapsed().as_secs_f64(),
    }
}

pub fn selected(opts: &VerifyOptions) -> Vec<&'static Criterion> {
    CRITERIA.iter().filter(|c| opts.filter.as_deref().is_none_or(|f| c.name.contains(f))).collect()
}

/// Runs the selected criteria in order, calling `report` after each.
pub fn verify_all(opts: &VerifyOptions, mut report: impl FnMut(&CriterionResult)) -> VerifySummary {
    let results = selected(opts)
        .into_iter()
        .map(|c| {
            let r = run_criterion(c, opts);
            report(&r);
            r
        })
        .collect();
    VerifySummary { results }
}

fn instances(seed: u64, count: usize, pattern: SignPattern) -> Result<Vec<(BlockCoefficients, usize, usize)>> {
    let mut s = InstanceSampler::seeded(seed);
    (0..count)
        .map(|_| {
            let n = s.size(1, 6);
            let i = s.instance(n, pattern)?;
            Ok((i.coeffs, i.kappa_a, i.kappa_s0))
        })
        .collect::<blockspec_core::Result<_>>()
        .context(|| "random instances".into())
}

/// Phase `q w − 2 atan(κ/q)` of the bound-state condition for
/// `−k d²/dx² + m² − depth·1_{|x|<w/2}` at energy zero; levels below zero
/// number `ceil(F/π)` when `F > 0`.
fn well_phase(depth: f64, width: f64, m: f64, kinetic: f64) -> f64 {
    if depth <= m * m {
        return f64::NEG_INFINITY;
    }
    let q = ((depth - m * m) / kinetic).sqrt();
    q * width - 2.0 * (m / kinetic.sqrt() / q).atan()
}

/// Distance of `F/π` from the nearest level crossing.
fn well_margin(depth: f64, width: f64, m: f64, kinetic: f64) -> f64 {
    let t = well_phase(depth, width, m, kinetic) / PI;
    if t.is_finite() {
        (t - t.round()).abs()
    } else {
        f64::INFINITY
    }
}

/// Depth at which the first level crosses zero.
fn well_threshold(width: f64, m: f64, kinetic: f64) -> f64 {
    let (mut lo, mut hi) = (m * m, m * m + 1.0);
    while well_phase(hi, width, m, kinetic) <= 0.0 {
        hi = m * m + 2.0 * (hi - m * m);
    }
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if well_phase(mid, width, m, kinetic) > 0.0 {
            hi = mid;
        } else {
            lo = mid;
        }
    }
    0.5 * (lo + hi)
}

fn bands_formula_and_sweep(opts: &VerifyOptions) -> Result<Outcome> {
    let tol = opts.band_tol.unwrap_or(BAND_TOL);
    let cases = [
        (2.0, 0.6, [(0.64, 1.0), (4.0, f64::INFINITY)]),
        (0.9, 0.6, [(0.64, 0.81), (1.0, f64::INFINITY)]),
        (0.9, 0.4, [(0.81, 0.84), (1.0, f64::INFINITY)]),
    ];
    let grid = default_lambda_grid();
    let mut formula_ok = true;
    let mut worst = 0.0f64;
    for (m, nu, want) in cases {
        let p = GLSymbolParams::new(m, nu).context(|| "symbol parameters".into())?;
        let bands = ess_spectrum_bands(&p);
        formula_ok &= bands.intervals.len() == 2
            && bands.intervals.iter().zip(want).all(|(got, w)| (got.0 - w.0).abs() <= 1e-12 && (got.1 == w.1 || (got.1 - w.1).abs() <= 1e-12));
        worst = worst.max(band_sweep(&p, &grid).hausdorff);
    }
    Ok(Outcome {
        passed: formula_ok && worst <= tol,
        measured: worst,
        tolerance: tol,
        detail: format!("closed-form bands {}, {}-point sweep", if formula_ok { "match" } else { "DIFFER" }, grid.len()),
    })
}

fn symbol_determinant_identity(_: &VerifyOptions) -> Result<Outcome> {
    let mut rng = ChaCha8Rng::seed_from_u64(SUITE_SEED);
    let mut worst = 0.0f64;
    for _ in 0..10_000 {
        let m = rng.random_range(0.1..3.0);
        let nu = rng.random_range(-0.99..0.99);
        let p = GLSymbolParams::new(m, if nu == 0.0 { 0.5 } else { nu }).context(|| "symbol parameters".into())?;
        let l = rng.random_range(-20.0..20.0);
        let z = C64::new(rng.random_range(-10.0..10.0), rng.random_range(-10.0..10.0));
        let a_hat = symbol_matrix_a(&p.triple(), l).context(|| "symbol_matrix_a".into())?;
        let numeric = a_hat.shift(z).determinant();
        let closed = symbol_det_a(&p, l, z);
        let scale = (a_hat.get(0, 0) - z).norm() * (a_hat.get(1, 1) - z).norm() + a_hat.get(1, 0).norm_sqr();
        worst = worst.max((closed - numeric).norm() / scale);
    }
    Ok(Outcome {
        passed: worst <= 1e-12,
        measured: worst,
        tolerance: 1e-12,
        detail: "10000 random (m, nu, lambda, z)".into(),
    })
}

fn kappa_additivity(_: &VerifyOptions) -> Result<Outcome> {
    let random = instances(SUITE_SEED, 200, SignPattern::Random)?;
    let mut failures: usize = random
        .par_iter()
        .map(|(c, ka, ks)| match kappa_decomposition(c, 1e-10) {
            Ok(k) => usize::from(!(k.consistent && k.kappa_a.n_neg == *ka && k.kappa_s0.n_neg == *ks)),
            Err(_) => 1,
        })
        .sum();

    let grid = Grid1D::new(10.0, 161).context(|| "grid".into())?;
    let mut rng = ChaCha8Rng::seed_from_u64(SUITE_SEED + 3);
    let mut wells = Vec::new();
    while wells.len() < 30 {
        let nu: f64 = rng.random_range(0.2..0.8);
        let (depth, width) = (rng.random_range(0.5..12.0), rng.random_range(1.0..4.0));
        if well_margin(depth, width, 1.0, 1.0) >= 0.05 {
            wells.push((nu, depth, width));
        }
    }
    let well_failures: usize = wells
        .par_iter()
        .map(|&(nu, depth, width)| {
            let ok = Potential::square_well(depth, width)
                .and_then(|v| assemble_gl(&grid, 1.0, nu, &v))
                .and_then(|d| kappa_decomposition(&d.coeffs, 1e-8))
                .is_ok_and(|k| k.consistent);
            usize::from(!ok)
        })
        .sum();
    failures += well_failures;
    Ok(Outcome {
        passed: failures == 0,
        measured: failures as f64,
        tolerance: 0.0,
        detail: format!("200 random instances (n <= 6) and 30 GL square wells; {well_failures} well failures"),
    })
}

fn frobenius_schur_residual(_: &VerifyOptions) -> Result<Outcome> {
    let list = instances(SUITE_SEED + 1, 200, SignPattern::Random)?;
    let mut rng = ChaCha8Rng::seed_from_u64(SUITE_SEED + 1);
    let zs: Vec<Vec<C64>> = list.iter().map(|_| (0..20).map(|_| C64::new(rng.random_range(-3.0..3.0), rng.random_range(-3.0..3.0))).collect()).collect();
    let worst = list
        .par_iter()
        .zip(&zs)
        .map(|((c, _, _), z)| z.iter().map(|&z| frobenius_schur_check(c, z)).try_fold(0.0f64, |m, r| r.map(|r| m.max(r))))
        .collect::<blockspec_core::Result<Vec<_>>>()
        .context(|| "frobenius_schur_check".into())?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(Outcome {
        passed: worst <= 1e-9,
        measured: worst,
        tolerance: 1e-9,
        detail: "200 instances x 20 z".into(),
    })
}

fn spectrum_direct_vs_t(_: &VerifyOptions) -> Result<Outcome> {
    let list = instances(SUITE_SEED + 2, 30, SignPattern::Random)?;
    let worst = list
        .par_iter()
        .map(|(c, _, _)| {
            let direct = spectrum_l_direct(c)?.eigenvalues;
            let r = direct.iter().fold(0.0f64, |m, z| m.max(z.re.abs()).max(z.im.abs()));
            let via = spectrum_l_via_t(c, Region::square(1.1 * r + 0.5), RootSearch::default())?;
            Ok(hausdorff_distance(&direct, &via.roots))
        })
        .collect::<blockspec_core::Result<Vec<_>>>()
        .context(|| "spectrum_l_via_t".into())?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(Outcome {
        passed: worst <= ROOT_MATCH_TOL,
        measured: worst,
        tolerance: ROOT_MATCH_TOL,
        detail: "30 random instances, n <= 6".into(),
    })
}

fn spectral_symmetry_and_multiplicity(_: &VerifyOptions) -> Result<Outcome> {
    const TOL: f64 = 1e-8;
    let indefinite = instances(SUITE_SEED + 4, 100, SignPattern::Indefinite)?;
    let bad_indefinite: usize = indefinite
        .par_iter()
        .map(|(c, _, _)| {
            let ok = spectrum_l_direct(c).and_then(|s| kappa_decomposition(c, 1e-10).map(|k| (s, k))).is_ok_and(|(s, k)| {
                let sym = spectral_symmetry_check(&s.eigenvalues, TOL);
                let nonreal = s.eigenvalues.iter().filter(|z| z.im.abs() > TOL * z.norm().max(1.0)).count();
                sym.symmetric && nonreal <= 2 * k.kappa_a_cal.n_neg
            });
            usize::from(!ok)
        })
        .sum();
    let definite = instances(SUITE_SEED + 5, 50, SignPattern::Definite)?;
    let max_im = definite
        .par_iter()
        .map(|(c, _, _)| spectrum_l_direct(c).map(|s| s.eigenvalues.iter().map(|z| z.im.abs()).fold(0.0, f64::max)))
        .collect::<blockspec_core::Result<Vec<_>>>()
        .context(|| "spectrum_l_direct".into())?
        .into_iter()
        .fold(0.0, f64::max);
    Ok(Outcome {
        passed: bad_indefinite == 0 && max_im <= TOL,
        measured: max_im,
        tolerance: TOL,
        detail: format!("{bad_indefinite} of 100 indefinite instances fail symmetry or the 2 kappa bound; max |Im| over 50 definite instances"),
    })
}

fn direct_sum_projector_growth(_: &VerifyOptions) -> Result<Outcome> {
    let i = C64::new(0.0, 1.0);
    let mut t_err = 0.0f64;
    for n in [1usize, 10, 100, 1000] {
        let scan = t_inverse_norm_scan(&DiagonalModel::integers(n, BRule::Identity), i).context(|| "t_inverse_norm_scan".into())?;
        t_err = t_err.max((scan.last - n as f64 / (n as f64 + 1.0)).abs());
    }
    let mut p_err = 0.0f64;
    for a in (1..=1000).map(f64::from) {
        let got = projector_norm(a, BRule::Identity).context(|| "projector_norm".into())?;
        let want = (a + 1.0) / (2.0 * a.sqrt());
        p_err = p_err.max((got - want).abs() / want);
    }
    let growth = projector_growth_scan(&DiagonalModel::integers(1000, BRule::Identity)).context(|| "projector_growth_scan".into())?;
    let exponent = growth.exponent.unwrap_or(f64::NAN);
    let passed = t_err <= 1e-12 && p_err <= 1e-10 && (exponent - 0.5).abs() <= 0.02;
    Ok(Outcome {
        passed,
        measured: (exponent - 0.5).abs(),
        tolerance: 0.02,
        detail: format!("exponent {exponent:.5}; T(i) inverse error {t_err:.1e} (tol 1e-12); projector error {p_err:.1e} (tol 1e-10)"),
    })
}

fn direct_sum_definitizability_probe(_: &VerifyOptions) -> Result<Outcome> {
    let model = DiagonalModel::integers(1000, BRule::Inverse);
    let probe = definitizability_probe(&model, C64::new(0.0, 2.0)).context(|| "definitizability_probe".into())?;
    let ratio_err = probe.trend.iter().map(|r| (r.3 - 1.0).abs()).fold(0.0, f64::max);
    let exact_zero = probe.t_at_plus_one == 0.0 && probe.t_at_minus_one == 0.0;
    Ok(Outcome {
        passed: exact_zero && ratio_err <= 1e-10 && probe.resolvent_empty_in_limit,
        measured: ratio_err,
        tolerance: 1e-10,
        detail: format!("T(+1), T(-1) max entries {:e}, {:e}; N = {:?}", probe.t_at_plus_one, probe.t_at_minus_one, probe.trend.iter().map(|r| r.0).collect::<Vec<_>>()),
    })
}

fn lrg_failure_gl(_: &VerifyOptions) -> Result<Outcome> {
    let p = GLSymbolParams::new(1.0, 0.5).context(|| "symbol parameters".into())?;
    let grid = default_lambda_grid();
    let lower = 1.0 / (1.0 - 0.25);
    let ys = [1.0, 10.0, 100.0];
    let sups = ys
        .iter()
        .map(|&y| lrg_sup(&p.triple(), C64::new(0.0, y), &grid, LrgIntegrand::LeadingEntry).map(|s| s.value))
        .collect::<blockspec_core::Result<Vec<_>>>()
        .context(|| "lrg_sup".into())?;
    let symbol_ok = sups.iter().all(|&s| s >= lower);
    let decade = (0..2).map(|k| ys[k + 1] * sups[k + 1] / (ys[k] * sups[k])).fold(f64::INFINITY, f64::min);

    let d = assemble_gl(&Grid1D::new(40.0, 800).context(|| "grid".into())?, 1.0, 0.6, &Potential::Zero).context(|| "assemble_gl".into())?;
    let scan = lrg_scan(&d.coeffs, &[5.0, 50.0]).context(|| "lrg_scan".into())?;
    let growth = scan.points[1].product / scan.points[0].product;
    Ok(Outcome {
        passed: symbol_ok && decade >= 9.0 && growth >= 5.0,
        measured: growth,
        tolerance: 5.0,
        detail: format!("symbol sups {sups:?} (bound {lower:.6}), smallest decade factor {decade:.3} (need 9); discrete growth y=5..50 {growth:.3} (need 5)"),
    })
}

fn bands_spectral_gap(opts: &VerifyOptions) -> Result<Outcome> {
    let tol = opts.band_tol.unwrap_or(GL_BAND_TOL);
    let d = assemble_gl(&Grid1D::new(40.0, 800).context(|| "grid".into())?, 1.0, 0.6, &Potential::Zero).context(|| "assemble_gl".into())?;
    let l = blockspec_core::block::assemble_jsa(&d.coeffs).context(|| "assemble_jsa".into())?;
    let eigs = general_eigenvalues(&l).context(|| "general_eigenvalues".into())?;
    let min_re = eigs.iter().map(|z| z.re.abs()).fold(f64::INFINITY, f64::min);
    let max_im = eigs.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    let gap = 0.8;
    Ok(Outcome {
        passed: min_re >= gap - tol && max_im <= 1e-8,
        measured: min_re,
        tolerance: tol,
        detail: format!("min |Re| {min_re:.6} against gap {gap} - tol; max |Im| {max_im:.2e} (tol 1e-8)"),
    })
}

fn positivity_equivalence_wells(_: &VerifyOptions) -> Result<Outcome> {
    let (m, nu) = (1.0, 0.6);
    let kinetic = 1.0 - nu * nu;
    let grid = Grid1D::new(12.0, 481).context(|| "grid".into())?;
    let wells: Vec<(f64, f64, bool)> = (0..15)
        .flat_map(|k| {
            let width = 1.0 + 2.0 * k as f64 / 14.0;
            // Straddle the H_nu threshold while staying below the H_V one.
            let depth = well_threshold(width, m, kinetic);
            let delta = 0.4 * (well_threshold(width, m, 1.0) - depth);
            [(depth - delta, width, true), (depth + delta, width, false)]
        })
        .collect();
    let outcomes = wells
        .par_iter()
        .map(|&(depth, width, below)| {
            let v = Potential::square_well(depth, width)?;
            let pe = positivity_equivalence(&grid, m, nu, &v, 1e-8)?;
            Ok((pe.equivalent, pe.hnuv_nonneg == below && pe.hv_nonneg))
        })
        .collect::<blockspec_core::Result<Vec<_>>>()
        .context(|| "positivity_equivalence".into())?;
    let disagreements = outcomes.iter().filter(|o| !o.0).count();
    let off_side = outcomes.iter().filter(|o| !o.1).count();
    Ok(Outcome {
        passed: disagreements == 0 && off_side == 0,
        measured: disagreements as f64,
        tolerance: 0.0,
        detail: format!("30 wells straddling the H_nu threshold below the H_V one; {disagreements} disagreements, {off_side} on the unexpected side"),
    })
}

fn factorization_identity(_: &VerifyOptions) -> Result<Outcome> {
    let d = assemble_gl(&Grid1D::new(20.0, 400).context(|| "grid".into())?, 1.0, 0.5, &Potential::Zero).context(|| "assemble_gl".into())?;
    let checks = [0.5, 1.0, 3.0, 10.0, 50.0]
        .par_iter()
        .map(|&y| factorization_identity_check(&d, y))
        .collect::<blockspec_core::Result<Vec<_>>>()
        .context(|| "factorization_identity_check".into())?;
    let worst = checks.iter().map(|c| c.residual).fold(0.0, f64::max);
    Ok(Outcome {
        passed: worst <= 1e-9,
        measured: worst,
        tolerance: 1e-9,
        detail: "n = 400, y in {0.5, 1, 3, 10, 50}".into(),
    })
}

fn greens_function(_: &VerifyOptions) -> Result<Outcome> {
    let g = greens_check(&Grid1D::new(30.0, 1200).context(|| "grid".into())?, 1.0).context(|| "greens_check".into())?;
    Ok(Outcome {
        passed: g.max_rel_error <= 1e-3,
        measured: g.max_rel_error,
        tolerance: 1e-3,
        detail: "m = 1, L = 30, n = 1200".into(),
    })
}

fn convergence_order(_: &VerifyOptions) -> Result<Outcome> {
    let study = refinement_study(&Grid1D::new(20.0, 201).context(|| "grid".into())?, 1.0, 0.6, 10).context(|| "refinement_study".into())?;
    let worst = study.ratios.iter().map(|r| (r / 4.0 - 1.0).abs()).fold(0.0, f64::max);
    let (lo, hi) = study.ratios.iter().fold((f64::INFINITY, 0.0f64), |(a, b), &r| (a.min(r), b.max(r)));
    Ok(Outcome {
        passed: study.ratios.len() == 10 && worst <= 0.15,
        measured: worst,
        tolerance: 0.15,
        detail: format!("ratios in [{lo:.3}, {hi:.3}] for n = 201, 401, 801"),
    })
}
