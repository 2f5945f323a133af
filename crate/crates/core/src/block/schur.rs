use serde::{Deserialize, Serialize};

use super::{jsa_unchecked, selfadjoint_unchecked, BlockCoefficients};
use crate::error::{Error, Result};
use crate::numerics::{hermitian_eigenvalues, CMatrix, Inertia, Lu, C64, I, RCOND_FLOOR};

/// `S(z)` and `T(z)` evaluated at one point.
#[derive(Clone, Debug)]
pub struct SchurEval {
    pub z: C64,
    pub s_of_z: CMatrix,
    pub t_of_z: CMatrix,
    pub rcond_s: f64,
    pub rcond_t: f64,
}

impl SchurEval {
    pub fn at(coeffs: &BlockCoefficients, z: C64) -> Result<Self> {
        let s_of_z = schur_s(coeffs, z)?;
        let t_of_z = schur_t(coeffs, z)?;
        Ok(Self {
            z,
            rcond_s: Lu::new(&s_of_z).rcond(),
            rcond_t: Lu::new(&t_of_z).rcond(),
            s_of_z,
            t_of_z,
        })
    }
}

fn factor_shifted_a(coeffs: &BlockCoefficients, z: C64) -> Result<Lu> {
    let lu = Lu::new(&coeffs.a.shift(z));
    let rcond = lu.rcond();
    if !(rcond >= RCOND_FLOOR) {
        return Err(Error::ZInSpectrumA { z, rcond });
    }
    Ok(lu)
}

pub(crate) fn factor_a(coeffs: &BlockCoefficients) -> Result<Lu> {
    let lu = Lu::new(&coeffs.a);
    let rcond = lu.rcond();
    if !(rcond >= RCOND_FLOOR) {
        return Err(Error::SingularA { rcond });
    }
    Ok(lu)
}

/// `S(z) = B − C (A − z)⁻¹ C*`.
pub fn schur_s(coeffs: &BlockCoefficients, z: C64) -> Result<CMatrix> {
    let lu = factor_shifted_a(coeffs, z)?;
    let s = &coeffs.b - &coeffs.c.matmul(&lu.solve(&coeffs.c.adjoint()));
    // Exactly Hermitian for real z; remove rounding asymmetry there.
    Ok(if z.im == 0.0 { s.hermitian_part() } else { s })
}

/// `T(z) = B − (C + iz) A⁻¹ (C* − iz)`.
pub fn schur_t(coeffs: &BlockCoefficients, z: C64) -> Result<CMatrix> {
    let lu = factor_a(coeffs)?;
    Ok(schur_t_with(coeffs, &lu, z))
}

pub(crate) fn schur_t_with(coeffs: &BlockCoefficients, a_lu: &Lu, z: C64) -> CMatrix {
    let left = coeffs.c.shift(-I * z);
    let right = coeffs.c.adjoint().shift(I * z);
    &coeffs.b - &left.matmul(&a_lu.solve(&right))
}

/// `T'(z) = −i A⁻¹ (C* − iz) + i (C + iz) A⁻¹`.
pub fn schur_t_derivative(coeffs: &BlockCoefficients, z: C64) -> Result<CMatrix> {
    let lu = factor_a(coeffs)?;
    Ok(schur_t_derivative_with(coeffs, &lu, z))
}

pub(crate) fn schur_t_derivative_with(coeffs: &BlockCoefficients, a_lu: &Lu, z: C64) -> CMatrix {
    let a_inv = a_lu.inverse();
    let right = coeffs.c.adjoint().shift(I * z);
    let left = coeffs.c.shift(-I * z);
    &left.matmul(&a_inv).scale(I) - &a_inv.matmul(&right).scale(I)
}

fn relative(defect: &CMatrix, reference: &CMatrix) -> f64 {
    defect.frobenius_norm() / reference.frobenius_norm().max(1.0)
}

/// Relative residual of the triangular factorizations of `𝒜 − z` and `L − z`.
///
/// `𝒜 − z = F diag(A − z, S(z) − z) G` with `F = [[I, 0], [C(A−z)⁻¹, I]]` and
/// `G = [[I, (A−z)⁻¹C*], [0, I]]`; `L − z = U [[0, iT(z)], [−iA, 0]] W` with
/// `U = [[I, −(C+iz)A⁻¹], [0, I]]` and `W = [[I, A⁻¹(C*−iz)], [0, I]]`.
pub fn frobenius_schur_check(coeffs: &BlockCoefficients, z: C64) -> Result<f64> {
    let n = coeffs.dim();
    let id = CMatrix::identity(n);
    let zero = CMatrix::zeros(n, n);

    let shifted = factor_shifted_a(coeffs, z)?;
    let c_star = coeffs.c.adjoint();
    let s = &coeffs.b - &coeffs.c.matmul(&shifted.solve(&c_star));
    let f = CMatrix::block2x2(&id, &zero, &shifted.solve_right(&coeffs.c), &id);
    let mid = CMatrix::block2x2(&coeffs.a.shift(z), &zero, &zero, &s.shift(z));
    let g = CMatrix::block2x2(&id, &shifted.solve(&c_star), &zero, &id);
    let target = selfadjoint_unchecked(coeffs).shift(z);
    let r1 = relative(&(&target - &f.matmul(&mid).matmul(&g)), &target);

    let a_lu = factor_a(coeffs)?;
    let left = coeffs.c.shift(-I * z);
    let right = c_star.shift(I * z);
    let t = &coeffs.b - &left.matmul(&a_lu.solve(&right));
    let u = CMatrix::block2x2(&id, &a_lu.solve_right(&left).scale(C64::new(-1.0, 0.0)), &zero, &id);
    let mid = CMatrix::block2x2(&zero, &t.scale(I), &coeffs.a.scale(-I), &zero);
    let w = CMatrix::block2x2(&id, &a_lu.solve(&right), &zero, &id);
    let target = jsa_unchecked(coeffs).shift(z);
    let r2 = relative(&(&target - &u.matmul(&mid).matmul(&w)), &target);

    Ok(r1.max(r2))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct KappaDecomposition {
    pub kappa_a_cal: Inertia,
    pub kappa_a: Inertia,
    pub kappa_s0: Inertia,
    /// `κ₋(𝒜) = κ₋(A) + κ₋(S(0))`.
    pub consistent: bool,
}

fn strict_inertia(which: &str, m: &CMatrix, tol: f64) -> Result<Inertia> {
    let ev = hermitian_eigenvalues(&m.hermitian_part())?;
    if let Some(&value) = ev.iter().find(|l| l.abs() <= tol) {
        return Err(Error::DegenerateInertia {
            which: which.to_string(),
            value,
        });
    }
    Ok(Inertia::from_eigenvalues(&ev, tol))
}

/// Negative index bookkeeping for `𝒜`, `A` and `S(0)`.
pub fn kappa_decomposition(coeffs: &BlockCoefficients, tol: f64) -> Result<KappaDecomposition> {
    coeffs.validate()?;
    let kappa_a_cal = strict_inertia("A_cal", &selfadjoint_unchecked(coeffs), tol)?;
    let kappa_a = strict_inertia("A", &coeffs.a, tol)?;
    let kappa_s0 = strict_inertia("S(0)", &schur_s(coeffs, C64::new(0.0, 0.0))?, tol)?;
    Ok(KappaDecomposition {
        consistent: kappa_a_cal.n_neg == kappa_a.n_neg + kappa_s0.n_neg,
        kappa_a_cal,
        kappa_a,
        kappa_s0,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::block::testutil::{random_coeffs, Uniform};
    use crate::numerics::{c, ONE, ZERO};
    use proptest::prelude::*;

    fn scalar(x: f64) -> CMatrix {
        CMatrix::from_real_diag(&[x])
    }

    fn coeffs(a: CMatrix, b: CMatrix, cm: CMatrix) -> BlockCoefficients {
        BlockCoefficients::new(a, b, cm).unwrap()
    }

    #[test]
    fn s_with_zero_coupling_is_b() {
        let b = CMatrix::from_real_row_major(2, 2, &[1.0, 2.0, 2.0, -3.0]).unwrap();
        let k = coeffs(CMatrix::from_real_diag(&[1.0, 2.0]), b.clone(), CMatrix::zeros(2, 2));
        for z in [ZERO, c(0.5, 0.5), c(-3.0, 0.0)] {
            assert!((&schur_s(&k, z).unwrap() - &b).max_abs() < 1e-15);
        }
    }

    #[test]
    fn s_scalar_example() {
        let k = coeffs(scalar(2.0), scalar(1.0), scalar(1.0));
        assert!((schur_s(&k, ZERO).unwrap().get(0, 0) - c(0.5, 0.0)).norm() < 1e-15);
    }

    #[test]
    fn s_rejects_z_in_spectrum_of_a() {
        let k = coeffs(CMatrix::from_real_diag(&[1.0, 3.0]), CMatrix::identity(2), CMatrix::identity(2));
        assert!(matches!(schur_s(&k, c(3.0, 0.0)), Err(Error::ZInSpectrumA { .. })));
    }

    #[test]
    fn t_scalar_closed_form() {
        let a = 4.0;
        let k = coeffs(scalar(a), scalar(1.0), scalar(0.0));
        for z in [c(1.0, 0.0), c(0.3, -2.0), c(2.0, 0.0)] {
            let want = (c(a, 0.0) - z * z) / a;
            assert!((schur_t(&k, z).unwrap().get(0, 0) - want).norm() < 1e-14);
        }
    }

    #[test]
    fn t_identity_blocks() {
        let k = coeffs(CMatrix::identity(3), CMatrix::identity(3), CMatrix::zeros(3, 3));
        let z = c(0.7, 0.2);
        let t = schur_t(&k, z).unwrap();
        let want = CMatrix::identity(3).scale(ONE - z * z);
        assert!((&t - &want).max_abs() < 1e-14);
    }

    #[test]
    fn t_derivative_matches_difference_quotient() {
        let k = random_coeffs(3, &[0.3, -0.7, 1.1, 0.2, -0.4, 0.9, 0.5], &[2.0, -1.5, 1.0]);
        let z = c(0.4, 0.3);
        let h = 1e-6;
        let fd = (&schur_t(&k, z + h).unwrap() - &schur_t(&k, z - h).unwrap()).scale(c(0.5 / h, 0.0));
        let d = schur_t_derivative(&k, z).unwrap();
        assert!((&fd - &d).max_abs() < 1e-7 * d.max_abs().max(1.0));
    }

    #[test]
    fn s_and_t_agree_at_zero() {
        let k = random_coeffs(4, &[0.1, 0.8, -0.3, 0.6, -1.2, 0.4, 0.05, -0.9, 0.33], &[1.0, 2.0, -1.0, 3.0]);
        let e = SchurEval::at(&k, ZERO).unwrap();
        assert!((&e.s_of_z - &e.t_of_z).max_abs() <= 1e-12);
        assert!(e.rcond_s > 0.0 && e.rcond_t > 0.0);
    }

    #[test]
    fn factorization_exact_without_coupling() {
        let k = coeffs(CMatrix::from_real_diag(&[1.0, -2.0]), CMatrix::identity(2), CMatrix::zeros(2, 2));
        assert!(frobenius_schur_check(&k, ZERO).unwrap() <= 1e-15);
        assert!(frobenius_schur_check(&k, I).unwrap() <= 1e-14);
    }

    #[test]
    fn kappa_examples() {
        let k = coeffs(CMatrix::identity(2), CMatrix::identity(2), CMatrix::zeros(2, 2));
        let d = kappa_decomposition(&k, 1e-10).unwrap();
        assert_eq!((d.kappa_a_cal.n_neg, d.kappa_a.n_neg, d.kappa_s0.n_neg), (0, 0, 0));
        assert!(d.consistent);

        let k = coeffs(CMatrix::from_real_diag(&[-1.0, 1.0]), CMatrix::identity(2), CMatrix::zeros(2, 2));
        let d = kappa_decomposition(&k, 1e-10).unwrap();
        assert_eq!((d.kappa_a_cal.n_neg, d.kappa_a.n_neg, d.kappa_s0.n_neg), (1, 1, 0));
        assert!(d.consistent);
    }

    #[test]
    fn kappa_flags_near_zero_schur_complement() {
        // S(0) = 1 − 1·1/1 = 0.
        let k = coeffs(scalar(1.0), scalar(1.0), scalar(1.0));
        assert!(matches!(kappa_decomposition(&k, 1e-10), Err(Error::DegenerateInertia { .. })));
    }

    fn arb_coeffs(n: usize) -> impl Strategy<Value = BlockCoefficients> {
        (
            prop::collection::vec(-1.0f64..1.0, 6 * n * n),
            prop::collection::vec(prop_oneof![-3.0f64..-0.5, 0.5f64..3.0], n),
        )
            .prop_map(move |(vals, diag)| random_coeffs(n, &vals, &diag))
    }

    proptest! {
        #![proptest_config(ProptestConfig::with_cases(40))]

        #[test]
        fn factorization_residual_small(k in arb_coeffs(6), re in -3.0f64..3.0, im in -3.0f64..3.0) {
            let z = c(re, im);
            let ev = hermitian_eigenvalues(&k.a).unwrap();
            let a_norm = ev.iter().fold(0.0f64, |m, l| m.max(l.abs()));
            let dist = ev.iter().map(|l| (z - c(*l, 0.0)).norm()).fold(f64::INFINITY, f64::min);
            prop_assume!(dist >= 1e-3 * a_norm);
            prop_assert!(frobenius_schur_check(&k, z).unwrap() <= 1e-9);
        }

        #[test]
        fn kappa_additivity(k in arb_coeffs(5)) {
            match kappa_decomposition(&k, 1e-8) {
                Ok(d) => prop_assert!(d.consistent),
                Err(Error::DegenerateInertia { .. }) => {}
                Err(e) => prop_assert!(false, "unexpected error {e}"),
            }
        }
    }

    /// Both sides counted from eigenvalues, with `S(0)` formed from an explicit
    /// inverse rather than the library's solve path.
    #[test]
    fn kappa_additivity_fifty_instances() {
        let mut rnd = Uniform::seeded(7);
        let mut checked = 0;
        while checked < 50 {
            let vals = rnd.vec(150);
            let diag: Vec<f64> = (0..5).map(|_| if rnd.next() > 0.0 { 1.0 + rnd.next().abs() } else { -1.0 - rnd.next().abs() }).collect();
            let k = random_coeffs(5, &vals, &diag);
            let direct = |m: &CMatrix| hermitian_eigenvalues(&m.hermitian_part()).unwrap();
            let s0 = &k.b - &k.c.matmul(&Lu::new(&k.a).inverse()).matmul(&k.c.adjoint());
            let all: Vec<f64> = [direct(&selfadjoint_unchecked(&k)), direct(&k.a), direct(&s0)].concat();
            if all.iter().any(|l| l.abs() < 1e-6) {
                continue;
            }
            let neg = |v: Vec<f64>| v.iter().filter(|l| **l < 0.0).count();
            let lhs = neg(direct(&selfadjoint_unchecked(&k)));
            let rhs = neg(direct(&k.a)) + neg(direct(&s0));
            assert_eq!(lhs, rhs);
            assert!(kappa_decomposition(&k, 1e-8).unwrap().consistent);
            checked += 1;
        }
    }
}
