//! Finite-dimensional block operators `𝒜 = [[A, C*], [C, B]]` and `L = J𝒜`.
//!
//! [`BlockCoefficients`] carries the three `n×n` blocks. Assembly, the Schur
//! complements `S(z)` and `T(z)`, spectra of `L` and resolvent growth
//! diagnostics all take a validated instance.

mod lrg;
mod random;
mod schur;
mod spectrum;

pub use lrg::{lrg_necessary_t, lrg_scan, lrg_scan_matrix, LrgPoint, LrgScan, LrgVerdict, TNormRow, TNormTable, DEFAULT_K_REPORT, GROWTH_FACTOR};
pub use random::{InstanceSampler, RandomInstance, SignPattern};
pub use schur::{frobenius_schur_check, kappa_decomposition, schur_s, schur_t, schur_t_derivative, KappaDecomposition, SchurEval};
pub use spectrum::{
    hausdorff_distance, nonreal_count_bound, spectral_symmetry_check, spectrum_l_direct, spectrum_l_via_t,
    t_kernel_residuals, DirectSpectrum, NonrealBound, Region, RootSearch, SymmetryCheck, ViaTRoots, PAIR_TOL, ROOT_MATCH_TOL,
};

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{inertia, CMatrix, Inertia, Lu, C64, HERMITIAN_TOL, I, RCOND_FLOOR};

/// Tolerance used when counting eigenvalue signs of the blocks.
pub const DEFAULT_INERTIA_TOL: f64 = 1e-10;

#[derive(Clone, Debug)]
pub struct BlockCoefficients {
    pub a: CMatrix,
    pub b: CMatrix,
    pub c: CMatrix,
    pub labels: Vec<String>,
    /// Set when the blocks are a finite section of an unbounded operator;
    /// every report derived from them carries a truncation caveat.
    pub truncated: bool,
}

impl BlockCoefficients {
    pub fn new(a: CMatrix, b: CMatrix, c: CMatrix) -> Result<Self> {
        let n = a.rows();
        for (name, m) in [("A", &a), ("B", &b), ("C", &c)] {
            if m.rows() != n || m.cols() != n {
                return Err(Error::DimensionMismatch(format!(
                    "block {name} is {}x{}, expected {n}x{n}",
                    m.rows(),
                    m.cols()
                )));
            }
        }
        Ok(Self {
            a,
            b,
            c,
            labels: Vec::new(),
            truncated: false,
        })
    }

    pub fn with_label(mut self, label: impl Into<String>) -> Self {
        self.labels.push(label.into());
        self
    }

    pub fn truncated(mut self) -> Self {
        self.truncated = true;
        self
    }

    pub fn dim(&self) -> usize {
        self.a.rows()
    }

    pub fn validate(&self) -> Result<Validity> {
        validate(self)
    }
}

/// `J = [[0, iI], [−iI, 0]]` on `Cⁿ × Cⁿ`.
#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct FundamentalSymmetry {
    pub n: usize,
}

impl FundamentalSymmetry {
    pub fn new(n: usize) -> Self {
        Self { n }
    }

    pub fn matrix(&self) -> CMatrix {
        let id = CMatrix::identity(self.n);
        let z = CMatrix::zeros(self.n, self.n);
        CMatrix::block2x2(&z, &id.scale(I), &id.scale(-I), &z)
    }

    /// Largest of `‖J − J*‖`, `‖J² − I‖` (entrywise max).
    pub fn involution_defect(&self) -> f64 {
        let j = self.matrix();
        let herm = (&j - &j.adjoint()).max_abs();
        let inv = (&j.matmul(&j) - &CMatrix::identity(2 * self.n)).max_abs();
        herm.max(inv)
    }
}

/// Outcome of checking the standing assumptions on the blocks.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct Validity {
    pub dimension: usize,
    pub a_rcond: f64,
    pub a_hermitian_defect: f64,
    pub b_hermitian_defect: f64,
    pub kappa_a: Inertia,
    /// Conditions that hold automatically for matrices, with the reason.
    pub vacuous: Vec<String>,
}

pub fn validate(coeffs: &BlockCoefficients) -> Result<Validity> {
    let a_rcond = Lu::new(&coeffs.a).rcond();
    if !(a_rcond >= RCOND_FLOOR) {
        return Err(Error::SingularA { rcond: a_rcond });
    }
    let a_defect = coeffs.a.hermitian_defect();
    if a_defect > HERMITIAN_TOL * coeffs.a.frobenius_norm() {
        return Err(Error::NonHermitianA { defect: a_defect });
    }
    let b_defect = coeffs.b.hermitian_defect();
    if b_defect > HERMITIAN_TOL * coeffs.b.frobenius_norm() {
        return Err(Error::NonHermitianB { defect: b_defect });
    }
    let kappa_a = inertia(&coeffs.a, DEFAULT_INERTIA_TOL * coeffs.a.frobenius_norm().max(1.0))?;
    Ok(Validity {
        dimension: coeffs.dim(),
        a_rcond,
        a_hermitian_defect: a_defect,
        b_hermitian_defect: b_defect,
        kappa_a,
        vacuous: vec![
            "domain inclusions dom(A) in dom(C) and dom(C*): every matrix is everywhere defined".into(),
            "essential self-adjointness of B - C A^-1 C*: a Hermitian matrix is self-adjoint".into(),
            "finiteness of kappa_-(A) and kappa_-(S(0)): finite dimension".into(),
        ],
    })
}

/// `𝒜 = [[A, C*], [C, B]]`.
pub fn assemble_selfadjoint(coeffs: &BlockCoefficients) -> Result<CMatrix> {
    validate(coeffs)?;
    Ok(selfadjoint_unchecked(coeffs))
}

pub(crate) fn selfadjoint_unchecked(coeffs: &BlockCoefficients) -> CMatrix {
    let m = CMatrix::block2x2(&coeffs.a, &coeffs.c.adjoint(), &coeffs.c, &coeffs.b);
    // Rounding in user-supplied A, B may leave O(eps) asymmetry.
    m.hermitian_part()
}

/// `L = [[iC, iB], [−iA, −iC*]]`, which equals `J𝒜`.
pub fn assemble_jsa(coeffs: &BlockCoefficients) -> Result<CMatrix> {
    validate(coeffs)?;
    Ok(jsa_unchecked(coeffs))
}

pub(crate) fn jsa_unchecked(coeffs: &BlockCoefficients) -> CMatrix {
    CMatrix::block2x2(
        &coeffs.c.scale(I),
        &coeffs.b.scale(I),
        &coeffs.a.scale(-I),
        &coeffs.c.adjoint().scale(-I),
    )
}

/// Eigenvalues of `𝒜`, `A` and `S(0)` plus the non-real spectrum of `L`,
/// collected for serialization.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectralReport {
    pub eigenvalues_l: Vec<C64>,
    pub eigenvalues_a_cal: Vec<f64>,
    pub kappa_a: Inertia,
    pub kappa_s0: Inertia,
    pub kappa_a_cal: Inertia,
    pub nonreal_pairs: Vec<(C64, C64)>,
    pub lrg_scan: LrgScan,
    pub verdicts: std::collections::BTreeMap<String, bool>,
    pub truncated: bool,
}

/// Tolerance for reading an eigenvalue of `L` as real or as half of a pair.
pub const REPORT_IMAG_TOL: f64 = 1e-8;

/// Direct spectrum, negative indices and an LRG scan of one instance.
///
/// Verdict keys: `kappa_additive`, `conjugation_symmetric`,
/// `nonreal_within_bound`, `real_spectrum` (only when `κ₋(𝒜) = 0`) and
/// `lrg_violated`.
pub fn spectral_report(coeffs: &BlockCoefficients, y_grid: &[f64], inertia_tol: f64) -> Result<SpectralReport> {
    let direct = spectrum_l_direct(coeffs)?;
    spectral_report_with(coeffs, direct.eigenvalues, y_grid, inertia_tol)
}

/// [`spectral_report`] with the eigenvalues of `L` already computed.
pub fn spectral_report_with(coeffs: &BlockCoefficients, eigenvalues_l: Vec<C64>, y_grid: &[f64], inertia_tol: f64) -> Result<SpectralReport> {
    let kappa = kappa_decomposition(coeffs, inertia_tol)?;
    let eigenvalues_a_cal = crate::numerics::hermitian_eigenvalues(&selfadjoint_unchecked(coeffs))?;
    let scan = lrg_scan(coeffs, y_grid)?;
    let symmetry = spectral_symmetry_check(&eigenvalues_l, REPORT_IMAG_TOL);
    let nonreal = eigenvalues_l.iter().filter(|z| z.im.abs() > REPORT_IMAG_TOL * z.norm().max(1.0)).count();

    let mut verdicts = std::collections::BTreeMap::new();
    verdicts.insert("kappa_additive".to_string(), kappa.consistent);
    verdicts.insert("conjugation_symmetric".to_string(), symmetry.symmetric);
    verdicts.insert("nonreal_within_bound".to_string(), nonreal <= 2 * kappa.kappa_a_cal.n_neg);
    if kappa.kappa_a_cal.n_neg == 0 {
        verdicts.insert("real_spectrum".to_string(), nonreal == 0);
    }
    verdicts.insert("lrg_violated".to_string(), scan.verdict == LrgVerdict::Violated);

    Ok(SpectralReport {
        eigenvalues_l,
        eigenvalues_a_cal,
        kappa_a: kappa.kappa_a,
        kappa_s0: kappa.kappa_s0,
        kappa_a_cal: kappa.kappa_a_cal,
        nonreal_pairs: symmetry.pairs,
        truncated: coeffs.truncated || scan.truncated,
        lrg_scan: scan,
        verdicts,
    })
}

#[cfg(test)]
pub(crate) mod testutil {
    use super::BlockCoefficients;
    use crate::numerics::{c, CMatrix};

    /// Hermitian `A`, `B` and general `C` filled cyclically from `vals`;
    /// `a_diag` is added to `A` to steer its signature and keep it invertible.
    pub(crate) fn random_coeffs(n: usize, vals: &[f64], a_diag: &[f64]) -> BlockCoefficients {
        let mut k = 0;
        let mut next = || {
            let v = vals[k % vals.len()];
            k += 1;
            v
        };
        let raw_a = CMatrix::from_fn(n, n, |_, _| c(next(), next()));
        let raw_b = CMatrix::from_fn(n, n, |_, _| c(next(), next()));
        let cm = CMatrix::from_fn(n, n, |_, _| c(next(), next()));
        let a = &raw_a.hermitian_part().scale(c(0.3, 0.0)) + &CMatrix::from_real_diag(a_diag);
        BlockCoefficients::new(a, raw_b.hermitian_part(), cm).unwrap()
    }

    /// Deterministic stream of uniforms in [−1, 1).
    pub(crate) struct Uniform(rand_chacha::ChaCha8Rng);

    impl Uniform {
        pub(crate) fn seeded(seed: u64) -> Self {
            use rand::SeedableRng;
            Self(rand_chacha::ChaCha8Rng::seed_from_u64(seed))
        }

        pub(crate) fn next(&mut self) -> f64 {
            use rand::Rng;
            self.0.random_range(-1.0..1.0)
        }

        pub(crate) fn vec(&mut self, len: usize) -> Vec<f64> {
            (0..len).map(|_| self.next()).collect()
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::numerics::{c, hermitian_eigenvalues, ONE, ZERO};

    fn scalar(x: f64) -> CMatrix {
        CMatrix::from_real_diag(&[x])
    }

    #[test]
    fn validate_examples() {
        let id = CMatrix::identity(2);
        let z = CMatrix::zeros(2, 2);
        let v = BlockCoefficients::new(id.clone(), id.clone(), z.clone()).unwrap().validate().unwrap();
        assert_eq!(v.kappa_a.n_neg, 0);

        let a = CMatrix::from_real_diag(&[1.0, -1.0]);
        let v = BlockCoefficients::new(a, id.clone(), z.clone()).unwrap().validate().unwrap();
        assert_eq!(v.kappa_a.n_neg, 1);
        assert!(!v.vacuous.is_empty());

        let a = CMatrix::from_real_diag(&[1.0, 0.0]);
        let err = BlockCoefficients::new(a, id.clone(), z.clone()).unwrap().validate();
        assert!(matches!(err, Err(Error::SingularA { .. })));

        let b = CMatrix::from_real_row_major(2, 2, &[1.0, 1.0, 0.0, 1.0]).unwrap();
        let err = BlockCoefficients::new(id.clone(), b, z).unwrap().validate();
        assert!(matches!(err, Err(Error::NonHermitianB { .. })));
    }

    #[test]
    fn fundamental_symmetry_is_involution() {
        for n in [1, 3, 7] {
            assert!(FundamentalSymmetry::new(n).involution_defect() <= 1e-14);
        }
    }

    #[test]
    fn assemble_identity_blocks() {
        let id = CMatrix::identity(2);
        let coeffs = BlockCoefficients::new(id.clone(), id, CMatrix::zeros(2, 2)).unwrap();
        let m = assemble_selfadjoint(&coeffs).unwrap();
        let ev = hermitian_eigenvalues(&m).unwrap();
        assert!(ev.iter().all(|l| (l - 1.0).abs() < 1e-14));
    }

    #[test]
    fn assemble_scalar_blocks() {
        let coeffs = BlockCoefficients::new(scalar(2.0), scalar(1.0), scalar(1.0)).unwrap();
        let m = assemble_selfadjoint(&coeffs).unwrap();
        let ev = hermitian_eigenvalues(&m).unwrap();
        let s5 = 5f64.sqrt();
        assert!((ev[0] - (3.0 - s5) / 2.0).abs() < 1e-14);
        assert!((ev[1] - (3.0 + s5) / 2.0).abs() < 1e-14);
    }

    #[test]
    fn jsa_scalar_form() {
        let a = 3.0;
        let coeffs = BlockCoefficients::new(scalar(a), scalar(1.0), scalar(0.0)).unwrap();
        let l = assemble_jsa(&coeffs).unwrap();
        let want = CMatrix::from_row_major(2, 2, vec![ZERO, I, c(0.0, -a), ZERO]).unwrap();
        assert!((&l - &want).max_abs() == 0.0);
    }

    #[test]
    fn jsa_equals_j_times_selfadjoint() {
        let a = CMatrix::from_row_major(2, 2, vec![c(2.0, 0.0), c(0.5, 0.25), c(0.5, -0.25), c(-1.0, 0.0)]).unwrap();
        let b = CMatrix::from_row_major(2, 2, vec![ONE, c(0.0, 1.0), c(0.0, -1.0), c(3.0, 0.0)]).unwrap();
        let cm = CMatrix::from_row_major(2, 2, vec![c(0.1, 0.2), c(0.3, -0.4), c(-0.5, 0.6), c(0.7, 0.0)]).unwrap();
        let coeffs = BlockCoefficients::new(a, b, cm).unwrap();
        let j = FundamentalSymmetry::new(2).matrix();
        let acal = assemble_selfadjoint(&coeffs).unwrap();
        let l = assemble_jsa(&coeffs).unwrap();
        assert!((&l - &j.matmul(&acal)).max_abs() <= 1e-14);
        assert!((&j.matmul(&j.matmul(&acal)) - &acal).max_abs() <= 1e-14);
        // ⟨JLf, f⟩ is real.
        let f = [c(1.0, 2.0), c(-0.5, 0.1), c(0.3, -0.7), c(0.0, 1.0)];
        let jlf = j.matmul(&l).apply(&f);
        let q: C64 = jlf.iter().zip(&f).map(|(x, y)| y.conj() * x).sum();
        assert!(q.im.abs() < 1e-13);
    }

    #[test]
    fn report_on_definite_and_indefinite_instances() {
        let coeffs = BlockCoefficients::new(
            CMatrix::from_real_diag(&[1.0, 2.0]),
            CMatrix::from_real_diag(&[1.0, 0.5]),
            CMatrix::from_real_row_major(2, 2, &[0.2, 0.1, 0.0, 0.3]).unwrap(),
        )
        .unwrap();
        let r = spectral_report(&coeffs, &[0.1, 1.0, 10.0], DEFAULT_INERTIA_TOL).unwrap();
        assert_eq!(r.kappa_a_cal.n_neg, 0);
        assert!(r.verdicts["real_spectrum"]);
        assert!(r.verdicts["kappa_additive"]);
        assert_eq!(r.lrg_scan.points.len(), 3);
        assert!(r.eigenvalues_l.iter().all(|z| z.im.abs() < 1e-10));

        // κ₋(𝒜) = 1 via a negative B: a non-real pair is allowed.
        let coeffs = BlockCoefficients::new(scalar(1.0), scalar(-1.0), scalar(0.0)).unwrap();
        let r = spectral_report(&coeffs, &[0.5, 2.0], DEFAULT_INERTIA_TOL).unwrap();
        assert_eq!(r.kappa_a_cal.n_neg, 1);
        assert!(!r.verdicts.contains_key("real_spectrum"));
        assert!(r.verdicts["nonreal_within_bound"]);
        assert_eq!(r.nonreal_pairs.len(), 1);
    }
}
