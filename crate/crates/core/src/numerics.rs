//! Dense complex linear-algebra kernel.
//!
//! Everything above this module talks to matrices through [`CMatrix`]; the
//! decompositions themselves are delegated to `faer`.

use std::ops::{Add, Mul, Neg, Sub};

use faer::linalg::solvers::{PartialPivLu, Solve};
use faer::{Mat, Side};
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

pub type C64 = faer::c64;

/// Relative Hermiticity tolerance; the absolute bound is this times `‖M‖_F`.
pub const HERMITIAN_TOL: f64 = 1e-10;
pub const EIG_RESIDUAL_TOL: f64 = 1e-9;
pub const SOLVE_RESIDUAL_TOL: f64 = 1e-9;
pub const RCOND_FLOOR: f64 = 1e-13;

/// Above this dimension norms are computed by Lanczos instead of a full SVD.
const DENSE_SVD_LIMIT: usize = 256;

pub const I: C64 = C64 { re: 0.0, im: 1.0 };
pub const ONE: C64 = C64 { re: 1.0, im: 0.0 };
pub const ZERO: C64 = C64 { re: 0.0, im: 0.0 };

pub fn c(re: f64, im: f64) -> C64 {
    C64 { re, im }
}

/// Dense complex matrix with finite entries.
#[derive(Clone, Debug, PartialEq)]
pub struct CMatrix {
    inner: Mat<C64>,
}

impl CMatrix {
    pub fn from_row_major(rows: usize, cols: usize, entries: Vec<C64>) -> Result<Self> {
        if rows * cols != entries.len() {
            return Err(Error::DimensionMismatch(format!(
                "{rows}x{cols} matrix needs {} entries, got {}",
                rows * cols,
                entries.len()
            )));
        }
        if entries.iter().any(|z| !z.re.is_finite() || !z.im.is_finite()) {
            return Err(Error::NonFinite);
        }
        Ok(Self::from_fn(rows, cols, |i, j| entries[i * cols + j]))
    }

    pub fn from_real_row_major(rows: usize, cols: usize, entries: &[f64]) -> Result<Self> {
        Self::from_row_major(rows, cols, entries.iter().map(|&x| c(x, 0.0)).collect())
    }

    pub fn from_fn(rows: usize, cols: usize, f: impl FnMut(usize, usize) -> C64) -> Self {
        Self {
            inner: Mat::from_fn(rows, cols, f),
        }
    }

    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self {
            inner: Mat::zeros(rows, cols),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            inner: Mat::identity(n, n),
        }
    }

    pub fn from_diag(diag: &[C64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| if i == j { diag[i] } else { ZERO })
    }

    pub fn from_real_diag(diag: &[f64]) -> Self {
        let n = diag.len();
        Self::from_fn(n, n, |i, j| if i == j { c(diag[i], 0.0) } else { ZERO })
    }

    pub fn from_faer(inner: Mat<C64>) -> Self {
        Self { inner }
    }

    pub fn as_faer(&self) -> faer::MatRef<'_, C64> {
        self.inner.as_ref()
    }

    pub fn rows(&self) -> usize {
        self.inner.nrows()
    }

    pub fn cols(&self) -> usize {
        self.inner.ncols()
    }

    pub fn is_square(&self) -> bool {
        self.rows() == self.cols()
    }

    pub fn get(&self, i: usize, j: usize) -> C64 {
        self.inner[(i, j)]
    }

    pub fn set(&mut self, i: usize, j: usize, value: C64) {
        self.inner[(i, j)] = value;
    }

    pub fn to_row_major(&self) -> Vec<C64> {
        let mut out = Vec::with_capacity(self.rows() * self.cols());
        for i in 0..self.rows() {
            for j in 0..self.cols() {
                out.push(self.get(i, j));
            }
        }
        out
    }

    pub fn column(&self, j: usize) -> Vec<C64> {
        (0..self.rows()).map(|i| self.get(i, j)).collect()
    }

    pub fn diagonal(&self) -> Vec<C64> {
        (0..self.rows().min(self.cols())).map(|i| self.get(i, i)).collect()
    }

    pub fn adjoint(&self) -> Self {
        Self {
            inner: self.inner.adjoint().to_owned(),
        }
    }

    pub fn transpose(&self) -> Self {
        Self {
            inner: self.inner.transpose().to_owned(),
        }
    }

    pub fn scale(&self, s: C64) -> Self {
        Self::from_fn(self.rows(), self.cols(), |i, j| s * self.get(i, j))
    }

    /// `self - z·I`.
    pub fn shift(&self, z: C64) -> Self {
        let mut out = self.clone();
        for i in 0..self.rows().min(self.cols()) {
            out.inner[(i, i)] -= z;
        }
        out
    }

    pub fn matmul(&self, other: &Self) -> Self {
        Self {
            inner: &self.inner * &other.inner,
        }
    }

    pub fn apply(&self, x: &[C64]) -> Vec<C64> {
        (0..self.rows())
            .map(|i| (0..self.cols()).map(|j| self.get(i, j) * x[j]).sum())
            .collect()
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.inner.norm_l2()
    }

    pub fn max_abs(&self) -> f64 {
        self.inner.norm_max()
    }

    pub fn trace(&self) -> C64 {
        self.diagonal().into_iter().sum()
    }

    /// Largest entrywise modulus of `M - M*`.
    pub fn hermitian_defect(&self) -> f64 {
        if !self.is_square() {
            return f64::INFINITY;
        }
        let n = self.rows();
        let mut worst = 0.0f64;
        for i in 0..n {
            for j in i..n {
                worst = worst.max((self.get(i, j) - self.get(j, i).conj()).norm());
            }
        }
        worst
    }

    pub fn is_hermitian(&self) -> bool {
        self.hermitian_defect() <= HERMITIAN_TOL * self.frobenius_norm()
    }

    /// `(M + M*)/2`.
    pub fn hermitian_part(&self) -> Self {
        Self::from_fn(self.rows(), self.cols(), |i, j| {
            (self.get(i, j) + self.get(j, i).conj()) * 0.5
        })
    }

    /// Assembles `[[a, b], [c, d]]` from equally sized square blocks.
    pub fn block2x2(a: &Self, b: &Self, c: &Self, d: &Self) -> Self {
        let n = a.rows();
        assert!(
            [a.cols(), b.rows(), b.cols(), c.rows(), c.cols(), d.rows(), d.cols()]
                .iter()
                .all(|&k| k == n),
            "block2x2 requires equal square blocks"
        );
        Self::from_fn(2 * n, 2 * n, |i, j| match (i < n, j < n) {
            (true, true) => a.get(i, j),
            (true, false) => b.get(i, j - n),
            (false, true) => c.get(i - n, j),
            (false, false) => d.get(i - n, j - n),
        })
    }

    pub fn sub_block(&self, r0: usize, c0: usize, rows: usize, cols: usize) -> Self {
        Self::from_fn(rows, cols, |i, j| self.get(r0 + i, c0 + j))
    }

    pub fn one_norm(&self) -> f64 {
        (0..self.cols())
            .map(|j| (0..self.rows()).map(|i| self.get(i, j).norm()).sum::<f64>())
            .fold(0.0, f64::max)
    }

    pub fn determinant(&self) -> C64 {
        self.inner.determinant()
    }
}

impl Add for &CMatrix {
    type Output = CMatrix;
    fn add(self, rhs: &CMatrix) -> CMatrix {
        CMatrix {
            inner: &self.inner + &rhs.inner,
        }
    }
}

impl Sub for &CMatrix {
    type Output = CMatrix;
    fn sub(self, rhs: &CMatrix) -> CMatrix {
        CMatrix {
            inner: &self.inner - &rhs.inner,
        }
    }
}

impl Mul for &CMatrix {
    type Output = CMatrix;
    fn mul(self, rhs: &CMatrix) -> CMatrix {
        self.matmul(rhs)
    }
}

impl Neg for &CMatrix {
    type Output = CMatrix;
    fn neg(self) -> CMatrix {
        self.scale(c(-1.0, 0.0))
    }
}

/// Eigenvalue sign counts of a Hermitian matrix.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
pub struct Inertia {
    pub n_neg: usize,
    pub n_zero: usize,
    pub n_pos: usize,
    #[serde(with = "ordered_tol")]
    pub tol: OrderedTol,
}

/// Tolerance wrapper so that `Inertia` can derive `Eq`.
#[derive(Clone, Copy, Debug, PartialEq)]
pub struct OrderedTol(pub f64);

impl Eq for OrderedTol {}

mod ordered_tol {
    use super::OrderedTol;
    use serde::{Deserialize, Deserializer, Serializer};

    pub fn serialize<S: Serializer>(t: &OrderedTol, s: S) -> Result<S::Ok, S::Error> {
        s.serialize_f64(t.0)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<OrderedTol, D::Error> {
        f64::deserialize(d).map(OrderedTol)
    }
}

impl Inertia {
    pub fn from_eigenvalues(eigenvalues: &[f64], tol: f64) -> Self {
        let mut out = Inertia {
            n_neg: 0,
            n_zero: 0,
            n_pos: 0,
            tol: OrderedTol(tol),
        };
        for &l in eigenvalues {
            if l < -tol {
                out.n_neg += 1;
            } else if l > tol {
                out.n_pos += 1;
            } else {
                out.n_zero += 1;
            }
        }
        out
    }

    pub fn dimension(&self) -> usize {
        self.n_neg + self.n_zero + self.n_pos
    }
}

#[derive(Clone, Debug)]
pub struct HermitianEig {
    /// Ascending.
    pub eigenvalues: Vec<f64>,
    pub eigenvectors: CMatrix,
}

fn check_hermitian(m: &CMatrix) -> Result<()> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch(format!(
            "expected square matrix, got {}x{}",
            m.rows(),
            m.cols()
        )));
    }
    let defect = m.hermitian_defect();
    let tol = HERMITIAN_TOL * m.frobenius_norm();
    if defect > tol {
        return Err(Error::NotHermitian { defect, tol });
    }
    Ok(())
}

pub fn hermitian_eig(m: &CMatrix) -> Result<HermitianEig> {
    check_hermitian(m)?;
    let sym = m.hermitian_part();
    let evd = sym
        .inner
        .self_adjoint_eigen(Side::Lower)
        .map_err(|e| Error::ConvergenceFailure(format!("{e:?}")))?;
    let eigenvalues = evd.S().column_vector().iter().map(|z| z.re).collect();
    Ok(HermitianEig {
        eigenvalues,
        eigenvectors: CMatrix::from_faer(evd.U().to_owned()),
    })
}

/// Eigenvalues only, ascending.
pub fn hermitian_eigenvalues(m: &CMatrix) -> Result<Vec<f64>> {
    check_hermitian(m)?;
    m.hermitian_part()
        .inner
        .self_adjoint_eigenvalues(Side::Lower)
        .map_err(|e| Error::ConvergenceFailure(format!("{e:?}")))
}

#[derive(Clone, Debug)]
pub struct GeneralEig {
    pub eigenvalues: Vec<C64>,
    /// Columns are unit-norm right eigenvectors.
    pub eigenvectors: CMatrix,
    /// `‖Mv − λv‖ / (‖M‖_F ‖v‖)` per pair.
    pub residuals: Vec<f64>,
    /// 1-norm condition estimate of the eigenvector matrix.
    pub vector_condition: f64,
    pub defective: bool,
}

/// Eigenvector matrices with condition above this are reported as defective.
pub const DEFECTIVE_CONDITION: f64 = 1e10;

pub fn general_eig(m: &CMatrix) -> Result<GeneralEig> {
    if !m.is_square() {
        return Err(Error::DimensionMismatch("general_eig needs a square matrix".into()));
    }
    let n = m.rows();
    if n == 0 {
        return Ok(GeneralEig {
            eigenvalues: vec![],
            eigenvectors: CMatrix::zeros(0, 0),
            residuals: vec![],
            vector_condition: 1.0,
            defective: false,
        });
    }
    let evd = m
        .inner
        .eigen()
        .map_err(|e| Error::ConvergenceFailure(format!("{e:?}")))?;
    let eigenvalues: Vec<C64> = evd.S().column_vector().iter().copied().collect();
    let raw = evd.U();
    let mut vectors = CMatrix::zeros(n, n);
    for j in 0..n {
        let norm = (0..n).map(|i| raw[(i, j)].norm_sqr()).sum::<f64>().sqrt();
        let scale = if norm > 0.0 { 1.0 / norm } else { 1.0 };
        for i in 0..n {
            vectors.set(i, j, raw[(i, j)] * scale);
        }
    }
    let mv = m.matmul(&vectors);
    let mnorm = m.frobenius_norm().max(f64::MIN_POSITIVE);
    let residuals: Vec<f64> = (0..n)
        .map(|j| {
            let r = (0..n)
                .map(|i| (mv.get(i, j) - eigenvalues[j] * vectors.get(i, j)).norm_sqr())
                .sum::<f64>()
                .sqrt();
            r / mnorm
        })
        .collect();
    if let Some(worst) = residuals.iter().copied().find(|r| !(*r <= EIG_RESIDUAL_TOL)) {
        return Err(Error::ConvergenceFailure(format!(
            "eigenpair residual {worst:.3e} exceeds {EIG_RESIDUAL_TOL:.0e}"
        )));
    }
    let vector_condition = {
        let lu = Lu::new(&vectors);
        let rc = lu.rcond();
        if rc > 0.0 { 1.0 / rc } else { f64::INFINITY }
    };
    Ok(GeneralEig {
        eigenvalues,
        eigenvectors: vectors,
        residuals,
        vector_condition,
        defective: !(vector_condition < DEFECTIVE_CONDITION),
    })
}

pub fn general_eigenvalues(m: &CMatrix) -> Result<Vec<C64>> {
    if m.rows() == 0 {
        return Ok(vec![]);
    }
    m.inner
        .eigenvalues()
        .map_err(|e| Error::ConvergenceFailure(format!("{e:?}")))
}

/// Singular values, non-increasing.
pub fn singular_values(m: &CMatrix) -> Result<Vec<f64>> {
    if m.rows() == 0 || m.cols() == 0 {
        return Ok(vec![]);
    }
    m.inner
        .singular_values()
        .map_err(|e| Error::ConvergenceFailure(format!("{e:?}")))
}

/// Largest singular value.
pub fn spectral_norm(m: &CMatrix) -> f64 {
    if m.rows() == 0 || m.cols() == 0 {
        return 0.0;
    }
    if m.rows().max(m.cols()) <= DENSE_SVD_LIMIT {
        if let Ok(s) = singular_values(m) {
            return s[0];
        }
    }
    let n = m.cols();
    let mh = m.adjoint();
    lanczos_largest(n, |x| mh.apply(&m.apply(x))).sqrt()
}

/// Smallest singular value.
pub fn smallest_singular_value(m: &CMatrix) -> Result<f64> {
    let s = singular_values(m)?;
    Ok(s.last().copied().unwrap_or(0.0))
}

/// `‖(M − z)⁻¹‖₂`.
pub fn resolvent_norm(m: &CMatrix, z: C64) -> Result<f64> {
    let shifted = m.shift(z);
    if shifted.rows() <= DENSE_SVD_LIMIT {
        let smin = smallest_singular_value(&shifted)?;
        let scale = shifted.frobenius_norm().max(f64::MIN_POSITIVE);
        if smin <= RCOND_FLOOR * scale {
            return Err(Error::SingularMatrix { rcond: smin / scale });
        }
        return Ok(1.0 / smin);
    }
    let lu = Lu::new(&shifted);
    let rcond = lu.rcond();
    if rcond < RCOND_FLOOR {
        return Err(Error::SingularMatrix { rcond });
    }
    Ok(lu.inverse_norm())
}

/// Largest eigenvalue of the Hermitian positive semidefinite operator `apply`
/// by Lanczos with full reorthogonalization and thick-free restarts.
pub(crate) fn lanczos_largest(n: usize, apply: impl Fn(&[C64]) -> Vec<C64>) -> f64 {
    const MAX_KRYLOV: usize = 80;
    const MAX_RESTARTS: usize = 30;
    const TOL: f64 = 1e-13;
    let dot = |a: &[C64], b: &[C64]| -> C64 { a.iter().zip(b).map(|(x, y)| x.conj() * y).sum() };
    let norm = |a: &[C64]| a.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();

    // Deterministic, non-degenerate start vector.
    let mut start: Vec<C64> = (0..n)
        .map(|i| {
            let t = (i as f64 + 1.0) * 0.618_033_988_749_895;
            c(1.0 + (t - t.floor()), 0.3 * (2.0 * t).sin())
        })
        .collect();
    let mut best = 0.0f64;
    for _ in 0..MAX_RESTARTS {
        let s = norm(&start);
        start.iter_mut().for_each(|x| *x /= s);
        let mut basis: Vec<Vec<C64>> = vec![start.clone()];
        let mut alphas = Vec::new();
        let mut betas: Vec<f64> = Vec::new();
        let kmax = MAX_KRYLOV.min(n);
        let mut converged = false;
        let mut ritz_coeffs = vec![1.0];
        for k in 0..kmax {
            let mut w = apply(&basis[k]);
            let alpha = dot(&basis[k], &w).re;
            alphas.push(alpha);
            for _ in 0..2 {
                for q in &basis {
                    let h = dot(q, &w);
                    w.iter_mut().zip(q).for_each(|(wi, qi)| *wi -= h * qi);
                }
            }
            let beta = norm(&w);
            let (theta, y) = tridiagonal_top(&alphas, &betas);
            best = best.max(theta);
            let scale = theta.max(f64::MIN_POSITIVE);
            converged = beta * y[k].abs() <= TOL * scale || beta <= TOL * scale || k + 1 == n;
            ritz_coeffs = y;
            if converged || k + 1 == kmax {
                break;
            }
            betas.push(beta);
            basis.push(w.iter().map(|x| *x / beta).collect());
        }
        if converged {
            return best;
        }
        start = (0..n)
            .map(|i| basis.iter().zip(&ritz_coeffs).map(|(q, yj)| q[i] * *yj).sum())
            .collect();
    }
    best
}

/// Largest eigenvalue of a real symmetric tridiagonal matrix and its eigenvector.
fn tridiagonal_top(alphas: &[f64], betas: &[f64]) -> (f64, Vec<f64>) {
    let k = alphas.len();
    let t = Mat::<f64>::from_fn(k, k, |i, j| {
        if i == j {
            alphas[i]
        } else if i + 1 == j {
            betas[i]
        } else if j + 1 == i {
            betas[j]
        } else {
            0.0
        }
    });
    let evd = t
        .self_adjoint_eigen(Side::Lower)
        .expect("tridiagonal eigensolve");
    let theta = evd.S().column_vector()[k - 1];
    let y = (0..k).map(|i| evd.U()[(i, k - 1)]).collect();
    (theta, y)
}

/// Partial-pivoting LU with a 1-norm reciprocal condition estimate.
pub struct Lu {
    lu: PartialPivLu<C64>,
    n: usize,
    one_norm: f64,
}

impl Lu {
    pub fn new(m: &CMatrix) -> Self {
        assert!(m.is_square(), "LU needs a square matrix");
        Self {
            lu: m.inner.partial_piv_lu(),
            n: m.rows(),
            one_norm: m.one_norm(),
        }
    }

    pub fn dim(&self) -> usize {
        self.n
    }

    pub fn solve(&self, rhs: &CMatrix) -> CMatrix {
        CMatrix::from_faer(self.lu.solve(&rhs.inner))
    }

    pub fn solve_vec(&self, rhs: &[C64]) -> Vec<C64> {
        let mut b = Mat::from_fn(self.n, 1, |i, _| rhs[i]);
        self.lu.solve_in_place(&mut b);
        (0..self.n).map(|i| b[(i, 0)]).collect()
    }

    pub fn solve_adjoint_vec(&self, rhs: &[C64]) -> Vec<C64> {
        let mut b = Mat::from_fn(self.n, 1, |i, _| rhs[i]);
        self.lu.solve_adjoint_in_place(&mut b);
        (0..self.n).map(|i| b[(i, 0)]).collect()
    }

    /// `X M⁻¹`, computed as `(M⁻ᴴ Xᴴ)ᴴ`.
    pub fn solve_right(&self, lhs: &CMatrix) -> CMatrix {
        let mut b = lhs.inner.adjoint().to_owned();
        self.lu.solve_adjoint_in_place(&mut b);
        CMatrix::from_faer(b.adjoint().to_owned())
    }

    pub fn inverse(&self) -> CMatrix {
        self.solve(&CMatrix::identity(self.n))
    }

    /// Hager–Higham estimate of `1 / (‖M‖₁ ‖M⁻¹‖₁)`.
    pub fn rcond(&self) -> f64 {
        if self.n == 0 {
            return 1.0;
        }
        if self.one_norm == 0.0 {
            return 0.0;
        }
        let inv_norm = self.inverse_one_norm_estimate();
        if !inv_norm.is_finite() || inv_norm == 0.0 {
            return 0.0;
        }
        1.0 / (self.one_norm * inv_norm)
    }

    fn inverse_one_norm_estimate(&self) -> f64 {
        let n = self.n;
        let mut x = vec![c(1.0 / n as f64, 0.0); n];
        let mut estimate = 0.0;
        let mut last_j = usize::MAX;
        for _ in 0..5 {
            let y = self.solve_vec(&x);
            if y.iter().any(|v| !v.re.is_finite() || !v.im.is_finite()) {
                return f64::INFINITY;
            }
            estimate = y.iter().map(|v| v.norm()).sum::<f64>();
            let xi: Vec<C64> = y
                .iter()
                .map(|v| if v.norm() > 0.0 { *v / v.norm() } else { ONE })
                .collect();
            let z = self.solve_adjoint_vec(&xi);
            let (j, zmax) = z
                .iter()
                .enumerate()
                .map(|(i, v)| (i, v.norm()))
                .fold((0, -1.0), |acc, p| if p.1 > acc.1 { p } else { acc });
            let ztx: f64 = z.iter().zip(&x).map(|(a, b)| (a.conj() * b).re).sum();
            if zmax <= ztx || j == last_j {
                break;
            }
            last_j = j;
            x = vec![ZERO; n];
            x[j] = ONE;
        }
        // Higham's alternating-sign safeguard against underestimates.
        let alt: Vec<C64> = (0..n)
            .map(|i| {
                let s = if i % 2 == 0 { 1.0 } else { -1.0 };
                c(s * (1.0 + i as f64 / (n.max(2) - 1) as f64), 0.0)
            })
            .collect();
        let y = self.solve_vec(&alt);
        let alt_est = 2.0 * y.iter().map(|v| v.norm()).sum::<f64>() / (3.0 * n as f64);
        estimate.max(alt_est)
    }

    /// `‖M⁻¹‖₂`, exact for small systems and Lanczos-based otherwise.
    pub fn inverse_norm(&self) -> f64 {
        if self.n <= DENSE_SVD_LIMIT {
            return spectral_norm(&self.inverse());
        }
        lanczos_largest(self.n, |x| self.solve_adjoint_vec(&self.solve_vec(x))).sqrt()
    }
}

#[derive(Clone, Debug)]
pub struct Solution {
    pub x: CMatrix,
    pub rcond: f64,
}

pub fn solve(m: &CMatrix, rhs: &CMatrix) -> Result<Solution> {
    if !m.is_square() || m.rows() != rhs.rows() {
        return Err(Error::DimensionMismatch(format!(
            "cannot solve {}x{} system with {}-row rhs",
            m.rows(),
            m.cols(),
            rhs.rows()
        )));
    }
    let lu = Lu::new(m);
    let rcond = lu.rcond();
    if !(rcond >= RCOND_FLOOR) {
        return Err(Error::SingularMatrix { rcond });
    }
    Ok(Solution {
        x: lu.solve(rhs),
        rcond,
    })
}

pub fn inertia(m: &CMatrix, tol: f64) -> Result<Inertia> {
    let eigenvalues = hermitian_eigenvalues(m)?;
    Ok(Inertia::from_eigenvalues(&eigenvalues, tol))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn pauli_y() -> CMatrix {
        CMatrix::from_row_major(2, 2, vec![ZERO, I, -I, ZERO]).unwrap()
    }

    #[test]
    fn hermitian_eig_diagonal_sorted() {
        let m = CMatrix::from_real_diag(&[2.0, -1.0, 0.0]);
        let e = hermitian_eig(&m).unwrap();
        assert_eq!(e.eigenvalues.len(), 3);
        for (got, want) in e.eigenvalues.iter().zip([-1.0, 0.0, 2.0]) {
            assert!((got - want).abs() < 1e-14);
        }
    }

    #[test]
    fn hermitian_eig_pauli() {
        let e = hermitian_eig(&pauli_y()).unwrap();
        assert!((e.eigenvalues[0] + 1.0).abs() < 1e-14);
        assert!((e.eigenvalues[1] - 1.0).abs() < 1e-14);
        let v = &e.eigenvectors;
        let r = &pauli_y().matmul(v) - &v.matmul(&CMatrix::from_real_diag(&e.eigenvalues));
        assert!(r.frobenius_norm() < 1e-13);
        let u = &v.adjoint().matmul(v) - &CMatrix::identity(2);
        assert!(u.frobenius_norm() < 1e-13);
    }

    #[test]
    fn hermitian_eig_rejects_non_hermitian() {
        let m = CMatrix::from_real_row_major(2, 2, &[1.0, 2.0, 0.0, 1.0]).unwrap();
        assert!(matches!(hermitian_eig(&m), Err(Error::NotHermitian { .. })));
    }

    #[test]
    fn general_eig_squares_to_four() {
        let m = CMatrix::from_row_major(2, 2, vec![ZERO, I, c(0.0, -4.0), ZERO]).unwrap();
        let mut ev: Vec<f64> = general_eig(&m).unwrap().eigenvalues.iter().map(|z| {
            assert!(z.im.abs() < 1e-12);
            z.re
        }).collect();
        ev.sort_by(f64::total_cmp);
        assert!((ev[0] + 2.0).abs() < 1e-12 && (ev[1] - 2.0).abs() < 1e-12);
    }

    #[test]
    fn general_eig_identity_and_jordan() {
        let e = general_eig(&CMatrix::identity(3)).unwrap();
        assert!(e.eigenvalues.iter().all(|z| (z - ONE).norm() < 1e-14));
        assert!(!e.defective);

        let j = CMatrix::from_real_row_major(2, 2, &[1.0, 1.0, 0.0, 1.0]).unwrap();
        let e = general_eig(&j).unwrap();
        assert!(e.eigenvalues.iter().all(|z| (z - ONE).norm() < 1e-7));
        assert!(e.defective, "Jordan block must be flagged, cond = {}", e.vector_condition);
    }

    #[test]
    fn spectral_norm_examples() {
        assert!((spectral_norm(&CMatrix::from_real_diag(&[3.0, -5.0])) - 5.0).abs() < 1e-13);
        let m = CMatrix::from_row_major(2, 2, vec![ZERO, I, c(0.0, -4.0), ZERO]).unwrap();
        assert!((spectral_norm(&m) - 4.0).abs() < 1e-13);
        let s = std::f64::consts::FRAC_1_SQRT_2;
        let q = CMatrix::from_row_major(2, 2, vec![c(s, 0.0), c(0.0, s), c(0.0, s), c(s, 0.0)]).unwrap();
        assert!((spectral_norm(&q) - 1.0).abs() < 1e-10);
    }

    #[test]
    fn lanczos_matches_svd_on_large_diagonal() {
        let n = 400;
        let d: Vec<f64> = (0..n).map(|k| 1.0 + k as f64 * 0.01).collect();
        let m = CMatrix::from_real_diag(&d);
        let got = spectral_norm(&m);
        assert!((got - d[n - 1]).abs() < 1e-10 * d[n - 1], "got {got}");
    }

    #[test]
    fn solve_examples() {
        let two = CMatrix::identity(2).scale(c(2.0, 0.0));
        let x = solve(&two, &CMatrix::identity(2)).unwrap().x;
        assert!((&x - &CMatrix::identity(2).scale(c(0.5, 0.0))).max_abs() < 1e-15);

        let m = CMatrix::from_real_row_major(2, 2, &[1.0, 1.0, 0.0, 1.0]).unwrap();
        let rhs = CMatrix::from_real_row_major(2, 1, &[1.0, 1.0]).unwrap();
        let x = solve(&m, &rhs).unwrap().x;
        assert!((x.get(0, 0)).norm() < 1e-15 && (x.get(1, 0) - ONE).norm() < 1e-15);

        let singular = CMatrix::from_real_row_major(2, 2, &[1.0, 2.0, 2.0, 4.0]).unwrap();
        assert!(matches!(solve(&singular, &rhs), Err(Error::SingularMatrix { .. })));
    }

    #[test]
    fn inertia_examples() {
        let i = inertia(&CMatrix::from_real_diag(&[-2.0, 0.0, 3.0]), 1e-12).unwrap();
        assert_eq!((i.n_neg, i.n_zero, i.n_pos), (1, 1, 1));
        let i = inertia(&CMatrix::from_real_diag(&[1e-15, 1.0]), 1e-12).unwrap();
        assert_eq!((i.n_neg, i.n_zero, i.n_pos), (0, 1, 1));
    }

    #[test]
    fn rejects_non_finite_and_bad_shapes() {
        assert!(matches!(
            CMatrix::from_row_major(1, 1, vec![c(f64::NAN, 0.0)]),
            Err(Error::NonFinite)
        ));
        assert!(matches!(
            CMatrix::from_row_major(2, 2, vec![ONE]),
            Err(Error::DimensionMismatch(_))
        ));
    }

    #[test]
    fn rcond_tracks_conditioning() {
        let good = Lu::new(&CMatrix::identity(5)).rcond();
        assert!((good - 1.0).abs() < 1e-12);
        let bad = Lu::new(&CMatrix::from_real_diag(&[1.0, 1e-8])).rcond();
        assert!((bad - 1e-8).abs() < 1e-12);
    }

    fn random_hermitian(n: usize, seed: u64) -> CMatrix {
        let mut u = crate::block::testutil::Uniform::seeded(seed);
        CMatrix::from_fn(n, n, |_, _| c(u.next(), u.next())).hermitian_part()
    }

    /// Characteristic polynomial coefficients by Faddeev–LeVerrier,
    /// `p(x) = xⁿ + c₁xⁿ⁻¹ + … + cₙ`, returned leading-first.
    fn char_poly(m: &CMatrix) -> Vec<C64> {
        let n = m.rows();
        let mut coeffs = vec![ONE];
        let mut mk = CMatrix::zeros(n, n);
        let id = CMatrix::identity(n);
        for k in 1..=n {
            let prev = *coeffs.last().unwrap();
            mk = m.matmul(&(&mk + &id.scale(prev)));
            coeffs.push(-mk.trace() / k as f64);
        }
        coeffs
    }

    fn horner(p: &[C64], x: C64) -> (C64, C64) {
        let (mut v, mut d) = (ZERO, ZERO);
        for &a in p {
            d = d * x + v;
            v = v * x + a;
        }
        (v, d)
    }

    /// Durand–Kerner iteration followed by a few Newton polishing steps.
    fn poly_roots(p: &[C64]) -> Vec<C64> {
        let n = p.len() - 1;
        let seed = c(0.4, 0.9);
        let mut z: Vec<C64> = (0..n).map(|k| seed.powi(k as i32) * 3.0).collect();
        for _ in 0..2000 {
            let prev = z.clone();
            for i in 0..n {
                let mut den = ONE;
                for j in 0..n {
                    if i != j {
                        den *= z[i] - z[j];
                    }
                }
                let step = horner(p, z[i]).0 / den;
                z[i] -= step;
            }
            if z.iter().zip(&prev).all(|(a, b)| (a - b).norm() < 1e-15) {
                break;
            }
        }
        for r in z.iter_mut() {
            for _ in 0..3 {
                let (v, d) = horner(p, *r);
                if d.norm() > 0.0 {
                    *r -= v / d;
                }
            }
        }
        z
    }

    #[test]
    fn hermitian_eig_matches_polynomial_roots() {
        let m = random_hermitian(8, 21);
        let mut roots: Vec<f64> = poly_roots(&char_poly(&m)).iter().map(|z| z.re).collect();
        roots.sort_by(f64::total_cmp);
        let ev = hermitian_eigenvalues(&m).unwrap();
        for (a, b) in ev.iter().zip(&roots) {
            assert!((a - b).abs() <= 1e-9, "{ev:?} vs {roots:?}");
        }
    }

    #[test]
    fn inertia_of_shifted_random_matrix() {
        let g = random_hermitian(7, 5);
        let ev = hermitian_eigenvalues(&g).unwrap();
        // Shift between the third and fourth eigenvalues.
        let shift = 0.5 * (ev[2] + ev[3]);
        let m = g.shift(c(shift, 0.0));
        let inr = inertia(&m, 1e-12).unwrap();
        assert_eq!((inr.n_neg, inr.n_zero, inr.n_pos), (3, 0, 4));
        let direct = hermitian_eigenvalues(&m).unwrap().iter().filter(|l| **l < 0.0).count();
        assert_eq!(inr.n_neg, direct);
    }

    #[test]
    fn unitary_has_unit_norm() {
        let q = hermitian_eig(&random_hermitian(6, 9)).unwrap().eigenvectors;
        assert!((spectral_norm(&q) - 1.0).abs() <= 1e-10);
    }

    mod properties {
        use super::*;
        use proptest::prelude::*;

        fn arb_matrix(n: usize) -> impl Strategy<Value = CMatrix> {
            prop::collection::vec(-1.0f64..1.0, 2 * n * n).prop_map(move |v| {
                CMatrix::from_fn(n, n, |i, j| c(v[2 * (i * n + j)], v[2 * (i * n + j) + 1]))
            })
        }

        proptest! {
            #![proptest_config(ProptestConfig::with_cases(48))]

            #[test]
            fn sylvester_congruence(h in arb_matrix(5), p in arb_matrix(5)) {
                let h = h.hermitian_part();
                let p = &p + &CMatrix::identity(5).scale(c(2.0, 0.0));
                let tol = 1e-9;
                let ev = hermitian_eigenvalues(&h).unwrap();
                prop_assume!(ev.iter().all(|l| l.abs() > 1e-6));
                let before = inertia(&h, tol).unwrap();
                let after = inertia(&p.adjoint().matmul(&h).matmul(&p).hermitian_part(), tol).unwrap();
                prop_assert_eq!(before.dimension(), 5);
                prop_assert_eq!((before.n_neg, before.n_pos), (after.n_neg, after.n_pos));
            }

            #[test]
            fn norm_of_adjoint(m in arb_matrix(6)) {
                let a = spectral_norm(&m);
                prop_assert!((a - spectral_norm(&m.adjoint())).abs() <= 1e-10 * a.max(1.0));
            }

            #[test]
            fn solve_reproduces_rhs(m in arb_matrix(6), b in arb_matrix(6)) {
                let m = &m + &CMatrix::identity(6).scale(c(3.0, 0.0));
                let sol = solve(&m, &b).unwrap();
                let resid = (&m.matmul(&sol.x) - &b).frobenius_norm();
                prop_assert!(resid <= SOLVE_RESIDUAL_TOL * m.frobenius_norm() * sol.x.frobenius_norm().max(1.0));
            }
        }
    }
}
