//! Seeded random block instances with prescribed signatures.
//!
//! `A = Q diag(a) Q*` and `S(0) = P diag(s) P*` with `|a_k|, |s_k| ∈ [0.5, 2]`
//! are drawn first and `B` is set to `S(0) + C A⁻¹ C*`. The negative indices
//! of `A` and `S(0)` are therefore known exactly and no eigenvalue of either
//! comes near zero.

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use super::BlockCoefficients;
use crate::error::Result;
use crate::numerics::{hermitian_eig, CMatrix, Lu, C64};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SignPattern {
    /// `A > 0` and `S(0) > 0`.
    Definite,
    /// Independent random signs.
    Random,
    /// Random signs with at least one negative eigenvalue of `A` or `S(0)`.
    Indefinite,
}

#[derive(Clone, Debug)]
pub struct RandomInstance {
    pub coeffs: BlockCoefficients,
    pub kappa_a: usize,
    pub kappa_s0: usize,
}

/// Reproducible instance stream.
pub struct InstanceSampler {
    rng: ChaCha8Rng,
}

impl InstanceSampler {
    pub fn seeded(seed: u64) -> Self {
        Self {
            rng: ChaCha8Rng::seed_from_u64(seed),
        }
    }

    pub fn uniform(&mut self, lo: f64, hi: f64) -> f64 {
        self.rng.random_range(lo..hi)
    }

    pub fn size(&mut self, lo: usize, hi: usize) -> usize {
        self.rng.random_range(lo..=hi)
    }

    fn complex_matrix(&mut self, n: usize) -> CMatrix {
        CMatrix::from_fn(n, n, |_, _| C64::new(self.rng.random_range(-1.0..1.0), self.rng.random_range(-1.0..1.0)))
    }

    fn unitary(&mut self, n: usize) -> Result<CMatrix> {
        Ok(hermitian_eig(&self.complex_matrix(n).hermitian_part())?.eigenvectors)
    }

    fn spectrum(&mut self, n: usize, pattern: SignPattern) -> Vec<f64> {
        (0..n)
            .map(|_| {
                let mag = self.rng.random_range(0.5..2.0);
                let negative = pattern != SignPattern::Definite && self.rng.random_bool(0.5);
                if negative {
                    -mag
                } else {
                    mag
                }
            })
            .collect()
    }

    fn hermitian_with(&mut self, eigenvalues: &[f64]) -> Result<CMatrix> {
        let q = self.unitary(eigenvalues.len())?;
        Ok(q.matmul(&CMatrix::from_real_diag(eigenvalues)).matmul(&q.adjoint()).hermitian_part())
    }

    pub fn instance(&mut self, n: usize, pattern: SignPattern) -> Result<RandomInstance> {
        let (a_eigs, s_eigs) = loop {
            let a = self.spectrum(n, pattern);
            let s = self.spectrum(n, pattern);
            let negatives = a.iter().chain(&s).any(|x| *x < 0.0);
            if pattern != SignPattern::Indefinite || negatives {
                break (a, s);
            }
        };
        let a = self.hermitian_with(&a_eigs)?;
        let s0 = self.hermitian_with(&s_eigs)?;
        let c = self.complex_matrix(n);
        let coupling = c.matmul(&Lu::new(&a).solve(&c.adjoint()));
        let b = (&s0 + &coupling).hermitian_part();
        Ok(RandomInstance {
            coeffs: BlockCoefficients::new(a, b, c)?.with_label(format!("random n = {n}, {pattern:?}")),
            kappa_a: a_eigs.iter().filter(|x| **x < 0.0).count(),
            kappa_s0: s_eigs.iter().filter(|x| **x < 0.0).count(),
        })
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::block::{kappa_decomposition, schur_s};
    use crate::numerics::hermitian_eigenvalues;

    #[test]
    fn prescribed_signatures_hold() {
        let mut s = InstanceSampler::seeded(3);
        for _ in 0..30 {
            let n = s.size(1, 6);
            let inst = s.instance(n, SignPattern::Random).unwrap();
            let k = kappa_decomposition(&inst.coeffs, 1e-10).unwrap();
            assert_eq!(k.kappa_a.n_neg, inst.kappa_a);
            assert_eq!(k.kappa_s0.n_neg, inst.kappa_s0);
            let s0 = hermitian_eigenvalues(&schur_s(&inst.coeffs, C64::new(0.0, 0.0)).unwrap()).unwrap();
            assert!(s0.iter().all(|x| x.abs() >= 0.5 - 1e-9));
        }
    }

    #[test]
    fn patterns_and_determinism() {
        let mut s = InstanceSampler::seeded(5);
        for _ in 0..10 {
            let d = s.instance(4, SignPattern::Definite).unwrap();
            assert_eq!(d.kappa_a + d.kappa_s0, 0);
            let i = s.instance(3, SignPattern::Indefinite).unwrap();
            assert!(i.kappa_a + i.kappa_s0 > 0);
        }
        let a = InstanceSampler::seeded(7).instance(3, SignPattern::Random).unwrap();
        let b = InstanceSampler::seeded(7).instance(3, SignPattern::Random).unwrap();
        assert_eq!((&a.coeffs.b - &b.coeffs.b).max_abs(), 0.0);
    }
}
