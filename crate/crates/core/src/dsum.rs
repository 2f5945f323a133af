//! Orthogonal sums of 2×2 blocks `[[0, i b(a)], [−i a, 0]]`.
//!
//! With `b(a) = 1` every block has eigenvalues `±√a` whose eigenvectors
//! become nearly parallel as `a` grows, so the spectral projectors of the
//! sum are unbounded. With `b(a) = 1/a` every block squares to `I` and `T(z)`
//! degenerates to `(1 − z²)A⁻¹`. Both mechanisms are exposed as numerical
//! evidence on finite truncations, never as proof about the infinite sum.

use serde::{Deserialize, Serialize};

use crate::block::{schur_t, BlockCoefficients};
use crate::error::{Error, Result};
use crate::numerics::{spectral_norm, CMatrix, Lu, C64, I, ZERO};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BRule {
    /// `B = I`.
    Identity,
    /// `B = A⁻¹`.
    Inverse,
}

impl BRule {
    fn name(self) -> &'static str {
        match self {
            BRule::Identity => "identity",
            BRule::Inverse => "inverse",
        }
    }

    fn b_of(self, a: f64) -> f64 {
        match self {
            BRule::Identity => 1.0,
            BRule::Inverse => 1.0 / a,
        }
    }
}

/// `A = diag(weights)`, `B` from the rule, `C = 0`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DiagonalModel {
    weights: Vec<f64>,
    pub b_rule: BRule,
}

impl DiagonalModel {
    pub fn new(weights: Vec<f64>, b_rule: BRule) -> Result<Self> {
        if let Some(&w) = weights.iter().find(|w| !(**w > 0.0) || !w.is_finite()) {
            return Err(Error::NonPositiveWeight(w));
        }
        Ok(Self { weights, b_rule })
    }

    /// Weights `1, 2, …, n`.
    pub fn integers(n: usize, b_rule: BRule) -> Self {
        Self {
            weights: (1..=n).map(|k| k as f64).collect(),
            b_rule,
        }
    }

    pub fn weights(&self) -> &[f64] {
        &self.weights
    }

    /// `max_n |b_n − z²/a_n|`: with `C = 0`, `T(z)` is diagonal with these entries.
    pub fn diagonal_t_max_abs(&self, z: C64) -> f64 {
        let z2 = z * z;
        self.weights
            .iter()
            .map(|&a| (C64::new(self.b_rule.b_of(a), 0.0) - z2 / a).norm())
            .fold(0.0, f64::max)
    }

    /// Block coefficients of the first `n` weights, flagged as truncated.
    pub fn coefficients(&self, n: usize) -> Result<BlockCoefficients> {
        let w = &self.weights[..n.min(self.weights.len())];
        let b: Vec<f64> = w.iter().map(|&a| self.b_rule.b_of(a)).collect();
        let k = w.len();
        Ok(BlockCoefficients::new(CMatrix::from_real_diag(w), CMatrix::from_real_diag(&b), CMatrix::zeros(k, k))?
            .with_label(format!("diagonal model, {} rule, N = {k}", self.b_rule.name()))
            .truncated())
    }
}

/// `[[0, i b(a)], [−i a, 0]]`.
pub fn model_block(a: f64, b_rule: BRule) -> Result<CMatrix> {
    if !(a > 0.0) || !a.is_finite() {
        return Err(Error::NonPositiveWeight(a));
    }
    CMatrix::from_row_major(2, 2, vec![ZERO, I * b_rule.b_of(a), -I * a, ZERO])
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BlockEigendata {
    /// `(λ₋, λ₊)`.
    pub eigenvalues: (f64, f64),
    /// Unit eigenvectors for `λ₋` and `λ₊`.
    pub eigenvectors: ([C64; 2], [C64; 2]),
    /// `|⟨v₊, v₋⟩|` for the unit eigenvectors.
    pub cos_angle: f64,
}

/// Eigenvalues `±√(a b)` with eigenvectors `(1, ∓iβ)`, `β = a / √(a b)`.
pub fn block_eigendata(a: f64, b_rule: BRule) -> Result<BlockEigendata> {
    model_block(a, b_rule)?;
    let b = b_rule.b_of(a);
    let lam = (a * b).sqrt();
    let beta = a / lam;
    let norm = (1.0 + beta * beta).sqrt();
    let v = |s: f64| [C64::new(1.0 / norm, 0.0), C64::new(0.0, s * beta / norm)];
    Ok(BlockEigendata {
        eigenvalues: (-lam, lam),
        eigenvectors: (v(1.0), v(-1.0)),
        cos_angle: (1.0 - beta * beta).abs() / (1.0 + beta * beta),
    })
}

/// `‖P₊‖` from `P₊ = (L − λ₋)/(λ₊ − λ₋)`.
pub fn projector_norm(a: f64, b_rule: BRule) -> Result<f64> {
    Ok(spectral_norm(&riesz_projector(a, b_rule)?))
}

/// Spectral projector onto the positive eigenvalue of the block.
pub fn riesz_projector(a: f64, b_rule: BRule) -> Result<CMatrix> {
    let l = model_block(a, b_rule)?;
    let (lm, lp) = block_eigendata(a, b_rule)?.eigenvalues;
    if !(lp - lm > f64::EPSILON * lp.abs()) {
        return Err(Error::DegenerateEigenvalues);
    }
    Ok(l.shift(C64::new(lm, 0.0)).scale(C64::new(1.0 / (lp - lm), 0.0)))
}

/// `(a + 1)/(2√a)` for the identity rule, `(a + 1/a)/2` for the inverse rule.
pub fn projector_norm_closed(a: f64, b_rule: BRule) -> f64 {
    match b_rule {
        BRule::Identity => (a + 1.0) / (2.0 * a.sqrt()),
        BRule::Inverse => (a + 1.0 / a) / 2.0,
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ProjectorGrowth {
    /// `(a_n, ‖P₊(a_n)‖)`.
    pub rows: Vec<(f64, f64)>,
    /// Least-squares slope of `log ‖P₊‖` against `log a`.
    pub exponent: Option<f64>,
    /// Projector norms grow without sign of saturation along the weights.
    pub singular_critical_point_evidence: bool,
}

/// Slope below which growth is not read as evidence.
const EVIDENCE_EXPONENT: f64 = 0.25;

pub fn projector_growth_scan(model: &DiagonalModel) -> Result<ProjectorGrowth> {
    if model.weights.windows(2).any(|w| w[1] < w[0]) {
        return Err(Error::WeightsNotIncreasing);
    }
    let rows = model
        .weights
        .iter()
        .map(|&a| Ok((a, projector_norm(a, model.b_rule)?)))
        .collect::<Result<Vec<_>>>()?;
    let exponent = loglog_slope(&rows);
    // For the inverse rule the norm is symmetric under a ↦ 1/a, so only
    // weights on one side of 1 give a monotone sequence.
    let tail: Vec<f64> = rows.iter().filter(|r| r.0 >= 1.0).map(|r| r.1).collect();
    let monotone = tail.windows(2).all(|w| w[1] >= w[0]);
    let grows = tail.last().zip(tail.first()).is_some_and(|(l, f)| l > f);
    Ok(ProjectorGrowth {
        singular_critical_point_evidence: monotone && grows && exponent.is_some_and(|e| e >= EVIDENCE_EXPONENT),
        rows,
        exponent,
    })
}

fn loglog_slope(rows: &[(f64, f64)]) -> Option<f64> {
    let pts: Vec<(f64, f64)> = rows.iter().map(|&(a, p)| (a.ln(), p.ln())).collect();
    let n = pts.len() as f64;
    let mx = pts.iter().map(|p| p.0).sum::<f64>() / n;
    let my = pts.iter().map(|p| p.1).sum::<f64>() / n;
    let sxx: f64 = pts.iter().map(|p| (p.0 - mx).powi(2)).sum();
    if !(sxx > 1e-12 * n) {
        return None;
    }
    let sxy: f64 = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum();
    Some(sxy / sxx)
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TInverseScan {
    pub z: C64,
    /// `(N, max_{n ≤ N} a_n / |a_n − z²|)`.
    pub rows: Vec<(usize, f64)>,
    pub last: f64,
    /// The last value is at least 1, or the sequence increases towards it.
    pub approaches_one: bool,
}

/// `‖T(z)⁻¹‖ = max a_n / |a_n − z²|` along prefixes of the identity-rule model.
pub fn t_inverse_norm_scan(model: &DiagonalModel, z: C64) -> Result<TInverseScan> {
    let z2 = z * z;
    let mut rows = Vec::with_capacity(model.weights.len());
    let mut running = 0.0f64;
    for (k, &a) in model.weights.iter().enumerate() {
        let d = (C64::new(a, 0.0) - z2).norm();
        if d <= 1e-14 * a.max(z2.norm()) {
            return Err(Error::ZSquaredInSpectrum { z2 });
        }
        running = running.max(a / d);
        rows.push((k + 1, running));
    }
    let last = running;
    let increasing = rows.windows(2).all(|w| w[1].1 >= w[0].1);
    Ok(TInverseScan {
        z,
        rows,
        last,
        approaches_one: last >= 1.0 || increasing,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DefinitizabilityProbe {
    /// `max |T(1)_{jk}|` and `max |T(−1)_{jk}|` on the full truncation.
    pub t_at_plus_one: f64,
    pub t_at_minus_one: f64,
    pub z: C64,
    /// `(N, a_N, ‖T(z)⁻¹‖, ‖T(z)⁻¹‖ |1 − z²| / a_N)`.
    pub trend: Vec<(usize, f64, f64, f64)>,
    /// `‖T(z)⁻¹‖` grows linearly in the largest weight, so no fixed `z` stays
    /// in the resolvent set as the truncation is removed.
    pub resolvent_empty_in_limit: bool,
    pub truncated: bool,
}

/// Probes the inverse-rule model through `T(z) = (1 − z²)A⁻¹`.
pub fn definitizability_probe(model: &DiagonalModel, z: C64) -> Result<DefinitizabilityProbe> {
    if model.b_rule != BRule::Inverse {
        return Err(Error::WrongRule { expected: "inverse" });
    }
    let n = model.weights.len();
    let t_at_plus_one = model.diagonal_t_max_abs(C64::new(1.0, 0.0));
    let t_at_minus_one = model.diagonal_t_max_abs(C64::new(-1.0, 0.0));

    let one_minus = (C64::new(1.0, 0.0) - z * z).norm();
    let mut sizes: Vec<usize> = std::iter::successors(Some(1usize), |k| Some(k * 10)).take_while(|&k| k < n).collect();
    sizes.push(n);
    let mut trend = Vec::with_capacity(sizes.len());
    for &k in &sizes {
        let t = schur_t(&model.coefficients(k)?, z)?;
        let lu = Lu::new(&t);
        if !(lu.rcond() >= crate::numerics::RCOND_FLOOR) {
            return Err(Error::TSingular { z });
        }
        let norm = lu.inverse_norm();
        let a_max = model.weights[..k].iter().copied().fold(0.0, f64::max);
        trend.push((k, a_max, norm, norm * one_minus / a_max));
    }
    let linear = trend.iter().all(|r| (r.3 - 1.0).abs() <= 1e-8);
    let grows = trend.windows(2).all(|w| w[1].2 >= w[0].2) && trend.last().map(|r| r.2) > trend.first().map(|r| r.2);
    Ok(DefinitizabilityProbe {
        t_at_plus_one,
        t_at_minus_one,
        z,
        resolvent_empty_in_limit: linear && grows,
        trend,
        truncated: true,
    })
}
