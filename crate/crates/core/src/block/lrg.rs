//! Linear resolvent growth diagnostics.
//!
//! A finite grid can only ever falsify `‖(L − z)⁻¹‖ ≤ K / |Im z|`, so the
//! verdict is three-valued.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::schur::schur_t_with;
use super::{jsa_unchecked, BlockCoefficients};
use crate::error::{Error, Result};
use crate::numerics::{resolvent_norm, CMatrix, Lu, C64, RCOND_FLOOR};

/// Growth of `y ‖(L − iy)⁻¹‖` over one decade of `y` that counts as a trend.
pub const GROWTH_FACTOR: f64 = 5.0;
/// Default cap below which a scan is reported as consistent.
pub const DEFAULT_K_REPORT: f64 = 10.0;

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct LrgPoint {
    pub y: f64,
    pub norm: f64,
    pub product: f64,
}

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LrgVerdict {
    ConsistentOnGrid,
    Violated,
    Inconclusive,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct LrgScan {
    pub points: Vec<LrgPoint>,
    #[serde(with = "crate::serde_ext::f64_ext")]
    pub sup_product: f64,
    pub k_report: f64,
    /// Largest `p(y₂)/p(y₁)` over `y₂ ≥ 10 y₁` with `p` nondecreasing between.
    #[serde(with = "crate::serde_ext::f64_ext")]
    pub decade_growth: f64,
    pub verdict: LrgVerdict,
    pub truncated: bool,
}

impl LrgScan {
    fn from_points(mut points: Vec<LrgPoint>, k_report: f64, truncated: bool) -> Self {
        points.sort_by(|a, b| a.y.total_cmp(&b.y));
        let sup_product = points.iter().map(|p| p.product).fold(0.0, f64::max);
        let decade_growth = monotone_decade_growth(&points);
        // Below the spectral scale the product grows linearly for every
        // operator, so growth alone is not evidence unless it also breaks K.
        let verdict = if sup_product <= k_report {
            LrgVerdict::ConsistentOnGrid
        } else if decade_growth >= GROWTH_FACTOR {
            LrgVerdict::Violated
        } else {
            LrgVerdict::Inconclusive
        };
        Self {
            points,
            sup_product,
            k_report,
            decade_growth,
            verdict,
            truncated,
        }
    }

    /// `p(y_hi) / p(y_lo)` for two grid points.
    pub fn growth_between(&self, y_lo: f64, y_hi: f64) -> Option<f64> {
        let find = |y: f64| self.points.iter().find(|p| (p.y - y).abs() <= 1e-12 * y.abs().max(1.0));
        Some(find(y_hi)?.product / find(y_lo)?.product)
    }
}

fn monotone_decade_growth(points: &[LrgPoint]) -> f64 {
    let mut best = 0.0f64;
    for i in 0..points.len() {
        for j in i + 1..points.len() {
            if points[j].product < points[j - 1].product {
                break;
            }
            if points[j].y >= 10.0 * points[i].y && points[i].product > 0.0 {
                best = best.max(points[j].product / points[i].product);
            }
        }
    }
    best
}

/// `y ‖(L − iy)⁻¹‖` over `y_grid` with the default cap.
pub fn lrg_scan(coeffs: &BlockCoefficients, y_grid: &[f64]) -> Result<LrgScan> {
    coeffs.validate()?;
    lrg_scan_matrix(&jsa_unchecked(coeffs), y_grid, DEFAULT_K_REPORT, coeffs.truncated)
}

/// Same scan for an arbitrary square matrix.
pub fn lrg_scan_matrix(m: &CMatrix, y_grid: &[f64], k_report: f64, truncated: bool) -> Result<LrgScan> {
    if let Some(&y) = y_grid.iter().find(|y| !(**y > 0.0) || !y.is_finite()) {
        return Err(Error::DomainViolation(format!("y = {y} must be positive and finite")));
    }
    let points = y_grid
        .par_iter()
        .map(|&y| {
            let norm = resolvent_norm(m, C64::new(0.0, y)).map_err(|e| match e {
                Error::SingularMatrix { .. } => Error::ResolventSingular { y },
                other => other,
            })?;
            Ok(LrgPoint { y, norm, product: y * norm })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(LrgScan::from_points(points, k_report, truncated))
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct TNormRow {
    pub z: C64,
    pub t_inv_norm: f64,
    pub a_inv_t_inv_norm: f64,
    /// `‖T(z)⁻¹‖ |Im z|`.
    pub scaled_t: f64,
    /// `‖A⁻¹T(z)⁻¹‖ |z| |Im z|`.
    pub scaled_a_t: f64,
}

/// Necessary condition for similarity to a self-adjoint operator: both
/// scaled norms stay below one constant. A failure rules similarity out.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct TNormTable {
    pub rows: Vec<TNormRow>,
    pub k_observed: f64,
    pub k_report: f64,
    pub bounded: bool,
}

pub fn lrg_necessary_t(coeffs: &BlockCoefficients, z_grid: &[C64]) -> Result<TNormTable> {
    coeffs.validate()?;
    let a_lu = Lu::new(&coeffs.a);
    if let Some(z) = z_grid.iter().find(|z| z.im == 0.0) {
        return Err(Error::DomainViolation(format!("z = {z} must lie off the real axis")));
    }
    let rows = z_grid
        .par_iter()
        .map(|&z| {
            let t = schur_t_with(coeffs, &a_lu, z);
            let t_lu = Lu::new(&t);
            if !(t_lu.rcond() >= RCOND_FLOOR) {
                return Err(Error::TSingular { z });
            }
            // A⁻¹T⁻¹ = (TA)⁻¹.
            let ta_lu = Lu::new(&t.matmul(&coeffs.a));
            let t_inv_norm = t_lu.inverse_norm();
            let a_inv_t_inv_norm = ta_lu.inverse_norm();
            Ok(TNormRow {
                z,
                t_inv_norm,
                a_inv_t_inv_norm,
                scaled_t: t_inv_norm * z.im.abs(),
                scaled_a_t: a_inv_t_inv_norm * z.norm() * z.im.abs(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let k_observed = rows.iter().map(|r| r.scaled_t.max(r.scaled_a_t)).fold(0.0, f64::max);
    Ok(TNormTable {
        rows,
        k_observed,
        k_report: DEFAULT_K_REPORT,
        bounded: k_observed <= DEFAULT_K_REPORT,
    })
}
