use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::schur::{schur_t_derivative_with, schur_t_with};
use super::{jsa_unchecked, selfadjoint_unchecked, BlockCoefficients, DEFAULT_INERTIA_TOL};
use crate::error::{Error, Result};
use crate::numerics::{general_eig, inertia, singular_values, spectral_norm, Lu, C64, I, RCOND_FLOOR};

/// Hausdorff tolerance between the two spectrum routes.
pub const ROOT_MATCH_TOL: f64 = 1e-6;
/// Relative distance within which `λ` and `λ̄` count as a pair.
pub const PAIR_TOL: f64 = 1e-8;

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DirectSpectrum {
    pub eigenvalues: Vec<C64>,
    pub residuals: Vec<f64>,
    pub defective: bool,
}

/// Eigenvalues of `L` by a dense eigensolve.
pub fn spectrum_l_direct(coeffs: &BlockCoefficients) -> Result<DirectSpectrum> {
    coeffs.validate()?;
    let eig = general_eig(&jsa_unchecked(coeffs))?;
    Ok(DirectSpectrum {
        eigenvalues: eig.eigenvalues,
        residuals: eig.residuals,
        defective: eig.defective,
    })
}

/// Closed rectangle `[re.0, re.1] × [im.0, im.1]`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Region {
    pub re: (f64, f64),
    pub im: (f64, f64),
}

impl Region {
    pub fn new(re: (f64, f64), im: (f64, f64)) -> Self {
        Self { re, im }
    }

    pub fn square(half_width: f64) -> Self {
        Self::new((-half_width, half_width), (-half_width, half_width))
    }

    pub fn contains(&self, z: C64, slack: f64) -> bool {
        z.re >= self.re.0 - slack && z.re <= self.re.1 + slack && z.im >= self.im.0 - slack && z.im <= self.im.1 + slack
    }

    fn diameter(&self) -> f64 {
        (self.re.1 - self.re.0).hypot(self.im.1 - self.im.0)
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct RootSearch {
    pub grid_re: usize,
    pub grid_im: usize,
    pub newton_max_iter: usize,
    /// Overrides the default `1e−8 (‖B‖ + ‖C‖² ‖A⁻¹‖)`.
    pub sv_zero_tol: Option<f64>,
}

impl Default for RootSearch {
    fn default() -> Self {
        Self {
            grid_re: 200,
            grid_im: 200,
            newton_max_iter: 100,
            sv_zero_tol: None,
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ViaTRoots {
    pub roots: Vec<C64>,
    /// Algebraic multiplicity as seen by deflated Newton.
    pub multiplicities: Vec<usize>,
    pub sv_zero_tol: f64,
    /// The blocks are a finite section; roots need not reflect the limit.
    pub truncated: bool,
}

impl ViaTRoots {
    pub fn total_multiplicity(&self) -> usize {
        self.multiplicities.iter().sum()
    }
}

struct TEvaluator<'a> {
    coeffs: &'a BlockCoefficients,
    a_lu: Lu,
}

impl TEvaluator<'_> {
    fn sigma_min(&self, z: C64) -> f64 {
        let t = schur_t_with(self.coeffs, &self.a_lu, z);
        singular_values(&t).map(|s| s.last().copied().unwrap_or(0.0)).unwrap_or(0.0)
    }

    /// `tr(T(z)⁻¹ T'(z))`, the logarithmic derivative of `det T`.
    fn log_derivative(&self, z: C64) -> Option<C64> {
        let t = schur_t_with(self.coeffs, &self.a_lu, z);
        let lu = Lu::new(&t);
        if !(lu.rcond() >= f64::EPSILON) {
            return None;
        }
        let d = schur_t_derivative_with(self.coeffs, &self.a_lu, z);
        Some(lu.solve(&d).trace())
    }

    /// Newton on `det T(z) / Π (z − r_k)^{m_k}`.
    fn newton(&self, mut z: C64, known: &[(C64, usize)], max_iter: usize) -> Option<C64> {
        for _ in 0..max_iter {
            let mut g = match self.log_derivative(z) {
                Some(g) => g,
                // Landed on a root of T to working precision.
                None => return Some(z),
            };
            for &(r, m) in known {
                let d = z - r;
                if d.norm() == 0.0 {
                    return None;
                }
                g -= C64::new(m as f64, 0.0) / d;
            }
            if g.norm() == 0.0 || !g.re.is_finite() || !g.im.is_finite() {
                return None;
            }
            let step = C64::new(1.0, 0.0) / g;
            z -= step;
            if step.norm() <= 1e-14 * z.norm().max(1.0) {
                return Some(z);
            }
        }
        Some(z)
    }
}

/// Roots of `det T(z)` in `region`: local minima of `σ_min(T(z))` on a grid
/// seed Newton iterations, and deflated passes recover repeated or missed roots.
pub fn spectrum_l_via_t(coeffs: &BlockCoefficients, region: Region, search: RootSearch) -> Result<ViaTRoots> {
    coeffs.validate()?;
    let n = coeffs.dim();
    let a_lu = Lu::new(&coeffs.a);
    if !(a_lu.rcond() >= RCOND_FLOOR) {
        return Err(Error::SingularA { rcond: a_lu.rcond() });
    }
    let sv_zero_tol = search.sv_zero_tol.unwrap_or_else(|| {
        let c_norm = spectral_norm(&coeffs.c);
        1e-8 * (spectral_norm(&coeffs.b) + c_norm * c_norm * a_lu.inverse_norm())
    });
    let eval = TEvaluator { coeffs, a_lu };

    let (nx, ny) = (search.grid_re.max(2), search.grid_im.max(2));
    let at = |i: usize, j: usize| {
        C64::new(
            region.re.0 + (region.re.1 - region.re.0) * i as f64 / (nx - 1) as f64,
            region.im.0 + (region.im.1 - region.im.0) * j as f64 / (ny - 1) as f64,
        )
    };
    let sigma: Vec<f64> = (0..nx * ny)
        .into_par_iter()
        .map(|k| eval.sigma_min(at(k / ny, k % ny)))
        .collect();
    let sig = |i: usize, j: usize| sigma[i * ny + j];

    let mut seeds: Vec<(f64, C64)> = Vec::new();
    for i in 0..nx {
        for j in 0..ny {
            let v = sig(i, j);
            let mut is_min = true;
            'nbr: for di in -1i64..=1 {
                for dj in -1i64..=1 {
                    let (p, q) = (i as i64 + di, j as i64 + dj);
                    if (di, dj) == (0, 0) || p < 0 || q < 0 || p >= nx as i64 || q >= ny as i64 {
                        continue;
                    }
                    if sig(p as usize, q as usize) < v {
                        is_min = false;
                        break 'nbr;
                    }
                }
            }
            if is_min {
                seeds.push((v, at(i, j)));
            }
        }
    }
    seeds.sort_by(|a, b| a.0.total_cmp(&b.0));

    let cell = ((region.re.1 - region.re.0) / (nx - 1) as f64).hypot((region.im.1 - region.im.0) / (ny - 1) as f64);
    let slack = 1e-9 * region.diameter().max(1.0);
    // Newton converges only linearly at a repeated root, so iterates from
    // different seeds may stop a little apart.
    let same_root = |a: C64, b: C64| (a - b).norm() <= 1e-6 * a.norm().max(1.0);
    let is_root = |z: C64| eval.sigma_min(z) <= sv_zero_tol;

    let mut found: Vec<(C64, usize)> = Vec::new();
    let refine: Vec<Option<C64>> = seeds
        .par_iter()
        .map(|&(_, z0)| eval.newton(z0, &[], search.newton_max_iter))
        .collect();
    for z in refine.into_iter().flatten() {
        if region.contains(z, slack) && is_root(z) && !found.iter().any(|(r, _)| same_root(*r, z)) {
            found.push((z, 1));
        }
    }

    // Maehly deflation: a root already in the list can be returned again
    // only if it is repeated.
    let max_total = 2 * n;
    loop {
        let total: usize = found.iter().map(|(_, m)| m).sum();
        if total >= max_total {
            break;
        }
        let mut progressed = false;
        for &(_, z0) in &seeds {
            let Some(z) = eval.newton(z0, &found, search.newton_max_iter) else {
                continue;
            };
            if !region.contains(z, slack) || !is_root(z) {
                continue;
            }
            let close = found
                .iter_mut()
                .find(|(r, _)| (*r - z).norm() <= (1e-4 * r.norm().max(1.0)).min(cell));
            match close {
                Some(entry) => entry.1 += 1,
                None => found.push((z, 1)),
            }
            progressed = true;
            break;
        }
        if !progressed {
            break;
        }
    }

    if found.is_empty() {
        return Err(Error::NoRootsInRegion);
    }
    found.sort_by(|a, b| a.0.re.total_cmp(&b.0.re).then(a.0.im.total_cmp(&b.0.im)));
    Ok(ViaTRoots {
        roots: found.iter().map(|(z, _)| *z).collect(),
        multiplicities: found.iter().map(|(_, m)| *m).collect(),
        sv_zero_tol,
        truncated: coeffs.truncated,
    })
}

/// Symmetric Hausdorff distance between two finite point sets.
pub fn hausdorff_distance(a: &[C64], b: &[C64]) -> f64 {
    if a.is_empty() || b.is_empty() {
        return if a.is_empty() && b.is_empty() { 0.0 } else { f64::INFINITY };
    }
    let one_sided = |p: &[C64], q: &[C64]| {
        p.iter()
            .map(|x| q.iter().map(|y| (x - y).norm()).fold(f64::INFINITY, f64::min))
            .fold(0.0, f64::max)
    };
    one_sided(a, b).max(one_sided(b, a))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SymmetryCheck {
    pub symmetric: bool,
    /// `(λ, partner)` with `Im λ > 0`.
    pub pairs: Vec<(C64, C64)>,
    pub unmatched: Vec<C64>,
}

/// Pairs every non-real eigenvalue with its nearest partner near `λ̄`.
///
/// `tol` is relative to `max(1, |λ|)` and also decides which eigenvalues
/// count as real.
pub fn spectral_symmetry_check(eigs: &[C64], tol: f64) -> SymmetryCheck {
    let scale = |z: &C64| z.norm().max(1.0);
    let upper: Vec<C64> = eigs.iter().copied().filter(|z| z.im > tol * scale(z)).collect();
    let mut lower: Vec<Option<C64>> = eigs.iter().copied().filter(|z| z.im < -tol * scale(z)).map(Some).collect();
    let mut pairs = Vec::new();
    let mut unmatched = Vec::new();
    for u in upper {
        let target = u.conj();
        let best = lower
            .iter()
            .enumerate()
            .filter_map(|(k, l)| l.map(|l| (k, (l - target).norm())))
            .min_by(|a, b| a.1.total_cmp(&b.1));
        match best {
            Some((k, d)) if d <= tol * scale(&u) => {
                pairs.push((u, lower[k].take().expect("candidate present")));
            }
            _ => unmatched.push(u),
        }
    }
    unmatched.extend(lower.into_iter().flatten());
    SymmetryCheck {
        symmetric: unmatched.is_empty(),
        pairs,
        unmatched,
    }
}

#[derive(Clone, Copy, Debug, Serialize, Deserialize)]
pub struct NonrealBound {
    pub nonreal: usize,
    /// `2 κ₋(𝒜)`.
    pub bound: usize,
    pub ok: bool,
}

/// Counts eigenvalues of `L` with `|Im λ| > tol` against `2 κ₋(𝒜)`.
pub fn nonreal_count_bound(coeffs: &BlockCoefficients, tol: f64) -> Result<NonrealBound> {
    let spec = spectrum_l_direct(coeffs)?;
    let a_cal = selfadjoint_unchecked(coeffs);
    let kappa = inertia(&a_cal, DEFAULT_INERTIA_TOL * a_cal.frobenius_norm().max(1.0))?;
    let nonreal = spec.eigenvalues.iter().filter(|z| z.im.abs() > tol).count();
    let bound = 2 * kappa.n_neg;
    Ok(NonrealBound {
        nonreal,
        bound,
        ok: nonreal <= bound,
    })
}

/// `‖T(λ)g‖ / (‖Bg‖ + ‖(C+iλ)A⁻¹(C*−iλ)g‖)` for eigenpairs `(λ, (f, g))` of `L`.
///
/// The lower half of an eigenvector of `L` spans the kernel of `T(λ)`, so a
/// small value confirms `λ` as a root of `T` without a root search.
pub fn t_kernel_residuals(coeffs: &BlockCoefficients, pairs: &[(C64, Vec<C64>)]) -> Result<Vec<f64>> {
    let n = coeffs.dim();
    let lu = super::schur::factor_a(coeffs)?;
    let c_adj = coeffs.c.adjoint();
    let norm = |v: &[C64]| v.iter().map(|x| x.norm_sqr()).sum::<f64>().sqrt();
    pairs
        .iter()
        .map(|(z, v)| {
            if v.len() != 2 * n {
                return Err(Error::DimensionMismatch(format!("eigenvector of length {} for n = {n}", v.len())));
            }
            let g = &v[n..];
            let bg = coeffs.b.apply(g);
            let w: Vec<C64> = c_adj.apply(g).iter().zip(g).map(|(x, gi)| x - I * z * gi).collect();
            let w = lu.solve_vec(&w);
            let u: Vec<C64> = coeffs.c.apply(&w).iter().zip(&w).map(|(x, wi)| x + I * z * wi).collect();
            let tg: Vec<C64> = bg.iter().zip(&u).map(|(x, y)| x - y).collect();
            let scale = norm(&bg) + norm(&u);
            Ok(if scale > 0.0 { norm(&tg) / scale } else { 0.0 })
        })
        .collect()
}

/// `det T(z) det A (−1)ⁿ / det(L − z)`; constant in `z`.
#[cfg(test)]
pub(crate) fn determinant_ratio(coeffs: &BlockCoefficients, z: C64) -> C64 {
    let n = coeffs.dim();
    let t = super::schur_t(coeffs, z).unwrap();
    let sign = if n.is_multiple_of(2) { 1.0 } else { -1.0 };
    t.determinant() * coeffs.a.determinant() * sign / jsa_unchecked(coeffs).shift(z).determinant()
}
