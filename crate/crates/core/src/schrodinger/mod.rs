//! Finite differences for `H_V = −d²/dx² + m² + V` on `[−L, L]`.
//!
//! The grid has `n` nodes including both ends. Dirichlet conditions remove
//! the end nodes, so every operator here acts on the `n − 2` interior values.
//! `D` is the central difference, which keeps `Dᵀ = −D` exact and mirrors
//! `(d/dx)* = −d/dx`. The GL block operator takes `A = H_V`, `B = I` and
//! `C = νD`.

mod potential;
#[cfg(test)]
mod tests;

pub use potential::{Potential, DECAY_TOL, OUTER_FRACTION};

use serde::{Deserialize, Serialize};

use crate::block::{
    jsa_unchecked, kappa_decomposition, lrg_necessary_t, selfadjoint_unchecked, spectral_report_with, spectrum_l_via_t, t_kernel_residuals,
    BlockCoefficients, KappaDecomposition, Region, RootSearch, SpectralReport, TNormTable, ROOT_MATCH_TOL,
};
use crate::error::{Error, Result};
use crate::numerics::{
    general_eig, general_eigenvalues, hermitian_eigenvalues, spectral_norm, CMatrix, Inertia, Lu, C64, I, ONE,
    RCOND_FLOOR, ZERO,
};
use crate::symbol::{spectrum_l_symbol, BandSet, GLSymbolParams};

pub const DEFAULT_HALF_LENGTH: f64 = 40.0;
pub const DEFAULT_POINTS: usize = 800;
/// Band and gap tolerance at the default `h ≈ 0.1`.
pub const GL_BAND_TOL: f64 = 2e-2;
/// `H_V` counts as singular when `min |λ| ≤ HV_SINGULAR_TOL · max |λ|`.
pub const HV_SINGULAR_TOL: f64 = 1e-10;
/// Eigenvectors with more than this share of mass near the ends are flagged.
pub const ARTIFACT_MASS: f64 = 0.5;
/// Relative residual below which `T(λ)g = 0` is accepted.
pub const KERNEL_TOL: f64 = 1e-8;

/// Uniform nodes `x_k = −L + k h`, `h = 2L/(n − 1)`, `k = 0, …, n − 1`.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Grid1D {
    half_length: f64,
    points: usize,
}

impl Grid1D {
    pub fn new(half_length: f64, points: usize) -> Result<Self> {
        if !(half_length > 0.0) || !half_length.is_finite() {
            return Err(Error::InvalidGrid(format!("half length must be positive and finite, got {half_length}")));
        }
        if points < 3 {
            return Err(Error::InvalidGrid(format!("need at least 3 nodes, got {points}")));
        }
        Ok(Self { half_length, points })
    }

    pub fn half_length(&self) -> f64 {
        self.half_length
    }

    pub fn points(&self) -> usize {
        self.points
    }

    pub fn spacing(&self) -> f64 {
        2.0 * self.half_length / (self.points - 1) as f64
    }

    pub fn node(&self, k: usize) -> f64 {
        -self.half_length + k as f64 * self.spacing()
    }

    pub fn nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (0..self.points).map(|k| self.node(k))
    }

    pub fn interior_nodes(&self) -> impl Iterator<Item = f64> + '_ {
        (1..self.points - 1).map(|k| self.node(k))
    }

    /// Number of unknowns after the Dirichlet ends are removed.
    pub fn dim(&self) -> usize {
        self.points - 2
    }

    /// Same interval with `h` halved.
    pub fn refined(&self) -> Self {
        Self {
            half_length: self.half_length,
            points: 2 * self.points - 1,
        }
    }

    pub fn boundary_condition(&self) -> &'static str {
        "dirichlet"
    }
}

/// `kinetic · (−1, 2, −1)/h² + diag(m² + v)`.
fn schrodinger_stencil(grid: &Grid1D, kinetic: f64, m: f64, v: &[f64]) -> CMatrix {
    let h2 = grid.spacing().powi(2);
    let off = C64::new(-kinetic / h2, 0.0);
    let diag = 2.0 * kinetic / h2 + m * m;
    CMatrix::from_fn(grid.dim(), grid.dim(), |i, j| {
        if i == j {
            C64::new(diag + v[i], 0.0)
        } else if i.abs_diff(j) == 1 {
            off
        } else {
            ZERO
        }
    })
}

/// `H_V` on the interior nodes.
pub fn discretize_hv(grid: &Grid1D, m: f64, potential: &Potential) -> CMatrix {
    schrodinger_stencil(grid, 1.0, m, &potential.on_interior(grid))
}

/// `H_{ν,V} = −(1 − ν²) d²/dx² + m² + V`.
pub fn discretize_h_nu(grid: &Grid1D, m: f64, nu: f64, potential: &Potential) -> CMatrix {
    schrodinger_stencil(grid, 1.0 - nu * nu, m, &potential.on_interior(grid))
}

/// `(f_{k+1} − f_{k−1}) / (2h)` with `f = 0` at the end nodes.
pub fn discretize_d(grid: &Grid1D) -> CMatrix {
    let w = 1.0 / (2.0 * grid.spacing());
    CMatrix::from_fn(grid.dim(), grid.dim(), |i, j| {
        if j == i + 1 {
            C64::new(w, 0.0)
        } else if i == j + 1 {
            C64::new(-w, 0.0)
        } else {
            ZERO
        }
    })
}

fn check_nu(nu: f64) -> Result<()> {
    if !(nu.abs() < 1.0) || nu == 0.0 {
        return Err(Error::NuOutOfRange { nu });
    }
    Ok(())
}

fn check_mass(m: f64) -> Result<()> {
    if !(m > 0.0) || !m.is_finite() {
        return Err(Error::InvalidSymbolParams(format!("mass m must be positive and finite, got {m}")));
    }
    Ok(())
}

/// `H_V`, `D` and the block coefficients `A = H_V`, `B = I`, `C = νD`.
#[derive(Clone, Debug)]
pub struct GLDiscretization {
    pub grid: Grid1D,
    pub m: f64,
    pub nu: f64,
    pub potential: Potential,
    pub h_v: CMatrix,
    pub d: CMatrix,
    pub coeffs: BlockCoefficients,
    /// Ascending.
    pub hv_eigenvalues: Vec<f64>,
    pub kappa_hv: Inertia,
}

/// Serializable description of a [`GLDiscretization`].
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GLSummary {
    pub half_length: f64,
    pub points: usize,
    pub spacing: f64,
    pub dimension: usize,
    pub boundary_condition: String,
    pub m: f64,
    pub nu: f64,
    pub potential: Potential,
    pub kappa_hv: Inertia,
    pub hv_min_eigenvalue: f64,
}

pub fn assemble_gl(grid: &Grid1D, m: f64, nu: f64, potential: &Potential) -> Result<GLDiscretization> {
    check_nu(nu)?;
    check_mass(m)?;
    potential.check_decay(grid)?;
    let h_v = discretize_hv(grid, m, potential);
    let d = discretize_d(grid);
    let hv_eigenvalues = hermitian_eigenvalues(&h_v)?;
    let scale = hv_eigenvalues.iter().fold(0.0f64, |a, l| a.max(l.abs()));
    let tol = HV_SINGULAR_TOL * scale;
    if let Some(&eigenvalue) = hv_eigenvalues.iter().filter(|l| l.abs() <= tol).min_by(|a, b| a.abs().total_cmp(&b.abs())) {
        return Err(Error::SingularHV { eigenvalue });
    }
    let n = grid.dim();
    let coeffs = BlockCoefficients::new(h_v.clone(), CMatrix::identity(n), d.scale(C64::new(nu, 0.0)))?
        .with_label(format!("GL m = {m}, nu = {nu}, L = {}, n = {}", grid.half_length(), grid.points()))
        .truncated();
    Ok(GLDiscretization {
        grid: *grid,
        m,
        nu,
        potential: potential.clone(),
        h_v,
        d,
        coeffs,
        kappa_hv: Inertia::from_eigenvalues(&hv_eigenvalues, tol),
        hv_eigenvalues,
    })
}

impl GLDiscretization {
    pub fn summary(&self) -> GLSummary {
        GLSummary {
            half_length: self.grid.half_length(),
            points: self.grid.points(),
            spacing: self.grid.spacing(),
            dimension: self.grid.dim(),
            boundary_condition: self.grid.boundary_condition().to_string(),
            m: self.m,
            nu: self.nu,
            potential: self.potential.clone(),
            kappa_hv: self.kappa_hv,
            hv_min_eigenvalue: self.hv_eigenvalues[0],
        }
    }

    fn hv_lu(&self) -> Result<Lu> {
        let lu = Lu::new(&self.h_v);
        if !(lu.rcond() >= RCOND_FLOOR) {
            let eigenvalue = self.hv_eigenvalues.iter().copied().min_by(|a, b| a.abs().total_cmp(&b.abs())).unwrap_or(0.0);
            return Err(Error::SingularHV { eigenvalue });
        }
        Ok(lu)
    }

    /// `νD + iz`.
    fn shifted_d(&self, z: C64) -> CMatrix {
        self.d.scale(C64::new(self.nu, 0.0)).shift(-I * z)
    }
}

/// `S(0) = I + ν² D H_V⁻¹ D`.
pub fn schur_s0_gl(d: &GLDiscretization) -> Result<CMatrix> {
    let lu = d.hv_lu()?;
    let hinv_d = lu.solve(&d.d);
    let s = &CMatrix::identity(d.grid.dim()) + &d.d.matmul(&hinv_d).scale(C64::new(d.nu * d.nu, 0.0));
    Ok(s.hermitian_part())
}

/// `T(z) = I + (νD + iz) H_V⁻¹ (νD + iz)`.
pub fn t_gl(d: &GLDiscretization, z: C64) -> Result<CMatrix> {
    let lu = d.hv_lu()?;
    let f = d.shifted_d(z);
    Ok(&CMatrix::identity(d.grid.dim()) + &f.matmul(&lu.solve(&f)))
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct FactorizationCheck {
    pub y: f64,
    /// `‖F⁻¹T(iy)F⁻¹ − F⁻² − H_V⁻¹‖_F / ‖F⁻² + H_V⁻¹‖_F` with `F = νD − y`.
    pub residual: f64,
    pub inverse_factor_norm: f64,
    /// `‖F⁻¹‖ ≤ 1/y` since `F` is normal with spectrum `−y + iνθ`.
    pub bound_ok: bool,
}

/// Checks `(νD − y)⁻¹ T(iy) (νD − y)⁻¹ = (νD − y)⁻² + H_V⁻¹`.
pub fn factorization_identity_check(d: &GLDiscretization, y: f64) -> Result<FactorizationCheck> {
    if !(y > 0.0) || !y.is_finite() {
        return Err(Error::DomainViolation(format!("factorization check needs y > 0, got {y}")));
    }
    let f = d.shifted_d(C64::new(0.0, y));
    let lu_f = Lu::new(&f);
    let rcond = lu_f.rcond();
    if !(rcond >= RCOND_FLOOR) {
        return Err(Error::SingularFactor { rcond });
    }
    let t = t_gl(d, C64::new(0.0, y))?;
    let lhs = lu_f.solve_right(&lu_f.solve(&t));
    let f_inv = lu_f.inverse();
    let rhs = &f_inv.matmul(&f_inv) + &d.hv_lu()?.inverse();
    let inverse_factor_norm = spectral_norm(&f_inv);
    Ok(FactorizationCheck {
        y,
        residual: (&lhs - &rhs).frobenius_norm() / rhs.frobenius_norm(),
        inverse_factor_norm,
        bound_ok: inverse_factor_norm <= (1.0 + 1e-10) / y,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GreensCheck {
    pub spacing: f64,
    /// Max relative error of `(H_0⁻¹)_{ij}/h` against `e^{−m|x−y|}/(2m)`
    /// over `|x|, |y| ≤ L/2`, `|x − y| ≤ 5/m`.
    pub max_rel_error: f64,
    /// `max_rel_error / (h² + e^{−mL})`.
    pub constant: f64,
    /// Discrete kernel on the diagonal at the node nearest `0`.
    pub center_value: f64,
    /// `G(x₀, x₀ + δ)/G(x₀, x₀)` for the node nearest `x₀ + 5`.
    pub decay_ratio: f64,
    /// `e^{−mδ}` for the same offset.
    pub decay_expected: f64,
    pub symmetry_defect: f64,
}

/// Compares the discrete `H_0⁻¹` with the free Green's function `e^{−m|x−y|}/(2m)`.
pub fn greens_check(grid: &Grid1D, m: f64) -> Result<GreensCheck> {
    check_mass(m)?;
    let h = grid.spacing();
    let h0 = discretize_hv(grid, m, &Potential::Zero);
    let lu = Lu::new(&h0);
    if !(lu.rcond() >= RCOND_FLOOR) {
        return Err(Error::SingularHV { eigenvalue: 0.0 });
    }
    let xs: Vec<f64> = grid.interior_nodes().collect();
    let half = grid.half_length() / 2.0;
    let reach = 5.0 / m;
    let window: Vec<usize> = (0..xs.len()).filter(|&k| xs[k].abs() <= half).collect();
    let rhs = CMatrix::from_fn(xs.len(), window.len(), |i, j| if i == window[j] { ONE } else { ZERO });
    let cols = lu.solve(&rhs);
    let kernel = |i: usize, col: usize| cols.get(i, col).re / h;
    let exact = |x: f64, y: f64| (-m * (x - y).abs()).exp() / (2.0 * m);

    let mut max_rel_error = 0.0f64;
    let mut symmetry_defect = 0.0f64;
    for (cj, &j) in window.iter().enumerate() {
        for (ci, &i) in window.iter().enumerate() {
            if (xs[i] - xs[j]).abs() <= reach {
                let g = exact(xs[i], xs[j]);
                max_rel_error = max_rel_error.max((kernel(i, cj) - g).abs() / g);
            }
            symmetry_defect = symmetry_defect.max((cols.get(i, cj) - cols.get(j, ci)).norm());
        }
    }
    let nearest = |x: f64| (0..xs.len()).min_by(|&a, &b| (xs[a] - x).abs().total_cmp(&(xs[b] - x).abs())).expect("grid has interior nodes");
    let i0 = nearest(0.0);
    let i5 = nearest(xs[i0] + 5.0);
    let c0 = window.iter().position(|&k| k == i0).ok_or_else(|| Error::InvalidGrid("no interior node near 0".into()))?;
    let center_value = kernel(i0, c0);
    Ok(GreensCheck {
        spacing: h,
        max_rel_error,
        constant: max_rel_error / (h * h + (-m * grid.half_length()).exp()),
        center_value,
        decay_ratio: kernel(i5, c0) / center_value,
        decay_expected: (-m * (xs[i5] - xs[i0]).abs()).exp(),
        symmetry_defect,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct PositivityEquivalence {
    pub a_cal_nonneg: bool,
    pub hv_nonneg: bool,
    pub hnuv_nonneg: bool,
    /// `𝒜 ⪰ 0 ⇔ (H_V ⪰ 0 ∧ H_{ν,V} ⪰ 0)`.
    pub equivalent: bool,
    /// Smallest eigenvalues of `𝒜`, `H_V` and `H_{ν,V}`.
    pub min_eigenvalues: [f64; 3],
    pub tol: f64,
}

fn strict_min_eigenvalue(which: &str, m: &CMatrix, tol: f64) -> Result<f64> {
    let ev = hermitian_eigenvalues(m)?;
    if let Some(&value) = ev.iter().find(|l| l.abs() <= tol) {
        return Err(Error::DegenerateInertia {
            which: which.to_string(),
            value,
        });
    }
    Ok(ev[0])
}

/// Compares the sign of `𝒜` with those of `H_V` and `H_{ν,V}`.
///
/// The discrete `𝒜 ⪰ 0` is equivalent to `H_V + ν²D² ⪰ 0`, and `D²` differs
/// from the three-point stencil by `O(h²)`, so the two sides can disagree
/// only when `H_{ν,V}` is within `O(h²)` of losing positivity.
pub fn positivity_equivalence(grid: &Grid1D, m: f64, nu: f64, potential: &Potential, tol: f64) -> Result<PositivityEquivalence> {
    if !(tol > 0.0) {
        return Err(Error::DomainViolation(format!("tolerance must be positive, got {tol}")));
    }
    let h_v = discretize_hv(grid, m, potential);
    let h_nu = discretize_h_nu(grid, m, nu, potential);
    let n = grid.dim();
    let coeffs = BlockCoefficients::new(h_v.clone(), CMatrix::identity(n), discretize_d(grid).scale(C64::new(nu, 0.0)))?;
    let a_min = strict_min_eigenvalue("A_cal", &selfadjoint_unchecked(&coeffs), tol)?;
    let hv_min = strict_min_eigenvalue("H_V", &h_v, tol)?;
    let hnu_min = strict_min_eigenvalue("H_nu_V", &h_nu, tol)?;
    let (a_cal_nonneg, hv_nonneg, hnuv_nonneg) = (a_min > 0.0, hv_min > 0.0, hnu_min > 0.0);
    Ok(PositivityEquivalence {
        a_cal_nonneg,
        hv_nonneg,
        hnuv_nonneg,
        equivalent: a_cal_nonneg == (hv_nonneg && hnuv_nonneg),
        min_eigenvalues: [a_min, hv_min, hnu_min],
        tol,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GlReportOptions {
    /// Eigenvalues inside this region are confirmed through `T`.
    pub region: Region,
    pub y_grid: Vec<f64>,
    pub band_tol: f64,
    pub inertia_tol: f64,
    /// At most this many eigenvalues, smallest `|λ|` first, get a kernel check.
    pub kernel_checks: usize,
    /// Up to this dimension the full root search of `det T` is run instead.
    pub full_root_search_max_dim: usize,
}

impl Default for GlReportOptions {
    fn default() -> Self {
        Self {
            region: Region::new((-3.0, 3.0), (-1.0, 1.0)),
            y_grid: vec![0.5, 1.0, 5.0, 10.0, 50.0, 100.0],
            band_tol: GL_BAND_TOL,
            inertia_tol: 1e-8,
            kernel_checks: 10,
            full_root_search_max_dim: 24,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ViaTMode {
    /// Grid search and Newton refinement of `det T` over the region.
    RootSearch,
    /// `T(λ)g = 0` checked on eigenvectors of `L`.
    Kernel,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ViaTCheck {
    pub mode: ViaTMode,
    pub checked: usize,
    /// Hausdorff distance for a root search, largest relative residual otherwise.
    pub discrepancy: f64,
    pub tol: f64,
    pub consistent: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GlSpectrumReport {
    pub discretization: GLSummary,
    pub report: SpectralReport,
    pub l_bands: BandSet,
    /// `m √(1 − ν²)`.
    pub gap: f64,
    pub band_tol: f64,
    /// Relative eigen-residuals, aligned with `report.eigenvalues_l`.
    pub residuals: Vec<f64>,
    pub min_abs_re: f64,
    pub max_abs_im: f64,
    /// Eigenvalues whose eigenvectors sit mostly in the outer tenth of the grid.
    pub boundary_artifacts: Vec<C64>,
    pub via_t: ViaTCheck,
    /// `‖T(iy)⁻¹‖` and `‖A⁻¹T(iy)⁻¹‖` along the LRG grid.
    pub t_norms: TNormTable,
    pub kappa: KappaDecomposition,
}

/// Spectrum, negative indices, LRG data and symbol comparison for a GL discretization.
///
/// Verdicts added to the block report: `gap_clear`, `spectrum_in_bands` and
/// `via_t_consistent`.
pub fn gl_spectrum_report(d: &GLDiscretization, options: &GlReportOptions) -> Result<GlSpectrumReport> {
    let coeffs = &d.coeffs;
    let n = d.grid.dim();
    let eig = general_eig(&jsa_unchecked(coeffs))?;
    let mut report = spectral_report_with(coeffs, eig.eigenvalues.clone(), &options.y_grid, options.inertia_tol)?;
    let kappa = kappa_decomposition(coeffs, options.inertia_tol)?;

    let params = GLSymbolParams::new(d.m, d.nu)?;
    let l_bands = spectrum_l_symbol(&params);
    let gap = params.gap();

    let cut = (1.0 - OUTER_FRACTION) * d.grid.half_length();
    let outer: Vec<bool> = d.grid.interior_nodes().map(|x| x.abs() >= cut).collect();
    let boundary_artifacts = eig
        .eigenvalues
        .iter()
        .enumerate()
        .filter(|(j, _)| {
            let v = eig.eigenvectors.column(*j);
            let total: f64 = v.iter().map(|x| x.norm_sqr()).sum();
            let edge: f64 = (0..n).filter(|&k| outer[k]).map(|k| v[k].norm_sqr() + v[n + k].norm_sqr()).sum();
            edge > ARTIFACT_MASS * total
        })
        .map(|(_, z)| *z)
        .collect();

    let min_abs_re = eig.eigenvalues.iter().map(|z| z.re.abs()).fold(f64::INFINITY, f64::min);
    let max_abs_im = eig.eigenvalues.iter().map(|z| z.im.abs()).fold(0.0, f64::max);
    let gap_clear = eig.eigenvalues.iter().all(|z| z.re.abs() >= gap - options.band_tol);
    let in_bands = eig.eigenvalues.iter().all(|z| l_bands.distance(z.re) <= options.band_tol);

    let via_t = via_t_check(d, &eig, options)?;
    let z_grid: Vec<C64> = options.y_grid.iter().map(|&y| C64::new(0.0, y)).collect();
    let t_norms = lrg_necessary_t(coeffs, &z_grid)?;

    report.verdicts.insert("gap_clear".into(), gap_clear);
    report.verdicts.insert("spectrum_in_bands".into(), in_bands);
    report.verdicts.insert("via_t_consistent".into(), via_t.consistent);
    Ok(GlSpectrumReport {
        discretization: d.summary(),
        report,
        l_bands,
        gap,
        band_tol: options.band_tol,
        residuals: eig.residuals.clone(),
        min_abs_re,
        max_abs_im,
        boundary_artifacts,
        via_t,
        t_norms,
        kappa,
    })
}

fn via_t_check(d: &GLDiscretization, eig: &crate::numerics::GeneralEig, options: &GlReportOptions) -> Result<ViaTCheck> {
    let region = options.region;
    let inside: Vec<usize> = (0..eig.eigenvalues.len()).filter(|&j| region.contains(eig.eigenvalues[j], 0.0)).collect();
    if d.grid.dim() <= options.full_root_search_max_dim {
        let direct: Vec<C64> = inside.iter().map(|&j| eig.eigenvalues[j]).collect();
        let roots = match spectrum_l_via_t(&d.coeffs, region, RootSearch::default()) {
            Ok(r) => r.roots,
            Err(Error::NoRootsInRegion) => Vec::new(),
            Err(e) => return Err(e),
        };
        let scale = direct.iter().map(|z| z.norm()).fold(1.0, f64::max);
        let discrepancy = crate::block::hausdorff_distance(&direct, &roots);
        return Ok(ViaTCheck {
            mode: ViaTMode::RootSearch,
            checked: direct.len(),
            discrepancy,
            tol: ROOT_MATCH_TOL * scale,
            consistent: discrepancy <= ROOT_MATCH_TOL * scale,
        });
    }
    let mut order = inside;
    order.sort_by(|&a, &b| eig.eigenvalues[a].norm().total_cmp(&eig.eigenvalues[b].norm()));
    order.truncate(options.kernel_checks);
    let pairs: Vec<(C64, Vec<C64>)> = order.iter().map(|&j| (eig.eigenvalues[j], eig.eigenvectors.column(j))).collect();
    let residuals = t_kernel_residuals(&d.coeffs, &pairs)?;
    let discrepancy = residuals.iter().copied().fold(0.0, f64::max);
    Ok(ViaTCheck {
        mode: ViaTMode::Kernel,
        checked: pairs.len(),
        discrepancy,
        tol: KERNEL_TOL,
        consistent: discrepancy <= KERNEL_TOL,
    })
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct RefinementStudy {
    /// `h`, `h/2`, `h/4`.
    pub spacings: [f64; 3],
    /// The tracked eigenvalues on each grid.
    pub eigenvalues: Vec<[C64; 3]>,
    /// `|λ_h − λ_{h/2}| / |λ_{h/2} − λ_{h/4}|`; close to 4 for a second-order scheme.
    pub ratios: Vec<f64>,
}

/// Tracks the `count` smallest `|λ|` of `L` (`V ≡ 0`) over three halvings of `h`.
pub fn refinement_study(grid: &Grid1D, m: f64, nu: f64, count: usize) -> Result<RefinementStudy> {
    let grids = [*grid, grid.refined(), grid.refined().refined()];
    let spectra = grids
        .iter()
        .map(|g| general_eigenvalues(&jsa_unchecked(&assemble_gl(g, m, nu, &Potential::Zero)?.coeffs)))
        .collect::<Result<Vec<_>>>()?;
    let mut coarse = spectra[0].clone();
    coarse.sort_by(|a, b| a.norm().total_cmp(&b.norm()));
    coarse.truncate(count);
    let nearest = |spec: &[C64], z: C64| *spec.iter().min_by(|a, b| (*a - z).norm().total_cmp(&(*b - z).norm())).expect("non-empty spectrum");
    let eigenvalues: Vec<[C64; 3]> = coarse
        .iter()
        .map(|&z| {
            let mid = nearest(&spectra[1], z);
            [z, mid, nearest(&spectra[2], mid)]
        })
        .collect();
    let ratios = eigenvalues.iter().map(|e| (e[0] - e[1]).norm() / (e[1] - e[2]).norm()).collect();
    Ok(RefinementStudy {
        spacings: [grids[0].spacing(), grids[1].spacing(), grids[2].spacing()],
        eigenvalues,
        ratios,
    })
}
