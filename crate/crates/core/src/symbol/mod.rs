//! Pointwise 2×2 calculus for multiplication-type block operators.
//!
//! A [`SymbolTriple`] holds `a`, `b`, `c` as functions of a real parameter `λ`,
//! either as rational closed forms (with exact `|λ| → ∞` tails) or as samples
//! on a grid. The relativistic Ginzburg–Landau symbol is the closed form
//! built by [`GLSymbolParams::triple`].

mod rational;

pub use rational::{Poly, Rational};

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::numerics::{CMatrix, C64, I, ZERO};

/// Hausdorff tolerance for sampled band loci.
pub const BAND_TOL: f64 = 1e-3;
/// A supremum above this is treated as infinite.
pub const ESS_SUP_CAP: f64 = 1e10;
/// `|D(λ)|` below this fraction of the size of its terms counts as a zero.
const VANISH_REL: f64 = 1e-10;

/// The coefficient functions `a`, `b`, `c`.
#[derive(Clone, Debug)]
pub enum SymbolTriple {
    /// Rational in `λ` on the whole real line; `a`, `b` must be real-valued.
    Closed { a: Rational, b: Rational, c: Rational },
    /// Samples on an increasing grid, linearly interpolated between nodes.
    Sampled {
        grid: Vec<f64>,
        a: Vec<f64>,
        b: Vec<f64>,
        c: Vec<C64>,
    },
}

/// Coefficients at one point.
#[derive(Clone, Copy, Debug)]
pub struct SymbolValue {
    pub a: f64,
    pub b: f64,
    pub c: C64,
}

impl SymbolTriple {
    pub fn closed(a: Rational, b: Rational, c: Rational) -> Self {
        SymbolTriple::Closed { a, b, c }
    }

    pub fn sampled(grid: Vec<f64>, a: Vec<f64>, b: Vec<f64>, c: Vec<C64>) -> Result<Self> {
        if grid.len() < 2 || a.len() != grid.len() || b.len() != grid.len() || c.len() != grid.len() {
            return Err(Error::InvalidSymbolParams("sampled symbol needs equal-length arrays of at least 2 points".into()));
        }
        if grid.windows(2).any(|w| !(w[1] > w[0])) {
            return Err(Error::InvalidSymbolParams("sample grid must be strictly increasing".into()));
        }
        let finite = grid.iter().chain(&a).chain(&b).all(|x| x.is_finite()) && c.iter().all(|z| z.re.is_finite() && z.im.is_finite());
        if !finite {
            return Err(Error::InvalidSymbolParams("non-finite sample".into()));
        }
        let sym = SymbolTriple::Sampled { grid, a, b, c };
        if let SymbolTriple::Sampled { grid, .. } = &sym {
            sym.check_invariants(grid)?;
        }
        Ok(sym)
    }

    /// Whether suprema include an exact `|λ| → ∞` limit.
    pub fn tail_known(&self) -> bool {
        matches!(self, SymbolTriple::Closed { .. })
    }

    pub fn eval(&self, lambda: f64) -> Result<SymbolValue> {
        if !lambda.is_finite() {
            return Err(Error::DomainViolation(format!("lambda = {lambda}")));
        }
        match self {
            SymbolTriple::Closed { a, b, c } => Ok(SymbolValue {
                a: a.eval(lambda).re,
                b: b.eval(lambda).re,
                c: c.eval(lambda),
            }),
            SymbolTriple::Sampled { grid, a, b, c } => {
                let (lo, hi) = (grid[0], grid[grid.len() - 1]);
                if lambda < lo || lambda > hi {
                    return Err(Error::DomainViolation(format!("lambda = {lambda} outside sampled range [{lo}, {hi}]")));
                }
                let k = grid.partition_point(|&g| g <= lambda).clamp(1, grid.len() - 1);
                let t = (lambda - grid[k - 1]) / (grid[k] - grid[k - 1]);
                Ok(SymbolValue {
                    a: a[k - 1] + t * (a[k] - a[k - 1]),
                    b: b[k - 1] + t * (b[k] - b[k - 1]),
                    c: c[k - 1] + (c[k] - c[k - 1]) * t,
                })
            }
        }
    }

    /// `a > 0` and `b ≥ 0` at every grid point.
    pub fn check_invariants(&self, grid: &[f64]) -> Result<()> {
        for &l in grid {
            let v = self.eval(l)?;
            if !(v.a > 0.0) {
                return Err(Error::InvalidSymbolParams(format!("a({l}) = {} is not positive", v.a)));
            }
            if v.b < 0.0 {
                return Err(Error::InvalidSymbolParams(format!("b({l}) = {} is negative", v.b)));
            }
        }
        Ok(())
    }

    /// Grid points of the sampled domain, or `grid` itself for closed forms.
    fn scan_points<'a>(&'a self, grid: &'a [f64]) -> Vec<f64> {
        match self {
            SymbolTriple::Closed { .. } => grid.to_vec(),
            SymbolTriple::Sampled { grid: own, .. } => {
                let (lo, hi) = (own[0], own[own.len() - 1]);
                grid.iter().copied().filter(|l| *l >= lo && *l <= hi).collect()
            }
        }
    }
}

/// Mass and velocity of the Ginzburg–Landau symbol
/// `a = λ² + m²`, `b = 1`, `c = −iνλ`.
///
/// The coupling is written as `−iνλ` so that `L̂(λ) = [[νλ, i], [−i(λ²+m²), νλ]]`
/// arises from the generic `[[ic, ib], [−ia, −ic*]]`; this is unitarily
/// equivalent to a real coupling `νλ` and leaves every modulus unchanged.
#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct GLSymbolParams {
    pub m: f64,
    pub nu: f64,
}

impl GLSymbolParams {
    pub fn new(m: f64, nu: f64) -> Result<Self> {
        if !(m > 0.0) || !m.is_finite() {
            return Err(Error::InvalidSymbolParams(format!("mass m = {m} must be positive")));
        }
        if !(nu.abs() < 1.0) || nu == 0.0 {
            return Err(Error::InvalidSymbolParams(format!("velocity nu = {nu} must satisfy 0 < |nu| < 1")));
        }
        Ok(Self { m, nu })
    }

    pub fn triple(&self) -> SymbolTriple {
        SymbolTriple::closed(
            Rational::poly(Poly::real(&[self.m * self.m, 0.0, 1.0])),
            Rational::constant(C64::new(1.0, 0.0)),
            Rational::poly(Poly::new(vec![ZERO, C64::new(0.0, -self.nu)])),
        )
    }

    /// `m √(1 − ν²)`.
    pub fn gap(&self) -> f64 {
        self.m * (1.0 - self.nu * self.nu).sqrt()
    }

    /// Eigenvalues `νλ ∓ √(λ² + m²)` of `L̂(λ)`.
    pub fn l_eigenvalues(&self, lambda: f64) -> (f64, f64) {
        let r = lambda.hypot(self.m);
        (self.nu * lambda - r, self.nu * lambda + r)
    }

    /// Eigenvalues of `Â(λ)`, ascending.
    pub fn a_eigenvalues(&self, lambda: f64) -> (f64, f64) {
        let a = lambda * lambda + self.m * self.m;
        let c = self.nu * lambda;
        let mid = 0.5 * (a + 1.0);
        let rad = (0.25 * (a - 1.0) * (a - 1.0) + c * c).sqrt();
        (mid - rad, mid + rad)
    }
}

/// `Â(λ) = [[a, c*], [c, b]]`.
pub fn symbol_matrix_a(sym: &SymbolTriple, lambda: f64) -> Result<CMatrix> {
    let v = sym.eval(lambda)?;
    CMatrix::from_row_major(2, 2, vec![C64::new(v.a, 0.0), v.c.conj(), v.c, C64::new(v.b, 0.0)])
}

/// `L̂(λ) = [[ic, ib], [−ia, −ic*]]`.
pub fn symbol_matrix_l(sym: &SymbolTriple, lambda: f64) -> Result<CMatrix> {
    let v = sym.eval(lambda)?;
    CMatrix::from_row_major(2, 2, vec![I * v.c, I * v.b, -I * v.a, -I * v.c.conj()])
}

/// `det(Â(λ) − z) = λ²(1 − z − ν²) + (m² − z)(1 − z)`.
pub fn symbol_det_a(params: &GLSymbolParams, lambda: f64, z: C64) -> C64 {
    let one = C64::new(1.0, 0.0);
    let l2 = lambda * lambda;
    (one - z - params.nu * params.nu) * l2 + (C64::new(params.m * params.m, 0.0) - z) * (one - z)
}

/// Sorted, disjoint closed intervals; endpoints may be infinite.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BandSet {
    #[serde(with = "crate::serde_ext::pairs_ext")]
    pub intervals: Vec<(f64, f64)>,
}

impl BandSet {
    /// Sorts and merges overlapping or touching intervals.
    pub fn new(mut intervals: Vec<(f64, f64)>) -> Self {
        intervals.retain(|(lo, hi)| lo <= hi);
        intervals.sort_by(|a, b| a.0.total_cmp(&b.0));
        let mut merged: Vec<(f64, f64)> = Vec::with_capacity(intervals.len());
        for (lo, hi) in intervals {
            match merged.last_mut() {
                Some(last) if lo <= last.1 => last.1 = last.1.max(hi),
                _ => merged.push((lo, hi)),
            }
        }
        Self { intervals: merged }
    }

    pub fn contains(&self, x: f64) -> bool {
        self.intervals.iter().any(|(lo, hi)| *lo <= x && x <= *hi)
    }

    pub fn distance(&self, x: f64) -> f64 {
        self.intervals
            .iter()
            .map(|&(lo, hi)| if x < lo { lo - x } else if x > hi { x - hi } else { 0.0 })
            .fold(f64::INFINITY, f64::min)
    }

    /// Intersection with `[lo, hi]`.
    pub fn clipped(&self, lo: f64, hi: f64) -> Self {
        Self::new(self.intervals.iter().map(|&(a, b)| (a.max(lo), b.min(hi))).collect())
    }

    /// Hausdorff distance between two bounded interval unions.
    pub fn hausdorff(&self, other: &BandSet) -> f64 {
        if self.intervals.is_empty() || other.intervals.is_empty() {
            return if self.intervals.is_empty() && other.intervals.is_empty() { 0.0 } else { f64::INFINITY };
        }
        self.directed(other).max(other.directed(self))
    }

    /// `sup_{x ∈ self} dist(x, other)`: attained at an endpoint of `self` or
    /// at the midpoint of a gap of `other` lying inside `self`.
    fn directed(&self, other: &BandSet) -> f64 {
        let mut candidates: Vec<f64> = self.intervals.iter().flat_map(|&(lo, hi)| [lo, hi]).collect();
        for w in other.intervals.windows(2) {
            let mid = 0.5 * (w[0].1 + w[1].0);
            if self.contains(mid) {
                candidates.push(mid);
            }
        }
        candidates.into_iter().map(|x| other.distance(x)).fold(0.0, f64::max)
    }
}

/// Essential spectrum of the self-adjoint operator with symbol `Â`:
/// with `s₁ ≤ s₂ ≤ s₃` the sorted values of `1 − ν²`, `m²`, `1`, this is
/// `[s₁, s₂] ∪ [s₃, ∞)`.
pub fn ess_spectrum_bands(params: &GLSymbolParams) -> BandSet {
    let mut s = [1.0 - params.nu * params.nu, params.m * params.m, 1.0];
    s.sort_by(f64::total_cmp);
    BandSet::new(vec![(s[0], s[1]), (s[2], f64::INFINITY)])
}

/// `(z − m²)(z − 1)/(z − (1 − ν²)) ≥ 0`, with `z = 1 − ν²` a member.
pub fn band_membership(params: &GLSymbolParams, z: f64) -> bool {
    let p = 1.0 - params.nu * params.nu;
    if z == p {
        return true;
    }
    (z - params.m * params.m) * (z - 1.0) / (z - p) >= 0.0
}

/// Spectrum of `L̂`: `(−∞, −g] ∪ [g, ∞)` with `g = m √(1 − ν²)`.
pub fn spectrum_l_symbol(params: &GLSymbolParams) -> BandSet {
    let g = params.gap();
    BandSet::new(vec![(f64::NEG_INFINITY, -g), (g, f64::INFINITY)])
}

/// Eigenvalue loci of `Â(λ)` over a λ-grid, compared with the bands.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BandSweep {
    /// Union of the piecewise-linear images of both eigenvalue branches.
    pub loci: BandSet,
    /// Largest sampled eigenvalue; the bands are compared up to here.
    pub reach: f64,
    pub hausdorff: f64,
    /// Widest gap between consecutive samples inside one band.
    pub point_gap: f64,
}

pub fn band_sweep(params: &GLSymbolParams, grid: &[f64]) -> BandSweep {
    let mut sorted = grid.to_vec();
    sorted.sort_by(f64::total_cmp);
    let eig: Vec<(f64, f64)> = sorted.par_iter().map(|&l| params.a_eigenvalues(l)).collect();
    let mut segments = Vec::with_capacity(2 * eig.len());
    for w in eig.windows(2) {
        segments.push((w[0].0.min(w[1].0), w[0].0.max(w[1].0)));
        segments.push((w[0].1.min(w[1].1), w[0].1.max(w[1].1)));
    }
    if eig.len() == 1 {
        segments.push((eig[0].0, eig[0].0));
        segments.push((eig[0].1, eig[0].1));
    }
    let loci = BandSet::new(segments);
    let reach = eig.iter().map(|e| e.1).fold(f64::NEG_INFINITY, f64::max);
    let bands = ess_spectrum_bands(params).clipped(f64::NEG_INFINITY, reach);

    let mut points: Vec<f64> = eig.iter().flat_map(|e| [e.0, e.1]).collect();
    points.sort_by(f64::total_cmp);
    let point_gap = points
        .windows(2)
        .filter(|w| bands.intervals.iter().any(|&(lo, hi)| lo <= w[0] && w[1] <= hi))
        .map(|w| w[1] - w[0])
        .fold(0.0, f64::max);

    BandSweep {
        hausdorff: loci.hausdorff(&bands),
        loci,
        reach,
        point_gap,
    }
}

/// Default λ-grid: 10001 uniform points on `[−10, 10]` and 5000 geometric
/// points on each side out to `|λ| = 10⁶`.
pub fn default_lambda_grid() -> Vec<f64> {
    let mut grid: Vec<f64> = (0..=10_000).map(|k| -10.0 + 20.0 * k as f64 / 10_000.0).collect();
    let ratio: f64 = 1e5f64.powf(1.0 / 5000.0);
    let tail: Vec<f64> = (1..=5000).map(|k| 10.0 * ratio.powi(k)).collect();
    grid.extend(tail.iter().copied());
    grid.extend(tail.iter().map(|x| -x));
    grid.sort_by(f64::total_cmp);
    grid
}

/// Sup of `|N(λ)| / |D(λ)|` over a grid with refinement at near-zeros of `D`.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SupReport {
    #[serde(with = "crate::serde_ext::f64_ext")]
    pub value: f64,
    #[serde(with = "crate::serde_ext::f64_ext")]
    pub grid_sup: f64,
    pub argmax: f64,
    /// Exact `|λ| → ∞` limit when the symbol is closed-form.
    #[serde(with = "crate::serde_ext::opt_f64_ext")]
    pub tail_limit: Option<f64>,
    /// Parameters where the denominator vanishes.
    pub vanishing_at: Vec<f64>,
}

impl SupReport {
    pub fn is_finite(&self) -> bool {
        self.vanishing_at.is_empty() && self.value.is_finite() && self.value <= ESS_SUP_CAP
    }
}

struct Ratio<'a> {
    sym: &'a SymbolTriple,
    /// Returns `(N, D, size of the terms in D)`.
    f: Box<dyn Fn(SymbolValue) -> (f64, C64, f64) + Sync + 'a>,
    tail: Option<f64>,
}

impl Ratio<'_> {
    fn at(&self, lambda: f64) -> Option<(f64, f64, f64)> {
        let v = self.sym.eval(lambda).ok()?;
        let (n, d, s) = (self.f)(v);
        Some((n, d.norm(), s))
    }

    fn sup(&self, grid: &[f64]) -> SupReport {
        let pts = self.sym.scan_points(grid);
        let vals: Vec<(f64, f64, f64)> = pts.par_iter().map(|&l| self.at(l).unwrap_or((0.0, f64::INFINITY, 1.0))).collect();
        let ratio = |(n, d, _): (f64, f64, f64)| if d == 0.0 { f64::INFINITY } else { n / d };

        let (mut grid_sup, mut argmax) = (0.0f64, pts.first().copied().unwrap_or(0.0));
        for (k, v) in vals.iter().enumerate() {
            if ratio(*v) > grid_sup {
                grid_sup = ratio(*v);
                argmax = pts[k];
            }
        }

        // Refine every local minimum of |D| by golden-section search.
        let mut vanishing_at = Vec::new();
        let mut value = grid_sup;
        for k in 0..pts.len() {
            let left = if k > 0 { vals[k - 1].1 } else { f64::INFINITY };
            let right = if k + 1 < pts.len() { vals[k + 1].1 } else { f64::INFINITY };
            if !(vals[k].1 <= left && vals[k].1 <= right) {
                continue;
            }
            let lo = if k > 0 { pts[k - 1] } else { pts[k] };
            let hi = if k + 1 < pts.len() { pts[k + 1] } else { pts[k] };
            let lam = golden_min(|l| self.at(l).map_or(f64::INFINITY, |v| v.1), lo, hi);
            if let Some((n, d, s)) = self.at(lam) {
                if d <= VANISH_REL * s.max(f64::MIN_POSITIVE) {
                    vanishing_at.push(lam);
                } else if n / d > value {
                    value = n / d;
                    argmax = lam;
                }
            }
        }
        if let Some(t) = self.tail {
            value = value.max(t);
        }
        if !vanishing_at.is_empty() {
            value = f64::INFINITY;
        }
        SupReport {
            value,
            grid_sup,
            argmax,
            tail_limit: self.tail,
            vanishing_at,
        }
    }
}

fn golden_min(f: impl Fn(f64) -> f64, mut a: f64, mut b: f64) -> f64 {
    if a == b {
        return a;
    }
    let g = 0.5 * (5f64.sqrt() - 1.0);
    let mut x1 = b - g * (b - a);
    let mut x2 = a + g * (b - a);
    let (mut f1, mut f2) = (f(x1), f(x2));
    for _ in 0..200 {
        if (b - a).abs() <= 1e-15 * a.abs().max(b.abs()).max(1e-300) {
            break;
        }
        if f1 <= f2 {
            b = x2;
            x2 = x1;
            f2 = f1;
            x1 = b - g * (b - a);
            f1 = f(x1);
        } else {
            a = x1;
            x1 = x2;
            f1 = f2;
            x2 = a + g * (b - a);
            f2 = f(x2);
        }
    }
    if f1 <= f2 {
        x1
    } else {
        x2
    }
}

/// `ab − (c + iz)(c* − iz)`, the negative of `det(L̂ − z)`.
fn resolvent_den(v: SymbolValue, z: C64) -> (C64, f64) {
    let p = (v.c + I * z) * (v.c.conj() - I * z);
    (C64::new(v.a * v.b, 0.0) - p, (v.a * v.b).abs() + p.norm())
}

fn resolvent_den_rational(a: &Rational, b: &Rational, c: &Rational, z: C64) -> Rational {
    let left = c + &Rational::constant(I * z);
    let right = &c.conj() - &Rational::constant(I * z);
    &(a * b) - &(&left * &right)
}

/// Membership of `z` in the resolvent set: `a / (ab − (c + iz)(c* − iz))`
/// must be essentially bounded.
#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ResolventMembership {
    pub in_resolvent: bool,
    pub sup: SupReport,
    /// False for sampled symbols, where only the grid was inspected.
    pub tail_known: bool,
}

pub fn resolvent_membership(sym: &SymbolTriple, z: C64, lambda_grid: &[f64]) -> Result<ResolventMembership> {
    let tail = match sym {
        // a is positive on the line, so |a| = a as a rational function.
        SymbolTriple::Closed { a, b, c } => Some((a * &resolvent_den_rational(a, b, c, z).recip()).tail_abs()),
        SymbolTriple::Sampled { .. } => None,
    };
    let ratio = Ratio {
        sym,
        f: Box::new(move |v| {
            let (d, s) = resolvent_den(v, z);
            (v.a.abs(), d, s)
        }),
        tail,
    };
    let sup = ratio.sup(lambda_grid);
    Ok(ResolventMembership {
        in_resolvent: sup.is_finite(),
        tail_known: sym.tail_known(),
        sup,
    })
}

/// Real-spectrum criterion: with `ab − |c|² ≥ 0`, `σ(L) ⊆ R` and `L` is
/// definitizable iff `a / (ab − (c − 1)(c* + 1))` is essentially bounded.
pub fn real_spectrum_criterion(sym: &SymbolTriple, lambda_grid: &[f64]) -> Result<bool> {
    for &l in &sym.scan_points(lambda_grid) {
        let v = sym.eval(l)?;
        let q = v.a * v.b - v.c.norm_sqr();
        if q < -1e-12 * (v.a * v.b).abs().max(v.c.norm_sqr()) {
            return Err(Error::PositivityViolated { lambda: l });
        }
    }
    Ok(resolvent_membership(sym, I, lambda_grid)?.in_resolvent)
}

/// Numerator of the LRG integrand.
#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum LrgIntegrand {
    /// `|a| + |b| + |z|`.
    Full,
    /// `|a|` alone, the entry that carries the growth for the GL symbol.
    LeadingEntry,
}

/// `sup_λ N / |ab − (c − iz)(c* + iz)|` for non-real `z`.
pub fn lrg_sup(sym: &SymbolTriple, z: C64, lambda_grid: &[f64], integrand: LrgIntegrand) -> Result<SupReport> {
    if z.im == 0.0 {
        return Err(Error::DomainViolation(format!("z = {z} must be non-real")));
    }
    // ab − (c − iz)(c* + iz) is the resolvent denominator at −z.
    let tail = match sym {
        SymbolTriple::Closed { a, b, c } => {
            let den = resolvent_den_rational(a, b, c, -z);
            let num = match integrand {
                LrgIntegrand::Full => &(a + b) + &Rational::constant(C64::new(z.norm(), 0.0)),
                LrgIntegrand::LeadingEntry => a.clone(),
            };
            Some((&num * &den.recip()).tail_abs())
        }
        SymbolTriple::Sampled { .. } => None,
    };
    let ratio = Ratio {
        sym,
        f: Box::new(move |v| {
            let (d, s) = resolvent_den(v, -z);
            let n = match integrand {
                LrgIntegrand::Full => v.a.abs() + v.b.abs() + z.norm(),
                LrgIntegrand::LeadingEntry => v.a.abs(),
            };
            (n, d, s)
        }),
        tail,
    };
    let sup = ratio.sup(lambda_grid);
    if let Some(&lambda) = sup.vanishing_at.first() {
        return Err(Error::DivisionNearZero { lambda });
    }
    Ok(sup)
}

/// `(L̂(λ) − z)⁻¹` from the adjugate over `(c + iz)(c* − iz) − ab`.
pub fn symbol_resolvent(sym: &SymbolTriple, lambda: f64, z: C64) -> Result<CMatrix> {
    let v = sym.eval(lambda)?;
    let (neg_den, scale) = resolvent_den(v, z);
    let den = -neg_den;
    if den.norm() <= 1e-14 * scale.max(f64::MIN_POSITIVE) {
        return Err(Error::SymbolSingular { lambda });
    }
    let entries = vec![
        (-I * v.c.conj() - z) / den,
        (-I * v.b) / den,
        (I * v.a) / den,
        (I * v.c - z) / den,
    ];
    CMatrix::from_row_major(2, 2, entries)
}
