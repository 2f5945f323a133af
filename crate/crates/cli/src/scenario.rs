//! Runs a configured scenario and collects the results into a [`ReportBundle`].

use blockspec_core::block::{
    frobenius_schur_check, hausdorff_distance, spectral_report_with, spectrum_l_direct, spectrum_l_via_t, BlockCoefficients, InstanceSampler, LrgScan, Region, RootSearch,
    SpectralReport, DEFAULT_K_REPORT, REPORT_IMAG_TOL,
};
use blockspec_core::dsum::{definitizability_probe, projector_growth_scan, t_inverse_norm_scan, BRule, DefinitizabilityProbe, DiagonalModel, ProjectorGrowth, TInverseScan};
use blockspec_core::numerics::{CMatrix, C64};
use blockspec_core::schrodinger::{
    assemble_gl, factorization_identity_check, gl_spectrum_report, positivity_equivalence, FactorizationCheck, GlReportOptions, GlSpectrumReport, Grid1D,
    PositivityEquivalence,
};
use blockspec_core::serde_ext::f64_ext;
use blockspec_core::symbol::{
    band_sweep, default_lambda_grid, ess_spectrum_bands, lrg_sup, real_spectrum_criterion, spectrum_l_symbol, BandSet, BandSweep, GLSymbolParams, LrgIntegrand,
};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::config::{BlockSource, BlocksParams, DsumParams, GlParams, Params, Rows, ScenarioConfig, SymbolParams, Tolerances};
use crate::error::{Context, Result};

pub const SCHEMA_VERSION: &str = "1";

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Metadata {
    pub tool: String,
    pub version: String,
    pub seed: u64,
    pub config: ScenarioConfig,
}

/// A boolean statement about the results, with the operation that produced it.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub name: String,
    pub holds: bool,
    pub operation: String,
    pub tolerance: Option<f64>,
    pub detail: String,
}

impl Verdict {
    fn new(name: &str, holds: bool, operation: &str, tolerance: Option<f64>, detail: impl Into<String>) -> Self {
        Self {
            name: name.to_string(),
            holds,
            operation: operation.to_string(),
            tolerance,
            detail: detail.into(),
        }
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ReportBundle {
    pub schema_version: String,
    pub metadata: Metadata,
    pub payload: Payload,
    pub verdicts: Vec<Verdict>,
    pub provenance: Vec<String>,
}

impl ReportBundle {
    pub fn verdict(&self, name: &str) -> Option<&Verdict> {
        self.verdicts.iter().find(|v| v.name == name)
    }
}

#[derive(Clone, Debug, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Payload {
    Blocks(BlocksPayload),
    Symbol(SymbolPayload),
    Dsum(DsumPayload),
    Gl(Box<GlPayload>),
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SpectrumPoint {
    pub z: C64,
    pub residual: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct ViaTComparison {
    pub region: Region,
    pub roots: Vec<C64>,
    pub hausdorff: f64,
    pub tol: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BlockInstanceReport {
    pub label: String,
    pub dimension: usize,
    pub report: SpectralReport,
    /// Eigenvalues of `L` inside the region, with eigen-residuals.
    pub spectrum: Vec<SpectrumPoint>,
    pub region: Region,
    /// `(z, relative residual)` of the Frobenius–Schur factorization.
    pub frobenius_schur: Vec<(C64, f64)>,
    pub via_t: Option<ViaTComparison>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct BlocksPayload {
    pub instances: Vec<BlockInstanceReport>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SymbolLrgRow {
    pub y: f64,
    #[serde(with = "f64_ext")]
    pub sup: f64,
    #[serde(with = "f64_ext")]
    pub product: f64,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct SymbolPayload {
    pub params: GLSymbolParams,
    pub ess_bands: BandSet,
    pub l_bands: BandSet,
    pub gap: f64,
    pub sweep: BandSweep,
    pub integrand: LrgIntegrand,
    pub lrg: Vec<SymbolLrgRow>,
    /// `1/(1 − ν²)`.
    pub lrg_lower_bound: f64,
    pub real_spectrum_definitizable: bool,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct DsumPayload {
    pub rule: BRule,
    pub size: usize,
    pub projector: ProjectorGrowth,
    pub t_inverse: Option<TInverseScan>,
    pub probe: Option<DefinitizabilityProbe>,
}

#[derive(Clone, Debug, Serialize, Deserialize)]
pub struct GlPayload {
    pub ess_bands: BandSet,
    /// Region of the spectrum table and of the check through `T`.
    pub region: Region,
    pub spectrum: GlSpectrumReport,
    pub factorization: Vec<FactorizationCheck>,
    pub positivity: Option<PositivityEquivalence>,
}

impl GlPayload {
    pub fn lrg(&self) -> &LrgScan {
        &self.spectrum.report.lrg_scan
    }
}

pub fn run_scenario(config: &ScenarioConfig) -> Result<ReportBundle> {
    let t = &config.tolerances;
    let (payload, verdicts, provenance) = match &config.params {
        Params::Blocks(p) => run_blocks(p, t, config.seed)?,
        Params::Symbol(p) => run_symbol(p, t)?,
        Params::Dsum(p) => run_dsum(p)?,
        Params::Gl(p) => run_gl(p, t)?,
    };
    Ok(ReportBundle {
        schema_version: SCHEMA_VERSION.to_string(),
        metadata: Metadata {
            tool: env!("CARGO_PKG_NAME").to_string(),
            version: env!("CARGO_PKG_VERSION").to_string(),
            seed: config.seed,
            config: config.clone(),
        },
        payload,
        verdicts,
        provenance,
    })
}

type Parts = (Payload, Vec<Verdict>, Vec<String>);

const ONE_SIDED_LRG: &str = "lrg_violated is one-sided: a grid scan can exhibit growth but cannot certify linear resolvent growth";

/// Operation and tolerance behind each block-report verdict key.
fn block_verdict_source(key: &str, t: &Tolerances) -> (&'static str, Option<f64>) {
    match key {
        "kappa_additive" => ("kappa_decomposition", Some(t.inertia_tol)),
        "conjugation_symmetric" => ("spectral_symmetry_check", Some(REPORT_IMAG_TOL)),
        "nonreal_within_bound" | "real_spectrum" => ("nonreal_count_bound", Some(REPORT_IMAG_TOL)),
        "lrg_violated" => ("lrg_scan", Some(DEFAULT_K_REPORT)),
        "gap_clear" | "spectrum_in_bands" => ("gl_spectrum_report", Some(t.band_tol)),
        "via_t_consistent" => ("spectrum_l_via_t", None),
        _ => ("spectral_report", None),
    }
}

fn rows_to_matrix(rows: &Rows) -> Result<CMatrix> {
    let n = rows.len();
    CMatrix::from_row_major(n, n, rows.iter().flatten().copied().collect()).context(|| "explicit block".into())
}

/// Bounding box of `eigs` padded by `0.5 + 10%`.
fn box_around(eigs: &[C64]) -> Region {
    let r = eigs.iter().fold(0.0f64, |m, z| m.max(z.re.abs()).max(z.im.abs()));
    Region::square(1.1 * r + 0.5)
}

fn block_instance(coeffs: &BlockCoefficients, p: &BlocksParams, t: &Tolerances, z_samples: &[C64]) -> Result<BlockInstanceReport> {
    let label = coeffs.labels.join("; ");
    let ctx = |op: &str| format!("{op} on {label}");
    let direct = spectrum_l_direct(coeffs).context(|| ctx("spectrum_l_direct"))?;
    let report = spectral_report_with(coeffs, direct.eigenvalues.clone(), &p.y_grid, t.inertia_tol).context(|| ctx("spectral_report"))?;
    let region = p.region.unwrap_or_else(|| box_around(&direct.eigenvalues));
    let spectrum = direct
        .eigenvalues
        .iter()
        .zip(&direct.residuals)
        .filter(|(z, _)| region.contains(**z, 0.0))
        .map(|(&z, &residual)| SpectrumPoint { z, residual })
        .collect::<Vec<_>>();
    let frobenius_schur = z_samples
        .iter()
        .map(|&z| frobenius_schur_check(coeffs, z).map(|r| (z, r)))
        .collect::<blockspec_core::Result<Vec<_>>>()
        .context(|| ctx("frobenius_schur_check"))?;
    let n = coeffs.a.rows();
    let via_t = if n <= p.root_search_max_dim {
        let inside: Vec<C64> = spectrum.iter().map(|s| s.z).collect();
        let roots = match spectrum_l_via_t(coeffs, region, RootSearch::default()) {
            Ok(r) => r.roots,
            Err(blockspec_core::Error::NoRootsInRegion) => Vec::new(),
            Err(e) => return Err(e).context(|| ctx("spectrum_l_via_t")),
        };
        let hausdorff = if inside.is_empty() && roots.is_empty() { 0.0 } else { hausdorff_distance(&inside, &roots) };
        Some(ViaTComparison {
            region,
            roots,
            hausdorff,
            tol: t.root_tol,
        })
    } else {
        None
    };
    Ok(BlockInstanceReport {
        label,
        dimension: n,
        report,
        spectrum,
        region,
        frobenius_schur,
        via_t,
    })
}

fn run_blocks(p: &BlocksParams, t: &Tolerances, seed: u64) -> Result<Parts> {
    let mut sampler = InstanceSampler::seeded(seed);
    let instances: Vec<BlockCoefficients> = match &p.source {
        BlockSource::Explicit { a, b, c } => {
            let coeffs = BlockCoefficients::new(rows_to_matrix(a)?, rows_to_matrix(b)?, rows_to_matrix(c)?).context(|| "explicit blocks".into())?;
            vec![coeffs.with_label("explicit")]
        }
        BlockSource::Random { count, min_size, max_size, pattern } => (0..*count)
            .map(|k| {
                let n = sampler.size(*min_size, *max_size);
                sampler.instance(n, *pattern).map(|i| i.coeffs.with_label(format!("instance {k}")))
            })
            .collect::<blockspec_core::Result<_>>()
            .context(|| "random instances".into())?,
    };
    // Sample points are drawn up front so the stream does not depend on threading.
    let z_sets: Vec<Vec<C64>> = instances
        .iter()
        .map(|_| (0..p.z_samples).map(|_| C64::new(sampler.uniform(-3.0, 3.0), sampler.uniform(-3.0, 3.0))).collect())
        .collect();
    let reports = instances
        .par_iter()
        .zip(&z_sets)
        .map(|(c, z)| block_instance(c, p, t, z))
        .collect::<Result<Vec<_>>>()?;

    let mut verdicts = Vec::new();
    let keys: std::collections::BTreeSet<&String> = reports.iter().flat_map(|r| r.report.verdicts.keys()).collect();
    for key in keys {
        let with_key: Vec<bool> = reports.iter().filter_map(|r| r.report.verdicts.get(key).copied()).collect();
        let holding = with_key.iter().filter(|b| **b).count();
        let (op, tol) = block_verdict_source(key, t);
        verdicts.push(Verdict::new(key, holding == with_key.len(), op, tol, format!("holds on {holding} of {} instances", with_key.len())));
    }
    let worst_fs = reports.iter().flat_map(|r| r.frobenius_schur.iter().map(|f| f.1)).fold(0.0, f64::max);
    verdicts.push(Verdict::new(
        "frobenius_schur_residual",
        worst_fs <= t.residual_tol,
        "frobenius_schur_check",
        Some(t.residual_tol),
        format!("largest relative residual {worst_fs:.3e}"),
    ));
    let compared: Vec<f64> = reports.iter().filter_map(|r| r.via_t.as_ref().map(|v| v.hausdorff)).collect();
    if !compared.is_empty() {
        let worst = compared.iter().copied().fold(0.0, f64::max);
        verdicts.push(Verdict::new(
            "spectrum_via_t_matches",
            worst <= t.root_tol,
            "spectrum_l_via_t",
            Some(t.root_tol),
            format!("largest Hausdorff distance {worst:.3e} over {} instances", compared.len()),
        ));
    }
    let provenance = vec![ONE_SIDED_LRG.to_string()];
    Ok((Payload::Blocks(BlocksPayload { instances: reports }), verdicts, provenance))
}

fn run_symbol(p: &SymbolParams, t: &Tolerances) -> Result<Parts> {
    let params = GLSymbolParams::new(p.m, p.nu).context(|| "symbol parameters".into())?;
    let grid = match p.lambda_grid {
        None => default_lambda_grid(),
        Some((max, n)) => (0..n).map(|k| -max + 2.0 * max * k as f64 / (n - 1) as f64).collect(),
    };
    let sym = params.triple();
    let sweep = band_sweep(&params, &grid);
    let lrg = p
        .y_grid
        .par_iter()
        .map(|&y| {
            lrg_sup(&sym, C64::new(0.0, y), &grid, p.integrand).map(|s| SymbolLrgRow {
                y,
                sup: s.value,
                product: y * s.value,
            })
        })
        .collect::<blockspec_core::Result<Vec<_>>>()
        .context(|| "lrg_sup".into())?;
    let lower = 1.0 / (1.0 - p.nu * p.nu);
    let real = real_spectrum_criterion(&sym, &grid).context(|| "real_spectrum_criterion".into())?;

    let mut verdicts = vec![Verdict::new(
        "bands_filled",
        sweep.hausdorff <= t.band_tol,
        "band_sweep",
        Some(t.band_tol),
        format!("Hausdorff distance {:.3e} over {} points", sweep.hausdorff, grid.len()),
    )];
    let min_sup = lrg.iter().map(|r| r.sup).fold(f64::INFINITY, f64::min);
    verdicts.push(Verdict::new(
        "lrg_lower_bound",
        min_sup >= lower,
        "lrg_sup",
        None,
        format!("smallest sup {min_sup:.6} against 1/(1-nu^2) = {lower:.6}"),
    ));
    verdicts.push(Verdict::new("real_spectrum_definitizable", real, "real_spectrum_criterion", None, "grid scan with exact tail"));
    let provenance = vec![
        "symbol suprema are taken over the lambda grid with refinement near zeros of the denominator; the tail is exact".to_string(),
        format!("lrg integrand: {:?}", p.integrand),
    ];
    let payload = SymbolPayload {
        ess_bands: ess_spectrum_bands(&params),
        l_bands: spectrum_l_symbol(&params),
        gap: params.gap(),
        params,
        sweep,
        integrand: p.integrand,
        lrg,
        lrg_lower_bound: lower,
        real_spectrum_definitizable: real,
    };
    Ok((Payload::Symbol(payload), verdicts, provenance))
}

fn run_dsum(p: &DsumParams) -> Result<Parts> {
    let model = DiagonalModel::new(p.weights.clone(), p.rule).context(|| "direct-sum model".into())?;
    let projector = projector_growth_scan(&model).context(|| "projector_growth_scan".into())?;
    let mut verdicts = vec![Verdict::new(
        "singular_critical_point_evidence",
        projector.singular_critical_point_evidence,
        "projector_growth_scan",
        None,
        format!("fitted exponent {:?}", projector.exponent),
    )];
    let (t_inverse, probe) = match p.rule {
        BRule::Identity => {
            let s = t_inverse_norm_scan(&model, p.z).context(|| "t_inverse_norm_scan".into())?;
            verdicts.push(Verdict::new("t_inverse_approaches_one", s.approaches_one, "t_inverse_norm_scan", None, format!("last value {}", s.last)));
            (Some(s), None)
        }
        BRule::Inverse => {
            let pr = definitizability_probe(&model, p.z).context(|| "definitizability_probe".into())?;
            verdicts.push(Verdict::new(
                "t_vanishes_at_plus_minus_one",
                pr.t_at_plus_one == 0.0 && pr.t_at_minus_one == 0.0,
                "definitizability_probe",
                Some(0.0),
                format!("max |T(1)| = {:e}, max |T(-1)| = {:e}", pr.t_at_plus_one, pr.t_at_minus_one),
            ));
            verdicts.push(Verdict::new("resolvent_empty_in_limit", pr.resolvent_empty_in_limit, "definitizability_probe", None, "linear growth of the T inverse norm"));
            (None, Some(pr))
        }
    };
    let provenance = vec!["finite truncation of a direct sum: growth verdicts are evidence along the weights, not proofs".to_string()];
    let payload = DsumPayload {
        rule: p.rule,
        size: p.weights.len(),
        projector,
        t_inverse,
        probe,
    };
    Ok((Payload::Dsum(payload), verdicts, provenance))
}

fn run_gl(p: &GlParams, t: &Tolerances) -> Result<Parts> {
    let grid = Grid1D::new(p.half_length, p.points).context(|| "GL grid".into())?;
    let d = assemble_gl(&grid, p.m, p.nu, &p.potential).context(|| "assemble_gl".into())?;
    let options = GlReportOptions {
        region: p.region,
        y_grid: p.y_grid.clone(),
        band_tol: t.band_tol,
        inertia_tol: t.inertia_tol,
        kernel_checks: p.kernel_checks,
        ..GlReportOptions::default()
    };
    let spectrum = gl_spectrum_report(&d, &options).context(|| "gl_spectrum_report".into())?;
    let factorization = p
        .factorization_y
        .par_iter()
        .map(|&y| factorization_identity_check(&d, y))
        .collect::<blockspec_core::Result<Vec<_>>>()
        .context(|| "factorization_identity_check".into())?;
    let positivity = if p.positivity {
        Some(positivity_equivalence(&grid, p.m, p.nu, &p.potential, t.inertia_tol).context(|| "positivity_equivalence".into())?)
    } else {
        None
    };
    let params = GLSymbolParams::new(p.m, p.nu).context(|| "symbol parameters".into())?;

    let mut verdicts: Vec<Verdict> = spectrum
        .report
        .verdicts
        .iter()
        .map(|(k, &v)| {
            let (op, tol) = block_verdict_source(k, t);
            let tol = if k == "via_t_consistent" { Some(spectrum.via_t.tol) } else { tol };
            Verdict::new(k, v, op, tol, "")
        })
        .collect();
    let worst = factorization.iter().map(|f| f.residual).fold(0.0, f64::max);
    verdicts.push(Verdict::new(
        "factorization_identity",
        worst <= t.residual_tol && factorization.iter().all(|f| f.bound_ok),
        "factorization_identity_check",
        Some(t.residual_tol),
        format!("largest relative residual {worst:.3e}"),
    ));
    if let Some(pe) = &positivity {
        verdicts.push(Verdict::new("positivity_equivalent", pe.equivalent, "positivity_equivalence", Some(pe.tol), format!("{:?}", pe.min_eigenvalues)));
    }

    let mut provenance = vec![
        format!(
            "finite-difference truncation on [-{0}, {0}] with {1} nodes and Dirichlet ends: essential spectrum appears as discrete eigenvalues",
            p.half_length, p.points
        ),
        ONE_SIDED_LRG.to_string(),
        format!("spectrum via T checked by {:?} on {} eigenvalues", spectrum.via_t.mode, spectrum.via_t.checked),
    ];
    if !spectrum.boundary_artifacts.is_empty() {
        provenance.push(format!("{} eigenvalues have eigenvectors concentrated near the ends of the interval", spectrum.boundary_artifacts.len()));
    }
    let payload = GlPayload {
        ess_bands: ess_spectrum_bands(&params),
        region: p.region,
        spectrum,
        factorization,
        positivity,
    };
    Ok((Payload::Gl(Box::new(payload)), verdicts, provenance))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::config::{parse_config_str, ScenarioKind};
    use std::path::Path;

    fn config(text: &str) -> ScenarioConfig {
        parse_config_str(text, Path::new("/tmp/x.cfg")).unwrap()
    }

    #[test]
    fn dsum_weights_one_to_hundred() {
        let b = run_scenario(&config("[scenario]\nkind = dsum\n[dsum]\nweights = 1..100\n")).unwrap();
        let Payload::Dsum(d) = &b.payload else { panic!() };
        assert_eq!(d.projector.rows.len(), 100);
        // Least-squares slope of ln((a+1)/(2 sqrt a)) against ln a.
        let pts: Vec<(f64, f64)> = (1..=100).map(|a| a as f64).map(|a| (a.ln(), ((a + 1.0) / (2.0 * a.sqrt())).ln())).collect();
        let n = pts.len() as f64;
        let (mx, my) = (pts.iter().map(|p| p.0).sum::<f64>() / n, pts.iter().map(|p| p.1).sum::<f64>() / n);
        let slope = pts.iter().map(|p| (p.0 - mx) * (p.1 - my)).sum::<f64>() / pts.iter().map(|p| (p.0 - mx).powi(2)).sum::<f64>();
        let e = d.projector.exponent.unwrap();
        assert!((e - slope).abs() < 1e-10, "{e} vs {slope}");
        assert!(b.verdict("singular_critical_point_evidence").unwrap().holds);
    }

    #[test]
    fn blocks_are_deterministic() {
        let c = config("[scenario]\nkind = blocks\nseed = 7\n[blocks]\ncount = 4\nmax_size = 3\n");
        let a = serde_json::to_string(&run_scenario(&c).unwrap()).unwrap();
        let b = serde_json::to_string(&run_scenario(&c).unwrap()).unwrap();
        assert_eq!(a, b);
        let bundle = run_scenario(&c).unwrap();
        assert!(bundle.verdict("kappa_additive").unwrap().holds);
        assert!(bundle.verdict("frobenius_schur_residual").unwrap().holds);
        assert!(bundle.verdict("spectrum_via_t_matches").unwrap().holds);
    }

    #[test]
    fn small_free_gl() {
        let c = config("[scenario]\nkind = gl\n[gl]\nm = 1\nnu = 0.6\nhalf_length = 10\npoints = 81\n");
        assert_eq!(c.kind(), ScenarioKind::Gl);
        let b = run_scenario(&c).unwrap();
        let Payload::Gl(g) = &b.payload else { panic!() };
        assert_eq!(g.spectrum.kappa.kappa_a_cal.n_neg, 0);
        assert!((g.spectrum.gap - 0.8).abs() < 1e-15);
        assert_eq!(g.lrg().points.len(), 6);
        for v in &b.verdicts {
            assert!(!v.operation.is_empty());
        }
        assert!(b.verdict("gap_clear").unwrap().holds);
        assert!(b.verdict("factorization_identity").unwrap().holds);
    }

    #[test]
    fn symbol_bands() {
        let c = config("[scenario]\nkind = symbol\n[symbol]\nm = 2\nnu = 0.6\n");
        let b = run_scenario(&c).unwrap();
        let Payload::Symbol(s) = &b.payload else { panic!() };
        assert_eq!(s.ess_bands.intervals.len(), 2);
        assert!(b.verdict("bands_filled").unwrap().holds);
        assert!(b.verdict("lrg_lower_bound").unwrap().holds);
    }
}
