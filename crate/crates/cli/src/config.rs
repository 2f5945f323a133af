//! Scenario configuration: flat `key = value` text with `[section]` headers.
//!
//! ```text
//! [scenario]
//! kind = gl
//! out = results/free
//! seed = 7
//!
//! [gl]
//! m = 1
//! nu = 0.6
//! potential = square_well
//! depth = 2
//! width = 2
//!
//! [tolerances]
//! band_tol = 0.02
//! ```
//!
//! `#` starts a comment and `;` comments out a whole line. Lists are comma
//! separated. Matrices are rows separated by `;` with comma separated complex
//! entries (`1`, `-2.5i`, `0.3+1e-2i`), or a file with one row per line.
//! Relative paths are resolved against the directory of the configuration file.

use std::collections::BTreeMap;
use std::path::{Path, PathBuf};

use blockspec_core::block::{Region, SignPattern, DEFAULT_INERTIA_TOL};
use blockspec_core::dsum::BRule;
use blockspec_core::numerics::C64;
use blockspec_core::schrodinger::{Potential, DEFAULT_HALF_LENGTH, DEFAULT_POINTS, GL_BAND_TOL};
use blockspec_core::symbol::{LrgIntegrand, BAND_TOL};
use serde::{Deserialize, Serialize};

use crate::error::{CliError, Result};

#[derive(Clone, Copy, Debug, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ScenarioKind {
    Blocks,
    Symbol,
    Dsum,
    Gl,
}

impl ScenarioKind {
    pub fn name(self) -> &'static str {
        match self {
            ScenarioKind::Blocks => "blocks",
            ScenarioKind::Symbol => "symbol",
            ScenarioKind::Dsum => "dsum",
            ScenarioKind::Gl => "gl",
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct ScenarioConfig {
    pub out: PathBuf,
    pub seed: u64,
    pub params: Params,
    pub tolerances: Tolerances,
}

impl ScenarioConfig {
    pub fn kind(&self) -> ScenarioKind {
        match self.params {
            Params::Blocks(_) => ScenarioKind::Blocks,
            Params::Symbol(_) => ScenarioKind::Symbol,
            Params::Dsum(_) => ScenarioKind::Dsum,
            Params::Gl(_) => ScenarioKind::Gl,
        }
    }

    /// Configuration with every default filled in.
    pub fn with_defaults(kind: ScenarioKind) -> Self {
        let params = match kind {
            ScenarioKind::Blocks => Params::Blocks(BlocksParams::default()),
            ScenarioKind::Symbol => Params::Symbol(SymbolParams::default()),
            ScenarioKind::Dsum => Params::Dsum(DsumParams::default()),
            ScenarioKind::Gl => Params::Gl(GlParams::default()),
        };
        Self {
            out: PathBuf::from("out"),
            seed: 0,
            params,
            tolerances: Tolerances::defaults(kind),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Params {
    Blocks(BlocksParams),
    Symbol(SymbolParams),
    Dsum(DsumParams),
    Gl(GlParams),
}

#[derive(Clone, Copy, Debug, PartialEq, Serialize, Deserialize)]
pub struct Tolerances {
    /// Hausdorff distance for band sweeps, distance to the bands for GL spectra.
    pub band_tol: f64,
    pub inertia_tol: f64,
    /// Relative residual of the Frobenius–Schur and GL factorization identities.
    pub residual_tol: f64,
    /// Hausdorff distance between the direct and `det T` spectra.
    pub root_tol: f64,
}

impl Tolerances {
    pub fn defaults(kind: ScenarioKind) -> Self {
        let (band_tol, inertia_tol) = match kind {
            ScenarioKind::Gl => (GL_BAND_TOL, 1e-8),
            _ => (BAND_TOL, DEFAULT_INERTIA_TOL),
        };
        Self {
            band_tol,
            inertia_tol,
            residual_tol: 1e-9,
            root_tol: blockspec_core::block::ROOT_MATCH_TOL,
        }
    }
}

/// Row-major complex matrix as written in the configuration.
pub type Rows = Vec<Vec<C64>>;

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "source", rename_all = "snake_case")]
pub enum BlockSource {
    Explicit { a: Rows, b: Rows, c: Rows },
    Random { count: usize, min_size: usize, max_size: usize, pattern: SignPattern },
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct BlocksParams {
    pub source: BlockSource,
    pub y_grid: Vec<f64>,
    /// Points `z` per instance for the Frobenius–Schur residual.
    pub z_samples: usize,
    /// Region for the `det T` root search and `spectrum.csv`; `None` boxes the
    /// direct spectrum of each instance.
    pub region: Option<Region>,
    /// Instances above this dimension skip the root search.
    pub root_search_max_dim: usize,
}

impl Default for BlocksParams {
    fn default() -> Self {
        Self {
            source: BlockSource::Random {
                count: 20,
                min_size: 1,
                max_size: 6,
                pattern: SignPattern::Random,
            },
            y_grid: vec![1.0, 10.0, 100.0, 1000.0],
            z_samples: 5,
            region: None,
            root_search_max_dim: 6,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct SymbolParams {
    pub m: f64,
    pub nu: f64,
    /// Uniform grid `[−max, max]` with this many points; `None` selects the
    /// default mixed uniform/geometric grid.
    pub lambda_grid: Option<(f64, usize)>,
    pub y_grid: Vec<f64>,
    pub integrand: LrgIntegrand,
}

impl Default for SymbolParams {
    fn default() -> Self {
        Self {
            m: 1.0,
            nu: 0.5,
            lambda_grid: None,
            y_grid: vec![1.0, 10.0, 100.0],
            integrand: LrgIntegrand::LeadingEntry,
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct DsumParams {
    pub weights: Vec<f64>,
    pub rule: BRule,
    /// Defaults to `i` for the identity rule and `2i` for the inverse rule.
    pub z: C64,
}

impl Default for DsumParams {
    fn default() -> Self {
        Self {
            weights: (1..=100).map(f64::from).collect(),
            rule: BRule::Identity,
            z: C64::new(0.0, 1.0),
        }
    }
}

#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
pub struct GlParams {
    pub m: f64,
    pub nu: f64,
    pub half_length: f64,
    pub points: usize,
    pub potential: Potential,
    pub potential_file: Option<PathBuf>,
    pub y_grid: Vec<f64>,
    pub factorization_y: Vec<f64>,
    pub region: Region,
    pub kernel_checks: usize,
    pub positivity: bool,
}

impl Default for GlParams {
    fn default() -> Self {
        let report = blockspec_core::schrodinger::GlReportOptions::default();
        Self {
            m: 1.0,
            nu: 0.5,
            half_length: DEFAULT_HALF_LENGTH,
            points: DEFAULT_POINTS,
            potential: Potential::Zero,
            potential_file: None,
            y_grid: report.y_grid,
            factorization_y: vec![0.5, 1.0, 3.0, 10.0, 50.0],
            region: report.region,
            kernel_checks: report.kernel_checks,
            positivity: true,
        }
    }
}

struct Entry {
    value: String,
    line: usize,
}

/// Raw sections with line numbers; entries are removed as they are consumed
/// so that leftovers can be reported as unknown keys.
struct Raw {
    path: PathBuf,
    base: PathBuf,
    sections: BTreeMap<String, (usize, BTreeMap<String, Entry>)>,
}

const SECTIONS: [&str; 6] = ["scenario", "blocks", "symbol", "dsum", "gl", "tolerances"];

impl Raw {
    fn parse(text: &str, path: &Path) -> Result<Self> {
        let perr = |line: usize, msg: String| CliError::Parse {
            path: path.to_path_buf(),
            line,
            msg,
        };
        let mut sections: BTreeMap<String, (usize, BTreeMap<String, Entry>)> = BTreeMap::new();
        let mut current: Option<String> = None;
        for (k, raw) in text.lines().enumerate() {
            let line = k + 1;
            // ';' also separates matrix rows, so it only comments out whole lines.
            let body = raw.split('#').next().unwrap_or("").trim();
            if body.is_empty() || body.starts_with(';') {
                continue;
            }
            if let Some(rest) = body.strip_prefix('[') {
                let name = rest.strip_suffix(']').ok_or_else(|| perr(line, format!("unterminated section header '{body}'")))?.trim();
                if !SECTIONS.contains(&name) {
                    return Err(perr(line, format!("unknown section [{name}]; expected one of {}", SECTIONS.join(", "))));
                }
                if sections.contains_key(name) {
                    return Err(perr(line, format!("section [{name}] appears twice")));
                }
                sections.insert(name.to_string(), (line, BTreeMap::new()));
                current = Some(name.to_string());
                continue;
            }
            let (key, value) = body.split_once('=').ok_or_else(|| perr(line, format!("expected 'key = value', found '{body}'")))?;
            let key = key.trim();
            if key.is_empty() || !key.chars().all(|c| c.is_ascii_alphanumeric() || c == '_') {
                return Err(perr(line, format!("invalid key '{key}'")));
            }
            let section = current.as_ref().ok_or_else(|| perr(line, format!("key '{key}' appears before any [section] header")))?;
            let entries = &mut sections.get_mut(section).expect("section inserted").1;
            if entries.contains_key(key) {
                return Err(perr(line, format!("duplicate key '{key}' in [{section}]")));
            }
            entries.insert(
                key.to_string(),
                Entry {
                    value: value.trim().to_string(),
                    line,
                },
            );
        }
        let base = path.parent().map(Path::to_path_buf).unwrap_or_default();
        Ok(Self {
            path: path.to_path_buf(),
            base,
            sections,
        })
    }

    fn verr(&self, line: Option<usize>, msg: impl Into<String>) -> CliError {
        CliError::Validation {
            path: self.path.clone(),
            line,
            msg: msg.into(),
        }
    }

    fn take(&mut self, section: &str, key: &str) -> Option<Entry> {
        self.sections.get_mut(section).and_then(|s| s.1.remove(key))
    }

    fn parsed<T>(&mut self, section: &str, key: &str, what: &str, parse: impl Fn(&str) -> Option<T>) -> Result<Option<(T, usize)>> {
        match self.take(section, key) {
            None => Ok(None),
            Some(e) => match parse(&e.value) {
                Some(v) => Ok(Some((v, e.line))),
                None => Err(self.verr(Some(e.line), format!("{section}.{key}: expected {what}, found '{}'", e.value))),
            },
        }
    }

    fn f64(&mut self, section: &str, key: &str) -> Result<Option<(f64, usize)>> {
        self.parsed(section, key, "a finite number", |s| s.parse::<f64>().ok().filter(|x| x.is_finite()))
    }

    fn positive(&mut self, section: &str, key: &str) -> Result<Option<f64>> {
        match self.f64(section, key)? {
            Some((x, line)) if !(x > 0.0) => Err(self.verr(Some(line), format!("{section}.{key} must be positive, got {x}"))),
            other => Ok(other.map(|p| p.0)),
        }
    }

    fn usize(&mut self, section: &str, key: &str) -> Result<Option<(usize, usize)>> {
        self.parsed(section, key, "a non-negative integer", |s| s.parse::<usize>().ok())
    }

    fn list(&mut self, section: &str, key: &str) -> Result<Option<(Vec<f64>, usize)>> {
        let r = self.parsed(section, key, "a comma separated list of finite numbers", parse_list)?;
        if let Some((v, line)) = &r {
            if v.is_empty() {
                return Err(self.verr(Some(*line), format!("{section}.{key}: grid must be non-empty")));
            }
        }
        Ok(r)
    }

    fn positive_list(&mut self, section: &str, key: &str) -> Result<Option<Vec<f64>>> {
        match self.list(section, key)? {
            Some((v, line)) if v.iter().any(|x| !(*x > 0.0)) => Err(self.verr(Some(line), format!("{section}.{key}: values must be positive"))),
            other => Ok(other.map(|p| p.0)),
        }
    }

    fn path(&mut self, section: &str, key: &str) -> Result<Option<(PathBuf, usize)>> {
        Ok(self.take(section, key).map(|e| {
            let p = PathBuf::from(&e.value);
            (if p.is_absolute() { p } else { self.base.join(p) }, e.line)
        }))
    }

    fn existing_file(&mut self, section: &str, key: &str) -> Result<Option<(PathBuf, usize)>> {
        match self.path(section, key)? {
            Some((p, line)) if !p.is_file() => Err(self.verr(Some(line), format!("{section}.{key}: file {} does not exist", p.display()))),
            other => Ok(other),
        }
    }

    fn region(&mut self, section: &str, key: &str) -> Result<Option<Region>> {
        match self.list(section, key)? {
            None => Ok(None),
            Some((v, line)) => {
                if v.len() != 4 || !(v[0] < v[1]) || !(v[2] < v[3]) {
                    return Err(self.verr(Some(line), format!("{section}.{key}: expected 're_min, re_max, im_min, im_max' with min < max")));
                }
                Ok(Some(Region::new((v[0], v[1]), (v[2], v[3]))))
            }
        }
    }

    fn matrix(&mut self, section: &str, key: &str) -> Result<Option<(Rows, usize)>> {
        let inline = self.take(section, key);
        let file = self.existing_file(section, &format!("{key}_file"))?;
        match (inline, file) {
            (Some(e), Some(_)) => Err(self.verr(Some(e.line), format!("{section}: give either {key} or {key}_file, not both"))),
            (Some(e), None) => parse_rows(e.value.split(';')).map(|r| Some((r, e.line))).map_err(|msg| self.verr(Some(e.line), format!("{section}.{key}: {msg}"))),
            (None, Some((p, line))) => {
                let text = std::fs::read_to_string(&p).map_err(CliError::io(&p))?;
                let lines = text.lines().map(|l| l.split('#').next().unwrap_or("")).filter(|l| !l.trim().is_empty());
                parse_rows(lines).map(|r| Some((r, line))).map_err(|msg| self.verr(Some(line), format!("{}: {msg}", p.display())))
            }
            (None, None) => Ok(None),
        }
    }

    fn finish(self) -> Result<()> {
        for (name, (_, entries)) in &self.sections {
            if let Some((key, e)) = entries.iter().next() {
                return Err(self.verr(Some(e.line), format!("unknown key '{key}' in [{name}]")));
            }
        }
        Ok(())
    }
}

fn parse_list(s: &str) -> Option<Vec<f64>> {
    s.split(',').map(|t| t.trim().parse::<f64>().ok().filter(|x| x.is_finite())).collect()
}

/// `1`, `-2i`, `0.5+1e-3i`; `i` alone is not accepted.
pub fn parse_complex(s: &str) -> Option<C64> {
    let s: String = s.chars().filter(|c| !c.is_whitespace()).collect();
    let z = s.parse::<C64>().ok()?;
    (z.re.is_finite() && z.im.is_finite()).then_some(z)
}

fn parse_rows<'a>(rows: impl Iterator<Item = &'a str>) -> std::result::Result<Rows, String> {
    let rows: Rows = rows
        .map(|r| r.split([',', ' ', '\t']).filter(|t| !t.is_empty()).map(|t| parse_complex(t).ok_or_else(|| format!("cannot parse entry '{t}'"))).collect())
        .collect::<std::result::Result<_, _>>()?;
    let n = rows.len();
    if n == 0 {
        return Err("matrix is empty".into());
    }
    if let Some(k) = rows.iter().position(|r| r.len() != n) {
        return Err(format!("matrix must be square: row {} has {} entries, expected {n}", k + 1, rows[k].len()));
    }
    Ok(rows)
}

/// `1..100` (unit steps, inclusive) or a comma separated list.
fn parse_weights(s: &str) -> Option<Vec<f64>> {
    if let Some((lo, hi)) = s.split_once("..") {
        let (lo, hi) = (lo.trim().parse::<u64>().ok()?, hi.trim().parse::<u64>().ok()?);
        return (lo <= hi).then(|| (lo..=hi).map(|k| k as f64).collect());
    }
    parse_list(s)
}

fn parse_pattern(s: &str) -> Option<SignPattern> {
    match s {
        "definite" => Some(SignPattern::Definite),
        "random" => Some(SignPattern::Random),
        "indefinite" => Some(SignPattern::Indefinite),
        _ => None,
    }
}

fn parse_bool(s: &str) -> Option<bool> {
    match s {
        "true" | "yes" | "1" => Some(true),
        "false" | "no" | "0" => Some(false),
        _ => None,
    }
}

pub fn parse_config(path: &Path) -> Result<ScenarioConfig> {
    let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
    parse_config_str(&text, path)
}

/// Parses `text` as if read from `path`, which anchors relative file names.
pub fn parse_config_str(text: &str, path: &Path) -> Result<ScenarioConfig> {
    let mut raw = Raw::parse(text, path)?;
    let kind_entry = raw.take("scenario", "kind").ok_or_else(|| raw.verr(None, "[scenario] kind is required"))?;
    let kind = match kind_entry.value.as_str() {
        "blocks" => ScenarioKind::Blocks,
        "symbol" => ScenarioKind::Symbol,
        "dsum" => ScenarioKind::Dsum,
        "gl" => ScenarioKind::Gl,
        other => return Err(raw.verr(Some(kind_entry.line), format!("scenario.kind must be one of blocks, symbol, dsum, gl; got '{other}'"))),
    };
    for other in ["blocks", "symbol", "dsum", "gl"] {
        if other != kind.name() {
            if let Some((line, _)) = raw.sections.get(other) {
                return Err(raw.verr(Some(*line), format!("section [{other}] does not apply to a {} scenario", kind.name())));
            }
        }
    }
    let mut config = ScenarioConfig::with_defaults(kind);
    if let Some((p, _)) = raw.path("scenario", "out")? {
        config.out = p;
    }
    if let Some((s, _)) = raw.parsed("scenario", "seed", "a non-negative integer", |s| s.parse::<u64>().ok())? {
        config.seed = s;
    }

    config.params = match kind {
        ScenarioKind::Blocks => Params::Blocks(blocks_params(&mut raw)?),
        ScenarioKind::Symbol => Params::Symbol(symbol_params(&mut raw)?),
        ScenarioKind::Dsum => Params::Dsum(dsum_params(&mut raw)?),
        ScenarioKind::Gl => Params::Gl(gl_params(&mut raw)?),
    };

    let t = &mut config.tolerances;
    for (key, slot) in [
        ("band_tol", &mut t.band_tol),
        ("inertia_tol", &mut t.inertia_tol),
        ("residual_tol", &mut t.residual_tol),
        ("root_tol", &mut t.root_tol),
    ] {
        if let Some(v) = raw.positive("tolerances", key)? {
            *slot = v;
        }
    }
    raw.finish()?;
    Ok(config)
}

fn check_nu(raw: &Raw, section: &str, nu: Option<(f64, usize)>, default: f64) -> Result<f64> {
    match nu {
        None => Ok(default),
        Some((nu, line)) if !(nu.abs() < 1.0) || nu == 0.0 => Err(raw.verr(Some(line), format!("{section}.nu = {nu} is outside ν ∈ (−1,1) \\ {{0}}"))),
        Some((nu, _)) => Ok(nu),
    }
}

fn check_mass(raw: &Raw, section: &str, m: Option<(f64, usize)>, default: f64) -> Result<f64> {
    match m {
        None => Ok(default),
        Some((m, line)) if !(m > 0.0) => Err(raw.verr(Some(line), format!("{section}.m = {m} must be positive"))),
        Some((m, _)) => Ok(m),
    }
}

fn gl_params(raw: &mut Raw) -> Result<GlParams> {
    let s = "gl";
    let mut p = GlParams::default();
    let m = raw.f64(s, "m")?;
    p.m = check_mass(raw, s, m, p.m)?;
    let nu = raw.f64(s, "nu")?;
    p.nu = check_nu(raw, s, nu, p.nu)?;
    if let Some(l) = raw.positive(s, "half_length")? {
        p.half_length = l;
    }
    if let Some((n, line)) = raw.usize(s, "points")? {
        if n < 3 {
            return Err(raw.verr(Some(line), format!("gl.points must be at least 3, got {n}")));
        }
        p.points = n;
    }
    let kind = raw.take(s, "potential");
    let (depth, width) = (raw.f64(s, "depth")?, raw.positive(s, "width")?);
    let (amplitude, sigma) = (raw.f64(s, "amplitude")?, raw.positive(s, "sigma")?);
    let file = raw.existing_file(s, "potential_file")?;
    let kind_name = kind.as_ref().map(|e| e.value.clone()).unwrap_or_else(|| if file.is_some() { "file".into() } else { "zero".into() });
    let line = kind.as_ref().map(|e| e.line);
    let need = |x: Option<f64>, name: &str| x.ok_or_else(|| raw.verr(line, format!("potential '{kind_name}' needs gl.{name}")));
    p.potential = match kind_name.as_str() {
        "zero" => Potential::Zero,
        "square_well" => Potential::square_well(need(depth.map(|d| d.0), "depth")?, need(width, "width")?).map_err(|e| raw.verr(line, e.to_string()))?,
        "gaussian" => Potential::gaussian(need(amplitude.map(|a| a.0), "amplitude")?, need(sigma, "sigma")?).map_err(|e| raw.verr(line, e.to_string()))?,
        "file" => {
            let (path, fline) = file.clone().ok_or_else(|| raw.verr(line, "potential 'file' needs gl.potential_file"))?;
            p.potential_file = Some(path.clone());
            Potential::from_csv(&path).map_err(|e| raw.verr(Some(fline), e.to_string()))?
        }
        other => return Err(raw.verr(line, format!("gl.potential must be zero, square_well, gaussian or file; got '{other}'"))),
    };
    if let Some(y) = raw.positive_list(s, "y_grid")? {
        p.y_grid = y;
    }
    if let Some(y) = raw.positive_list(s, "factorization_y")? {
        p.factorization_y = y;
    }
    if let Some(r) = raw.region(s, "region")? {
        p.region = r;
    }
    if let Some((k, _)) = raw.usize(s, "kernel_checks")? {
        p.kernel_checks = k;
    }
    if let Some((b, _)) = raw.parsed(s, "positivity", "true or false", parse_bool)? {
        p.positivity = b;
    }
    Ok(p)
}

fn symbol_params(raw: &mut Raw) -> Result<SymbolParams> {
    let s = "symbol";
    let mut p = SymbolParams::default();
    let m = raw.f64(s, "m")?;
    p.m = check_mass(raw, s, m, p.m)?;
    let nu = raw.f64(s, "nu")?;
    p.nu = check_nu(raw, s, nu, p.nu)?;
    let max = raw.positive(s, "lambda_max")?;
    let points = raw.usize(s, "lambda_points")?;
    p.lambda_grid = match (max, points) {
        (None, None) => None,
        (Some(max), Some((n, _))) if n >= 2 => Some((max, n)),
        (_, Some((n, line))) if n < 2 => return Err(raw.verr(Some(line), "symbol.lambda_points must be at least 2")),
        _ => return Err(raw.verr(None, "symbol.lambda_max and symbol.lambda_points must be given together")),
    };
    if let Some(y) = raw.positive_list(s, "y_grid")? {
        p.y_grid = y;
    }
    let integrand = raw.parsed(s, "integrand", "full or leading_entry", |v| match v {
        "full" => Some(LrgIntegrand::Full),
        "leading_entry" => Some(LrgIntegrand::LeadingEntry),
        _ => None,
    })?;
    if let Some((i, _)) = integrand {
        p.integrand = i;
    }
    Ok(p)
}

fn dsum_params(raw: &mut Raw) -> Result<DsumParams> {
    let s = "dsum";
    let mut p = DsumParams::default();
    if let Some((w, line)) = raw.parsed(s, "weights", "a range 'lo..hi' or a comma separated list", parse_weights)? {
        if w.iter().any(|x| !(*x > 0.0)) {
            return Err(raw.verr(Some(line), "dsum.weights must be strictly positive"));
        }
        if w.windows(2).any(|v| !(v[1] > v[0])) {
            return Err(raw.verr(Some(line), "dsum.weights must be strictly increasing"));
        }
        p.weights = w;
    }
    if let Some((rule, _)) = raw.parsed(s, "rule", "identity or inverse", |v| match v {
        "identity" => Some(BRule::Identity),
        "inverse" => Some(BRule::Inverse),
        _ => None,
    })? {
        p.rule = rule;
    }
    p.z = match raw.parsed(s, "z", "a complex number such as 2i", parse_complex)? {
        Some((z, _)) => z,
        None if p.rule == BRule::Inverse => C64::new(0.0, 2.0),
        None => C64::new(0.0, 1.0),
    };
    Ok(p)
}

fn blocks_params(raw: &mut Raw) -> Result<BlocksParams> {
    let s = "blocks";
    let mut p = BlocksParams::default();
    let a = raw.matrix(s, "a")?;
    let b = raw.matrix(s, "b")?;
    let c = raw.matrix(s, "c")?;
    let count = raw.usize(s, "count")?;
    let min_size = raw.usize(s, "min_size")?;
    let max_size = raw.usize(s, "max_size")?;
    let pattern = raw.parsed(s, "pattern", "definite, random or indefinite", parse_pattern)?;
    match (a, b, c) {
        (Some((a, line)), Some((b, _)), Some((c, _))) => {
            if let Some(l) = count.map(|c| c.1).or(min_size.map(|c| c.1)).or(max_size.map(|c| c.1)).or(pattern.map(|c| c.1)) {
                return Err(raw.verr(Some(l), "random-instance keys cannot be combined with explicit matrices"));
            }
            if a.len() != b.len() || a.len() != c.len() {
                return Err(raw.verr(Some(line), format!("blocks a, b, c must share one size, got {}, {}, {}", a.len(), b.len(), c.len())));
            }
            p.source = BlockSource::Explicit { a, b, c };
        }
        (None, None, None) => {
            let BlockSource::Random {
                count: d_count,
                min_size: d_min,
                max_size: d_max,
                pattern: d_pattern,
            } = p.source
            else {
                unreachable!("default source is random")
            };
            let lo = min_size.map_or(d_min, |m| m.0);
            let hi = max_size.map_or(d_max, |m| m.0);
            if lo == 0 || lo > hi {
                return Err(raw.verr(min_size.or(max_size).map(|m| m.1), format!("blocks sizes need 1 ≤ min_size ≤ max_size, got {lo}..{hi}")));
            }
            p.source = BlockSource::Random {
                count: count.map_or(d_count, |c| c.0),
                min_size: lo,
                max_size: hi,
                pattern: pattern.map_or(d_pattern, |p| p.0),
            };
        }
        (a, b, c) => {
            let line = a.map(|x| x.1).or(b.map(|x| x.1)).or(c.map(|x| x.1));
            return Err(raw.verr(line, "explicit blocks need all of a, b and c"));
        }
    }
    if let Some(y) = raw.positive_list(s, "y_grid")? {
        p.y_grid = y;
    }
    if let Some((z, _)) = raw.usize(s, "z_samples")? {
        p.z_samples = z;
    }
    p.region = raw.region(s, "region")?;
    if let Some((d, _)) = raw.usize(s, "root_search_max_dim")? {
        p.root_search_max_dim = d;
    }
    Ok(p)
}

#[cfg(test)]
mod tests {
    use super::*;

    fn parse(text: &str) -> Result<ScenarioConfig> {
        parse_config_str(text, Path::new("/tmp/test.cfg"))
    }

    #[test]
    fn minimal_gl_gets_defaults() {
        let c = parse("[scenario]\nkind = gl\n[gl]\nm = 1\nnu = 0.5\n").unwrap();
        let Params::Gl(g) = &c.params else { panic!() };
        assert_eq!((g.half_length, g.points), (40.0, 800));
        assert_eq!(g.potential, Potential::Zero);
        assert_eq!(c.tolerances.band_tol, GL_BAND_TOL);
    }

    #[test]
    fn nu_outside_interval_is_rejected() {
        let err = parse("[scenario]\nkind = gl\n[gl]\nm = 1\nnu = 1.5\n").unwrap_err();
        let msg = err.to_string();
        assert!(matches!(err, CliError::Validation { line: Some(5), .. }), "{msg}");
        assert!(msg.contains("ν ∈ (−1,1)"), "{msg}");
        assert_eq!(err.exit_code(), 2);
    }

    #[test]
    fn missing_potential_file() {
        let err = parse("[scenario]\nkind = gl\n[gl]\npotential = file\npotential_file = /no/such/v.csv\n").unwrap_err();
        assert!(matches!(err, CliError::Validation { line: Some(5), .. }), "{err}");
    }

    #[test]
    fn parse_errors_carry_lines() {
        let cases = [
            ("[scenario]\nkind = gl\nnonsense\n", 3),
            ("kind = gl\n", 1),
            ("[scenario]\nkind = gl\n[oops]\n", 3),
            ("[scenario]\nkind = gl\nkind = gl\n", 3),
        ];
        for (text, line) in cases {
            match parse(text).unwrap_err() {
                CliError::Parse { line: l, .. } => assert_eq!(l, line, "{text}"),
                e => panic!("{text}: {e}"),
            }
        }
    }

    #[test]
    fn validation_errors() {
        for text in [
            "[scenario]\nkind = gl\n[gl]\nbogus = 1\n",
            "[scenario]\nkind = gl\n[tolerances]\nband_tol = 0\n",
            "[scenario]\nkind = gl\n[gl]\ny_grid =\n",
            "[scenario]\nkind = gl\n[dsum]\nrule = identity\n",
            "[scenario]\nkind = dsum\n[dsum]\nweights = 3, 2\n",
            "[scenario]\nkind = blocks\n[blocks]\na = 1, 0; 0\nb = 1\nc = 1\n",
            "[scenario]\nkind = blocks\n[blocks]\na = 1\n",
            "[scenario]\nkind = symbol\n[symbol]\nlambda_max = 10\n",
            "[scenario]\nkind = other\n",
            "[gl]\nm = 1\n",
        ] {
            assert!(matches!(parse(text), Err(CliError::Validation { .. })), "{text}");
        }
    }

    #[test]
    fn explicit_blocks_and_weights() {
        let c = parse("[scenario]\nkind = blocks\nseed = 3\n[blocks]\na = 2, 0; 0, -1\nb = 1, 0.5-1i; 0.5+1i, 1\nc = 0, 1i; 1, 0\n").unwrap();
        let Params::Blocks(b) = &c.params else { panic!() };
        let BlockSource::Explicit { b: bm, .. } = &b.source else { panic!() };
        assert_eq!(bm[0][1], C64::new(0.5, -1.0));
        assert_eq!(c.seed, 3);

        let d = parse("[scenario]\nkind = dsum\n[dsum]\nweights = 1..100\nrule = inverse\n").unwrap();
        let Params::Dsum(d) = &d.params else { panic!() };
        assert_eq!(d.weights.len(), 100);
        assert_eq!(d.z, C64::new(0.0, 2.0));
    }

    #[test]
    fn relative_paths_follow_the_config() {
        let dir = tempfile::tempdir().unwrap();
        std::fs::write(dir.path().join("v.csv"), "x,V\n-1,0\n0,-2\n1,0\n").unwrap();
        std::fs::write(dir.path().join("a.txt"), "# A\n1 0\n0 2\n").unwrap();
        let cfg = dir.path().join("run.cfg");
        std::fs::write(&cfg, "[scenario]\nkind = gl\nout = res\n[gl]\npotential_file = v.csv # samples\n").unwrap();
        let c = parse_config(&cfg).unwrap();
        assert_eq!(c.out, dir.path().join("res"));
        let Params::Gl(g) = &c.params else { panic!() };
        assert!(matches!(g.potential, Potential::Samples { .. }));

        std::fs::write(&cfg, "[scenario]\nkind = blocks\n[blocks]\na_file = a.txt\nb = 1,0;0,1\nc = 0,0;0,0\n").unwrap();
        let c = parse_config(&cfg).unwrap();
        let Params::Blocks(b) = &c.params else { panic!() };
        let BlockSource::Explicit { a, .. } = &b.source else { panic!() };
        assert_eq!(a[1][1], C64::new(2.0, 0.0));
    }

    #[test]
    fn complex_entries() {
        assert_eq!(parse_complex("2i"), Some(C64::new(0.0, 2.0)));
        assert_eq!(parse_complex("0.3 + 1e-2i"), Some(C64::new(0.3, 0.01)));
        assert_eq!(parse_complex("-1"), Some(C64::new(-1.0, 0.0)));
        assert_eq!(parse_complex("x"), None);
    }
}
