//! Command-line interface.
//!
//! Scenario subcommands read `--config` when given; otherwise they build a
//! configuration of their native kind from their own flags. Either way the
//! full bundle is emitted and a short summary is printed.

use std::io::Write;
use std::path::{Path, PathBuf};

use clap::{Args, Parser, Subcommand};

use crate::config::{parse_config, parse_config_str, ScenarioConfig, ScenarioKind};
use crate::emit::{emit, write_atomic, Formats};
use crate::error::{CliError, Result};
use crate::scenario::{run_scenario, Payload, ReportBundle};
use crate::verify::{verify_all, VerifyOptions};

#[derive(Debug, Parser)]
#[command(name = "blockspec", version, about = "Spectral diagnostics for J-self-adjoint block operator matrices")]
pub struct Cli {
    /// Scenario configuration file.
    #[arg(long, global = true)]
    pub config: Option<PathBuf>,
    /// Output directory; overrides the configuration.
    #[arg(long, global = true)]
    pub out: Option<PathBuf>,
    /// Seed for randomized instances; overrides the configuration.
    #[arg(long, global = true)]
    pub seed: Option<u64>,
    /// Worker threads for parallel scans.
    #[arg(long, global = true, env = "BLOCKSPEC_THREADS")]
    pub threads: Option<usize>,
    /// Skip CSV tables.
    #[arg(long, global = true)]
    pub json_only: bool,
    #[command(subcommand)]
    pub command: Command,
}

#[derive(Debug, Args, Default)]
pub struct SymbolFlags {
    #[arg(long)]
    pub m: Option<f64>,
    #[arg(long, allow_hyphen_values = true)]
    pub nu: Option<f64>,
}

#[derive(Debug, Subcommand)]
pub enum Command {
    /// Essential-spectrum bands of the GL symbol (symbol or gl scenario).
    Bands(SymbolFlags),
    /// Spectrum of L with eigen-residuals (blocks or gl scenario).
    Spectrum,
    /// Resolvent growth along the imaginary axis (blocks, symbol or gl scenario).
    Lrg,
    /// Negative indices of the block operator, A and S(0) (blocks or gl scenario).
    Kappa,
    /// Spectral projector norms of a direct-sum model (dsum scenario).
    ProjectorGrowth {
        /// `lo..hi` or a comma separated list.
        #[arg(long)]
        weights: Option<String>,
        /// `identity` or `inverse`.
        #[arg(long)]
        rule: Option<String>,
    },
    /// Discretized Ginzburg-Landau operator (gl scenario).
    Gl {
        #[command(flatten)]
        symbol: SymbolFlags,
        #[arg(long)]
        half_length: Option<f64>,
        #[arg(long)]
        points: Option<usize>,
    },
    /// Runs the acceptance suite.
    Verify {
        /// Only criteria whose name contains this string.
        #[arg(long)]
        filter: Option<String>,
        /// Overrides the tolerance of the band criteria.
        #[arg(long)]
        band_tol: Option<f64>,
    },
}

impl Command {
    fn allowed(&self) -> &'static [ScenarioKind] {
        use ScenarioKind::*;
        match self {
            Command::Bands(_) => &[Symbol, Gl],
            Command::Spectrum | Command::Kappa => &[Blocks, Gl],
            Command::Lrg => &[Blocks, Symbol, Gl],
            Command::ProjectorGrowth { .. } => &[Dsum],
            Command::Gl { .. } => &[Gl],
            Command::Verify { .. } => &[],
        }
    }

    fn name(&self) -> &'static str {
        match self {
            Command::Bands(_) => "bands",
            Command::Spectrum => "spectrum",
            Command::Lrg => "lrg",
            Command::Kappa => "kappa",
            Command::ProjectorGrowth { .. } => "projector-growth",
            Command::Gl { .. } => "gl",
            Command::Verify { .. } => "verify",
        }
    }

    /// Configuration text assembled from the subcommand flags.
    fn flag_config(&self) -> Option<String> {
        let mut lines: Vec<String> = Vec::new();
        let mut push = |k: &str, v: Option<String>| {
            if let Some(v) = v {
                lines.push(format!("{k} = {v}"));
            }
        };
        let kind = match self {
            Command::Bands(f) => {
                push("m", f.m.map(|x| x.to_string()));
                push("nu", f.nu.map(|x| x.to_string()));
                "symbol"
            }
            Command::ProjectorGrowth { weights, rule } => {
                push("weights", weights.clone());
                push("rule", rule.clone());
                "dsum"
            }
            Command::Gl { symbol, half_length, points } => {
                push("m", symbol.m.map(|x| x.to_string()));
                push("nu", symbol.nu.map(|x| x.to_string()));
                push("half_length", half_length.map(|x| x.to_string()));
                push("points", points.map(|x| x.to_string()));
                "gl"
            }
            Command::Spectrum | Command::Kappa | Command::Lrg => "blocks",
            Command::Verify { .. } => return None,
        };
        Some(format!("[scenario]\nkind = {kind}\n[{kind}]\n{}\n", lines.join("\n")))
    }

    fn has_flags(&self) -> bool {
        match self {
            Command::Bands(f) | Command::Gl { symbol: f, .. } if f.m.is_some() || f.nu.is_some() => true,
            Command::Gl { half_length, points, .. } => half_length.is_some() || points.is_some(),
            Command::ProjectorGrowth { weights, rule } => weights.is_some() || rule.is_some(),
            _ => false,
        }
    }
}

fn load_config(cli: &Cli) -> Result<ScenarioConfig> {
    let cmd = &cli.command;
    let mut config = match &cli.config {
        Some(path) => {
            if cmd.has_flags() {
                return Err(CliError::Usage(format!("{} flags cannot be combined with --config", cmd.name())));
            }
            parse_config(path)?
        }
        None => {
            let text = cmd.flag_config().expect("scenario commands have a flag configuration");
            parse_config_str(&text, Path::new("<command line>"))?
        }
    };
    if !cmd.allowed().contains(&config.kind()) {
        let allowed: Vec<&str> = cmd.allowed().iter().map(|k| k.name()).collect();
        return Err(CliError::Usage(format!("'{}' needs a {} scenario, got {}", cmd.name(), allowed.join(" or "), config.kind().name())));
    }
    if let Some(out) = &cli.out {
        config.out = out.clone();
    }
    if let Some(seed) = cli.seed {
        config.seed = seed;
    }
    Ok(config)
}

fn configure_threads(threads: Option<usize>) -> Result<()> {
    if let Some(n) = threads {
        if n == 0 {
            return Err(CliError::Usage("--threads must be at least 1".into()));
        }
        // A second initialization in the same process keeps the first pool.
        let _ = rayon::ThreadPoolBuilder::new().num_threads(n).build_global();
    }
    Ok(())
}

fn io_err(e: std::io::Error) -> CliError {
    CliError::Io {
        path: PathBuf::from("<stdout>"),
        source: e,
    }
}

fn summarize(cmd: &Command, b: &ReportBundle, out: &mut impl Write) -> std::io::Result<()> {
    match (&b.payload, cmd) {
        (Payload::Symbol(s), _) => {
            writeln!(out, "bands of A: {:?}", s.ess_bands.intervals)?;
            writeln!(out, "gap of L: {}", s.gap)?;
            for r in &s.lrg {
                writeln!(out, "y = {:<8} sup = {:<14.8} y*sup = {:.6}", r.y, r.sup, r.product)?;
            }
        }
        (Payload::Gl(g), _) => {
            let k = &g.spectrum.kappa;
            writeln!(out, "bands of A: {:?}", g.ess_bands.intervals)?;
            writeln!(out, "gap m*sqrt(1-nu^2) = {:.6}, min |Re| = {:.6}, max |Im| = {:.3e}", g.spectrum.gap, g.spectrum.min_abs_re, g.spectrum.max_abs_im)?;
            writeln!(out, "kappa: A_cal {}, A {}, S(0) {}", k.kappa_a_cal.n_neg, k.kappa_a.n_neg, k.kappa_s0.n_neg)?;
            for p in &g.lrg().points {
                writeln!(out, "y = {:<8} |(L-iy)^-1| = {:<14.8} product = {:.6}", p.y, p.norm, p.product)?;
            }
        }
        (Payload::Dsum(d), _) => {
            match d.projector.exponent {
                Some(e) => writeln!(out, "{} weights, fitted exponent {e:.4}", d.size)?,
                None => writeln!(out, "{} weights, no growth exponent (norms constant)", d.size)?,
            }
        }
        (Payload::Blocks(bl), Command::Kappa) => {
            for i in &bl.instances {
                let r = &i.report;
                writeln!(out, "{}: kappa A_cal {} = A {} + S(0) {}", i.label, r.kappa_a_cal.n_neg, r.kappa_a.n_neg, r.kappa_s0.n_neg)?;
            }
        }
        (Payload::Blocks(bl), _) => {
            for i in &bl.instances {
                writeln!(out, "{}: {} eigenvalues in region, LRG verdict {:?}", i.label, i.spectrum.len(), i.report.lrg_scan.verdict)?;
            }
        }
    }
    for v in &b.verdicts {
        writeln!(out, "verdict {:<34} {:<5} ({}{})", v.name, v.holds, v.operation, v.tolerance.map(|t| format!(", tol {t:e}")).unwrap_or_default())?;
    }
    Ok(())
}

pub fn execute(cli: Cli, out: &mut impl Write) -> Result<()> {
    configure_threads(cli.threads)?;
    if let Command::Verify { filter, band_tol } = &cli.command {
        if let Some(t) = band_tol {
            if !(*t > 0.0) {
                return Err(CliError::Usage("--band-tol must be positive".into()));
            }
        }
        let opts = VerifyOptions {
            filter: filter.clone(),
            band_tol: *band_tol,
        };
        let summary = verify_all(&opts, |r| {
            let _ = writeln!(out, "{}", r.line());
        });
        if summary.results.is_empty() {
            return Err(CliError::Usage(format!("no criterion matches filter {:?}", filter.as_deref().unwrap_or(""))));
        }
        if let Some(dir) = &cli.out {
            let json = serde_json::to_vec_pretty(&summary).map_err(|e| CliError::Report(e.to_string()))?;
            write_atomic(&dir.join("verify.json"), &json)?;
        }
        let passed = summary.results.iter().filter(|r| r.passed).count();
        writeln!(out, "{passed}/{} criteria passed", summary.results.len()).map_err(io_err)?;
        return if summary.all_passed() { Ok(()) } else { Err(CliError::Verification { failed: summary.failed() }) };
    }
    let config = load_config(&cli)?;
    let bundle = run_scenario(&config)?;
    let formats = Formats {
        json: true,
        csv: !cli.json_only,
    };
    let files = emit(&bundle, &config.out, formats)?;
    summarize(&cli.command, &bundle, out).map_err(io_err)?;
    for f in files {
        writeln!(out, "wrote {}", f.display()).map_err(io_err)?;
    }
    Ok(())
}

