//! Writes a bundle as `report.json` plus plot-ready CSV tables.
//!
//! Every file goes through a temporary file in the output directory and is
//! renamed into place. The JSON is a pure function of the configuration; the
//! wall-clock time of the run goes to a separate `run_info.json`.

use std::io::Write;
use std::path::{Path, PathBuf};

use blockspec_core::block::LrgScan;
use blockspec_core::numerics::C64;
use blockspec_core::serde_ext::format_f64;
use blockspec_core::symbol::BandSet;
use serde::Serialize;

use crate::error::{CliError, Result};
use crate::scenario::{Payload, ReportBundle};

pub const REPORT_FILE: &str = "report.json";
pub const RUN_INFO_FILE: &str = "run_info.json";

#[derive(Clone, Copy, Debug, PartialEq, Eq)]
pub struct Formats {
    pub json: bool,
    pub csv: bool,
}

impl Default for Formats {
    fn default() -> Self {
        Self { json: true, csv: true }
    }
}

/// Writes `bytes` to `path` atomically.
pub fn write_atomic(path: &Path, bytes: &[u8]) -> Result<()> {
    let dir = path.parent().filter(|d| !d.as_os_str().is_empty()).unwrap_or(Path::new("."));
    std::fs::create_dir_all(dir).map_err(CliError::io(dir))?;
    let mut tmp = tempfile::NamedTempFile::new_in(dir).map_err(CliError::io(dir))?;
    tmp.write_all(bytes).map_err(CliError::io(path))?;
    tmp.as_file().sync_all().map_err(CliError::io(path))?;
    tmp.persist(path).map_err(|e| CliError::Io {
        path: path.to_path_buf(),
        source: e.error,
    })?;
    Ok(())
}

pub fn to_json(bundle: &ReportBundle) -> Result<String> {
    let mut s = serde_json::to_string_pretty(bundle).map_err(|e| CliError::Report(e.to_string()))?;
    s.push('\n');
    Ok(s)
}

pub fn load_bundle(path: &Path) -> Result<ReportBundle> {
    let text = std::fs::read_to_string(path).map_err(CliError::io(path))?;
    serde_json::from_str(&text).map_err(|e| CliError::Report(format!("{}: {e}", path.display())))
}

fn csv_bytes(header: &[&str], rows: impl IntoIterator<Item = Vec<String>>) -> Result<Vec<u8>> {
    let mut w = csv::Writer::from_writer(Vec::new());
    let fail = |e: csv::Error| CliError::Report(e.to_string());
    w.write_record(header).map_err(fail)?;
    for r in rows {
        w.write_record(&r).map_err(fail)?;
    }
    w.into_inner().map_err(|e| CliError::Report(e.to_string()))
}

pub fn bands_csv(bands: &BandSet) -> Result<Vec<u8>> {
    csv_bytes(&["band_lo", "band_hi"], bands.intervals.iter().map(|&(lo, hi)| vec![format_f64(lo), format_f64(hi)]))
}

pub fn lrg_csv(rows: impl IntoIterator<Item = (f64, f64, f64)>) -> Result<Vec<u8>> {
    csv_bytes(&["y", "resolvent_norm", "product"], rows.into_iter().map(|(y, n, p)| vec![format_f64(y), format_f64(n), format_f64(p)]))
}

pub fn spectrum_csv(points: impl IntoIterator<Item = (C64, f64)>) -> Result<Vec<u8>> {
    csv_bytes(&["re", "im", "residual"], points.into_iter().map(|(z, r)| vec![format_f64(z.re), format_f64(z.im), format_f64(r)]))
}

pub fn projector_csv(rows: &[(f64, f64)]) -> Result<Vec<u8>> {
    csv_bytes(&["weight", "norm"], rows.iter().map(|&(w, n)| vec![format_f64(w), format_f64(n)]))
}

fn scan_rows(scan: &LrgScan) -> Vec<(f64, f64, f64)> {
    scan.points.iter().map(|p| (p.y, p.norm, p.product)).collect()
}

#[derive(Serialize)]
struct RunInfo {
    finished_unix_seconds: u64,
    report: &'static str,
}

/// Writes the bundle into `dir` and returns the files written, in order.
///
/// Tables: `bands.csv` (symbol and GL), `lrg.csv`, `spectrum.csv` (eigenvalues
/// inside the report region; header only when none), `projector.csv` (direct
/// sums). A scenario with several block instances writes the per-instance
/// tables into `instance_NNN/`.
pub fn emit(bundle: &ReportBundle, dir: &Path, formats: Formats) -> Result<Vec<PathBuf>> {
    let mut files: Vec<(PathBuf, Vec<u8>)> = Vec::new();
    if formats.json {
        files.push((dir.join(REPORT_FILE), to_json(bundle)?.into_bytes()));
    }
    if formats.csv {
        match &bundle.payload {
            Payload::Symbol(s) => {
                files.push((dir.join("bands.csv"), bands_csv(&s.ess_bands)?));
                files.push((dir.join("lrg.csv"), lrg_csv(s.lrg.iter().map(|r| (r.y, r.sup, r.product)))?));
            }
            Payload::Gl(g) => {
                files.push((dir.join("bands.csv"), bands_csv(&g.ess_bands)?));
                files.push((dir.join("lrg.csv"), lrg_csv(scan_rows(g.lrg()))?));
                let region = g.region;
                let pts = g
                    .spectrum
                    .report
                    .eigenvalues_l
                    .iter()
                    .zip(&g.spectrum.residuals)
                    .filter(|(z, _)| region.contains(**z, 0.0))
                    .map(|(&z, &r)| (z, r));
                files.push((dir.join("spectrum.csv"), spectrum_csv(pts)?));
            }
            Payload::Dsum(d) => files.push((dir.join("projector.csv"), projector_csv(&d.projector.rows)?)),
            Payload::Blocks(b) => {
                let single = b.instances.len() == 1;
                for (k, inst) in b.instances.iter().enumerate() {
                    let sub = if single { dir.to_path_buf() } else { dir.join(format!("instance_{k:03}")) };
                    files.push((sub.join("lrg.csv"), lrg_csv(scan_rows(&inst.report.lrg_scan))?));
                    files.push((sub.join("spectrum.csv"), spectrum_csv(inst.spectrum.iter().map(|p| (p.z, p.residual)))?));
                }
            }
        }
    }
    for (path, bytes) in &files {
        write_atomic(path, bytes)?;
    }
    let finished = std::time::SystemTime::now().duration_since(std::time::UNIX_EPOCH).map_or(0, |d| d.as_secs());
    let info = serde_json::to_vec_pretty(&RunInfo {
        finished_unix_seconds: finished,
        report: REPORT_FILE,
    })
    .map_err(|e| CliError::Report(e.to_string()))?;
    let info_path = dir.join(RUN_INFO_FILE);
    write_atomic(&info_path, &info)?;
    let mut written: Vec<PathBuf> = files.into_iter().map(|f| f.0).collect();
    written.push(info_path);
    Ok(written)
}

#[cfg(test)]
mod tests {
    use super::*;
    use blockspec_core::symbol::{ess_spectrum_bands, GLSymbolParams};

    #[test]
    fn bands_rows() {
        let b = ess_spectrum_bands(&GLSymbolParams::new(2.0, 0.6).unwrap());
        let text = String::from_utf8(bands_csv(&b).unwrap()).unwrap();
        assert_eq!(text, "band_lo,band_hi\n0.64,1.0\n4.0,inf\n");
    }

    #[test]
    fn empty_spectrum_is_header_only() {
        let text = String::from_utf8(spectrum_csv(std::iter::empty()).unwrap()).unwrap();
        assert_eq!(text, "re,im,residual\n");
    }

    #[test]
    fn atomic_write_replaces() {
        let dir = tempfile::tempdir().unwrap();
        let p = dir.path().join("nested/x.txt");
        write_atomic(&p, b"one").unwrap();
        write_atomic(&p, b"two").unwrap();
        assert_eq!(std::fs::read_to_string(&p).unwrap(), "two");
        assert_eq!(std::fs::read_dir(p.parent().unwrap()).unwrap().count(), 1);
    }
}
