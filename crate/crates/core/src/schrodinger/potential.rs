use std::path::Path;

use serde::{Deserialize, Serialize};

use super::Grid1D;
use crate::error::{Error, Result};

/// Fraction of the half-length, measured from each end, where `V` must decay.
pub const OUTER_FRACTION: f64 = 0.1;
/// Decay threshold relative to `‖V‖∞`.
pub const DECAY_TOL: f64 = 1e-6;

/// Real potential `V(x)`.
#[derive(Clone, Debug, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum Potential {
    Zero,
    /// `−depth` on `|x| < width/2`, zero elsewhere.
    SquareWell { depth: f64, width: f64 },
    /// `amplitude · exp(−x²/(2σ²))`.
    Gaussian { amplitude: f64, sigma: f64 },
    /// Linear interpolation between samples, zero outside `[x₀, x_last]`.
    Samples { x: Vec<f64>, v: Vec<f64> },
}

impl Potential {
    pub fn square_well(depth: f64, width: f64) -> Result<Self> {
        if !depth.is_finite() || !(width > 0.0) || !width.is_finite() {
            return Err(Error::InvalidPotential(format!("square well needs finite depth and width > 0, got ({depth}, {width})")));
        }
        Ok(Self::SquareWell { depth, width })
    }

    pub fn gaussian(amplitude: f64, sigma: f64) -> Result<Self> {
        if !amplitude.is_finite() || !(sigma > 0.0) || !sigma.is_finite() {
            return Err(Error::InvalidPotential(format!("gaussian needs finite amplitude and sigma > 0, got ({amplitude}, {sigma})")));
        }
        Ok(Self::Gaussian { amplitude, sigma })
    }

    pub fn samples(x: Vec<f64>, v: Vec<f64>) -> Result<Self> {
        if x.len() != v.len() || x.len() < 2 {
            return Err(Error::InvalidPotential(format!("need at least two (x, V) pairs of equal length, got {} and {}", x.len(), v.len())));
        }
        if x.iter().chain(&v).any(|t| !t.is_finite()) {
            return Err(Error::InvalidPotential("non-finite sample".into()));
        }
        if let Some(k) = x.windows(2).position(|w| w[1] <= w[0]) {
            return Err(Error::InvalidPotential(format!("sample abscissae must increase strictly (row {})", k + 2)));
        }
        Ok(Self::Samples { x, v })
    }

    /// Two-column `x,V(x)` file. A non-numeric first row is taken as a header.
    pub fn from_csv(path: &Path) -> Result<Self> {
        let fail = |msg: String| Error::InvalidPotential(format!("{}: {msg}", path.display()));
        let mut reader = csv::ReaderBuilder::new()
            .has_headers(false)
            .comment(Some(b'#'))
            .trim(csv::Trim::All)
            .from_path(path)
            .map_err(|e| fail(e.to_string()))?;
        let (mut xs, mut vs) = (Vec::new(), Vec::new());
        for (k, record) in reader.records().enumerate() {
            let record = record.map_err(|e| fail(e.to_string()))?;
            let line = record.position().map_or(k as u64 + 1, |p| p.line());
            if record.len() != 2 {
                return Err(fail(format!("line {line}: expected 2 columns, found {}", record.len())));
            }
            let parsed = (record[0].parse::<f64>(), record[1].parse::<f64>());
            match parsed {
                (Ok(x), Ok(v)) => {
                    xs.push(x);
                    vs.push(v);
                }
                _ if k == 0 => continue,
                _ => return Err(fail(format!("line {line}: cannot parse '{},{}'", &record[0], &record[1]))),
            }
        }
        Self::samples(xs, vs).map_err(|e| fail(e.to_string()))
    }

    pub fn eval(&self, t: f64) -> f64 {
        match self {
            Potential::Zero => 0.0,
            Potential::SquareWell { depth, width } => {
                if t.abs() < width / 2.0 {
                    -depth
                } else {
                    0.0
                }
            }
            Potential::Gaussian { amplitude, sigma } => amplitude * (-t * t / (2.0 * sigma * sigma)).exp(),
            Potential::Samples { x, v } => {
                if t < x[0] || t > x[x.len() - 1] {
                    return 0.0;
                }
                let k = x.partition_point(|&xi| xi <= t).clamp(1, x.len() - 1);
                let s = (t - x[k - 1]) / (x[k] - x[k - 1]);
                v[k - 1] + s * (v[k] - v[k - 1])
            }
        }
    }

    /// Values at the interior nodes of `grid`.
    pub fn on_interior(&self, grid: &Grid1D) -> Vec<f64> {
        grid.interior_nodes().map(|x| self.eval(x)).collect()
    }

    /// Fails unless `max |V|` over `|x| ≥ (1 − OUTER_FRACTION) L` is at most
    /// `DECAY_TOL · ‖V‖∞` on the grid nodes.
    pub fn check_decay(&self, grid: &Grid1D) -> Result<()> {
        let cut = (1.0 - OUTER_FRACTION) * grid.half_length();
        let (mut sup, mut outer) = (0.0f64, 0.0f64);
        for x in grid.nodes() {
            let v = self.eval(x).abs();
            sup = sup.max(v);
            if x.abs() >= cut {
                outer = outer.max(v);
            }
        }
        let tol = DECAY_TOL * sup;
        if outer > tol {
            return Err(Error::PotentialNotDecaying { outer, tol });
        }
        Ok(())
    }

    pub fn sup_norm(&self, grid: &Grid1D) -> f64 {
        grid.nodes().map(|x| self.eval(x).abs()).fold(0.0, f64::max)
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use std::io::Write;

    #[test]
    fn shapes() {
        let w = Potential::square_well(5.0, 2.0).unwrap();
        assert_eq!(w.eval(0.0), -5.0);
        assert_eq!(w.eval(1.5), 0.0);
        let g = Potential::gaussian(-2.0, 0.5).unwrap();
        assert!((g.eval(0.5) + 2.0 * (-0.5f64).exp()).abs() < 1e-15);
        assert!(Potential::gaussian(1.0, 0.0).is_err());
    }

    #[test]
    fn samples_interpolate_linearly() {
        let p = Potential::samples(vec![-1.0, 0.0, 2.0], vec![0.0, -4.0, 0.0]).unwrap();
        assert_eq!(p.eval(-0.5), -2.0);
        assert_eq!(p.eval(1.0), -2.0);
        assert_eq!(p.eval(3.0), 0.0);
        assert!(Potential::samples(vec![0.0, 0.0], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn csv_round_trip() {
        let mut f = tempfile::NamedTempFile::new().unwrap();
        writeln!(f, "x,V\n-1,0\n0, -3\n1,0").unwrap();
        let p = Potential::from_csv(f.path()).unwrap();
        assert_eq!(p.eval(0.5), -1.5);

        let mut bad = tempfile::NamedTempFile::new().unwrap();
        writeln!(bad, "0,1\n1,oops").unwrap();
        let err = Potential::from_csv(bad.path()).unwrap_err().to_string();
        assert!(err.contains("line 2"), "{err}");
        assert!(Potential::from_csv(Path::new("/nonexistent/v.csv")).is_err());
    }

    #[test]
    fn decay_check() {
        let grid = Grid1D::new(10.0, 201).unwrap();
        assert!(Potential::Zero.check_decay(&grid).is_ok());
        assert!(Potential::square_well(3.0, 2.0).unwrap().check_decay(&grid).is_ok());
        let wide = Potential::gaussian(1.0, 5.0).unwrap();
        assert!(matches!(wide.check_decay(&grid), Err(Error::PotentialNotDecaying { .. })));
    }
}
