//! Local Hölder exponents by oscillation regression.

use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::path::{window_extrema, RangeExtrema, SamplePath};
use crate::stats::{linear_fit, mean, variance};

pub const DEFAULT_BIN_WIDTH: f64 = 0.05;
pub const MIN_GRID: usize = 100;

fn check_levels(path: &SamplePath, eps_levels: &RangeInclusive<i32>) -> Result<()> {
    let (lo, hi) = (*eps_levels.start(), *eps_levels.end());
    if hi <= lo {
        return Err(Error::EpsRangeInfeasible(format!(
            "need at least two levels, got {lo}..={hi}"
        )));
    }
    if 2f64.powi(-lo) > path.span() / 2.0 {
        return Err(Error::EpsRangeInfeasible(format!(
            "2^-{lo} exceeds half the path span {}",
            path.span()
        )));
    }
    Ok(())
}

fn slope_at(
    path: &SamplePath,
    ext: &RangeExtrema<'_>,
    t: f64,
    eps_levels: &RangeInclusive<i32>,
) -> Result<f64> {
    let (t0, t1) = (path.start_time(), path.end_time());
    if !(t > t0 && t < t1) {
        return Err(Error::EpsRangeInfeasible(format!(
            "t = {t} is not interior"
        )));
    }
    let x = path.value_at(t);
    let mut le = Vec::new();
    let mut lo = Vec::new();
    for j in eps_levels.clone() {
        let eps = 2f64.powi(-j);
        let (mn, mx) = window_extrema(path, ext, (t - eps).max(t0), (t + eps).min(t1));
        let osc = (mx - x).max(x - mn);
        if !(osc > 0.0) {
            return Err(Error::EpsRangeInfeasible(format!(
                "zero oscillation at t = {t}, eps = 2^-{j}"
            )));
        }
        le.push(eps.ln());
        lo.push(osc.ln());
    }
    linear_fit(&le, &lo)
        .map(|f| f.slope)
        .ok_or_else(|| Error::EpsRangeInfeasible("degenerate regression".into()))
}

/// Least-squares slope of `ln sup_{|u-t|<eps} |X(u) - X(t)|` against
/// `ln eps` for `eps = 2^-j`, `j` in `eps_levels`, in path time units.
/// Windows are clipped to the path span.
pub fn local_holder(path: &SamplePath, t: f64, eps_levels: RangeInclusive<i32>) -> Result<f64> {
    check_levels(path, &eps_levels)?;
    let ext = RangeExtrema::new(path.values());
    slope_at(path, &ext, t, &eps_levels)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HistogramBin {
    pub lo: f64,
    pub hi: f64,
    pub count: usize,
    /// `ln(count) / ln(grid_size + 1)`; absent for empty bins.
    pub coarse_spectrum: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HolderEstimate {
    pub eps_levels: (i32, i32),
    /// Grid times on the path normalised to `[0, 1]`.
    pub grid_times: Vec<f64>,
    pub exponents: Vec<f64>,
    pub histogram: Vec<HistogramBin>,
    pub mean: f64,
    pub std: f64,
}

impl HolderEstimate {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("t,h\n");
        for (t, h) in self.grid_times.iter().zip(&self.exponents) {
            s.push_str(&format!("{t},{h}\n"));
        }
        s
    }
}

/// Exponents on `grid_size` equally spaced interior points of the path
/// after normalising its time span to `[0, 1]`.
pub fn holder_histogram(
    path: &SamplePath,
    grid_size: usize,
    eps_levels: RangeInclusive<i32>,
    bin_width: f64,
) -> Result<HolderEstimate> {
    if grid_size < MIN_GRID {
        return Err(Error::InvalidParameter(format!(
            "grid_size must be >= {MIN_GRID}"
        )));
    }
    if !(bin_width > 0.0) {
        return Err(Error::InvalidParameter("bin_width must be positive".into()));
    }
    let p = path.normalized();
    check_levels(&p, &eps_levels)?;
    let ext = RangeExtrema::new(p.values());
    let grid_times: Vec<f64> = (0..grid_size)
        .map(|i| (i + 1) as f64 / (grid_size + 1) as f64)
        .collect();
    let exponents = grid_times
        .iter()
        .map(|&t| slope_at(&p, &ext, t, &eps_levels))
        .collect::<Result<Vec<f64>>>()?;

    let lo = (exponents.iter().copied().fold(f64::INFINITY, f64::min) / bin_width).floor();
    let hi = (exponents.iter().copied().fold(f64::NEG_INFINITY, f64::max) / bin_width).floor();
    let nbins = (hi - lo) as usize + 1;
    let mut counts = vec![0usize; nbins];
    for h in &exponents {
        let b = ((h / bin_width).floor() - lo) as usize;
        counts[b.min(nbins - 1)] += 1;
    }
    let denom = ((grid_size + 1) as f64).ln();
    let histogram = counts
        .into_iter()
        .enumerate()
        .map(|(i, count)| HistogramBin {
            lo: (lo + i as f64) * bin_width,
            hi: (lo + i as f64 + 1.0) * bin_width,
            count,
            coarse_spectrum: (count > 0).then(|| (count as f64).ln() / denom),
        })
        .collect();
    Ok(HolderEstimate {
        eps_levels: (*eps_levels.start(), *eps_levels.end()),
        mean: mean(&exponents),
        std: variance(&exponents).sqrt(),
        grid_times,
        exponents,
        histogram,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::Origin;

    fn from_fn(f: impl Fn(f64) -> f64, n: usize) -> SamplePath {
        let t: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
        let v = t.iter().map(|&x| f(x)).collect();
        SamplePath::new(t, v, -30, 0.5, 4.0, Origin::Ingested).unwrap()
    }

    #[test]
    fn ramp_has_exponent_one() {
        let p = from_fn(|t| t, 1000);
        for t in [0.3, 0.5, 0.77] {
            assert!((local_holder(&p, t, 3..=7).unwrap() - 1.0).abs() < 1e-9);
        }
        let h = holder_histogram(&p, 200, 3..=7, DEFAULT_BIN_WIDTH).unwrap();
        assert!(h.exponents.iter().all(|e| (e - 1.0).abs() < 1e-9));
        assert!(h.std < 1e-9);
        assert_eq!(h.histogram.iter().map(|b| b.count).sum::<usize>(), 200);
    }

    #[test]
    fn cusp_has_exponent_half() {
        let t0 = 0.5;
        let p = from_fn(|t| (t - t0).abs().sqrt(), 1 << 20);
        let h = local_holder(&p, t0, 6..=14).unwrap();
        assert!((h - 0.5).abs() < 0.02, "{h}");
    }

    #[test]
    fn infeasible_ranges() {
        let p = from_fn(|t| t, 100);
        assert_eq!(
            local_holder(&p, 0.5, 0..=3).unwrap_err().code(),
            "EPS_RANGE_INFEASIBLE"
        );
        assert_eq!(
            local_holder(&p, 0.0, 2..=4).unwrap_err().code(),
            "EPS_RANGE_INFEASIBLE"
        );
        assert_eq!(
            local_holder(&p, 0.5, 3..=3).unwrap_err().code(),
            "EPS_RANGE_INFEASIBLE"
        );
        let flat = from_fn(|_| 1.0, 100);
        assert_eq!(
            local_holder(&flat, 0.5, 2..=4).unwrap_err().code(),
            "EPS_RANGE_INFEASIBLE"
        );
    }

    #[test]
    fn small_grid_rejected() {
        let p = from_fn(|t| t, 100);
        assert!(holder_histogram(&p, 99, 2..=4, DEFAULT_BIN_WIDTH).is_err());
    }
}
