//! Modulus-of-continuity ratios against the gauge `h_H`.

use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::path::{window_extrema, RangeExtrema, SamplePath};

pub const DEFAULT_STABILITY_BOUND: f64 = 10.0;
/// Largest path accepted by [`brute_force_modulus`].
pub const BRUTE_FORCE_MAX_KNOTS: usize = 1 << 12;

/// `delta^H |ln delta|^(1-H)`.
pub fn h_gauge(delta: f64, hurst: f64) -> f64 {
    delta.powf(hurst) * delta.ln().abs().powf(1.0 - hurst)
}

/// Block statistics at dyadic level `l` on a path normalised to `[0, 1]`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct OscillationTable {
    pub dyadic_level: u32,
    /// `Phi_m = sup_{t in I_m} |X(t) - X(m 2^-l)|`.
    pub block_suprema: Vec<f64>,
    /// `A_m = |X((m+1) 2^-l) - X(m 2^-l)|`.
    pub lattice_increments: Vec<f64>,
}

impl OscillationTable {
    /// `max_m (Phi_m + A_m + Phi_{m+1})`, bounding every increment over a
    /// lag of at most `2^-l`.
    pub fn chain_bound(&self) -> f64 {
        let phi = &self.block_suprema;
        (0..phi.len())
            .map(|m| phi[m] + self.lattice_increments[m] + phi.get(m + 1).copied().unwrap_or(0.0))
            .fold(0.0, f64::max)
    }

    pub fn max_increment(&self) -> f64 {
        self.lattice_increments.iter().copied().fold(0.0, f64::max)
    }
}

fn check_level(path: &SamplePath, l: u32) -> Result<()> {
    if l < 1 {
        return Err(Error::LRangeInfeasible("levels start at 1".into()));
    }
    let finest = 1.0 / (path.len() - 1) as f64;
    if 2f64.powi(-(l as i32)) < finest {
        return Err(Error::LRangeInfeasible(format!(
            "2^-{l} is below the mean knot spacing {finest:e}"
        )));
    }
    Ok(())
}

pub(crate) fn oscillation_table(
    p: &SamplePath,
    ext: &RangeExtrema<'_>,
    l: u32,
) -> OscillationTable {
    let blocks = 1usize << l;
    let w = 1.0 / blocks as f64;
    let grid: Vec<f64> = (0..=blocks).map(|m| p.value_at(m as f64 * w)).collect();
    let mut block_suprema = Vec::with_capacity(blocks);
    for (m, &g) in grid[..blocks].iter().enumerate() {
        let (mn, mx) = window_extrema(p, ext, m as f64 * w, (m + 1) as f64 * w);
        block_suprema.push((mx - g).max(g - mn));
    }
    let lattice_increments = grid.windows(2).map(|g| (g[1] - g[0]).abs()).collect();
    OscillationTable {
        dyadic_level: l,
        block_suprema,
        lattice_increments,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ModulusReport {
    pub hurst: f64,
    pub levels: Vec<u32>,
    pub deltas: Vec<f64>,
    /// Chain-bound ratio `max_m (Phi_m + A_m + Phi_{m+1}) / h_H(2^-l)`.
    pub ratios: Vec<f64>,
    /// `max_m A_m / h_H(2^-l)`, a lower companion to `ratios`.
    pub lower_ratios: Vec<f64>,
    pub ratio_min: f64,
    pub ratio_max: f64,
    pub stable: bool,
}

impl ModulusReport {
    pub fn to_csv(&self) -> String {
        let mut s = String::from("delta,ratio\n");
        for (d, r) in self.deltas.iter().zip(&self.ratios) {
            s.push_str(&format!("{d},{r}\n"));
        }
        s
    }
}

/// Ratios for each `l` in `l_range`. The path is normalised to `[0, 1]`
/// first. `stable` holds when `ratio_max / ratio_min <= stability_bound`.
pub fn modulus_ratio(
    path: &SamplePath,
    hurst: f64,
    l_range: RangeInclusive<u32>,
    stability_bound: f64,
) -> Result<ModulusReport> {
    if l_range.is_empty() {
        return Err(Error::LRangeInfeasible("empty level range".into()));
    }
    let p = path.normalized();
    for l in [*l_range.start(), *l_range.end()] {
        check_level(&p, l)?;
    }
    let ext = RangeExtrema::new(p.values());
    let mut r = ModulusReport {
        hurst,
        levels: Vec::new(),
        deltas: Vec::new(),
        ratios: Vec::new(),
        lower_ratios: Vec::new(),
        ratio_min: f64::INFINITY,
        ratio_max: 0.0,
        stable: false,
    };
    for l in l_range {
        let table = oscillation_table(&p, &ext, l);
        let delta = 2f64.powi(-(l as i32));
        let h = h_gauge(delta, hurst);
        let ratio = table.chain_bound() / h;
        r.levels.push(l);
        r.deltas.push(delta);
        r.ratios.push(ratio);
        r.lower_ratios.push(table.max_increment() / h);
        r.ratio_min = r.ratio_min.min(ratio);
        r.ratio_max = r.ratio_max.max(ratio);
    }
    r.stable = r.ratio_min > 0.0 && r.ratio_max / r.ratio_min <= stability_bound;
    Ok(r)
}

/// `sup |X(t_j) - X(t_i)| / h_H(t_j - t_i)` over knot pairs with
/// `0 < t_j - t_i < delta`, on the path normalised to `[0, 1]`.
pub fn brute_force_modulus(path: &SamplePath, hurst: f64, delta: f64) -> Result<f64> {
    if path.len() > BRUTE_FORCE_MAX_KNOTS {
        return Err(Error::InvalidParameter(format!(
            "brute force limited to {BRUTE_FORCE_MAX_KNOTS} knots, path has {}",
            path.len()
        )));
    }
    let p = path.normalized();
    let (t, v) = (p.times(), p.values());
    let mut best = 0.0f64;
    for i in 0..t.len() {
        for j in i + 1..t.len() {
            let gap = t[j] - t[i];
            if gap >= delta {
                break;
            }
            best = best.max((v[j] - v[i]).abs() / h_gauge(gap, hurst));
        }
    }
    Ok(best)
}
