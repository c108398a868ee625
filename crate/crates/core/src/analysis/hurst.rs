//! Offspring-mean and Hurst estimation from extracted forests, and the
//! duration scaling check.

use std::collections::BTreeMap;

use serde::{Deserialize, Serialize};

use crate::analysis::forest::CrossingForest;
use crate::error::{Error, Result};
use crate::stats::{ks_distance, linear_fit, mean, variance};

/// Fewest complete parent crossings accepted by [`estimate_hurst`].
pub const MIN_PARENTS: usize = 30;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelCount {
    pub level: i32,
    pub parents: usize,
    pub mean_count: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct HurstEstimate {
    pub mu_hat: f64,
    pub hurst_hat: f64,
    pub stderr: f64,
    pub parents: usize,
    pub per_level_counts: Vec<LevelCount>,
    /// Slope of `ln mean D^n` against `n`; estimates `ln mu`.
    pub duration_log_mu: Option<f64>,
    pub duration_hurst: Option<f64>,
    /// Empirical law of the subcrossing count.
    pub count_pmf: BTreeMap<u32, f64>,
}

/// Pooled estimate over one forest.
pub fn estimate_hurst(forest: &CrossingForest) -> Result<HurstEstimate> {
    estimate_hurst_pooled(std::slice::from_ref(forest))
}

/// Pooled estimate over several forests that share a level range layout.
pub fn estimate_hurst_pooled(forests: &[CrossingForest]) -> Result<HurstEstimate> {
    if forests.is_empty() || forests.iter().all(|f| f.levels.len() < 2) {
        return Err(Error::InsufficientCrossings(
            "at least two levels are required".into(),
        ));
    }
    let mut per_level: BTreeMap<i32, (usize, f64)> = BTreeMap::new();
    let mut durations: BTreeMap<i32, (usize, f64)> = BTreeMap::new();
    let mut counts = Vec::new();
    for f in forests {
        for n in f.level_range() {
            let recs = f.level(n);
            let d = durations.entry(n).or_default();
            d.0 += recs.len();
            d.1 += recs.iter().map(|r| r.duration).sum::<f64>();
            if n == f.base_level {
                continue;
            }
            let e = per_level.entry(n).or_default();
            for r in recs {
                let z = r.subcrossing_count.expect("parent level carries counts");
                counts.push(z as f64);
                e.0 += 1;
                e.1 += z as f64;
            }
        }
    }
    if counts.len() < MIN_PARENTS {
        return Err(Error::InsufficientCrossings(format!(
            "{} parent crossings, need {MIN_PARENTS}",
            counts.len()
        )));
    }
    let mu_hat = mean(&counts);
    let hurst_hat = std::f64::consts::LN_2 / mu_hat.ln();
    let se_mu = (variance(&counts) / counts.len() as f64).sqrt();
    let stderr = std::f64::consts::LN_2 / (mu_hat * mu_hat.ln().powi(2)) * se_mu;

    let mut pmf: BTreeMap<u32, f64> = BTreeMap::new();
    for &z in &counts {
        *pmf.entry(z as u32).or_default() += 1.0;
    }
    for v in pmf.values_mut() {
        *v /= counts.len() as f64;
    }

    let (xs, ys): (Vec<f64>, Vec<f64>) = durations
        .iter()
        .filter(|(_, (k, _))| *k > 0)
        .map(|(&n, &(k, s))| (n as f64, (s / k as f64).ln()))
        .unzip();
    let duration_log_mu = linear_fit(&xs, &ys).map(|f| f.slope);

    Ok(HurstEstimate {
        mu_hat,
        hurst_hat,
        stderr,
        parents: counts.len(),
        per_level_counts: per_level
            .into_iter()
            .map(|(level, (parents, s))| LevelCount {
                level,
                parents,
                mean_count: s / parents as f64,
            })
            .collect(),
        duration_log_mu,
        duration_hurst: duration_log_mu.map(|s| std::f64::consts::LN_2 / s),
        count_pmf: pmf,
    })
}

/// Total variation distance between an empirical count law and `pmf`.
pub fn total_variation<F: Fn(u32) -> f64>(empirical: &BTreeMap<u32, f64>, pmf: F) -> f64 {
    let top = empirical.keys().next_back().copied().unwrap_or(2);
    let mut seen = 0.0;
    let mut tv = 0.0;
    for z in (2..=top).step_by(2) {
        let p = pmf(z);
        seen += p;
        tv += (empirical.get(&z).copied().unwrap_or(0.0) - p).abs();
    }
    // mass of the reference law beyond the largest observed count
    0.5 * (tv + (1.0 - seen).max(0.0))
}

/// Minimum crossings per level accepted by [`duration_scale_invariance`].
pub const MIN_LEVEL_CROSSINGS: usize = 100;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LevelPairKs {
    pub level_lo: i32,
    pub level_hi: i32,
    pub samples_lo: usize,
    pub samples_hi: usize,
    pub ks: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ScaleInvarianceReport {
    pub mu: f64,
    pub adjacent: Vec<LevelPairKs>,
    pub max_adjacent_ks: f64,
    /// KS between the finest and coarsest usable levels.
    pub extreme: LevelPairKs,
}

/// KS distances between the laws of `mu^(-n) D^n` at adjacent levels, pooled
/// over `forests`. Levels with fewer than [`MIN_LEVEL_CROSSINGS`] crossings
/// are skipped; `cap` thins each level to at most that many by even striding.
pub fn duration_scale_invariance(
    forests: &[CrossingForest],
    mu: f64,
    cap: Option<usize>,
) -> Result<ScaleInvarianceReport> {
    let mut by_level: BTreeMap<i32, Vec<f64>> = BTreeMap::new();
    for f in forests {
        for n in f.level_range() {
            let scale = mu.powi(-n);
            by_level
                .entry(n)
                .or_default()
                .extend(f.level(n).iter().map(|r| r.duration * scale));
        }
    }
    let levels: Vec<(i32, Vec<f64>)> = by_level
        .into_iter()
        .filter(|(_, v)| v.len() >= MIN_LEVEL_CROSSINGS)
        .map(|(n, v)| match cap {
            Some(c) if v.len() > c => {
                let stride = v.len() as f64 / c as f64;
                (n, (0..c).map(|i| v[(i as f64 * stride) as usize]).collect())
            }
            _ => (n, v),
        })
        .collect();
    if levels.len() < 2 {
        return Err(Error::InsufficientCrossings(format!(
            "need two levels with at least {MIN_LEVEL_CROSSINGS} crossings"
        )));
    }
    let pair = |a: &(i32, Vec<f64>), b: &(i32, Vec<f64>)| LevelPairKs {
        level_lo: a.0,
        level_hi: b.0,
        samples_lo: a.1.len(),
        samples_hi: b.1.len(),
        ks: ks_distance(&a.1, &b.1),
    };
    let adjacent: Vec<LevelPairKs> = levels.windows(2).map(|w| pair(&w[0], &w[1])).collect();
    let max_adjacent_ks = adjacent.iter().map(|p| p.ks).fold(0.0, f64::max);
    Ok(ScaleInvarianceReport {
        mu,
        extreme: pair(&levels[0], levels.last().unwrap()),
        adjacent,
        max_adjacent_ks,
    })
}
