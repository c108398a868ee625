//! Monte Carlo tail estimators for increments and remaining crossing times.

use std::collections::BTreeMap;

use rand::Rng;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::analysis::forest::{coarsen, extract_passage_times};
use crate::error::{Error, Result};
use crate::offspring::make_offspring;
use crate::path::{window_extrema, RangeExtrema, SamplePath};
use crate::rng::{substream, Domain};
use crate::simulate::{ensemble_map, SimulationConfig};
use crate::tail::{check_grid, TailFit, TailWindow};

/// Fraction of each path span from which query times are drawn.
pub const QUERY_FRACTION: f64 = 0.9;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct IncrementTail {
    pub t: f64,
    pub lambda_grid: Vec<f64>,
    pub samples: usize,
    pub paths_used: usize,
    pub paths_skipped: usize,
    /// `P(|X(s+t) - X(s)| > lambda)`.
    pub p_plain: Vec<f64>,
    /// `P(sup_{u <= t} |X(s+u) - X(s)| > lambda)`.
    pub p_sup: Vec<f64>,
    pub sandwich_violations: usize,
    pub fit: TailFit,
    pub sup_fit: Option<TailFit>,
}

/// Exceedance counts from one or more paths, mergeable in any order.
#[derive(Debug, Clone, PartialEq, Eq, Default, Serialize, Deserialize)]
pub struct IncrementCounts {
    pub plain: Vec<u64>,
    pub sup: Vec<u64>,
    pub samples: usize,
    pub paths_used: usize,
    pub paths_skipped: usize,
}

impl IncrementCounts {
    pub fn merge(mut self, other: IncrementCounts) -> IncrementCounts {
        if self.plain.is_empty() {
            self.plain = vec![0; other.plain.len()];
            self.sup = vec![0; other.sup.len()];
        }
        for (a, b) in self.plain.iter_mut().zip(&other.plain) {
            *a += b;
        }
        for (a, b) in self.sup.iter_mut().zip(&other.sup) {
            *a += b;
        }
        self.samples += other.samples;
        self.paths_used += other.paths_used;
        self.paths_skipped += other.paths_skipped;
        self
    }

    /// Probabilities and fits; `hurst` sets the abscissa
    /// `lambda^(1/H) / t` and the target `H / (1 - H)`. Without a window the
    /// fit uses every grid point with `0 < p < 1`.
    pub fn finish(
        self,
        t: f64,
        lambda_grid: &[f64],
        hurst: f64,
        window: Option<TailWindow>,
    ) -> Result<IncrementTail> {
        if self.samples == 0 {
            return Err(Error::InvalidParameter(format!(
                "t = {t} exceeds every usable path window"
            )));
        }
        let n = self.samples as f64;
        let p_plain: Vec<f64> = self.plain.iter().map(|&c| c as f64 / n).collect();
        let p_sup: Vec<f64> = self.sup.iter().map(|&c| c as f64 / n).collect();
        let sandwich_violations = self
            .plain
            .iter()
            .zip(&self.sup)
            .filter(|(a, b)| a > b)
            .count();
        let abscissa: Vec<f64> = lambda_grid
            .iter()
            .map(|l| l.powf(1.0 / hurst) / t)
            .collect();
        let target = hurst / (1.0 - hurst);
        let (fit, sup_fit) = match window {
            None => (
                TailFit::fit(&abscissa, &p_plain, target)?,
                TailFit::fit(&abscissa, &p_sup, target).ok(),
            ),
            Some(w) => (
                w.fit(&abscissa, &p_plain, self.samples, target)?,
                w.fit(&abscissa, &p_sup, self.samples, target).ok(),
            ),
        };
        Ok(IncrementTail {
            t,
            lambda_grid: lambda_grid.to_vec(),
            samples: self.samples,
            paths_used: self.paths_used,
            paths_skipped: self.paths_skipped,
            p_plain,
            p_sup,
            sandwich_violations,
            fit,
            sup_fit,
        })
    }
}

/// Counts for one path: `draws` query times `s`, uniform on the first
/// [`QUERY_FRACTION`] of the span. A path shorter than
/// `t / (1 - QUERY_FRACTION)` is counted as skipped.
pub fn increment_counts<R: Rng + ?Sized>(
    path: &SamplePath,
    t: f64,
    lambda_grid: &[f64],
    draws: usize,
    rng: &mut R,
) -> IncrementCounts {
    let k = lambda_grid.len();
    let mut c = IncrementCounts {
        plain: vec![0; k],
        sup: vec![0; k],
        ..Default::default()
    };
    if t > (1.0 - QUERY_FRACTION) * path.span() {
        c.paths_skipped = 1;
        return c;
    }
    let ext = RangeExtrema::new(path.values());
    let t0 = path.start_time();
    let width = QUERY_FRACTION * path.span();
    for _ in 0..draws {
        let s = t0 + width * rng.random::<f64>();
        let xs = path.value_at(s);
        let inc = (path.value_at(s + t) - xs).abs();
        let (mn, mx) = window_extrema(path, &ext, s, s + t);
        let osc = (mx - xs).max(xs - mn);
        // the grid is increasing, so exceedances form a prefix
        let a = lambda_grid.partition_point(|&l| inc > l);
        let b = lambda_grid.partition_point(|&l| osc > l);
        c.plain[..a].iter_mut().for_each(|x| *x += 1);
        c.sup[..b].iter_mut().for_each(|x| *x += 1);
    }
    c.samples = draws;
    c.paths_used = 1;
    c
}

fn check_increment_args(t: f64, lambda_grid: &[f64], draws: usize) -> Result<()> {
    check_grid(lambda_grid)?;
    if !(t > 0.0) || draws == 0 {
        return Err(Error::InvalidParameter("need t > 0 and draws > 0".into()));
    }
    Ok(())
}

/// Increment tails over a stored ensemble; path `i` draws from substream
/// `(seed, Analysis, i)`. Fits `ln(-ln P)` against `ln(lambda^(1/H) / t)`
/// with `H` taken from the first path.
pub fn increment_tail(
    paths: &[SamplePath],
    t: f64,
    lambda_grid: &[f64],
    draws_per_path: usize,
    seed: u64,
) -> Result<IncrementTail> {
    check_increment_args(t, lambda_grid, draws_per_path)?;
    if paths.is_empty() {
        return Err(Error::InvalidParameter("empty ensemble".into()));
    }
    let counts = paths
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let mut rng = substream(seed, Domain::Analysis, i as u64);
            increment_counts(p, t, lambda_grid, draws_per_path, &mut rng)
        })
        .collect::<Vec<_>>()
        .into_iter()
        .fold(IncrementCounts::default(), IncrementCounts::merge);
    counts.finish(t, lambda_grid, paths[0].hurst, None)
}

/// Same estimate over simulated replicates of `config`, without storing the
/// paths. Replicate `i` is simulated as in [`ensemble_map`] and draws from
/// substream `(seed, Analysis, i)`.
pub fn increment_tail_streamed(
    config: &SimulationConfig,
    replicates: usize,
    t: f64,
    lambda_grid: &[f64],
    draws_per_path: usize,
    seed: u64,
    window: Option<TailWindow>,
) -> Result<IncrementTail> {
    check_increment_args(t, lambda_grid, draws_per_path)?;
    let hurst = make_offspring(&config.offspring)?.hurst();
    let counts = ensemble_map(config, replicates, |i, s| {
        let mut rng = substream(seed, Domain::Analysis, i as u64);
        Ok(increment_counts(
            &s.path,
            t,
            lambda_grid,
            draws_per_path,
            &mut rng,
        ))
    })?
    .into_iter()
    .fold(IncrementCounts::default(), IncrementCounts::merge);
    counts.finish(t, lambda_grid, hurst, window)
}

/// How query times `s` are chosen for remaining-time records.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum GapSampling {
    /// `s` uniform on the first [`QUERY_FRACTION`] of the span.
    Uniform,
    /// `s` just after a uniformly chosen level-`n` passage, so the gap is a
    /// whole level-`n` crossing duration.
    AfterPassage,
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RemainingTimeRecord {
    pub s: f64,
    pub n: i32,
    pub t_n0: f64,
    pub gap: f64,
    /// Level-`n` subcrossings of the enclosing level-`n+1` crossing that have
    /// started by time `s`, the current one included.
    pub y: u32,
}

/// Level-`n` passages of `path` with, for each, the index of the level-`n+1`
/// crossing it belongs to and the rank inside it. Only passages inside
/// completed parent crossings are kept.
struct Nested {
    times: Vec<f64>,
    /// `rank[j]`: 1-based position of level-`n` crossing `j` within its parent.
    rank: Vec<u32>,
    /// Number of level-`n` crossings inside completed parents.
    complete: usize,
}

fn nested(path: &SamplePath, n: i32) -> Result<Nested> {
    let fine = extract_passage_times(path, n)?;
    let (_, pos) = coarsen(&fine, n);
    let complete = *pos.last().unwrap();
    let mut rank = Vec::with_capacity(complete);
    for w in pos.windows(2) {
        rank.extend(1..=(w[1] - w[0]) as u32);
    }
    Ok(Nested {
        times: fine.iter().map(|p| p.time).collect(),
        rank,
        complete,
    })
}

/// Records for one path. The `s` range is clipped to completed parents.
pub fn remaining_time_records<R: Rng + ?Sized>(
    path: &SamplePath,
    n: i32,
    count: usize,
    sampling: GapSampling,
    rng: &mut R,
) -> Result<Vec<RemainingTimeRecord>> {
    let nest = nested(path, n)?;
    if nest.complete == 0 {
        return Ok(Vec::new());
    }
    let t0 = path.start_time();
    let horizon = (t0 + QUERY_FRACTION * path.span()).min(nest.times[nest.complete]);
    let usable = nest.times[..nest.complete].partition_point(|&t| t < horizon);
    if usable == 0 {
        return Ok(Vec::new());
    }
    let mut out = Vec::with_capacity(count);
    for _ in 0..count {
        let (s, j) = match sampling {
            GapSampling::Uniform => {
                let s = t0 + (horizon - t0) * rng.random::<f64>();
                let j = nest.times[..=usable].partition_point(|&t| t <= s) - 1;
                (s, j)
            }
            GapSampling::AfterPassage => {
                let j = rng.random_range(0..usable);
                (nest.times[j], j)
            }
        };
        let t_n0 = match sampling {
            GapSampling::Uniform if nest.times[j] == s => s,
            _ => nest.times[j + 1],
        };
        out.push(RemainingTimeRecord {
            s,
            n,
            t_n0,
            gap: t_n0 - s,
            y: nest.rank[j],
        });
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RemainingTimeTail {
    pub n: i32,
    pub sampling: GapSampling,
    pub x_grid: Vec<f64>,
    pub records: usize,
    /// `P(gap <= x)`.
    pub p_hat: Vec<f64>,
    pub y_histogram: BTreeMap<u32, usize>,
    pub fit: TailFit,
}

/// Gap law over a stored ensemble; path `i` draws from substream
/// `(seed, Analysis, i)`. `mu` and `H` are taken from the first path.
pub fn remaining_time_tail(
    paths: &[SamplePath],
    n: i32,
    x_grid: &[f64],
    records_per_path: usize,
    sampling: GapSampling,
    seed: u64,
) -> Result<RemainingTimeTail> {
    check_grid(x_grid)?;
    if paths.is_empty() || records_per_path == 0 {
        return Err(Error::InvalidParameter(
            "need a non-empty ensemble and records_per_path > 0".into(),
        ));
    }
    let records: Vec<RemainingTimeRecord> = paths
        .par_iter()
        .enumerate()
        .map(|(i, p)| {
            let mut rng = substream(seed, Domain::Analysis, i as u64);
            remaining_time_records(p, n, records_per_path, sampling, &mut rng)
        })
        .collect::<Result<Vec<_>>>()?
        .into_iter()
        .flatten()
        .collect();
    remaining_time_fit(
        &records,
        x_grid,
        sampling,
        paths[0].mu,
        paths[0].hurst,
        None,
    )
}

/// Fits `ln(-ln P(gap <= x))` against `ln(mu^(-n) x)` with target
/// `-H / (1 - H)`. All records must share one level.
pub fn remaining_time_fit(
    records: &[RemainingTimeRecord],
    x_grid: &[f64],
    sampling: GapSampling,
    mu: f64,
    hurst: f64,
    window: Option<TailWindow>,
) -> Result<RemainingTimeTail> {
    check_grid(x_grid)?;
    let Some(first) = records.first() else {
        return Err(Error::InsufficientTailPoints {
            found: 0,
            needed: crate::tail::MIN_TAIL_POINTS,
        });
    };
    let n = first.n;
    if records.iter().any(|r| r.n != n) {
        return Err(Error::InvalidParameter("records mix levels".into()));
    }
    let mut gaps: Vec<f64> = records.iter().map(|r| r.gap).collect();
    gaps.sort_by(f64::total_cmp);
    let p_hat: Vec<f64> = x_grid
        .iter()
        .map(|&x| gaps.partition_point(|&g| g <= x) as f64 / gaps.len() as f64)
        .collect();
    let mut y_histogram = BTreeMap::new();
    for r in records {
        *y_histogram.entry(r.y).or_insert(0) += 1;
    }
    let scale = mu.powi(-n);
    let abscissa: Vec<f64> = x_grid.iter().map(|x| x * scale).collect();
    let target = -hurst / (1.0 - hurst);
    let fit = match window {
        None => TailFit::fit(&abscissa, &p_hat, target)?,
        Some(w) => w.fit(&abscissa, &p_hat, records.len(), target)?,
    };
    Ok(RemainingTimeTail {
        n,
        sampling,
        x_grid: x_grid.to_vec(),
        records: records.len(),
        p_hat,
        y_histogram,
        fit,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::path::Origin;
    use crate::simulate::{ensemble_map, SimulationConfig};
    use crate::stats::log_grid;
    use crate::{DurationMode, Family};

    fn ensemble(count: usize, depth: u32, mode: DurationMode) -> Vec<SamplePath> {
        let cfg = SimulationConfig::new(Family::GeometricPairs { p: 0.5 }, depth, 77)
            .with_duration_mode(mode);
        ensemble_map(&cfg, count, |_, s| Ok(s.path.normalized())).unwrap()
    }

    #[test]
    fn increment_probabilities_are_ordered() {
        let paths = ensemble(40, 6, DurationMode::Mean);
        let grid = log_grid(0.01, 0.5, 12);
        let r = increment_tail(&paths, 0.02, &grid, 200, 1).unwrap();
        assert_eq!(r.sandwich_violations, 0);
        assert!(r.p_plain.windows(2).all(|w| w[1] <= w[0]));
        assert!(r.p_sup.windows(2).all(|w| w[1] <= w[0]));
        assert!(r.p_plain[0] > 0.9);
        assert_eq!(r.samples, 40 * 200);
    }

    #[test]
    fn increment_tail_is_deterministic() {
        let paths = ensemble(10, 5, DurationMode::Mean);
        let grid = log_grid(0.02, 0.5, 8);
        let a = increment_tail(&paths, 0.02, &grid, 100, 9).unwrap();
        let b = increment_tail(&paths, 0.02, &grid, 100, 9).unwrap();
        assert_eq!(a, b);
    }

    #[test]
    fn long_lag_skips_every_path() {
        let paths = ensemble(3, 4, DurationMode::Mean);
        assert!(increment_tail(&paths, 0.5, &[0.1, 0.2, 0.3, 0.4], 10, 1).is_err());
    }

    #[test]
    fn gap_zero_at_passage_times_for_uniform_ties() {
        // a ramp has passages at every integer; s drawn on a passage gives gap 0
        let t: Vec<f64> = (0..=64).map(f64::from).collect();
        let p = SamplePath::new(t.clone(), t, 0, 0.5, 4.0, Origin::Ingested).unwrap();
        let mut rng = substream(1, Domain::Analysis, 0);
        let recs = remaining_time_records(&p, 0, 500, GapSampling::Uniform, &mut rng).unwrap();
        for r in &recs {
            assert!(r.gap >= 0.0 && r.gap <= 1.0);
            assert_eq!(r.t_n0, r.s.ceil());
            assert!(r.y == 1 || r.y == 2);
        }
        let recs = remaining_time_records(&p, 0, 100, GapSampling::AfterPassage, &mut rng).unwrap();
        assert!(recs.iter().all(|r| r.gap == 1.0 && r.s.fract() == 0.0));
    }

    #[test]
    fn gap_cdf_is_monotone() {
        let paths = ensemble(20, 7, DurationMode::Sampled { k: 6 });
        let grid = log_grid(1e-5, 1e-2, 10);
        for sampling in [GapSampling::Uniform, GapSampling::AfterPassage] {
            let r = remaining_time_tail(&paths, -5, &grid, 200, sampling, 3);
            let r = match r {
                Ok(r) => r,
                Err(e) => {
                    assert_eq!(e.code(), "INSUFFICIENT_TAIL_POINTS");
                    continue;
                }
            };
            assert!(r.p_hat.windows(2).all(|w| w[1] >= w[0]));
            assert!(r.y_histogram.keys().all(|&y| y >= 1));
        }
    }
}
