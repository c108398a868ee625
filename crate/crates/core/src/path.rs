//! Piecewise-linear sample paths.

use std::io::Write;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "kebab-case")]
pub enum Origin {
    Simulated { seed: Option<u64> },
    Ingested,
}

/// Knots `(times[i], values[i])` joined by straight lines.
#[derive(Debug, Clone, PartialEq)]
pub struct SamplePath {
    times: Vec<f64>,
    values: Vec<f64>,
    /// Spatial step of the path is `2^resolution_level`.
    pub resolution_level: i32,
    pub hurst: f64,
    pub mu: f64,
    pub origin: Origin,
}

/// Metadata stored next to an exported path.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathSidecar {
    pub tool_version: String,
    pub resolution_level: i32,
    pub hurst: f64,
    pub mu: f64,
    pub seed: Option<u64>,
    pub knots: usize,
    pub config: serde_json::Value,
}

impl SamplePath {
    pub fn new(
        times: Vec<f64>,
        values: Vec<f64>,
        resolution_level: i32,
        hurst: f64,
        mu: f64,
        origin: Origin,
    ) -> Result<SamplePath> {
        if times.len() != values.len() {
            return Err(Error::InvalidParameter(
                "times and values differ in length".into(),
            ));
        }
        if times.len() < 2 {
            return Err(Error::InvalidParameter(
                "a path needs at least two knots".into(),
            ));
        }
        if let Some(i) = times.windows(2).position(|w| !(w[1] > w[0])) {
            return Err(Error::NonMonotoneTime {
                line: i + 2,
                time: times[i + 1],
            });
        }
        Ok(SamplePath {
            times,
            values,
            resolution_level,
            hurst,
            mu,
            origin,
        })
    }

    pub fn times(&self) -> &[f64] {
        &self.times
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn len(&self) -> usize {
        self.times.len()
    }

    pub fn is_empty(&self) -> bool {
        self.times.is_empty()
    }

    pub fn start_time(&self) -> f64 {
        self.times[0]
    }

    pub fn end_time(&self) -> f64 {
        *self.times.last().unwrap()
    }

    pub fn span(&self) -> f64 {
        self.end_time() - self.start_time()
    }

    /// Spatial step `2^resolution_level`.
    pub fn spatial_step(&self) -> f64 {
        2f64.powi(self.resolution_level)
    }

    /// Index `i` of the segment `[times[i], times[i + 1])` containing `t`,
    /// clamped to the first and last segments.
    pub fn segment_index(&self, t: f64) -> usize {
        let k = self.times.partition_point(|&x| x <= t);
        k.saturating_sub(1).min(self.times.len() - 2)
    }

    /// Linear interpolation; exact at knots, clamped outside the span.
    pub fn value_at(&self, t: f64) -> f64 {
        if t <= self.times[0] {
            return self.values[0];
        }
        if t >= self.end_time() {
            return *self.values.last().unwrap();
        }
        let i = self.segment_index(t);
        let (t1, t2) = (self.times[i], self.times[i + 1]);
        let (v1, v2) = (self.values[i], self.values[i + 1]);
        if t == t1 {
            return v1;
        }
        v1 + (v2 - v1) * ((t - t1) / (t2 - t1))
    }

    /// Same path with time mapped affinely onto `[0, 1]`.
    pub fn normalized(&self) -> SamplePath {
        let (t0, span) = (self.start_time(), self.span());
        let mut times: Vec<f64> = self.times.iter().map(|t| (t - t0) / span).collect();
        *times.last_mut().unwrap() = 1.0;
        SamplePath {
            times,
            values: self.values.clone(),
            ..*self
        }
    }

    pub(crate) fn with_knots(&self, times: Vec<f64>, values: Vec<f64>) -> SamplePath {
        SamplePath {
            times,
            values,
            ..*self
        }
    }

    /// CSV with header `time,value`, full round-trip precision.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let mut buf = String::with_capacity(64 * 1024);
        buf.push_str("time,value\n");
        for (t, v) in self.times.iter().zip(&self.values) {
            buf.push_str(&format!("{t},{v}\n"));
            if buf.len() > 60 * 1024 {
                w.write_all(buf.as_bytes())?;
                buf.clear();
            }
        }
        w.write_all(buf.as_bytes())?;
        Ok(())
    }

    pub fn to_csv(&self) -> String {
        let mut out = Vec::new();
        self.write_csv(&mut out)
            .expect("writing to a Vec cannot fail");
        String::from_utf8(out).expect("ascii")
    }

    pub fn sidecar(&self, config: serde_json::Value) -> PathSidecar {
        PathSidecar {
            tool_version: crate::VERSION.to_string(),
            resolution_level: self.resolution_level,
            hurst: self.hurst,
            mu: self.mu,
            seed: match self.origin {
                Origin::Simulated { seed } => seed,
                Origin::Ingested => None,
            },
            knots: self.len(),
            config,
        }
    }
}

/// Range max/min over knot values in `O(1)` block lookups plus short scans.
pub(crate) struct RangeExtrema<'a> {
    values: &'a [f64],
    block_max: Vec<Vec<f64>>,
    block_min: Vec<Vec<f64>>,
}

const BLOCK: usize = 64;

impl<'a> RangeExtrema<'a> {
    pub(crate) fn new(values: &'a [f64]) -> Self {
        let base_max: Vec<f64> = values
            .chunks(BLOCK)
            .map(|c| c.iter().copied().fold(f64::NEG_INFINITY, f64::max))
            .collect();
        let base_min: Vec<f64> = values
            .chunks(BLOCK)
            .map(|c| c.iter().copied().fold(f64::INFINITY, f64::min))
            .collect();
        let mut block_max = vec![base_max];
        let mut block_min = vec![base_min];
        let mut w = 1;
        while 2 * w <= block_max[0].len() {
            let (pm, pn) = (block_max.last().unwrap(), block_min.last().unwrap());
            let n = pm.len() - w;
            block_max.push((0..n).map(|i| pm[i].max(pm[i + w])).collect());
            block_min.push((0..n).map(|i| pn[i].min(pn[i + w])).collect());
            w *= 2;
        }
        RangeExtrema {
            values,
            block_max,
            block_min,
        }
    }

    /// `(min, max)` of `values[lo..hi]`; `None` when empty.
    pub(crate) fn query(&self, lo: usize, hi: usize) -> Option<(f64, f64)> {
        if lo >= hi {
            return None;
        }
        let scan = |a: usize, b: usize| {
            self.values[a..b]
                .iter()
                .fold((f64::INFINITY, f64::NEG_INFINITY), |(mn, mx), &v| {
                    (mn.min(v), mx.max(v))
                })
        };
        let first_full = lo.div_ceil(BLOCK);
        let last_full = hi / BLOCK;
        if first_full >= last_full {
            return Some(scan(lo, hi));
        }
        let (mut mn, mut mx) = scan(lo, first_full * BLOCK);
        let (a, b) = scan(last_full * BLOCK, hi);
        mn = mn.min(a);
        mx = mx.max(b);
        let span = last_full - first_full;
        let k = usize::BITS as usize - 1 - span.leading_zeros() as usize;
        let w = 1 << k;
        mx = mx
            .max(self.block_max[k][first_full])
            .max(self.block_max[k][last_full - w]);
        mn = mn
            .min(self.block_min[k][first_full])
            .min(self.block_min[k][last_full - w]);
        Some((mn, mx))
    }
}

/// `(min, max)` of the path over the closed window `[a, b]`, interpolating at
/// the window ends.
pub(crate) fn window_extrema(
    path: &SamplePath,
    ext: &RangeExtrema<'_>,
    a: f64,
    b: f64,
) -> (f64, f64) {
    let (va, vb) = (path.value_at(a), path.value_at(b));
    let mut mn = va.min(vb);
    let mut mx = va.max(vb);
    let times = path.times();
    let lo = times.partition_point(|&t| t < a);
    let hi = times.partition_point(|&t| t <= b);
    if let Some((qn, qx)) = ext.query(lo, hi) {
        mn = mn.min(qn);
        mx = mx.max(qx);
    }
    (mn, mx)
}
