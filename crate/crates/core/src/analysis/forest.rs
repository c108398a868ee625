//! Passage times and crossing forests of piecewise-linear paths.
//!
//! The lattice at level `n` is `X(0) + 2^n Z`. Passages are located by exact
//! root finding on the linear segments. Coarser levels are read off the
//! finest requested level: a level-`n+1` passage is precisely a level-`n`
//! passage to an even index that differs from the current coarse point.

use std::io::Write;
use std::ops::RangeInclusive;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::path::SamplePath;
use crate::tree::Orientation;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct Passage {
    pub time: f64,
    /// Lattice value `X(0) + index * 2^level`.
    pub value: f64,
    pub index: i64,
}

/// Passage times `T^n_0 = start, T^n_1, ...` at `level`.
pub fn extract_passage_times(path: &SamplePath, level: i32) -> Result<Vec<Passage>> {
    if level < path.resolution_level {
        return Err(Error::LevelTooFine {
            level,
            resolution: path.resolution_level,
        });
    }
    let h = 2f64.powi(level);
    let anchor = path.values()[0];
    let at = |k: i64| anchor + k as f64 * h;
    let (times, values) = (path.times(), path.values());
    let mut out = vec![Passage {
        time: times[0],
        value: anchor,
        index: 0,
    }];
    let mut p = 0i64;
    for i in 0..times.len() - 1 {
        let (ta, tb) = (times[i], times[i + 1]);
        let (va, vb) = (values[i], values[i + 1]);
        let dir = if vb > va {
            1
        } else if vb < va {
            -1
        } else {
            continue;
        };
        loop {
            let target = at(p + dir);
            let reached = if dir > 0 { vb >= target } else { vb <= target };
            if !reached {
                break;
            }
            let t = if vb == target {
                tb
            } else {
                ta + (target - va) / (vb - va) * (tb - ta)
            };
            p += dir;
            out.push(Passage {
                time: t,
                value: target,
                index: p,
            });
        }
    }
    Ok(out)
}

/// Coarsen level-`n` passages to level `n + 1`. Returns the coarse passages
/// and, for each, its position in the fine list.
pub(crate) fn coarsen(fine: &[Passage], fine_level: i32) -> (Vec<Passage>, Vec<usize>) {
    let h = 2f64.powi(fine_level + 1);
    let anchor = fine[0].value - fine[0].index as f64 * 2f64.powi(fine_level);
    let mut coarse = vec![Passage {
        time: fine[0].time,
        value: fine[0].value,
        index: fine[0].index.div_euclid(2),
    }];
    let mut pos = vec![0usize];
    let mut c = coarse[0].index;
    for (j, f) in fine.iter().enumerate().skip(1) {
        if f.index.rem_euclid(2) == 0 && f.index / 2 != c {
            c = f.index / 2;
            coarse.push(Passage {
                time: f.time,
                value: anchor + c as f64 * h,
                index: c,
            });
            pos.push(j);
        }
    }
    (coarse, pos)
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossingRecord {
    pub start_time: f64,
    pub end_time: f64,
    pub start_value: f64,
    pub orientation: Orientation,
    /// Number of level `n - 1` subcrossings; absent at the finest level.
    pub subcrossing_count: Option<u32>,
    pub duration: f64,
}

/// Completed crossings at each level of a contiguous range.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CrossingForest {
    pub base_level: i32,
    /// `levels[i]` holds the crossings of level `base_level + i`.
    pub levels: Vec<Vec<CrossingRecord>>,
}

impl CrossingForest {
    pub fn top_level(&self) -> i32 {
        self.base_level + self.levels.len() as i32 - 1
    }

    pub fn level(&self, n: i32) -> &[CrossingRecord] {
        let i = n - self.base_level;
        assert!(
            i >= 0 && (i as usize) < self.levels.len(),
            "level {n} not in forest"
        );
        &self.levels[i as usize]
    }

    pub fn level_range(&self) -> RangeInclusive<i32> {
        self.base_level..=self.top_level()
    }

    /// Contiguity, nesting, parity and orientation/value consistency.
    pub fn check_invariants(&self) -> std::result::Result<(), String> {
        for (i, recs) in self.levels.iter().enumerate() {
            let n = self.base_level + i as i32;
            let h = 2f64.powi(n);
            for w in recs.windows(2) {
                if w[0].end_time != w[1].start_time {
                    return Err(format!(
                        "level {n}: records not contiguous at {}",
                        w[0].end_time
                    ));
                }
            }
            for r in recs {
                let end_value = r.start_value + r.orientation.sign() as f64 * h;
                if r.start_value.is_nan() || end_value.is_nan() {
                    return Err(format!("level {n}: NaN value"));
                }
                if let Some(z) = r.subcrossing_count {
                    if z < 2 || z % 2 != 0 {
                        return Err(format!("level {n}: subcrossing count {z}"));
                    }
                }
            }
            if i == 0 {
                continue;
            }
            let fine = &self.levels[i - 1];
            let mut j = 0usize;
            for r in recs {
                let z = r.subcrossing_count.ok_or("missing subcrossing count")? as usize;
                if j + z > fine.len() {
                    return Err(format!("level {n}: parent extends past children"));
                }
                let kids = &fine[j..j + z];
                if kids[0].start_time != r.start_time || kids[z - 1].end_time != r.end_time {
                    return Err(format!("level {n}: span differs from its subcrossings"));
                }
                let moved: i64 = kids.iter().map(|k| k.orientation.sign()).sum();
                if moved != 2 * r.orientation.sign() {
                    return Err(format!(
                        "level {n}: subcrossings do not complete the parent"
                    ));
                }
                j += z;
            }
        }
        Ok(())
    }

    /// One NDJSON line per crossing, each tagged with its level.
    pub fn write_ndjson<W: Write>(&self, mut w: W) -> Result<()> {
        #[derive(Serialize)]
        struct Line<'a> {
            level: i32,
            position: usize,
            #[serde(flatten)]
            record: &'a CrossingRecord,
        }
        for (i, recs) in self.levels.iter().enumerate() {
            for (k, r) in recs.iter().enumerate() {
                serde_json::to_writer(
                    &mut w,
                    &Line {
                        level: self.base_level + i as i32,
                        position: k,
                        record: r,
                    },
                )?;
                w.write_all(b"\n")?;
            }
        }
        Ok(())
    }
}

fn records(passages: &[Passage], counts: Option<&[usize]>) -> Vec<CrossingRecord> {
    passages
        .windows(2)
        .enumerate()
        .map(|(k, w)| CrossingRecord {
            start_time: w[0].time,
            end_time: w[1].time,
            start_value: w[0].value,
            orientation: Orientation::from_sign(w[1].index - w[0].index),
            subcrossing_count: counts.map(|c| (c[k + 1] - c[k]) as u32),
            duration: w[1].time - w[0].time,
        })
        .collect()
}

/// Crossing forest over `levels` (inclusive). Crossings still open at the
/// end of the path are dropped.
pub fn extract_crossing_forest(
    path: &SamplePath,
    levels: RangeInclusive<i32>,
) -> Result<CrossingForest> {
    let (lo, hi) = (*levels.start(), *levels.end());
    if hi < lo {
        return Err(Error::InvalidParameter(format!(
            "empty level range {lo}..={hi}"
        )));
    }
    let mut passages = extract_passage_times(path, lo)?;
    let mut out = vec![records(&passages, None)];
    for n in lo..hi {
        let (coarse, pos) = coarsen(&passages, n);
        out.push(records(&coarse, Some(&pos)));
        passages = coarse;
    }
    if out.last().unwrap().is_empty() {
        return Err(Error::NoCompleteCrossing { level: hi });
    }
    Ok(CrossingForest {
        base_level: lo,
        levels: out,
    })
}
