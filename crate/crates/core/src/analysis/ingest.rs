//! CSV ingestion of externally recorded paths.

use std::fs::File;
use std::io::Read;
use std::path::Path;

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::path::{Origin, SamplePath};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum HeaderMode {
    /// Treat the first row as a header when its time field is not numeric.
    Auto,
    Present,
    Absent,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ColumnSpec {
    pub time_col: usize,
    pub value_col: usize,
    pub header: HeaderMode,
    /// Shift values so the path starts at 0.
    pub anchor_origin: bool,
}

impl Default for ColumnSpec {
    fn default() -> Self {
        ColumnSpec {
            time_col: 0,
            value_col: 1,
            header: HeaderMode::Auto,
            anchor_origin: false,
        }
    }
}

pub fn ingest_csv(path: &Path, spec: &ColumnSpec) -> Result<SamplePath> {
    ingest_reader(File::open(path)?, spec)
}

/// Reads `time,value` rows. The resolution level is
/// `floor(log2(min nonzero |dX|))`. Hurst index and mean are unknown and
/// set to NaN.
pub fn ingest_reader<R: Read>(r: R, spec: &ColumnSpec) -> Result<SamplePath> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .trim(csv::Trim::All)
        .from_reader(r);
    let mut times = Vec::new();
    let mut values = Vec::new();
    let mut first = true;
    for rec in rdr.records() {
        let rec = rec.map_err(|e| Error::Parse {
            line: e.position().map_or(0, |p| p.line() as usize),
            reason: e.to_string(),
        })?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        if rec.iter().all(str::is_empty) {
            continue;
        }
        let field = |col: usize| -> Result<f64> {
            let s = rec.get(col).ok_or_else(|| Error::Parse {
                line,
                reason: format!("missing column {col}"),
            })?;
            s.parse::<f64>().map_err(|_| Error::Parse {
                line,
                reason: format!("column {col}: {s:?} is not a number"),
            })
        };
        if std::mem::take(&mut first) {
            let skip = match spec.header {
                HeaderMode::Present => true,
                HeaderMode::Absent => false,
                HeaderMode::Auto => field(spec.time_col).is_err(),
            };
            if skip {
                continue;
            }
        }
        let (t, v) = (field(spec.time_col)?, field(spec.value_col)?);
        if !t.is_finite() || !v.is_finite() {
            return Err(Error::Parse {
                line,
                reason: "non-finite value".into(),
            });
        }
        if let Some(&prev) = times.last() {
            if !(t > prev) {
                return Err(Error::NonMonotoneTime { line, time: t });
            }
        }
        times.push(t);
        values.push(v);
    }
    if times.len() < 2 {
        return Err(Error::Parse {
            line: times.len() + 1,
            reason: "a path needs at least two rows".into(),
        });
    }
    let step = values
        .windows(2)
        .map(|w| (w[1] - w[0]).abs())
        .filter(|d| *d > 0.0)
        .fold(f64::INFINITY, f64::min);
    if !step.is_finite() {
        return Err(Error::InvalidParameter("path is constant".into()));
    }
    if spec.anchor_origin {
        let v0 = values[0];
        values.iter_mut().for_each(|v| *v -= v0);
    }
    SamplePath::new(
        times,
        values,
        step.log2().floor() as i32,
        f64::NAN,
        f64::NAN,
        Origin::Ingested,
    )
}
