//! Config loading, flag overrides and the error-to-exit-code mapping.

use std::fs;
use std::ops::RangeInclusive;
use std::path::Path;

use serde_json::{json, Map, Value};

use crate::FamilyArgs;

pub const EXIT_CONFIG: u8 = 2;
pub const EXIT_BUDGET: u8 = 3;
pub const EXIT_ANALYSIS: u8 = 4;

#[derive(Debug)]
pub struct CliError {
    pub exit: u8,
    pub message: String,
}

impl CliError {
    pub fn config(message: impl Into<String>) -> CliError {
        CliError {
            exit: EXIT_CONFIG,
            message: message.into(),
        }
    }

    pub fn analysis(message: impl Into<String>) -> CliError {
        CliError {
            exit: EXIT_ANALYSIS,
            message: message.into(),
        }
    }

    /// Parameter errors are configuration errors, budget errors are
    /// resource errors, everything else is an analysis failure.
    pub fn from_core(e: cebp::Error) -> CliError {
        use cebp::Error as E;
        let exit = if e.is_budget() {
            EXIT_BUDGET
        } else {
            match e {
                E::InvalidParameter(_)
                | E::InvalidPmf(_)
                | E::InvalidZ { .. }
                | E::MuNotSupercritical { .. } => EXIT_CONFIG,
                _ => EXIT_ANALYSIS,
            }
        };
        CliError {
            exit,
            message: format!("{}: {e}", e.code()),
        }
    }
}

impl From<cebp::Error> for CliError {
    fn from(e: cebp::Error) -> CliError {
        CliError::from_core(e)
    }
}

pub type CliResult<T> = Result<T, CliError>;

/// Load a JSON object from `path`, or `{}` when absent. A sidecar written
/// by this tool yields its embedded `config`.
pub fn load_config(path: Option<&Path>) -> CliResult<Map<String, Value>> {
    let Some(path) = path else {
        return Ok(Map::new());
    };
    let text = fs::read_to_string(path)
        .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    let v: Value = serde_json::from_str(&text)
        .map_err(|e| CliError::config(format!("{}: {e}", path.display())))?;
    let v = match v {
        Value::Object(mut m) if m.contains_key("tool_version") && m.contains_key("config") => {
            m.remove("config").unwrap()
        }
        v => v,
    };
    match v {
        Value::Object(m) => Ok(m),
        _ => Err(CliError::config(format!(
            "{}: config must be a JSON object",
            path.display()
        ))),
    }
}

pub fn set(map: &mut Map<String, Value>, key: &str, v: Option<impl Into<Value>>) {
    if let Some(v) = v {
        map.insert(key.into(), v.into());
    }
}

/// Apply `KEY=JSON` overrides; a value that is not valid JSON is taken as a string.
pub fn apply_sets(map: &mut Map<String, Value>, sets: &[String]) -> CliResult<()> {
    for s in sets {
        let (k, v) = s
            .split_once('=')
            .ok_or_else(|| CliError::config(format!("--set expects KEY=JSON, got {s:?}")))?;
        let v = serde_json::from_str(v).unwrap_or_else(|_| Value::String(v.into()));
        map.insert(k.trim().into(), v);
    }
    Ok(())
}

fn parse_pmf(s: &str) -> CliResult<Value> {
    let mut pmf = Map::new();
    for part in s.split(',').filter(|p| !p.trim().is_empty()) {
        let (z, p) = part
            .split_once(':')
            .ok_or_else(|| CliError::config(format!("pmf entry {part:?} is not z:p")))?;
        let z: u32 = z
            .trim()
            .parse()
            .map_err(|_| CliError::config(format!("bad z in {part:?}")))?;
        let p: f64 = p
            .trim()
            .parse()
            .map_err(|_| CliError::config(format!("bad p in {part:?}")))?;
        pmf.insert(z.to_string(), json!(p));
    }
    Ok(Value::Object(pmf))
}

/// Merge family flags into the object stored under `key`. Naming a
/// different family discards the parameters of the old one.
pub fn apply_family(map: &mut Map<String, Value>, key: &str, f: &FamilyArgs) -> CliResult<()> {
    if let Some(h) = f.hurst {
        if !(h > 0.0 && h < 1.0) {
            return Err(CliError::config(format!("--H must lie in (0, 1), got {h}")));
        }
        let fam =
            serde_json::to_value(cebp::Family::geometric_for_hurst(h)).expect("families serialise");
        map.insert(key.into(), fam);
        return Ok(());
    }
    let mut obj = match map.remove(key) {
        Some(Value::Object(m)) => m,
        _ => Map::new(),
    };
    if let Some(name) = &f.family {
        if obj.get("family").and_then(Value::as_str) != Some(name) {
            obj.clear();
        }
        obj.insert("family".into(), json!(name));
    }
    set(&mut obj, "p", f.p);
    set(&mut obj, "lambda", f.lambda);
    set(&mut obj, "b", f.b);
    if let Some(pmf) = &f.pmf {
        obj.insert("pmf".into(), parse_pmf(pmf)?);
    }
    if !obj.is_empty() {
        map.insert(key.into(), Value::Object(obj));
    }
    Ok(())
}

/// Inclusive range `lo:hi`.
pub fn parse_range<T: std::str::FromStr + PartialOrd>(s: &str) -> CliResult<RangeInclusive<T>> {
    let bad = || CliError::config(format!("range {s:?} is not lo:hi"));
    let (lo, hi) = s.split_once(':').ok_or_else(bad)?;
    let lo: T = lo.trim().parse().map_err(|_| bad())?;
    let hi: T = hi.trim().parse().map_err(|_| bad())?;
    if lo > hi {
        return Err(CliError::config(format!("range {s:?} is empty")));
    }
    Ok(lo..=hi)
}
