use std::ffi::OsString;
use std::fs::{self, File};
use std::io::{BufWriter, Write};
use std::path::{Path, PathBuf};

use serde::Serialize;
use serde_json::{json, Map, Value};

use cebp::analysis::modulus::DEFAULT_STABILITY_BOUND;
use cebp::analysis::{
    estimate_hurst, extract_crossing_forest, holder_histogram, ingest_csv, modulus_ratio,
    ColumnSpec, HeaderMode, DEFAULT_BIN_WIDTH,
};
use cebp::branching::DEFAULT_W_GENERATIONS;
use cebp::offspring::{check_assumption_gw, check_assumption_z, default_y_max};
use cebp::simulate::simulate_with_trees;
use cebp::tree_io::write_tree;
use cebp::verify::run_suite;
use cebp::{make_offspring, Family, SamplePath, SimulationConfig};

use crate::config::{apply_family, apply_sets, load_config, parse_range, set, CliError, CliResult};
use crate::{AnalyzeArgs, CheckDistArgs, IngestArgs, SimulateArgs, VerifyArgs};

/// `prefix` with `suffix` appended to its final component.
fn with_suffix(prefix: &Path, suffix: &str) -> PathBuf {
    let mut s = OsString::from(prefix.as_os_str());
    s.push(suffix);
    PathBuf::from(s)
}

fn create(path: &Path) -> CliResult<BufWriter<File>> {
    File::create(path)
        .map(BufWriter::new)
        .map_err(|e| CliError::analysis(format!("{}: {e}", path.display())))
}

fn write_json<T: Serialize>(path: &Path, v: &T) -> CliResult<()> {
    let mut w = create(path)?;
    serde_json::to_writer_pretty(&mut w, v)
        .map_err(cebp::Error::from)
        .and_then(|_| w.write_all(b"\n").map_err(cebp::Error::from))
        .and_then(|_| w.flush().map_err(cebp::Error::from))?;
    Ok(())
}

fn finish(mut w: BufWriter<File>) -> CliResult<()> {
    w.flush().map_err(cebp::Error::from)?;
    Ok(())
}

/// Gnuplot reads `#` lines as comments.
fn write_plot(path: &Path, csv: &str) -> CliResult<()> {
    let mut w = create(path)?;
    w.write_all(b"# ").map_err(cebp::Error::from)?;
    w.write_all(csv.as_bytes()).map_err(cebp::Error::from)?;
    finish(w)
}

/// Goes through text because integer map keys (custom pmfs) do not
/// deserialise from a `Value`.
fn from_json<T: serde::de::DeserializeOwned>(v: Value) -> CliResult<T> {
    serde_json::from_str(&v.to_string()).map_err(|e| CliError::config(format!("config: {e}")))
}

fn usage(sub: &str, missing: &str) -> CliError {
    CliError::config(format!(
        "the following required argument was not provided: {missing}\n\n\
         Usage: cebp {sub} {missing} [OPTIONS]\n\nFor more information, try 'cebp {sub} --help'."
    ))
}

// ------------------------------------------------------------- simulate

fn simulation_config(a: &SimulateArgs) -> CliResult<SimulationConfig> {
    let mut m = load_config(a.config.as_deref())?;
    apply_family(&mut m, "offspring", &a.family)?;
    set(&mut m, "depth", a.depth);
    set(&mut m, "seed", a.seed);
    set(&mut m, "node_budget", a.node_budget);
    match (a.duration_mode.as_deref(), a.k) {
        (None, None) => {}
        (Some("mean"), None) => {
            m.insert("duration_mode".into(), json!({"mode": "mean"}));
        }
        (Some("mean"), Some(_)) => {
            return Err(CliError::config(
                "--k only applies to --duration-mode sampled",
            ))
        }
        (Some("sampled") | None, k) => {
            let k = k.unwrap_or(DEFAULT_W_GENERATIONS);
            m.insert("duration_mode".into(), json!({"mode": "sampled", "k": k}));
        }
        (Some(other), _) => {
            return Err(CliError::config(format!("unknown duration mode {other:?}")))
        }
    }
    if let Some(h) = a.tile_horizon {
        m.insert(
            "root_mode".into(),
            json!({"mode": "tile", "target_horizon": h}),
        );
    }
    if !m.contains_key("offspring") {
        return Err(usage("simulate", "--family <FAMILY>"));
    }
    if !m.contains_key("depth") {
        return Err(usage("simulate", "--depth <DEPTH>"));
    }
    from_json(Value::Object(m))
}

pub fn simulate(a: SimulateArgs) -> CliResult<()> {
    let cfg = simulation_config(&a)?;
    cfg.validate()?;
    let sim = simulate_with_trees(&cfg)?;
    let config = serde_json::to_value(&cfg).expect("configs serialise");

    let mut w = create(&with_suffix(&a.out, ".path.csv"))?;
    sim.path.write_csv(&mut w)?;
    finish(w)?;
    // one tree file per root crossing when roots are tiled
    for (i, tree) in sim.trees.iter().enumerate() {
        let name = if sim.trees.len() == 1 {
            ".tree.ndjson".to_string()
        } else {
            format!(".tree.{i}.ndjson")
        };
        let mut w = create(&with_suffix(&a.out, &name))?;
        write_tree(tree, &mut w)?;
        finish(w)?;
    }
    write_json(&with_suffix(&a.out, ".json"), &sim.path.sidecar(config))?;
    eprintln!(
        "wrote {} knots, {} tree(s), prefix {}",
        sim.path.len(),
        sim.trees.len(),
        a.out.display()
    );
    Ok(())
}

// -------------------------------------------------------------- analyze

fn default_prefix(input: &Path) -> PathBuf {
    let s = input.to_string_lossy();
    let stem = s
        .strip_suffix(".path.csv")
        .or_else(|| s.strip_suffix(".csv"))
        .unwrap_or(&s);
    PathBuf::from(stem)
}

/// Seed recorded in the sidecar of a simulated artifact, if any.
fn sidecar_seed(input: &Path) -> Option<u64> {
    let text = fs::read_to_string(with_suffix(&default_prefix(input), ".json")).ok()?;
    serde_json::from_str::<Value>(&text)
        .ok()?
        .get("seed")?
        .as_u64()
}

fn string_field(m: &Map<String, Value>, key: &str) -> CliResult<Option<String>> {
    match m.get(key) {
        None | Some(Value::Null) => Ok(None),
        Some(Value::String(s)) => Ok(Some(s.clone())),
        Some(Value::Array(v)) if v.len() == 2 => Ok(Some(format!("{}:{}", v[0], v[1]))),
        Some(v) => Err(CliError::config(format!(
            "{key}: expected \"lo:hi\", got {v}"
        ))),
    }
}

/// Highest level with a complete crossing, searched down from the value range.
fn auto_levels(path: &SamplePath) -> CliResult<std::ops::RangeInclusive<i32>> {
    let (lo, hi) = path
        .values()
        .iter()
        .fold((f64::INFINITY, f64::NEG_INFINITY), |(a, b), &v| {
            (a.min(v), b.max(v))
        });
    let base = path.resolution_level;
    let mut top = ((hi - lo).log2().floor() as i32).max(base);
    while top > base {
        match extract_crossing_forest(path, base..=top) {
            Ok(_) => break,
            Err(cebp::Error::NoCompleteCrossing { .. }) => top -= 1,
            Err(e) => return Err(e.into()),
        }
    }
    Ok(base..=top)
}

pub fn analyze(a: AnalyzeArgs) -> CliResult<()> {
    let mut m = load_config(a.config.as_deref())?;
    set(&mut m, "levels", a.levels.clone());
    set(&mut m, "holder_eps", a.holder_eps.clone());
    set(&mut m, "holder_grid", a.holder_grid);
    set(&mut m, "modulus_l", a.modulus_l.clone());
    set(&mut m, "hurst", a.hurst);
    if let Some(k) = m.keys().find(|k| {
        ![
            "input",
            "levels",
            "holder_eps",
            "holder_grid",
            "modulus_l",
            "hurst",
        ]
        .contains(&k.as_str())
    }) {
        return Err(CliError::config(format!("config: unknown field {k:?}")));
    }
    let holder_grid = match m.get("holder_grid") {
        None | Some(Value::Null) => 1000,
        Some(v) => v
            .as_u64()
            .ok_or_else(|| CliError::config("holder_grid must be an integer"))?
            as usize,
    };
    let hurst_override = match m.get("hurst") {
        None | Some(Value::Null) => None,
        Some(v) => Some(
            v.as_f64()
                .ok_or_else(|| CliError::config("hurst must be a number"))?,
        ),
    };
    let levels = string_field(&m, "levels")?
        .map(|s| parse_range::<i32>(&s))
        .transpose()?;
    let holder_eps = string_field(&m, "holder_eps")?
        .map(|s| parse_range::<i32>(&s))
        .transpose()?;
    let modulus_l = string_field(&m, "modulus_l")?
        .map(|s| parse_range::<u32>(&s))
        .transpose()?;

    let path = ingest_csv(&a.input, &ColumnSpec::default())?;
    let levels = match levels {
        Some(l) => l,
        None => auto_levels(&path)?,
    };
    let prefix = a.out.clone().unwrap_or_else(|| default_prefix(&a.input));

    let forest = extract_crossing_forest(&path, levels.clone())?;
    let mut w = create(&with_suffix(&prefix, ".forest.ndjson"))?;
    forest.write_ndjson(&mut w)?;
    finish(w)?;

    let estimate = estimate_hurst(&forest)?;
    let holder = holder_eps
        .clone()
        .map(|eps| holder_histogram(&path, holder_grid, eps, DEFAULT_BIN_WIDTH))
        .transpose()?;
    let gauge = hurst_override.unwrap_or(estimate.hurst_hat);
    let modulus = modulus_l
        .clone()
        .map(|l| modulus_ratio(&path, gauge, l, DEFAULT_STABILITY_BOUND))
        .transpose()?;

    let config = json!({
        "input": a.input,
        "levels": [levels.start(), levels.end()],
        "holder_eps": holder_eps.map(|r| [*r.start(), *r.end()]),
        "holder_grid": holder_grid,
        "modulus_l": modulus_l.map(|r| [*r.start(), *r.end()]),
        "hurst": hurst_override,
    });
    let counts: Vec<usize> = forest.levels.iter().map(Vec::len).collect();
    let report = json!({
        "tool_version": cebp::VERSION,
        "config": config,
        "seed": sidecar_seed(&a.input),
        "forest": { "base_level": forest.base_level, "top_level": forest.top_level(), "crossings_per_level": counts },
        "estimate": estimate,
        "holder": holder.as_ref().map(|h| json!({
            "eps_levels": h.eps_levels, "mean": h.mean, "std": h.std, "histogram": h.histogram,
        })),
        "modulus": modulus,
    });
    write_json(&with_suffix(&prefix, ".estimate.json"), &report)?;

    if a.emit_plots {
        let mut s = String::from("level,mean_count\n");
        for c in &estimate.per_level_counts {
            s.push_str(&format!("{},{}\n", c.level, c.mean_count));
        }
        write_plot(&with_suffix(&prefix, ".counts.csv"), &s)?;
        if let Some(h) = &holder {
            write_plot(&with_suffix(&prefix, ".holder.csv"), &h.to_csv())?;
        }
        if let Some(r) = &modulus {
            write_plot(&with_suffix(&prefix, ".modulus.csv"), &r.to_csv())?;
        }
    }
    println!(
        "{}",
        json!({ "mu_hat": estimate.mu_hat, "hurst_hat": estimate.hurst_hat, "stderr": estimate.stderr })
    );
    Ok(())
}

// --------------------------------------------------------------- verify

pub fn verify(a: VerifyArgs) -> CliResult<()> {
    let mut m = load_config(a.config.as_deref())?;
    apply_family(&mut m, "family", &a.family)?;
    set(&mut m, "depth", a.depth);
    set(&mut m, "seeds", a.seeds);
    set(&mut m, "seed", a.seed);
    apply_sets(&mut m, &a.set)?;
    let verdict = run_suite(a.suite, Value::Object(m))?;
    let text = serde_json::to_string_pretty(&verdict).expect("verdicts serialise");
    println!("{text}");
    if let Some(out) = &a.out {
        write_json(out, &verdict)?;
    }
    if let Some(prefix) = &a.emit_plots {
        for p in &verdict.plots {
            write_plot(&with_suffix(prefix, &format!(".{}.csv", p.name)), &p.csv)?;
        }
    }
    if verdict.pass {
        Ok(())
    } else {
        let failed: Vec<&str> = verdict
            .criteria
            .iter()
            .filter(|c| !c.pass)
            .map(|c| c.name.as_str())
            .collect();
        Err(CliError::analysis(format!(
            "suite {} failed: {}",
            a.suite,
            failed.join(", ")
        )))
    }
}

// ----------------------------------------------------------- check-dist

pub fn check_dist(a: CheckDistArgs) -> CliResult<()> {
    let mut m = load_config(a.config.as_deref())?;
    apply_family(&mut m, "family", &a.family)?;
    let Some(fam) = m.remove("family") else {
        return Err(usage("check-dist", "--family <FAMILY>"));
    };
    let family: Family = from_json(fam)?;
    let dist = make_offspring(&family)?;
    let y_max = a.y_max.unwrap_or_else(|| default_y_max(&dist));
    let zeta_max = a.zeta_max.unwrap_or_else(|| dist.max_support());
    let report = json!({
        "tool_version": cebp::VERSION,
        "family": family,
        "mu": dist.mu(),
        "pi": dist.pi(),
        "hurst": dist.hurst(),
        "max_support": dist.max_support(),
        "gw": check_assumption_gw(&dist),
        "dominance": check_assumption_z(&dist, zeta_max, y_max),
    });
    println!(
        "{}",
        serde_json::to_string_pretty(&report).expect("reports serialise")
    );
    Ok(())
}

// --------------------------------------------------------------- ingest

pub fn ingest(a: IngestArgs) -> CliResult<()> {
    let header = match a.header.as_str() {
        "auto" => HeaderMode::Auto,
        "present" => HeaderMode::Present,
        "absent" => HeaderMode::Absent,
        h => return Err(CliError::config(format!("unknown header mode {h:?}"))),
    };
    let spec = ColumnSpec {
        time_col: a.time_col,
        value_col: a.value_col,
        header,
        anchor_origin: a.anchor,
    };
    let path = ingest_csv(&a.input, &spec)?;
    let mut w = create(&with_suffix(&a.out, ".path.csv"))?;
    path.write_csv(&mut w)?;
    finish(w)?;
    let config = json!({ "input": a.input, "columns": spec });
    write_json(&with_suffix(&a.out, ".json"), &path.sidecar(config))?;
    eprintln!(
        "ingested {} knots, resolution level {}",
        path.len(),
        path.resolution_level
    );
    Ok(())
}
