//! End-to-end acceptance run. Each criterion prints one PASS/FAIL line;
//! the process exits non-zero if any criterion fails.
//!
//! Tolerances are pinned here, not read from suite defaults, so that a
//! change to a default cannot silently relax a criterion.

use std::time::Instant;

use cebp::analysis::{
    estimate_hurst, extract_crossing_forest, holder_histogram, total_variation, CrossingForest,
    DEFAULT_BIN_WIDTH,
};
use cebp::offspring::{
    check_assumption_z, default_y_max, dominance_violations, mean_offspring_matrix,
};
use cebp::rng::{substream, Domain};
use cebp::simulate::{ensemble_map, simulate_with_trees};
use cebp::tree::CrossingTree;
use cebp::tree_io::serialize_tree;
use cebp::verify::{
    run_increments, run_modulus, run_remaining_time, run_scale_invariance, run_w_tail,
    IncrementsConfig, ModulusConfig, RemainingTimeConfig, ScaleInvarianceConfig, Verdict,
    WTailConfig,
};
use cebp::{make_offspring, Family, Origin, SamplePath, SimulationConfig};
use proptest::prelude::*;
use proptest::test_runner::{Config as PropConfig, TestRunner};
use rand::Rng;

struct Outcome {
    pass: bool,
    detail: String,
}

fn outcome(pass: bool, detail: impl Into<String>) -> Outcome {
    Outcome {
        pass,
        detail: detail.into(),
    }
}

fn verdict_line(v: &Verdict) -> String {
    v.criteria
        .iter()
        .map(|c| format!("{}={:.4} ({})", c.name, c.value, c.threshold))
        .collect::<Vec<_>>()
        .join(", ")
}

fn geometric_half() -> Family {
    Family::GeometricPairs { p: 0.5 }
}

// 1 -------------------------------------------------------------------

const TIME_TOL: f64 = 1e-9;

fn forest_matches_tree(f: &CrossingForest, tree: &CrossingTree) -> Result<(), String> {
    f.check_invariants()?;
    let depth = tree.depth() as usize;
    for g in 0..=depth {
        let recs = f.level(tree.root_level() - g as i32);
        if recs.len() != tree.generation_len(g) {
            return Err(format!(
                "generation {g}: {} records, {} nodes",
                recs.len(),
                tree.generation_len(g)
            ));
        }
        for (r, id) in recs.iter().zip(tree.generation(g)) {
            let node = tree.node(id);
            if r.orientation != node.orientation() {
                return Err(format!("generation {g}: orientation differs"));
            }
            let start = node.start_time().ok_or("tree has no times")?;
            let dur = node.duration().ok_or("tree has no durations")?;
            if (r.start_time - start).abs() > TIME_TOL || (r.duration - dur).abs() > TIME_TOL {
                return Err(format!("generation {g}: times differ at {start}"));
            }
            if g < depth && r.subcrossing_count != Some(node.subcrossing_count()) {
                return Err(format!("generation {g}: subcrossing count differs"));
            }
        }
    }
    Ok(())
}

fn criterion_1() -> Outcome {
    let families = [
        Family::FixedPairs { b: 2 },
        geometric_half(),
        Family::PoissonPairs { lambda: 1.0 },
    ];
    let mut checked = 0usize;
    for fam in families {
        let cfg = SimulationConfig::new(fam.clone(), 10, 1001);
        let r = ensemble_map(&cfg, 100, |_, s| {
            let f = extract_crossing_forest(&s.path, -10..=0)?;
            Ok(forest_matches_tree(&f, &s.trees[0]))
        });
        match r {
            Ok(v) => {
                if let Some(Err(e)) = v.into_iter().find(Result::is_err) {
                    return outcome(false, format!("{fam:?}: {e}"));
                }
                checked += 100;
            }
            Err(e) => return outcome(false, format!("{fam:?}: {e}")),
        }
    }
    outcome(
        true,
        format!("{checked} trees reproduced, times within {TIME_TOL:e}"),
    )
}

// 2 -------------------------------------------------------------------

const RW_STEPS: usize = 10_000_000;
const TV_MAX: f64 = 0.05;
const HURST_TOL: f64 = 0.02;

fn brownian_pmf(z: u32) -> f64 {
    if z >= 2 && z.is_multiple_of(2) {
        0.5f64.powi((z / 2) as i32)
    } else {
        0.0
    }
}

/// Unit-time simple random walk on the integers.
fn random_walk(steps: usize, seed: u64) -> SamplePath {
    let mut rng = substream(seed, Domain::Analysis, 0);
    let mut values = Vec::with_capacity(steps + 1);
    let mut x = 0.0;
    values.push(x);
    for _ in 0..steps {
        x += if rng.random::<bool>() { 1.0 } else { -1.0 };
        values.push(x);
    }
    let times = (0..=steps).map(|i| i as f64).collect();
    SamplePath::new(times, values, 0, 0.5, 4.0, Origin::Ingested).expect("valid walk")
}

fn brownian_checks(label: &str, f: &CrossingForest) -> (bool, String) {
    match estimate_hurst(f) {
        Ok(e) => {
            let tv = total_variation(&e.count_pmf, brownian_pmf);
            let ok = tv <= TV_MAX && (e.hurst_hat - 0.5).abs() <= HURST_TOL;
            (
                ok,
                format!(
                    "{label}: H={:.4} TV={tv:.4} parents={}",
                    e.hurst_hat, e.parents
                ),
            )
        }
        Err(e) => (false, format!("{label}: {e}")),
    }
}

fn criterion_2() -> Outcome {
    let walk = random_walk(RW_STEPS, 2024);
    let (a, da) = match extract_crossing_forest(&walk, 1..=6) {
        Ok(f) => brownian_checks("walk", &f),
        Err(e) => (false, format!("walk: {e}")),
    };
    drop(walk);
    let sim = simulate_with_trees(&SimulationConfig::new(geometric_half(), 10, 2024));
    let (b, db) = match sim.and_then(|s| extract_crossing_forest(&s.path, -10..=0)) {
        Ok(f) => brownian_checks("cebp", &f),
        Err(e) => (false, format!("cebp: {e}")),
    };
    outcome(a && b, format!("{da}; {db}"))
}

// 3 -------------------------------------------------------------------

fn criterion_3() -> Outcome {
    let mut pass = true;
    let mut detail = Vec::new();
    for (label, p) in [("H=1/2", 0.5), ("H=1/3", 0.25)] {
        let cfg = WTailConfig {
            family: Family::GeometricPairs { p },
            generations: 12,
            samples: 1_000_000,
            rel_tol: 0.15,
            min_r2: 0.97,
            seed: 3003,
            ..WTailConfig::default()
        };
        match run_w_tail(&cfg) {
            Ok(v) => {
                pass &= v.pass;
                detail.push(format!("{label}: {}", verdict_line(&v)));
            }
            Err(e) => {
                pass = false;
                detail.push(format!("{label}: {e}"));
            }
        }
    }
    outcome(pass, detail.join("; "))
}

// 4 -------------------------------------------------------------------

fn criterion_4() -> Outcome {
    let cfg = IncrementsConfig {
        family: geometric_half(),
        rel_tol: 0.15,
        seed: 4004,
        ..IncrementsConfig::default()
    };
    match run_increments(&cfg) {
        Ok(v) => outcome(
            v.pass,
            format!(
                "{}; slope={:.4}, samples={}",
                verdict_line(&v),
                v.details["fit"]["slope"].as_f64().unwrap_or(f64::NAN),
                v.details["samples"]
            ),
        ),
        Err(e) => outcome(false, e.to_string()),
    }
}

// 5 -------------------------------------------------------------------

fn criterion_5() -> Outcome {
    let cfg = RemainingTimeConfig {
        family: geometric_half(),
        level: -6,
        rel_tol: 0.2,
        seed: 5005,
        ..RemainingTimeConfig::default()
    };
    match run_remaining_time(&cfg) {
        Ok(v) => outcome(
            v.pass,
            format!(
                "{}; slope={:.4}, records={}, uniform-query slope={:.4}",
                verdict_line(&v),
                v.details["fit"]["slope"].as_f64().unwrap_or(f64::NAN),
                v.details["records"],
                v.details["uniform_diagnostic"]["fit"]["slope"]
                    .as_f64()
                    .unwrap_or(f64::NAN),
            ),
        ),
        Err(e) => outcome(false, e.to_string()),
    }
}

// 6 -------------------------------------------------------------------

fn criterion_6() -> Outcome {
    let runs = [
        ("H=1/2", Family::GeometricPairs { p: 0.5 }, 10, 10_000_000),
        ("H=1/3", Family::GeometricPairs { p: 0.25 }, 7, 50_000_000),
    ];
    let mut pass = true;
    let mut detail = Vec::new();
    for (label, family, depth, node_budget) in runs {
        let cfg = ModulusConfig {
            family,
            depth,
            seeds: 50,
            l_lo: 4,
            l_hi: 12,
            band_ratio: 10.0,
            drift_tol: 0.25,
            brute_factor: 3.0,
            node_budget,
            seed: 6006,
            ..ModulusConfig::default()
        };
        match run_modulus(&cfg) {
            Ok(v) => {
                pass &= v.pass;
                detail.push(format!("{label} depth {depth}: {}", verdict_line(&v)));
            }
            Err(e) => {
                pass = false;
                detail.push(format!("{label}: {e}"));
            }
        }
    }
    outcome(pass, detail.join("; "))
}

// 7 -------------------------------------------------------------------

const HOLDER_PATHS: usize = 5;
const HOLDER_GRID: usize = 1000;
const HOLDER_MEAN_TOL: f64 = 0.05;

fn criterion_7() -> Outcome {
    let cfg = SimulationConfig::new(geometric_half(), 10, 7007);
    let per_path = ensemble_map(&cfg, HOLDER_PATHS, |_, s| {
        let shallow = holder_histogram(&s.path, HOLDER_GRID, 4..=8, DEFAULT_BIN_WIDTH)?;
        let deep = holder_histogram(&s.path, HOLDER_GRID, 6..=12, DEFAULT_BIN_WIDTH)?;
        Ok((deep.mean, shallow.std, deep.std))
    });
    let per_path = match per_path {
        Ok(v) => v,
        Err(e) => return outcome(false, e.to_string()),
    };
    let mut pass = true;
    let mut detail = Vec::new();
    for (mean, s_std, d_std) in &per_path {
        pass &= (mean - 0.5).abs() <= HOLDER_MEAN_TOL && d_std < s_std;
        detail.push(format!("mean={mean:.3} std {s_std:.3}->{d_std:.3}"));
    }

    let n = 1 << 16;
    let t: Vec<f64> = (0..=n).map(|i| i as f64 / n as f64).collect();
    let ramp = SamplePath::new(t.clone(), t, -16, 1.0, 2.0, Origin::Ingested).expect("ramp");
    let worst = holder_histogram(&ramp, HOLDER_GRID, 4..=12, DEFAULT_BIN_WIDTH)
        .map(|h| {
            h.exponents
                .iter()
                .map(|e| (e - 1.0).abs())
                .fold(0.0, f64::max)
        })
        .unwrap_or(f64::INFINITY);
    pass &= worst <= 1e-6;
    detail.push(format!("ramp max |h-1|={worst:.1e}"));
    outcome(pass, detail.join(", "))
}

// 8 -------------------------------------------------------------------

fn criterion_8() -> Outcome {
    let cfg = ScaleInvarianceConfig {
        family: geometric_half(),
        per_level: 10_000,
        max_ks: 0.03,
        control_min_ks: 0.1,
        seed: 8008,
        ..ScaleInvarianceConfig::default()
    };
    match run_scale_invariance(&cfg) {
        Ok(v) => outcome(v.pass, verdict_line(&v)),
        Err(e) => outcome(false, e.to_string()),
    }
}

// 9 -------------------------------------------------------------------

const MATRIX_TOL: f64 = 1e-12;

fn criterion_9() -> Outcome {
    let m = match mean_offspring_matrix(4.0, 4.0) {
        Ok(m) => m,
        Err(e) => return outcome(false, e.to_string()),
    };
    let close = |a: f64, b: f64| (a - b).abs() <= MATRIX_TOL;
    let exact = close(m.entries[0][0], 3.0)
        && close(m.entries[0][1], 1.0)
        && close(m.entries[1][0], 1.0)
        && close(m.entries[1][1], 3.0)
        && close(m.dominant_eigenvalue, 4.0)
        && close(m.second_eigenvalue, 2.0)
        && close(m.left_eigenvector[0], 0.5)
        && close(m.left_eigenvector[1], 0.5);

    let mut runner = TestRunner::new_with_rng(
        PropConfig {
            cases: 1000,
            failure_persistence: None,
            ..PropConfig::default()
        },
        proptest::test_runner::TestRng::deterministic_rng(
            proptest::test_runner::RngAlgorithm::ChaCha,
        ),
    );
    let prop = runner.run(&(2.0001f64..50.0, 2.0001f64..50.0), |(mp, mm)| {
        let m = mean_offspring_matrix(mp, mm).expect("supercritical");
        let e = m.entries;
        let tol = 1e-9 * (mp + mm);
        prop_assert!((e[0][0] + e[0][1] - mp).abs() <= tol);
        prop_assert!((e[1][0] + e[1][1] - mm).abs() <= tol);
        prop_assert!(
            (m.dominant_eigenvalue + m.second_eigenvalue - e[0][0] - e[1][1]).abs() <= tol
        );
        prop_assert!(m.dominant_eigenvalue >= m.second_eigenvalue);
        let (l, r, lam) = (
            m.left_eigenvector,
            m.right_eigenvector,
            m.dominant_eigenvalue,
        );
        for j in 0..2 {
            let lm = l[0] * e[0][j] + l[1] * e[1][j];
            prop_assert!((lm - lam * l[j]).abs() <= tol);
            let mr = e[j][0] * r[0] + e[j][1] * r[1];
            prop_assert!((mr - lam * r[j]).abs() <= tol);
        }
        prop_assert!((l[0] + l[1] - 1.0).abs() <= 1e-12);
        prop_assert!((l[0] * r[0] + l[1] * r[1] - 1.0).abs() <= 1e-12);
        prop_assert!(l[0] > 0.0 && l[1] > 0.0);
        Ok(())
    });
    let pass = exact && prop.is_ok();
    outcome(
        pass,
        format!(
            "M(4,4) exact={exact}, eigenvalues ({}, {}), 1000 random cases: {}",
            m.dominant_eigenvalue,
            m.second_eigenvalue,
            prop.map_or_else(|e| e.to_string(), |_| "ok".into())
        ),
    )
}

// 10 ------------------------------------------------------------------

fn custom(entries: &[(u32, f64)]) -> Family {
    Family::Custom {
        pmf: entries.iter().copied().collect(),
    }
}

fn criterion_10() -> Outcome {
    let uniform = make_offspring(&custom(&[(2, 0.5), (4, 0.5)])).expect("valid pmf");
    let zeta_uniform = check_assumption_z(&uniform, 2, default_y_max(&uniform)).zeta;

    let mut runner = TestRunner::new_with_rng(
        PropConfig {
            cases: 200,
            failure_persistence: None,
            ..PropConfig::default()
        },
        proptest::test_runner::TestRng::deterministic_rng(
            proptest::test_runner::RngAlgorithm::ChaCha,
        ),
    );
    let bounded = runner.run(&prop::collection::vec(0.0f64..1.0, 2..12), |w| {
        let mut entries: Vec<(u32, f64)> = w
            .iter()
            .enumerate()
            .map(|(i, &x)| (2 * (i as u32 + 1), x))
            .collect();
        // keep the largest support point so z_max is what the vector says
        entries.last_mut().unwrap().1 += 0.1;
        let total: f64 = entries.iter().map(|e| e.1).sum();
        entries.iter_mut().for_each(|e| e.1 /= total);
        let d = make_offspring(&custom(&entries)).expect("bounded pmf");
        let z_max = d.max_support();
        prop_assert!(dominance_violations(&d, z_max - 2, default_y_max(&d)).is_empty());
        let r = check_assumption_z(&d, z_max - 2, default_y_max(&d));
        prop_assert!(r.zeta.is_some_and(|z| z <= z_max - 2));
        Ok(())
    });

    // Z - y given Z > y cannot beat Z at y = 1 for even Z, so the planted
    // law breaks dominance at y = 2: Z - 2 given Z > 2 is always 18.
    let planted = make_offspring(&custom(&[(2, 0.9), (20, 0.1)])).expect("valid pmf");
    let at_zero = dominance_violations(&planted, 0, default_y_max(&planted));
    let planted_ok = at_zero.iter().any(|&(y, _)| y == 2)
        && check_assumption_z(&planted, 0, default_y_max(&planted))
            .zeta
            .is_none();

    let pass = zeta_uniform == Some(0) && bounded.is_ok() && planted_ok;
    outcome(
        pass,
        format!(
            "uniform{{2,4}} zeta={zeta_uniform:?}, bounded pmfs: {}, planted violations at zeta=0: {}",
            bounded.map_or_else(|e| e.to_string(), |_| "ok".into()),
            at_zero.len()
        ),
    )
}

// 11 ------------------------------------------------------------------

fn artifacts() -> cebp::Result<Vec<Vec<u8>>> {
    let s = simulate_with_trees(&SimulationConfig::new(geometric_half(), 8, 7))?;
    let forest = extract_crossing_forest(&s.path, -8..=0)?;
    let mut forest_bytes = Vec::new();
    forest.write_ndjson(&mut forest_bytes)?;
    let w = run_w_tail(&WTailConfig {
        samples: 20_000,
        p_lo: 1e-3,
        seed: 11,
        ..WTailConfig::default()
    })?;
    let inc = run_increments(&IncrementsConfig {
        paths: 200,
        draws_per_path: 50,
        depth: 6,
        window: cebp::tail::TailWindow {
            p_max: 0.5,
            min_count: 1,
        },
        seed: 11,
        ..IncrementsConfig::default()
    })?;
    let si = run_scale_invariance(&ScaleInvarianceConfig {
        trees: 20,
        per_level: 500,
        seed: 11,
        ..ScaleInvarianceConfig::default()
    })?;
    Ok(vec![
        s.path.to_csv().into_bytes(),
        serialize_tree(&s.trees[0]),
        forest_bytes,
        serde_json::to_vec(&w)?,
        serde_json::to_vec(&inc)?,
        serde_json::to_vec(&si)?,
    ])
}

fn criterion_11() -> Outcome {
    let mut outputs = Vec::new();
    for workers in [1usize, 4, 8] {
        let pool = rayon::ThreadPoolBuilder::new()
            .num_threads(workers)
            .build()
            .expect("thread pool");
        match pool.install(artifacts) {
            Ok(a) => outputs.push((workers, a)),
            Err(e) => return outcome(false, format!("{workers} workers: {e}")),
        }
    }
    let (_, reference) = &outputs[0];
    let differing: Vec<usize> = outputs[1..]
        .iter()
        .filter(|(_, a)| a != reference)
        .map(|(w, _)| *w)
        .collect();
    let bytes: usize = reference.iter().map(Vec::len).sum();
    outcome(
        differing.is_empty(),
        format!(
            "{} artifacts, {bytes} bytes; worker counts differing from 1: {differing:?}",
            reference.len()
        ),
    )
}

type Criterion = (u32, &'static str, fn() -> Outcome);

fn main() {
    let criteria: [Criterion; 11] = [
        (1, "round-trip oracle", criterion_1),
        (2, "brownian special case", criterion_2),
        (3, "W left tail", criterion_3),
        (4, "increment tail", criterion_4),
        (5, "remaining-time tail", criterion_5),
        (6, "modulus of continuity", criterion_6),
        (7, "monofractality", criterion_7),
        (8, "duration scale invariance", criterion_8),
        (9, "mean matrix", criterion_9),
        (10, "dominance checker", criterion_10),
        (11, "determinism across worker counts", criterion_11),
    ];
    // `cargo test --test acceptance -- 4 6` runs a subset
    let wanted: Vec<u32> = std::env::args()
        .skip(1)
        .filter_map(|a| a.parse().ok())
        .collect();
    let mut failed = Vec::new();
    for (n, name, run) in criteria {
        if !wanted.is_empty() && !wanted.contains(&n) {
            continue;
        }
        let start = Instant::now();
        let o = run();
        let secs = start.elapsed().as_secs_f64();
        let tag = if o.pass { "PASS" } else { "FAIL" };
        println!("criterion {n:>2} {name}: {tag} [{secs:.1}s] {}", o.detail);
        if !o.pass {
            failed.push(n);
        }
    }
    if !failed.is_empty() {
        println!("failed criteria: {failed:?}");
        std::process::exit(1);
    }
}
