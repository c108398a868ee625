//! Verification suites: each runs one Monte Carlo experiment at configured
//! size and reports pass/fail per criterion with the fitted numbers.

use std::fmt;
use std::str::FromStr;

use serde::{Deserialize, Serialize};
use serde_json::json;

use crate::analysis::{
    brute_force_modulus, duration_scale_invariance, extract_crossing_forest,
    increment_tail_streamed, modulus_ratio, remaining_time_fit, remaining_time_records,
    GapSampling, RemainingTimeRecord,
};
use crate::branching::{sample_w, w_left_tail_fit, w_tail_grid};
use crate::error::{Error, Result};
use crate::offspring::{
    check_assumption_gw, check_assumption_z, default_y_max, make_offspring, Family,
};
use crate::rng::{substream, Domain};
use crate::simulate::{ensemble_map, SimulationConfig};
use crate::stats::{log_grid, quantile_sorted};
use crate::tail::TailWindow;
use crate::tree::{DurationMode, DEFAULT_NODE_BUDGET};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "kebab-case")]
pub enum Suite {
    WTail,
    Increments,
    RemainingTime,
    Modulus,
    ScaleInvariance,
    Assumptions,
}

impl Suite {
    pub const ALL: [Suite; 6] = [
        Suite::WTail,
        Suite::Increments,
        Suite::RemainingTime,
        Suite::Modulus,
        Suite::ScaleInvariance,
        Suite::Assumptions,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Suite::WTail => "w-tail",
            Suite::Increments => "increments",
            Suite::RemainingTime => "remaining-time",
            Suite::Modulus => "modulus",
            Suite::ScaleInvariance => "scale-invariance",
            Suite::Assumptions => "assumptions",
        }
    }
}

impl fmt::Display for Suite {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(self.name())
    }
}

impl FromStr for Suite {
    type Err = Error;
    fn from_str(s: &str) -> Result<Suite> {
        Suite::ALL
            .into_iter()
            .find(|x| x.name() == s)
            .ok_or_else(|| Error::InvalidParameter(format!("unknown suite {s:?}")))
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct CriterionResult {
    pub name: String,
    pub pass: bool,
    pub value: f64,
    pub threshold: String,
}

fn criterion(name: &str, pass: bool, value: f64, threshold: impl Into<String>) -> CriterionResult {
    CriterionResult {
        name: name.into(),
        pass,
        value,
        threshold: threshold.into(),
    }
}

/// Two-column series for external plotting.
#[derive(Debug, Clone, PartialEq)]
pub struct PlotSeries {
    pub name: String,
    pub csv: String,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Verdict {
    pub suite: Suite,
    pub tool_version: String,
    pub config: serde_json::Value,
    pub seed: u64,
    pub criteria: Vec<CriterionResult>,
    pub details: serde_json::Value,
    pub pass: bool,
    #[serde(skip)]
    pub plots: Vec<PlotSeries>,
}

impl Verdict {
    fn new<C: Serialize>(
        suite: Suite,
        config: &C,
        seed: u64,
        criteria: Vec<CriterionResult>,
        details: serde_json::Value,
        plots: Vec<PlotSeries>,
    ) -> Verdict {
        Verdict {
            suite,
            tool_version: crate::VERSION.to_string(),
            config: serde_json::to_value(config).expect("configs serialise"),
            seed,
            pass: criteria.iter().all(|c| c.pass),
            criteria,
            details,
            plots,
        }
    }

    pub fn criterion(&self, name: &str) -> Option<&CriterionResult> {
        self.criteria.iter().find(|c| c.name == name)
    }
}

fn xy_csv(header: &str, x: &[f64], y: &[f64]) -> String {
    let mut s = format!("{header}\n");
    for (a, b) in x.iter().zip(y) {
        s.push_str(&format!("{a},{b}\n"));
    }
    s
}

fn geometric_half() -> Family {
    Family::GeometricPairs { p: 0.5 }
}

// ---------------------------------------------------------------- w-tail

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WTailConfig {
    pub family: Family,
    pub generations: u32,
    pub samples: usize,
    /// Fit grid spans these empirical quantiles of `W`.
    pub p_lo: f64,
    pub p_hi: f64,
    pub points: usize,
    pub rel_tol: f64,
    pub min_r2: f64,
    pub seed: u64,
}

impl Default for WTailConfig {
    fn default() -> Self {
        WTailConfig {
            family: geometric_half(),
            generations: 12,
            samples: 1_000_000,
            p_lo: 1e-4,
            p_hi: 0.05,
            points: 15,
            rel_tol: 0.15,
            min_r2: 0.97,
            seed: 1,
        }
    }
}

pub fn run_w_tail(cfg: &WTailConfig) -> Result<Verdict> {
    let dist = make_offspring(&cfg.family)?;
    let ens = sample_w(&dist, cfg.generations, cfg.samples, cfg.seed)?;
    let grid = w_tail_grid(&ens, cfg.p_lo, cfg.p_hi, cfg.points);
    let fit = w_left_tail_fit(&ens, &grid)?;
    let criteria = vec![
        criterion(
            "slope-relative-error",
            fit.relative_error() <= cfg.rel_tol,
            fit.relative_error(),
            format!("<= {}", cfg.rel_tol),
        ),
        criterion(
            "r-squared",
            fit.r_squared >= cfg.min_r2,
            fit.r_squared,
            format!(">= {}", cfg.min_r2),
        ),
    ];
    let details = json!({ "fit": fit.summary(), "w_mean": ens.mean(), "hurst": dist.hurst() });
    let plots = vec![PlotSeries {
        name: "w-tail".into(),
        csv: xy_csv(
            "log_x,log_minus_log_p",
            &fit.abscissa.iter().map(|x| x.ln()).collect::<Vec<_>>(),
            &fit.log_minus_log_prob,
        ),
    }];
    Ok(Verdict::new(
        Suite::WTail,
        cfg,
        cfg.seed,
        criteria,
        details,
        plots,
    ))
}

// ------------------------------------------------------------ increments

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct IncrementsConfig {
    pub family: Family,
    pub depth: u32,
    pub paths: usize,
    pub draws_per_path: usize,
    /// Lag in the natural time of a single root crossing.
    pub t: f64,
    /// Lambda grid spans these multiples of `t^H`, log-spaced.
    pub lambda_lo: f64,
    pub lambda_hi: f64,
    pub grid_points: usize,
    pub window: TailWindow,
    pub rel_tol: f64,
    pub node_budget: usize,
    pub seed: u64,
}

impl Default for IncrementsConfig {
    fn default() -> Self {
        IncrementsConfig {
            family: geometric_half(),
            depth: 8,
            paths: 40_000,
            draws_per_path: 250,
            t: 0.004,
            lambda_lo: 1.0,
            lambda_hi: 7.0,
            grid_points: 120,
            window: TailWindow {
                p_max: 1e-3,
                min_count: 30,
            },
            rel_tol: 0.15,
            node_budget: DEFAULT_NODE_BUDGET,
            seed: 1,
        }
    }
}

pub fn run_increments(cfg: &IncrementsConfig) -> Result<Verdict> {
    let dist = make_offspring(&cfg.family)?;
    let scale = cfg.t.powf(dist.hurst());
    let grid = log_grid(
        cfg.lambda_lo * scale,
        cfg.lambda_hi * scale,
        cfg.grid_points,
    );
    let mut sim = SimulationConfig::new(cfg.family.clone(), cfg.depth, cfg.seed);
    sim.node_budget = cfg.node_budget;
    let r = increment_tail_streamed(
        &sim,
        cfg.paths,
        cfg.t,
        &grid,
        cfg.draws_per_path,
        cfg.seed,
        Some(cfg.window),
    )?;
    let monotone =
        r.p_plain.windows(2).all(|w| w[1] <= w[0]) && r.p_sup.windows(2).all(|w| w[1] <= w[0]);
    let criteria = vec![
        criterion(
            "slope-relative-error",
            r.fit.relative_error() <= cfg.rel_tol,
            r.fit.relative_error(),
            format!("<= {}", cfg.rel_tol),
        ),
        criterion(
            "sandwich-violations",
            r.sandwich_violations == 0,
            r.sandwich_violations as f64,
            "== 0",
        ),
        criterion(
            "monotone-in-lambda",
            monotone,
            f64::from(u8::from(monotone)),
            "== 1",
        ),
    ];
    let details = json!({
        "fit": r.fit.summary(),
        "sup_fit": r.sup_fit.as_ref().map(|f| f.summary()),
        "samples": r.samples,
        "paths_used": r.paths_used,
        "paths_skipped": r.paths_skipped,
        "fit_points": r.fit.abscissa.len(),
        // abscissa is lambda^(1/H) / t
        "fit_lambda_range": [
            r.fit.abscissa.first().map(|a| (a * cfg.t).powf(dist.hurst())),
            r.fit.abscissa.last().map(|a| (a * cfg.t).powf(dist.hurst())),
        ],
    });
    let plots = vec![
        PlotSeries {
            name: "increments-plain".into(),
            csv: xy_csv("lambda,p_plain", &r.lambda_grid, &r.p_plain),
        },
        PlotSeries {
            name: "increments-sup".into(),
            csv: xy_csv("lambda,p_sup", &r.lambda_grid, &r.p_sup),
        },
    ];
    Ok(Verdict::new(
        Suite::Increments,
        cfg,
        cfg.seed,
        criteria,
        details,
        plots,
    ))
}

// -------------------------------------------------------- remaining-time

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct RemainingTimeConfig {
    pub family: Family,
    pub depth: u32,
    /// Generations per sampled leaf duration.
    pub k: u32,
    pub level: i32,
    pub paths: usize,
    pub records_per_path: usize,
    pub sampling: GapSampling,
    /// Also fit uniformly drawn query times and report them as a diagnostic.
    pub uniform_diagnostic: bool,
    pub grid_points: usize,
    pub window: TailWindow,
    pub rel_tol: f64,
    pub node_budget: usize,
    pub seed: u64,
}

impl Default for RemainingTimeConfig {
    fn default() -> Self {
        RemainingTimeConfig {
            family: geometric_half(),
            depth: 8,
            k: 8,
            level: -6,
            paths: 100,
            records_per_path: 1000,
            sampling: GapSampling::AfterPassage,
            uniform_diagnostic: true,
            grid_points: 100,
            window: TailWindow {
                p_max: 0.05,
                min_count: 30,
            },
            rel_tol: 0.2,
            node_budget: DEFAULT_NODE_BUDGET,
            seed: 1,
        }
    }
}

fn gap_records(
    cfg: &RemainingTimeConfig,
    sampling: GapSampling,
) -> Result<Vec<RemainingTimeRecord>> {
    let mut sim = SimulationConfig::new(cfg.family.clone(), cfg.depth, cfg.seed)
        .with_duration_mode(DurationMode::Sampled { k: cfg.k });
    sim.node_budget = cfg.node_budget;
    Ok(ensemble_map(&sim, cfg.paths, |i, s| {
        let mut rng = substream(cfg.seed, Domain::Analysis, i as u64);
        remaining_time_records(&s.path, cfg.level, cfg.records_per_path, sampling, &mut rng)
    })?
    .into_iter()
    .flatten()
    .collect())
}

/// Log grid from the smallest positive gap to the median gap.
fn gap_grid(records: &[RemainingTimeRecord], points: usize) -> Result<Vec<f64>> {
    let mut g: Vec<f64> = records.iter().map(|r| r.gap).filter(|g| *g > 0.0).collect();
    if g.len() < 2 {
        return Err(Error::InsufficientTailPoints {
            found: g.len(),
            needed: crate::tail::MIN_TAIL_POINTS,
        });
    }
    g.sort_by(f64::total_cmp);
    Ok(log_grid(g[0], quantile_sorted(&g, 0.5), points))
}

pub fn run_remaining_time(cfg: &RemainingTimeConfig) -> Result<Verdict> {
    let dist = make_offspring(&cfg.family)?;
    let records = gap_records(cfg, cfg.sampling)?;
    let grid = gap_grid(&records, cfg.grid_points)?;
    let r = remaining_time_fit(
        &records,
        &grid,
        cfg.sampling,
        dist.mu(),
        dist.hurst(),
        Some(cfg.window),
    )?;
    let min_gap = records.iter().map(|r| r.gap).fold(f64::INFINITY, f64::min);
    let monotone = r.p_hat.windows(2).all(|w| w[1] >= w[0]);
    let criteria = vec![
        criterion(
            "slope-relative-error",
            r.fit.relative_error() <= cfg.rel_tol,
            r.fit.relative_error(),
            format!("<= {}", cfg.rel_tol),
        ),
        criterion("min-gap", min_gap >= 0.0, min_gap, ">= 0"),
        criterion(
            "cdf-monotone",
            monotone,
            f64::from(u8::from(monotone)),
            "== 1",
        ),
    ];
    let uniform = if cfg.uniform_diagnostic && cfg.sampling != GapSampling::Uniform {
        // reported only: under uniform query times P(gap <= x) is linear near 0
        let u = gap_records(cfg, GapSampling::Uniform)?;
        let fit = gap_grid(&u, cfg.grid_points).and_then(|g| {
            remaining_time_fit(
                &u,
                &g,
                GapSampling::Uniform,
                dist.mu(),
                dist.hurst(),
                Some(cfg.window),
            )
        });
        Some(match fit {
            Ok(f) => json!({ "fit": f.fit.summary(), "records": f.records }),
            Err(e) => json!({ "error": e.to_string() }),
        })
    } else {
        None
    };
    let details = json!({
        "fit": r.fit.summary(),
        "records": r.records,
        "fit_points": r.fit.abscissa.len(),
        "y_histogram": r.y_histogram,
        "uniform_diagnostic": uniform,
    });
    let plots = vec![PlotSeries {
        name: "remaining-time".into(),
        csv: xy_csv("x,p_hat", &r.x_grid, &r.p_hat),
    }];
    Ok(Verdict::new(
        Suite::RemainingTime,
        cfg,
        cfg.seed,
        criteria,
        details,
        plots,
    ))
}

// --------------------------------------------------------------- modulus

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ModulusConfig {
    pub family: Family,
    pub depth: u32,
    pub seeds: usize,
    pub l_lo: u32,
    pub l_hi: u32,
    pub band_ratio: f64,
    pub drift_tol: f64,
    /// Replicates for the all-pairs cross-check; kept to paths of at most
    /// 4096 knots whose blocks hold at least eight knots.
    pub brute_paths: usize,
    pub brute_factor: f64,
    pub node_budget: usize,
    pub seed: u64,
}

impl Default for ModulusConfig {
    fn default() -> Self {
        ModulusConfig {
            family: geometric_half(),
            depth: 10,
            seeds: 50,
            l_lo: 4,
            l_hi: 12,
            band_ratio: 10.0,
            drift_tol: 0.25,
            brute_paths: 60,
            brute_factor: 3.0,
            node_budget: DEFAULT_NODE_BUDGET,
            seed: 1,
        }
    }
}

fn band(v: &[f64]) -> (f64, f64) {
    (
        v.iter().copied().fold(f64::INFINITY, f64::min),
        v.iter().copied().fold(f64::NEG_INFINITY, f64::max),
    )
}

fn drift(a: f64, b: f64) -> f64 {
    (a - b).abs() / a.max(b)
}

/// Knots per dyadic block required before a level enters the brute-force
/// comparison.
const BRUTE_KNOTS_PER_BLOCK: f64 = 8.0;

pub fn run_modulus(cfg: &ModulusConfig) -> Result<Verdict> {
    if cfg.l_hi <= cfg.l_lo + 1 {
        return Err(Error::LRangeInfeasible("need at least three levels".into()));
    }
    let dist = make_offspring(&cfg.family)?;
    let h = dist.hurst();
    let mut sim = SimulationConfig::new(cfg.family.clone(), cfg.depth, cfg.seed);
    sim.node_budget = cfg.node_budget;
    let reports = ensemble_map(&sim, cfg.seeds, |_, s| {
        modulus_ratio(&s.path, h, cfg.l_lo..=cfg.l_hi, cfg.band_ratio)
    })?;
    let nl = (cfg.l_hi - cfg.l_lo + 1) as usize;
    let medians: Vec<f64> = (0..nl)
        .map(|i| {
            let mut v: Vec<f64> = reports.iter().map(|r| r.ratios[i]).collect();
            v.sort_by(f64::total_cmp);
            quantile_sorted(&v, 0.5)
        })
        .collect();
    let all: Vec<f64> = reports
        .iter()
        .flat_map(|r| r.ratios.iter().copied())
        .collect();
    let (a, b) = band(&all);
    let mid = nl / 2;
    let (lo_a, lo_b) = band(&medians[..=mid]);
    let (hi_a, hi_b) = band(&medians[mid..]);

    // all-pairs cross-check on small paths
    let brute_depth = (2048f64.ln() / dist.mu().ln()).floor().max(1.0) as u32;
    let mut bsim = SimulationConfig::new(cfg.family.clone(), brute_depth, cfg.seed.wrapping_add(1));
    bsim.node_budget = cfg.node_budget;
    let brute = ensemble_map(&bsim, cfg.brute_paths, |_, s| {
        let n = s.path.len();
        let l_max = ((n - 1) as f64 / BRUTE_KNOTS_PER_BLOCK).log2().floor();
        if n > crate::analysis::modulus::BRUTE_FORCE_MAX_KNOTS || l_max < 3.0 {
            return Ok(None);
        }
        let l_max = (l_max as u32).min(cfg.l_hi);
        let r = modulus_ratio(&s.path, h, 3..=l_max, cfg.band_ratio)?;
        let mut worst = 1.0f64;
        for (d, chain) in r.deltas.iter().zip(&r.ratios) {
            let bf = brute_force_modulus(&s.path, h, *d)?;
            worst = worst.max(chain / bf).max(bf / chain);
        }
        Ok(Some(worst))
    })?;
    let brute: Vec<f64> = brute.into_iter().flatten().collect();
    let brute_worst = brute.iter().copied().fold(1.0, f64::max);

    let criteria = vec![
        criterion("band-lower-positive", a > 0.0, a, "> 0"),
        criterion(
            "band-ratio",
            b / a <= cfg.band_ratio,
            b / a,
            format!("<= {}", cfg.band_ratio),
        ),
        criterion(
            "lower-endpoint-drift",
            drift(lo_a, hi_a) < cfg.drift_tol,
            drift(lo_a, hi_a),
            format!("< {}", cfg.drift_tol),
        ),
        criterion(
            "upper-endpoint-drift",
            drift(lo_b, hi_b) < cfg.drift_tol,
            drift(lo_b, hi_b),
            format!("< {}", cfg.drift_tol),
        ),
        criterion(
            "brute-force-factor",
            !brute.is_empty() && brute_worst <= cfg.brute_factor,
            brute_worst,
            format!("<= {}", cfg.brute_factor),
        ),
    ];
    let levels: Vec<u32> = (cfg.l_lo..=cfg.l_hi).collect();
    let deltas: Vec<f64> = levels.iter().map(|&l| 2f64.powi(-(l as i32))).collect();
    let details = json!({
        "hurst": h,
        "levels": levels,
        "median_ratios": medians,
        "band": [a, b],
        "halves": { "first": [lo_a, lo_b], "second": [hi_a, hi_b] },
        "brute_force_paths": brute.len(),
        "brute_force_depth": brute_depth,
    });
    let plots = vec![PlotSeries {
        name: "modulus".into(),
        csv: xy_csv("delta,median_ratio", &deltas, &medians),
    }];
    Ok(Verdict::new(
        Suite::Modulus,
        cfg,
        cfg.seed,
        criteria,
        details,
        plots,
    ))
}

// ------------------------------------------------------ scale-invariance

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct ScaleInvarianceConfig {
    pub family: Family,
    pub depth: u32,
    pub k: u32,
    pub trees: usize,
    pub level_lo: i32,
    pub level_hi: i32,
    pub per_level: usize,
    pub max_ks: f64,
    /// Deliberately wrong mean used by the negative control.
    pub wrong_mu: f64,
    pub control_min_ks: f64,
    pub node_budget: usize,
    pub seed: u64,
}

impl Default for ScaleInvarianceConfig {
    fn default() -> Self {
        ScaleInvarianceConfig {
            family: geometric_half(),
            depth: 8,
            k: 8,
            trees: 100,
            level_lo: -8,
            level_hi: -4,
            per_level: 10_000,
            max_ks: 0.03,
            wrong_mu: 6.0,
            control_min_ks: 0.1,
            node_budget: DEFAULT_NODE_BUDGET,
            seed: 1,
        }
    }
}

pub fn run_scale_invariance(cfg: &ScaleInvarianceConfig) -> Result<Verdict> {
    let dist = make_offspring(&cfg.family)?;
    let mut sim = SimulationConfig::new(cfg.family.clone(), cfg.depth, cfg.seed)
        .with_duration_mode(DurationMode::Sampled { k: cfg.k });
    sim.node_budget = cfg.node_budget;
    let forests = ensemble_map(&sim, cfg.trees, |_, s| {
        extract_crossing_forest(&s.path, cfg.level_lo..=cfg.level_hi)
    })?;
    let good = duration_scale_invariance(&forests, dist.mu(), Some(cfg.per_level))?;
    let bad = duration_scale_invariance(&forests, cfg.wrong_mu, Some(cfg.per_level))?;
    let min_samples = good
        .adjacent
        .iter()
        .flat_map(|p| [p.samples_lo, p.samples_hi])
        .min()
        .unwrap_or(0);
    let covered = good.adjacent.len() + 1 == (cfg.level_hi - cfg.level_lo + 1) as usize;
    let control_min = bad
        .adjacent
        .iter()
        .map(|p| p.ks)
        .fold(f64::INFINITY, f64::min);
    let criteria = vec![
        criterion(
            "max-adjacent-ks",
            good.max_adjacent_ks < cfg.max_ks,
            good.max_adjacent_ks,
            format!("< {}", cfg.max_ks),
        ),
        criterion(
            "crossings-per-level",
            covered && min_samples >= cfg.per_level,
            min_samples as f64,
            format!(">= {} on every level", cfg.per_level),
        ),
        criterion(
            "wrong-mu-control",
            control_min > cfg.control_min_ks,
            control_min,
            format!("> {}", cfg.control_min_ks),
        ),
    ];
    let details = json!({ "report": good, "control": bad });
    let lv: Vec<f64> = good
        .adjacent
        .iter()
        .map(|p| f64::from(p.level_lo))
        .collect();
    let ks: Vec<f64> = good.adjacent.iter().map(|p| p.ks).collect();
    let plots = vec![PlotSeries {
        name: "scale-invariance".into(),
        csv: xy_csv("level,ks", &lv, &ks),
    }];
    Ok(Verdict::new(
        Suite::ScaleInvariance,
        cfg,
        cfg.seed,
        criteria,
        details,
        plots,
    ))
}

// ----------------------------------------------------------- assumptions

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct AssumptionsConfig {
    pub family: Family,
    /// Defaults to the largest support point minus one.
    pub y_max: Option<u32>,
    /// Defaults to the largest support point.
    pub zeta_max: Option<u32>,
}

impl Default for AssumptionsConfig {
    fn default() -> Self {
        AssumptionsConfig {
            family: geometric_half(),
            y_max: None,
            zeta_max: None,
        }
    }
}

pub fn run_assumptions(cfg: &AssumptionsConfig) -> Result<Verdict> {
    let dist = make_offspring(&cfg.family)?;
    let gw = check_assumption_gw(&dist);
    let y_max = cfg.y_max.unwrap_or_else(|| default_y_max(&dist));
    let zeta_max = cfg.zeta_max.unwrap_or_else(|| dist.max_support());
    let dom = check_assumption_z(&dist, zeta_max, y_max);
    let criteria = vec![
        criterion("supercritical", gw.supercritical, gw.mu, "> 2"),
        criterion(
            "z-log-z-finite",
            gw.z_log_z_finite,
            gw.e_z_log_z,
            "< infinity",
        ),
        criterion(
            "dominance-offset-found",
            dom.zeta.is_some(),
            dom.zeta.map_or(f64::NAN, f64::from),
            format!("zeta <= {zeta_max}"),
        ),
    ];
    let details = json!({
        "mu": dist.mu(),
        "pi": dist.pi(),
        "hurst": dist.hurst(),
        "gw": gw,
        "dominance": dom,
    });
    Ok(Verdict::new(
        Suite::Assumptions,
        cfg,
        0,
        criteria,
        details,
        Vec::new(),
    ))
}

/// Run `suite` with a JSON config; absent fields take suite defaults.
pub fn run_suite(suite: Suite, config: serde_json::Value) -> Result<Verdict> {
    fn parse<T: serde::de::DeserializeOwned>(v: serde_json::Value) -> Result<T> {
        // via text: integer map keys (custom pmfs) do not deserialise from a Value
        serde_json::from_str(&v.to_string())
            .map_err(|e| Error::InvalidParameter(format!("config: {e}")))
    }
    match suite {
        Suite::WTail => run_w_tail(&parse(config)?),
        Suite::Increments => run_increments(&parse(config)?),
        Suite::RemainingTime => run_remaining_time(&parse(config)?),
        Suite::Modulus => run_modulus(&parse(config)?),
        Suite::ScaleInvariance => run_scale_invariance(&parse(config)?),
        Suite::Assumptions => run_assumptions(&parse(config)?),
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn suite_names_round_trip() {
        for s in Suite::ALL {
            assert_eq!(s.name().parse::<Suite>().unwrap(), s);
            assert_eq!(serde_json::to_value(s).unwrap(), json!(s.name()));
        }
        assert!("bogus".parse::<Suite>().is_err());
    }

    #[test]
    fn assumptions_for_poisson() {
        let v = run_suite(
            Suite::Assumptions,
            json!({ "family": { "family": "poisson-pairs", "lambda": 1.0 } }),
        )
        .unwrap();
        assert!(v.pass);
        assert_eq!(v.criteria.len(), 3);
        assert!(v.details["dominance"]["zeta"].is_u64());
    }

    #[test]
    fn unknown_config_field_rejected() {
        let e = run_suite(Suite::WTail, json!({ "sampels": 10 })).unwrap_err();
        assert_eq!(e.code(), "INVALID_PARAMETER");
    }

    #[test]
    fn small_w_tail_is_reproducible() {
        let cfg = WTailConfig {
            samples: 20_000,
            p_lo: 1e-3,
            ..WTailConfig::default()
        };
        let a = run_w_tail(&cfg).unwrap();
        let b = run_w_tail(&cfg).unwrap();
        assert_eq!(a, b);
        assert!(a.details["fit"]["slope"].as_f64().unwrap() < 0.0);
    }

    #[test]
    fn small_modulus_run() {
        let cfg = ModulusConfig {
            depth: 7,
            seeds: 6,
            l_lo: 3,
            l_hi: 8,
            brute_paths: 6,
            ..ModulusConfig::default()
        };
        let v = run_modulus(&cfg).unwrap();
        assert!(v.criterion("band-lower-positive").unwrap().pass);
        assert_eq!(v.details["median_ratios"].as_array().unwrap().len(), 6);
    }
}
