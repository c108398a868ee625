//! Sample paths from crossing trees, and the seeded simulation driver.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::offspring::{make_offspring, Family, OffspringDistribution};
use crate::path::{Origin, SamplePath};
use crate::rng::{replicate_seed, substream, Domain};
use crate::tree::{expand_tree, CrossingTree, DurationMode, Orientation, DEFAULT_NODE_BUDGET};

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "mode", rename_all = "kebab-case")]
pub enum RootMode {
    /// One up root crossing; the path lives on `[0, D_root]`.
    Single,
    /// I.i.d. root crossings with uniform orientation, concatenated until the
    /// total duration reaches `target_horizon`. Approximate: successive
    /// level-0 crossings of a real process are not independent.
    Tile { target_horizon: f64 },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SimulationConfig {
    pub offspring: Family,
    pub depth: u32,
    #[serde(default = "default_duration_mode")]
    pub duration_mode: DurationMode,
    #[serde(default = "default_root_mode")]
    pub root_mode: RootMode,
    #[serde(default)]
    pub seed: u64,
    #[serde(default = "default_budget")]
    pub node_budget: usize,
}

fn default_duration_mode() -> DurationMode {
    DurationMode::Mean
}

fn default_root_mode() -> RootMode {
    RootMode::Single
}

fn default_budget() -> usize {
    DEFAULT_NODE_BUDGET
}

impl SimulationConfig {
    pub fn new(offspring: Family, depth: u32, seed: u64) -> Self {
        SimulationConfig {
            offspring,
            depth,
            duration_mode: DurationMode::Mean,
            root_mode: RootMode::Single,
            seed,
            node_budget: DEFAULT_NODE_BUDGET,
        }
    }

    pub fn with_duration_mode(mut self, mode: DurationMode) -> Self {
        self.duration_mode = mode;
        self
    }

    pub fn with_root_mode(mut self, mode: RootMode) -> Self {
        self.root_mode = mode;
        self
    }

    pub fn validate(&self) -> Result<()> {
        if self.depth < 1 {
            return Err(Error::InvalidParameter("depth must be >= 1".into()));
        }
        if let RootMode::Tile { target_horizon } = self.root_mode {
            if !(target_horizon > 0.0 && target_horizon.is_finite()) {
                return Err(Error::InvalidParameter("target_horizon must be > 0".into()));
            }
        }
        Ok(())
    }
}

/// Walk the leaves of a timed tree and emit the path knots.
pub fn build_path(tree: &CrossingTree, dist: &OffspringDistribution) -> Result<SamplePath> {
    let (durations, starts) = match (tree.durations(), tree.start_times()) {
        (Some(d), Some(s)) => (d, s),
        _ => return Err(Error::MissingDurations),
    };
    let leaf_level = tree.leaf_level();
    let step = 2f64.powi(leaf_level);
    let n = tree.generation_len(tree.depth() as usize);
    let mut times = Vec::with_capacity(n + 1);
    let mut values = Vec::with_capacity(n + 1);
    times.push(starts[0]);
    values.push(0.0);
    // knot k >= 1 sits at the end of leaf k - 1, i.e. the start of leaf k
    let mut idx = 0i64;
    for (i, leaf) in tree.leaves().enumerate() {
        if i > 0 {
            times.push(starts[leaf.index()]);
        }
        idx += tree.node(leaf).orientation().sign();
        values.push(idx as f64 * step);
    }
    let l = tree.leaves().last().expect("tree has leaves").index();
    times.push(starts[l] + durations[l]);
    SamplePath::new(
        times,
        values,
        leaf_level,
        dist.hurst(),
        dist.mu(),
        Origin::Simulated { seed: None },
    )
}

/// A simulated path with the trees it was built from.
#[derive(Debug, Clone)]
pub struct Simulation {
    pub path: SamplePath,
    pub trees: Vec<CrossingTree>,
    pub distribution: OffspringDistribution,
}

fn grow_root(
    config: &SimulationConfig,
    dist: &OffspringDistribution,
    index: u64,
    orientation: Orientation,
    budget: usize,
) -> Result<CrossingTree> {
    let mut rng = substream(config.seed, Domain::Tree, index);
    let mut tree = expand_tree(dist, orientation, config.depth, &mut rng, budget)?;
    let mut drng = substream(config.seed, Domain::Durations, index);
    tree.assign_durations(dist, config.duration_mode, &mut drng);
    Ok(tree)
}

pub fn simulate_with_trees(config: &SimulationConfig) -> Result<Simulation> {
    config.validate()?;
    let dist = make_offspring(&config.offspring)?;
    let (path, trees) = match config.root_mode {
        RootMode::Single => {
            let tree = grow_root(config, &dist, 0, Orientation::Up, config.node_budget)?;
            (build_path(&tree, &dist)?, vec![tree])
        }
        RootMode::Tile { target_horizon } => {
            let mut times = Vec::new();
            let mut values = Vec::new();
            let mut trees = Vec::new();
            let mut used = 0usize;
            let (mut t_off, mut v_off) = (0.0, 0.0);
            let mut r = 0u64;
            while trees.is_empty() || t_off < target_horizon {
                let bit: u64 = rand::RngCore::next_u64(&mut substream(
                    config.seed,
                    Domain::RootOrientation,
                    r,
                ));
                let orientation = if bit & 1 == 1 {
                    Orientation::Up
                } else {
                    Orientation::Down
                };
                let remaining = config.node_budget.saturating_sub(used);
                let tree = grow_root(config, &dist, r, orientation, remaining)?;
                used += tree.len();
                let piece = build_path(&tree, &dist)?;
                let skip = usize::from(!times.is_empty());
                times.extend(piece.times()[skip..].iter().map(|t| t + t_off));
                values.extend(piece.values()[skip..].iter().map(|v| v + v_off));
                t_off = *times.last().unwrap();
                v_off = *values.last().unwrap();
                trees.push(tree);
                r += 1;
            }
            let path = SamplePath::new(
                times,
                values,
                trees[0].leaf_level(),
                dist.hurst(),
                dist.mu(),
                Origin::Simulated { seed: None },
            )?;
            (path, trees)
        }
    };
    let mut path = path;
    path.origin = Origin::Simulated {
        seed: Some(config.seed),
    };
    Ok(Simulation {
        path,
        trees,
        distribution: dist,
    })
}

pub fn simulate(config: &SimulationConfig) -> Result<SamplePath> {
    simulate_with_trees(config).map(|s| s.path)
}

/// Run `replicates` independent simulations (replicate `i` seeded from
/// `config.seed` and `i`) and reduce each with `f`, in parallel. Output order
/// follows the replicate index.
pub fn ensemble_map<T, F>(config: &SimulationConfig, replicates: usize, f: F) -> Result<Vec<T>>
where
    T: Send,
    F: Fn(usize, Simulation) -> Result<T> + Sync,
{
    (0..replicates)
        .into_par_iter()
        .map(|i| {
            let mut c = config.clone();
            c.seed = replicate_seed(config.seed, i as u64);
            f(i, simulate_with_trees(&c)?)
        })
        .collect()
}

/// Discrete scale-invariance map: time divided by `mu^n`, space by `2^n`.
pub fn rescale_path(path: &SamplePath, n: i32) -> SamplePath {
    if n == 0 {
        return path.clone();
    }
    let tf = path.mu.powi(n);
    let vf = 2f64.powi(-n);
    let mut out = path.with_knots(
        path.times().iter().map(|t| t / tf).collect(),
        path.values().iter().map(|v| v * vf).collect(),
    );
    out.resolution_level -= n;
    out
}

/// `n_points` equally spaced samples over the path span.
pub fn resample_uniform(path: &SamplePath, n_points: usize) -> Result<Vec<(f64, f64)>> {
    if n_points < 2 {
        return Err(Error::InvalidParameter("n_points must be >= 2".into()));
    }
    let (t0, t1) = (path.start_time(), path.end_time());
    Ok((0..n_points)
        .map(|i| {
            let t = if i + 1 == n_points {
                t1
            } else {
                t0 + (t1 - t0) * i as f64 / (n_points - 1) as f64
            };
            (t, path.value_at(t))
        })
        .collect())
}
