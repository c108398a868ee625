//! Galton-Watson populations and the normed limit `W`.
//!
//! `W` is approximated by `N_k / mu^k`, where `N_k` is the size of generation
//! `k` started from one individual. Generations are advanced with exact
//! aggregate laws (sums of i.i.d. offspring counts) so large `k` costs
//! `O(k)` per sample rather than `O(mu^k)`.

use rand::Rng;
use rand_distr::{Binomial, Distribution, Gamma, Poisson};
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::offspring::{Family, OffspringDistribution};
use crate::rng::{substream, Domain};
use crate::stats::{ks_distance, log_grid, quantile_sorted};
use crate::tail::{check_grid, TailFit};

/// Default number of generations used to approximate `W`.
pub const DEFAULT_W_GENERATIONS: u32 = 12;

/// Populations above this are no longer exactly representable in `f64`.
pub const DEFAULT_POPULATION_BUDGET: f64 = 9.007_199_254_740_992e15;

/// Below this population each individual's offspring count is drawn directly.
const DIRECT_SUM_LIMIT: f64 = 64.0;

#[derive(Debug, Clone, Serialize, Deserialize)]
pub struct WEnsemble {
    pub generations: u32,
    pub samples: Vec<f64>,
    pub source_distribution: OffspringDistribution,
}

impl WEnsemble {
    pub fn mean(&self) -> f64 {
        crate::stats::mean(&self.samples)
    }

    /// CSV with header `sample_index,w_value`.
    pub fn to_csv(&self) -> String {
        let mut s = String::with_capacity(self.samples.len() * 24);
        s.push_str("sample_index,w_value\n");
        for (i, w) in self.samples.iter().enumerate() {
            s.push_str(&format!("{i},{w}\n"));
        }
        s
    }
}

/// Total offspring of `n` individuals.
fn next_generation<R: Rng + ?Sized>(dist: &OffspringDistribution, n: f64, rng: &mut R) -> f64 {
    if n <= DIRECT_SUM_LIMIT {
        return (0..n as u64).map(|_| dist.sample_z(rng) as f64).sum();
    }
    match *dist.family() {
        Family::FixedPairs { b } => 2.0 * b as f64 * n,
        Family::GeometricPairs { p } => {
            // Sum of n Geometric(p) on {1,..} is n + NegBin(n, p) failures,
            // drawn as a gamma-mixed Poisson.
            let g = Gamma::new(n, (1.0 - p) / p)
                .expect("valid gamma")
                .sample(rng);
            let extra = if g > 0.0 {
                Poisson::new(g).expect("valid poisson").sample(rng)
            } else {
                0.0
            };
            2.0 * (n + extra)
        }
        Family::PoissonPairs { lambda } => {
            let extra = Poisson::new(n * lambda).expect("valid poisson").sample(rng);
            2.0 * (n + extra)
        }
        Family::Custom { .. } => {
            // multinomial counts via sequential binomials
            let mut remaining = n as u64;
            let mut mass = 1.0;
            let mut total = 0.0;
            for (&z, &p) in dist.support().iter().zip(dist.probs()) {
                if remaining == 0 {
                    break;
                }
                let q = (p / mass).clamp(0.0, 1.0);
                let c = if q >= 1.0 {
                    remaining
                } else {
                    Binomial::new(remaining, q)
                        .expect("valid binomial")
                        .sample(rng)
                };
                total += c as f64 * z as f64;
                remaining -= c;
                mass -= p;
            }
            total + remaining as f64 * dist.max_support() as f64
        }
    }
}

/// Size of generation `k` of a Galton-Watson tree from one ancestor.
pub fn population<R: Rng + ?Sized>(dist: &OffspringDistribution, k: u32, rng: &mut R) -> f64 {
    let mut n = 1.0;
    for _ in 0..k {
        n = next_generation(dist, n, rng);
    }
    n
}

/// One draw of `N_k / mu^k`.
pub fn sample_w_one<R: Rng + ?Sized>(dist: &OffspringDistribution, k: u32, rng: &mut R) -> f64 {
    population(dist, k, rng) / dist.mu().powi(k as i32)
}

pub fn check_population_budget(dist: &OffspringDistribution, k: u32, budget: f64) -> Result<()> {
    let expected = dist.mu().powi(k as i32);
    if expected > budget {
        return Err(Error::DepthOverflow {
            generations: k,
            expected,
            budget,
        });
    }
    Ok(())
}

/// `count` independent approximations of `W`, sample `i` drawn from its own
/// substream of `seed`.
pub fn sample_w(
    dist: &OffspringDistribution,
    generations: u32,
    count: usize,
    seed: u64,
) -> Result<WEnsemble> {
    sample_w_with_budget(dist, generations, count, seed, DEFAULT_POPULATION_BUDGET)
}

pub fn sample_w_with_budget(
    dist: &OffspringDistribution,
    generations: u32,
    count: usize,
    seed: u64,
    budget: f64,
) -> Result<WEnsemble> {
    if generations < 1 {
        return Err(Error::InvalidParameter("generations must be >= 1".into()));
    }
    if count < 1 {
        return Err(Error::InvalidParameter("sample count must be >= 1".into()));
    }
    check_population_budget(dist, generations, budget)?;
    let samples = (0..count as u64)
        .into_par_iter()
        .map(|i| {
            let mut rng = substream(seed, Domain::WSample, i);
            sample_w_one(dist, generations, &mut rng)
        })
        .collect();
    Ok(WEnsemble {
        generations,
        samples,
        source_distribution: dist.clone(),
    })
}

/// KS distance between the `k` and `k + 2` generation approximations.
pub fn w_convergence_ks(
    dist: &OffspringDistribution,
    generations: u32,
    count: usize,
    seed: u64,
) -> Result<f64> {
    let a = sample_w(dist, generations, count, seed)?;
    let b = sample_w(dist, generations + 2, count, seed.wrapping_add(1))?;
    Ok(ks_distance(&a.samples, &b.samples))
}

/// Fit of `log(-log P(W < x))` against `log x`; target slope `-H / (1 - H)`.
pub fn w_left_tail_fit(ensemble: &WEnsemble, x_grid: &[f64]) -> Result<TailFit> {
    check_grid(x_grid)?;
    let mut sorted = ensemble.samples.clone();
    sorted.sort_by(f64::total_cmp);
    let n = sorted.len() as f64;
    let p_hat: Vec<f64> = x_grid
        .iter()
        .map(|&x| sorted.partition_point(|&w| w < x) as f64 / n)
        .collect();
    let h = ensemble.source_distribution.hurst();
    TailFit::fit(x_grid, &p_hat, -h / (1.0 - h))
}

/// Log-spaced grid between the empirical `p_lo` and `p_hi` quantiles.
pub fn w_tail_grid(ensemble: &WEnsemble, p_lo: f64, p_hi: f64, points: usize) -> Vec<f64> {
    let mut sorted = ensemble.samples.clone();
    sorted.sort_by(f64::total_cmp);
    log_grid(
        quantile_sorted(&sorted, p_lo),
        quantile_sorted(&sorted, p_hi),
        points,
    )
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::offspring::make_offspring;
    use crate::stats::variance;

    #[test]
    fn fixed_pairs_w_is_exactly_one() {
        let d = make_offspring(&Family::FixedPairs { b: 2 }).unwrap();
        for k in [1, 5, 12] {
            let e = sample_w(&d, k, 50, 3).unwrap();
            assert!(e.samples.iter().all(|&w| w == 1.0));
        }
    }

    #[test]
    fn zero_count_is_rejected() {
        let d = make_offspring(&Family::GeometricPairs { p: 0.5 }).unwrap();
        assert!(sample_w(&d, 12, 0, 1).is_err());
        assert!(sample_w(&d, 0, 10, 1).is_err());
    }

    #[test]
    fn budget_overflow() {
        let d = make_offspring(&Family::GeometricPairs { p: 0.5 }).unwrap();
        let e = sample_w_with_budget(&d, 12, 10, 1, 1e6).unwrap_err();
        assert_eq!(e.code(), "DEPTH_OVERFLOW");
    }

    #[test]
    fn geometric_mean_is_one() {
        let d = make_offspring(&Family::GeometricPairs { p: 0.5 }).unwrap();
        let e = sample_w(&d, 12, 100_000, 11).unwrap();
        let m = e.mean();
        let se = (variance(&e.samples) / e.samples.len() as f64).sqrt();
        assert!((m - 1.0).abs() < 0.02, "mean {m}");
        assert!((m - 1.0).abs() < 4.0 * se, "mean {m} se {se}");
        assert!(e.samples.iter().all(|&w| w >= 0.0));
    }

    #[test]
    fn aggregate_and_direct_sums_agree_in_law() {
        // Independent route: individual-level simulation of N_6.
        let d = make_offspring(&Family::PoissonPairs { lambda: 1.0 }).unwrap();
        let mut rng = substream(5, Domain::Analysis, 0);
        let direct: Vec<f64> = (0..4000)
            .map(|_| {
                let mut n = 1u64;
                for _ in 0..6 {
                    n = (0..n).map(|_| d.sample_z(&mut rng) as u64).sum();
                }
                n as f64 / 4f64.powi(6)
            })
            .collect();
        let agg = sample_w(&d, 6, 4000, 9).unwrap();
        let ks = ks_distance(&direct, &agg.samples);
        assert!(ks < 0.04, "ks {ks}");
    }

    #[test]
    fn custom_family_aggregate_route() {
        let mut pmf = std::collections::BTreeMap::new();
        pmf.insert(2, 0.5);
        pmf.insert(6, 0.5);
        let d = make_offspring(&Family::Custom { pmf }).unwrap();
        let e = sample_w(&d, 8, 20_000, 2).unwrap();
        assert!((e.mean() - 1.0).abs() < 0.03, "{}", e.mean());
    }

    #[test]
    fn tail_fit_empty_grid() {
        let d = make_offspring(&Family::FixedPairs { b: 2 }).unwrap();
        let e = sample_w(&d, 3, 10, 1).unwrap();
        assert_eq!(
            w_left_tail_fit(&e, &[]).unwrap_err().code(),
            "INSUFFICIENT_TAIL_POINTS"
        );
    }

    #[test]
    fn tail_target_for_third() {
        let d = make_offspring(&Family::GeometricPairs { p: 0.25 }).unwrap();
        let e = sample_w(&d, 8, 20_000, 4).unwrap();
        let grid = w_tail_grid(&e, 0.01, 0.3, 8);
        let f = w_left_tail_fit(&e, &grid).unwrap();
        assert!((f.target_exponent + 0.5).abs() < 1e-9);
    }

    #[test]
    fn fitter_recovers_planted_exponent() {
        // Exact-law samples by inversion of p(x) = exp(-c x^-a).
        let (c, a) = (0.5, 1.0);
        let d = make_offspring(&Family::GeometricPairs { p: 0.5 }).unwrap();
        let mut rng = substream(1, Domain::Analysis, 0);
        let samples: Vec<f64> = (0..400_000)
            .map(|_| {
                let u: f64 = rng.random::<f64>().max(1e-300);
                (-u.ln() / c).powf(-1.0 / a)
            })
            .collect();
        let e = WEnsemble {
            generations: 1,
            samples,
            source_distribution: d,
        };
        let grid = w_tail_grid(&e, 1e-3, 0.5, 12);
        let f = w_left_tail_fit(&e, &grid).unwrap();
        assert!((f.slope + a).abs() < 0.02, "slope {}", f.slope);
    }
}
