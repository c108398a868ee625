//! Subcrossing-count laws, their validation, and the two-type mean matrix.
//!
//! A law is a pmf on the even integers `z >= 2`. Unbounded families are
//! truncated at the first point where the remaining tail mass drops below
//! [`TAIL_CUTOFF`] and renormalised, so every distribution object has finite
//! support and all moment sums over it are exact.

use std::collections::BTreeMap;

use rand::Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};

/// Tail mass below which unbounded families are truncated.
pub const TAIL_CUTOFF: f64 = 1e-12;

const MASS_TOLERANCE: f64 = 1e-12;

/// Parametric description of a subcrossing-count law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "kebab-case")]
pub enum Family {
    /// `Z = 2K`, `K ~ Geometric(p)` on `{1, 2, ...}`; `E Z = 2 / p`.
    GeometricPairs { p: f64 },
    /// `Z = 2 (1 + N)`, `N ~ Poisson(lambda)`; `E Z = 2 (1 + lambda)`.
    PoissonPairs { lambda: f64 },
    /// `Z = 2b` deterministically.
    FixedPairs { b: u32 },
    /// Explicit pmf keyed by `z`.
    Custom {
        #[serde(with = "pmf_keys")]
        pmf: BTreeMap<u32, f64>,
    },
}

/// JSON object keys are strings; the tagged-enum buffer will not coerce
/// them to integers, so the pmf is parsed by hand.
mod pmf_keys {
    use std::collections::BTreeMap;

    use serde::de::Error as _;
    use serde::{Deserialize, Deserializer, Serialize, Serializer};

    pub fn serialize<S: Serializer>(pmf: &BTreeMap<u32, f64>, s: S) -> Result<S::Ok, S::Error> {
        pmf.serialize(s)
    }

    pub fn deserialize<'de, D: Deserializer<'de>>(d: D) -> Result<BTreeMap<u32, f64>, D::Error> {
        BTreeMap::<String, f64>::deserialize(d)?
            .into_iter()
            .map(|(k, v)| {
                k.trim().parse().map(|z| (z, v)).map_err(|_| {
                    D::Error::custom(format!("pmf key {k:?} is not a non-negative integer"))
                })
            })
            .collect()
    }
}

impl Family {
    /// Closed-form mean where one exists.
    pub fn closed_form_mean(&self) -> Option<f64> {
        match *self {
            Family::GeometricPairs { p } => Some(2.0 / p),
            Family::PoissonPairs { lambda } => Some(2.0 * (1.0 + lambda)),
            Family::FixedPairs { b } => Some(2.0 * b as f64),
            Family::Custom { .. } => None,
        }
    }

    /// Geometric-pairs law with the given Hurst index, `mu = 2^(1/H)`.
    pub fn geometric_for_hurst(hurst: f64) -> Family {
        let mu = 2f64.powf(1.0 / hurst);
        Family::GeometricPairs { p: 2.0 / mu }
    }
}

#[derive(Debug, Clone, Serialize)]
pub struct OffspringDistribution {
    family: Family,
    support: Vec<u32>,
    probs: Vec<f64>,
    #[serde(skip)]
    cdf: Vec<f64>,
    mu: f64,
    pi: f64,
    hurst: f64,
}

impl<'de> Deserialize<'de> for OffspringDistribution {
    fn deserialize<D: serde::Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        struct Raw {
            family: Family,
        }
        let raw = Raw::deserialize(d)?;
        make_offspring(&raw.family).map_err(serde::de::Error::custom)
    }
}

impl PartialEq for OffspringDistribution {
    fn eq(&self, other: &Self) -> bool {
        self.family == other.family && self.support == other.support && self.probs == other.probs
    }
}

/// Build and validate a subcrossing-count law.
pub fn make_offspring(family: &Family) -> Result<OffspringDistribution> {
    let pmf: Vec<(u32, f64)> = match family {
        Family::GeometricPairs { p } => {
            let p = *p;
            if !(p > 0.0 && p < 1.0) {
                return Err(Error::InvalidParameter(format!(
                    "geometric-pairs needs 0 < p < 1, got {p}"
                )));
            }
            let q = 1.0 - p;
            // P(K > k) = q^k; stop at the first k with tail below the cutoff.
            let mut out = Vec::new();
            let mut k = 1u32;
            loop {
                out.push((2 * k, p * q.powi(k as i32 - 1)));
                if q.powi(k as i32) < TAIL_CUTOFF {
                    break;
                }
                k += 1;
            }
            out
        }
        Family::PoissonPairs { lambda } => {
            let lambda = *lambda;
            if !(lambda > 0.0 && lambda.is_finite()) {
                return Err(Error::InvalidParameter(format!(
                    "poisson-pairs needs lambda > 0, got {lambda}"
                )));
            }
            poisson_pairs_pmf(lambda)
        }
        Family::FixedPairs { b } => {
            if *b < 1 {
                return Err(Error::InvalidParameter("fixed-pairs needs b >= 1".into()));
            }
            vec![(2 * b, 1.0)]
        }
        Family::Custom { pmf } => {
            for (&z, &p) in pmf {
                if z < 2 || z % 2 != 0 {
                    return Err(Error::InvalidPmf(format!(
                        "support point {z} is not an even integer >= 2"
                    )));
                }
                if !(p >= 0.0 && p.is_finite()) {
                    return Err(Error::InvalidPmf(format!("probability {p} at z = {z}")));
                }
            }
            let mass: f64 = pmf.values().sum();
            if (mass - 1.0).abs() > MASS_TOLERANCE {
                return Err(Error::InvalidPmf(format!("total mass {mass} != 1")));
            }
            pmf.iter()
                .filter(|(_, &p)| p > 0.0)
                .map(|(&z, &p)| (z, p))
                .collect()
        }
    };
    from_pmf(family.clone(), pmf)
}

fn poisson_pairs_pmf(lambda: f64) -> Vec<(u32, f64)> {
    // Terms first, then tails summed from the far end so tiny tails are not
    // lost to cancellation in 1 - cdf.
    let mut terms = Vec::new();
    let mut term = (-lambda).exp();
    let mut j = 0u32;
    loop {
        terms.push(term);
        j += 1;
        term *= lambda / j as f64;
        if (j as f64) > lambda && term < TAIL_CUTOFF * 1e-6 {
            break;
        }
    }
    let mut tail_after = vec![0.0; terms.len()];
    let mut acc = 0.0;
    for i in (0..terms.len()).rev() {
        tail_after[i] = acc;
        acc += terms[i];
    }
    let cut = tail_after
        .iter()
        .position(|&t| t < TAIL_CUTOFF)
        .unwrap_or(terms.len() - 1);
    terms[..=cut]
        .iter()
        .enumerate()
        .map(|(j, &p)| (2 * (j as u32 + 1), p))
        .collect()
}

fn from_pmf(family: Family, pmf: Vec<(u32, f64)>) -> Result<OffspringDistribution> {
    if pmf.is_empty() {
        return Err(Error::InvalidPmf("empty support".into()));
    }
    let mass: f64 = pmf.iter().map(|(_, p)| p).sum();
    let support: Vec<u32> = pmf.iter().map(|(z, _)| *z).collect();
    let probs: Vec<f64> = pmf.iter().map(|(_, p)| p / mass).collect();
    let mut cdf = Vec::with_capacity(probs.len());
    let mut acc = 0.0;
    for p in &probs {
        acc += p;
        cdf.push(acc);
    }
    let mu: f64 = support
        .iter()
        .zip(&probs)
        .map(|(&z, &p)| z as f64 * p)
        .sum();
    if mu <= 2.0 {
        return Err(Error::MuNotSupercritical { mu });
    }
    let pi = support
        .iter()
        .zip(&probs)
        .filter(|(&z, _)| z > 2)
        .map(|(_, &p)| p)
        .sum();
    Ok(OffspringDistribution {
        family,
        support,
        probs,
        cdf,
        mu,
        pi,
        hurst: 2f64.ln() / mu.ln(),
    })
}

impl OffspringDistribution {
    pub fn family(&self) -> &Family {
        &self.family
    }

    /// Mean subcrossing count `E Z` of the (truncated) law.
    pub fn mu(&self) -> f64 {
        self.mu
    }

    /// `P(Z > 2)`.
    pub fn pi(&self) -> f64 {
        self.pi
    }

    /// `log 2 / log mu`.
    pub fn hurst(&self) -> f64 {
        self.hurst
    }

    pub fn support(&self) -> &[u32] {
        &self.support
    }

    pub fn probs(&self) -> &[f64] {
        &self.probs
    }

    pub fn max_support(&self) -> u32 {
        *self.support.last().expect("non-empty support")
    }

    pub fn pmf(&self, z: u32) -> f64 {
        self.support
            .binary_search(&z)
            .map(|i| self.probs[i])
            .unwrap_or(0.0)
    }

    /// `P(Z > k)` on the truncated support.
    pub fn tail(&self, k: i64) -> f64 {
        self.support
            .iter()
            .zip(&self.probs)
            .filter(|(&z, _)| z as i64 > k)
            .map(|(_, &p)| p)
            .sum()
    }

    pub fn sample_z<R: Rng + ?Sized>(&self, rng: &mut R) -> u32 {
        if self.support.len() == 1 {
            return self.support[0];
        }
        let u: f64 = rng.random();
        // Light-tailed laws: a forward scan beats binary search on average.
        for (i, &c) in self.cdf.iter().enumerate() {
            if u < c {
                return self.support[i];
            }
        }
        self.max_support()
    }
}

/// Two-type mean offspring matrix and its Perron-Frobenius structure.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct MeanMatrix {
    pub mu_plus: f64,
    pub mu_minus: f64,
    pub entries: [[f64; 2]; 2],
    pub dominant_eigenvalue: f64,
    pub second_eigenvalue: f64,
    /// Normalised to sum to one.
    pub left_eigenvector: [f64; 2],
    /// Normalised so that `left . right = 1`.
    pub right_eigenvector: [f64; 2],
}

pub fn mean_offspring_matrix(mu_plus: f64, mu_minus: f64) -> Result<MeanMatrix> {
    for mu in [mu_plus, mu_minus] {
        if !(mu > 2.0) {
            return Err(Error::MuNotSupercritical { mu });
        }
    }
    let m = [
        [mu_plus / 2.0 + 1.0, mu_plus / 2.0 - 1.0],
        [mu_minus / 2.0 - 1.0, mu_minus / 2.0 + 1.0],
    ];
    let trace = m[0][0] + m[1][1];
    let det = m[0][0] * m[1][1] - m[0][1] * m[1][0];
    let disc = (trace * trace - 4.0 * det).max(0.0).sqrt();
    let lambda1 = (trace + disc) / 2.0;
    let lambda2 = (trace - disc) / 2.0;

    let a = [[m[0][0] - lambda1, m[0][1]], [m[1][0], m[1][1] - lambda1]];
    let left = pick_larger([a[1][0], -a[0][0]], [a[1][1], -a[0][1]]);
    let right = pick_larger([a[0][1], -a[0][0]], [-a[1][1], a[1][0]]);
    let ls = left[0] + left[1];
    let left = [left[0] / ls, left[1] / ls];
    let dot = left[0] * right[0] + left[1] * right[1];
    let right = [right[0] / dot, right[1] / dot];

    Ok(MeanMatrix {
        mu_plus,
        mu_minus,
        entries: m,
        dominant_eigenvalue: lambda1,
        second_eigenvalue: lambda2,
        left_eigenvector: left,
        right_eigenvector: right,
    })
}

fn pick_larger(u: [f64; 2], v: [f64; 2]) -> [f64; 2] {
    if u[0].hypot(u[1]) >= v[0].hypot(v[1]) {
        u
    } else {
        v
    }
}

/// Outcome of the moment conditions on a single-type law.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GwAssumptionReport {
    pub mu: f64,
    pub supercritical: bool,
    /// `E[Z log Z]` summed over the truncated support.
    pub e_z_log_z: f64,
    /// Whether `E[Z log Z] < infinity` for the untruncated law.
    pub z_log_z_finite: bool,
    pub pass: bool,
}

pub fn check_assumption_gw(dist: &OffspringDistribution) -> GwAssumptionReport {
    let e_z_log_z: f64 = dist
        .support
        .iter()
        .zip(&dist.probs)
        .map(|(&z, &p)| p * z as f64 * (z as f64).ln())
        .sum();
    // Every supported family has exponentially light tails or bounded
    // support, so the untruncated moment is finite whenever the sum is.
    let z_log_z_finite = e_z_log_z.is_finite();
    let supercritical = dist.mu > 2.0;
    GwAssumptionReport {
        mu: dist.mu,
        supercritical,
        e_z_log_z,
        z_log_z_finite,
        pass: supercritical && z_log_z_finite,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct DominanceCheckResult {
    /// Smallest offset that passes, if any up to `zeta_max` does.
    pub zeta: Option<u32>,
    pub zeta_max: u32,
    pub checked_y_range: (u32, u32),
    /// `(y, z)` pairs that fail at `zeta_max`; empty when `zeta` is found.
    pub violations: Vec<(u32, u32)>,
}

const DOMINANCE_SLACK: f64 = 1e-12;

/// `(y, z)` pairs where `P(Z - y > z | Z > y) > P(Z + zeta > z)`.
pub fn dominance_violations(
    dist: &OffspringDistribution,
    zeta: u32,
    y_max: u32,
) -> Vec<(u32, u32)> {
    let z_max = dist.max_support();
    // tail[k] = P(Z > k) for k in 0..=z_max
    let tail: Vec<f64> = (0..=z_max as i64).map(|k| dist.tail(k)).collect();
    let tail_at = |k: i64| -> f64 {
        if k < 0 {
            1.0
        } else if k as usize >= tail.len() {
            0.0
        } else {
            tail[k as usize]
        }
    };
    let mut out = Vec::new();
    for y in 0..=y_max {
        let given = tail_at(y as i64);
        if given <= 0.0 {
            continue;
        }
        for z in 0..=z_max {
            let lhs = tail_at(y as i64 + z as i64) / given;
            let rhs = tail_at(z as i64 - zeta as i64);
            if lhs > rhs + DOMINANCE_SLACK {
                out.push((y, z));
            }
        }
    }
    out
}

/// Minimal `zeta` in `0..=zeta_max` such that `Z + zeta` stochastically
/// dominates `Z - y | Z > y` for every `y` in `0..=y_max`.
pub fn check_assumption_z(
    dist: &OffspringDistribution,
    zeta_max: u32,
    y_max: u32,
) -> DominanceCheckResult {
    for zeta in 0..=zeta_max {
        if dominance_violations(dist, zeta, y_max).is_empty() {
            return DominanceCheckResult {
                zeta: Some(zeta),
                zeta_max,
                checked_y_range: (0, y_max),
                violations: Vec::new(),
            };
        }
    }
    DominanceCheckResult {
        zeta: None,
        zeta_max,
        checked_y_range: (0, y_max),
        violations: dominance_violations(dist, zeta_max, y_max),
    }
}

/// Default `y_max`: beyond the largest support point minus one the
/// conditioning event `Z > y` is empty.
pub fn default_y_max(dist: &OffspringDistribution) -> u32 {
    dist.max_support() - 1
}

#[cfg(test)]
mod tests {
    use super::*;
    use proptest::prelude::*;

    fn custom(entries: &[(u32, f64)]) -> Family {
        Family::Custom {
            pmf: entries.iter().copied().collect(),
        }
    }

    #[test]
    fn custom_family_json_round_trip() {
        let f = custom(&[(2, 0.25), (10, 0.75)]);
        let text = serde_json::to_string(&f).unwrap();
        assert_eq!(text, r#"{"family":"custom","pmf":{"2":0.25,"10":0.75}}"#);
        assert_eq!(serde_json::from_str::<Family>(&text).unwrap(), f);
        assert!(serde_json::from_str::<Family>(r#"{"family":"custom","pmf":{"x":1.0}}"#).is_err());
    }

    #[test]
    fn geometric_half_is_brownian() {
        let d = make_offspring(&Family::GeometricPairs { p: 0.5 }).unwrap();
        assert!((d.mu() - 4.0).abs() < 1e-9);
        assert!((d.hurst() - 0.5).abs() < 1e-9);
        for k in 1..=10u32 {
            assert!((d.pmf(2 * k) - 0.5f64.powi(k as i32)).abs() < 1e-12);
        }
        assert!((d.pi() - 0.5).abs() < 1e-12);
    }

    #[test]
    fn fixed_pairs_one_is_critical() {
        let err = make_offspring(&Family::FixedPairs { b: 1 }).unwrap_err();
        assert_eq!(err.code(), "MU_NOT_SUPERCRITICAL");
    }

    #[test]
    fn poisson_pairs_one() {
        let d = make_offspring(&Family::PoissonPairs { lambda: 1.0 }).unwrap();
        assert!((d.mu() - 4.0).abs() < 1e-9);
        assert!((d.hurst() - 0.5).abs() < 1e-9);
        // P(Z = 2) = e^-1
        assert!((d.pmf(2) - (-1f64).exp()).abs() < 1e-12);
    }

    #[test]
    fn truncation_leaves_tiny_tail() {
        for fam in [
            Family::GeometricPairs { p: 0.25 },
            Family::PoissonPairs { lambda: 3.0 },
        ] {
            let d = make_offspring(&fam).unwrap();
            let total: f64 = d.probs().iter().sum();
            assert!((total - 1.0).abs() < 1e-12);
            let cf = fam.closed_form_mean().unwrap();
            assert!(
                (d.mu() - cf).abs() < 1e-8 * cf,
                "{fam:?}: {} vs {cf}",
                d.mu()
            );
        }
    }

    #[test]
    fn invalid_pmfs() {
        assert_eq!(
            make_offspring(&custom(&[(3, 1.0)])).unwrap_err().code(),
            "INVALID_PMF"
        );
        assert_eq!(
            make_offspring(&custom(&[(0, 0.5), (4, 0.5)]))
                .unwrap_err()
                .code(),
            "INVALID_PMF"
        );
        assert_eq!(
            make_offspring(&custom(&[(2, 0.5), (4, 0.4)]))
                .unwrap_err()
                .code(),
            "INVALID_PMF"
        );
        assert!(make_offspring(&Family::GeometricPairs { p: 1.0 }).is_err());
        assert!(make_offspring(&Family::PoissonPairs { lambda: 0.0 }).is_err());
    }

    #[test]
    fn matrix_four_four() {
        let m = mean_offspring_matrix(4.0, 4.0).unwrap();
        assert_eq!(m.entries, [[3.0, 1.0], [1.0, 3.0]]);
        assert!((m.dominant_eigenvalue - 4.0).abs() < 1e-12);
        assert!((m.second_eigenvalue - 2.0).abs() < 1e-12);
        assert!((m.left_eigenvector[0] - 0.5).abs() < 1e-12);
        assert!((m.left_eigenvector[1] - 0.5).abs() < 1e-12);
    }

    #[test]
    fn matrix_six_four_right_vector() {
        let m = mean_offspring_matrix(6.0, 4.0).unwrap();
        assert!((m.right_eigenvector[0] - 4.0 / 3.0).abs() < 1e-12);
        assert!((m.right_eigenvector[1] - 2.0 / 3.0).abs() < 1e-12);
        assert!((m.dominant_eigenvalue - 5.0).abs() < 1e-12);
    }

    #[test]
    fn matrix_rejects_subcritical() {
        assert!(mean_offspring_matrix(2.0, 5.0).is_err());
        assert!(mean_offspring_matrix(5.0, 1.5).is_err());
    }

    #[test]
    fn gw_assumption_examples() {
        let g = make_offspring(&Family::GeometricPairs { p: 0.5 }).unwrap();
        let r = check_assumption_gw(&g);
        assert!(r.pass && r.e_z_log_z.is_finite());
        let f = make_offspring(&Family::FixedPairs { b: 2 }).unwrap();
        let r = check_assumption_gw(&f);
        assert!(r.pass);
        assert!((r.e_z_log_z - 4.0 * 4f64.ln()).abs() < 1e-12);
        let c = make_offspring(&custom(&[(2, 0.9), (4, 0.1)])).unwrap();
        let r = check_assumption_gw(&c);
        assert!((r.mu - 2.2).abs() < 1e-12);
        assert!(r.pass);
    }

    #[test]
    fn uniform_two_four_has_zeta_zero() {
        let d = make_offspring(&custom(&[(2, 0.5), (4, 0.5)])).unwrap();
        let r = check_assumption_z(&d, 4, 3);
        assert_eq!(r.zeta, Some(0));
    }

    #[test]
    fn geometric_is_nbu() {
        let d = make_offspring(&Family::GeometricPairs { p: 0.5 }).unwrap();
        let r = check_assumption_z(&d, 2, default_y_max(&d));
        assert_eq!(r.zeta, Some(0));
    }

    #[test]
    fn planted_violation_reported() {
        // Z > 2 forces Z = 20, so Z - 2 = 18 is far heavier than Z.
        let d = make_offspring(&custom(&[(2, 0.9), (20, 0.1)])).unwrap();
        let r = check_assumption_z(&d, 0, default_y_max(&d));
        assert_eq!(r.zeta, None);
        assert!(r.violations.contains(&(2, 10)));
        assert!(r.violations.iter().all(|&(y, _)| y >= 2));
        let r = check_assumption_z(&d, 20, default_y_max(&d));
        assert_eq!(r.zeta, Some(16));
    }

    fn bounded_pmf() -> impl Strategy<Value = Family> {
        proptest::collection::vec(0.01f64..1.0, 1..6).prop_map(|w| {
            let total: f64 = w.iter().sum();
            let mut pmf = BTreeMap::new();
            for (i, x) in w.iter().enumerate() {
                pmf.insert(2 * (i as u32 + 1), x / total);
            }
            // force supercriticality
            let last = 2 * w.len() as u32 + 2;
            let pmf: BTreeMap<u32, f64> = pmf.into_iter().map(|(z, p)| (z, p * 0.5)).collect();
            let mut pmf = pmf;
            pmf.insert(last, 0.5);
            Family::Custom { pmf }
        })
    }

    proptest! {
        #[test]
        fn parametric_families_are_consistent(p in 0.05f64..0.95, lambda in 0.05f64..6.0, b in 2u32..8) {
            for fam in [Family::GeometricPairs { p }, Family::PoissonPairs { lambda }, Family::FixedPairs { b }] {
                let d = make_offspring(&fam).unwrap();
                let mean: f64 = d.support().iter().zip(d.probs()).map(|(&z, &q)| z as f64 * q).sum();
                prop_assert!((mean - d.mu()).abs() < 1e-12 * d.mu());
                prop_assert!(d.hurst() > 0.0 && d.hurst() < 1.0);
                let cf = fam.closed_form_mean().unwrap();
                prop_assert!((d.mu() - cf).abs() < 1e-8 * cf);
                prop_assert!(d.support().iter().all(|z| z % 2 == 0 && *z >= 2));
            }
        }

        #[test]
        fn dominance_is_monotone_in_zeta(fam in bounded_pmf(), zeta in 0u32..6) {
            let d = make_offspring(&fam).unwrap();
            let y_max = default_y_max(&d);
            if dominance_violations(&d, zeta, y_max).is_empty() {
                prop_assert!(dominance_violations(&d, zeta + 1, y_max).is_empty());
            }
        }

        #[test]
        fn bounded_pmf_passes_with_max_offset(fam in bounded_pmf()) {
            let d = make_offspring(&fam).unwrap();
            let zm = d.max_support() - 2;
            prop_assert!(dominance_violations(&d, zm, default_y_max(&d)).is_empty());
        }

        #[test]
        fn matrix_structure(mp in 2.0001f64..50.0, mm in 2.0001f64..50.0) {
            let m = mean_offspring_matrix(mp, mm).unwrap();
            let mu = (mp + mm) / 2.0;
            prop_assert!((m.entries[0][0] + m.entries[0][1] - mp).abs() < 1e-12 * mp);
            prop_assert!((m.entries[1][0] + m.entries[1][1] - mm).abs() < 1e-12 * mm);
            prop_assert!((m.dominant_eigenvalue - mu).abs() < 1e-12 * mu);
            prop_assert!(m.dominant_eigenvalue > m.second_eigenvalue);
            prop_assert!((m.left_eigenvector[0] - 0.5).abs() < 1e-12);
            prop_assert!((m.right_eigenvector[0] - (mp - 2.0) / (mu - 2.0)).abs() < 1e-9);
            prop_assert!((m.right_eigenvector[1] - (mm - 2.0) / (mu - 2.0)).abs() < 1e-9);
        }
    }
}
