//! Fits of `log(-log p)` against `log x` for tail probabilities.

use serde::{Deserialize, Serialize};

use crate::error::{Error, Result};
use crate::stats::linear_fit;

pub const MIN_TAIL_POINTS: usize = 4;

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TailFit {
    /// Abscissa of the points used in the fit (not log-transformed).
    pub abscissa: Vec<f64>,
    pub p_hat: Vec<f64>,
    pub log_minus_log_prob: Vec<f64>,
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub target_exponent: f64,
}

#[derive(Serialize)]
pub struct TailFitSummary {
    pub slope: f64,
    pub intercept: f64,
    pub r_squared: f64,
    pub target_exponent: f64,
}

impl TailFit {
    /// Least-squares fit over the points with `0 < p < 1`.
    pub fn fit(abscissa: &[f64], p_hat: &[f64], target_exponent: f64) -> Result<TailFit> {
        assert_eq!(abscissa.len(), p_hat.len());
        let (mut xs, mut ps, mut ys) = (Vec::new(), Vec::new(), Vec::new());
        for (&x, &p) in abscissa.iter().zip(p_hat) {
            if p > 0.0 && p < 1.0 && x > 0.0 {
                xs.push(x);
                ps.push(p);
                ys.push((-p.ln()).ln());
            }
        }
        if xs.len() < MIN_TAIL_POINTS {
            return Err(Error::InsufficientTailPoints {
                found: xs.len(),
                needed: MIN_TAIL_POINTS,
            });
        }
        let logx: Vec<f64> = xs.iter().map(|x| x.ln()).collect();
        let f = linear_fit(&logx, &ys).ok_or(Error::InsufficientTailPoints {
            found: xs.len(),
            needed: MIN_TAIL_POINTS,
        })?;
        Ok(TailFit {
            abscissa: xs,
            p_hat: ps,
            log_minus_log_prob: ys,
            slope: f.slope,
            intercept: f.intercept,
            r_squared: f.r_squared,
            target_exponent,
        })
    }

    /// Relative deviation of the fitted slope from the target exponent.
    pub fn relative_error(&self) -> f64 {
        ((self.slope - self.target_exponent) / self.target_exponent).abs()
    }

    pub fn summary(&self) -> TailFitSummary {
        TailFitSummary {
            slope: self.slope,
            intercept: self.intercept,
            r_squared: self.r_squared,
            target_exponent: self.target_exponent,
        }
    }

    /// CSV with header `x,p_hat,log_minus_log_p`.
    pub fn to_csv(&self) -> String {
        let mut s = String::from("x,p_hat,log_minus_log_p\n");
        for i in 0..self.abscissa.len() {
            s.push_str(&format!(
                "{},{},{}\n",
                self.abscissa[i], self.p_hat[i], self.log_minus_log_prob[i]
            ));
        }
        s
    }
}

/// Restricts a fit to the tail region `min_count / samples <= p <= p_max`.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct TailWindow {
    pub p_max: f64,
    pub min_count: u64,
}

impl TailWindow {
    /// Grid points whose estimates fall inside the window.
    pub fn select(&self, p_hat: &[f64], samples: usize) -> Vec<usize> {
        let floor = self.min_count as f64 / samples as f64;
        (0..p_hat.len())
            .filter(|&i| p_hat[i] <= self.p_max && p_hat[i] >= floor)
            .collect()
    }

    /// [`TailFit::fit`] over the selected points only.
    pub fn fit(
        &self,
        abscissa: &[f64],
        p_hat: &[f64],
        samples: usize,
        target: f64,
    ) -> Result<TailFit> {
        let idx = self.select(p_hat, samples);
        let xs: Vec<f64> = idx.iter().map(|&i| abscissa[i]).collect();
        let ps: Vec<f64> = idx.iter().map(|&i| p_hat[i]).collect();
        TailFit::fit(&xs, &ps, target)
    }
}

pub(crate) fn check_grid(grid: &[f64]) -> Result<()> {
    if grid.is_empty() {
        return Err(Error::InsufficientTailPoints {
            found: 0,
            needed: MIN_TAIL_POINTS,
        });
    }
    if grid.windows(2).any(|w| !(w[1] > w[0])) {
        return Err(Error::InvalidParameter(
            "grid must be strictly increasing".into(),
        ));
    }
    Ok(())
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn points_outside_open_interval_are_dropped() {
        let x = [1.0, 2.0, 3.0, 4.0, 5.0, 6.0];
        let p = [0.0, 0.1, 0.2, 0.3, 0.4, 1.0];
        let f = TailFit::fit(&x, &p, -1.0).unwrap();
        assert_eq!(f.abscissa, vec![2.0, 3.0, 4.0, 5.0]);
    }

    #[test]
    fn too_few_points() {
        let e = TailFit::fit(&[1.0, 2.0, 3.0], &[0.1, 0.2, 0.3], 1.0).unwrap_err();
        assert_eq!(e.code(), "INSUFFICIENT_TAIL_POINTS");
    }

    #[test]
    fn exact_law_recovered() {
        // p(x) = exp(-c x^-a)  =>  log(-log p) = log c - a log x
        let (c, a) = (0.7, 1.3);
        let x: Vec<f64> = (1..20).map(|i| 0.1 * i as f64).collect();
        let p: Vec<f64> = x.iter().map(|v| (-c * v.powf(-a)).exp()).collect();
        let f = TailFit::fit(&x, &p, -a).unwrap();
        assert!((f.slope + a).abs() < 1e-9);
        assert!((f.intercept - c.ln()).abs() < 1e-9);
    }
}
