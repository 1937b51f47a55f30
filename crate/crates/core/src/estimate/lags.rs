//! Marginal fit, pseudo-observations and per-lag Gaussian-copula MLE.

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::marginals::Marginal;
use crate::numerics::{minimize_scalar, std_normal_quantile, BracketSearch};

/// Shortest series accepted by [`fit_marginal`].
pub const MIN_SERIES_LEN: usize = 30;
/// Fewest usable pairs per lag.
pub const MIN_PAIRS: usize = 30;
/// The correlation search is clamped to [−RHO_BOUND, RHO_BOUND].
pub const RHO_BOUND: f64 = 0.999;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum MarginalFamily {
    Normal,
    ExponentialScale,
}

/// Normal: sample mean and (n − 1) sample variance. Exponential: λ̂ = sample mean.
pub fn fit_marginal(series: &[f64], family: MarginalFamily) -> Result<Marginal<f64>> {
    let n = series.len();
    if n < MIN_SERIES_LEN {
        return Err(Error::InsufficientData {
            have: n,
            need: MIN_SERIES_LEN,
        });
    }
    if series.iter().any(|x| !x.is_finite()) {
        return Err(domain("series contains non-finite values"));
    }
    let mean = series.iter().sum::<f64>() / n as f64;
    let var = series.iter().map(|x| (x - mean) * (x - mean)).sum::<f64>() / (n - 1) as f64;
    if !(var > 0.0) {
        return Err(Error::Degenerate("series has zero sample variance".into()));
    }
    let m = match family {
        MarginalFamily::Normal => Marginal::Normal {
            mu: mean,
            sigma: var.sqrt(),
        },
        MarginalFamily::ExponentialScale => {
            if !(mean > 0.0) {
                return Err(Error::Degenerate(format!(
                    "exponential fit needs a positive sample mean, got {mean}"
                )));
            }
            Marginal::ExponentialScale { lambda: mean }
        }
    };
    Ok(m)
}

/// y_i = F̂(x_i).
pub fn pseudo_observations(series: &[f64], marginal: &Marginal<f64>) -> Vec<f64> {
    series.iter().map(|&x| marginal.cdf(x)).collect()
}

fn interior(y: f64) -> bool {
    y > 0.0 && y < 1.0
}

/// Pairs (y_i, y_{i+s}) with every pair touching 0 or 1 removed. No minimum count.
pub fn lag_pairs(y: &[f64], s: usize) -> Vec<(f64, f64)> {
    if s == 0 || s >= y.len() {
        return Vec::new();
    }
    y.iter()
        .zip(&y[s..])
        .filter(|(a, b)| interior(**a) && interior(**b))
        .map(|(a, b)| (*a, *b))
        .collect()
}

/// Lag-`s` pseudo-pairs; at least [`MIN_PAIRS`] must survive the boundary removal.
pub fn pseudo_pairs(series: &[f64], marginal: &Marginal<f64>, s: usize) -> Result<Vec<(f64, f64)>> {
    if s == 0 || s >= series.len() {
        return Err(domain(format!("lag must lie in 1..{}, got {s}", series.len())));
    }
    let pairs = lag_pairs(&pseudo_observations(series, marginal), s);
    if pairs.len() < MIN_PAIRS {
        return Err(Error::InsufficientData {
            have: pairs.len(),
            need: MIN_PAIRS,
        });
    }
    Ok(pairs)
}

/// Second moments of the normal scores of a pair sample.
#[derive(Debug, Clone, Copy, Default)]
struct ScoreMoments {
    n: usize,
    sxx: f64,
    syy: f64,
    sxy: f64,
}

impl ScoreMoments {
    fn push(&mut self, x: f64, y: f64) {
        self.n += 1;
        self.sxx += x * x;
        self.syy += y * y;
        self.sxy += x * y;
    }

    /// Mean negative Gaussian-copula log-density at ρ.
    fn neg_loglik(&self, rho: f64) -> f64 {
        let n = self.n as f64;
        let one_m = 1.0 - rho * rho;
        0.5 * one_m.ln() + (rho * rho * (self.sxx + self.syy) - 2.0 * rho * self.sxy) / (2.0 * n * one_m)
    }

    fn maximize(&self) -> Result<f64> {
        if self.n < MIN_PAIRS {
            return Err(Error::InsufficientData {
                have: self.n,
                need: MIN_PAIRS,
            });
        }
        let bracket = BracketSearch::new(-RHO_BOUND, RHO_BOUND).with_tol(1e-12);
        let best = minimize_scalar(|r| self.neg_loglik(r), &bracket)?;
        if !best.min_value.is_finite() {
            return Err(Error::Estimation("log-likelihood is not finite".into()));
        }
        Ok(self.polish(best.argmin).clamp(-RHO_BOUND, RHO_BOUND))
    }

    /// Newton steps on the score −ρ³ + Bρ² + (1 − A)ρ + B = 0 (A = (Sxx + Syy)/n,
    /// B = Sxy/n), taking the bracketed optimum to full precision.
    fn polish(&self, rho: f64) -> f64 {
        if rho.abs() >= RHO_BOUND {
            return rho;
        }
        let n = self.n as f64;
        let (a, b) = ((self.sxx + self.syy) / n, self.sxy / n);
        let score = |r: f64| ((-r + b) * r + (1.0 - a)) * r + b;
        let mut r = rho;
        for _ in 0..8 {
            let g = score(r);
            let dg = (-3.0 * r + 2.0 * b) * r + (1.0 - a);
            if dg == 0.0 {
                break;
            }
            let next = r - g / dg;
            if !(next.abs() < RHO_BOUND) || (next - rho).abs() > 1e-4 {
                return rho;
            }
            if next == r {
                break;
            }
            r = next;
        }
        if score(r).abs() <= score(rho).abs() {
            r
        } else {
            rho
        }
    }
}

fn score(u: f64) -> Option<f64> {
    if interior(u) {
        std_normal_quantile(u).ok()
    } else {
        None
    }
}

/// Maximum-likelihood Gaussian-copula correlation of a pair sample.
pub fn gaussian_copula_mle(pairs: &[(f64, f64)]) -> Result<f64> {
    let mut m = ScoreMoments::default();
    for &(u, v) in pairs {
        match (score(u), score(v)) {
            (Some(x), Some(y)) => m.push(x, y),
            _ => return Err(domain(format!("pair ({u}, {v}) is not in the open unit square"))),
        }
    }
    m.maximize()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct LagEstimates {
    pub m: usize,
    /// ρ̂_1..ρ̂_m.
    pub rho_hat: Vec<f64>,
    /// Usable pairs per lag after boundary removal.
    pub pair_counts: Vec<usize>,
}

/// Fits ρ̂_s for s = 1..=m concurrently; results are ordered by lag.
pub fn lag_estimates(series: &[f64], marginal: &Marginal<f64>, m: usize) -> Result<LagEstimates> {
    let n = series.len();
    if m == 0 || m >= n {
        return Err(domain(format!("maximum lag must lie in 1..{n}, got {m}")));
    }
    let scores: Vec<Option<f64>> = series.iter().map(|&x| score(marginal.cdf(x))).collect();
    let fits: Vec<(f64, usize)> = (1..=m)
        .into_par_iter()
        .map(|s| {
            let mut mom = ScoreMoments::default();
            for (a, b) in scores.iter().zip(&scores[s..]) {
                if let (Some(x), Some(y)) = (a, b) {
                    mom.push(*x, *y);
                }
            }
            Ok((mom.maximize()?, mom.n))
        })
        .collect::<Result<_>>()?;
    let (rho_hat, pair_counts) = fits.into_iter().unzip();
    Ok(LagEstimates { m, rho_hat, pair_counts })
}
