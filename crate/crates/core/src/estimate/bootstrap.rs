//! Stationary bootstrap: concatenated blocks with geometric lengths, wrapping
//! circularly at the end of the series.

use rand::RngCore;
use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::simulate::{open_uniform, replicate_seed, rng_from_seed};

/// Largest tolerated share of replicates whose statistic failed twice.
pub const MAX_MISSING_FRACTION: f64 = 0.05;

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapConfig {
    /// Mean block length 1/p.
    pub mean_block: f64,
    pub replicates: usize,
    pub seed: u64,
}

impl BootstrapConfig {
    pub fn validate(&self) -> Result<()> {
        if !(self.mean_block >= 1.0) || !self.mean_block.is_finite() {
            return Err(domain(format!("mean block length must be ≥ 1, got {}", self.mean_block)));
        }
        if self.replicates < 100 {
            return Err(domain(format!("at least 100 bootstrap replicates required, got {}", self.replicates)));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BootstrapCi {
    pub point: f64,
    pub lo95: f64,
    pub hi95: f64,
    pub sd: f64,
    pub missing: usize,
}

/// Geometric length on {1, 2, …} with success probability 1/mean_block.
pub fn geometric_block_len<R: RngCore + ?Sized>(mean_block: f64, rng: &mut R) -> usize {
    let p = 1.0 / mean_block;
    if p >= 1.0 {
        return 1;
    }
    let u = open_uniform(rng);
    1 + (u.ln() / (-p).ln_1p()).floor() as usize
}

/// One stationary-bootstrap resample of the same length as `series`.
pub fn stationary_resample<R: RngCore + ?Sized>(series: &[f64], mean_block: f64, rng: &mut R) -> Vec<f64> {
    let n = series.len();
    let mut out = Vec::with_capacity(n);
    while out.len() < n {
        let start = (open_uniform(rng) * n as f64) as usize % n;
        let len = geometric_block_len(mean_block, rng).min(n - out.len());
        out.extend((0..len).map(|j| series[(start + j) % n]));
    }
    out
}

/// Type-7 (linear interpolation) sample quantile of sorted data.
pub fn quantile_sorted(sorted: &[f64], q: f64) -> f64 {
    let h = (sorted.len() - 1) as f64 * q;
    let lo = h.floor() as usize;
    let hi = (lo + 1).min(sorted.len() - 1);
    sorted[lo] + (h - lo as f64) * (sorted[hi] - sorted[lo])
}

/// Percentile 95% interval and standard deviation of `statistic` over replicates.
/// Replicate `b` draws from its own derived seed, so results do not depend on
/// the thread count.
pub fn stationary_bootstrap<F>(series: &[f64], statistic: F, cfg: &BootstrapConfig) -> Result<BootstrapCi>
where
    F: Fn(&[f64]) -> Result<f64> + Sync,
{
    cfg.validate()?;
    if series.is_empty() {
        return Err(domain("cannot bootstrap an empty series"));
    }
    let point = statistic(series)?;
    let draws: Vec<Option<f64>> = (0..cfg.replicates)
        .into_par_iter()
        .map(|b| {
            let mut rng = rng_from_seed(replicate_seed(cfg.seed, b as u64));
            (0..2).find_map(|_| {
                let sample = stationary_resample(series, cfg.mean_block, &mut rng);
                statistic(&sample).ok().filter(|v| v.is_finite())
            })
        })
        .collect();
    let mut values: Vec<f64> = draws.into_iter().flatten().collect();
    let missing = cfg.replicates - values.len();
    if missing as f64 > MAX_MISSING_FRACTION * cfg.replicates as f64 || values.len() < 2 {
        return Err(Error::Bootstrap {
            missing,
            total: cfg.replicates,
        });
    }
    values.sort_by(f64::total_cmp);
    let k = values.len() as f64;
    let mean = values.iter().sum::<f64>() / k;
    let sd = (values.iter().map(|v| (v - mean) * (v - mean)).sum::<f64>() / (k - 1.0)).sqrt();
    Ok(BootstrapCi {
        point,
        lo95: quantile_sorted(&values, 0.025),
        hi95: quantile_sorted(&values, 0.975),
        sd,
        missing,
    })
}
