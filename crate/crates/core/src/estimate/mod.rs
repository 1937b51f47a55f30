//! Copula-based estimation pipeline: fit the marginal, build lagged
//! pseudo-observations, fit a Gaussian copula per lag, then recover the process
//! parameter from the decay of the fitted correlations.

mod bootstrap;
mod fit;
mod lags;

use std::io::Write;

use serde::{Deserialize, Serialize};

pub use bootstrap::{
    geometric_block_len, quantile_sorted, stationary_bootstrap, stationary_resample, BootstrapCi,
    BootstrapConfig, MAX_MISSING_FRACTION,
};
pub use fit::{beta_from_d, d_amplitude, estimate_beta, estimate_d, ma1_invert, BetaMode, DMode, Distance, KTrace};
pub use lags::{
    fit_marginal, gaussian_copula_mle, lag_estimates, lag_pairs, pseudo_observations, pseudo_pairs, LagEstimates,
    MarginalFamily, MIN_PAIRS, MIN_SERIES_LEN, RHO_BOUND,
};

use crate::error::{domain, Result};
use crate::marginals::Marginal;
use crate::output::{fmt_g17, to_json_g17};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Estimator {
    /// φ̂ = ρ̂₁.
    Ar1,
    /// ϑ̂ = ma1_invert(ρ̂₁).
    Ma1,
    DCanonical,
    DCorrected,
    BetaGeneric,
    BetaCanonical,
    BetaCorrected,
}

impl Estimator {
    pub const ALL: [Estimator; 7] = [
        Estimator::Ar1,
        Estimator::Ma1,
        Estimator::DCanonical,
        Estimator::DCorrected,
        Estimator::BetaGeneric,
        Estimator::BetaCanonical,
        Estimator::BetaCorrected,
    ];

    pub fn name(self) -> &'static str {
        match self {
            Estimator::Ar1 => "ar1",
            Estimator::Ma1 => "ma1",
            Estimator::DCanonical => "d_canonical",
            Estimator::DCorrected => "d_corrected",
            Estimator::BetaGeneric => "beta_generic",
            Estimator::BetaCanonical => "beta_canonical",
            Estimator::BetaCorrected => "beta_corrected",
        }
    }

    /// Evaluates the estimator on lag estimates.
    pub fn apply(self, lags: &LagEstimates, distance: Distance) -> Result<KTrace> {
        let rho = &lags.rho_hat;
        let first = || {
            rho.first()
                .copied()
                .ok_or_else(|| domain("no lag estimates"))
        };
        Ok(match self {
            Estimator::Ar1 => single(first()?),
            Estimator::Ma1 => single(ma1_invert(first()?)),
            Estimator::DCanonical => estimate_d(rho, DMode::Canonical, distance)?,
            Estimator::DCorrected => estimate_d(rho, DMode::Corrected, distance)?,
            Estimator::BetaGeneric => estimate_beta(rho, BetaMode::Generic, distance)?,
            Estimator::BetaCanonical => estimate_beta(rho, BetaMode::Canonical, distance)?,
            Estimator::BetaCorrected => estimate_beta(rho, BetaMode::Corrected, distance)?,
        })
    }
}

fn single(v: f64) -> KTrace {
    KTrace {
        value: v,
        first_k: 1,
        per_k: vec![v],
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PipelineConfig {
    /// Family fitted in step one; ignored when `fixed_marginal` is set.
    pub marginal: MarginalFamily,
    /// A user-supplied marginal used instead of a fit.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub fixed_marginal: Option<Marginal<f64>>,
    pub m: usize,
    #[serde(default)]
    pub distance: Distance,
    pub estimators: Vec<Estimator>,
    /// Bootstrap interval for `bootstrap_target`, when set.
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub bootstrap: Option<BootstrapConfig>,
    #[serde(default = "default_target")]
    pub bootstrap_target: Estimator,
}

fn default_target() -> Estimator {
    Estimator::DCorrected
}

fn marginal_for(series: &[f64], cfg: &PipelineConfig) -> Result<Marginal<f64>> {
    match cfg.fixed_marginal {
        Some(m) => {
            m.validate()?;
            Ok(m)
        }
        None => fit_marginal(series, cfg.marginal),
    }
}

impl PipelineConfig {
    pub fn new(marginal: MarginalFamily, m: usize, estimators: Vec<Estimator>) -> Self {
        Self {
            marginal,
            fixed_marginal: None,
            m,
            distance: Distance::L1,
            estimators,
            bootstrap: None,
            bootstrap_target: default_target(),
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimatorResult {
    pub estimator: Estimator,
    #[serde(flatten)]
    pub trace: KTrace,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub ci: Option<BootstrapCi>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct EstimateReport {
    pub marginal_fit: Marginal<f64>,
    pub lag_estimates: LagEstimates,
    pub distance: Distance,
    pub estimates: Vec<EstimatorResult>,
}

impl EstimateReport {
    pub fn get(&self, e: Estimator) -> Option<&EstimatorResult> {
        self.estimates.iter().find(|r| r.estimator == e)
    }

    pub fn to_json(&self) -> Result<String> {
        to_json_g17(self)
    }

    /// `lag,rho_hat,pairs`.
    pub fn write_lags_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["lag", "rho_hat", "pairs"])?;
        let l = &self.lag_estimates;
        for (i, (r, c)) in l.rho_hat.iter().zip(&l.pair_counts).enumerate() {
            out.write_record([(i + 1).to_string(), fmt_g17(*r), c.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }

    /// `estimator,k,value`: the per-k values each final estimate averages.
    pub fn write_trace_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["estimator", "k", "value"])?;
        for r in &self.estimates {
            for (i, v) in r.trace.per_k.iter().enumerate() {
                out.write_record([r.estimator.name().to_string(), (r.trace.first_k + i).to_string(), fmt_g17(*v)])?;
            }
        }
        out.flush()?;
        Ok(())
    }
}

/// Value of one estimator on a raw series (marginal refit included).
pub fn estimate_series(series: &[f64], cfg: &PipelineConfig, which: Estimator) -> Result<f64> {
    let marginal = marginal_for(series, cfg)?;
    let lags = lag_estimates(series, &marginal, cfg.m)?;
    Ok(which.apply(&lags, cfg.distance)?.value)
}

/// Runs the full pipeline. Deterministic: identical inputs give identical reports.
pub fn run_pipeline(series: &[f64], cfg: &PipelineConfig) -> Result<EstimateReport> {
    let marginal_fit = marginal_for(series, cfg)?;
    let lag_estimates = lag_estimates(series, &marginal_fit, cfg.m)?;
    let mut estimates = Vec::with_capacity(cfg.estimators.len());
    for &e in &cfg.estimators {
        let trace = e.apply(&lag_estimates, cfg.distance)?;
        let ci = match cfg.bootstrap {
            Some(b) if e == cfg.bootstrap_target => {
                Some(stationary_bootstrap(series, |x| estimate_series(x, cfg, e), &b)?)
            }
            _ => None,
        };
        estimates.push(EstimatorResult { estimator: e, trace, ci });
    }
    Ok(EstimateReport {
        marginal_fit,
        lag_estimates,
        distance: cfg.distance,
        estimates,
    })
}
