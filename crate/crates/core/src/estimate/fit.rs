//! Parameter recovery from the lag estimates: MA(1) inversion, the long-memory
//! d̂ estimators and the power-law β̂ estimators, each averaged over k = 1..m.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::numerics::{gamma_fn, minimize_scalar, recip_gamma, BracketSearch};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Distance {
    /// Mean absolute deviation.
    #[default]
    L1,
    /// Mean squared deviation.
    L2,
}

impl Distance {
    fn of(self, r: f64) -> f64 {
        match self {
            Distance::L1 => r.abs(),
            Distance::L2 => r * r,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum DMode {
    /// T(d) = Γ(1 − d)/Γ(d).
    Canonical,
    /// T(d) = 1/Γ(d).
    Corrected,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum BetaMode {
    Generic,
    Canonical,
    Corrected,
}

/// Final estimate and the per-k values it averages; `per_k[i]` belongs to k = `first_k + i`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct KTrace {
    pub value: f64,
    pub first_k: usize,
    pub per_k: Vec<f64>,
}

impl KTrace {
    fn from_per_k(first_k: usize, per_k: Vec<f64>) -> Self {
        let value = per_k.iter().sum::<f64>() / per_k.len() as f64;
        Self { value, first_k, per_k }
    }
}

/// ψ(x) = sign(x)·min(0.5, |x|), then ϑ̂ = (1 − √(1 − 4ψ²))/(2ψ).
pub fn ma1_invert(rho1: f64) -> f64 {
    if rho1 == 0.0 {
        return 0.0;
    }
    let psi = rho1.signum() * rho1.abs().min(0.5);
    (1.0 - (1.0 - 4.0 * psi * psi).max(0.0).sqrt()) / (2.0 * psi)
}

/// Lag-one amplitude of the ARFIMA-type decay T(d)·h^{2d−1}.
pub fn d_amplitude(d: f64, mode: DMode) -> f64 {
    match mode {
        DMode::Canonical => gamma_fn(1.0 - d).map_or(f64::NAN, |g| g * recip_gamma(d)),
        DMode::Corrected => recip_gamma(d),
    }
}

/// Half-width margin keeping the d search inside the open interval (−½, ½).
const D_MARGIN: f64 = 1e-9;

fn d_bracket() -> BracketSearch<f64> {
    BracketSearch::new(-0.5 + D_MARGIN, 0.5 - D_MARGIN).with_tol(1e-10)
}

fn check_rho(rho_hat: &[f64], min_len: usize) -> Result<()> {
    if rho_hat.len() < min_len {
        return Err(domain(format!(
            "need at least {min_len} lag estimates, got {}",
            rho_hat.len()
        )));
    }
    if let Some(i) = rho_hat.iter().position(|r| !r.is_finite()) {
        return Err(domain(format!("lag estimate {} is not finite", i + 1)));
    }
    Ok(())
}

/// d̂_k = argmin_d (1/k) Σ_{h ≤ k} 𝒟(ρ̂_h − T(d) h^{2d−1}) for every k ≤ m, averaged.
pub fn estimate_d(rho_hat: &[f64], mode: DMode, distance: Distance) -> Result<KTrace> {
    check_rho(rho_hat, 1)?;
    let ln_h: Vec<f64> = (1..=rho_hat.len()).map(|h| (h as f64).ln()).collect();
    let bracket = d_bracket();
    let mut per_k = Vec::with_capacity(rho_hat.len());
    for k in 1..=rho_hat.len() {
        let objective = |d: f64| {
            let t = d_amplitude(d, mode);
            let e = 2.0 * d - 1.0;
            rho_hat[..k]
                .iter()
                .zip(&ln_h)
                .map(|(r, l)| distance.of(r - t * (e * l).exp()))
                .sum::<f64>()
                / k as f64
        };
        match minimize_scalar(objective, &bracket) {
            Ok(best) => per_k.push(best.argmin),
            Err(_) => return Err(Error::EstimatorConvergence { k, trace: per_k }),
        }
    }
    Ok(KTrace::from_per_k(1, per_k))
}

/// Minimizer of Σ x_i 𝒟(r_i − K) style fits: the best K ∈ [−2, 2] for ρ̂ ≈ K·x.
fn best_amplitude(rho: &[f64], x: &[f64], distance: Distance) -> f64 {
    let k = match distance {
        Distance::L2 => {
            let sxy: f64 = rho.iter().zip(x).map(|(r, x)| r * x).sum();
            let sxx: f64 = x.iter().map(|x| x * x).sum();
            sxy / sxx
        }
        // Σ|ρ_i − K x_i| = Σ x_i |ρ_i/x_i − K|: a weighted median of the ratios.
        Distance::L1 => {
            let mut pts: Vec<(f64, f64)> = rho.iter().zip(x).map(|(r, x)| (r / x, *x)).collect();
            pts.sort_by(|a, b| a.0.total_cmp(&b.0));
            let half = 0.5 * pts.iter().map(|p| p.1).sum::<f64>();
            let mut acc = 0.0;
            let mut med = pts[pts.len() - 1].0;
            for (r, w) in &pts {
                acc += w;
                if acc >= half {
                    med = *r;
                    break;
                }
            }
            med
        }
    };
    k.clamp(-2.0, 2.0)
}

/// Generic power-law fit ρ̂_i ≈ K·i^{−β}, β ∈ (0, 1): outer search on β, exact inner K.
fn beta_generic(rho_hat: &[f64], distance: Distance) -> Result<KTrace> {
    check_rho(rho_hat, 2)?;
    let ln_i: Vec<f64> = (1..=rho_hat.len()).map(|i| (i as f64).ln()).collect();
    let bracket = BracketSearch::new(D_MARGIN, 1.0 - D_MARGIN).with_tol(1e-10).with_scan(256);
    let mut per_k = Vec::with_capacity(rho_hat.len() - 1);
    let mut x = vec![0.0; rho_hat.len()];
    for k in 2..=rho_hat.len() {
        let rho = &rho_hat[..k];
        let objective = |beta: f64| {
            for (xi, l) in x[..k].iter_mut().zip(&ln_i) {
                *xi = (-beta * l).exp();
            }
            let amp = best_amplitude(rho, &x[..k], distance);
            rho.iter().zip(&x[..k]).map(|(r, xi)| distance.of(r - amp * xi)).sum::<f64>() / k as f64
        };
        match minimize_scalar(objective, &bracket) {
            Ok(best) => per_k.push(best.argmin),
            Err(_) => return Err(Error::EstimatorConvergence { k, trace: per_k }),
        }
    }
    Ok(KTrace::from_per_k(2, per_k))
}

/// β̂ per mode: generic joint fit (k ≥ 2, since k = 1 leaves β unidentified),
/// or β = 1 − 2d̂ from the canonical/corrected d̂ traces.
pub fn estimate_beta(rho_hat: &[f64], mode: BetaMode, distance: Distance) -> Result<KTrace> {
    let d_mode = match mode {
        BetaMode::Generic => return beta_generic(rho_hat, distance),
        BetaMode::Canonical => DMode::Canonical,
        BetaMode::Corrected => DMode::Corrected,
    };
    Ok(beta_from_d(&estimate_d(rho_hat, d_mode, distance)?))
}

/// The affine map β = 1 − 2d applied to a d̂ trace.
pub fn beta_from_d(d: &KTrace) -> KTrace {
    KTrace::from_per_k(d.first_k, d.per_k.iter().map(|d| 1.0 - 2.0 * d).collect())
}
