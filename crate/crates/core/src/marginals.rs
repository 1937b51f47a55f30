//! Univariate marginal laws and their Hoeffding weight l(u) = F′(F⁻¹(u)).

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::numerics::{std_normal_cdf, std_normal_pdf, std_normal_quantile};
use crate::Scalar;

/// Exponential uses the scale convention F(x) = 1 − e^{−x/λ}.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "family", rename_all = "snake_case")]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub enum Marginal<T> {
    Normal { mu: T, sigma: T },
    ExponentialScale { lambda: T },
    /// Type I extreme value (Gumbel for maxima), location a, scale b.
    Evi { a: T, b: T },
    /// F(x) = ((x − a)/(b − a))² on [a, b].
    Triangular { a: T, b: T },
}

fn open_unit<T: Scalar>(u: T, what: &str) -> Result<()> {
    if u > T::zero() && u < T::one() {
        Ok(())
    } else {
        Err(domain(format!("{what} requires u in (0, 1), got {u}")))
    }
}

impl<T: Scalar> Marginal<T> {
    pub fn standard_normal() -> Self {
        Marginal::Normal {
            mu: T::zero(),
            sigma: T::one(),
        }
    }

    /// Converts an exponential *rate* into the scale parameterization.
    pub fn exponential_from_rate(rate: T) -> Result<Self> {
        let m = Marginal::ExponentialScale { lambda: rate.recip() };
        m.validate()?;
        Ok(m)
    }

    pub fn validate(&self) -> Result<()> {
        let ok = match *self {
            Marginal::Normal { mu, sigma } => mu.is_finite() && sigma > T::zero() && sigma.is_finite(),
            Marginal::ExponentialScale { lambda } => lambda > T::zero() && lambda.is_finite(),
            Marginal::Evi { a, b } => a.is_finite() && b > T::zero() && b.is_finite(),
            Marginal::Triangular { a, b } => a.is_finite() && b.is_finite() && b > a,
        };
        if ok {
            Ok(())
        } else {
            Err(domain(format!("invalid marginal parameters: {self:?}")))
        }
    }

    pub fn cdf(&self, x: T) -> T {
        match *self {
            Marginal::Normal { mu, sigma } => std_normal_cdf((x - mu) / sigma),
            Marginal::ExponentialScale { lambda } => {
                if x <= T::zero() {
                    T::zero()
                } else {
                    -(-x / lambda).exp_m1()
                }
            }
            Marginal::Evi { a, b } => (-(-(x - a) / b).exp()).exp(),
            Marginal::Triangular { a, b } => {
                if x <= a {
                    T::zero()
                } else if x >= b {
                    T::one()
                } else {
                    let z = (x - a) / (b - a);
                    z * z
                }
            }
        }
    }

    pub fn density(&self, x: T) -> T {
        match *self {
            Marginal::Normal { mu, sigma } => std_normal_pdf((x - mu) / sigma) / sigma,
            Marginal::ExponentialScale { lambda } => {
                if x < T::zero() {
                    T::zero()
                } else {
                    (-x / lambda).exp() / lambda
                }
            }
            Marginal::Evi { a, b } => {
                let e = (-(x - a) / b).exp();
                e * (-e).exp() / b
            }
            Marginal::Triangular { a, b } => {
                if x < a || x > b {
                    T::zero()
                } else {
                    T::lit(2.0) * (x - a) / ((b - a) * (b - a))
                }
            }
        }
    }

    pub fn quantile(&self, u: T) -> Result<T> {
        open_unit(u, "quantile")?;
        Ok(match *self {
            Marginal::Normal { mu, sigma } => mu + sigma * std_normal_quantile(u)?,
            Marginal::ExponentialScale { lambda } => -lambda * (-u).ln_1p(),
            Marginal::Evi { a, b } => a - b * (-u.ln()).ln(),
            Marginal::Triangular { a, b } => a + (b - a) * u.sqrt(),
        })
    }

    /// l(u) = F′(F⁻¹(u)), strictly positive on (0, 1).
    pub fn hoeffding_weight(&self, u: T) -> Result<T> {
        open_unit(u, "hoeffding weight")?;
        Ok(match *self {
            Marginal::Normal { sigma, .. } => std_normal_pdf(std_normal_quantile(u)?) / sigma,
            Marginal::ExponentialScale { lambda } => (T::one() - u) / lambda,
            Marginal::Evi { b, .. } => -u * u.ln() / b,
            Marginal::Triangular { a, b } => T::lit(2.0) * u.sqrt() / (b - a),
        })
    }
}
