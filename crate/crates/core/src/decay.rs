//! Hoeffding covariance, decay constants K1/K2 and lag schedules.

use serde::{Deserialize, Serialize};

use crate::copulas::{CopulaSpec, Family};
use crate::error::{domain, Error, Result};
use crate::marginals::Marginal;
use crate::numerics::{gamma_fn, recip_gamma, richardson_diff, riemann_zeta, QuadratureGrid, Side, Stencil};
use crate::Scalar;

/// cov(X, Y) = ∬ (C(u,v) − uv) / (l₀(u) lₙ(v)) du dv.
pub fn hoeffding_cov<T: Scalar>(
    c: &CopulaSpec<T>,
    f0: &Marginal<T>,
    fn_: &Marginal<T>,
    grid: &QuadratureGrid<T>,
) -> Result<T> {
    c.validate()?;
    f0.validate()?;
    fn_.validate()?;
    let w0 = grid
        .nodes_u
        .iter()
        .map(|&u| f0.hoeffding_weight(u).map(T::recip))
        .collect::<Result<Vec<_>>>()?;
    let wn = grid
        .nodes_v
        .iter()
        .map(|&v| fn_.hoeffding_weight(v).map(T::recip))
        .collect::<Result<Vec<_>>>()?;
    grid.sum_indexed(|i, j| c.excess_interior(grid.nodes_u[i], grid.nodes_v[j]) * w0[i] * wn[j])
}

/// First and second order decay constants at an independence anchor.
///
/// `k1` and `k2` are indexed over the free coordinates listed in `free`; for
/// single-parameter families they are a scalar and a 1×1 matrix.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct DecayConstants<T> {
    pub family: Family,
    pub k1: Vec<T>,
    pub k2: Vec<Vec<T>>,
    pub anchor: Vec<T>,
    pub free: Vec<usize>,
    pub grid_order: usize,
}

impl<T: Scalar> DecayConstants<T> {
    /// K1 of the first free coordinate.
    pub fn k1(&self) -> T {
        self.k1[0]
    }

    pub fn k2(&self) -> T {
        self.k2[0][0]
    }
}

/// Steps for first and second θ-derivatives. Rounding noise grows like ε/h²
/// for the second one, so it uses a coarser step.
fn steps<T: Scalar>() -> (T, T) {
    (
        T::lit(1e-4).max(T::epsilon().cbrt()),
        T::lit(1e-3).max(T::epsilon().powf(T::lit(0.25))),
    )
}

/// K constants at the family's own anchor and lateral directions.
pub fn k_constants<T: Scalar>(
    family: Family,
    f0: &Marginal<T>,
    fn_: &Marginal<T>,
    grid: &QuadratureGrid<T>,
) -> Result<DecayConstants<T>> {
    let anchor = family
        .anchor::<T>()
        .ok_or_else(|| Error::Unsupported(format!("{family:?} has no independence anchor")))?;
    k_constants_at(family, &anchor, &family.lateral(), f0, fn_, grid)
}

/// K constants as lateral derivatives of h(θ) = hoeffding_cov(C_θ) at `anchor`;
/// coordinates whose direction is `None` stay fixed.
pub fn k_constants_at<T: Scalar>(
    family: Family,
    anchor: &[T],
    lateral: &[Option<Side>],
    f0: &Marginal<T>,
    fn_: &Marginal<T>,
    grid: &QuadratureGrid<T>,
) -> Result<DecayConstants<T>> {
    if anchor.len() != family.arity() || lateral.len() != family.arity() {
        return Err(domain(format!("{family:?} expects {} anchor coordinates", family.arity())));
    }
    let free: Vec<usize> = lateral.iter().enumerate().filter_map(|(i, s)| s.map(|_| i)).collect();
    if free.is_empty() {
        return Err(domain("no free coordinate to differentiate"));
    }
    let h_of = |theta: &[T]| -> T {
        if theta == anchor {
            return T::zero();
        }
        CopulaSpec::new(family, theta.to_vec())
            .and_then(|c| hoeffding_cov(&c, f0, fn_, grid))
            .unwrap_or_else(|_| T::nan())
    };
    let (h1, h2) = steps::<T>();
    let along = |i: usize, x: T, base: &[T]| {
        let mut t = base.to_vec();
        t[i] = x;
        t
    };
    let first = |i: usize, base: &[T]| -> Result<T> {
        let side = lateral[i].unwrap_or(Side::TwoSided);
        richardson_diff(|x| h_of(&along(i, x, base)), base[i], Stencil::new(h1, 1, side), family.stencil_bounds(i))
    };

    let mut k1 = Vec::with_capacity(free.len());
    for &i in &free {
        k1.push(first(i, anchor).map_err(|e| with_context(e, family, "K1"))?);
    }
    let mut k2 = vec![vec![T::zero(); free.len()]; free.len()];
    for (a, &i) in free.iter().enumerate() {
        let side = lateral[i].unwrap_or(Side::TwoSided);
        k2[a][a] = richardson_diff(
            |x| h_of(&along(i, x, anchor)),
            anchor[i],
            Stencil::new(h2, 2, side),
            family.stencil_bounds(i),
        )
        .map_err(|e| with_context(e, family, "K2"))?;
        for (b, &j) in free.iter().enumerate().skip(a + 1) {
            let side_j = lateral[j].unwrap_or(Side::TwoSided);
            let mixed = richardson_diff(
                |x| first(i, &along(j, x, anchor)).unwrap_or_else(|_| T::nan()),
                anchor[j],
                Stencil::new(h1, 1, side_j),
                family.stencil_bounds(j),
            )
            .map_err(|e| with_context(e, family, "mixed K2"))?;
            k2[a][b] = mixed;
            k2[b][a] = mixed;
        }
    }
    if k1.iter().all(|k| k.abs() < T::lit(1e-12)) {
        return Err(Error::Degenerate(format!("{family:?}: every K1 vanishes at the anchor")));
    }
    Ok(DecayConstants {
        family,
        k1,
        k2,
        anchor: anchor.to_vec(),
        free,
        grid_order: grid.order,
    })
}

fn with_context(e: Error, family: Family, what: &str) -> Error {
    match e {
        Error::Domain(m) => Error::Domain(format!("{family:?} {what}: {m}")),
        other => other,
    }
}

/// Rule n ↦ θₙ (or ρₙ) for lags n ≥ 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub enum DecaySchedule<T> {
    /// θₙ = n^{−α} / κ₀.
    FgmPower { alpha: T, kappa0: T },
    /// MA(q) with coefficients ϑ₀..ϑ_q, normalized by Σϑₖ².
    MaQ { theta: Vec<T> },
    Ar1 { phi: T },
    /// ρₙ = 2^{−n}(1 + 0.75n).
    Arma21Example,
    ArfimaD { d: T },
    LinearProcess { c: Vec<T> },
    /// Table of θ₁, θ₂, …; zero beyond its end.
    Explicit { table: Vec<T> },
}

const ARFIMA_DIRECT_MAX: usize = 64;

fn autocorr<T: Scalar>(c: &[T], n: usize) -> T {
    let denom = c.iter().fold(T::zero(), |a, &x| a + x * x);
    if n >= c.len() {
        return T::zero();
    }
    let num = c.iter().zip(&c[n..]).fold(T::zero(), |a, (&x, &y)| a + x * y);
    num / denom
}

impl<T: Scalar> DecaySchedule<T> {
    pub fn validate(&self) -> Result<()> {
        let bad = |m: String| Err(Error::Validity(m));
        match self {
            DecaySchedule::FgmPower { alpha, kappa0 } => {
                if !(*alpha > T::one()) {
                    return bad(format!("FGM power schedule needs α > 1, got {alpha}"));
                }
                let zeta = riemann_zeta(*alpha)?;
                if *kappa0 < zeta * (T::one() - T::epsilon() * T::lit(16.0)) {
                    return bad(format!("κ₀ = {kappa0} is below ζ({alpha}) = {zeta}"));
                }
            }
            DecaySchedule::Ar1 { phi } => {
                if !(phi.abs() < T::one()) {
                    return bad(format!("AR(1) needs |φ| < 1, got {phi}"));
                }
            }
            DecaySchedule::ArfimaD { d } => {
                if !(d.abs() < T::lit(0.5)) {
                    return bad(format!("ARFIMA needs d in (−0.5, 0.5), got {d}"));
                }
            }
            DecaySchedule::MaQ { theta: c } | DecaySchedule::LinearProcess { c } => {
                if c.is_empty() || c.iter().any(|x| !x.is_finite()) {
                    return bad("coefficient list must be non-empty and finite".into());
                }
                if c.iter().all(|x| *x == T::zero()) {
                    return bad("coefficients are all zero".into());
                }
            }
            DecaySchedule::Explicit { table } => {
                if let Some(x) = table.iter().find(|x| !(x.abs() < T::one())) {
                    return bad(format!("table entry {x} outside (−1, 1)"));
                }
            }
            DecaySchedule::Arma21Example => {}
        }
        Ok(())
    }

    /// θₙ for lag n ≥ 1.
    pub fn value(&self, n: usize) -> Result<T> {
        if n < 1 {
            return Err(domain("schedule lag must be at least 1"));
        }
        self.validate()?;
        let nf = T::from_usize_lossy(n);
        let v = match self {
            DecaySchedule::FgmPower { alpha, kappa0 } => nf.powf(-*alpha) / *kappa0,
            DecaySchedule::MaQ { theta } => autocorr(theta, n),
            DecaySchedule::LinearProcess { c } => autocorr(c, n),
            DecaySchedule::Ar1 { phi } => phi.powi(n as i32),
            DecaySchedule::Arma21Example => T::lit(2.0).powi(-(n as i32)) * (T::one() + T::lit(0.75) * nf),
            DecaySchedule::ArfimaD { d } => arfima_rho(*d, n),
            DecaySchedule::Explicit { table } => table.get(n - 1).copied().unwrap_or_else(T::zero),
        };
        if !(v.abs() < T::one()) {
            return Err(Error::Validity(format!("schedule emits {v} at lag {n}")));
        }
        Ok(v)
    }

    /// θ₁..θ_{n_max}.
    pub fn values(&self, n_max: usize) -> Result<Vec<T>> {
        self.validate()?;
        match self {
            DecaySchedule::ArfimaD { d } => {
                let mut out = Vec::with_capacity(n_max);
                let mut acc = T::one();
                for k in 1..=n_max {
                    let kf = T::from_usize_lossy(k);
                    acc = acc * (kf - T::one() + *d) / (kf - *d);
                    out.push(acc);
                }
                Ok(out)
            }
            _ => (1..=n_max).map(|n| self.value(n)).collect(),
        }
    }

    /// Largest lag with a nonzero value, if the schedule has finite support.
    pub fn support(&self) -> Option<usize> {
        match self {
            DecaySchedule::MaQ { theta: c } | DecaySchedule::LinearProcess { c } => Some(c.len().saturating_sub(1)),
            DecaySchedule::Explicit { table } => Some(table.len()),
            _ => None,
        }
    }
}

/// ∏_{k=1}^n (k − 1 + d)/(k − d), as a sum of logs past a few dozen terms.
fn arfima_rho<T: Scalar>(d: T, n: usize) -> T {
    if d == T::zero() {
        return T::zero();
    }
    if n <= ARFIMA_DIRECT_MAX {
        return (1..=n).fold(T::one(), |acc, k| {
            let kf = T::from_usize_lossy(k);
            acc * (kf - T::one() + d) / (kf - d)
        });
    }
    // only the k = 1 factor can be negative
    let first = d / (T::one() - d);
    let two_d_m1 = T::lit(2.0) * d - T::one();
    let log_rest = (2..=n).fold(T::zero(), |acc, k| acc + (two_d_m1 / (T::from_usize_lossy(k) - d)).ln_1p());
    first.signum() * (first.abs().ln() + log_rest).exp()
}

/// Γ(1 − d)/Γ(d) · n^{2d − 1}.
pub fn arfima_asymptotic<T: Scalar>(d: T, n: T) -> Result<T> {
    Ok(gamma_fn(T::one() - d)? * recip_gamma(d) * n.powf(T::lit(2.0) * d - T::one()))
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct PredictedCov<T> {
    /// K1·(θₙ − a).
    pub value: T,
    /// ½·|K2|·(θₙ − a)².
    pub remainder_bound: T,
}

/// First-order covariance at lag n for a single-parameter schedule.
pub fn predicted_cov<T: Scalar>(consts: &DecayConstants<T>, s: &DecaySchedule<T>, n: usize) -> Result<PredictedCov<T>> {
    let i = consts.free[0];
    let dt = s.value(n)? - consts.anchor[i];
    Ok(PredictedCov {
        value: consts.k1() * dt,
        remainder_bound: T::lit(0.5) * consts.k2().abs() * dt * dt,
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    type S = DecaySchedule<f64>;

    fn evi() -> Marginal<f64> {
        Marginal::Evi { a: 0.0, b: 1.0 }
    }

    fn grid(order: usize) -> QuadratureGrid<f64> {
        QuadratureGrid::gauss_legendre(order).unwrap()
    }

    #[test]
    fn separable_beta_integral() {
        // l(u) = √u for Triangular(0, 2)
        let t = Marginal::Triangular { a: 0.0, b: 2.0 };
        let c = CopulaSpec::new(Family::Fgm, vec![1.0]).unwrap();
        let got = hoeffding_cov(&c, &t, &t, &grid(128)).unwrap();
        assert!((got - (4.0f64 / 15.0).powi(2)).abs() < 1e-6, "{got}");
    }

    #[test]
    fn fgm_evi_covariance() {
        let ln2sq = std::f64::consts::LN_2.powi(2);
        for theta in [0.1, 0.5, 1.0] {
            let c = CopulaSpec::new(Family::Fgm, vec![theta]).unwrap();
            let got = hoeffding_cov(&c, &evi(), &evi(), &grid(128)).unwrap();
            assert!((got - ln2sq * theta).abs() < 1e-6, "θ = {theta}: {got}");
        }
    }

    #[test]
    fn gaussian_covariance_is_rho() {
        let n = Marginal::standard_normal();
        for rho in [-0.9, 0.5] {
            let c = CopulaSpec::new(Family::Gaussian, vec![rho]).unwrap();
            let got = hoeffding_cov(&c, &n, &n, &grid(128)).unwrap();
            assert!((got - rho).abs() < 1e-4, "ρ = {rho}: {got}");
        }
    }

    #[test]
    fn covariance_scales_with_marginal_scale() {
        let a = Marginal::Normal { mu: 3.0, sigma: 2.0 };
        let b = Marginal::Normal { mu: -1.0, sigma: 0.5 };
        let c = CopulaSpec::new(Family::Gaussian, vec![0.3]).unwrap();
        let got = hoeffding_cov(&c, &a, &b, &grid(128)).unwrap();
        assert!((got - 0.3).abs() < 1e-4);
    }

    struct Oracle {
        family: Family,
        marginal: Marginal<f64>,
        k1: Vec<f64>,
        k2: Option<f64>,
        tol: f64,
    }

    /// Independent closed forms. Gumbel–Barnett and Tawn values follow from
    /// differentiating the copula directly (see the dedicated tests below); for
    /// Mix3, ¼∬√(uv) = 1/9 and ¼∬W/√(uv) = π/8 − 1/3.
    fn oracles() -> Vec<Oracle> {
        let ln2 = std::f64::consts::LN_2;
        let ln3 = 3.0f64.ln();
        let frank_k0 = 2.0 * ln3 * ln3 / 3.0 - 2.0 * ln2 * ln3 + 1.5 * ln2 * ln2;
        let tri = Marginal::Triangular { a: 0.0, b: 1.0 };
        vec![
            Oracle { family: Family::Amh, marginal: Marginal::ExponentialScale { lambda: 1.0 }, k1: vec![0.25], k2: Some(1.0 / 18.0), tol: 1e-4 },
            Oracle { family: Family::GumbelBarnett, marginal: evi(), k1: vec![-1.0], k2: Some(1.0), tol: 1e-3 },
            Oracle { family: Family::Frank, marginal: evi(), k1: vec![ln2 * ln2 / 2.0], k2: Some(frank_k0), tol: 1e-3 },
            Oracle { family: Family::TawnMixed, marginal: evi(), k1: vec![1.0], k2: Some(1.0 / 6.0), tol: 1e-3 },
            Oracle { family: Family::Gaussian, marginal: Marginal::standard_normal(), k1: vec![1.0], k2: Some(0.0), tol: 1e-3 },
            Oracle { family: Family::Fgm, marginal: evi(), k1: vec![ln2 * ln2], k2: Some(0.0), tol: 1e-5 },
            Oracle {
                family: Family::Mix3,
                marginal: tri,
                k1: vec![4.0 / 225.0, 4.0 / 9.0 - std::f64::consts::PI / 8.0],
                k2: None,
                tol: 1e-3,
            },
        ]
    }

    #[test]
    fn k_constant_oracles_at_two_orders() {
        for o in oracles() {
            let mut errs = Vec::new();
            for order in [64, 128] {
                let k = k_constants(o.family, &o.marginal, &o.marginal, &grid(order)).unwrap();
                let mut err = 0.0f64;
                for (got, want) in k.k1.iter().zip(&o.k1) {
                    assert!((got - want).abs() < o.tol, "{:?} K1 order {order}: {got} vs {want}", o.family);
                    err = err.max((got - want).abs());
                }
                if let Some(want) = o.k2 {
                    let got = k.k2();
                    assert!((got - want).abs() < o.tol, "{:?} K2 order {order}: {got} vs {want}", o.family);
                    err = err.max((got - want).abs());
                }
                errs.push(err);
            }
            // the finer grid may not be worse beyond differentiation noise
            assert!(errs[1] <= errs[0] + 1e-7, "{:?}: {errs:?}", o.family);
        }
    }

    #[test]
    fn tawn_constants_match_beta_moment_oracle() {
        // With S, T iid Exp(1) (u = e^{−s}), the integrands reduce to
        // K1 = E[1/(S+T)] and K2 = E[ST/(S+T)²]; S/(S+T) is uniform, so K2 = E[B(1−B)] = 1/6.
        let n = 200_000;
        let k2_mc: f64 = (0..n).map(|i| (i as f64 + 0.5) / n as f64).map(|b| b * (1.0 - b)).sum::<f64>() / n as f64;
        let k = k_constants(Family::TawnMixed, &evi(), &evi(), &grid(128)).unwrap();
        assert!((k.k2() - k2_mc).abs() < 1e-3);
        assert!((k.k1() - 1.0).abs() < 1e-3);
    }

    #[test]
    fn gumbel_barnett_k1_sign_from_direct_difference() {
        // h(θ)/θ at small θ against the first-order constant
        let c = CopulaSpec::new(Family::GumbelBarnett, vec![1e-3]).unwrap();
        let h = hoeffding_cov(&c, &evi(), &evi(), &grid(128)).unwrap();
        assert!((h / 1e-3 + 0.9995).abs() < 1e-4, "{h}");
    }

    #[test]
    fn mix3_w_integral_by_midpoint_rule() {
        // ¼∬_{u+v>1} (u+v−1)/√(uv), which the α-constant subtracts from 1/9
        let n = 2000;
        let mut s = 0.0;
        for i in 0..n {
            for j in 0..n {
                let (u, v) = ((i as f64 + 0.5) / n as f64, (j as f64 + 0.5) / n as f64);
                s += (u + v - 1.0).max(0.0) / (u * v).sqrt();
            }
        }
        let w = s / (4.0 * (n * n) as f64);
        assert!((w - (std::f64::consts::PI / 8.0 - 1.0 / 3.0)).abs() < 1e-5, "{w}");
    }

    #[test]
    fn mix3_masks_delta_and_fills_hessian() {
        let tri = Marginal::Triangular { a: 0.0, b: 1.0 };
        let k = k_constants(Family::Mix3, &tri, &tri, &grid(64)).unwrap();
        assert_eq!(k.free, vec![0, 1]);
        assert_eq!(k.k2.len(), 2);
        assert_eq!(k.k2[0][1], k.k2[1][0]);
        // C is bilinear in (γ, α): pure second derivatives vanish and the mixed
        // one is ∬ uv(1−u)(1−v)/(l l) = K1^(γ)
        assert!(k.k2[0][0].abs() < 1e-5);
        assert!(k.k2[1][1].abs() < 1e-5);
        assert!((k.k2[0][1] - 4.0 / 225.0).abs() < 1e-5);
    }

    #[test]
    fn degenerate_and_unsupported() {
        let n = Marginal::standard_normal();
        assert!(matches!(k_constants(Family::W, &n, &n, &grid(16)), Err(Error::Unsupported(_))));
        // fixing every coordinate leaves nothing to differentiate
        assert!(k_constants_at(Family::Fgm, &[0.0], &[None], &n, &n, &grid(16)).is_err());
        // with α = 0 the γ coordinate has no effect on C
        let tri = Marginal::Triangular { a: 0.0, b: 1.0 };
        let r = k_constants_at(Family::Mix3, &[0.0, 0.0, 1.0], &[Some(Side::TwoSided), None, None], &tri, &tri, &grid(16));
        assert!(matches!(r, Err(Error::Degenerate(_))), "{r:?}");
    }

    #[test]
    fn taylor_remainder_bound() {
        let k = k_constants(Family::Fgm, &evi(), &evi(), &grid(128)).unwrap();
        for theta in [1e-2, 1e-3] {
            let s = S::Explicit { table: vec![theta] };
            let p = predicted_cov(&k, &s, 1).unwrap();
            let c = CopulaSpec::new(Family::Fgm, vec![theta]).unwrap();
            let h = hoeffding_cov(&c, &evi(), &evi(), &grid(128)).unwrap();
            assert!((h - p.value).abs() <= p.remainder_bound + 1e-8);
        }
        let k = k_constants(Family::Amh, &evi(), &evi(), &grid(128)).unwrap();
        for theta in [1e-2, 1e-3] {
            let s = S::Explicit { table: vec![theta] };
            let p = predicted_cov(&k, &s, 1).unwrap();
            let c = CopulaSpec::new(Family::Amh, vec![theta]).unwrap();
            let h = hoeffding_cov(&c, &evi(), &evi(), &grid(128)).unwrap();
            // remainder is ½ K2 θ² + O(θ³)
            assert!((h - p.value).abs() <= 1.01 * p.remainder_bound + 1e-8);
        }
    }

    #[test]
    fn predicted_cov_examples() {
        let k = DecayConstants {
            family: Family::Fgm,
            k1: vec![std::f64::consts::LN_2.powi(2)],
            k2: vec![vec![0.0]],
            anchor: vec![0.0],
            free: vec![0],
            grid_order: 128,
        };
        let zeta2 = std::f64::consts::PI.powi(2) / 6.0;
        let s = S::FgmPower { alpha: 2.0, kappa0: zeta2 };
        let p = predicted_cov(&k, &s, 2).unwrap();
        assert!((p.value - 0.480_453_013_918_201_4 * 0.25 / zeta2).abs() < 1e-12);
        assert!((p.value - 0.0730).abs() < 1e-4);
        let s = S::Explicit { table: vec![] };
        assert_eq!(predicted_cov(&k, &s, 1).unwrap().value, 0.0);
        let g = DecayConstants { family: Family::Gaussian, k1: vec![1.0], k2: vec![vec![0.0]], ..k };
        assert_eq!(predicted_cov(&g, &S::Ar1 { phi: 0.5 }, 1).unwrap().value, 0.5);
    }

    #[test]
    fn schedule_examples() {
        assert!((S::ArfimaD { d: 0.4 }.value(1).unwrap() - 0.4 / 0.6).abs() < 1e-15);
        assert!((S::Ar1 { phi: 0.3 }.value(3).unwrap() - 0.027).abs() < 1e-15);
        assert!((S::Arma21Example.value(2).unwrap() - 0.625).abs() < 1e-15);
        assert!(S::Ar1 { phi: 0.3 }.value(0).is_err());
        let ma = S::MaQ { theta: vec![1.0, 0.5] };
        assert!((ma.value(1).unwrap() - 0.4).abs() < 1e-15);
        assert_eq!(ma.value(2).unwrap(), 0.0);
        let ma2 = S::MaQ { theta: vec![1.0, 0.5, 0.25] };
        assert!((ma2.value(1).unwrap() - (0.5 + 0.125) / 1.3125).abs() < 1e-15);
        let lp = S::LinearProcess { c: vec![1.0, -0.3, 0.2] };
        assert!((lp.value(2).unwrap() - 0.2 / 1.13).abs() < 1e-15);
        let e = S::Explicit { table: vec![0.2, 0.1] };
        assert_eq!(e.value(3).unwrap(), 0.0);
    }

    #[test]
    fn schedule_validation() {
        assert!(S::FgmPower { alpha: 1.0, kappa0: 10.0 }.validate().is_err());
        assert!(S::FgmPower { alpha: 2.0, kappa0: 1.6 }.validate().is_err());
        assert!(S::FgmPower { alpha: 2.0, kappa0: 1.65 }.validate().is_ok());
        assert!(S::Ar1 { phi: 1.0 }.validate().is_err());
        assert!(S::ArfimaD { d: 0.5 }.validate().is_err());
        assert!(S::MaQ { theta: vec![] }.validate().is_err());
        assert!(S::Explicit { table: vec![1.0] }.validate().is_err());
    }

    #[test]
    fn arfima_product_paths_agree() {
        for d in [-0.45, -0.2, 0.1, 0.3, 0.45] {
            let s = S::ArfimaD { d };
            let v = s.values(500).unwrap();
            for n in [1, 10, 64, 65, 100, 500] {
                let direct = (1..=n).fold(1.0, |a, k| a * (k as f64 - 1.0 + d) / (k as f64 - d));
                let got = s.value(n).unwrap();
                assert!(((got - direct) / direct).abs() < 1e-12, "d = {d}, n = {n}");
                assert!(((v[n - 1] - direct) / direct).abs() < 1e-12);
            }
        }
        assert_eq!(S::ArfimaD { d: 0.0 }.value(100).unwrap(), 0.0);
    }

    #[test]
    fn arfima_asymptotics() {
        for d in [0.1, 0.3, 0.45] {
            let rho = S::ArfimaD { d }.value(10_000).unwrap();
            let asym = arfima_asymptotic(d, 10_000.0).unwrap();
            assert!((rho / asym - 1.0).abs() < 0.01, "d = {d}: {}", rho / asym);
        }
    }

    #[test]
    fn fgm_power_sums_to_one() {
        for alpha in [1.5, 2.0, 3.0] {
            let zeta = riemann_zeta(alpha).unwrap();
            let s = S::FgmPower { alpha, kappa0: zeta };
            let n = 10_000usize;
            let head: f64 = s.values(n).unwrap().iter().sum();
            // Σ_{k>N} k^{−α} by Euler–Maclaurin
            let nf = n as f64;
            let tail = (nf.powf(1.0 - alpha) / (alpha - 1.0) - 0.5 * nf.powf(-alpha)
                + alpha / 12.0 * nf.powf(-alpha - 1.0))
                / zeta;
            assert!((head + tail - 1.0).abs() < 1e-8, "α = {alpha}: {}", head + tail);
        }
    }

    #[test]
    fn single_precision_constants() {
        let m = Marginal::<f32>::ExponentialScale { lambda: 1.0 };
        let g = QuadratureGrid::<f32>::gauss_legendre(32).unwrap();
        let k = k_constants(Family::Amh, &m, &m, &g).unwrap();
        assert!((k.k1() - 0.25).abs() < 1e-3, "{}", k.k1());
        assert!((k.k2() - 1.0 / 18.0).abs() < 2e-2, "{}", k.k2());
    }

    #[test]
    fn serde_schedule_tags() {
        let s = S::ArfimaD { d: 0.3 };
        assert_eq!(serde_json::to_string(&s).unwrap(), r#"{"kind":"arfima_d","d":0.3}"#);
        let back: S = serde_json::from_str(r#"{"kind":"ma_q","theta":[1.0,0.5]}"#).unwrap();
        assert_eq!(back, S::MaQ { theta: vec![1.0, 0.5] });
    }
}
