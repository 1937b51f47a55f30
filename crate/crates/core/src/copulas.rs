//! Bivariate parametric copula families.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::numerics::{bvn_cdf, richardson_diff, std_normal_quantile, Side, Stencil};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Family {
    Fgm,
    Amh,
    GumbelBarnett,
    Frank,
    Gaussian,
    TawnMixed,
    Euclidean,
    /// α·FGM(γ) + (1 − α)·Euclidean(δ), θ = (γ, α, δ).
    Mix3,
    Pi,
    W,
    M,
}

impl Family {
    pub const ALL: [Family; 11] = [
        Family::Fgm,
        Family::Amh,
        Family::GumbelBarnett,
        Family::Frank,
        Family::Gaussian,
        Family::TawnMixed,
        Family::Euclidean,
        Family::Mix3,
        Family::Pi,
        Family::W,
        Family::M,
    ];

    pub fn arity(self) -> usize {
        match self {
            Family::Pi | Family::W | Family::M => 0,
            Family::Mix3 => 3,
            _ => 1,
        }
    }

    /// Closed interval a finite-difference stencil on θᵢ may sample.
    pub fn stencil_bounds<T: Scalar>(self, i: usize) -> (T, T) {
        let one = T::one();
        match (self, i) {
            (Family::Fgm | Family::Amh, _) | (Family::Mix3, 0) => (-one, one),
            (Family::GumbelBarnett | Family::TawnMixed, _) | (Family::Mix3, 1) => (T::zero(), one),
            (Family::Gaussian, _) => {
                let edge = one - T::lit(1e-9).max(T::epsilon() * T::lit(4.0));
                (-edge, edge)
            }
            (Family::Euclidean, _) | (Family::Mix3, _) => (one, T::infinity()),
            _ => (T::neg_infinity(), T::infinity()),
        }
    }

    /// Parameter point a with lim_{θ→a} C_θ = Π, if the family has one.
    pub fn anchor<T: Scalar>(self) -> Option<Vec<T>> {
        match self {
            Family::Fgm | Family::Amh | Family::GumbelBarnett | Family::Frank | Family::Gaussian | Family::TawnMixed => {
                Some(vec![T::zero()])
            }
            Family::Mix3 => Some(vec![T::zero(), T::one(), T::one()]),
            Family::Pi => Some(Vec::new()),
            Family::Euclidean | Family::W | Family::M => None,
        }
    }

    /// Direction from which each coordinate approaches the anchor; `None` marks a fixed coordinate.
    pub fn lateral(self) -> Vec<Option<Side>> {
        match self {
            Family::GumbelBarnett | Family::TawnMixed => vec![Some(Side::Right)],
            Family::Mix3 => vec![Some(Side::TwoSided), Some(Side::Left), None],
            f => vec![Some(Side::TwoSided); f.arity()],
        }
    }
}

/// Which θ-derivative of the copula to take.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ThetaDerivative {
    First(usize),
    Second(usize, usize),
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(bound(serialize = "T: Serialize", deserialize = "T: Deserialize<'de>"))]
pub struct CopulaSpec<T> {
    pub family: Family,
    #[serde(default)]
    pub theta: Vec<T>,
}

const DENSITY_STEP: f64 = 1e-5;
const THETA_STEP: f64 = 1e-4;

fn fgm_core<T: Scalar>(u: T, v: T) -> T {
    u * v * (T::one() - u) * (T::one() - v)
}

fn w_cdf<T: Scalar>(u: T, v: T) -> T {
    (u + v - T::one()).max(T::zero())
}

/// 1 − [(1−u)^δ + (1−v)^δ]^{1/δ}, before clamping at zero.
fn euclid_inner<T: Scalar>(delta: T, u: T, v: T) -> T {
    if delta == T::infinity() {
        return u.min(v);
    }
    let a = (T::one() - u).powf(delta);
    let b = (T::one() - v).powf(delta);
    T::one() - (a + b).powf(delta.recip())
}

fn euclid_cdf<T: Scalar>(delta: T, u: T, v: T) -> T {
    euclid_inner(delta, u, v).max(T::zero())
}

/// Frank copula minus uv, for θ ≠ 0.
fn frank_cdf<T: Scalar>(theta: T, u: T, v: T) -> T {
    let num = (-theta * u).exp_m1() * (-theta * v).exp_m1();
    -(num / (-theta).exp_m1()).ln_1p() / theta
}

/// Unvalidated C_θ(u, v) − uv on the open square.
fn raw_excess<T: Scalar>(family: Family, th: &[T], u: T, v: T) -> T {
    let uv = u * v;
    match family {
        Family::Fgm => th[0] * fgm_core(u, v),
        Family::Amh => {
            let t = th[0] * (T::one() - u) * (T::one() - v);
            uv * t / (T::one() - t)
        }
        Family::GumbelBarnett => uv * (-th[0] * u.ln() * v.ln()).exp_m1(),
        Family::Frank => {
            if th[0] == T::zero() {
                T::zero()
            } else {
                frank_cdf(th[0], u, v) - uv
            }
        }
        Family::Gaussian => {
            if th[0] == T::zero() {
                return T::zero();
            }
            match (std_normal_quantile(u), std_normal_quantile(v)) {
                (Ok(x), Ok(y)) => bvn_cdf(x, y, th[0]) - uv,
                _ => T::nan(),
            }
        }
        Family::TawnMixed => {
            let (lu, lv) = (u.ln(), v.ln());
            uv * (-th[0] * lu * lv / (lu + lv)).exp_m1()
        }
        Family::Euclidean => euclid_cdf(th[0], u, v) - uv,
        Family::Mix3 => th[1] * th[0] * fgm_core(u, v) + (T::one() - th[1]) * (euclid_cdf(th[2], u, v) - uv),
        Family::Pi => T::zero(),
        Family::W => w_cdf(u, v) - uv,
        Family::M => u.min(v) - uv,
    }
}

fn raw_cdf<T: Scalar>(family: Family, th: &[T], u: T, v: T) -> T {
    if u <= T::zero() || v <= T::zero() {
        return T::zero();
    }
    if u >= T::one() {
        return v;
    }
    if v >= T::one() {
        return u;
    }
    match family {
        Family::Frank if th[0] != T::zero() => frank_cdf(th[0], u, v),
        Family::Gaussian if th[0] != T::zero() => match (std_normal_quantile(u), std_normal_quantile(v)) {
            (Ok(x), Ok(y)) => bvn_cdf(x, y, th[0]),
            _ => T::nan(),
        },
        Family::Euclidean => euclid_cdf(th[0], u, v),
        Family::W => w_cdf(u, v),
        Family::M => u.min(v),
        _ => u * v + raw_excess(family, th, u, v),
    }
}

/// Whether the Euclidean component's zero region boundary passes between the given points.
fn clause_switches<T: Scalar>(points: &[(T, T, T)]) -> bool {
    let mut pos = false;
    let mut nonpos = false;
    for &(d, u, v) in points {
        if euclid_inner(d, u, v) > T::zero() {
            pos = true;
        } else {
            nonpos = true;
        }
    }
    pos && nonpos
}

impl<T: Scalar> CopulaSpec<T> {
    pub fn new(family: Family, theta: Vec<T>) -> Result<Self> {
        let spec = Self { family, theta };
        spec.validate()?;
        Ok(spec)
    }

    pub fn independence() -> Self {
        Self {
            family: Family::Pi,
            theta: Vec::new(),
        }
    }

    /// Copy with a different parameter vector, validated.
    pub fn with_theta(&self, theta: Vec<T>) -> Result<Self> {
        Self::new(self.family, theta)
    }

    pub fn validate(&self) -> Result<()> {
        let th = &self.theta;
        if th.len() != self.family.arity() {
            return Err(domain(format!(
                "{:?} takes {} parameter(s), got {}",
                self.family,
                self.family.arity(),
                th.len()
            )));
        }
        if th.iter().any(|t| t.is_nan()) {
            return Err(domain("copula parameter is NaN"));
        }
        let one = T::one();
        let ok = match self.family {
            Family::Fgm | Family::Amh => th[0].abs() <= one,
            Family::GumbelBarnett => th[0] > T::zero() && th[0] <= one,
            Family::Frank => th[0].is_finite(),
            Family::Gaussian => th[0].abs() < one,
            Family::TawnMixed => th[0] >= T::zero() && th[0] <= one,
            Family::Euclidean => th[0] >= one,
            Family::Mix3 => th[0].abs() <= one && th[1] >= T::zero() && th[1] <= one && th[2] >= one,
            Family::Pi | Family::W | Family::M => true,
        };
        if ok {
            Ok(())
        } else {
            Err(domain(format!("parameter {th:?} outside the domain of {:?}", self.family)))
        }
    }

    fn check_point(u: T, v: T, open: bool) -> Result<()> {
        let inside = |x: T| if open { x > T::zero() && x < T::one() } else { x >= T::zero() && x <= T::one() };
        if inside(u) && inside(v) {
            Ok(())
        } else {
            Err(domain(format!("point ({u}, {v}) outside the unit square")))
        }
    }

    pub fn cdf(&self, u: T, v: T) -> Result<T> {
        self.validate()?;
        Self::check_point(u, v, false)?;
        Ok(raw_cdf(self.family, &self.theta, u, v))
    }

    /// C(u, v) − uv, computed without the cancellation of the subtraction where possible.
    pub fn excess(&self, u: T, v: T) -> Result<T> {
        self.validate()?;
        Self::check_point(u, v, false)?;
        if u <= T::zero() || v <= T::zero() || u >= T::one() || v >= T::one() {
            return Ok(T::zero());
        }
        Ok(raw_excess(self.family, &self.theta, u, v))
    }

    /// C(u, v) − uv at an interior point, skipping validation.
    pub(crate) fn excess_interior(&self, u: T, v: T) -> T {
        raw_excess(self.family, &self.theta, u, v)
    }

    fn has_euclid_part(&self) -> bool {
        match self.family {
            Family::Euclidean => true,
            Family::Mix3 => self.theta[1] < T::one(),
            _ => false,
        }
    }

    fn euclid_delta(&self) -> T {
        match self.family {
            Family::Mix3 => self.theta[2],
            _ => self.theta[0],
        }
    }

    pub fn density(&self, u: T, v: T) -> Result<T> {
        self.validate()?;
        Self::check_point(u, v, true)?;
        let th = &self.theta;
        let one = T::one();
        match self.family {
            Family::Pi => return Ok(one),
            Family::Fgm => return Ok(one + th[0] * (one - T::lit(2.0) * u) * (one - T::lit(2.0) * v)),
            Family::Gaussian => {
                let (x, y) = (std_normal_quantile(u)?, std_normal_quantile(v)?);
                let r = th[0];
                let s = one - r * r;
                let e = (T::lit(2.0) * r * x * y - r * r * (x * x + y * y)) / (T::lit(2.0) * s);
                return Ok(e.exp() / s.sqrt());
            }
            Family::W | Family::M => {
                return Err(Error::Unsupported(format!("{:?} has no density", self.family)));
            }
            Family::Euclidean if th[0] == one => {
                return Err(Error::Unsupported("Euclidean copula at δ = 1 is W and has no density".into()));
            }
            _ => {}
        }
        let h = T::lit(DENSITY_STEP);
        let (lo, hi) = (u - h, u + h);
        let (lo_v, hi_v) = (v - h, v + h);
        if lo <= T::zero() || lo_v <= T::zero() || hi >= one || hi_v >= one {
            return Err(domain(format!("density stencil at ({u}, {v}) leaves the unit square")));
        }
        if self.has_euclid_part() {
            let d = self.euclid_delta();
            if clause_switches(&[(d, lo, lo_v), (d, lo, hi_v), (d, hi, lo_v), (d, hi, hi_v), (d, u, v)]) {
                return Err(Error::Unsupported(format!(
                    "Euclidean clause switches inside the density stencil at ({u}, {v})"
                )));
            }
        }
        let c = |a, b| raw_cdf(self.family, th, a, b);
        let vol = c(hi, hi_v) - c(hi, lo_v) - c(lo, hi_v) + c(lo, lo_v);
        Ok((vol / (T::lit(4.0) * h * h)).max(T::zero()))
    }

    /// ∂C/∂θᵢ or ∂²C/∂θᵢ∂θⱼ at (u, v).
    pub fn dtheta(&self, u: T, v: T, which: ThetaDerivative) -> Result<T> {
        self.validate()?;
        Self::check_point(u, v, false)?;
        let arity = self.family.arity();
        let (i, j) = match which {
            ThetaDerivative::First(i) => (i, None),
            ThetaDerivative::Second(i, j) => (i.min(j), Some(i.max(j))),
        };
        if i >= arity || j.is_some_and(|j| j >= arity) {
            return Err(domain(format!("{:?} has no parameter index {}", self.family, j.unwrap_or(i))));
        }
        let th = &self.theta;
        match (self.family, i, j) {
            (Family::Fgm, 0, None) => return Ok(fgm_core(u, v)),
            (Family::Fgm, 0, Some(0)) => return Ok(T::zero()),
            (Family::Mix3, 0, None) => return Ok(th[1] * fgm_core(u, v)),
            (Family::Mix3, 1, None) => {
                let fgm = u * v + th[0] * fgm_core(u, v);
                return Ok(fgm - euclid_cdf(th[2], u, v));
            }
            (Family::Mix3, 0, Some(0)) | (Family::Mix3, 1, Some(1)) => return Ok(T::zero()),
            (Family::Mix3, 0, Some(1)) => return Ok(fgm_core(u, v)),
            _ => {}
        }
        let h = T::lit(THETA_STEP);
        let touches_euclid = match self.family {
            Family::Euclidean => true,
            Family::Mix3 => i == 2 || j == Some(2),
            _ => false,
        };
        if touches_euclid {
            let d = self.euclid_delta();
            let pts = [-3.0, -2.0, -1.0, 0.0, 1.0, 2.0, 3.0].map(|k| (d + T::lit(k) * h, u, v));
            let pts: Vec<_> = pts.into_iter().filter(|p| p.0 >= T::one()).collect();
            if clause_switches(&pts) {
                return Err(Error::Unsupported(format!(
                    "Euclidean clause switches inside the θ-stencil at ({u}, {v})"
                )));
            }
        }
        let eval = |t: &[T]| raw_cdf(self.family, t, u, v);
        match j {
            None => self.partial(i, &eval, h, 1),
            Some(j) if j == i => self.partial(i, &eval, h, 2),
            Some(j) => self.mixed(i, j, &eval, h),
        }
    }

    fn side_for(&self, i: usize, h: T, order: u8) -> Side {
        let (lo, hi) = self.family.stencil_bounds::<T>(i);
        let x = self.theta[i];
        let reach = if order == 1 { T::lit(2.0) } else { T::lit(3.0) };
        if x - h >= lo && x + h <= hi {
            Side::TwoSided
        } else if x + reach * h <= hi {
            Side::Right
        } else {
            Side::Left
        }
    }

    fn partial(&self, i: usize, eval: &dyn Fn(&[T]) -> T, h: T, order: u8) -> Result<T> {
        let side = self.side_for(i, h, order);
        let mut theta = self.theta.clone();
        let x = theta[i];
        richardson_diff(
            |t| {
                theta[i] = t;
                eval(&theta)
            },
            x,
            Stencil::new(h, order, side),
            self.family.stencil_bounds(i),
        )
    }

    /// Central cross difference in (θᵢ, θⱼ); both coordinates must be interior.
    fn mixed(&self, i: usize, j: usize, eval: &dyn Fn(&[T]) -> T, h: T) -> Result<T> {
        let (li, hi_i) = self.family.stencil_bounds::<T>(i);
        let (lj, hi_j) = self.family.stencil_bounds::<T>(j);
        let (xi, xj) = (self.theta[i], self.theta[j]);
        if xi - h < li || xi + h > hi_i || xj - h < lj || xj + h > hi_j {
            return Err(Error::Unsupported(format!(
                "mixed θ-derivative ({i}, {j}) needs both coordinates interior"
            )));
        }
        let at = |di: T, dj: T| {
            let mut t = self.theta.clone();
            t[i] = xi + di;
            t[j] = xj + dj;
            eval(&t)
        };
        let cross = |h: T| (at(h, h) - at(h, -h) - at(-h, h) + at(-h, -h)) / (T::lit(4.0) * h * h);
        let est = (T::lit(4.0) * cross(h * T::lit(0.5)) - cross(h)) / T::lit(3.0);
        if est.is_finite() {
            Ok(est)
        } else {
            Err(domain("mixed θ-derivative is not finite"))
        }
    }
}
