//! Standard normal density, distribution and quantile functions.

use serde::{Deserialize, Serialize};

use crate::error::{domain, Result};
use crate::Scalar;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum NormalFn {
    Pdf,
    Cdf,
    Quantile,
}

/// Dispatch over φ, Φ and Φ⁻¹.
pub fn std_normal<T: Scalar>(kind: NormalFn, x: T) -> Result<T> {
    match kind {
        NormalFn::Pdf => Ok(std_normal_pdf(x)),
        NormalFn::Cdf => Ok(std_normal_cdf(x)),
        NormalFn::Quantile => std_normal_quantile(x),
    }
}

pub fn std_normal_pdf<T: Scalar>(x: T) -> T {
    let inv_sqrt_2pi = T::lit(0.398_942_280_401_432_7);
    inv_sqrt_2pi * (-(x * x) * T::lit(0.5)).exp()
}

/// erf(x) for 0 <= x via the positive series 2/√π e^{−x²} Σ 2ⁿx^{2n+1}/(2n+1)!!.
fn erf_series<T: Scalar>(x: T) -> T {
    let two_x2 = T::lit(2.0) * x * x;
    let mut term = x;
    let mut sum = x;
    let eps = T::epsilon() * T::lit(0.5);
    let mut k = 0usize;
    while term > eps * sum && k < 500 {
        k += 1;
        term = term * two_x2 / T::from_usize_lossy(2 * k + 1);
        sum = sum + term;
    }
    T::lit(std::f64::consts::FRAC_2_SQRT_PI) * (-(x * x)).exp() * sum
}

/// erfc(x)·e^{x²} for x >= 2.5 via the Laplace continued fraction (modified Lentz).
fn erfc_scaled_cf<T: Scalar>(x: T) -> T {
    let tiny = T::min_positive_value().sqrt();
    let mut f = x;
    let mut c = x;
    let mut d = T::zero();
    let eps = T::epsilon();
    for k in 1..2000usize {
        let a = T::from_usize_lossy(k) * T::lit(0.5);
        d = x + a * d;
        if d.abs() < tiny {
            d = tiny;
        }
        c = x + a / c;
        if c.abs() < tiny {
            c = tiny;
        }
        d = d.recip();
        let delta = c * d;
        f = f * delta;
        if (delta - T::one()).abs() < eps {
            break;
        }
    }
    T::lit(0.564_189_583_547_756_3) / f
}

/// e^{−x²/2} with x split into a short high part so the square is exact.
fn half_gauss_exp<T: Scalar>(x: T) -> T {
    let sixteen = T::lit(16.0);
    let hi = (x * sixteen).trunc() / sixteen;
    let half = T::lit(0.5);
    (-(hi * hi) * half).exp() * (-(x - hi) * (x + hi) * half).exp()
}

/// Complementary error function.
pub fn erfc<T: Scalar>(x: T) -> T {
    if x.is_nan() {
        return x;
    }
    if x < T::zero() {
        return T::lit(2.0) - erfc(-x);
    }
    if x < T::lit(2.5) {
        T::one() - erf_series(x)
    } else if x > T::lit(27.3) {
        T::zero()
    } else {
        erfc_scaled_cf(x) * (-(x * x)).exp()
    }
}

pub fn std_normal_cdf<T: Scalar>(x: T) -> T {
    if x.is_nan() {
        return x;
    }
    let t = x.abs() * T::FRAC_1_SQRT_2();
    let tail = if t < T::lit(2.5) {
        T::lit(0.5) * (T::one() - erf_series(t))
    } else if t > T::lit(27.3) {
        T::zero()
    } else {
        T::lit(0.5) * erfc_scaled_cf(t) * half_gauss_exp(x)
    };
    if x < T::zero() {
        tail
    } else {
        T::one() - tail
    }
}

const ACKLAM_A: [f64; 6] = [
    -3.969_683_028_665_376e1,
    2.209_460_984_245_205e2,
    -2.759_285_104_469_687e2,
    1.383_577_518_672_69e2,
    -3.066_479_806_614_716e1,
    2.506_628_277_459_239,
];
const ACKLAM_B: [f64; 5] = [
    -5.447_609_879_822_406e1,
    1.615_858_368_580_409e2,
    -1.556_989_798_598_866e2,
    6.680_131_188_771_972e1,
    -1.328_068_155_288_572e1,
];
const ACKLAM_C: [f64; 6] = [
    -7.784_894_002_430_293e-3,
    -3.223_964_580_411_365e-1,
    -2.400_758_277_161_838,
    -2.549_732_539_343_734,
    4.374_664_141_464_968,
    2.938_163_982_698_783,
];
const ACKLAM_D: [f64; 4] = [
    7.784_695_709_041_462e-3,
    3.224_671_290_700_398e-1,
    2.445_134_137_142_996,
    3.754_408_661_907_416,
];

fn horner<T: Scalar>(coeffs: &[f64], x: T) -> T {
    coeffs.iter().fold(T::zero(), |acc, &c| acc * x + T::lit(c))
}

fn acklam<T: Scalar>(p: T) -> T {
    let p_low = T::lit(0.024_25);
    let half = T::lit(0.5);
    if p < p_low || p > T::one() - p_low {
        let tail = if p < half { p } else { T::one() - p };
        let q = (T::lit(-2.0) * tail.ln()).sqrt();
        let x = horner(&ACKLAM_C, q) / (horner(&ACKLAM_D, q) * q + T::one());
        if p < half {
            x
        } else {
            -x
        }
    } else {
        let q = p - half;
        let r = q * q;
        horner(&ACKLAM_A, r) * q / (horner(&ACKLAM_B, r) * r + T::one())
    }
}

/// Φ⁻¹(p): rational approximation followed by one Halley refinement step.
pub fn std_normal_quantile<T: Scalar>(p: T) -> Result<T> {
    if !(p > T::zero() && p < T::one()) {
        return Err(domain(format!("normal quantile requires p in (0, 1), got {p}")));
    }
    let x = acklam(p);
    // Refine against the tail that carries relative precision.
    let e = if p < T::lit(0.5) {
        std_normal_cdf(x) - p
    } else {
        (T::one() - p) - std_normal_cdf(-x)
    };
    let u = e / std_normal_pdf(x);
    Ok(x - u / (T::one() + x * u * T::lit(0.5)))
}
