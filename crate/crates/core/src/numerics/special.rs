use crate::error::{domain, Result};
use crate::Scalar;

const LANCZOS_G: f64 = 7.0;
const LANCZOS: [f64; 9] = [
    0.999_999_999_999_809_9,
    676.520_368_121_885_1,
    -1_259.139_216_722_402_8,
    771.323_428_777_653_1,
    -176.615_029_162_140_6,
    12.507_343_278_686_905,
    -0.138_571_095_265_720_12,
    9.984_369_578_019_572e-6,
    1.505_632_735_149_311_6e-7,
];

/// Lanczos series for x >= 0.5, returns (t, A(x - 1)) with t = x - 1 + g + 1/2.
fn lanczos_parts<T: Scalar>(x: T) -> (T, T) {
    let z = x - T::one();
    let mut acc = T::lit(LANCZOS[0]);
    for (i, &c) in LANCZOS.iter().enumerate().skip(1) {
        acc = acc + T::lit(c) / (z + T::from_usize_lossy(i));
    }
    (z + T::lit(LANCZOS_G + 0.5), acc)
}

/// Natural log of |Γ(x)| for x > 0.
pub fn ln_gamma<T: Scalar>(x: T) -> Result<T> {
    if !(x > T::zero()) || !x.is_finite() {
        return Err(domain(format!("ln_gamma requires a finite x > 0, got {x}")));
    }
    let half = T::lit(0.5);
    if x < half {
        // ln Γ(x) = ln π − ln sin(πx) − ln Γ(1 − x)
        let pi = T::PI();
        return Ok(pi.ln() - (pi * x).sin().ln() - ln_gamma(T::one() - x)?);
    }
    let (t, a) = lanczos_parts(x);
    let half_ln_2pi = T::lit(0.918_938_533_204_672_8);
    Ok(half_ln_2pi + (x - half) * t.ln() - t + a.ln())
}

/// Gamma function on the positive half line.
pub fn gamma_fn<T: Scalar>(x: T) -> Result<T> {
    if !(x > T::zero()) || !x.is_finite() {
        return Err(domain(format!("gamma requires a finite x > 0, got {x}")));
    }
    Ok(gamma_unchecked(x))
}

fn gamma_unchecked<T: Scalar>(x: T) -> T {
    let half = T::lit(0.5);
    if x < half {
        let pi = T::PI();
        return pi / ((pi * x).sin() * gamma_unchecked(T::one() - x));
    }
    if x > T::lit(140.0) {
        return ln_gamma(x).map(T::exp).unwrap_or_else(|_| T::infinity());
    }
    let (t, a) = lanczos_parts(x);
    let sqrt_2pi = T::lit(2.506_628_274_631_000_7);
    sqrt_2pi * t.powf(x - half) * (-t).exp() * a
}

/// 1/Γ(x) on the whole real line; zero at the poles 0, −1, −2, …
pub fn recip_gamma<T: Scalar>(x: T) -> T {
    if x <= T::zero() && x == x.floor() {
        return T::zero();
    }
    if x < T::lit(0.5) {
        let pi = T::PI();
        // 1/Γ(x) = sin(πx) Γ(1 − x) / π
        return (pi * x).sin() * gamma_unchecked(T::one() - x) / pi;
    }
    T::one() / gamma_unchecked(x)
}

const BERNOULLI_EVEN: [f64; 7] = [
    1.0 / 6.0,
    -1.0 / 30.0,
    1.0 / 42.0,
    -1.0 / 30.0,
    5.0 / 66.0,
    -691.0 / 2730.0,
    7.0 / 6.0,
];

/// Riemann zeta for real alpha > 1: direct sum to N − 1 plus an Euler–Maclaurin tail.
pub fn riemann_zeta<T: Scalar>(alpha: T) -> Result<T> {
    if !(alpha > T::one()) || !alpha.is_finite() {
        return Err(domain(format!("zeta requires a finite alpha > 1, got {alpha}")));
    }
    let big_n = 16usize;
    let n = T::from_usize_lossy(big_n);
    let mut sum = T::zero();
    for k in (1..big_n).rev() {
        sum = sum + T::from_usize_lossy(k).powf(-alpha);
    }
    sum = sum + n.powf(T::one() - alpha) / (alpha - T::one()) + n.powf(-alpha) * T::lit(0.5);

    // B_{2j}/(2j)! · s(s+1)…(s+2j−2) · N^{−s−2j+1}
    let mut rising = alpha;
    let mut fact = T::lit(2.0);
    let mut npow = n.powf(-alpha - T::one());
    for (j, &b) in BERNOULLI_EVEN.iter().enumerate() {
        sum = sum + T::lit(b) / fact * rising * npow;
        let m = T::from_usize_lossy(2 * j + 2);
        rising = rising * (alpha + m - T::one()) * (alpha + m);
        fact = fact * (m + T::one()) * (m + T::lit(2.0));
        npow = npow / (n * n);
    }
    Ok(sum)
}
