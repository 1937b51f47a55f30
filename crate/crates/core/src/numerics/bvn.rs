//! Bivariate standard normal distribution function.
//!
//! Drezner–Wesolowsky integration over the correlation with Genz's refinements:
//! Gauss–Legendre rules of 6, 12 or 20 points depending on |ρ|, and an
//! asymptotic expansion for |ρ| >= 0.925.

use crate::Scalar;

use super::normal::std_normal_cdf;

// Half-rules on [-1, 0]: nodes and weights of the 6, 12 and 20 point Gauss–Legendre rules.
const GL6_X: [f64; 3] = [-0.932_469_514_203_152_2, -0.661_209_386_466_264_5, -0.238_619_186_083_197];
const GL6_W: [f64; 3] = [0.171_324_492_379_170_5, 0.360_761_573_048_138_4, 0.467_913_934_572_690_4];
const GL12_X: [f64; 6] = [
    -0.981_560_634_246_719_1,
    -0.904_117_256_370_475,
    -0.769_902_674_194_305,
    -0.587_317_954_286_617_1,
    -0.367_831_498_998_180_2,
    -0.125_233_408_511_469_2,
];
const GL12_W: [f64; 6] = [
    0.047_175_336_386_511_77,
    0.106_939_325_995_318_3,
    0.160_078_328_543_346_4,
    0.203_167_426_723_065_9,
    0.233_492_536_538_354_7,
    0.249_147_045_813_402_9,
];
const GL20_X: [f64; 10] = [
    -0.993_128_599_185_094_9,
    -0.963_971_927_277_913_8,
    -0.912_234_428_251_325_9,
    -0.839_116_971_822_218_8,
    -0.746_331_906_460_150_8,
    -0.636_053_680_726_515,
    -0.510_867_001_950_827_1,
    -0.373_706_088_715_419_6,
    -0.227_785_851_141_645_1,
    -0.076_526_521_133_497_33,
];
const GL20_W: [f64; 10] = [
    0.017_614_007_139_152_12,
    0.040_601_429_800_386_94,
    0.062_672_048_334_109_06,
    0.083_276_741_576_704_75,
    0.101_930_119_817_240_4,
    0.118_194_531_961_518_4,
    0.131_688_638_449_176_6,
    0.142_096_109_318_382_1,
    0.149_172_986_472_603_7,
    0.152_753_387_130_725_9,
];

fn rule(r_abs: f64) -> (&'static [f64], &'static [f64]) {
    if r_abs < 0.3 {
        (&GL6_X, &GL6_W)
    } else if r_abs < 0.75 {
        (&GL12_X, &GL12_W)
    } else {
        (&GL20_X, &GL20_W)
    }
}

/// P(X > dh, Y > dk) for a standard bivariate normal with correlation r.
fn bvn_upper<T: Scalar>(dh: T, dk: T, r: T) -> T {
    let two = T::lit(2.0);
    let two_pi = T::TAU();
    let (xs, ws) = rule(r.abs().as_f64());

    let h = dh;
    let mut k = dk;
    let mut hk = h * k;
    let mut bvn = T::zero();

    if r.abs() < T::lit(0.925) {
        let hs = (h * h + k * k) / two;
        let asr = r.asin();
        for (&x, &w) in xs.iter().zip(ws) {
            let x = T::lit(x);
            let w = T::lit(w);
            for sx in [x, -x] {
                let sn = (asr * (sx + T::one()) / two).sin();
                bvn = bvn + w * ((sn * hk - hs) / (T::one() - sn * sn)).exp();
            }
        }
        return bvn * asr / (two * two_pi) + std_normal_cdf(-h) * std_normal_cdf(-k);
    }

    if r < T::zero() {
        k = -k;
        hk = -hk;
    }
    if r.abs() < T::one() {
        let as_ = (T::one() - r) * (T::one() + r);
        let mut a = as_.sqrt();
        let bs = (h - k) * (h - k);
        let c = (T::lit(4.0) - hk) / T::lit(8.0);
        let d = (T::lit(12.0) - hk) / T::lit(16.0);
        let five = T::lit(5.0);
        let three = T::lit(3.0);
        bvn = a
            * (-(bs / as_ + hk) / two).exp()
            * (T::one() - c * (bs - as_) * (T::one() - d * bs / five) / three
                + c * d * as_ * as_ / five);
        if hk > T::lit(-160.0) {
            let b = bs.sqrt();
            bvn = bvn
                - (-hk / two).exp()
                    * two_pi.sqrt()
                    * std_normal_cdf(-b / a)
                    * b
                    * (T::one() - c * bs * (T::one() - d * bs / five) / three);
        }
        a = a / two;
        for (&x, &w) in xs.iter().zip(ws) {
            let x = T::lit(x);
            let w = T::lit(w);
            for sx in [x, -x] {
                let xs2 = (a * (sx + T::one())) * (a * (sx + T::one()));
                let rs = (T::one() - xs2).sqrt();
                bvn = bvn
                    + a * w
                        * ((-bs / (two * xs2) - hk / (T::one() + rs)).exp() / rs
                            - (-(bs / xs2 + hk) / two).exp() * (T::one() + c * xs2 * (T::one() + d * xs2)));
            }
        }
        bvn = -bvn / two_pi;
    }
    if r > T::zero() {
        bvn = bvn + std_normal_cdf(-h.max(k));
    } else {
        bvn = -bvn;
        if k > h {
            if h < T::zero() {
                bvn = bvn + std_normal_cdf(k) - std_normal_cdf(h);
            } else {
                bvn = bvn + std_normal_cdf(-h) - std_normal_cdf(-k);
            }
        }
    }
    bvn
}

/// Φ_ρ(x, y) = P(X <= x, Y <= y) for standard normals with correlation ρ, |ρ| < 1.
///
/// The limits |ρ| = 1 are the copulas M and W and are handled by callers.
pub fn bvn_cdf<T: Scalar>(x: T, y: T, rho: T) -> T {
    if x == T::neg_infinity() || y == T::neg_infinity() {
        return T::zero();
    }
    if x == T::infinity() {
        return std_normal_cdf(y);
    }
    if y == T::infinity() {
        return std_normal_cdf(x);
    }
    let p = bvn_upper(-x, -y, rho);
    p.max(T::zero()).min(T::one())
}
