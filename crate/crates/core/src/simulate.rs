//! Series with prescribed lag copulas: Gaussian paths through a Toeplitz
//! Cholesky factor, and the n-dimensional FGM construction sampled exactly.

use std::io::Write;

use rand::{RngCore, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::decay::DecaySchedule;
use crate::error::{domain, Error, Result};
use crate::marginals::Marginal;
use crate::numerics::{std_normal_cdf, std_normal_quantile};

/// Path generator input. `marginals`, when present, overrides `marginal` per index.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathConfig {
    pub n: usize,
    pub schedule: DecaySchedule<f64>,
    pub marginal: Marginal<f64>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub marginals: Option<Vec<Marginal<f64>>>,
    pub seed: u64,
}

impl PathConfig {
    pub fn new(n: usize, schedule: DecaySchedule<f64>, marginal: Marginal<f64>, seed: u64) -> Self {
        Self {
            n,
            schedule,
            marginal,
            marginals: None,
            seed,
        }
    }

    pub fn marginal_at(&self, k: usize) -> &Marginal<f64> {
        self.marginals.as_ref().and_then(|m| m.get(k)).unwrap_or(&self.marginal)
    }

    fn validate(&self) -> Result<()> {
        if self.n < 2 {
            return Err(domain(format!("path length must be at least 2, got {}", self.n)));
        }
        if let Some(m) = &self.marginals {
            if m.len() != self.n {
                return Err(domain(format!("{} per-index marginals for a path of length {}", m.len(), self.n)));
            }
            m.iter().try_for_each(Marginal::validate)?;
        }
        self.marginal.validate()?;
        self.schedule.validate()
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Generator {
    Gaussian,
    Fgm,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PathDiagnostics {
    pub generator: Generator,
    /// Gaussian route: the Toeplitz factorization succeeded (always true on a returned path).
    #[serde(skip_serializing_if = "Option::is_none")]
    pub cholesky_ok: Option<bool>,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bandwidth: Option<usize>,
    /// FGM route: smallest conditional density 1 − |cₖ| met along the path.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub min_conditional_density: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SeriesPath {
    pub values: Vec<f64>,
    pub config: PathConfig,
    pub diagnostics: PathDiagnostics,
}

impl SeriesPath {
    /// Two-column CSV (index, value) preceded by a `# {json}` line with the config echo.
    pub fn write_csv<W: Write>(&self, mut w: W) -> Result<()> {
        let header = serde_json::json!({ "config": self.config, "diagnostics": self.diagnostics });
        writeln!(w, "# {header}")?;
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["index", "value"])?;
        for (i, v) in self.values.iter().enumerate() {
            out.write_record([i.to_string(), v.to_string()])?;
        }
        out.flush()?;
        Ok(())
    }
}

/// Derives the seed of replicate `index` from a base seed (SplitMix64 finalizer).
pub fn replicate_seed(base: u64, index: u64) -> u64 {
    let mut z = base ^ index.wrapping_add(1).wrapping_mul(0x9E37_79B9_7F4A_7C15);
    z = (z ^ (z >> 30)).wrapping_mul(0xBF58_476D_1CE4_E5B9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94D0_49BB_1331_11EB);
    z ^ (z >> 31)
}

pub fn rng_from_seed(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Uniform on the open interval (0, 1) from the top 52 bits.
pub fn open_uniform<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    ((rng.next_u64() >> 12) as f64 + 0.5) * (1.0 / (1u64 << 52) as f64)
}

/// Standard normal by inversion.
pub fn std_normal_draw<R: RngCore + ?Sized>(rng: &mut R) -> f64 {
    std_normal_quantile(open_uniform(rng)).expect("open uniform lies in (0, 1)")
}

/// Dot product with independent lane accumulators so it vectorizes.
fn dot(a: &[f64], b: &[f64]) -> f64 {
    const LANES: usize = 8;
    let mut acc = [0.0f64; LANES];
    let (ca, cb) = (a.chunks_exact(LANES), b.chunks_exact(LANES));
    let tail: f64 = ca.remainder().iter().zip(cb.remainder()).map(|(x, y)| x * y).sum();
    for (x, y) in ca.zip(cb) {
        for k in 0..LANES {
            acc[k] += x[k] * y[k];
        }
    }
    acc.iter().sum::<f64>() + tail
}

/// Lower Cholesky factor of a banded symmetric matrix, rows stored from
/// column max(0, i − p) to i.
#[derive(Debug, Clone)]
struct BandedCholesky {
    n: usize,
    p: usize,
    offsets: Vec<usize>,
    data: Vec<f64>,
}

impl BandedCholesky {
    fn first_col(&self, i: usize) -> usize {
        i.saturating_sub(self.p)
    }

    fn row(&self, i: usize) -> &[f64] {
        &self.data[self.offsets[i]..self.offsets[i + 1]]
    }

    /// Factorizes the Toeplitz matrix Ωᵢⱼ = ρ_{|i−j|} (ρ₀ = 1), zero beyond lag p.
    fn toeplitz(rho: &[f64], n: usize, p: usize) -> Result<Self> {
        let mut offsets = Vec::with_capacity(n + 1);
        offsets.push(0);
        for i in 0..n {
            offsets.push(offsets[i] + i - i.saturating_sub(p) + 1);
        }
        let mut l = Self {
            n,
            p,
            data: vec![0.0; offsets[n]],
            offsets,
        };
        for i in 0..n {
            let ji = l.first_col(i);
            for j in ji..=i {
                let jj = l.first_col(j);
                let k0 = ji.max(jj);
                let (ri, rj) = (l.offsets[i], l.offsets[j]);
                let dot = dot(&l.data[ri + k0 - ji..ri + j - ji], &l.data[rj + k0 - jj..rj + j - jj]);
                let omega = if i == j { 1.0 } else { rho[i - j - 1] };
                let s = omega - dot;
                let value = if i == j {
                    if !(s > 0.0) {
                        return Err(Error::Definiteness { minor: i + 1 });
                    }
                    s.sqrt()
                } else {
                    s / l.data[rj + j - jj]
                };
                l.data[ri + j - ji] = value;
            }
        }
        Ok(l)
    }

    fn mul_vec(&self, eps: &[f64]) -> Vec<f64> {
        (0..self.n)
            .map(|i| {
                let j0 = self.first_col(i);
                dot(self.row(i), &eps[j0..=i])
            })
            .collect()
    }
}

/// Cached Toeplitz factor for one (n, schedule); shareable across threads.
#[derive(Debug, Clone)]
pub struct GaussianSampler {
    n: usize,
    schedule: DecaySchedule<f64>,
    factor: BandedCholesky,
}

impl GaussianSampler {
    pub fn new(n: usize, schedule: &DecaySchedule<f64>) -> Result<Self> {
        if n < 2 {
            return Err(domain(format!("path length must be at least 2, got {n}")));
        }
        let p = schedule.support().unwrap_or(n - 1).min(n - 1);
        let mut rho = schedule.values(p)?;
        // trailing exact zeros shrink the band
        while rho.last() == Some(&0.0) {
            rho.pop();
        }
        let p = rho.len();
        Ok(Self {
            n,
            schedule: schedule.clone(),
            factor: BandedCholesky::toeplitz(&rho, n, p)?,
        })
    }

    pub fn len(&self) -> usize {
        self.n
    }

    pub fn is_empty(&self) -> bool {
        self.n == 0
    }

    pub fn bandwidth(&self) -> usize {
        self.factor.p
    }

    pub fn schedule(&self) -> &DecaySchedule<f64> {
        &self.schedule
    }

    /// z = Lε with ε iid N(0, 1) drawn by inversion.
    pub fn standard<R: RngCore + ?Sized>(&self, rng: &mut R) -> Vec<f64> {
        let eps: Vec<f64> = (0..self.n).map(|_| std_normal_draw(rng)).collect();
        self.factor.mul_vec(&eps)
    }

    /// Path with the config's marginal(s); `cfg.n` and `cfg.schedule` must match the sampler.
    pub fn path(&self, cfg: &PathConfig) -> Result<SeriesPath> {
        cfg.validate()?;
        if cfg.n != self.n || cfg.schedule != self.schedule {
            return Err(domain("path config does not match the cached sampler"));
        }
        let mut rng = rng_from_seed(cfg.seed);
        let z = self.standard(&mut rng);
        let values = z
            .iter()
            .enumerate()
            .map(|(k, &z)| match *cfg.marginal_at(k) {
                Marginal::Normal { mu, sigma } => Ok(mu + sigma * z),
                ref m => m.quantile(std_normal_cdf(z).clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0)),
            })
            .collect::<Result<Vec<_>>>()?;
        finite_or_err(&values)?;
        Ok(SeriesPath {
            values,
            config: cfg.clone(),
            diagnostics: PathDiagnostics {
                generator: Generator::Gaussian,
                cholesky_ok: Some(true),
                bandwidth: Some(self.bandwidth()),
                min_conditional_density: None,
            },
        })
    }
}

fn finite_or_err(values: &[f64]) -> Result<()> {
    match values.iter().position(|v| !v.is_finite()) {
        Some(k) => Err(domain(format!("non-finite value at index {k}"))),
        None => Ok(()),
    }
}

/// Gaussian-copula path: pairwise copula of (x_r, x_s) is Gaussian with ρ_{|r−s|}.
pub fn gaussian_path(cfg: &PathConfig) -> Result<SeriesPath> {
    cfg.validate()?;
    GaussianSampler::new(cfg.n, &cfg.schedule)?.path(cfg)
}

/// Σ_{h=1}^{n−1} (n − h)·h^{−α}: with κ₀ at least this, Σ_{i<j}|θ_{|i−j|}| ≤ 1.
pub fn fgm_min_kappa(n: usize, alpha: f64) -> f64 {
    (1..n).map(|h| (n - h) as f64 * (h as f64).powf(-alpha)).sum()
}

/// n-dimensional FGM-type path with density 1 + Σ_{i<j} θ_{|i−j|}(1 − 2uᵢ)(1 − 2uⱼ),
/// sampled by inverting each (affine-density) conditional.
pub fn fgm_path(cfg: &PathConfig) -> Result<SeriesPath> {
    cfg.validate()?;
    let n = cfg.n;
    let theta = cfg.schedule.values(n - 1)?;
    let mass: f64 = theta.iter().enumerate().map(|(h, t)| (n - 1 - h) as f64 * t.abs()).sum();
    if mass > 1.0 + 1e-12 {
        let hint = match cfg.schedule {
            DecaySchedule::FgmPower { alpha, .. } => {
                format!("; use kappa0 >= {}", fgm_min_kappa(n, alpha))
            }
            _ => String::new(),
        };
        return Err(Error::Validity(format!(
            "Σ|θ| over all pairs is {mass} > 1, density nonnegativity is not certified{hint}"
        )));
    }
    let mut rng = rng_from_seed(cfg.seed);
    let mut s = vec![0.0f64; n];
    let mut acc = 0.0; // S_{k−1} = Σ_{i<j<k} θ_{j−i} sᵢ sⱼ
    let mut min_density = 1.0f64;
    let mut values = Vec::with_capacity(n);
    for k in 0..n {
        let b: f64 = (0..k).map(|i| theta[k - i - 1] * s[i]).sum();
        let c = b / (1.0 + acc);
        min_density = min_density.min(1.0 - c.abs());
        if !(c.abs() <= 1.0) || !(1.0 + acc > 0.0) {
            return Err(Error::Validity(format!(
                "negative conditional density at index {k} (slope {c}); increase kappa0"
            )));
        }
        let w = open_uniform(&mut rng);
        // CDF (1 + c)u − cu² = w
        let u = 2.0 * w / ((1.0 + c) + ((1.0 + c).powi(2) - 4.0 * c * w).max(0.0).sqrt());
        let u = u.clamp(f64::MIN_POSITIVE, 1.0 - f64::EPSILON / 2.0);
        s[k] = 1.0 - 2.0 * u;
        acc += s[k] * b;
        values.push(cfg.marginal_at(k).quantile(u)?);
    }
    finite_or_err(&values)?;
    Ok(SeriesPath {
        values,
        config: cfg.clone(),
        diagnostics: PathDiagnostics {
            generator: Generator::Fgm,
            cholesky_ok: None,
            bandwidth: None,
            min_conditional_density: Some(min_density),
        },
    })
}

#[cfg(test)]
mod tests {
    use super::*;

    type S = DecaySchedule<f64>;

    fn lag_corr(x: &[f64], h: usize) -> f64 {
        let n = x.len();
        let m = x.iter().sum::<f64>() / n as f64;
        let c0: f64 = x.iter().map(|v| (v - m).powi(2)).sum();
        let ch: f64 = (0..n - h).map(|t| (x[t] - m) * (x[t + h] - m)).sum();
        ch / c0
    }

    #[test]
    fn min_kappa_examples() {
        assert_eq!(fgm_min_kappa(2, 7.0), 1.0);
        assert!((fgm_min_kappa(3, 2.0) - 2.25).abs() < 1e-15);
        assert!((fgm_min_kappa(4, 2.0) - (3.0 + 0.5 + 1.0 / 9.0)).abs() < 1e-15);
    }

    #[test]
    fn cholesky_reproduces_toeplitz() {
        for (s, n) in [(S::ArfimaD { d: 0.4 }, 60), (S::MaQ { theta: vec![1.0, 0.6, -0.3] }, 40), (S::Arma21Example, 30)] {
            let g = GaussianSampler::new(n, &s).unwrap();
            let l = &g.factor;
            for i in 0..n {
                for j in 0..=i {
                    let mut dot = 0.0;
                    for k in 0..=j {
                        let get = |r: usize, c: usize| if c < l.first_col(r) { 0.0 } else { l.row(r)[c - l.first_col(r)] };
                        dot += get(i, k) * get(j, k);
                    }
                    let want = if i == j { 1.0 } else { s.value(i - j).unwrap() };
                    assert!((dot - want).abs() < 1e-12, "{s:?} ({i}, {j})");
                }
            }
        }
    }

    #[test]
    fn band_is_used_for_finite_support() {
        let g = GaussianSampler::new(10_000, &S::MaQ { theta: vec![1.0, 0.1] }).unwrap();
        assert_eq!(g.bandwidth(), 1);
        assert_eq!(g.factor.data.len(), 2 * 10_000 - 1);
    }

    #[test]
    fn non_pd_schedule_names_minor() {
        // ρ₁ = 0.9, ρ₂ = −0.9 is not a valid correlation sequence
        let s = S::Explicit { table: vec![0.9, -0.9] };
        match GaussianSampler::new(5, &s) {
            Err(Error::Definiteness { minor }) => assert_eq!(minor, 3),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn seed_determinism_and_independence_of_replicates() {
        let cfg = PathConfig::new(300, S::ArfimaD { d: 0.3 }, Marginal::standard_normal(), 42);
        let a = gaussian_path(&cfg).unwrap();
        let b = gaussian_path(&cfg).unwrap();
        assert_eq!(a.values, b.values);
        let other = PathConfig { seed: 43, ..cfg };
        assert_ne!(a.values, gaussian_path(&other).unwrap().values);
        assert_ne!(replicate_seed(7, 0), replicate_seed(7, 1));
        assert_ne!(replicate_seed(7, 0), replicate_seed(8, 0));
    }

    #[test]
    fn ar1_zero_is_white_noise() {
        let n = 4000;
        let cfg = PathConfig::new(n, S::Ar1 { phi: 0.0 }, Marginal::Evi { a: 0.0, b: 1.0 }, 5);
        let p = gaussian_path(&cfg).unwrap();
        assert!(lag_corr(&p.values, 1).abs() < 3.0 / (n as f64).sqrt());
    }

    /// Lag-h autocorrelation about the known mean 0. The mean-corrected sample
    /// ACF is biased down under long memory (≈ 0.56 for d = 0.4, n = 1000).
    fn lag_corr_known_mean(x: &[f64], h: usize) -> f64 {
        let c0: f64 = x.iter().map(|v| v * v).sum();
        (0..x.len() - h).map(|t| x[t] * x[t + h]).sum::<f64>() / c0
    }

    #[test]
    fn arfima_lag_one_correlation() {
        let cfg = PathConfig::new(1000, S::ArfimaD { d: 0.4 }, Marginal::standard_normal(), 11);
        let g = GaussianSampler::new(1000, &cfg.schedule).unwrap();
        let reps = 20;
        let mean: f64 = (0..reps)
            .map(|r| {
                let c = PathConfig { seed: replicate_seed(11, r), ..cfg.clone() };
                lag_corr_known_mean(&g.path(&c).unwrap().values, 1)
            })
            .sum::<f64>()
            / reps as f64;
        assert!((mean - 2.0 / 3.0).abs() < 0.1, "{mean}");
    }

    #[test]
    fn fgm_independent_case_is_uniform_through_evi() {
        let cfg = PathConfig::new(2, S::Explicit { table: vec![0.0] }, Marginal::Evi { a: 0.0, b: 1.0 }, 3);
        let p = fgm_path(&cfg).unwrap();
        assert_eq!(p.diagnostics.min_conditional_density, Some(1.0));
        let mut rng = rng_from_seed(3);
        let m = Marginal::Evi { a: 0.0, b: 1.0 };
        let want: Vec<f64> = (0..2).map(|_| m.quantile(open_uniform(&mut rng)).unwrap()).collect();
        for (a, b) in p.values.iter().zip(&want) {
            assert!((a - b).abs() < 1e-12);
        }
    }

    #[test]
    fn fgm_rejects_uncertified_kappa() {
        let cfg = PathConfig::new(10, S::FgmPower { alpha: 2.0, kappa0: 2.0 }, Marginal::Evi { a: 0.0, b: 1.0 }, 1);
        match fgm_path(&cfg) {
            Err(Error::Validity(m)) => assert!(m.contains("kappa0")),
            other => panic!("{other:?}"),
        }
        let ok = PathConfig { schedule: S::FgmPower { alpha: 2.0, kappa0: fgm_min_kappa(10, 2.0) }, ..cfg };
        let p = fgm_path(&ok).unwrap();
        assert!(p.diagnostics.min_conditional_density.unwrap() >= 0.0);
    }

    #[test]
    fn fgm_large_kappa_is_near_independent() {
        let n = 20;
        let cfg = PathConfig::new(n, S::FgmPower { alpha: 2.0, kappa0: 1e12 }, Marginal::Evi { a: 0.0, b: 1.0 }, 9);
        let reps = 4000;
        let paths: Vec<Vec<f64>> = (0..reps)
            .map(|r| fgm_path(&PathConfig { seed: replicate_seed(9, r), ..cfg.clone() }).unwrap().values)
            .collect();
        // Kendall τ between coordinates 0 and 1 across replicates
        let mut conc = 0i64;
        let m = 600;
        for i in 0..m {
            for j in i + 1..m {
                let a = (paths[i][0] - paths[j][0]) * (paths[i][1] - paths[j][1]);
                conc += if a > 0.0 { 1 } else { -1 };
            }
        }
        let tau = conc as f64 / (m * (m - 1) / 2) as f64;
        // sd of τ under independence ≈ √(2(2m+5)/(9m(m−1)))
        let sd = (2.0 * (2.0 * m as f64 + 5.0) / (9.0 * m as f64 * (m as f64 - 1.0))).sqrt();
        assert!(tau.abs() < 4.0 * sd, "{tau}");
    }

    #[test]
    fn csv_export_has_header_comment() {
        let cfg = PathConfig::new(3, S::Ar1 { phi: 0.2 }, Marginal::standard_normal(), 1);
        let p = gaussian_path(&cfg).unwrap();
        let mut buf = Vec::new();
        p.write_csv(&mut buf).unwrap();
        let text = String::from_utf8(buf).unwrap();
        let mut lines = text.lines();
        let first = lines.next().unwrap();
        assert!(first.starts_with("# {"));
        let echo: serde_json::Value = serde_json::from_str(&first[2..]).unwrap();
        assert_eq!(echo["config"]["seed"], 1);
        assert_eq!(lines.next().unwrap(), "index,value");
        assert_eq!(lines.count(), 3);
    }

    #[test]
    fn open_uniform_never_hits_endpoints() {
        struct Edge(u64);
        impl RngCore for Edge {
            fn next_u32(&mut self) -> u32 {
                self.0 as u32
            }
            fn next_u64(&mut self) -> u64 {
                self.0
            }
            fn fill_bytes(&mut self, _: &mut [u8]) {}
        }
        assert!(open_uniform(&mut Edge(0)) > 0.0);
        assert!(open_uniform(&mut Edge(u64::MAX)) < 1.0);
    }
}
