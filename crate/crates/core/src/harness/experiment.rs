//! Monte Carlo experiments: simulate → estimate → aggregate, per parameter.

use std::fs;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Deserializer, Serialize, Serializer};
use sha2::{Digest, Sha256};

use crate::decay::DecaySchedule;
use crate::error::{Error, Result};
use crate::estimate::{fit_marginal, lag_estimates, Distance, Estimator, KTrace, MarginalFamily};
use crate::output::{fmt_g17, to_json_g17};
use crate::simulate::{replicate_seed, rng_from_seed, GaussianSampler};

/// Environment variable overriding the configured thread count.
pub const THREADS_ENV: &str = "COVDECAY_THREADS";
/// Largest tolerated failure share per table row before the run aborts.
pub const MAX_FAILURE_FRACTION: f64 = 0.01;
pub const DEFAULT_REPLICATIONS: usize = 200;
pub const FULL_REPLICATIONS: usize = 1000;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Model {
    /// X_t = Z_t + ϑ Z_{t−1}.
    Ma1,
    Ar1,
    /// ARFIMA(0, d, 0), simulated exactly through its Toeplitz correlation.
    Arfima,
}

impl Model {
    pub fn schedule(self, param: f64) -> DecaySchedule<f64> {
        match self {
            Model::Ma1 => DecaySchedule::MaQ { theta: vec![1.0, param] },
            Model::Ar1 => DecaySchedule::Ar1 { phi: param },
            Model::Arfima => DecaySchedule::ArfimaD { d: param },
        }
    }

    pub fn default_estimators(self) -> Vec<Estimator> {
        match self {
            Model::Ma1 => vec![Estimator::Ma1],
            Model::Ar1 => vec![Estimator::Ar1],
            Model::Arfima => vec![Estimator::DCanonical, Estimator::DCorrected],
        }
    }

    fn check(self, param: f64) -> Result<()> {
        let ok = match self {
            Model::Ma1 | Model::Ar1 => param.abs() < 1.0,
            Model::Arfima => param.abs() < 0.5,
        };
        if ok {
            Ok(())
        } else {
            Err(Error::Config(format!("parameter {param} outside the {self:?} domain")))
        }
    }
}

/// What an estimator targets when the process parameter is `param`.
fn truth(est: Estimator, param: f64) -> f64 {
    match est {
        Estimator::BetaGeneric | Estimator::BetaCanonical | Estimator::BetaCorrected => 1.0 - 2.0 * param,
        _ => param,
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Threads {
    #[default]
    Auto,
    Count(usize),
}

impl Serialize for Threads {
    fn serialize<S: Serializer>(&self, s: S) -> std::result::Result<S::Ok, S::Error> {
        match self {
            Threads::Auto => s.serialize_str("auto"),
            Threads::Count(n) => s.serialize_u64(*n as u64),
        }
    }
}

impl<'de> Deserialize<'de> for Threads {
    fn deserialize<D: Deserializer<'de>>(d: D) -> std::result::Result<Self, D::Error> {
        #[derive(Deserialize)]
        #[serde(untagged)]
        enum Raw {
            Count(usize),
            Word(String),
        }
        match Raw::deserialize(d)? {
            Raw::Count(0) => Err(serde::de::Error::custom("thread count must be positive")),
            Raw::Count(n) => Ok(Threads::Count(n)),
            Raw::Word(w) if w == "auto" => Ok(Threads::Auto),
            Raw::Word(w) => Err(serde::de::Error::custom(format!("expected an integer or \"auto\", got {w:?}"))),
        }
    }
}

impl Threads {
    /// The configured count, overridden by `COVDECAY_THREADS` when set; 0 means the pool default.
    pub fn resolve(self) -> Result<usize> {
        if let Ok(v) = std::env::var(THREADS_ENV) {
            return match v.trim().parse::<usize>() {
                Ok(n) if n > 0 => Ok(n),
                _ => Err(Error::Config(format!("{THREADS_ENV}={v:?} is not a positive integer"))),
            };
        }
        Ok(match self {
            Threads::Auto => 0,
            Threads::Count(n) => n,
        })
    }
}

fn default_replications() -> usize {
    DEFAULT_REPLICATIONS
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct ExperimentConfig {
    pub model: Model,
    /// Parameter grid; one block of table rows per value.
    pub params: Vec<f64>,
    pub n: usize,
    #[serde(default = "default_replications")]
    pub replications: usize,
    /// Maximum lags to report; estimates for each m average the per-k values up to m.
    pub m: Vec<usize>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub estimators: Option<Vec<Estimator>>,
    pub seed: u64,
    #[serde(default)]
    pub threads: Threads,
    #[serde(default)]
    pub distance: Distance,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    pub output: Option<PathBuf>,
}

impl ExperimentConfig {
    pub fn from_json(text: &str) -> Result<Self> {
        let cfg: Self = serde_json::from_str(text)?;
        cfg.validate()?;
        Ok(cfg)
    }

    pub fn estimators(&self) -> Vec<Estimator> {
        self.estimators.clone().unwrap_or_else(|| self.model.default_estimators())
    }

    pub fn validate(&self) -> Result<()> {
        if self.replications == 0 {
            return Err(Error::Config("replications must be at least 1".into()));
        }
        if self.params.is_empty() {
            return Err(Error::Config("empty parameter grid".into()));
        }
        if self.m.is_empty() || self.m.iter().any(|&m| m == 0 || m >= self.n) {
            return Err(Error::Config(format!("every m must satisfy 1 ≤ m < n = {}", self.n)));
        }
        if self.estimators().is_empty() {
            return Err(Error::Config("no estimators selected".into()));
        }
        self.params.iter().try_for_each(|&p| self.model.check(p))
    }

    fn max_m(&self) -> usize {
        self.m.iter().copied().max().unwrap_or(1)
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McRow {
    pub param: f64,
    pub estimator: Estimator,
    pub m: usize,
    pub mean: f64,
    pub mse: f64,
    pub failures: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReplicationRecord {
    pub param: f64,
    pub replication: usize,
    pub seed: u64,
    pub estimator: Estimator,
    pub m: usize,
    pub estimate: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct McTable {
    pub rows: Vec<McRow>,
    pub replications: Vec<ReplicationRecord>,
}

impl McTable {
    pub fn row(&self, param: f64, estimator: Estimator, m: usize) -> Option<&McRow> {
        self.rows
            .iter()
            .find(|r| r.param == param && r.estimator == estimator && r.m == m)
    }

    /// `param,estimator,m,mean,mse,failures`.
    pub fn write_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["param", "estimator", "m", "mean", "mse", "failures"])?;
        for r in &self.rows {
            out.write_record([
                fmt_g17(r.param),
                r.estimator.name().to_string(),
                r.m.to_string(),
                fmt_g17(r.mean),
                fmt_g17(r.mse),
                r.failures.to_string(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    /// `param,replication,seed,estimator,m,estimate` (empty estimate on failure).
    pub fn write_replications_csv<W: Write>(&self, w: W) -> Result<()> {
        let mut out = csv::Writer::from_writer(w);
        out.write_record(["param", "replication", "seed", "estimator", "m", "estimate"])?;
        for r in &self.replications {
            out.write_record([
                fmt_g17(r.param),
                r.replication.to_string(),
                r.seed.to_string(),
                r.estimator.name().to_string(),
                r.m.to_string(),
                r.estimate.map(fmt_g17).unwrap_or_default(),
            ])?;
        }
        out.flush()?;
        Ok(())
    }

    pub fn csv_string(&self) -> Result<String> {
        let mut buf = Vec::new();
        self.write_csv(&mut buf)?;
        Ok(String::from_utf8(buf).expect("CSV is UTF-8"))
    }
}

/// Mean of the first values of a trace, i.e. the estimate at maximum lag `m`.
fn value_at(trace: &KTrace, m: usize) -> Option<f64> {
    if m < trace.first_k {
        return None;
    }
    let len = (m - trace.first_k + 1).min(trace.per_k.len());
    if len == 0 {
        return None;
    }
    Some(trace.per_k[..len].iter().sum::<f64>() / len as f64)
}

/// Estimates for one simulated series, laid out as estimators × m.
fn one_replication(cfg: &ExperimentConfig, sampler: &GaussianSampler, seed: u64, estimators: &[Estimator]) -> Vec<Option<f64>> {
    let cells = estimators.len() * cfg.m.len();
    let mut rng = rng_from_seed(seed);
    let x = sampler.standard(&mut rng);
    let lags = fit_marginal(&x, MarginalFamily::Normal).and_then(|f| lag_estimates(&x, &f, cfg.max_m()));
    let Ok(lags) = lags else {
        return vec![None; cells];
    };
    let mut out = Vec::with_capacity(cells);
    for &e in estimators {
        let trace = e.apply(&lags, cfg.distance).ok();
        for &m in &cfg.m {
            let v = match e {
                Estimator::Ar1 | Estimator::Ma1 => trace.as_ref().map(|t| t.value),
                _ => trace.as_ref().and_then(|t| value_at(t, m)),
            };
            out.push(v.filter(|v| v.is_finite()));
        }
    }
    out
}

/// Runs every replication for every parameter. Each replication draws from its
/// own derived seed and results merge in index order, so the table does not
/// depend on the thread count.
pub fn run_experiment(cfg: &ExperimentConfig) -> Result<McTable> {
    cfg.validate()?;
    let pool = rayon::ThreadPoolBuilder::new()
        .num_threads(cfg.threads.resolve()?)
        .build()
        .map_err(|e| Error::Config(e.to_string()))?;
    pool.install(|| run_in_pool(cfg))
}

fn run_in_pool(cfg: &ExperimentConfig) -> Result<McTable> {
    let estimators = cfg.estimators();
    let mut rows = Vec::new();
    let mut records = Vec::new();
    for (pi, &param) in cfg.params.iter().enumerate() {
        let sampler = GaussianSampler::new(cfg.n, &cfg.model.schedule(param))?;
        let base = replicate_seed(cfg.seed, pi as u64);
        let results: Vec<(u64, Vec<Option<f64>>)> = (0..cfg.replications)
            .into_par_iter()
            .map(|r| {
                let seed = replicate_seed(base, r as u64);
                (seed, one_replication(cfg, &sampler, seed, &estimators))
            })
            .collect();
        for (ei, &e) in estimators.iter().enumerate() {
            for (mi, &m) in cfg.m.iter().enumerate() {
                let cell = ei * cfg.m.len() + mi;
                let vals: Vec<f64> = results.iter().filter_map(|(_, v)| v[cell]).collect();
                let failures = cfg.replications - vals.len();
                if failures as f64 > MAX_FAILURE_FRACTION * cfg.replications as f64 || vals.is_empty() {
                    return Err(Error::Experiment {
                        param,
                        failures,
                        total: cfg.replications,
                    });
                }
                let k = vals.len() as f64;
                let t = truth(e, param);
                rows.push(McRow {
                    param,
                    estimator: e,
                    m,
                    mean: vals.iter().sum::<f64>() / k,
                    mse: vals.iter().map(|v| (v - t) * (v - t)).sum::<f64>() / k,
                    failures,
                });
                for (r, (seed, v)) in results.iter().enumerate() {
                    records.push(ReplicationRecord {
                        param,
                        replication: r,
                        seed: *seed,
                        estimator: e,
                        m,
                        estimate: v[cell],
                    });
                }
            }
        }
    }
    Ok(McTable { rows, replications: records })
}

#[derive(Debug, Clone, Serialize)]
pub struct Manifest {
    pub config: ExperimentConfig,
    /// Git-style content hash, sha256("blob <len>\0" ‖ config JSON), of the config
    /// without its execution settings (threads, output directory).
    pub input_hash: String,
    pub elapsed_seconds: f64,
    pub threads: usize,
    pub simulation_route: String,
    pub version: String,
}

/// Hash of a byte string in git's object form, with sha256 as the digest.
pub fn content_hash(bytes: &[u8]) -> String {
    let mut h = Sha256::new();
    h.update(format!("blob {}\0", bytes.len()).as_bytes());
    h.update(bytes);
    hex::encode(h.finalize())
}

pub const ROUTE_NOTE: &str = "Gaussian copula paths from the exact Toeplitz correlation (banded Cholesky); \
ARFIMA uses the same exact route instead of a truncated MA(infinity) filter";

/// Runs the experiment and writes `mc_table.csv`, `replications.csv` and `manifest.json` into `dir`.
pub fn run_and_write(cfg: &ExperimentConfig, dir: &Path) -> Result<(McTable, Manifest)> {
    let start = Instant::now();
    let table = run_experiment(cfg)?;
    let elapsed_seconds = start.elapsed().as_secs_f64();
    fs::create_dir_all(dir)?;
    table.write_csv(fs::File::create(dir.join("mc_table.csv"))?)?;
    table.write_replications_csv(fs::File::create(dir.join("replications.csv"))?)?;
    let inputs = ExperimentConfig {
        threads: Threads::Auto,
        output: None,
        ..cfg.clone()
    };
    let threads = match cfg.threads.resolve()? {
        0 => rayon::current_num_threads(),
        t => t,
    };
    let manifest = Manifest {
        config: cfg.clone(),
        input_hash: content_hash(&serde_json::to_vec(&inputs)?),
        elapsed_seconds,
        threads,
        simulation_route: ROUTE_NOTE.into(),
        version: env!("CARGO_PKG_VERSION").into(),
    };
    fs::write(dir.join("manifest.json"), to_json_g17(&manifest)?)?;
    Ok((table, manifest))
}
