//! Real-data ingestion and diagnostics: returns, ACF, periodogram, histogram,
//! then the estimation pipeline with the three β estimators.

use std::io::{Read, Write};

use rustfft::{num_complex::Complex, FftPlanner};
use serde::{Deserialize, Serialize};

use crate::error::{domain, Error, Result};
use crate::estimate::{
    run_pipeline, BootstrapCi, BootstrapConfig, Distance, EstimateReport, Estimator, MarginalFamily, PipelineConfig,
};
use crate::marginals::Marginal;

/// Below this many observations the analysis warns but proceeds.
pub const SHORT_SERIES_WARNING: usize = 500;

/// Reads a one-column numeric CSV, optionally preceded by a date (or index)
/// column: the last field of each record is the value. A non-numeric first
/// record is taken as a header; blank lines and `#` comments are skipped.
pub fn ingest_csv<R: Read>(r: R) -> Result<Vec<f64>> {
    let mut rdr = csv::ReaderBuilder::new()
        .has_headers(false)
        .flexible(true)
        .comment(Some(b'#'))
        .trim(csv::Trim::All)
        .from_reader(r);
    let mut values = Vec::new();
    let mut first = true;
    for rec in rdr.records() {
        let rec = rec?;
        let line = rec.position().map_or(0, |p| p.line() as usize);
        let Some(field) = rec.iter().next_back().filter(|f| !f.is_empty()) else {
            if rec.iter().all(str::is_empty) {
                continue;
            }
            return Err(Error::Ingestion {
                line,
                message: "missing value field".into(),
            });
        };
        match field.parse::<f64>() {
            Ok(v) if v.is_finite() => values.push(v),
            _ if first => {}
            _ => {
                return Err(Error::Ingestion {
                    line,
                    message: format!("not a finite number: {field:?}"),
                })
            }
        }
        first = false;
    }
    Ok(values)
}

/// Writes `value` lines that [`ingest_csv`] reads back bit for bit.
pub fn export_series<W: Write>(values: &[f64], mut w: W) -> Result<()> {
    writeln!(w, "value")?;
    for v in values {
        writeln!(w, "{v:?}")?;
    }
    Ok(())
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum Transform {
    /// r_t = ln(P_t / P_{t−1}).
    #[default]
    Returns,
    /// |r_t|.
    AbsReturns,
    /// The series as read.
    Raw,
}

pub fn log_returns(prices: &[f64]) -> Result<Vec<f64>> {
    if let Some(i) = prices.iter().position(|p| !(*p > 0.0)) {
        return Err(domain(format!("log returns need positive prices; value {} is {}", i + 1, prices[i])));
    }
    Ok(prices.windows(2).map(|w| (w[1] / w[0]).ln()).collect())
}

pub fn transform(series: &[f64], t: Transform) -> Result<Vec<f64>> {
    Ok(match t {
        Transform::Raw => series.to_vec(),
        Transform::Returns => log_returns(series)?,
        Transform::AbsReturns => log_returns(series)?.into_iter().map(f64::abs).collect(),
    })
}

/// Mean-corrected sample autocorrelations at lags 1..=max_lag.
pub fn sample_acf(x: &[f64], max_lag: usize) -> Vec<f64> {
    let n = x.len();
    let mean = x.iter().sum::<f64>() / n as f64;
    let c: Vec<f64> = x.iter().map(|v| v - mean).collect();
    let c0: f64 = c.iter().map(|v| v * v).sum();
    (1..=max_lag.min(n.saturating_sub(1)))
        .map(|h| c.iter().zip(&c[h..]).map(|(a, b)| a * b).sum::<f64>() / c0)
        .collect()
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Periodogram {
    /// Fourier frequencies λ_j = 2πj/n, j = 1..⌊n/2⌋.
    pub freq: Vec<f64>,
    /// I(λ_j) = |Σ_t x_t e^{−itλ_j}|² / (2πn).
    pub ordinate: Vec<f64>,
}

pub fn periodogram(x: &[f64]) -> Periodogram {
    let n = x.len();
    let mut buf: Vec<Complex<f64>> = x.iter().map(|&v| Complex::new(v, 0.0)).collect();
    FftPlanner::new().plan_fft_forward(n).process(&mut buf);
    let scale = 1.0 / (2.0 * std::f64::consts::PI * n as f64);
    let (freq, ordinate) = (1..=n / 2)
        .map(|j| (2.0 * std::f64::consts::PI * j as f64 / n as f64, buf[j].norm_sqr() * scale))
        .unzip();
    Periodogram { freq, ordinate }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Histogram {
    /// bins + 1 equally spaced edges from min to max.
    pub edges: Vec<f64>,
    pub counts: Vec<usize>,
}

pub fn histogram(x: &[f64], bins: usize) -> Histogram {
    let bins = bins.max(1);
    let lo = x.iter().copied().fold(f64::INFINITY, f64::min);
    let hi = x.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let width = if hi > lo { (hi - lo) / bins as f64 } else { 1.0 };
    let edges = (0..=bins).map(|i| lo + width * i as f64).collect();
    let mut counts = vec![0; bins];
    for &v in x {
        let i = (((v - lo) / width) as usize).min(bins - 1);
        counts[i] += 1;
    }
    Histogram { edges, counts }
}

#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
#[serde(tag = "kind", rename_all = "snake_case")]
pub enum MarginalChoice {
    /// Fit the family to the transformed series.
    Fit { family: MarginalFamily },
    /// Use a stated marginal as is (e.g. an exponential rate converted to scale).
    Fixed { marginal: Marginal<f64> },
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalyzeOptions {
    pub transform: Transform,
    pub marginal: MarginalChoice,
    pub m: usize,
    pub distance: Distance,
    pub acf_lags: usize,
    pub histogram_bins: usize,
    #[serde(skip_serializing_if = "Option::is_none")]
    pub bootstrap: Option<BootstrapConfig>,
}

impl Default for AnalyzeOptions {
    fn default() -> Self {
        Self {
            transform: Transform::Returns,
            marginal: MarginalChoice::Fit {
                family: MarginalFamily::ExponentialScale,
            },
            m: 25,
            distance: Distance::L1,
            acf_lags: 50,
            histogram_bins: 50,
            bootstrap: None,
        }
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct AnalysisReport {
    pub options: AnalyzeOptions,
    pub n_input: usize,
    pub n: usize,
    pub warnings: Vec<String>,
    pub acf: Vec<f64>,
    pub periodogram: Periodogram,
    pub histogram: Histogram,
    pub estimate: EstimateReport,
    /// Interval for β̂_cor mapped from the d̂_cor interval through β = 1 − 2d.
    #[serde(skip_serializing_if = "Option::is_none")]
    pub beta_corrected_ci: Option<BootstrapCi>,
}

pub const ANALYZE_ESTIMATORS: [Estimator; 5] = [
    Estimator::DCanonical,
    Estimator::DCorrected,
    Estimator::BetaGeneric,
    Estimator::BetaCanonical,
    Estimator::BetaCorrected,
];

pub fn analyze(series: &[f64], opts: &AnalyzeOptions) -> Result<AnalysisReport> {
    let x = transform(series, opts.transform)?;
    let mut warnings = Vec::new();
    if x.len() < SHORT_SERIES_WARNING {
        warnings.push(format!(
            "only {} observations after transformation (fewer than {SHORT_SERIES_WARNING}); estimates are unreliable",
            x.len()
        ));
    }
    let mut cfg = PipelineConfig::new(MarginalFamily::Normal, opts.m, ANALYZE_ESTIMATORS.to_vec());
    match opts.marginal {
        MarginalChoice::Fit { family } => cfg.marginal = family,
        MarginalChoice::Fixed { marginal } => cfg.fixed_marginal = Some(marginal),
    }
    cfg.distance = opts.distance;
    cfg.bootstrap = opts.bootstrap;
    cfg.bootstrap_target = Estimator::DCorrected;
    let estimate = run_pipeline(&x, &cfg)?;
    let beta_corrected_ci = estimate
        .get(Estimator::DCorrected)
        .and_then(|r| r.ci)
        .map(|ci| BootstrapCi {
            point: 1.0 - 2.0 * ci.point,
            lo95: 1.0 - 2.0 * ci.hi95,
            hi95: 1.0 - 2.0 * ci.lo95,
            sd: 2.0 * ci.sd,
            missing: ci.missing,
        });
    Ok(AnalysisReport {
        options: opts.clone(),
        n_input: series.len(),
        n: x.len(),
        warnings,
        acf: sample_acf(&x, opts.acf_lags),
        periodogram: periodogram(&x),
        histogram: histogram(&x, opts.histogram_bins),
        estimate,
        beta_corrected_ci,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::simulate::{rng_from_seed, std_normal_draw};

    #[test]
    fn ingestion_variants() {
        let v = ingest_csv("date,close\n2020-01-01,10.5\n2020-01-02, 11\n\n2020-01-03,12e0\n".as_bytes()).unwrap();
        assert_eq!(v, vec![10.5, 11.0, 12.0]);
        let v = ingest_csv("1\n2\n3\n".as_bytes()).unwrap();
        assert_eq!(v, vec![1.0, 2.0, 3.0]);
        let v = ingest_csv("# {\"meta\": 1}\nindex,value\n0,0.25\n1,-0.5\n".as_bytes()).unwrap();
        assert_eq!(v, vec![0.25, -0.5]);
        match ingest_csv("price\n1\n2\nabc\n4\n".as_bytes()) {
            Err(Error::Ingestion { line, .. }) => assert_eq!(line, 4),
            other => panic!("{other:?}"),
        }
    }

    #[test]
    fn export_round_trips() {
        let mut rng = rng_from_seed(5);
        let xs: Vec<f64> = (0..1000).map(|_| std_normal_draw(&mut rng) * 1e-3 + 100.0).collect();
        let mut buf = Vec::new();
        export_series(&xs, &mut buf).unwrap();
        assert_eq!(ingest_csv(buf.as_slice()).unwrap(), xs);
    }

    #[test]
    fn returns() {
        let r = log_returns(&[1.0, std::f64::consts::E, 1.0]).unwrap();
        assert!((r[0] - 1.0).abs() < 1e-15 && (r[1] + 1.0).abs() < 1e-15);
        assert!(log_returns(&[1.0, 0.0]).is_err());
        let a = transform(&[1.0, std::f64::consts::E, 1.0], Transform::AbsReturns).unwrap();
        assert!(a.iter().all(|v| (v - 1.0).abs() < 1e-15));
    }

    #[test]
    fn constant_prices_are_degenerate() {
        let opts = AnalyzeOptions {
            marginal: MarginalChoice::Fit {
                family: MarginalFamily::Normal,
            },
            m: 5,
            ..Default::default()
        };
        assert!(matches!(analyze(&[100.0; 600], &opts), Err(Error::Degenerate(_))));
    }

    #[test]
    fn white_noise_acf_stays_in_band() {
        let mut rng = rng_from_seed(1);
        let x: Vec<f64> = (0..2000).map(|_| std_normal_draw(&mut rng)).collect();
        let acf = sample_acf(&x, 50);
        let band = 2.0 / (x.len() as f64).sqrt();
        let inside = acf.iter().filter(|r| r.abs() <= band).count();
        assert!(inside as f64 >= 0.95 * 50.0, "{inside} of 50");
    }

    #[test]
    fn periodogram_matches_direct_sum() {
        let mut rng = rng_from_seed(2);
        for n in [64, 100, 101] {
            let x: Vec<f64> = (0..n).map(|_| std_normal_draw(&mut rng)).collect();
            let p = periodogram(&x);
            assert_eq!(p.freq.len(), n / 2);
            for (j, (&lam, &ord)) in p.freq.iter().zip(&p.ordinate).enumerate() {
                assert!((lam - 2.0 * std::f64::consts::PI * (j + 1) as f64 / n as f64).abs() < 1e-15);
                let (mut re, mut im) = (0.0, 0.0);
                for (t, v) in x.iter().enumerate() {
                    let a = (t + 1) as f64 * lam;
                    re += v * a.cos();
                    im -= v * a.sin();
                }
                let direct = (re * re + im * im) / (2.0 * std::f64::consts::PI * n as f64);
                assert!((ord - direct).abs() < 1e-10 * (1.0 + direct), "n={n} j={j}");
            }
        }
    }

    #[test]
    fn histogram_counts_everything() {
        let x = [0.0, 0.1, 0.5, 0.99, 1.0];
        let h = histogram(&x, 2);
        assert_eq!(h.edges, vec![0.0, 0.5, 1.0]);
        assert_eq!(h.counts, vec![2, 3]);
        let h = histogram(&[3.0; 4], 3);
        assert_eq!(h.counts.iter().sum::<usize>(), 4);
    }

    #[test]
    fn short_series_warns() {
        let mut rng = rng_from_seed(3);
        let x: Vec<f64> = (0..200).map(|_| std_normal_draw(&mut rng)).collect();
        let opts = AnalyzeOptions {
            transform: Transform::Raw,
            marginal: MarginalChoice::Fit {
                family: MarginalFamily::Normal,
            },
            m: 5,
            ..Default::default()
        };
        let r = analyze(&x, &opts).unwrap();
        assert_eq!(r.warnings.len(), 1);
        assert_eq!(r.acf.len(), 50);
        assert_eq!(r.estimate.estimates.len(), 5);
    }
}
