use std::fs;
use std::io::{self, Write};
use std::path::{Path, PathBuf};

use anyhow::{bail, Context, Result};
use clap::{Args, Parser, Subcommand, ValueEnum};

use covdecay::estimate::{
    run_pipeline, BootstrapConfig, Distance, Estimator, MarginalFamily, PipelineConfig,
};
use covdecay::harness::{
    analyze, export_series, ingest_csv, kconst_command, run_and_write, AnalyzeOptions, ExperimentConfig,
    KconstRequest, MarginalChoice, Threads, Transform, FULL_REPLICATIONS,
};
use covdecay::output::to_json_g17;
use covdecay::simulate::{fgm_path, gaussian_path, PathConfig};
use covdecay::{DecaySchedule, Family, Marginal};

#[derive(Parser)]
#[command(name = "covdecay", version, about = "Covariance decay through parameterized copulas")]
struct Cli {
    #[command(subcommand)]
    cmd: Cmd,
}

#[derive(Subcommand)]
enum Cmd {
    /// Simulate a series with a lag-copula schedule; writes index,value CSV.
    Simulate(SimulateArgs),
    /// Run the estimation pipeline on a CSV series; prints the report as JSON.
    Estimate(EstimateArgs),
    /// Print the decay constants K1, K2 of a copula family as JSON.
    Kconst(KconstArgs),
    /// Run a Monte Carlo table from a JSON experiment config.
    McTable(McTableArgs),
    /// Returns, ACF, periodogram, histogram and β estimates for a price series.
    Analyze(AnalyzeArgs),
}

#[derive(Clone, Copy, ValueEnum)]
enum GeneratorArg {
    Gaussian,
    Fgm,
}

#[derive(Clone, Copy, ValueEnum)]
enum FamilyArg {
    Normal,
    Exponential,
}

impl From<FamilyArg> for MarginalFamily {
    fn from(f: FamilyArg) -> Self {
        match f {
            FamilyArg::Normal => MarginalFamily::Normal,
            FamilyArg::Exponential => MarginalFamily::ExponentialScale,
        }
    }
}

#[derive(Clone, Copy, ValueEnum)]
enum DistanceArg {
    L1,
    L2,
}

impl From<DistanceArg> for Distance {
    fn from(d: DistanceArg) -> Self {
        match d {
            DistanceArg::L1 => Distance::L1,
            DistanceArg::L2 => Distance::L2,
        }
    }
}

#[derive(Args)]
struct SimulateArgs {
    /// JSON (`{"kind":"arfima_d","d":0.3}`) or shorthand: ar1:PHI, ma:T0,T1,..,
    /// arfima:D, fgm-power:ALPHA,KAPPA0, linear:C0,C1,.., explicit:R1,R2,..
    #[arg(long)]
    schedule: String,
    /// JSON or shorthand: normal:MU,SIGMA, exp-scale:LAMBDA, exp-rate:RATE, evi:A,B, triangular:A,B
    #[arg(long, default_value = "normal:0,1")]
    marginal: String,
    #[arg(long)]
    n: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, value_enum, default_value = "gaussian")]
    generator: GeneratorArg,
    /// Output CSV; stdout when omitted.
    #[arg(long)]
    out: Option<PathBuf>,
}

#[derive(Args)]
struct EstimateArgs {
    #[arg(long = "in")]
    input: PathBuf,
    #[arg(long, value_enum, default_value = "normal")]
    marginal: FamilyArg,
    #[arg(long)]
    m: usize,
    #[arg(long, value_enum, default_value = "l1")]
    distance: DistanceArg,
    /// Comma-separated: ar1, ma1, d_canonical, d_corrected, beta_generic, beta_canonical, beta_corrected
    #[arg(long, value_delimiter = ',', default_value = "ar1,ma1,d_canonical,d_corrected")]
    estimators: Vec<String>,
    /// Directory for lags.csv and trace.csv.
    #[arg(long)]
    out_dir: Option<PathBuf>,
}

#[derive(Args)]
struct KconstArgs {
    /// fgm, amh, gumbel_barnett, frank, gaussian, tawn_mixed, euclidean, mix3
    #[arg(long)]
    family: String,
    #[arg(long, default_value = "normal:0,1")]
    marginal0: String,
    #[arg(long, default_value = "normal:0,1")]
    marginaln: String,
    #[arg(long, default_value_t = 128)]
    order: usize,
}

#[derive(Args)]
struct McTableArgs {
    #[arg(long)]
    config: PathBuf,
    /// Use 1000 replications instead of the configured count.
    #[arg(long)]
    full: bool,
    /// Output directory (overrides the config's `output`).
    #[arg(long)]
    out: Option<PathBuf>,
    #[arg(long)]
    threads: Option<usize>,
}

#[derive(Args)]
struct AnalyzeArgs {
    #[arg(long = "in")]
    input: PathBuf,
    /// Analyze absolute log returns.
    #[arg(long, conflicts_with = "raw")]
    abs: bool,
    /// Analyze the series as read, without taking returns.
    #[arg(long)]
    raw: bool,
    #[arg(long, default_value_t = 25)]
    m: usize,
    /// Family fitted to the (transformed) series.
    #[arg(long, value_enum, default_value = "exponential", conflicts_with_all = ["exp_rate", "exp_scale"])]
    marginal: FamilyArg,
    /// Use a fixed exponential marginal given by its rate (F = 1 − e^{−rate·x}).
    #[arg(long, conflicts_with = "exp_scale")]
    exp_rate: Option<f64>,
    /// Use a fixed exponential marginal given by its scale (F = 1 − e^{−x/scale}).
    #[arg(long)]
    exp_scale: Option<f64>,
    #[arg(long, value_enum, default_value = "l1")]
    distance: DistanceArg,
    #[arg(long)]
    bootstrap_mean_block: Option<f64>,
    #[arg(long, default_value_t = 1000)]
    bootstrap_b: usize,
    #[arg(long, default_value_t = 0)]
    seed: u64,
    #[arg(long, default_value_t = 50)]
    acf_lags: usize,
    #[arg(long, default_value_t = 50)]
    bins: usize,
    /// Directory for report.json, acf.csv, periodogram.csv, histogram.csv, lags.csv, trace.csv.
    #[arg(long)]
    out_dir: Option<PathBuf>,
    /// Write the ingested series back out (round-trip check).
    #[arg(long)]
    export: Option<PathBuf>,
}

fn numbers(s: &str) -> Result<Vec<f64>> {
    s.split(',')
        .map(|t| t.trim().parse::<f64>().with_context(|| format!("not a number: {t:?}")))
        .collect()
}

fn exactly<const N: usize>(s: &str, what: &str) -> Result<[f64; N]> {
    let v = numbers(s)?;
    v.as_slice()
        .try_into()
        .map_err(|_| anyhow::anyhow!("{what} takes {N} value(s), got {}", v.len()))
}

fn parse_marginal(s: &str) -> Result<Marginal<f64>> {
    let s = s.trim();
    if s.starts_with('{') {
        return Ok(serde_json::from_str(s)?);
    }
    let (kind, args) = s.split_once(':').unwrap_or((s, ""));
    let m = match kind {
        "normal" => {
            let [mu, sigma] = exactly(args, "normal")?;
            Marginal::Normal { mu, sigma }
        }
        "exp-scale" => {
            let [lambda] = exactly(args, "exp-scale")?;
            Marginal::ExponentialScale { lambda }
        }
        "exp-rate" => {
            let [rate] = exactly(args, "exp-rate")?;
            Marginal::exponential_from_rate(rate)?
        }
        "evi" => {
            let [a, b] = exactly(args, "evi")?;
            Marginal::Evi { a, b }
        }
        "triangular" => {
            let [a, b] = exactly(args, "triangular")?;
            Marginal::Triangular { a, b }
        }
        "exp" | "exponential" => bail!("state the exponential convention: exp-rate:RATE or exp-scale:SCALE"),
        other => bail!("unknown marginal {other:?}"),
    };
    m.validate()?;
    Ok(m)
}

fn parse_schedule(s: &str) -> Result<DecaySchedule<f64>> {
    let s = s.trim();
    if s.starts_with('{') {
        return Ok(serde_json::from_str(s)?);
    }
    let (kind, args) = s.split_once(':').unwrap_or((s, ""));
    let sch = match kind {
        "ar1" => {
            let [phi] = exactly(args, "ar1")?;
            DecaySchedule::Ar1 { phi }
        }
        "ma" => DecaySchedule::MaQ { theta: numbers(args)? },
        "arfima" => {
            let [d] = exactly(args, "arfima")?;
            DecaySchedule::ArfimaD { d }
        }
        "fgm-power" => {
            let [alpha, kappa0] = exactly(args, "fgm-power")?;
            DecaySchedule::FgmPower { alpha, kappa0 }
        }
        "linear" => DecaySchedule::LinearProcess { c: numbers(args)? },
        "explicit" => DecaySchedule::Explicit { table: numbers(args)? },
        "arma21" => DecaySchedule::Arma21Example,
        other => bail!("unknown schedule {other:?}"),
    };
    sch.validate()?;
    Ok(sch)
}

fn parse_family(s: &str) -> Result<Family> {
    serde_json::from_value(serde_json::Value::String(s.replace('-', "_")))
        .with_context(|| format!("unknown copula family {s:?}"))
}

fn parse_estimator(s: &str) -> Result<Estimator> {
    serde_json::from_value(serde_json::Value::String(s.trim().to_string()))
        .with_context(|| format!("unknown estimator {s:?}"))
}

fn read_series(path: &Path) -> Result<Vec<f64>> {
    let f = fs::File::open(path).with_context(|| format!("opening {}", path.display()))?;
    Ok(ingest_csv(f)?)
}

fn write_out(path: Option<&Path>, text: &str) -> Result<()> {
    match path {
        Some(p) => fs::write(p, text).with_context(|| format!("writing {}", p.display())),
        None => {
            io::stdout().write_all(text.as_bytes())?;
            Ok(())
        }
    }
}

fn simulate(a: SimulateArgs) -> Result<()> {
    let cfg = PathConfig::new(a.n, parse_schedule(&a.schedule)?, parse_marginal(&a.marginal)?, a.seed);
    let path = match a.generator {
        GeneratorArg::Gaussian => gaussian_path(&cfg)?,
        GeneratorArg::Fgm => fgm_path(&cfg)?,
    };
    let mut buf = Vec::new();
    path.write_csv(&mut buf)?;
    write_out(a.out.as_deref(), std::str::from_utf8(&buf)?)
}

fn estimate(a: EstimateArgs) -> Result<()> {
    let series = read_series(&a.input)?;
    let estimators = a.estimators.iter().map(|s| parse_estimator(s)).collect::<Result<Vec<_>>>()?;
    let mut cfg = PipelineConfig::new(a.marginal.into(), a.m, estimators);
    cfg.distance = a.distance.into();
    let report = run_pipeline(&series, &cfg)?;
    if let Some(dir) = &a.out_dir {
        fs::create_dir_all(dir)?;
        report.write_lags_csv(fs::File::create(dir.join("lags.csv"))?)?;
        report.write_trace_csv(fs::File::create(dir.join("trace.csv"))?)?;
    }
    println!("{}", report.to_json()?);
    Ok(())
}

fn kconst(a: KconstArgs) -> Result<()> {
    let req = KconstRequest {
        family: parse_family(&a.family)?,
        marginal0: parse_marginal(&a.marginal0)?,
        marginaln: parse_marginal(&a.marginaln)?,
        order: a.order,
    };
    println!("{}", kconst_command(&req)?);
    Ok(())
}

fn mc_table(a: McTableArgs) -> Result<()> {
    let text = fs::read_to_string(&a.config).with_context(|| format!("reading {}", a.config.display()))?;
    let mut cfg = ExperimentConfig::from_json(&text)?;
    if a.full {
        cfg.replications = FULL_REPLICATIONS;
    }
    if let Some(t) = a.threads {
        cfg.threads = Threads::Count(t.max(1));
    }
    let dir = a
        .out
        .or_else(|| cfg.output.clone())
        .unwrap_or_else(|| PathBuf::from("mc-out"));
    let (table, manifest) = run_and_write(&cfg, &dir)?;
    io::stdout().write_all(table.csv_string()?.as_bytes())?;
    eprintln!(
        "wrote {} rows to {} in {:.1} s",
        table.rows.len(),
        dir.display(),
        manifest.elapsed_seconds
    );
    Ok(())
}

fn write_pairs(path: &Path, header: [&str; 2], rows: impl Iterator<Item = (String, String)>) -> Result<()> {
    let mut out = String::new();
    out.push_str(&format!("{},{}\n", header[0], header[1]));
    for (a, b) in rows {
        out.push_str(&format!("{a},{b}\n"));
    }
    fs::write(path, out)?;
    Ok(())
}

fn run_analyze(a: AnalyzeArgs) -> Result<()> {
    let series = read_series(&a.input)?;
    if let Some(p) = &a.export {
        export_series(&series, fs::File::create(p)?)?;
    }
    let marginal = match (a.exp_rate, a.exp_scale) {
        (Some(rate), _) => MarginalChoice::Fixed {
            marginal: Marginal::exponential_from_rate(rate)?,
        },
        (_, Some(lambda)) => {
            let m = Marginal::ExponentialScale { lambda };
            m.validate()?;
            MarginalChoice::Fixed { marginal: m }
        }
        _ => MarginalChoice::Fit {
            family: a.marginal.into(),
        },
    };
    let opts = AnalyzeOptions {
        transform: if a.raw {
            Transform::Raw
        } else if a.abs {
            Transform::AbsReturns
        } else {
            Transform::Returns
        },
        marginal,
        m: a.m,
        distance: a.distance.into(),
        acf_lags: a.acf_lags,
        histogram_bins: a.bins,
        bootstrap: a.bootstrap_mean_block.map(|mean_block| BootstrapConfig {
            mean_block,
            replicates: a.bootstrap_b,
            seed: a.seed,
        }),
    };
    let report = analyze(&series, &opts)?;
    for w in &report.warnings {
        eprintln!("warning: {w}");
    }
    if let Some(dir) = &a.out_dir {
        fs::create_dir_all(dir)?;
        let g = covdecay::output::fmt_g17;
        write_pairs(
            &dir.join("acf.csv"),
            ["lag", "acf"],
            report.acf.iter().enumerate().map(|(i, r)| ((i + 1).to_string(), g(*r))),
        )?;
        let p = &report.periodogram;
        write_pairs(
            &dir.join("periodogram.csv"),
            ["freq", "ordinate"],
            p.freq.iter().zip(&p.ordinate).map(|(f, o)| (g(*f), g(*o))),
        )?;
        let h = &report.histogram;
        write_pairs(
            &dir.join("histogram.csv"),
            ["left_edge", "count"],
            h.edges.iter().zip(&h.counts).map(|(e, c)| (g(*e), c.to_string())),
        )?;
        report.estimate.write_lags_csv(fs::File::create(dir.join("lags.csv"))?)?;
        report.estimate.write_trace_csv(fs::File::create(dir.join("trace.csv"))?)?;
        fs::write(dir.join("report.json"), to_json_g17(&report)?)?;
    }
    println!("{}", to_json_g17(&summary(&report))?);
    Ok(())
}

fn summary(r: &covdecay::harness::AnalysisReport) -> serde_json::Value {
    let est: serde_json::Map<String, serde_json::Value> = r
        .estimate
        .estimates
        .iter()
        .map(|e| {
            let mut v = serde_json::json!({ "value": e.trace.value });
            if let Some(ci) = e.ci {
                v["ci"] = serde_json::to_value(ci).unwrap_or_default();
            }
            (e.estimator.name().to_string(), v)
        })
        .collect();
    serde_json::json!({
        "n": r.n,
        "m": r.options.m,
        "marginal_fit": r.estimate.marginal_fit,
        "estimates": est,
        "beta_corrected_ci": r.beta_corrected_ci,
        "warnings": r.warnings,
    })
}

fn main() -> Result<()> {
    match Cli::parse().cmd {
        Cmd::Simulate(a) => simulate(a),
        Cmd::Estimate(a) => estimate(a),
        Cmd::Kconst(a) => kconst(a),
        Cmd::McTable(a) => mc_table(a),
        Cmd::Analyze(a) => run_analyze(a),
    }
}
