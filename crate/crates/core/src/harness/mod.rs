//! Experiment configs, Monte Carlo tables, real-data analysis and the
//! K-constant command behind the CLI.

mod analyze;
mod experiment;
mod kconst;

pub use analyze::{
    analyze, export_series, histogram, ingest_csv, log_returns, periodogram, sample_acf, transform, AnalysisReport,
    AnalyzeOptions, Histogram, MarginalChoice, Periodogram, Transform, ANALYZE_ESTIMATORS, SHORT_SERIES_WARNING,
};
pub use experiment::{
    content_hash, run_and_write, run_experiment, ExperimentConfig, Manifest, McRow, McTable, Model, ReplicationRecord,
    Threads, DEFAULT_REPLICATIONS, FULL_REPLICATIONS, MAX_FAILURE_FRACTION, ROUTE_NOTE, THREADS_ENV,
};
pub use kconst::{kconst, kconst_command, kconst_table, KconstRequest};
