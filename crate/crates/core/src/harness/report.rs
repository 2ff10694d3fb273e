use std::path::{Path, PathBuf};

use serde::{Deserialize, Serialize};

use super::bench::BenchmarkReport;
use crate::error::{Result, TuneError};

/// Environment variable that overrides the benchmark output directory.
pub const OUT_DIR_ENV: &str = "TUNE_OUT_DIR";

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum ReportFormat {
    Json,
    Csv,
}

/// CSV header. One row per (instance, seed, method); the recommendation
/// columns describe the first configured weight.
pub const CSV_COLUMNS: [&str; 17] = [
    "instance",
    "seed",
    "method",
    "hypervolume",
    "solve_ms",
    "front_size",
    "distinct_solutions",
    "w1",
    "w2",
    "rec_latency",
    "rec_cost",
    "latency_reduction_pct",
    "cost_reduction_pct",
    "runtime_latency",
    "runtime_cost",
    "requests_sent",
    "requests_pruned",
];

/// `x` rounded to `digits` significant decimal digits.
pub fn round_sig(x: f64, digits: usize) -> f64 {
    if x == 0.0 || !x.is_finite() {
        return x;
    }
    format!("{:.*e}", digits.saturating_sub(1), x).parse().expect("formatted float parses")
}

/// The directory given on the command line unless the override variable is set.
pub fn resolve_out_dir(cli: &Path) -> PathBuf {
    std::env::var_os(OUT_DIR_ENV).map_or_else(|| cli.to_path_buf(), PathBuf::from)
}

fn csv_err(path: &Path, e: csv::Error) -> TuneError {
    match e.into_kind() {
        csv::ErrorKind::Io(io) => TuneError::io(path, io),
        other => TuneError::Serialization(format!("{}: {other:?}", path.display())),
    }
}

fn opt(v: Option<f64>) -> String {
    v.map_or_else(String::new, |v| v.to_string())
}

pub fn write_report(report: &BenchmarkReport, path: &Path, format: ReportFormat) -> Result<()> {
    match format {
        ReportFormat::Json => {
            let text =
                serde_json::to_string_pretty(report).map_err(|e| TuneError::Serialization(e.to_string()))?;
            std::fs::write(path, text + "\n").map_err(|e| TuneError::io(path, e))
        }
        ReportFormat::Csv => {
            let mut w = csv::Writer::from_path(path).map_err(|e| csv_err(path, e))?;
            w.write_record(CSV_COLUMNS).map_err(|e| csv_err(path, e))?;
            for r in &report.rows {
                let rec = r.recommendations.first();
                let record = vec![
                    r.instance.to_string(),
                    r.seed.to_string(),
                    r.method.clone(),
                    r.hypervolume.to_string(),
                    r.solve_ms.to_string(),
                    r.front_size.to_string(),
                    r.distinct_solutions.map_or_else(String::new, |d| d.to_string()),
                    opt(rec.map(|x| x.weights[0])),
                    opt(rec.map(|x| x.weights[1])),
                    opt(rec.map(|x| x.latency)),
                    opt(rec.map(|x| x.cost)),
                    opt(rec.map(|x| x.latency_reduction_pct)),
                    opt(rec.map(|x| x.cost_reduction_pct)),
                    opt(rec.map(|x| x.runtime.latency)),
                    opt(rec.map(|x| x.runtime.cost)),
                    rec.map_or_else(String::new, |x| x.runtime.requests_sent.to_string()),
                    rec.map_or_else(String::new, |x| x.runtime.requests_pruned.to_string()),
                ];
                w.write_record(&record).map_err(|e| csv_err(path, e))?;
            }
            w.flush().map_err(|e| TuneError::io(path, e))
        }
    }
}
