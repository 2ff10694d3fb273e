//! `tune`: command-line front end for the solver, benchmark harness and
//! runtime simulator.
//!
//! Exit codes: 0 success, 2 configuration error, 1 runtime failure.

use std::fmt;
use std::io::Write;
use std::path::{Path, PathBuf};
use std::process::ExitCode;

use anyhow::Context;
use clap::{Parser, Subcommand};
use serde_json::json;
use tune_core::harness::{
    brute_force_front, gen_workload, load_bench_config, load_scenario, load_workload_spec, oracle_candidates,
    resolve_out_dir, run_benchmark, write_report, ReportFormat, Workload,
};
use tune_core::hmooc::{solve, wun_recommend, Method, WeightVector};
use tune_core::runtime::{simulate, simulate_frozen, RuntimePolicy, Trace};
use tune_core::sampling::SampleBudget;
use tune_core::{SubqModel, TuneError};

#[derive(Parser)]
#[command(name = "tune", version, about = "Hierarchical multi-objective query parameter tuning")]
struct Cli {
    #[command(subcommand)]
    command: Command,
}

#[derive(Subcommand)]
enum Command {
    /// Solve one workload and write its front and recommendation as JSON.
    Solve {
        #[arg(long)]
        workload: PathBuf,
        /// HMOOC1, HMOOC2 or HMOOC3.
        #[arg(long, default_value = "HMOOC3")]
        method: String,
        /// Recommendation weights, e.g. `0.9,0.1`.
        #[arg(long, default_value = "0.5,0.5")]
        weights: String,
        #[arg(long)]
        out: PathBuf,
    },
    /// Run a benchmark and write report.json and report.csv.
    Bench {
        #[arg(long)]
        config: PathBuf,
        /// Output directory; the TUNE_OUT_DIR variable overrides it.
        #[arg(long)]
        out: PathBuf,
    },
    /// Solve with estimated cardinalities, then replay the recommendation.
    Simulate {
        #[arg(long)]
        workload: PathBuf,
        #[arg(long)]
        scenario: PathBuf,
    },
    /// Print the exhaustive front over sampled candidates (small workloads only).
    Oracle {
        #[arg(long)]
        workload: PathBuf,
    },
}

/// A failure caused by user input rather than by a run.
#[derive(Debug)]
struct ConfigFailure(anyhow::Error);

impl fmt::Display for ConfigFailure {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        write!(f, "{:#}", self.0)
    }
}

impl std::error::Error for ConfigFailure {}

fn config_err(e: impl Into<anyhow::Error>) -> anyhow::Error {
    anyhow::Error::new(ConfigFailure(e.into()))
}

fn exit_code(e: &anyhow::Error) -> u8 {
    let config = e.downcast_ref::<ConfigFailure>().is_some()
        || e.chain().any(|c| c.downcast_ref::<TuneError>().is_some_and(TuneError::is_config_error));
    if config {
        2
    } else {
        1
    }
}

fn parse_weights(s: &str) -> anyhow::Result<WeightVector> {
    let values = s
        .split(',')
        .map(|v| v.trim().parse::<f64>().with_context(|| format!("weight {v:?} is not a number")))
        .collect::<anyhow::Result<Vec<_>>>()
        .map_err(config_err)?;
    let w = WeightVector::new(values).map_err(config_err)?;
    if w.k() != 2 {
        return Err(config_err(anyhow::anyhow!("expected two weights, got {}", w.k())));
    }
    Ok(w)
}

fn load_workload(path: &Path) -> anyhow::Result<(tune_core::harness::WorkloadSpec, Workload)> {
    let spec = load_workload_spec(path).map_err(config_err)?;
    let w = gen_workload(&spec).map_err(config_err)?;
    Ok((spec, w))
}

fn write_json(path: &Path, value: &serde_json::Value) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    std::fs::write(path, text + "\n").with_context(|| format!("writing {}", path.display()))
}

/// Prints JSON to stdout; a closed pipe (e.g. `| head`) is not an error.
fn print_json(value: &serde_json::Value) -> anyhow::Result<()> {
    let text = serde_json::to_string_pretty(value)?;
    match writeln!(std::io::stdout().lock(), "{text}") {
        Err(e) if e.kind() != std::io::ErrorKind::BrokenPipe => Err(e.into()),
        _ => Ok(()),
    }
}

fn trace_json(t: &Trace) -> serde_json::Value {
    json!({
        "latency": t.latency,
        "cost": t.cost,
        "requests_sent": t.requests_sent,
        "requests_pruned": t.requests_pruned,
        "plan_changes": t.plan_changes,
    })
}

fn run(cli: Cli) -> anyhow::Result<()> {
    match cli.command {
        Command::Solve {
            workload,
            method,
            weights,
            out,
        } => {
            let method: Method = method.parse().map_err(config_err)?;
            let weights = parse_weights(&weights)?;
            let (spec, w) = load_workload(&workload)?;
            let result = solve(&w.dag, &w.model, &w.est_nd, method, &spec.solver)?;
            let rec = wun_recommend(&result.front, &weights)?;
            write_json(
                &out,
                &json!({
                    "method": method.name(),
                    "weights": weights.values(),
                    "budget": result.budget,
                    "recommendation": rec,
                    "front": result.front.entries(),
                }),
            )?;
            println!("{} solutions; recommended latency {} cost {}", result.front.len(), rec.objectives.get(0), rec.objectives.get(1));
        }
        Command::Bench { config, out } => {
            let cfg = load_bench_config(&config).map_err(config_err)?;
            cfg.validate().map_err(config_err)?;
            let dir = resolve_out_dir(&out);
            std::fs::create_dir_all(&dir).with_context(|| format!("creating {}", dir.display()))?;
            let report = run_benchmark(&cfg)?;
            write_report(&report, &dir.join("report.json"), ReportFormat::Json)?;
            write_report(&report, &dir.join("report.csv"), ReportFormat::Csv)?;
            println!("{} rows written to {}", report.rows.len(), dir.display());
        }
        Command::Simulate { workload, scenario } => {
            let (spec, mut w) = load_workload(&workload)?;
            let sc = load_scenario(&scenario).map_err(config_err)?;
            sc.apply(&mut w).map_err(config_err)?;
            let method: Method = sc.method.parse().map_err(config_err)?;
            let weights = WeightVector::new(sc.weights.clone()).map_err(config_err)?;
            let result = solve(&w.dag, &w.model, &w.est_nd, method, &spec.solver)?;
            let rec = wun_recommend(&result.front, &weights)?;
            let policy = RuntimePolicy {
                prune_rules_enabled: sc.prune_rules_enabled,
                ..RuntimePolicy::with_lhs_grid(&w.model.spaces().plan, weights.clone(), sc.runtime_grid, spec.solver.seed)
            };
            let adaptive = simulate(&w.dag, &w.model, rec, &w.true_nd, &w.est_nd, &policy)?;
            let frozen = simulate_frozen(&w.dag, &w.model, rec, &w.true_nd, &w.est_nd)?;
            let summary = json!({
                "method": method.name(),
                "weights": weights.values(),
                "compile_time": { "latency": rec.objectives.get(0), "cost": rec.objectives.get(1) },
                "adaptive": trace_json(&adaptive),
                "frozen": trace_json(&frozen),
            });
            print_json(&summary)?;
        }
        Command::Oracle { workload } => {
            let (spec, w) = load_workload(&workload)?;
            let budget = spec.solver.budget.unwrap_or(SampleBudget::new(5, 4));
            let (theta_c, samples) = oracle_candidates(&w.model, budget, spec.solver.seed);
            let front = brute_force_front(&w.model, &w.est_nd, &theta_c, &samples)?;
            let summary = json!({
                "budget": budget,
                "front": front.entries(),
            });
            print_json(&summary)?;
        }
    }
    Ok(())
}

fn main() -> ExitCode {
    let cli = Cli::parse();
    match run(cli) {
        Ok(()) => ExitCode::SUCCESS,
        Err(e) => {
            eprintln!("error: {e:#}");
            ExitCode::from(exit_code(&e))
        }
    }
}
