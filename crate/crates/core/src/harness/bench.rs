use std::path::Path;
use std::str::FromStr;
use std::time::Instant;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::report::round_sig;
use super::workload::{gen_workload, Workload, WorkloadSpec};
use crate::costmodel::{predict_query, SubqModel};
use crate::error::{Result, TuneError};
use crate::hmooc::{baseline_ws, draw_global_samples, solve, wun_recommend, Method, SolveConfig, WeightVector};
use crate::pareto::{hypervolume, pareto_filter, ObjectiveVector, ParetoSet, Solution};
use crate::runtime::{simulate, RuntimePolicy, Trace};

pub const REPORT_SCHEMA_VERSION: u32 = 1;

/// A benchmarked method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash)]
pub enum BenchMethod {
    Hmooc(Method),
    /// Weighted sum over global samples with evenly spaced weights.
    MoWs,
    /// Weighted sum with one fixed weight.
    SoFw,
}

impl BenchMethod {
    pub fn name(self) -> &'static str {
        match self {
            BenchMethod::Hmooc(m) => m.name(),
            BenchMethod::MoWs => "MO-WS",
            BenchMethod::SoFw => "SO-FW",
        }
    }
}

impl FromStr for BenchMethod {
    type Err = TuneError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "MO-WS" => Ok(BenchMethod::MoWs),
            "SO-FW" => Ok(BenchMethod::SoFw),
            _ => s.parse::<Method>().map(BenchMethod::Hmooc),
        }
    }
}

/// Benchmark configuration (TOML).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct BenchConfig {
    /// Any of HMOOC1, HMOOC2, HMOOC3, MO-WS, SO-FW.
    pub methods: Vec<String>,
    /// Solver seeds; every instance runs once per seed.
    pub seeds: Vec<u64>,
    /// Recommendation weights, one WUN pick and one runtime replay each.
    pub weights: Vec<Vec<f64>>,
    /// Number of evenly spaced weights for MO-WS.
    pub ws_weight_count: usize,
    /// The single SO-FW weight.
    pub so_fw_weight: Vec<f64>,
    /// Global samples per baseline run.
    pub global_samples: usize,
    /// Plan configurations the runtime re-optimizer may choose from.
    pub runtime_grid: usize,
    pub prune_rules_enabled: bool,
    pub solver: SolveConfig,
    pub instances: Vec<WorkloadSpec>,
}

impl Default for BenchConfig {
    fn default() -> Self {
        BenchConfig {
            methods: vec!["HMOOC1".into(), "HMOOC2".into(), "HMOOC3".into(), "MO-WS".into(), "SO-FW".into()],
            seeds: vec![0],
            weights: vec![vec![0.5, 0.5], vec![0.9, 0.1]],
            ws_weight_count: crate::hmooc::DEFAULT_WEIGHT_COUNT,
            so_fw_weight: vec![0.5, 0.5],
            global_samples: 1000,
            runtime_grid: 30,
            prune_rules_enabled: true,
            solver: SolveConfig::default(),
            instances: vec![WorkloadSpec::default()],
        }
    }
}

impl BenchConfig {
    /// Parses method names and weights; every error here is a configuration error.
    pub fn validate(&self) -> Result<(Vec<BenchMethod>, Vec<WeightVector>, WeightVector)> {
        let methods = self
            .methods
            .iter()
            .map(|m| m.parse::<BenchMethod>())
            .collect::<Result<Vec<_>>>()?;
        if methods.is_empty() || self.seeds.is_empty() || self.instances.is_empty() {
            return Err(TuneError::config("methods, seeds and instances must be nonempty"));
        }
        let weight = |w: &Vec<f64>| {
            WeightVector::new(w.clone()).map_err(|e| TuneError::config(format!("bad weight {w:?}: {e}")))
        };
        let weights = self.weights.iter().map(weight).collect::<Result<Vec<_>>>()?;
        if weights.is_empty() || weights.iter().any(|w| w.k() != 2) {
            return Err(TuneError::config("weights must be a nonempty list of 2-d vectors"));
        }
        let so_fw = weight(&self.so_fw_weight)?;
        if self.global_samples == 0 || self.ws_weight_count == 0 {
            return Err(TuneError::config("global_samples and ws_weight_count must be positive"));
        }
        for spec in &self.instances {
            spec.validate()?;
        }
        Ok((methods, weights, so_fw))
    }
}

pub fn load_bench_config(path: &Path) -> Result<BenchConfig> {
    let text = std::fs::read_to_string(path).map_err(|e| TuneError::io(path, e))?;
    toml::from_str(&text).map_err(|e| TuneError::config(format!("{}: {e}", path.display())))
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct TraceSummary {
    pub latency: f64,
    pub cost: f64,
    pub requests_sent: usize,
    pub requests_pruned: usize,
    pub plan_changes: usize,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Recommendation {
    pub weights: Vec<f64>,
    /// Predicted objectives of the recommended configuration.
    pub latency: f64,
    pub cost: f64,
    /// Percent reduction against the all-defaults configuration.
    pub latency_reduction_pct: f64,
    pub cost_reduction_pct: f64,
    pub runtime: TraceSummary,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ReportRow {
    pub instance: usize,
    pub seed: u64,
    pub method: String,
    pub hypervolume: f64,
    /// Wall-clock solving time; the only nondeterministic field.
    pub solve_ms: f64,
    pub front_size: usize,
    /// Distinct solutions returned (weighted-sum baselines only).
    pub distinct_solutions: Option<usize>,
    pub recommendations: Vec<Recommendation>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BenchmarkReport {
    pub schema_version: u32,
    pub config: BenchConfig,
    /// Hypervolume reference point per instance.
    pub reference_points: Vec<Vec<f64>>,
    pub rows: Vec<ReportRow>,
}

struct Cell {
    instance: usize,
    seed: u64,
    method: BenchMethod,
    front: ParetoSet<Solution>,
    distinct: Option<usize>,
    solve_ms: f64,
}

fn run_cell(
    w: &Workload,
    cfg: &BenchConfig,
    method: BenchMethod,
    seed: u64,
    so_fw: &WeightVector,
) -> Result<(ParetoSet<Solution>, Option<usize>, f64)> {
    let start = Instant::now();
    let (front, distinct) = match method {
        BenchMethod::Hmooc(m) => {
            let solver = SolveConfig {
                seed,
                ..cfg.solver.clone()
            };
            (solve(&w.dag, &w.model, &w.est_nd, m, &solver)?.front, None)
        }
        BenchMethod::MoWs | BenchMethod::SoFw => {
            let weights = if method == BenchMethod::MoWs {
                WeightVector::evenly_spaced(cfg.ws_weight_count)
            } else {
                vec![so_fw.clone()]
            };
            let samples = draw_global_samples(w.model.spaces(), w.dag.len(), cfg.global_samples, seed);
            let r = baseline_ws(&w.model, &w.est_nd, &weights, &samples)?;
            (pareto_filter(r.solutions), Some(r.distinct))
        }
    };
    Ok((front, distinct, start.elapsed().as_secs_f64() * 1e3))
}

fn reduction_pct(value: f64, default: f64) -> f64 {
    round_sig(100.0 * (1.0 - value / default), 9)
}

fn summarize(t: &Trace) -> TraceSummary {
    TraceSummary {
        latency: round_sig(t.latency, 9),
        cost: round_sig(t.cost, 9),
        requests_sent: t.requests_sent,
        requests_pruned: t.requests_pruned,
        plan_changes: t.plan_changes,
    }
}

/// Runs every (instance, seed, method) cell in parallel and assembles the
/// report in (instance, seed, method) order.
pub fn run_benchmark(cfg: &BenchConfig) -> Result<BenchmarkReport> {
    let (methods, weights, so_fw) = cfg.validate()?;
    let workloads = cfg.instances.iter().map(gen_workload).collect::<Result<Vec<_>>>()?;

    let mut jobs = Vec::new();
    for instance in 0..workloads.len() {
        for &seed in &cfg.seeds {
            for &method in &methods {
                jobs.push((instance, seed, method));
            }
        }
    }
    let cells = jobs
        .par_iter()
        .map(|&(instance, seed, method)| {
            let (front, distinct, solve_ms) = run_cell(&workloads[instance], cfg, method, seed, &so_fw)?;
            Ok(Cell {
                instance,
                seed,
                method,
                front,
                distinct,
                solve_ms,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    let reference_points: Vec<ObjectiveVector> = (0..workloads.len())
        .map(|i| {
            let mut hi = [f64::NEG_INFINITY; 2];
            for c in cells.iter().filter(|c| c.instance == i) {
                for s in c.front.iter() {
                    for (h, v) in hi.iter_mut().zip(s.objectives.values()) {
                        *h = h.max(*v);
                    }
                }
            }
            ObjectiveVector::new(hi.iter().map(|h| h * 1.1).collect())
        })
        .collect::<Result<Vec<_>>>()?;

    let rows = cells
        .par_iter()
        .map(|c| {
            let w = &workloads[c.instance];
            let sp = w.model.spaces();
            let m = w.dag.len();
            let default = predict_query(
                &w.model,
                &sp.context.defaults(),
                &vec![sp.plan.defaults(); m],
                &vec![sp.stage.defaults(); m],
                &w.est_nd,
            )?;
            let recommendations = weights
                .iter()
                .map(|wv| {
                    let rec = wun_recommend(&c.front, wv)?;
                    let policy = RuntimePolicy {
                        prune_rules_enabled: cfg.prune_rules_enabled,
                        ..RuntimePolicy::with_lhs_grid(&sp.plan, wv.clone(), cfg.runtime_grid, c.seed)
                    };
                    let trace = simulate(&w.dag, &w.model, rec, &w.true_nd, &w.est_nd, &policy)?;
                    Ok(Recommendation {
                        weights: wv.values().to_vec(),
                        latency: round_sig(rec.objectives.get(0), 9),
                        cost: round_sig(rec.objectives.get(1), 9),
                        latency_reduction_pct: reduction_pct(rec.objectives.get(0), default.get(0)),
                        cost_reduction_pct: reduction_pct(rec.objectives.get(1), default.get(1)),
                        runtime: summarize(&trace),
                    })
                })
                .collect::<Result<Vec<_>>>()?;
            Ok(ReportRow {
                instance: c.instance,
                seed: c.seed,
                method: c.method.name().to_string(),
                hypervolume: round_sig(hypervolume(&c.front, &reference_points[c.instance])?, 9),
                solve_ms: round_sig(c.solve_ms, 9),
                front_size: c.front.len(),
                distinct_solutions: c.distinct,
                recommendations,
            })
        })
        .collect::<Result<Vec<_>>>()?;

    Ok(BenchmarkReport {
        schema_version: REPORT_SCHEMA_VERSION,
        config: cfg.clone(),
        reference_points: reference_points
            .iter()
            .map(|r| r.values().iter().map(|v| round_sig(*v, 9)).collect())
            .collect(),
        rows,
    })
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::sampling::SampleBudget;

    /// Method names in a report, deduplicated in order.
    fn method_names(report: &BenchmarkReport) -> Vec<String> {
        let mut seen = std::collections::HashSet::new();
        report.rows.iter().filter(|r| seen.insert(r.method.clone())).map(|r| r.method.clone()).collect()
    }

    fn small() -> BenchConfig {
        BenchConfig {
            global_samples: 200,
            solver: SolveConfig {
                budget: Some(SampleBudget::new(8, 12)),
                ..SolveConfig::default()
            },
            instances: vec![WorkloadSpec { m: 4, ..WorkloadSpec::default() }],
            ..BenchConfig::default()
        }
    }

    #[test]
    fn single_method_single_row() {
        let cfg = BenchConfig {
            methods: vec!["HMOOC1".into()],
            ..small()
        };
        let r = run_benchmark(&cfg).unwrap();
        assert_eq!(r.rows.len(), 1);
        assert_eq!(r.rows[0].recommendations.len(), 2);
        assert!(r.rows[0].hypervolume > 0.0);
    }

    #[test]
    fn unknown_method_is_config_error() {
        let cfg = BenchConfig {
            methods: vec!["HMOOC1".into(), "EVO".into()],
            ..small()
        };
        assert!(run_benchmark(&cfg).unwrap_err().is_config_error());
    }

    #[test]
    fn ordering_and_pigeonhole() {
        let r = run_benchmark(&small()).unwrap();
        assert_eq!(r.rows.len(), 5);
        let hv = |m: &str| r.rows.iter().find(|x| x.method == m).unwrap().hypervolume;
        assert!(hv("HMOOC1") >= hv("HMOOC2"));
        assert!(hv("HMOOC1") >= hv("HMOOC3"));
        let ws = r.rows.iter().find(|x| x.method == "MO-WS").unwrap();
        assert!(ws.distinct_solutions.unwrap() <= 11);
        assert_eq!(method_names(&r), vec!["HMOOC1", "HMOOC2", "HMOOC3", "MO-WS", "SO-FW"]);
    }
}
