use std::path::Path;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::costmodel::{CostModel, ModelConstants, NonDecision, Prices, Skew, SubqConstants};
use crate::error::{Result, TuneError};
use crate::hmooc::{QueryDAG, SolveConfig, SubQ, SubqRole};
use crate::space::Spaces;

/// Parameters of one synthetic query instance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct WorkloadSpec {
    pub seed: u64,
    /// Number of subQs.
    pub m: usize,
    /// Probability that a non-first subQ is a join.
    pub join_fraction: f64,
    /// Input rows per subQ are log-uniform in this range.
    pub alpha_min: f64,
    pub alpha_max: f64,
    /// Task-seconds per row, log-uniform.
    pub work_min: f64,
    pub work_max: f64,
    pub shuffle_bytes_per_row_min: f64,
    pub shuffle_bytes_per_row_max: f64,
    pub build_bytes_per_row_min: f64,
    pub build_bytes_per_row_max: f64,
    /// Upper bound of the per-subQ skew ratio (uniform from 0).
    pub max_skew: f64,
    /// Estimated rows are `alpha · 2^e` with `e` uniform in [-E, E].
    pub estimation_error: f64,
    pub constants: ModelConstants,
    pub prices: Prices,
    /// Solver settings used by `solve`, `simulate` and `oracle`.
    pub solver: SolveConfig,
}

impl Default for WorkloadSpec {
    fn default() -> Self {
        WorkloadSpec {
            seed: 42,
            m: 6,
            join_fraction: 0.5,
            alpha_min: 1.0e5,
            alpha_max: 1.0e8,
            work_min: 1.0e-6,
            work_max: 1.0e-5,
            shuffle_bytes_per_row_min: 20.0,
            shuffle_bytes_per_row_max: 200.0,
            build_bytes_per_row_min: 10.0,
            build_bytes_per_row_max: 100.0,
            max_skew: 0.0,
            estimation_error: 2.0,
            constants: ModelConstants::default(),
            prices: Prices::default(),
            solver: SolveConfig::default(),
        }
    }
}

impl WorkloadSpec {
    pub fn validate(&self) -> Result<()> {
        if self.m == 0 {
            return Err(TuneError::config("m must be at least 1"));
        }
        if !(0.0..=1.0).contains(&self.join_fraction) {
            return Err(TuneError::config("join_fraction must be in [0, 1]"));
        }
        let ranges = [
            ("alpha", self.alpha_min, self.alpha_max),
            ("work", self.work_min, self.work_max),
            ("shuffle_bytes_per_row", self.shuffle_bytes_per_row_min, self.shuffle_bytes_per_row_max),
            ("build_bytes_per_row", self.build_bytes_per_row_min, self.build_bytes_per_row_max),
        ];
        for (name, lo, hi) in ranges {
            if !(lo > 0.0 && lo <= hi && hi.is_finite()) {
                return Err(TuneError::config(format!("{name} range must satisfy 0 < min <= max")));
            }
        }
        if !(self.max_skew >= 0.0 && self.max_skew.is_finite()) {
            return Err(TuneError::config("max_skew must be finite and >= 0"));
        }
        if !(self.estimation_error >= 0.0 && self.estimation_error.is_finite()) {
            return Err(TuneError::config("estimation_error must be finite and >= 0"));
        }
        Ok(())
    }
}

/// A generated instance: DAG, model, and true / estimated non-decision inputs.
#[derive(Debug, Clone)]
pub struct Workload {
    pub dag: QueryDAG,
    pub model: CostModel,
    pub true_nd: NonDecision,
    pub est_nd: NonDecision,
}

fn log_uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    if lo == hi {
        return lo;
    }
    (lo.ln() + rng.gen::<f64>() * (hi.ln() - lo.ln())).exp()
}

fn uniform(rng: &mut ChaCha8Rng, lo: f64, hi: f64) -> f64 {
    lo + rng.gen::<f64>() * (hi - lo)
}

/// Deterministic synthetic instance. SubQ 0 is a scan; a join consumes the two
/// most recent unconsumed outputs, other operators the most recent one.
pub fn gen_workload(spec: &WorkloadSpec) -> Result<Workload> {
    spec.validate()?;
    let mut rng = ChaCha8Rng::seed_from_u64(spec.seed);
    let mut subqs = Vec::with_capacity(spec.m);
    let mut pending: Vec<usize> = Vec::new();
    for i in 0..spec.m {
        let role = if i == 0 {
            SubqRole::Scan
        } else if rng.gen::<f64>() < spec.join_fraction {
            SubqRole::Join
        } else if rng.gen_bool(0.5) {
            SubqRole::Scan
        } else {
            SubqRole::Other
        };
        let take = match role {
            SubqRole::Scan => 0,
            SubqRole::Join => 2.min(pending.len()),
            SubqRole::Other => 1.min(pending.len()),
        };
        let children = pending.split_off(pending.len() - take);
        pending.push(i);
        subqs.push(SubQ { id: i, role, children });
    }
    let dag = QueryDAG::new(subqs)?;

    let mut constants = Vec::with_capacity(spec.m);
    let mut alpha = Vec::with_capacity(spec.m);
    let mut beta = Vec::with_capacity(spec.m);
    for i in 0..spec.m {
        constants.push(SubqConstants {
            work: log_uniform(&mut rng, spec.work_min, spec.work_max),
            shuffle_bytes_per_row: uniform(&mut rng, spec.shuffle_bytes_per_row_min, spec.shuffle_bytes_per_row_max),
            base_overhead: uniform(&mut rng, 0.2, 2.0),
            build_bytes_per_row: dag
                .is_join(i)
                .then(|| uniform(&mut rng, spec.build_bytes_per_row_min, spec.build_bytes_per_row_max)),
        });
        alpha.push(log_uniform(&mut rng, spec.alpha_min, spec.alpha_max).round().max(1.0));
        beta.push(Skew {
            skew_ratio: uniform(&mut rng, 0.0, spec.max_skew),
            ..Skew::default()
        });
    }
    let est_alpha: Vec<f64> = alpha
        .iter()
        .map(|a| {
            let e = uniform(&mut rng, -spec.estimation_error, spec.estimation_error);
            a * e.exp2()
        })
        .collect();

    let model = CostModel::new(Spaces::spark_default(), constants, spec.constants.clone(), spec.prices.clone(), spec.seed)?;
    let true_nd = NonDecision {
        alpha,
        beta: beta.clone(),
        gamma: 0.0,
    };
    let est_nd = NonDecision {
        alpha: est_alpha,
        beta,
        gamma: 0.0,
    };
    Ok(Workload {
        dag,
        model,
        true_nd,
        est_nd,
    })
}

fn read(path: &Path) -> Result<String> {
    std::fs::read_to_string(path).map_err(|e| TuneError::io(path, e))
}

pub fn load_workload_spec(path: &Path) -> Result<WorkloadSpec> {
    let spec: WorkloadSpec = toml::from_str(&read(path)?)
        .map_err(|e| TuneError::config(format!("{}: {e}", path.display())))?;
    spec.validate()?;
    Ok(spec)
}

/// Replaces generated cardinalities of one subQ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
pub struct CardinalityOverride {
    pub subq: usize,
    pub true_alpha: Option<f64>,
    pub estimated_alpha: Option<f64>,
}

/// Runtime scenario: cardinality overrides plus the recommendation weights.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default, deny_unknown_fields)]
pub struct Scenario {
    pub weights: Vec<f64>,
    pub method: String,
    pub prune_rules_enabled: bool,
    pub runtime_grid: usize,
    pub overrides: Vec<CardinalityOverride>,
}

impl Default for Scenario {
    fn default() -> Self {
        Scenario {
            weights: vec![0.5, 0.5],
            method: "HMOOC3".into(),
            prune_rules_enabled: true,
            runtime_grid: 30,
            overrides: Vec::new(),
        }
    }
}

impl Scenario {
    pub fn apply(&self, w: &mut Workload) -> Result<()> {
        let m = w.dag.len();
        for o in &self.overrides {
            if o.subq >= m {
                return Err(TuneError::config(format!("scenario overrides unknown subQ {}", o.subq)));
            }
            for (v, target) in [(o.true_alpha, &mut w.true_nd.alpha), (o.estimated_alpha, &mut w.est_nd.alpha)] {
                if let Some(v) = v {
                    if !(v > 0.0 && v.is_finite()) {
                        return Err(TuneError::config("scenario cardinalities must be finite and > 0"));
                    }
                    target[o.subq] = v;
                }
            }
        }
        Ok(())
    }
}

pub fn load_scenario(path: &Path) -> Result<Scenario> {
    toml::from_str(&read(path)?).map_err(|e| TuneError::config(format!("{}: {e}", path.display())))
}
