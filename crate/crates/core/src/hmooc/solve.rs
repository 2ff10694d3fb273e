//! End-to-end compile-time solve: sampling, subQ tuning, context clustering and
//! crossover, per-context DAG aggregation, and the union across contexts.

use std::str::FromStr;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use super::aggregate::{agg_boundary, agg_divide_conquer, agg_ws, Composite, WsNormalization};
use super::dag::QueryDAG;
use super::effective::{assign_opt_p, enrich_and_extend, subq_tune, EffectiveSet, PlanSample, ThetaCEntry};
use super::{WeightVector, DEFAULT_WEIGHT_COUNT};
use crate::costmodel::{group_fis, predict_query, FisReport, FisTarget, NonDecision, SubqModel};
use crate::error::{Result, TuneError};
use crate::pareto::{pareto_filter, HasObjectives, ObjectiveVector, ParetoSet, Solution};
use crate::sampling::{
    cluster_thetac, crossover_enrich, sample_adaptive_grid, sample_lhs, sample_random, BudgetRule, ClusterModel,
    SampleBudget,
};
use crate::space::{ConfigSpace, ConfigVector, Group};

/// DAG aggregation method.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub enum Method {
    /// Full front by divide-and-conquer merging.
    #[serde(rename = "HMOOC1")]
    Hmooc1,
    /// Weighted-sum picks per weight vector.
    #[serde(rename = "HMOOC2")]
    Hmooc2,
    /// Per-objective boundary points.
    #[serde(rename = "HMOOC3")]
    Hmooc3,
}

impl Method {
    pub fn name(self) -> &'static str {
        match self {
            Method::Hmooc1 => "HMOOC1",
            Method::Hmooc2 => "HMOOC2",
            Method::Hmooc3 => "HMOOC3",
        }
    }
}

impl FromStr for Method {
    type Err = TuneError;

    fn from_str(s: &str) -> Result<Self> {
        match s.to_ascii_uppercase().as_str() {
            "HMOOC1" => Ok(Method::Hmooc1),
            "HMOOC2" => Ok(Method::Hmooc2),
            "HMOOC3" => Ok(Method::Hmooc3),
            _ => Err(TuneError::config(format!("unknown method {s:?}"))),
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SamplerKind {
    Random,
    Lhs,
    AdaptiveGrid,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct SolveConfig {
    pub sampler: SamplerKind,
    /// Fixed budget; `None` picks a tier from the predicted default latency.
    pub budget: Option<SampleBudget>,
    pub budget_rule: BudgetRule,
    /// Upper bound on the number of context clusters.
    pub clusters: usize,
    /// Crossover split point in the context vector; `None` disables crossover.
    pub crossover_location: Option<usize>,
    /// Cumulative importance threshold for parameter filtering; `None` keeps all.
    pub fis_threshold: Option<f64>,
    pub fis_samples: usize,
    /// Number of evenly spaced weights for the weighted-sum aggregation.
    pub weight_count: usize,
    pub ws_normalization: WsNormalization,
    pub seed: u64,
}

impl Default for SolveConfig {
    fn default() -> Self {
        SolveConfig {
            sampler: SamplerKind::AdaptiveGrid,
            budget: None,
            budget_rule: BudgetRule::default(),
            clusters: 10,
            crossover_location: Some(3),
            fis_threshold: Some(0.05),
            fis_samples: 100,
            weight_count: DEFAULT_WEIGHT_COUNT,
            ws_normalization: WsNormalization::SharedScale,
            seed: 0,
        }
    }
}

/// Solver output with the intermediate state needed to audit it.
#[derive(Debug, Clone)]
pub struct SolveOutput {
    pub front: ParetoSet<Solution>,
    pub effective: EffectiveSet,
    /// Plan/stage samples per subQ.
    pub samples: Vec<Vec<PlanSample>>,
    /// Sampled context candidates, deduplicated, before crossover.
    pub theta_c_candidates: Vec<ConfigVector>,
    pub cluster: ClusterModel,
    pub budget: SampleBudget,
    pub context_fis: Option<FisReport>,
    pub plan_fis: Option<FisReport>,
}

fn derive_seed(seed: u64, tag: u64) -> u64 {
    let mut z = seed ^ tag.wrapping_mul(0x9e37_79b9_7f4a_7c15);
    z = (z ^ (z >> 30)).wrapping_mul(0xbf58_476d_1ce4_e5b9);
    z = (z ^ (z >> 27)).wrapping_mul(0x94d0_49bb_1331_11eb);
    z ^ (z >> 31)
}

fn dedup(cands: Vec<ConfigVector>) -> Vec<ConfigVector> {
    let mut seen = std::collections::HashSet::new();
    cands.into_iter().filter(|c| seen.insert(c.key())).collect()
}

fn check_instance<M: SubqModel + ?Sized>(dag: &QueryDAG, model: &M, nd: &NonDecision) -> Result<()> {
    if dag.len() != model.num_subqs() {
        return Err(TuneError::contract(format!(
            "DAG has {} subQs, model has {}",
            dag.len(),
            model.num_subqs()
        )));
    }
    nd.validate(dag.len())
}

/// Predicted query latency with every parameter at its default.
pub fn default_latency<M: SubqModel + ?Sized>(model: &M, nd: &NonDecision) -> Result<f64> {
    let sp = model.spaces();
    let m = model.num_subqs();
    let q = predict_query(
        model,
        &sp.context.defaults(),
        &vec![sp.plan.defaults(); m],
        &vec![sp.stage.defaults(); m],
        nd,
    )?;
    Ok(q.get(0))
}

/// Samples candidates per `cfg` and runs the solver on them.
pub fn solve<M: SubqModel + ?Sized>(
    dag: &QueryDAG,
    model: &M,
    nd: &NonDecision,
    method: Method,
    cfg: &SolveConfig,
) -> Result<SolveOutput> {
    check_instance(dag, model, nd)?;
    let sp = model.spaces();
    let m = model.num_subqs();
    let budget = match cfg.budget {
        Some(b) => b,
        None => cfg.budget_rule.choose(default_latency(model, nd)?),
    };
    let joint = ConfigSpace::joint(&sp.plan, &sp.stage);

    let (ctx_fis, plan_fis) = match cfg.fis_threshold {
        Some(th) => (
            Some(group_fis(model, FisTarget::Context, nd, cfg.fis_samples, derive_seed(cfg.seed, 1))?.filtered(th)?),
            Some(group_fis(model, FisTarget::PlanStage, nd, cfg.fis_samples, derive_seed(cfg.seed, 2))?.filtered(th)?),
        ),
        None => (None, None),
    };
    let ctx_keep = ctx_fis.as_ref().map(|f| f.keep_mask.as_slice());
    let plan_keep = plan_fis.as_ref().map(|f| f.keep_mask.as_slice());

    let theta_c = match cfg.sampler {
        SamplerKind::Random => sample_random(&sp.context, ctx_keep, budget.n_c, derive_seed(cfg.seed, 3)),
        SamplerKind::Lhs => sample_lhs(&sp.context, ctx_keep, budget.n_c, derive_seed(cfg.seed, 3)),
        SamplerKind::AdaptiveGrid => {
            let report = ctx_fis.clone().unwrap_or_else(|| FisReport::uniform(&sp.context));
            sample_adaptive_grid(&sp.context, &report, budget.n_c)
        }
    };
    let grid = match cfg.sampler {
        SamplerKind::AdaptiveGrid => {
            let report = plan_fis.clone().unwrap_or_else(|| FisReport::uniform(&joint));
            Some(sample_adaptive_grid(&joint, &report, budget.n_p))
        }
        _ => None,
    };
    let split = sp.plan.len();
    let samples: Vec<Vec<PlanSample>> = (0..m)
        .map(|i| {
            let seed = derive_seed(cfg.seed, 100 + i as u64);
            let joint_samples = match cfg.sampler {
                SamplerKind::Random => sample_random(&joint, plan_keep, budget.n_p, seed),
                SamplerKind::Lhs => sample_lhs(&joint, plan_keep, budget.n_p, seed),
                SamplerKind::AdaptiveGrid => grid.clone().expect("grid sampled"),
            };
            joint_samples
                .into_iter()
                .map(|cv| PlanSample {
                    theta_p: ConfigVector::new(Group::Plan, cv.coords[..split].to_vec()),
                    theta_s: ConfigVector::new(Group::Stage, cv.coords[split..].to_vec()),
                })
                .collect()
        })
        .collect();

    let mut out = solve_with_candidates(dag, model, nd, method, cfg, theta_c, samples)?;
    out.budget = budget;
    out.context_fis = ctx_fis;
    out.plan_fis = plan_fis;
    Ok(out)
}

/// Runs the solver on explicit context candidates and per-subQ plan/stage samples.
pub fn solve_with_candidates<M: SubqModel + ?Sized>(
    dag: &QueryDAG,
    model: &M,
    nd: &NonDecision,
    method: Method,
    cfg: &SolveConfig,
    theta_c: Vec<ConfigVector>,
    samples: Vec<Vec<PlanSample>>,
) -> Result<SolveOutput> {
    check_instance(dag, model, nd)?;
    let sp = model.spaces();
    let candidates = dedup(theta_c);
    if candidates.is_empty() {
        return Err(TuneError::contract("no context candidates"));
    }
    let c = cfg.clusters.clamp(1, candidates.len());
    let cluster = cluster_thetac(&sp.context, &candidates, c, derive_seed(cfg.seed, 4))?;
    let reps = subq_tune(model, &cluster.representatives, &samples, nd)?;
    let mut effective = assign_opt_p(model, &reps, &cluster, &candidates, nd)?;
    if let Some(loc) = cfg.crossover_location {
        let crossed = crossover_enrich(&candidates, loc)?;
        effective = enrich_and_extend(model, &effective, &cluster, &crossed, nd)?;
    }

    let weights = WeightVector::evenly_spaced(cfg.weight_count);
    let per_context = effective
        .entries()
        .par_iter()
        .enumerate()
        .map(|(e, entry)| {
            let local = aggregate_entry(entry, method, &weights, cfg.ws_normalization)?;
            Ok(local.into_entries().into_iter().map(|c| Tagged { entry: e, composite: c }).collect())
        })
        .collect::<Result<Vec<Vec<Tagged>>>>()?;
    let union = pareto_filter(per_context.into_iter().flatten().collect());
    let front = union.map(|t| {
        let entry = &effective.entries()[t.entry];
        Solution {
            objectives: t.composite.objectives,
            theta_c: entry.theta_c.clone(),
            theta_p: t.composite.picks.iter().enumerate().map(|(i, &p)| entry.per_subq[i][p].theta_p.clone()).collect(),
            theta_s: t.composite.picks.iter().enumerate().map(|(i, &p)| entry.per_subq[i][p].theta_s.clone()).collect(),
        }
    });

    Ok(SolveOutput {
        front,
        effective,
        samples,
        theta_c_candidates: candidates,
        cluster,
        budget: SampleBudget::new(1, 1),
        context_fis: None,
        plan_fis: None,
    })
}

/// Query-level front of one context entry under `method`.
pub fn aggregate_entry(
    entry: &ThetaCEntry,
    method: Method,
    weights: &[WeightVector],
    normalization: WsNormalization,
) -> Result<ParetoSet<Composite>> {
    match method {
        Method::Hmooc1 => agg_divide_conquer(&entry.per_subq),
        Method::Hmooc2 => agg_ws(&entry.per_subq, weights, normalization),
        Method::Hmooc3 => agg_boundary(&entry.per_subq),
    }
}

struct Tagged {
    entry: usize,
    composite: Composite,
}

impl HasObjectives for Tagged {
    fn objectives(&self) -> &ObjectiveVector {
        &self.composite.objectives
    }
}
