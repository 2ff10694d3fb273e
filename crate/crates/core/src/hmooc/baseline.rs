//! Weighted-sum baselines over global samples of the full joint space.
//! One weight is the single fixed-weight baseline; several give multi-objective WS.

use std::collections::HashSet;

use serde::{Deserialize, Serialize};

use super::WeightVector;
use crate::costmodel::{predict_query, NonDecision, SubqModel};
use crate::error::{Result, TuneError};
use crate::pareto::{normalize_points, Solution};
use crate::sampling::sample_random;
use crate::space::{ConfigVector, Spaces};

/// One context plus independent plan/stage configurations for every subQ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct GlobalSample {
    pub theta_c: ConfigVector,
    pub theta_p: Vec<ConfigVector>,
    pub theta_s: Vec<ConfigVector>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct BaselineResult {
    /// One solution per weight, possibly repeated.
    pub solutions: Vec<Solution>,
    /// Number of distinct sample indices selected.
    pub distinct: usize,
}

/// `n` uniform random global samples for `m` subQs.
pub fn draw_global_samples(spaces: &Spaces, m: usize, n: usize, seed: u64) -> Vec<GlobalSample> {
    let contexts = sample_random(&spaces.context, None, n, seed);
    let plans: Vec<Vec<ConfigVector>> = (0..m)
        .map(|i| sample_random(&spaces.plan, None, n, seed.wrapping_add(1 + 2 * i as u64)))
        .collect();
    let stages: Vec<Vec<ConfigVector>> = (0..m)
        .map(|i| sample_random(&spaces.stage, None, n, seed.wrapping_add(2 + 2 * i as u64)))
        .collect();
    contexts
        .into_iter()
        .enumerate()
        .map(|(j, theta_c)| GlobalSample {
            theta_c,
            theta_p: plans.iter().map(|p| p[j].clone()).collect(),
            theta_s: stages.iter().map(|s| s[j].clone()).collect(),
        })
        .collect()
}

/// For each weight, the sample minimizing the weighted min-max-normalized
/// query objectives (ties to the lowest objectives in canonical order, then
/// the lowest sample index).
pub fn baseline_ws<M: SubqModel + ?Sized>(
    model: &M,
    nd: &NonDecision,
    weights: &[WeightVector],
    samples: &[GlobalSample],
) -> Result<BaselineResult> {
    if samples.is_empty() {
        return Err(TuneError::contract("weighted-sum baseline needs at least one sample"));
    }
    if weights.is_empty() {
        return Err(TuneError::contract("weighted-sum baseline needs at least one weight"));
    }
    let objectives = samples
        .iter()
        .map(|s| predict_query(model, &s.theta_c, &s.theta_p, &s.theta_s, nd))
        .collect::<Result<Vec<_>>>()?;
    let norm = normalize_points(objectives.iter());
    let k = objectives[0].k();

    let mut chosen = Vec::with_capacity(weights.len());
    for w in weights {
        if w.k() != k {
            return Err(TuneError::contract(format!("{}-d weight for {k} objectives", w.k())));
        }
        let score = |i: usize| -> f64 { norm[i].values().iter().zip(w.values()).map(|(v, w)| v * w).sum() };
        let best = (0..samples.len())
            .min_by(|&a, &b| {
                score(a)
                    .total_cmp(&score(b))
                    .then_with(|| objectives[a].canonical_cmp(&objectives[b]))
                    .then(a.cmp(&b))
            })
            .expect("nonempty samples");
        chosen.push(best);
    }
    let distinct = chosen.iter().collect::<HashSet<_>>().len();
    let solutions = chosen
        .into_iter()
        .map(|i| Solution {
            objectives: objectives[i].clone(),
            theta_c: samples[i].theta_c.clone(),
            theta_p: samples[i].theta_p.clone(),
            theta_s: samples[i].theta_s.clone(),
        })
        .collect();
    Ok(BaselineResult { solutions, distinct })
}
