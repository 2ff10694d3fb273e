//! The hierarchical solver: subQ tuning under a shared context, DAG
//! aggregation, recommendation, and the weighted-sum baselines.

mod aggregate;
mod baseline;
mod dag;
mod effective;
mod solve;
mod wun;

pub use aggregate::{
    agg_boundary, agg_divide_conquer, agg_ws, merge_fronts, ws_composite, Composite, WsNormalization,
};
pub use baseline::{baseline_ws, draw_global_samples, BaselineResult, GlobalSample};
pub use dag::{QueryDAG, SubQ, SubqRole};
pub use effective::{assign_opt_p, enrich_and_extend, subq_tune, EffectiveSet, PlanChoice, PlanSample, ThetaCEntry};
pub use solve::{
    aggregate_entry, default_latency, solve, solve_with_candidates, Method, SamplerKind, SolveConfig, SolveOutput,
};
pub use wun::{wun_index, wun_recommend};

use serde::{Deserialize, Serialize};

use crate::error::{Result, TuneError};

/// Nonnegative objective weights summing to 1.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "Vec<f64>", into = "Vec<f64>")]
pub struct WeightVector(Vec<f64>);

impl WeightVector {
    pub fn new(w: Vec<f64>) -> Result<Self> {
        if w.is_empty() || w.iter().any(|v| !(v.is_finite() && *v >= 0.0)) {
            return Err(TuneError::contract(format!("weights must be finite and >= 0: {w:?}")));
        }
        let sum: f64 = w.iter().sum();
        if (sum - 1.0).abs() > 1e-9 {
            return Err(TuneError::contract(format!("weights must sum to 1, got {sum}")));
        }
        Ok(WeightVector(w))
    }

    pub fn pair(w1: f64) -> Result<Self> {
        Self::new(vec![w1, 1.0 - w1])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn k(&self) -> usize {
        self.0.len()
    }

    /// `n` two-objective weights with w1 in {0, 1/(n-1), ..., 1}; n = 1 gives (0.5, 0.5).
    pub fn evenly_spaced(n: usize) -> Vec<WeightVector> {
        match n {
            0 => Vec::new(),
            1 => vec![WeightVector(vec![0.5, 0.5])],
            _ => (0..n)
                .map(|i| {
                    let w1 = i as f64 / (n - 1) as f64;
                    WeightVector(vec![w1, 1.0 - w1])
                })
                .collect(),
        }
    }
}

impl TryFrom<Vec<f64>> for WeightVector {
    type Error = TuneError;

    fn try_from(w: Vec<f64>) -> Result<Self> {
        WeightVector::new(w)
    }
}

impl From<WeightVector> for Vec<f64> {
    fn from(w: WeightVector) -> Self {
        w.0
    }
}

/// Default number of weight vectors for the weighted-sum methods.
pub const DEFAULT_WEIGHT_COUNT: usize = 11;
