//! Permutation feature importance over one parameter group.

use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use serde::{Deserialize, Serialize};

use crate::error::{Result, TuneError};
use crate::pareto::ObjectiveVector;
use crate::sampling::sample_lhs;
use crate::space::{ConfigSpace, ConfigVector};

/// Per-parameter permutation importance.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct FisReport {
    pub names: Vec<String>,
    /// Mean relative prediction error after shuffling the parameter's column.
    pub scores: Vec<f64>,
    /// Scores clipped at 0 and scaled to sum to 1.
    pub normalized: Vec<f64>,
    /// Plan-structure flags copied from the space; such parameters are always kept.
    pub structural: Vec<bool>,
    pub keep_mask: Vec<bool>,
}

impl FisReport {
    /// A report that keeps every parameter with equal weight.
    pub fn uniform(space: &ConfigSpace) -> Self {
        let d = space.len();
        FisReport {
            names: space.dims.iter().map(|p| p.name.clone()).collect(),
            scores: vec![0.0; d],
            normalized: vec![1.0 / d as f64; d],
            structural: space.dims.iter().map(|p| p.important).collect(),
            keep_mask: vec![true; d],
        }
    }

    pub fn from_scores(space: &ConfigSpace, scores: Vec<f64>) -> Self {
        let d = space.len();
        assert_eq!(scores.len(), d, "one score per parameter");
        let total: f64 = scores.iter().map(|s| s.max(0.0)).sum();
        let normalized = if total > 0.0 {
            scores.iter().map(|s| s.max(0.0) / total).collect()
        } else {
            vec![1.0 / d as f64; d]
        };
        FisReport {
            names: space.dims.iter().map(|p| p.name.clone()).collect(),
            scores,
            normalized,
            structural: space.dims.iter().map(|p| p.important).collect(),
            keep_mask: vec![true; d],
        }
    }

    /// Applies [`fis_filter`] and stores the mask.
    pub fn filtered(mut self, cumulative_threshold: f64) -> Result<Self> {
        self.keep_mask = fis_filter(&self, cumulative_threshold)?;
        Ok(self)
    }
}

/// Permutation importance of every dimension of `space` for `predict`.
///
/// The design is a Latin hypercube of `n_samples` points. For each parameter,
/// its column is shuffled and the mean relative error against the unshuffled
/// predictions (averaged over samples and objectives) is the score.
pub fn permutation_fis<F>(space: &ConfigSpace, predict: F, n_samples: usize, seed: u64) -> Result<FisReport>
where
    F: Fn(&ConfigVector) -> Result<ObjectiveVector>,
{
    if n_samples < 50 {
        return Err(TuneError::contract("permutation importance needs at least 50 samples"));
    }
    let design = sample_lhs(space, None, n_samples, seed);
    let truth = design.iter().map(&predict).collect::<Result<Vec<_>>>()?;

    let mut scores = Vec::with_capacity(space.len());
    for dim in 0..space.len() {
        let mut rng = ChaCha8Rng::seed_from_u64(seed ^ (0x9e37_79b9_7f4a_7c15u64.wrapping_mul(dim as u64 + 1)));
        let mut column: Vec<f64> = design.iter().map(|cv| cv.coords[dim]).collect();
        column.shuffle(&mut rng);
        let mut err = 0.0;
        let mut count = 0usize;
        for (i, cv) in design.iter().enumerate() {
            let mut shuffled = cv.clone();
            shuffled.coords[dim] = column[i];
            let y = predict(&shuffled)?;
            for (a, b) in y.values().iter().zip(truth[i].values()) {
                err += if *b != 0.0 { ((a - b) / b).abs() } else { (a - b).abs() };
                count += 1;
            }
        }
        scores.push(err / count as f64);
    }
    Ok(FisReport::from_scores(space, scores))
}

/// Keep-mask after dropping the low-importance tail.
///
/// Parameters are ranked by normalized score (descending, ties by index). The
/// longest tail whose cumulative normalized score stays below
/// `cumulative_threshold` is dropped; plan-structure parameters are never
/// dropped and do not count toward the tail.
pub fn fis_filter(report: &FisReport, cumulative_threshold: f64) -> Result<Vec<bool>> {
    if !(0.0..1.0).contains(&cumulative_threshold) {
        return Err(TuneError::contract("cumulative threshold must be in [0, 1)"));
    }
    let d = report.normalized.len();
    let mut order: Vec<usize> = (0..d).collect();
    order.sort_by(|&a, &b| report.normalized[b].total_cmp(&report.normalized[a]).then(a.cmp(&b)));

    let mut keep = vec![true; d];
    let mut tail = 0.0;
    for &i in order.iter().rev() {
        if report.structural[i] {
            continue;
        }
        if tail + report.normalized[i] < cumulative_threshold {
            tail += report.normalized[i];
            keep[i] = false;
        } else {
            break;
        }
    }
    Ok(keep)
}
