//! k-medoids clustering of context candidates.
//!
//! Medoids keep representatives on the grid, so every representative is an
//! executable configuration. Initialization is PAM's greedy BUILD step,
//! followed by alternating assignment / medoid-update rounds.

use serde::{Deserialize, Serialize};

use crate::error::{Result, TuneError};
use crate::space::{ConfigSpace, ConfigVector};

const MAX_ROUNDS: usize = 100;

/// Result of clustering `candidates`.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ClusterModel {
    /// Candidate index of each cluster's medoid.
    pub medoids: Vec<usize>,
    pub representatives: Vec<ConfigVector>,
    /// Cluster index of each candidate.
    pub assignment: Vec<usize>,
}

impl ClusterModel {
    pub fn num_clusters(&self) -> usize {
        self.medoids.len()
    }

    pub fn is_representative(&self, candidate: usize) -> bool {
        self.medoids[self.assignment[candidate]] == candidate
    }
}

fn distance(a: &[f64], b: &[f64]) -> f64 {
    a.iter().zip(b).map(|(x, y)| (x - y) * (x - y)).sum::<f64>().sqrt()
}

/// Clusters `candidates` into `c` groups over min-max normalized coordinates.
///
/// BUILD initialization is deterministic, so `_seed` does not change the
/// result; it is part of the signature so callers can treat every sampler alike.
pub fn cluster_thetac(
    space: &ConfigSpace,
    candidates: &[ConfigVector],
    c: usize,
    _seed: u64,
) -> Result<ClusterModel> {
    let n = candidates.len();
    if c == 0 {
        return Err(TuneError::contract("cluster count must be at least 1"));
    }
    if c > n {
        return Err(TuneError::contract(format!("cannot form {c} clusters from {n} candidates")));
    }
    let points: Vec<Vec<f64>> = candidates.iter().map(|cv| space.normalized(cv)).collect();
    let dist: Vec<Vec<f64>> = points
        .iter()
        .map(|a| points.iter().map(|b| distance(a, b)).collect())
        .collect();

    // BUILD: the total-distance minimizer first, then greedy cost reductions.
    let first = (0..n)
        .min_by(|&a, &b| {
            let sa: f64 = dist[a].iter().sum();
            let sb: f64 = dist[b].iter().sum();
            sa.total_cmp(&sb).then(a.cmp(&b))
        })
        .expect("non-empty candidates");
    let mut medoids = vec![first];
    let mut nearest: Vec<f64> = dist[first].clone();
    while medoids.len() < c {
        let best = (0..n)
            .filter(|i| !medoids.contains(i))
            .max_by(|&a, &b| {
                let ga: f64 = (0..n).map(|j| (nearest[j] - dist[j][a]).max(0.0)).sum();
                let gb: f64 = (0..n).map(|j| (nearest[j] - dist[j][b]).max(0.0)).sum();
                ga.total_cmp(&gb).then(b.cmp(&a))
            })
            .expect("c <= n leaves a candidate");
        medoids.push(best);
        for j in 0..n {
            nearest[j] = nearest[j].min(dist[j][best]);
        }
    }

    let assign = |medoids: &[usize]| -> Vec<usize> {
        (0..n)
            .map(|j| {
                if let Some(own) = medoids.iter().position(|&m| m == j) {
                    return own;
                }
                (0..medoids.len())
                    .min_by(|&a, &b| dist[j][medoids[a]].total_cmp(&dist[j][medoids[b]]).then(a.cmp(&b)))
                    .expect("at least one medoid")
            })
            .collect()
    };

    let mut assignment = assign(&medoids);
    for _ in 0..MAX_ROUNDS {
        let mut changed = false;
        for (k, medoid) in medoids.iter_mut().enumerate() {
            let members: Vec<usize> = (0..n).filter(|&j| assignment[j] == k).collect();
            let cost = |m: usize| members.iter().map(|&j| dist[j][m]).sum::<f64>();
            let current = cost(*medoid);
            if let Some(better) = members
                .iter()
                .copied()
                .filter(|&m| cost(m) < current)
                .min_by(|&a, &b| cost(a).total_cmp(&cost(b)).then(a.cmp(&b)))
            {
                *medoid = better;
                changed = true;
            }
        }
        if !changed {
            break;
        }
        assignment = assign(&medoids);
    }

    Ok(ClusterModel {
        representatives: medoids.iter().map(|&m| candidates[m].clone()).collect(),
        medoids,
        assignment,
    })
}

/// Cluster index of the representative closest to `cv` (ties to the lower index).
pub fn nearest_representative(space: &ConfigSpace, model: &ClusterModel, cv: &ConfigVector) -> usize {
    let p = space.normalized(cv);
    (0..model.representatives.len())
        .min_by(|&a, &b| {
            let da = distance(&p, &space.normalized(&model.representatives[a]));
            let db = distance(&p, &space.normalized(&model.representatives[b]));
            da.total_cmp(&db).then(a.cmp(&b))
        })
        .expect("cluster model has representatives")
}
