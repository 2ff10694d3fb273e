//! Candidate generation for the context, plan and stage parameter groups.
//!
//! All samplers are pure functions of their inputs and seed. Dimensions that a
//! keep-mask drops are pinned to their defaults.

mod cluster;
mod crossover;
mod grid;

pub use cluster::{cluster_thetac, nearest_representative, ClusterModel};
pub use crossover::crossover_enrich;
pub use grid::sample_adaptive_grid;

use rand::Rng;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use rand::seq::SliceRandom;
use serde::{Deserialize, Serialize};

use crate::space::{ConfigSpace, ConfigVector};

/// Number of context samples and of joint plan/stage samples per subQ.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
pub struct SampleBudget {
    pub n_c: usize,
    pub n_p: usize,
}

impl SampleBudget {
    pub const LOW: SampleBudget = SampleBudget { n_c: 27, n_p: 54 };
    pub const MEDIUM: SampleBudget = SampleBudget { n_c: 54, n_p: 81 };

    pub fn new(n_c: usize, n_p: usize) -> Self {
        assert!(n_c >= 1 && n_p >= 1, "sample budget must be positive");
        SampleBudget { n_c, n_p }
    }
}

/// Picks a budget tier from the predicted latency of the default configuration.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct BudgetRule {
    /// Seconds; latencies strictly above it get the `long` tier.
    pub threshold: f64,
    pub long: SampleBudget,
    pub short: SampleBudget,
}

impl Default for BudgetRule {
    fn default() -> Self {
        BudgetRule {
            threshold: 10.0,
            long: SampleBudget::MEDIUM,
            short: SampleBudget::LOW,
        }
    }
}

impl BudgetRule {
    pub fn choose(&self, predicted_default_latency: f64) -> SampleBudget {
        if predicted_default_latency > self.threshold {
            self.long
        } else {
            self.short
        }
    }
}

/// Default tiering: over 10 s gets (54, 81), otherwise (27, 54).
pub fn choose_budget(predicted_default_latency: f64) -> SampleBudget {
    BudgetRule::default().choose(predicted_default_latency)
}

fn kept(keep: Option<&[bool]>, dim: usize) -> bool {
    keep.is_none_or(|k| k[dim])
}

/// `n` independent uniform draws over the grid values of each kept dim.
pub fn sample_random(space: &ConfigSpace, keep: Option<&[bool]>, n: usize, seed: u64) -> Vec<ConfigVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    (0..n)
        .map(|_| {
            let coords = space
                .dims
                .iter()
                .enumerate()
                .map(|(d, p)| {
                    if kept(keep, d) {
                        p.values[rng.gen_range(0..p.values.len())]
                    } else {
                        p.default
                    }
                })
                .collect();
            ConfigVector::new(space.group, coords)
        })
        .collect()
}

/// Latin hypercube design snapped to the grid.
///
/// For each kept dim the unit interval is cut into `n` strata and every
/// stratum is hit exactly once; a point in [0, 1) maps to grid index
/// `floor(u · len)`.
pub fn sample_lhs(space: &ConfigSpace, keep: Option<&[bool]>, n: usize, seed: u64) -> Vec<ConfigVector> {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut columns: Vec<Vec<f64>> = Vec::with_capacity(space.len());
    for (d, p) in space.dims.iter().enumerate() {
        if !kept(keep, d) {
            columns.push(vec![p.default; n]);
            continue;
        }
        let mut strata: Vec<usize> = (0..n).collect();
        strata.shuffle(&mut rng);
        let len = p.values.len();
        columns.push(
            strata
                .into_iter()
                .map(|s| {
                    let u = (s as f64 + rng.gen::<f64>()) / n as f64;
                    p.values[((u * len as f64) as usize).min(len - 1)]
                })
                .collect(),
        );
    }
    (0..n)
        .map(|i| ConfigVector::new(space.group, columns.iter().map(|c| c[i]).collect()))
        .collect()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{Group, ParamDef, ParamKind, Spaces};

    fn chi2(samples: &[ConfigVector], space: &ConfigSpace) -> f64 {
        let n = samples.len() as f64;
        space
            .dims
            .iter()
            .enumerate()
            .map(|(d, p)| {
                let expected = n / p.values.len() as f64;
                p.values
                    .iter()
                    .map(|v| {
                        let obs = samples.iter().filter(|s| s.coords[d] == *v).count() as f64;
                        (obs - expected).powi(2) / expected
                    })
                    .sum::<f64>()
            })
            .sum()
    }

    #[test]
    fn budget_tiers() {
        assert_eq!(choose_budget(15.0), SampleBudget::new(54, 81));
        assert_eq!(choose_budget(5.0), SampleBudget::new(27, 54));
        assert_eq!(choose_budget(10.0), SampleBudget::new(27, 54));
    }

    #[test]
    fn random_single_bool() {
        let sp = ConfigSpace::new(Group::Context, vec![ParamDef::boolean("b", true)]).unwrap();
        let s = sample_random(&sp, None, 1, 4);
        assert_eq!(s.len(), 1);
        sp.validate(&s[0]).unwrap();
        assert_eq!(s, sample_random(&sp, None, 1, 4));
    }

    #[test]
    fn random_binomial_balance() {
        let sp = ConfigSpace::new(Group::Context, vec![ParamDef::boolean("b", true)]).unwrap();
        let s = sample_random(&sp, None, 1000, 99);
        let ones = s.iter().filter(|c| c.coords[0] == 1.0).count();
        assert!((400..=600).contains(&ones), "{ones}");
    }

    #[test]
    fn masked_dims_pinned() {
        let sp = Spaces::spark_default().context;
        let mut keep = vec![true; sp.len()];
        keep[3] = false;
        for s in sample_random(&sp, Some(&keep), 100, 1).iter().chain(&sample_lhs(&sp, Some(&keep), 100, 1)) {
            assert_eq!(s.coords[3], sp.dims[3].default);
            sp.validate(s).unwrap();
        }
    }

    #[test]
    fn lhs_full_coverage_is_permutation() {
        let sp = Spaces::spark_default().context;
        let k1 = &sp.dims[0];
        let s = sample_lhs(&sp, None, k1.values.len(), 8);
        let mut got: Vec<f64> = s.iter().map(|c| c.coords[0]).collect();
        got.sort_by(f64::total_cmp);
        assert_eq!(got, k1.values);
    }

    #[test]
    fn lhs_four_by_four() {
        let vals = [1., 2., 3., 4.];
        let sp = ConfigSpace::new(
            Group::Plan,
            vec![
                ParamDef::new("a", ParamKind::IntGrid, &vals, 1.),
                ParamDef::new("b", ParamKind::IntGrid, &vals, 1.),
            ],
        )
        .unwrap();
        for seed in 0..20 {
            let s = sample_lhs(&sp, None, 4, seed);
            for d in 0..2 {
                let mut col: Vec<f64> = s.iter().map(|c| c.coords[d]).collect();
                col.sort_by(f64::total_cmp);
                assert_eq!(col, vals);
            }
        }
    }

    #[test]
    fn lhs_marginals_beat_random() {
        let vals = [1., 2., 3., 4., 5.];
        let sp = ConfigSpace::new(
            Group::Context,
            (0..8).map(|i| ParamDef::new(&format!("x{i}"), ParamKind::IntGrid, &vals, 1.)).collect(),
        )
        .unwrap();
        let wins = (0..100u64)
            .filter(|&seed| chi2(&sample_lhs(&sp, None, 100, seed), &sp) < chi2(&sample_random(&sp, None, 100, seed), &sp))
            .count();
        assert!(wins >= 95, "{wins}");
    }
}
