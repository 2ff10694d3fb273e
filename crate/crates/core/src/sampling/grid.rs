//! Adaptive grid search with importance-driven value allotment.
//!
//! Every kept dim has a value sequence `[default, min, max, interior...]`
//! (interior points in bisection order). The grid is the Cartesian product of
//! a prefix of each dim's sequence. Prefixes grow along one fixed priority
//! order: repeatedly extend the dim with the largest `score / current_len`
//! (ties to the lower index). High-importance dims (normalized score at least
//! the mean over kept dims) and plan-structure dims may grow without bound;
//! the others stop at three values. A budget takes the longest prefix of that
//! order whose grid fits, so smaller budgets yield subsets of larger ones.

use std::collections::VecDeque;

use crate::costmodel::FisReport;
use crate::space::{ConfigSpace, ConfigVector, ParamDef};

const LOW_IMPORTANCE_CAP: usize = 3;

fn value_sequence(p: &ParamDef) -> Vec<f64> {
    let mut seq = vec![p.default];
    let push = |v: f64, seq: &mut Vec<f64>| {
        if !seq.contains(&v) {
            seq.push(v);
        }
    };
    push(p.min(), &mut seq);
    push(p.max(), &mut seq);
    let n = p.values.len();
    if n > 2 {
        let mut queue = VecDeque::from([(0usize, n - 1)]);
        while let Some((lo, hi)) = queue.pop_front() {
            if hi - lo < 2 {
                continue;
            }
            let mid = (lo + hi) / 2;
            push(p.values[mid], &mut seq);
            queue.push_back((lo, mid));
            queue.push_back((mid, hi));
        }
    }
    seq
}

/// Grid samples of `space` with at most `budget` points.
///
/// A budget of 0 or 1 yields the single all-defaults point.
pub fn sample_adaptive_grid(space: &ConfigSpace, fis: &FisReport, budget: usize) -> Vec<ConfigVector> {
    let d = space.len();
    assert_eq!(fis.normalized.len(), d, "importance report does not match the space");
    let sequences: Vec<Vec<f64>> = space.dims.iter().map(value_sequence).collect();

    let kept: Vec<bool> = (0..d).map(|i| fis.keep_mask[i] || fis.structural[i]).collect();
    let n_kept = kept.iter().filter(|&&k| k).count().max(1);
    let mean = (0..d).filter(|&i| kept[i]).map(|i| fis.normalized[i]).sum::<f64>() / n_kept as f64;
    let caps: Vec<usize> = (0..d)
        .map(|i| {
            if !kept[i] {
                1
            } else if fis.structural[i] || fis.normalized[i] >= mean {
                sequences[i].len()
            } else {
                LOW_IMPORTANCE_CAP.min(sequences[i].len())
            }
        })
        .collect();

    let mut lens = vec![1usize; d];
    let mut size = 1usize;
    loop {
        let next = (0..d)
            .filter(|&i| lens[i] < caps[i])
            .max_by(|&a, &b| {
                let sa = fis.normalized[a] / lens[a] as f64;
                let sb = fis.normalized[b] / lens[b] as f64;
                sa.total_cmp(&sb).then(b.cmp(&a))
            });
        let Some(i) = next else { break };
        let grown = size / lens[i] * (lens[i] + 1);
        if grown > budget {
            break;
        }
        size = grown;
        lens[i] += 1;
    }

    // Odometer over the chosen prefixes, first dim varying slowest.
    let mut out = Vec::with_capacity(size);
    let mut idx = vec![0usize; d];
    loop {
        out.push(ConfigVector::new(
            space.group,
            (0..d).map(|i| sequences[i][idx[i]]).collect(),
        ));
        let mut pos = d;
        loop {
            if pos == 0 {
                return out;
            }
            pos -= 1;
            idx[pos] += 1;
            if idx[pos] < lens[pos] {
                break;
            }
            idx[pos] = 0;
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::space::{Group, ParamKind, Spaces};

    fn two_dim() -> ConfigSpace {
        let vals: Vec<f64> = (1..=6).map(f64::from).collect();
        ConfigSpace::new(
            Group::Context,
            vec![
                ParamDef::new("a", ParamKind::IntGrid, &vals, 3.),
                ParamDef::new("b", ParamKind::IntGrid, &vals, 3.),
            ],
        )
        .unwrap()
    }

    #[test]
    fn sequence_order() {
        let p = ParamDef::new("a", ParamKind::IntGrid, &[1., 2., 3., 4., 5.], 2.);
        assert_eq!(value_sequence(&p), vec![2., 1., 5., 3., 4.]);
        let p = ParamDef::new("a", ParamKind::IntGrid, &[1., 2., 3., 4., 5., 6., 7., 8., 9.], 1.);
        assert_eq!(value_sequence(&p), vec![1., 9., 5., 3., 7., 2., 4., 6., 8.]);
    }

    #[test]
    fn budget_one_is_default() {
        let sp = Spaces::spark_default().context;
        let fis = FisReport::uniform(&sp);
        assert_eq!(sample_adaptive_grid(&sp, &fis, 1), vec![sp.defaults()]);
        assert_eq!(sample_adaptive_grid(&sp, &fis, 0), vec![sp.defaults()]);
    }

    #[test]
    fn allotment_follows_importance() {
        let sp = two_dim();
        let fis = FisReport::from_scores(&sp, vec![0.9, 0.1]);
        let g = sample_adaptive_grid(&sp, &fis, 4);
        assert_eq!(g.len(), 4);
        assert!(g.iter().all(|c| c.coords[1] == 3.0));
        let mut a: Vec<f64> = g.iter().map(|c| c.coords[0]).collect();
        a.sort_by(f64::total_cmp);
        assert_eq!(a, vec![1., 2., 3., 6.]);
    }

    #[test]
    fn dropped_dims_pinned() {
        let sp = two_dim();
        let fis = FisReport::from_scores(&sp, vec![0.99, 0.01]).filtered(0.05).unwrap();
        let g = sample_adaptive_grid(&sp, &fis, 100);
        assert!(g.iter().all(|c| c.coords[1] == 3.0));
        assert_eq!(g.len(), 6);
    }

    #[test]
    fn tiers_are_nested() {
        let sp = Spaces::spark_default().context;
        let fis = FisReport::from_scores(&sp, vec![0.3, 0.15, 0.3, 0.0, 0.05, 0.0, 0.02, 0.18]).filtered(0.05).unwrap();
        let keys = |b| -> std::collections::HashSet<_> {
            sample_adaptive_grid(&sp, &fis, b).iter().map(|c| c.key()).collect()
        };
        let (low, mid, high) = (keys(27), keys(54), keys(243));
        assert!(low.is_subset(&mid) && mid.is_subset(&high));
        assert!(low.len() <= 27 && mid.len() <= 54 && high.len() <= 243);
        for c in sample_adaptive_grid(&sp, &fis, 243) {
            sp.validate(&c).unwrap();
        }
    }
}
