use crate::costmodel::{NonDecision, SubqModel};
use crate::error::{Result, TuneError};
use crate::hmooc::PlanSample;
use crate::pareto::{pareto_filter, HasObjectives, ObjectiveVector, ParetoSet, Solution};
use crate::sampling::{sample_lhs, SampleBudget};
use crate::space::{ConfigSpace, ConfigVector, Group};

/// Largest number of full compositions the oracle will enumerate.
pub const ORACLE_LIMIT: usize = 5_000_000;

/// Latin hypercube candidates: `n_c` contexts and `n_p` plan/stage samples per subQ.
pub fn oracle_candidates<M: SubqModel + ?Sized>(
    model: &M,
    budget: SampleBudget,
    seed: u64,
) -> (Vec<ConfigVector>, Vec<Vec<PlanSample>>) {
    let sp = model.spaces();
    let joint = ConfigSpace::joint(&sp.plan, &sp.stage);
    let split = sp.plan.len();
    let theta_c = sample_lhs(&sp.context, None, budget.n_c, seed);
    let samples = (0..model.num_subqs())
        .map(|i| {
            sample_lhs(&joint, None, budget.n_p, seed.wrapping_add(1 + i as u64))
                .into_iter()
                .map(|cv| PlanSample {
                    theta_p: ConfigVector::new(Group::Plan, cv.coords[..split].to_vec()),
                    theta_s: ConfigVector::new(Group::Stage, cv.coords[split..].to_vec()),
                })
                .collect()
        })
        .collect();
    (theta_c, samples)
}

struct Combo {
    objectives: ObjectiveVector,
    context: usize,
    picks: Vec<usize>,
}

impl HasObjectives for Combo {
    fn objectives(&self) -> &ObjectiveVector {
        &self.objectives
    }
}

/// Exhaustive query-level front: every context with every per-subQ sample choice.
pub fn brute_force_front<M: SubqModel + ?Sized>(
    model: &M,
    nd: &NonDecision,
    theta_c: &[ConfigVector],
    samples: &[Vec<PlanSample>],
) -> Result<ParetoSet<Solution>> {
    let m = model.num_subqs();
    if samples.len() != m || samples.iter().any(|s| s.is_empty()) || theta_c.is_empty() {
        return Err(TuneError::contract("oracle needs nonempty candidates for every subQ"));
    }
    let per_context = samples
        .iter()
        .try_fold(1usize, |acc, s| acc.checked_mul(s.len()))
        .filter(|&n| n.saturating_mul(theta_c.len()) <= ORACLE_LIMIT)
        .ok_or_else(|| TuneError::config(format!("oracle enumeration exceeds {ORACLE_LIMIT} compositions")))?;

    let mut combos = Vec::with_capacity(per_context * theta_c.len());
    for (c, ctx) in theta_c.iter().enumerate() {
        let table = (0..m)
            .map(|i| {
                samples[i]
                    .iter()
                    .map(|s| model.predict_subq(i, ctx, &s.theta_p, &s.theta_s, nd))
                    .collect::<Result<Vec<_>>>()
            })
            .collect::<Result<Vec<_>>>()?;
        let mut idx = vec![0usize; m];
        'odometer: loop {
            let mut total = table[0][idx[0]].clone();
            for i in 1..m {
                total.add_assign(&table[i][idx[i]]);
            }
            combos.push(Combo {
                objectives: total,
                context: c,
                picks: idx.clone(),
            });
            for i in (0..m).rev() {
                idx[i] += 1;
                if idx[i] < samples[i].len() {
                    continue 'odometer;
                }
                idx[i] = 0;
            }
            break;
        }
    }
    Ok(pareto_filter(combos).map(|c| Solution {
        objectives: c.objectives,
        theta_c: theta_c[c.context].clone(),
        theta_p: c.picks.iter().enumerate().map(|(i, &p)| samples[i][p].theta_p.clone()).collect(),
        theta_s: c.picks.iter().enumerate().map(|(i, &p)| samples[i][p].theta_s.clone()).collect(),
    }))
}
