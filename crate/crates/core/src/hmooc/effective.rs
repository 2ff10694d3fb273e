//! Effective set: per context candidate and subQ, the nondominated plan/stage
//! choices.

use std::collections::HashMap;

use rayon::prelude::*;
use serde::{Deserialize, Serialize};

use crate::costmodel::{NonDecision, SubqModel};
use crate::error::{Result, TuneError};
use crate::pareto::{pareto_filter, HasObjectives, ObjectiveVector};
use crate::sampling::{nearest_representative, ClusterModel};
use crate::space::{ConfigKey, ConfigVector};

/// One joint plan/stage sample for a subQ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanSample {
    pub theta_p: ConfigVector,
    pub theta_s: ConfigVector,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanChoice {
    pub theta_p: ConfigVector,
    pub theta_s: ConfigVector,
    pub objectives: ObjectiveVector,
}

impl HasObjectives for PlanChoice {
    fn objectives(&self) -> &ObjectiveVector {
        &self.objectives
    }
}

impl PlanChoice {
    pub fn sample(&self) -> PlanSample {
        PlanSample {
            theta_p: self.theta_p.clone(),
            theta_s: self.theta_s.clone(),
        }
    }
}

/// Tuned choices of one context candidate.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ThetaCEntry {
    pub theta_c: ConfigVector,
    /// Per subQ, nondominated choices in canonical order.
    pub per_subq: Vec<Vec<PlanChoice>>,
    /// Representative whose choices were re-predicted; `None` when tuned directly.
    pub inherited_from: Option<ConfigVector>,
}

impl ThetaCEntry {
    /// The plan/stage samples this entry's choices were filtered from.
    pub fn candidate_universe(&self, samples: &[Vec<PlanSample>], effective: &EffectiveSet) -> Vec<Vec<PlanSample>> {
        match &self.inherited_from {
            None => samples.to_vec(),
            Some(rep) => effective
                .get(rep)
                .expect("representative present in the effective set")
                .per_subq
                .iter()
                .map(|choices| choices.iter().map(PlanChoice::sample).collect())
                .collect(),
        }
    }
}

/// Ordered map from context candidate to its tuned entry.
#[derive(Debug, Clone, Default, PartialEq)]
pub struct EffectiveSet {
    entries: Vec<ThetaCEntry>,
    index: HashMap<ConfigKey, usize>,
}

impl EffectiveSet {
    pub fn entries(&self) -> &[ThetaCEntry] {
        &self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn get(&self, theta_c: &ConfigVector) -> Option<&ThetaCEntry> {
        self.index.get(&theta_c.key()).map(|&i| &self.entries[i])
    }

    pub fn contains(&self, theta_c: &ConfigVector) -> bool {
        self.index.contains_key(&theta_c.key())
    }

    /// Inserts unless the context is already present; returns whether it was new.
    fn insert(&mut self, entry: ThetaCEntry) -> bool {
        let key = entry.theta_c.key();
        if self.index.contains_key(&key) {
            return false;
        }
        self.index.insert(key, self.entries.len());
        self.entries.push(entry);
        true
    }
}

fn tune_one<M: SubqModel + ?Sized>(
    model: &M,
    theta_c: &ConfigVector,
    subq: usize,
    samples: &[PlanSample],
    nd: &NonDecision,
) -> Result<Vec<PlanChoice>> {
    let choices = samples
        .iter()
        .map(|s| {
            Ok(PlanChoice {
                objectives: model.predict_subq(subq, theta_c, &s.theta_p, &s.theta_s, nd)?,
                theta_p: s.theta_p.clone(),
                theta_s: s.theta_s.clone(),
            })
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(pareto_filter(choices).into_entries())
}

fn inherit<M: SubqModel + ?Sized>(
    model: &M,
    theta_c: &ConfigVector,
    rep: &ThetaCEntry,
    nd: &NonDecision,
) -> Result<ThetaCEntry> {
    let per_subq = rep
        .per_subq
        .iter()
        .enumerate()
        .map(|(i, choices)| {
            let samples: Vec<PlanSample> = choices.iter().map(PlanChoice::sample).collect();
            tune_one(model, theta_c, i, &samples, nd)
        })
        .collect::<Result<Vec<_>>>()?;
    Ok(ThetaCEntry {
        theta_c: theta_c.clone(),
        per_subq,
        inherited_from: Some(rep.theta_c.clone()),
    })
}

fn dedup(candidates: &[ConfigVector], skip: &EffectiveSet) -> Vec<ConfigVector> {
    let mut seen = std::collections::HashSet::new();
    candidates
        .iter()
        .filter(|c| !skip.contains(c) && seen.insert(c.key()))
        .cloned()
        .collect()
}

/// Tunes every subQ of each representative context over its plan/stage samples.
pub fn subq_tune<M: SubqModel + ?Sized>(
    model: &M,
    theta_c_reps: &[ConfigVector],
    samples: &[Vec<PlanSample>],
    nd: &NonDecision,
) -> Result<EffectiveSet> {
    let m = model.num_subqs();
    if samples.len() != m {
        return Err(TuneError::contract(format!("samples for {} subQs, model has {m}", samples.len())));
    }
    if theta_c_reps.is_empty() || samples.iter().any(|s| s.is_empty()) {
        return Err(TuneError::contract("subQ tuning needs nonempty candidate lists"));
    }
    let reps = dedup(theta_c_reps, &EffectiveSet::default());
    let entries = reps
        .par_iter()
        .map(|c| {
            let per_subq = (0..m)
                .map(|i| tune_one(model, c, i, &samples[i], nd))
                .collect::<Result<Vec<_>>>()?;
            Ok(ThetaCEntry {
                theta_c: c.clone(),
                per_subq,
                inherited_from: None,
            })
        })
        .collect::<Result<Vec<_>>>()?;
    let mut set = EffectiveSet::default();
    for e in entries {
        set.insert(e);
    }
    Ok(set)
}

/// Gives every clustered candidate its representative's choices, re-predicted
/// under the candidate's own context and re-filtered. Output follows candidate
/// order; representatives keep their tuned entries.
pub fn assign_opt_p<M: SubqModel + ?Sized>(
    model: &M,
    effective: &EffectiveSet,
    cluster: &ClusterModel,
    all_candidates: &[ConfigVector],
    nd: &NonDecision,
) -> Result<EffectiveSet> {
    if cluster.assignment.len() != all_candidates.len() {
        return Err(TuneError::contract(format!(
            "{} candidates but {} cluster assignments",
            all_candidates.len(),
            cluster.assignment.len()
        )));
    }
    let jobs: Vec<(usize, &ConfigVector)> = {
        let mut seen = std::collections::HashSet::new();
        all_candidates
            .iter()
            .enumerate()
            .filter(|(_, c)| seen.insert(c.key()))
            .collect()
    };
    let entries = jobs
        .par_iter()
        .map(|&(j, c)| {
            if let Some(own) = effective.get(c) {
                return Ok(own.clone());
            }
            let k = cluster.assignment[j];
            let rep_cv = cluster
                .representatives
                .get(k)
                .ok_or_else(|| TuneError::contract(format!("candidate {j} assigned to missing cluster {k}")))?;
            let rep = effective
                .get(rep_cv)
                .ok_or_else(|| TuneError::contract(format!("representative of cluster {k} was not tuned")))?;
            inherit(model, c, rep, nd)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut set = EffectiveSet::default();
    for e in entries {
        set.insert(e);
    }
    for e in effective.entries() {
        set.insert(e.clone());
    }
    Ok(set)
}

/// Adds new context candidates, each inheriting from its nearest representative.
pub fn enrich_and_extend<M: SubqModel + ?Sized>(
    model: &M,
    effective: &EffectiveSet,
    cluster: &ClusterModel,
    new_candidates: &[ConfigVector],
    nd: &NonDecision,
) -> Result<EffectiveSet> {
    let space = &model.spaces().context;
    let fresh = dedup(new_candidates, effective);
    let added = fresh
        .par_iter()
        .map(|c| {
            let k = nearest_representative(space, cluster, c);
            let rep = effective
                .get(&cluster.representatives[k])
                .ok_or_else(|| TuneError::contract(format!("representative of cluster {k} was not tuned")))?;
            inherit(model, c, rep, nd)
        })
        .collect::<Result<Vec<_>>>()?;
    let mut set = effective.clone();
    for e in added {
        set.insert(e);
    }
    Ok(set)
}
