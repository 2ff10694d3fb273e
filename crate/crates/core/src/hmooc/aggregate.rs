//! DAG aggregation of per-subQ fronts under one fixed context.
//!
//! Query objectives are sums of subQ objectives, so a composite solution picks
//! one entry per subQ and adds their objective vectors.

use std::cmp::Ordering;
use std::collections::BinaryHeap;

use serde::{Deserialize, Serialize};

use super::WeightVector;
use crate::error::{Result, TuneError};
use crate::pareto::{pareto_filter, HasObjectives, ObjectiveVector, ParetoSet};

/// A query-level point: `picks[i]` indexes the chosen entry of subQ `i`'s front.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Composite {
    pub objectives: ObjectiveVector,
    pub picks: Vec<usize>,
}

impl HasObjectives for Composite {
    fn objectives(&self) -> &ObjectiveVector {
        &self.objectives
    }
}

fn check_fronts<T: HasObjectives>(fronts: &[Vec<T>]) -> Result<usize> {
    let first = fronts
        .first()
        .and_then(|f| f.first())
        .ok_or_else(|| TuneError::contract("aggregation needs at least one nonempty subQ front"))?;
    let k = first.objectives().k();
    for (i, f) in fronts.iter().enumerate() {
        if f.is_empty() {
            return Err(TuneError::contract(format!("subQ {i} has an empty front")));
        }
        if f.iter().any(|e| e.objectives().k() != k) {
            return Err(TuneError::contract(format!("subQ {i} mixes objective dimensions")));
        }
    }
    Ok(k)
}

/// Entry indices of `front` in canonical order (objectives, then index).
fn canonical_order<T: HasObjectives>(front: &[T]) -> Vec<usize> {
    let mut order: Vec<usize> = (0..front.len()).collect();
    order.sort_by(|&a, &b| front[a].objectives().canonical_cmp(front[b].objectives()));
    order
}

fn compose(left: &Composite, right: &Composite) -> Composite {
    let mut picks = Vec::with_capacity(left.picks.len() + right.picks.len());
    picks.extend_from_slice(&left.picks);
    picks.extend_from_slice(&right.picks);
    Composite {
        objectives: left.objectives.add(&right.objectives),
        picks,
    }
}

#[derive(PartialEq)]
struct Cursor {
    x: f64,
    y: f64,
    i: usize,
    j: usize,
}

impl Eq for Cursor {}

impl Ord for Cursor {
    // Reversed so the max-heap pops the lexicographically smallest sum first.
    fn cmp(&self, other: &Self) -> Ordering {
        other
            .x
            .total_cmp(&self.x)
            .then(other.y.total_cmp(&self.y))
            .then(other.i.cmp(&self.i))
            .then(other.j.cmp(&self.j))
    }
}

impl PartialOrd for Cursor {
    fn partial_cmp(&self, other: &Self) -> Option<Ordering> {
        Some(self.cmp(other))
    }
}

/// Nondominated set of all pairwise sums of two canonical 2-D fronts.
///
/// Each row `a[i] + b[..]` is nondecreasing in the first objective, so a heap
/// over row cursors streams all sums in first-objective order with memory
/// linear in the inputs.
fn merge_2d(a: &[Composite], b: &[Composite]) -> Vec<Composite> {
    let sum = |i: usize, j: usize| Cursor {
        x: a[i].objectives.get(0) + b[j].objectives.get(0),
        y: a[i].objectives.get(1) + b[j].objectives.get(1),
        i,
        j,
    };
    let mut heap: BinaryHeap<Cursor> = (0..a.len()).map(|i| sum(i, 0)).collect();
    let mut kept: Vec<(f64, f64, usize, usize)> = Vec::new();
    let mut best = f64::INFINITY;
    while let Some(c) = heap.pop() {
        if c.j + 1 < b.len() {
            heap.push(sum(c.i, c.j + 1));
        }
        if c.y < best {
            // A rounding tie in x can surface a dominated predecessor; replace it.
            if kept.last().is_some_and(|k| k.0 == c.x) {
                kept.pop();
            }
            best = c.y;
            kept.push((c.x, c.y, c.i, c.j));
        }
    }
    kept.into_iter().map(|(_, _, i, j)| compose(&a[i], &b[j])).collect()
}

/// Pareto front of the sum composition of two fronts.
///
/// Both inputs must be nondominated sets in canonical order, as produced by
/// [`pareto_filter`]; the output is again one.
pub fn merge_fronts(a: &[Composite], b: &[Composite]) -> Vec<Composite> {
    if a.is_empty() || b.is_empty() {
        return Vec::new();
    }
    if a[0].objectives.k() == 2 {
        return merge_2d(a, b);
    }
    let mut all = Vec::with_capacity(a.len() * b.len());
    for x in a {
        for y in b {
            all.push(compose(x, y));
        }
    }
    pareto_filter(all).into_entries()
}

fn leaf<T: HasObjectives>(front: &[T]) -> Vec<Composite> {
    pareto_filter(
        front
            .iter()
            .enumerate()
            .map(|(i, e)| Composite {
                objectives: e.objectives().clone(),
                picks: vec![i],
            })
            .collect(),
    )
    .into_entries()
}

fn divide<T: HasObjectives>(fronts: &[Vec<T>]) -> Vec<Composite> {
    if fronts.len() == 1 {
        return leaf(&fronts[0]);
    }
    let mid = fronts.len() / 2;
    merge_fronts(&divide(&fronts[..mid]), &divide(&fronts[mid..]))
}

/// Full query-level Pareto front by balanced divide and conquer.
///
/// Equals the nondominated filter of every sum composition, because the front
/// of a sum only uses fronts of its summands.
pub fn agg_divide_conquer<T: HasObjectives>(fronts: &[Vec<T>]) -> Result<ParetoSet<Composite>> {
    check_fronts(fronts)?;
    Ok(pareto_filter(divide(fronts)))
}

/// Normalization used by the weighted-sum aggregation.
#[derive(Debug, Clone, Copy, Default, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum WsNormalization {
    /// Per-subQ minimum offset with one scale per objective shared by all
    /// subQs (the largest per-subQ range). Every pick minimizes a positive
    /// weighting of the query objectives, so it is Pareto optimal.
    #[default]
    SharedScale,
    /// Independent min-max scaling of every subQ front. Each subQ then uses its
    /// own effective weight ratio and the summed pick can be dominated.
    PerSubq,
}

/// The composite one weight vector selects: per subQ, the entry minimizing the
/// weighted normalized objectives (ties to the first in canonical order).
pub fn ws_composite<T: HasObjectives>(
    fronts: &[Vec<T>],
    weight: &WeightVector,
    normalization: WsNormalization,
) -> Result<Composite> {
    let k = check_fronts(fronts)?;
    if weight.k() != k {
        return Err(TuneError::contract(format!("{}-d weight for {k} objectives", weight.k())));
    }
    let lows_ranges: Vec<(Vec<f64>, Vec<f64>)> = fronts
        .iter()
        .map(|f| {
            (0..k)
                .map(|v| {
                    let vals = f.iter().map(|e| e.objectives().get(v));
                    let lo = vals.clone().fold(f64::INFINITY, f64::min);
                    let hi = vals.fold(f64::NEG_INFINITY, f64::max);
                    (lo, hi - lo)
                })
                .unzip()
        })
        .collect();
    let shared: Vec<f64> = (0..k)
        .map(|v| lows_ranges.iter().map(|(_, r)| r[v]).fold(0.0, f64::max))
        .collect();

    let mut picks = Vec::with_capacity(fronts.len());
    let mut total = ObjectiveVector::zeros(k);
    for (i, front) in fronts.iter().enumerate() {
        let (lo, range) = &lows_ranges[i];
        let score = |e: &T| -> f64 {
            (0..k)
                .map(|v| {
                    let scale = match normalization {
                        WsNormalization::SharedScale => shared[v],
                        WsNormalization::PerSubq => range[v],
                    };
                    if scale > 0.0 {
                        weight.values()[v] * (e.objectives().get(v) - lo[v]) / scale
                    } else {
                        0.0
                    }
                })
                .sum()
        };
        let mut best: Option<(usize, f64)> = None;
        for idx in canonical_order(front) {
            let s = score(&front[idx]);
            if best.is_none_or(|(_, b)| s < b) {
                best = Some((idx, s));
            }
        }
        let (idx, _) = best.expect("nonempty front");
        total.add_assign(front[idx].objectives());
        picks.push(idx);
    }
    Ok(Composite { objectives: total, picks })
}

/// Weighted-sum aggregation: one composite per weight vector, then filtered.
pub fn agg_ws<T: HasObjectives>(
    fronts: &[Vec<T>],
    weights: &[WeightVector],
    normalization: WsNormalization,
) -> Result<ParetoSet<Composite>> {
    if weights.is_empty() {
        return Err(TuneError::contract("weighted-sum aggregation needs at least one weight"));
    }
    let picked = weights
        .iter()
        .map(|w| ws_composite(fronts, w, normalization))
        .collect::<Result<Vec<_>>>()?;
    Ok(pareto_filter(picked))
}

/// Boundary aggregation: one extreme point per objective, composed from each
/// subQ's entry that is lexicographically smallest with that objective first.
pub fn agg_boundary<T: HasObjectives>(fronts: &[Vec<T>]) -> Result<ParetoSet<Composite>> {
    let k = check_fronts(fronts)?;
    let mut extremes = Vec::with_capacity(k);
    for j in 0..k {
        let key_order: Vec<usize> = std::iter::once(j).chain((0..k).filter(|&v| v != j)).collect();
        let cmp = |a: &ObjectiveVector, b: &ObjectiveVector| {
            key_order
                .iter()
                .map(|&v| a.get(v).total_cmp(&b.get(v)))
                .find(|o| o.is_ne())
                .unwrap_or(Ordering::Equal)
        };
        let mut picks = Vec::with_capacity(fronts.len());
        let mut total = ObjectiveVector::zeros(k);
        for front in fronts {
            let idx = (0..front.len())
                .min_by(|&a, &b| cmp(front[a].objectives(), front[b].objectives()).then(a.cmp(&b)))
                .expect("nonempty front");
            total.add_assign(front[idx].objectives());
            picks.push(idx);
        }
        extremes.push(Composite { objectives: total, picks });
    }
    Ok(pareto_filter(extremes))
}
