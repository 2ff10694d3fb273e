//! Exact Pareto mathematics: dominance, nondominated filtering, hypervolume,
//! utopia/nadir points and min-max normalization.
//!
//! All objectives are minimized. Comparisons are exact; callers that need
//! order-independent sums should feed values that add exactly (see
//! [`snap_to_grid`]).

use std::cmp::Ordering;

use serde::{Deserialize, Serialize};

use crate::error::{Result, TuneError};
use crate::space::ConfigVector;

/// Resolution of the dyadic grid objective values are snapped to.
pub const OBJECTIVE_GRID: f64 = 1.0 / (1u64 << 20) as f64;

/// Rounds `x` to the nearest multiple of [`OBJECTIVE_GRID`].
///
/// Values on this grid below 2^32 add exactly in `f64`, so sums of per-subQ
/// objectives do not depend on summation order.
pub fn snap_to_grid(x: f64) -> f64 {
    (x / OBJECTIVE_GRID).round() * OBJECTIVE_GRID
}

/// A k-dimensional objective value; every component is minimized.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(transparent)]
pub struct ObjectiveVector(Vec<f64>);

impl ObjectiveVector {
    pub fn new(values: Vec<f64>) -> Result<Self> {
        if values.is_empty() {
            return Err(TuneError::contract("objective vector must have at least one component"));
        }
        if values.iter().any(|v| !v.is_finite()) {
            return Err(TuneError::contract(format!("non-finite objective value in {values:?}")));
        }
        Ok(ObjectiveVector(values))
    }

    /// Two-objective shorthand. Panics on non-finite input.
    pub fn pair(a: f64, b: f64) -> Self {
        Self::new(vec![a, b]).expect("finite objectives")
    }

    pub fn zeros(k: usize) -> Self {
        ObjectiveVector(vec![0.0; k])
    }

    pub fn values(&self) -> &[f64] {
        &self.0
    }

    pub fn k(&self) -> usize {
        self.0.len()
    }

    pub fn get(&self, i: usize) -> f64 {
        self.0[i]
    }

    /// Componentwise sum.
    pub fn add(&self, other: &ObjectiveVector) -> ObjectiveVector {
        assert_eq!(self.k(), other.k(), "objective dimension mismatch");
        ObjectiveVector(self.0.iter().zip(&other.0).map(|(a, b)| a + b).collect())
    }

    pub fn add_assign(&mut self, other: &ObjectiveVector) {
        assert_eq!(self.k(), other.k(), "objective dimension mismatch");
        for (a, b) in self.0.iter_mut().zip(&other.0) {
            *a += b;
        }
    }

    pub fn scale(&self, factor: f64) -> ObjectiveVector {
        ObjectiveVector(self.0.iter().map(|v| v * factor).collect())
    }

    /// Lexicographic order on components.
    pub fn canonical_cmp(&self, other: &ObjectiveVector) -> Ordering {
        for (a, b) in self.0.iter().zip(&other.0) {
            match a.total_cmp(b) {
                Ordering::Equal => continue,
                o => return o,
            }
        }
        self.k().cmp(&other.k())
    }
}

impl From<[f64; 2]> for ObjectiveVector {
    fn from(v: [f64; 2]) -> Self {
        ObjectiveVector::pair(v[0], v[1])
    }
}

/// Anything that carries an objective vector.
pub trait HasObjectives {
    fn objectives(&self) -> &ObjectiveVector;
}

impl HasObjectives for ObjectiveVector {
    fn objectives(&self) -> &ObjectiveVector {
        self
    }
}

impl<T: HasObjectives> HasObjectives for &T {
    fn objectives(&self) -> &ObjectiveVector {
        (*self).objectives()
    }
}

/// An objective vector plus the full configuration that produced it.
///
/// Every subQ shares the single `theta_c`; `theta_p` and `theta_s` hold one
/// entry per subQ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Solution {
    pub objectives: ObjectiveVector,
    pub theta_c: ConfigVector,
    pub theta_p: Vec<ConfigVector>,
    pub theta_s: Vec<ConfigVector>,
}

impl Solution {
    pub fn num_subqs(&self) -> usize {
        self.theta_p.len()
    }

    /// Structural check of the shared-context constraint.
    pub fn check_shape(&self, m: usize) -> Result<()> {
        if self.theta_p.len() != m || self.theta_s.len() != m {
            return Err(TuneError::contract(format!(
                "solution carries {}/{} plan/stage entries for {m} subQs",
                self.theta_p.len(),
                self.theta_s.len()
            )));
        }
        Ok(())
    }
}

impl HasObjectives for Solution {
    fn objectives(&self) -> &ObjectiveVector {
        &self.objectives
    }
}

/// A nondominated collection in canonical order (lexicographic on objectives).
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParetoSet<T = Solution> {
    entries: Vec<T>,
}

impl<T> Default for ParetoSet<T> {
    fn default() -> Self {
        ParetoSet { entries: Vec::new() }
    }
}

impl<T: HasObjectives> ParetoSet<T> {
    pub fn entries(&self) -> &[T] {
        &self.entries
    }

    pub fn into_entries(self) -> Vec<T> {
        self.entries
    }

    pub fn len(&self) -> usize {
        self.entries.len()
    }

    pub fn is_empty(&self) -> bool {
        self.entries.is_empty()
    }

    pub fn iter(&self) -> std::slice::Iter<'_, T> {
        self.entries.iter()
    }

    pub fn objective_set(&self) -> Vec<ObjectiveVector> {
        self.entries.iter().map(|e| e.objectives().clone()).collect()
    }

    pub fn map<U: HasObjectives>(self, f: impl FnMut(T) -> U) -> ParetoSet<U> {
        ParetoSet {
            entries: self.entries.into_iter().map(f).collect(),
        }
    }
}

/// True iff `a` is no worse than `b` everywhere and strictly better somewhere.
///
/// # Panics
///
/// On a dimension mismatch (contract violation).
pub fn dominates(a: &ObjectiveVector, b: &ObjectiveVector) -> bool {
    assert_eq!(a.k(), b.k(), "contract violation: objective dimension mismatch");
    let mut strict = false;
    for (x, y) in a.0.iter().zip(&b.0) {
        if x > y {
            return false;
        }
        if x < y {
            strict = true;
        }
    }
    strict
}

/// Exactly the nondominated subset of `points`, in canonical order.
///
/// Exactly equal objective vectors are collapsed to the first one in input
/// order, so the objective set is canonical while the configuration kept for
/// a duplicated vector depends on input order.
pub fn pareto_filter<T: HasObjectives>(points: Vec<T>) -> ParetoSet<T> {
    if points.is_empty() {
        return ParetoSet::default();
    }
    let k = points[0].objectives().k();
    assert!(
        points.iter().all(|p| p.objectives().k() == k),
        "contract violation: mixed objective dimensions"
    );
    let mut points = points;
    // Stable sort keeps input order among equal vectors.
    points.sort_by(|a, b| a.objectives().canonical_cmp(b.objectives()));

    let mut kept: Vec<T> = Vec::new();
    if k == 2 {
        // Sweep: a point survives iff its second objective beats every earlier one.
        let mut best = f64::INFINITY;
        for p in points {
            let y = p.objectives().get(1);
            if y < best {
                best = y;
                kept.push(p);
            }
        }
    } else {
        // A lexicographically later point can never dominate an earlier one.
        for p in points {
            let o = p.objectives();
            if !kept
                .iter()
                .any(|q| q.objectives() == o || dominates(q.objectives(), o))
            {
                kept.push(p);
            }
        }
    }
    ParetoSet { entries: kept }
}

/// Area dominated by the 2-D point set and bounded by `reference`.
///
/// Points not strictly inside the reference box contribute nothing.
pub fn hypervolume_of(points: &[ObjectiveVector], reference: &ObjectiveVector) -> Result<f64> {
    if reference.k() != 2 {
        return Err(TuneError::contract("hypervolume is defined for k = 2 only"));
    }
    if reference.values().iter().any(|v| !v.is_finite()) {
        return Err(TuneError::contract("non-finite hypervolume reference point"));
    }
    let (rx, ry) = (reference.get(0), reference.get(1));
    let mut inside: Vec<(f64, f64)> = points
        .iter()
        .map(|p| {
            assert_eq!(p.k(), 2, "contract violation: hypervolume needs 2-D points");
            (p.get(0), p.get(1))
        })
        .filter(|&(x, y)| x < rx && y < ry)
        .collect();
    inside.sort_by(|a, b| a.0.total_cmp(&b.0).then(a.1.total_cmp(&b.1)));

    let mut area = 0.0;
    let mut ceiling = ry;
    for (x, y) in inside {
        if y < ceiling {
            area += (rx - x) * (ceiling - y);
            ceiling = y;
        }
    }
    Ok(area)
}

/// Hypervolume of a Pareto set (k = 2) with respect to `reference`.
pub fn hypervolume<T: HasObjectives>(set: &ParetoSet<T>, reference: &ObjectiveVector) -> Result<f64> {
    hypervolume_of(&set.objective_set(), reference)
}

/// Componentwise minimum (utopia) and maximum (nadir).
pub fn utopia_nadir<T: HasObjectives>(set: &ParetoSet<T>) -> Result<(ObjectiveVector, ObjectiveVector)> {
    bounds(set.entries.iter().map(|e| e.objectives()))
}

pub(crate) fn bounds<'a>(
    mut points: impl Iterator<Item = &'a ObjectiveVector>,
) -> Result<(ObjectiveVector, ObjectiveVector)> {
    let first = points.next().ok_or(TuneError::EmptyParetoSet)?;
    let mut lo = first.0.clone();
    let mut hi = first.0.clone();
    for p in points {
        for (i, &v) in p.0.iter().enumerate() {
            lo[i] = lo[i].min(v);
            hi[i] = hi[i].max(v);
        }
    }
    Ok((ObjectiveVector(lo), ObjectiveVector(hi)))
}

/// Per-objective min-max scaling to [0, 1]; a zero-range objective maps to 0.
pub fn normalize<T: HasObjectives>(set: &ParetoSet<T>) -> Vec<ObjectiveVector> {
    normalize_points(set.entries.iter().map(|e| e.objectives()))
}

pub(crate) fn normalize_points<'a>(
    points: impl Iterator<Item = &'a ObjectiveVector> + Clone,
) -> Vec<ObjectiveVector> {
    let Ok((lo, hi)) = bounds(points.clone()) else {
        return Vec::new();
    };
    points
        .map(|p| {
            ObjectiveVector(
                p.0.iter()
                    .enumerate()
                    .map(|(i, &v)| {
                        let range = hi.0[i] - lo.0[i];
                        if range > 0.0 {
                            (v - lo.0[i]) / range
                        } else {
                            0.0
                        }
                    })
                    .collect(),
            )
        })
        .collect()
}
