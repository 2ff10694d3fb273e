#![allow(dead_code)]

use std::io::Write;

use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use tune_core::harness::{gen_workload, Workload, WorkloadSpec};
use tune_core::pareto::{snap_to_grid, HasObjectives};
use tune_core::space::{ParamDef, ParamKind};
use tune_core::{ConfigSpace, ConfigVector, Group, NonDecision, ObjectiveVector, Spaces, SubqModel, TuneError};

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

/// Writes straight to stderr so the line survives output capture.
pub fn report(name: &str, pass: bool, detail: &str) {
    let status = if pass { "PASS" } else { "FAIL" };
    let _ = writeln!(std::io::stderr(), "[{status}] {name}: {detail}");
}

/// Sorted, deduplicated objective vectors.
pub fn objective_set<T: HasObjectives>(items: impl IntoIterator<Item = T>) -> Vec<ObjectiveVector> {
    let mut v: Vec<ObjectiveVector> = items.into_iter().map(|t| t.objectives().clone()).collect();
    v.sort_by(|a, b| a.canonical_cmp(b));
    v.dedup();
    v
}

/// Random points on the dyadic grid in [lo, hi).
pub fn random_points(r: &mut ChaCha8Rng, n: usize, lo: f64, hi: f64) -> Vec<ObjectiveVector> {
    (0..n)
        .map(|_| ObjectiveVector::pair(snap_to_grid(r.gen_range(lo..hi)), snap_to_grid(r.gen_range(lo..hi))))
        .collect()
}

/// A strictly decreasing two-objective front of `n` points.
pub fn random_front(r: &mut ChaCha8Rng, n: usize) -> Vec<ObjectiveVector> {
    let mut x = 0.0;
    let mut y = 1000.0;
    (0..n)
        .map(|_| {
            x += snap_to_grid(r.gen_range(0.5..10.0));
            y -= snap_to_grid(r.gen_range(0.5..10.0));
            ObjectiveVector::pair(x, y)
        })
        .collect()
}

/// A small random workload from the synthetic generator.
pub fn small_workload(seed: u64, m: usize) -> Workload {
    let spec = WorkloadSpec {
        seed,
        m,
        ..WorkloadSpec::default()
    };
    gen_workload(&spec).expect("valid spec")
}

fn grid(n: usize) -> Vec<f64> {
    (0..n).map(|i| i as f64).collect()
}

/// One integer parameter per group; objectives come from a random table.
pub struct TableModel {
    spaces: Spaces,
    /// Indexed by subQ, context, plan and stage value.
    table: Vec<Vec<Vec<Vec<ObjectiveVector>>>>,
}

impl TableModel {
    pub fn random(r: &mut ChaCha8Rng, m: usize, nc: usize, np: usize, ns: usize, integer: bool) -> Self {
        let spaces = Spaces {
            context: ConfigSpace::new(Group::Context, vec![ParamDef::new("c", ParamKind::IntGrid, &grid(nc), 0.)]).unwrap(),
            plan: ConfigSpace::new(Group::Plan, vec![ParamDef::new("p", ParamKind::IntGrid, &grid(np), 0.)]).unwrap(),
            stage: ConfigSpace::new(Group::Stage, vec![ParamDef::new("s", ParamKind::IntGrid, &grid(ns), 0.)]).unwrap(),
        };
        let mut draw = || {
            if integer {
                ObjectiveVector::pair(r.gen_range(1..20) as f64, r.gen_range(1..20) as f64)
            } else {
                ObjectiveVector::pair(snap_to_grid(r.gen_range(1.0..100.0)), snap_to_grid(r.gen_range(1.0..100.0)))
            }
        };
        let table = (0..m)
            .map(|_| (0..nc).map(|_| (0..np).map(|_| (0..ns).map(|_| draw()).collect()).collect()).collect())
            .collect();
        TableModel { spaces, table }
    }
}

impl SubqModel for TableModel {
    fn spaces(&self) -> &Spaces {
        &self.spaces
    }

    fn num_subqs(&self) -> usize {
        self.table.len()
    }

    fn predict_subq(
        &self,
        subq: usize,
        c: &ConfigVector,
        p: &ConfigVector,
        s: &ConfigVector,
        _nd: &NonDecision,
    ) -> tune_core::Result<ObjectiveVector> {
        let t = self.table.get(subq).ok_or(TuneError::UnknownSubq(subq))?;
        Ok(t[c.get(0) as usize][p.get(0) as usize][s.get(0) as usize].clone())
    }
}

/// One subQ whose plan value `i` maps to the `i`-th point of a fixed front.
pub struct LookupModel {
    spaces: Spaces,
    points: Vec<ObjectiveVector>,
}

impl LookupModel {
    pub fn new(points: Vec<ObjectiveVector>) -> Self {
        let spaces = Spaces {
            context: ConfigSpace::new(Group::Context, vec![ParamDef::new("c", ParamKind::IntGrid, &[0.], 0.)]).unwrap(),
            plan: ConfigSpace::new(Group::Plan, vec![ParamDef::new("p", ParamKind::IntGrid, &grid(points.len()), 0.)]).unwrap(),
            stage: ConfigSpace::new(Group::Stage, vec![ParamDef::new("s", ParamKind::IntGrid, &[0.], 0.)]).unwrap(),
        };
        LookupModel { spaces, points }
    }
}

impl SubqModel for LookupModel {
    fn spaces(&self) -> &Spaces {
        &self.spaces
    }

    fn num_subqs(&self) -> usize {
        1
    }

    fn predict_subq(
        &self,
        _subq: usize,
        _c: &ConfigVector,
        p: &ConfigVector,
        _s: &ConfigVector,
        _nd: &NonDecision,
    ) -> tune_core::Result<ObjectiveVector> {
        Ok(self.points[p.get(0) as usize].clone())
    }
}
