//! Simulator of runtime re-optimization with a fixed context.
//!
//! At submission the per-subQ plan parameters of a compile-time solution are
//! collapsed into one plan configuration. SubQs then complete in topological
//! order; each completion reveals true cardinalities, may trigger an
//! optimization request for the remaining (collapsed) plan, and lets join
//! algorithms move toward broadcast, never back.

use serde::{Deserialize, Serialize};

use crate::costmodel::{CostModel, NonDecision, SubqModel, MB};
use crate::error::{Result, TuneError};
use crate::hmooc::{QueryDAG, SubqRole, WeightVector};
use crate::pareto::{normalize_points, ObjectiveVector, Solution};
use crate::sampling::sample_lhs;
use crate::space::{ConfigSpace, ConfigVector, ParamDef};

/// Join algorithm, ordered so that runtime conversion only moves up.
#[derive(Debug, Clone, Copy, PartialEq, Eq, PartialOrd, Ord, Hash, Serialize, Deserialize)]
#[serde(rename_all = "UPPERCASE")]
pub enum JoinAlgo {
    None,
    Smj,
    Shj,
    Bhj,
}

/// Size-based join selection that never downgrades `current`.
///
/// Candidate is broadcast if `build_bytes <= s4`, else shuffled hash if
/// `build_bytes <= s3`, else sort-merge; the result is the larger of the
/// candidate and `current`.
pub fn join_select(build_bytes: f64, s4_bytes: f64, s3_bytes: f64, current: JoinAlgo) -> Result<JoinAlgo> {
    if build_bytes.is_nan() || build_bytes < 0.0 {
        return Err(TuneError::contract(format!("join input size {build_bytes} must be >= 0")));
    }
    let candidate = if build_bytes <= s4_bytes {
        JoinAlgo::Bhj
    } else if build_bytes <= s3_bytes {
        JoinAlgo::Shj
    } else {
        JoinAlgo::Smj
    };
    Ok(candidate.max(current))
}

/// Lower bound (MB) on the collapsed broadcast threshold.
pub const BROADCAST_FLOOR_MB: f64 = 25.0;
/// Lower bound (MB) on the collapsed shuffled-hash threshold.
pub const SHUFFLE_HASH_FLOOR_MB: f64 = 0.0;

/// Smallest of `values`, raised to `floor`.
pub fn floored_min(values: &[f64], floor: f64) -> Option<f64> {
    values.iter().copied().reduce(f64::min).map(|v| v.max(floor))
}

fn snap_up(p: &ParamDef, v: f64) -> f64 {
    p.values.iter().copied().find(|&g| g >= v).unwrap_or_else(|| p.max())
}

fn threshold_indices(plan: &ConfigSpace) -> Result<(usize, usize)> {
    let find = |n: &str| {
        plan.index_of(n)
            .ok_or_else(|| TuneError::config(format!("plan space lacks parameter {n}")))
    };
    Ok((find("s3")?, find("s4")?))
}

/// Collapses per-subQ plan configurations into one.
///
/// Broadcast (s4) and shuffled-hash (s3) thresholds take the smallest value
/// over join subQs, floored at [`BROADCAST_FLOOR_MB`] / [`SHUFFLE_HASH_FLOOR_MB`]
/// and snapped up to the grid; without joins they take space defaults. Every
/// other dim comes from the first subQ's configuration.
pub fn aggregate_theta_p(theta_p: &[ConfigVector], dag: &QueryDAG, plan: &ConfigSpace) -> Result<ConfigVector> {
    if theta_p.len() != dag.len() {
        return Err(TuneError::contract(format!("{} plan configs for {} subQs", theta_p.len(), dag.len())));
    }
    for cv in theta_p {
        plan.validate(cv)?;
    }
    let (s3, s4) = threshold_indices(plan)?;
    let mut out = theta_p[0].clone();
    let joins: Vec<usize> = (0..dag.len()).filter(|&i| dag.is_join(i)).collect();
    if joins.is_empty() {
        out.coords[s3] = plan.dims[s3].default;
        out.coords[s4] = plan.dims[s4].default;
        return Ok(out);
    }
    for (dim, floor) in [(s4, BROADCAST_FLOOR_MB), (s3, SHUFFLE_HASH_FLOOR_MB)] {
        let vals: Vec<f64> = joins.iter().map(|&i| theta_p[i].get(dim)).collect();
        let v = floored_min(&vals, floor).expect("at least one join");
        out.coords[dim] = snap_up(&plan.dims[dim], v);
    }
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum RequestKind {
    CollapsedPlan,
    QueryStage,
}

/// A candidate optimization request.
#[derive(Debug, Clone, Copy, PartialEq, Serialize, Deserialize)]
pub struct RequestEvent {
    pub kind: RequestKind,
    pub has_join: bool,
    pub all_join_inputs_known: bool,
    pub is_scan_based: bool,
    pub input_bytes: f64,
    pub s1_target_bytes: f64,
}

/// Pruning rules: collapsed plans need a join with all inputs known; query
/// stages must not be scan-based and must exceed the target partition size.
pub fn should_send_request(e: &RequestEvent) -> bool {
    match e.kind {
        RequestKind::CollapsedPlan => e.has_join && e.all_join_inputs_known,
        RequestKind::QueryStage => !e.is_scan_based && e.input_bytes > e.s1_target_bytes,
    }
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct RuntimePolicy {
    pub prune_rules_enabled: bool,
    pub reoptimize_weights: WeightVector,
    /// Candidate plan configurations for re-optimization.
    pub theta_p_grid: Vec<ConfigVector>,
}

impl RuntimePolicy {
    /// Pruning enabled with an `n`-point Latin hypercube grid over the plan space.
    pub fn with_lhs_grid(plan: &ConfigSpace, weights: WeightVector, n: usize, seed: u64) -> Self {
        RuntimePolicy {
            prune_rules_enabled: true,
            reoptimize_weights: weights,
            theta_p_grid: sample_lhs(plan, None, n, seed),
        }
    }
}

/// The collapsed plan after one event.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct PlanSnapshot {
    /// The subQ whose completion produced this snapshot; `None` at submission.
    pub after: Option<usize>,
    pub theta_p: ConfigVector,
    pub joins: Vec<JoinAlgo>,
    pub clock: f64,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Trace {
    /// Sum of realized subQ latencies.
    pub latency: f64,
    pub cost: f64,
    pub requests_sent: usize,
    pub requests_pruned: usize,
    /// Re-optimizations that changed the plan configuration.
    pub plan_changes: usize,
    pub realized: Vec<ObjectiveVector>,
    pub snapshots: Vec<PlanSnapshot>,
}

impl Trace {
    /// True if every subQ's join algorithm is nondecreasing across snapshots.
    pub fn joins_monotone(&self) -> bool {
        self.snapshots
            .windows(2)
            .all(|w| w[0].joins.iter().zip(&w[1].joins).all(|(a, b)| a <= b))
    }
}

/// Mutable simulation state. The context is fixed at submission.
#[derive(Debug, Clone, PartialEq)]
pub struct RuntimeState {
    theta_c: ConfigVector,
    theta_p: ConfigVector,
    theta_s: Vec<ConfigVector>,
    joins: Vec<JoinAlgo>,
    completed: Vec<bool>,
    known_alpha: Vec<f64>,
    /// Cardinalities the current plan was optimized for.
    plan_alpha: Vec<f64>,
    frozen: bool,
    requests_sent: usize,
    requests_pruned: usize,
    plan_changes: usize,
    clock: f64,
    cost: f64,
    realized: Vec<Option<ObjectiveVector>>,
    snapshots: Vec<PlanSnapshot>,
}

impl RuntimeState {
    pub fn theta_c(&self) -> &ConfigVector {
        &self.theta_c
    }

    pub fn theta_p(&self) -> &ConfigVector {
        &self.theta_p
    }

    pub fn joins(&self) -> &[JoinAlgo] {
        &self.joins
    }

    pub fn is_completed(&self, subq: usize) -> bool {
        self.completed[subq]
    }

    pub fn is_done(&self) -> bool {
        self.completed.iter().all(|&c| c)
    }

    pub fn clock(&self) -> f64 {
        self.clock
    }

    pub fn requests_sent(&self) -> usize {
        self.requests_sent
    }

    pub fn requests_pruned(&self) -> usize {
        self.requests_pruned
    }

    fn snapshot(&mut self, after: Option<usize>) {
        self.snapshots.push(PlanSnapshot {
            after,
            theta_p: self.theta_p.clone(),
            joins: self.joins.clone(),
            clock: self.clock,
        });
    }

    pub fn into_trace(self) -> Trace {
        Trace {
            latency: self.clock,
            cost: self.cost,
            requests_sent: self.requests_sent,
            requests_pruned: self.requests_pruned,
            plan_changes: self.plan_changes,
            realized: self.realized.into_iter().flatten().collect(),
            snapshots: self.snapshots,
        }
    }
}

/// Replays one query on the synthetic model.
#[derive(Debug, Clone)]
pub struct Simulator<'a> {
    dag: &'a QueryDAG,
    model: &'a CostModel,
    true_nd: &'a NonDecision,
    est_nd: &'a NonDecision,
    policy: &'a RuntimePolicy,
}

impl<'a> Simulator<'a> {
    pub fn new(
        dag: &'a QueryDAG,
        model: &'a CostModel,
        true_nd: &'a NonDecision,
        est_nd: &'a NonDecision,
        policy: &'a RuntimePolicy,
    ) -> Result<Self> {
        let m = model.num_subqs();
        if dag.len() != m {
            return Err(TuneError::contract(format!("DAG has {} subQs, model has {m}", dag.len())));
        }
        true_nd.validate(m)?;
        est_nd.validate(m)?;
        for i in 0..m {
            if dag.is_join(i) != model.is_join(i) {
                return Err(TuneError::contract(format!("subQ {i} join role differs between DAG and model")));
            }
        }
        for cv in &policy.theta_p_grid {
            model.spaces().plan.validate(cv)?;
        }
        if policy.reoptimize_weights.k() != 2 {
            return Err(TuneError::contract("runtime weights must cover both objectives"));
        }
        Ok(Simulator {
            dag,
            model,
            true_nd,
            est_nd,
            policy,
        })
    }

    fn build_bytes(&self, subq: usize, alpha: f64) -> f64 {
        self.model.build_bytes(subq, alpha).unwrap_or(0.0)
    }

    fn select(&self, subq: usize, alpha: f64, theta_p: &ConfigVector, current: JoinAlgo) -> Result<JoinAlgo> {
        let t = self.model.thresholds(theta_p);
        join_select(self.build_bytes(subq, alpha), t.broadcast, t.shuffle_hash, current)
    }

    fn inputs_known(&self, state: &RuntimeState, subq: usize) -> bool {
        self.dag.subqs()[subq].children.iter().all(|&c| state.completed[c])
    }

    /// Submits a compile-time solution: collapses its plan configurations and
    /// leaves join algorithms undecided until their inputs are known.
    pub fn submit(&self, plan: &Solution) -> Result<RuntimeState> {
        let m = self.dag.len();
        plan.check_shape(m)?;
        self.model.spaces().context.validate(&plan.theta_c)?;
        let theta_p = aggregate_theta_p(&plan.theta_p, self.dag, &self.model.spaces().plan)?;
        let mut state = RuntimeState {
            theta_c: plan.theta_c.clone(),
            theta_p,
            theta_s: plan.theta_s.clone(),
            joins: vec![JoinAlgo::None; m],
            completed: vec![false; m],
            known_alpha: self.est_nd.alpha.clone(),
            plan_alpha: self.est_nd.alpha.clone(),
            frozen: false,
            requests_sent: 0,
            requests_pruned: 0,
            plan_changes: 0,
            clock: 0.0,
            cost: 0.0,
            realized: vec![None; m],
            snapshots: Vec::new(),
        };
        state.snapshot(None);
        Ok(state)
    }

    /// Submits with every join algorithm fixed from estimates and no runtime adaptation.
    pub fn submit_frozen(&self, plan: &Solution) -> Result<RuntimeState> {
        let mut state = self.submit(plan)?;
        state.frozen = true;
        for i in 0..self.dag.len() {
            if self.model.is_join(i) {
                state.joins[i] = self.select(i, self.est_nd.alpha[i], &state.theta_p, JoinAlgo::None)?;
            }
        }
        state.snapshots.clear();
        state.snapshot(None);
        Ok(state)
    }

    fn record(&self, state: &mut RuntimeState, event: RequestEvent) -> bool {
        if !self.policy.prune_rules_enabled || should_send_request(&event) {
            state.requests_sent += 1;
            true
        } else {
            state.requests_pruned += 1;
            false
        }
    }

    /// Predicted objectives of the remaining subQs under a candidate plan.
    fn remaining_objectives(&self, state: &RuntimeState, cand: &ConfigVector) -> Result<ObjectiveVector> {
        let nd = NonDecision {
            alpha: state.known_alpha.clone(),
            beta: self.est_nd.beta.clone(),
            gamma: self.est_nd.gamma,
        };
        let mut total = ObjectiveVector::zeros(2);
        for j in (0..self.dag.len()).filter(|&j| !state.completed[j]) {
            let join = if self.model.is_join(j) {
                Some(self.select(j, state.known_alpha[j], cand, state.joins[j])?)
            } else {
                None
            };
            let o = self.model.evaluate(j, &state.theta_c, cand, &state.theta_s[j], &nd, join)?;
            total.add_assign(&o.objectives);
        }
        Ok(total)
    }

    fn reoptimize(&self, state: &mut RuntimeState) -> Result<()> {
        if state.known_alpha == state.plan_alpha {
            return Ok(());
        }
        let candidates: Vec<&ConfigVector> = std::iter::once(&state.theta_p).chain(&self.policy.theta_p_grid).collect();
        let objectives = candidates
            .iter()
            .map(|c| self.remaining_objectives(state, c))
            .collect::<Result<Vec<_>>>()?;
        let norm = normalize_points(objectives.iter());
        let w = self.policy.reoptimize_weights.values();
        let score = |i: usize| norm[i].values().iter().zip(w).map(|(v, w)| v * w).sum::<f64>();
        let mut best = 0;
        for i in 1..candidates.len() {
            if score(i) < score(best) {
                best = i;
            }
        }
        if best != 0 && *candidates[best] != state.theta_p {
            state.theta_p = candidates[best].clone();
            state.plan_changes += 1;
        }
        state.plan_alpha = state.known_alpha.clone();
        Ok(())
    }

    /// Runs and completes subQ `subq`.
    pub fn step(&self, state: &mut RuntimeState, subq: usize) -> Result<()> {
        let m = self.dag.len();
        if subq >= m {
            return Err(TuneError::UnknownSubq(subq));
        }
        if state.completed[subq] {
            return Err(TuneError::AlreadyCompleted(subq));
        }
        let role = self.dag.subqs()[subq].role;

        if !state.frozen {
            let stage = RequestEvent {
                kind: RequestKind::QueryStage,
                has_join: self.model.is_join(subq),
                all_join_inputs_known: self.inputs_known(state, subq),
                is_scan_based: role == SubqRole::Scan,
                input_bytes: self.model.shuffle_bytes(subq, state.known_alpha[subq]),
                s1_target_bytes: self.model.target_partition_bytes(&state.theta_p),
            };
            // Stage requests tune stage parameters, which the synthetic model ignores.
            self.record(state, stage);
        }

        let join = if self.model.is_join(subq) {
            if state.joins[subq] == JoinAlgo::None {
                state.joins[subq] = self.select(subq, state.known_alpha[subq], &state.theta_p, JoinAlgo::None)?;
            }
            Some(state.joins[subq])
        } else {
            None
        };
        let out = self.model.evaluate(
            subq,
            &state.theta_c,
            &state.theta_p,
            &state.theta_s[subq],
            self.true_nd,
            join,
        )?;
        state.clock += out.objectives.get(0);
        state.cost += out.objectives.get(1);
        state.realized[subq] = Some(out.objectives);
        state.completed[subq] = true;

        if !state.frozen {
            state.known_alpha[subq] = self.true_nd.alpha[subq];
            let consumers: Vec<usize> = self.dag.parents(subq).filter(|&p| !state.completed[p]).collect();
            for &p in &consumers {
                if self.inputs_known(state, p) {
                    state.known_alpha[p] = self.true_nd.alpha[p];
                }
            }
            if !state.is_done() {
                let join_consumers: Vec<usize> = consumers.iter().copied().filter(|&p| self.model.is_join(p)).collect();
                let plan = RequestEvent {
                    kind: RequestKind::CollapsedPlan,
                    has_join: !join_consumers.is_empty(),
                    all_join_inputs_known: join_consumers.iter().all(|&p| self.inputs_known(state, p)),
                    is_scan_based: false,
                    input_bytes: 0.0,
                    s1_target_bytes: self.model.target_partition_bytes(&state.theta_p),
                };
                if self.record(state, plan) {
                    self.reoptimize(state)?;
                }
                for j in 0..m {
                    if !state.completed[j] && self.model.is_join(j) && self.inputs_known(state, j) {
                        state.joins[j] = self.select(j, state.known_alpha[j], &state.theta_p, state.joins[j])?;
                    }
                }
            }
        }
        state.snapshot(Some(subq));
        Ok(())
    }

    fn replay(&self, mut state: RuntimeState) -> Result<Trace> {
        for i in 0..self.dag.len() {
            self.step(&mut state, i)?;
        }
        Ok(state.into_trace())
    }

    pub fn run(&self, plan: &Solution) -> Result<Trace> {
        self.replay(self.submit(plan)?)
    }

    pub fn run_frozen(&self, plan: &Solution) -> Result<Trace> {
        self.replay(self.submit_frozen(plan)?)
    }
}

/// Topological replay of `plan` with runtime re-optimization.
pub fn simulate(
    dag: &QueryDAG,
    model: &CostModel,
    plan: &Solution,
    true_nd: &NonDecision,
    est_nd: &NonDecision,
    policy: &RuntimePolicy,
) -> Result<Trace> {
    Simulator::new(dag, model, true_nd, est_nd, policy)?.run(plan)
}

/// Replay of the compile-time plan with join algorithms chosen from estimates.
pub fn simulate_frozen(
    dag: &QueryDAG,
    model: &CostModel,
    plan: &Solution,
    true_nd: &NonDecision,
    est_nd: &NonDecision,
) -> Result<Trace> {
    let policy = RuntimePolicy {
        prune_rules_enabled: true,
        reoptimize_weights: WeightVector::pair(0.5)?,
        theta_p_grid: Vec::new(),
    };
    Simulator::new(dag, model, true_nd, est_nd, &policy)?.run_frozen(plan)
}

/// Convenience: bytes in `mb` megabytes.
pub fn mb(mb: f64) -> f64 {
    mb * MB
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::costmodel::{ModelConstants, Prices, SubqConstants};
    use crate::hmooc::SubQ;
    use crate::space::{ParamKind, Spaces};

    #[test]
    fn join_select_examples() {
        assert_eq!(join_select(mb(8.), mb(10.), 0., JoinAlgo::None).unwrap(), JoinAlgo::Bhj);
        assert_eq!(join_select(4.5 * 1024. * MB, mb(10.), 0., JoinAlgo::Bhj).unwrap(), JoinAlgo::Bhj);
        assert_eq!(join_select(mb(50.), mb(25.), 0., JoinAlgo::Smj).unwrap(), JoinAlgo::Smj);
        assert_eq!(join_select(mb(50.), mb(25.), mb(64.), JoinAlgo::Smj).unwrap(), JoinAlgo::Shj);
        assert!(join_select(-1.0, 0., 0., JoinAlgo::None).is_err());
        assert!(join_select(f64::NAN, 0., 0., JoinAlgo::None).is_err());
    }

    #[test]
    fn floored_min_examples() {
        assert_eq!(floored_min(&[5., 30., 100.], BROADCAST_FLOOR_MB), Some(25.));
        assert_eq!(floored_min(&[40., 60.], BROADCAST_FLOOR_MB), Some(40.));
        assert_eq!(floored_min(&[], BROADCAST_FLOOR_MB), None);
    }

    fn plan_with(s4: f64, s3: f64) -> ConfigVector {
        let mut p = Spaces::spark_default().plan.defaults();
        p.coords[1] = s3;
        p.coords[2] = s4;
        p
    }

    #[test]
    fn aggregate_thresholds() {
        let sp = Spaces::spark_default();
        let roles = [SubqRole::Scan, SubqRole::Join, SubqRole::Join, SubqRole::Join];
        let dag = QueryDAG::chain(&roles).unwrap();
        let ps = vec![plan_with(3200., 256.), plan_with(5., 16.), plan_with(50., 64.), plan_with(100., 32.)];
        let out = aggregate_theta_p(&ps, &dag, &sp.plan).unwrap();
        assert_eq!(out.coords[2], 25.);
        assert_eq!(out.coords[1], 16.);
        assert_eq!(out.coords[0], ps[0].coords[0]);

        let dag = QueryDAG::chain(&[SubqRole::Scan, SubqRole::Other]).unwrap();
        let out = aggregate_theta_p(&[plan_with(400., 64.), plan_with(800., 0.)], &dag, &sp.plan).unwrap();
        assert_eq!(out.coords[2], 10.);
        assert_eq!(out.coords[1], 0.);
    }

    #[test]
    fn aggregate_snaps_floor_to_grid() {
        let mut sp = Spaces::spark_default().plan;
        sp.dims[2] = ParamDef::new("s4", ParamKind::IntGrid, &[0., 10., 40., 60., 100.], 10.).important();
        let dag = QueryDAG::chain(&[SubqRole::Join, SubqRole::Join]).unwrap();
        let p = |v| {
            let mut c = sp.defaults();
            c.coords[2] = v;
            c
        };
        assert_eq!(aggregate_theta_p(&[p(40.), p(60.)], &dag, &sp).unwrap().coords[2], 40.);
        assert_eq!(aggregate_theta_p(&[p(10.), p(60.)], &dag, &sp).unwrap().coords[2], 40.);
    }

    #[test]
    fn pruning_rules() {
        let ev = |kind, has_join, known, scan, input| RequestEvent {
            kind,
            has_join,
            all_join_inputs_known: known,
            is_scan_based: scan,
            input_bytes: input,
            s1_target_bytes: mb(64.),
        };
        assert!(!should_send_request(&ev(RequestKind::CollapsedPlan, false, true, false, 0.)));
        assert!(!should_send_request(&ev(RequestKind::CollapsedPlan, true, false, false, 0.)));
        assert!(should_send_request(&ev(RequestKind::CollapsedPlan, true, true, false, 0.)));
        assert!(!should_send_request(&ev(RequestKind::QueryStage, false, true, true, 1024. * MB)));
        assert!(should_send_request(&ev(RequestKind::QueryStage, false, true, false, mb(128.))));
        assert!(!should_send_request(&ev(RequestKind::QueryStage, false, true, false, mb(64.))));
    }

    /// scan(0), scan(1) -> join(2); the join's build side is 16x underestimated.
    fn join_scenario() -> (QueryDAG, CostModel, NonDecision, NonDecision, Solution) {
        let dag = QueryDAG::new(vec![
            SubQ { id: 0, role: SubqRole::Scan, children: vec![] },
            SubQ { id: 1, role: SubqRole::Scan, children: vec![] },
            SubQ { id: 2, role: SubqRole::Join, children: vec![0, 1] },
        ])
        .unwrap();
        let scan = SubqConstants {
            work: 1e-6,
            shuffle_bytes_per_row: 100.,
            base_overhead: 0.5,
            build_bytes_per_row: None,
        };
        let join = SubqConstants {
            build_bytes_per_row: Some(100.),
            ..scan.clone()
        };
        let model = CostModel::new(
            Spaces::spark_default(),
            vec![scan.clone(), scan, join],
            ModelConstants::default(),
            Prices::default(),
            0,
        )
        .unwrap();
        let truth = NonDecision::uniform(vec![1e7, 1e7, 4.5e7]);
        let est = NonDecision::uniform(vec![1e7, 1e7, 4.5e7 / 16.]);
        let sp = Spaces::spark_default();
        let mut ctx = sp.context.defaults();
        ctx.coords[0] = 4.;
        ctx.coords[2] = 8.;
        let plan = Solution {
            objectives: ObjectiveVector::pair(0., 0.),
            theta_c: ctx,
            theta_p: vec![plan_with(400., 0.); 3],
            theta_s: vec![sp.stage.defaults(); 3],
        };
        (dag, model, truth, est, plan)
    }

    fn policy(prune: bool) -> RuntimePolicy {
        let sp = Spaces::spark_default();
        RuntimePolicy {
            prune_rules_enabled: prune,
            ..RuntimePolicy::with_lhs_grid(&sp.plan, WeightVector::pair(0.9).unwrap(), 30, 1)
        }
    }

    #[test]
    fn underestimate_hurts_frozen_plan() {
        let (dag, model, truth, est, plan) = join_scenario();
        let frozen = simulate_frozen(&dag, &model, &plan, &truth, &est).unwrap();
        let adaptive = simulate(&dag, &model, &plan, &truth, &est, &policy(true)).unwrap();
        assert_eq!(frozen.snapshots.last().unwrap().joins[2], JoinAlgo::Bhj);
        assert_ne!(adaptive.snapshots.last().unwrap().joins[2], JoinAlgo::Bhj);
        assert!(adaptive.latency < frozen.latency, "{} vs {}", adaptive.latency, frozen.latency);
        assert!(adaptive.joins_monotone() && frozen.joins_monotone());
    }

    #[test]
    fn perfect_information_fixed_point() {
        let (dag, model, truth, _, plan) = join_scenario();
        let t = simulate(&dag, &model, &plan, &truth, &truth, &policy(false)).unwrap();
        assert_eq!(t.plan_changes, 0);
        assert!(t.snapshots.iter().all(|s| s.theta_p == t.snapshots[0].theta_p));
        let f = simulate_frozen(&dag, &model, &plan, &truth, &truth).unwrap();
        assert_eq!(t.snapshots.last().unwrap().joins, f.snapshots.last().unwrap().joins);
        assert_eq!(t.latency, f.latency);
    }

    #[test]
    fn clock_is_sum_of_realized() {
        let (dag, model, truth, est, plan) = join_scenario();
        let t = simulate(&dag, &model, &plan, &truth, &est, &policy(true)).unwrap();
        let sum: f64 = t.realized.iter().map(|o| o.get(0)).sum();
        assert_eq!(t.latency, sum);
        assert_eq!(t.realized.len(), 3);
    }

    #[test]
    fn pruning_sends_fewer_requests() {
        let (dag, model, truth, est, plan) = join_scenario();
        let on = simulate(&dag, &model, &plan, &truth, &est, &policy(true)).unwrap();
        let off = simulate(&dag, &model, &plan, &truth, &est, &policy(false)).unwrap();
        assert!(on.requests_sent < off.requests_sent);
        assert_eq!(on.requests_sent + on.requests_pruned, off.requests_sent);
        assert_eq!(off.requests_pruned, 0);
    }

    #[test]
    fn single_scan_sends_nothing() {
        let dag = QueryDAG::chain(&[SubqRole::Scan]).unwrap();
        let sc = SubqConstants {
            work: 1e-6,
            shuffle_bytes_per_row: 100.,
            base_overhead: 0.5,
            build_bytes_per_row: None,
        };
        let model = CostModel::new(Spaces::spark_default(), vec![sc], ModelConstants::default(), Prices::default(), 0).unwrap();
        let nd = NonDecision::uniform(vec![1e8]);
        let sp = Spaces::spark_default();
        let plan = Solution {
            objectives: ObjectiveVector::pair(0., 0.),
            theta_c: sp.context.defaults(),
            theta_p: vec![sp.plan.defaults()],
            theta_s: vec![sp.stage.defaults()],
        };
        let t = simulate(&dag, &model, &plan, &nd, &nd, &policy(true)).unwrap();
        assert_eq!(t.requests_sent, 0);
    }

    #[test]
    fn step_errors() {
        let (dag, model, truth, est, plan) = join_scenario();
        let pol = policy(true);
        let sim = Simulator::new(&dag, &model, &truth, &est, &pol).unwrap();
        let mut st = sim.submit(&plan).unwrap();
        assert!(matches!(sim.step(&mut st, 7), Err(TuneError::UnknownSubq(7))));
        sim.step(&mut st, 0).unwrap();
        assert!(matches!(sim.step(&mut st, 0), Err(TuneError::AlreadyCompleted(0))));
        let c = st.theta_c().clone();
        sim.step(&mut st, 1).unwrap();
        sim.step(&mut st, 2).unwrap();
        assert!(st.is_done());
        assert_eq!(st.theta_c(), &c);
    }
}
