//! Per-subQ predictive models.
//!
//! [`SubqModel`] is the pluggable interface the solver evaluates; [`CostModel`]
//! is the synthetic analytic family used throughout the engine:
//!
//! ```text
//! latency = (1+γ) · [ W·α·g(s5)·spill / (k1·k3)
//!                    + S·(1+skew) / (BW·f(k5)·(k7 ? 0.7 : 1))
//!                    + penalty·|log2(s5/p*)|
//!                    + join(algo)
//!                    + base_overhead ]
//! cost    = latency · (cpu_rate·k1·k3 + mem_rate·k2·k3) + shuffle_rate·S_GB
//! ```
//!
//! with `g(s5) = 1 + curvature·log2(s5/p*)²`, `p* = max(1, α/rows_per_partition)`,
//! `spill = 1 + spill_coeff·k1/(k2·k8)`, `f(k5) = k5/(k5 + inflight_half)` and
//! `S = shuffle_bytes_per_row·α`. Join subQs add a term that depends on the join
//! algorithm picked from the build-side size and the s3/s4 thresholds.
//! Both outputs are snapped to the dyadic objective grid.

mod fis;

pub use fis::{fis_filter, permutation_fis, FisReport};

use serde::{Deserialize, Serialize};

use crate::error::{Result, TuneError};
use crate::pareto::{snap_to_grid, ObjectiveVector};
use crate::runtime::{join_select, JoinAlgo};
use crate::space::{ConfigSpace, ConfigVector, Group, Spaces};

pub const MB: f64 = 1024.0 * 1024.0;
const GB: f64 = 1024.0 * MB;

/// Skew descriptor of one subQ's input; all zeros encodes a uniform distribution.
#[derive(Debug, Clone, Copy, Default, PartialEq, Serialize, Deserialize)]
pub struct Skew {
    pub std_avg_ratio: f64,
    /// (max − mean) / mean of partition sizes.
    pub skew_ratio: f64,
    pub range_ratio: f64,
}

/// Non-decision inputs: cardinalities, skew, and resource contention.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct NonDecision {
    /// Input rows per subQ.
    pub alpha: Vec<f64>,
    pub beta: Vec<Skew>,
    pub gamma: f64,
}

impl NonDecision {
    /// Compile-time defaults: uniform data, no contention.
    pub fn uniform(alpha: Vec<f64>) -> Self {
        let beta = vec![Skew::default(); alpha.len()];
        NonDecision { alpha, beta, gamma: 0.0 }
    }

    pub fn validate(&self, m: usize) -> Result<()> {
        if self.alpha.len() != m || self.beta.len() != m {
            return Err(TuneError::contract(format!(
                "non-decision inputs cover {} / {} subQs, expected {m}",
                self.alpha.len(),
                self.beta.len()
            )));
        }
        if self.alpha.iter().any(|&a| !(a > 0.0 && a.is_finite())) {
            return Err(TuneError::contract("cardinalities must be finite and > 0"));
        }
        let bad_beta = self.beta.iter().any(|b| {
            [b.std_avg_ratio, b.skew_ratio, b.range_ratio]
                .iter()
                .any(|&v| !(v >= 0.0 && v.is_finite()))
        });
        if bad_beta {
            return Err(TuneError::contract("skew descriptors must be finite and >= 0"));
        }
        if !(self.gamma >= 0.0 && self.gamma.is_finite()) {
            return Err(TuneError::contract("contention must be finite and >= 0"));
        }
        Ok(())
    }
}

/// The predictive-model interface the solver evaluates.
pub trait SubqModel: Sync {
    fn spaces(&self) -> &Spaces;

    fn num_subqs(&self) -> usize;

    /// Objectives of subQ `subq` under one full configuration.
    fn predict_subq(
        &self,
        subq: usize,
        theta_c: &ConfigVector,
        theta_p: &ConfigVector,
        theta_s: &ConfigVector,
        nd: &NonDecision,
    ) -> Result<ObjectiveVector>;
}

/// Query-level objectives: the componentwise sum over subQs.
pub fn predict_query<M: SubqModel + ?Sized>(
    model: &M,
    theta_c: &ConfigVector,
    theta_p: &[ConfigVector],
    theta_s: &[ConfigVector],
    nd: &NonDecision,
) -> Result<ObjectiveVector> {
    let m = model.num_subqs();
    if theta_p.len() != m || theta_s.len() != m {
        return Err(TuneError::contract(format!(
            "{} plan and {} stage configs for {m} subQs",
            theta_p.len(),
            theta_s.len()
        )));
    }
    let mut total: Option<ObjectiveVector> = None;
    for i in 0..m {
        let o = model.predict_subq(i, theta_c, &theta_p[i], &theta_s[i], nd)?;
        match total.as_mut() {
            Some(t) => t.add_assign(&o),
            None => total = Some(o),
        }
    }
    total.ok_or_else(|| TuneError::contract("query has no subQs"))
}

/// Workload constants of one subQ.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct SubqConstants {
    /// Task-seconds per input row.
    pub work: f64,
    pub shuffle_bytes_per_row: f64,
    /// Seconds.
    pub base_overhead: f64,
    /// Build-side bytes per input row; present only for join subQs.
    #[serde(default)]
    pub build_bytes_per_row: Option<f64>,
}

#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Prices {
    /// Cost per core-second.
    pub cpu_rate: f64,
    /// Cost per GB-second of executor memory.
    pub mem_rate: f64,
    /// Cost per shuffled GB.
    pub shuffle_rate: f64,
}

impl Default for Prices {
    fn default() -> Self {
        Prices {
            cpu_rate: 0.01,
            mem_rate: 0.001,
            shuffle_rate: 0.05,
        }
    }
}

/// Global constants of the synthetic family.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(default)]
pub struct ModelConstants {
    /// Shuffle bandwidth, bytes per second.
    pub bandwidth: f64,
    pub compress_factor: f64,
    /// k5 (MB) at which shuffle fetch reaches half its bandwidth.
    pub inflight_half_mb: f64,
    pub partition_curvature: f64,
    /// Seconds per doubling away from the ideal partition count.
    pub partition_penalty: f64,
    pub rows_per_partition: f64,
    pub spill_coeff: f64,
    pub bhj_seconds_per_byte: f64,
    pub shj_seconds_per_byte: f64,
    pub smj_seconds_per_byte: f64,
}

impl Default for ModelConstants {
    fn default() -> Self {
        ModelConstants {
            bandwidth: 100.0e6,
            compress_factor: 0.7,
            inflight_half_mb: 24.0,
            partition_curvature: 0.05,
            partition_penalty: 0.5,
            rows_per_partition: 1.0e5,
            spill_coeff: 0.5,
            bhj_seconds_per_byte: 1.0e-8,
            shj_seconds_per_byte: 2.0e-8,
            smj_seconds_per_byte: 4.0e-8,
        }
    }
}

impl ModelConstants {
    fn validate(&self) -> Result<()> {
        let all = [
            self.bandwidth,
            self.compress_factor,
            self.inflight_half_mb,
            self.partition_curvature,
            self.partition_penalty,
            self.rows_per_partition,
            self.spill_coeff,
            self.bhj_seconds_per_byte,
            self.shj_seconds_per_byte,
            self.smj_seconds_per_byte,
        ];
        if all.iter().any(|&v| !(v > 0.0 && v.is_finite())) {
            return Err(TuneError::config("model constants must be finite and > 0"));
        }
        Ok(())
    }
}

#[derive(Debug, Clone, PartialEq)]
struct ParamIndex {
    k1: usize,
    k2: usize,
    k3: usize,
    k5: usize,
    k7: usize,
    k8: usize,
    s1: usize,
    s3: usize,
    s4: usize,
    s5: usize,
}

impl ParamIndex {
    fn resolve(spaces: &Spaces) -> Result<Self> {
        let find = |space: &ConfigSpace, name: &str| {
            space
                .index_of(name)
                .ok_or_else(|| TuneError::config(format!("{:?} space lacks parameter {name}", space.group)))
        };
        Ok(ParamIndex {
            k1: find(&spaces.context, "k1")?,
            k2: find(&spaces.context, "k2")?,
            k3: find(&spaces.context, "k3")?,
            k5: find(&spaces.context, "k5")?,
            k7: find(&spaces.context, "k7")?,
            k8: find(&spaces.context, "k8")?,
            s1: find(&spaces.plan, "s1")?,
            s3: find(&spaces.plan, "s3")?,
            s4: find(&spaces.plan, "s4")?,
            s5: find(&spaces.plan, "s5")?,
        })
    }
}

/// Join thresholds of a plan configuration, in bytes.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct JoinThresholds {
    pub broadcast: f64,
    pub shuffle_hash: f64,
}

/// One evaluation of the synthetic model.
#[derive(Debug, Clone, PartialEq)]
pub struct SubqPrediction {
    pub objectives: ObjectiveVector,
    pub join: Option<JoinAlgo>,
}

/// The synthetic analytic model family. Immutable after construction.
#[derive(Debug, Clone, PartialEq)]
pub struct CostModel {
    spaces: Spaces,
    subqs: Vec<SubqConstants>,
    constants: ModelConstants,
    prices: Prices,
    seed: u64,
    idx: ParamIndex,
}

impl CostModel {
    pub fn new(
        spaces: Spaces,
        subqs: Vec<SubqConstants>,
        constants: ModelConstants,
        prices: Prices,
        seed: u64,
    ) -> Result<Self> {
        constants.validate()?;
        if subqs.is_empty() {
            return Err(TuneError::config("a cost model needs at least one subQ"));
        }
        for (i, s) in subqs.iter().enumerate() {
            let build_ok = s.build_bytes_per_row.is_none_or(|b| b > 0.0 && b.is_finite());
            let ok = [s.work, s.shuffle_bytes_per_row, s.base_overhead]
                .iter()
                .all(|&v| v > 0.0 && v.is_finite());
            if !ok || !build_ok {
                return Err(TuneError::config(format!("subQ {i} constants must be finite and > 0")));
            }
        }
        let p = &prices;
        if ![p.cpu_rate, p.mem_rate, p.shuffle_rate].iter().all(|&v| v > 0.0 && v.is_finite()) {
            return Err(TuneError::config("prices must be finite and > 0"));
        }
        let idx = ParamIndex::resolve(&spaces)?;
        Ok(CostModel {
            spaces,
            subqs,
            constants,
            prices,
            seed,
            idx,
        })
    }

    pub fn subq(&self, i: usize) -> &SubqConstants {
        &self.subqs[i]
    }

    pub fn constants(&self) -> &ModelConstants {
        &self.constants
    }

    pub fn prices(&self) -> &Prices {
        &self.prices
    }

    pub fn seed(&self) -> u64 {
        self.seed
    }

    pub fn is_join(&self, subq: usize) -> bool {
        self.subqs[subq].build_bytes_per_row.is_some()
    }

    pub fn shuffle_bytes(&self, subq: usize, alpha: f64) -> f64 {
        self.subqs[subq].shuffle_bytes_per_row * alpha
    }

    pub fn build_bytes(&self, subq: usize, alpha: f64) -> Option<f64> {
        self.subqs[subq].build_bytes_per_row.map(|b| b * alpha)
    }

    pub fn thresholds(&self, theta_p: &ConfigVector) -> JoinThresholds {
        JoinThresholds {
            broadcast: theta_p.get(self.idx.s4) * MB,
            shuffle_hash: theta_p.get(self.idx.s3) * MB,
        }
    }

    /// Advisory partition size (s1) in bytes.
    pub fn target_partition_bytes(&self, theta_p: &ConfigVector) -> f64 {
        theta_p.get(self.idx.s1) * MB
    }

    pub fn total_cores(&self, theta_c: &ConfigVector) -> f64 {
        theta_c.get(self.idx.k1) * theta_c.get(self.idx.k3)
    }

    /// Evaluates subQ `subq`; `join` forces the join algorithm instead of
    /// selecting it from the thresholds and the build-side size.
    pub fn evaluate(
        &self,
        subq: usize,
        theta_c: &ConfigVector,
        theta_p: &ConfigVector,
        theta_s: &ConfigVector,
        nd: &NonDecision,
        join: Option<JoinAlgo>,
    ) -> Result<SubqPrediction> {
        if subq >= self.subqs.len() {
            return Err(TuneError::UnknownSubq(subq));
        }
        self.spaces.context.validate(theta_c)?;
        self.spaces.plan.validate(theta_p)?;
        self.spaces.stage.validate(theta_s)?;
        nd.validate(self.subqs.len())?;

        let c = &self.constants;
        let sc = &self.subqs[subq];
        let ix = &self.idx;
        let alpha = nd.alpha[subq];

        let (k1, k2, k3) = (theta_c.get(ix.k1), theta_c.get(ix.k2), theta_c.get(ix.k3));
        let cores = k1 * k3;
        let spill = 1.0 + c.spill_coeff * k1 / (k2 * theta_c.get(ix.k8));

        let ideal_partitions = (alpha / c.rows_per_partition).max(1.0);
        let partition_skew = (theta_p.get(ix.s5) / ideal_partitions).log2();
        let g = 1.0 + c.partition_curvature * partition_skew * partition_skew;
        let work = sc.work * alpha * g * spill / cores;

        let shuffle_bytes = sc.shuffle_bytes_per_row * alpha;
        let k5 = theta_c.get(ix.k5);
        let fetch = k5 / (k5 + c.inflight_half_mb);
        let compress = if theta_c.get(ix.k7) != 0.0 { c.compress_factor } else { 1.0 };
        let shuffle =
            shuffle_bytes * (1.0 + nd.beta[subq].skew_ratio) / (c.bandwidth * fetch * compress);

        let partition = c.partition_penalty * partition_skew.abs();

        let (join_time, algo) = match sc.build_bytes_per_row {
            Some(per_row) => {
                let build = per_row * alpha;
                let algo = match join {
                    Some(a) => a,
                    None => {
                        let t = self.thresholds(theta_p);
                        join_select(build, t.broadcast, t.shuffle_hash, JoinAlgo::None)?
                    }
                };
                let t = match algo {
                    JoinAlgo::Bhj => build * c.bhj_seconds_per_byte,
                    JoinAlgo::Shj => (shuffle_bytes + build) * c.shj_seconds_per_byte / cores,
                    JoinAlgo::Smj | JoinAlgo::None => {
                        (shuffle_bytes + build) * c.smj_seconds_per_byte / cores
                    }
                };
                (t, Some(algo))
            }
            None => (0.0, None),
        };

        let latency = (1.0 + nd.gamma) * (work + shuffle + partition + join_time + sc.base_overhead);
        let rate = self.prices.cpu_rate * cores + self.prices.mem_rate * k2 * k3;
        let cost = latency * rate + self.prices.shuffle_rate * shuffle_bytes / GB;

        Ok(SubqPrediction {
            objectives: ObjectiveVector::new(vec![snap_to_grid(latency), snap_to_grid(cost)])?,
            join: algo,
        })
    }
}

/// Which parameters an importance report covers.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum FisTarget {
    Context,
    /// Plan and stage parameters as one joint vector (plan dims first).
    PlanStage,
}

/// Feature importance of a parameter group at the query level: every subQ
/// shares the probed configuration and the remaining groups stay at defaults.
pub fn group_fis<M: SubqModel + ?Sized>(
    model: &M,
    target: FisTarget,
    nd: &NonDecision,
    n_samples: usize,
    seed: u64,
) -> Result<FisReport> {
    let m = model.num_subqs();
    let spaces = model.spaces();
    let c0 = spaces.context.defaults();
    let p0 = spaces.plan.defaults();
    let s0 = spaces.stage.defaults();
    match target {
        FisTarget::Context => permutation_fis(
            &spaces.context,
            |cv| predict_query(model, cv, &vec![p0.clone(); m], &vec![s0.clone(); m], nd),
            n_samples,
            seed,
        ),
        FisTarget::PlanStage => {
            let joint = ConfigSpace::joint(&spaces.plan, &spaces.stage);
            let split = spaces.plan.len();
            permutation_fis(
                &joint,
                |cv| {
                    let p = ConfigVector::new(Group::Plan, cv.coords[..split].to_vec());
                    let s = ConfigVector::new(Group::Stage, cv.coords[split..].to_vec());
                    predict_query(model, &c0, &vec![p; m], &vec![s; m], nd)
                },
                n_samples,
                seed,
            )
        }
    }
}

impl SubqModel for CostModel {
    fn spaces(&self) -> &Spaces {
        &self.spaces
    }

    fn num_subqs(&self) -> usize {
        self.subqs.len()
    }

    fn predict_subq(
        &self,
        subq: usize,
        theta_c: &ConfigVector,
        theta_p: &ConfigVector,
        theta_s: &ConfigVector,
        nd: &NonDecision,
    ) -> Result<ObjectiveVector> {
        Ok(self.evaluate(subq, theta_c, theta_p, theta_s, nd, None)?.objectives)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn simple_subq() -> SubqConstants {
        SubqConstants {
            work: 1.0,
            shuffle_bytes_per_row: 100.0,
            base_overhead: 1.0,
            build_bytes_per_row: None,
        }
    }

    fn model(subqs: Vec<SubqConstants>) -> CostModel {
        CostModel::new(
            Spaces::spark_default(),
            subqs,
            ModelConstants::default(),
            Prices::default(),
            7,
        )
        .unwrap()
    }

    fn ctx(k1: f64, k3: f64) -> ConfigVector {
        let s = Spaces::spark_default();
        let mut c = s.context.defaults();
        c.coords[0] = k1;
        c.coords[2] = k3;
        c
    }

    /// Latency of the reference workload (W·α = 1e6, 4 cores, defaults
    /// elsewhere), evaluated term by term from the closed form.
    #[test]
    fn golden_reference_workload() {
        let m = model(vec![simple_subq()]);
        let s = Spaces::spark_default();
        let nd = NonDecision::uniform(vec![1.0e6]);
        let out = m
            .predict_subq(0, &ctx(2.0, 2.0), &s.plan.defaults(), &s.stage.defaults(), &nd)
            .unwrap();
        // p* = 10, s5 = 200: log2(20) = 4.321928094887363
        // g = 1 + 0.05 * 18.679062 = 1.9339531
        // spill = 1 + 0.5*2/(1*0.6) = 2.6666667
        // shuffle = 1e8 / (1e8 * (48/72) * 0.7) = 2.142857
        // partition = 0.5 * 4.3219281 = 2.1609640
        // latency = work + shuffle + partition + 1
        let log = 20f64.log2();
        let g = 1.0 + 0.05 * log * log;
        let spill = 1.0 + 0.5 * 2.0 / 0.6;
        let lat = 1.0e6 * g * spill / 4.0 + 1.0e8 / (1.0e8 * (48.0 / 72.0) * 0.7) + 0.5 * log + 1.0;
        assert_eq!(out.get(0), snap_to_grid(lat));
        assert!((out.get(0) - 1_289_307.385_733_6).abs() < 1e-6, "{}", out.get(0));
        let cost = lat * (0.01 * 4.0 + 0.001 * 1.0 * 2.0) + 0.05 * 1.0e8 / GB;
        assert_eq!(out.get(1), snap_to_grid(cost));
        assert!((out.get(1) - 54_150.914_857_4).abs() < 1e-6);
    }

    #[test]
    fn doubling_cores_halves_work_term() {
        let mut sc = simple_subq();
        sc.base_overhead = 1e-9;
        sc.shuffle_bytes_per_row = 1e-9;
        let m = model(vec![sc]);
        let s = Spaces::spark_default();
        let nd = NonDecision::uniform(vec![1.0e6]);
        let (p, st) = (s.plan.defaults(), s.stage.defaults());
        let l4 = m.predict_subq(0, &ctx(2.0, 2.0), &p, &st, &nd).unwrap().get(0);
        let l8 = m.predict_subq(0, &ctx(2.0, 4.0), &p, &st, &nd).unwrap().get(0);
        // The partition term does not depend on cores; subtract it out.
        let fixed = 0.5 * 20f64.log2();
        let ratio = (l8 - fixed) / (l4 - fixed);
        assert!((ratio - 0.5).abs() < 1e-6, "{ratio}");
    }

    #[test]
    fn contention_doubles_latency() {
        let m = model(vec![simple_subq()]);
        let s = Spaces::spark_default();
        let mut nd = NonDecision::uniform(vec![1.0e6]);
        let (c, p, st) = (ctx(2.0, 2.0), s.plan.defaults(), s.stage.defaults());
        let l0 = m.predict_subq(0, &c, &p, &st, &nd).unwrap().get(0);
        nd.gamma = 1.0;
        let l1 = m.predict_subq(0, &c, &p, &st, &nd).unwrap().get(0);
        assert!((l1 - 2.0 * l0).abs() <= 2.0 * crate::pareto::OBJECTIVE_GRID, "{l0} {l1}");
    }

    #[test]
    fn latency_decreases_and_cost_rate_increases_with_cores() {
        let m = model(vec![simple_subq()]);
        let s = Spaces::spark_default();
        let nd = NonDecision::uniform(vec![1.0e6]);
        let (p, st) = (s.plan.defaults(), s.stage.defaults());
        let mut prev_lat = f64::INFINITY;
        for k3 in [2.0, 4.0, 8.0, 16.0] {
            let o = m.predict_subq(0, &ctx(2.0, k3), &p, &st, &nd).unwrap();
            assert!(o.get(0) < prev_lat);
            prev_lat = o.get(0);
        }
    }

    #[test]
    fn predict_query_sums_subqs() {
        let m = model(vec![simple_subq(), simple_subq()]);
        let single = model(vec![simple_subq()]);
        let s = Spaces::spark_default();
        let c = ctx(2.0, 2.0);
        let (p, st) = (s.plan.defaults(), s.stage.defaults());
        let nd2 = NonDecision::uniform(vec![1.0e6, 1.0e6]);
        let nd1 = NonDecision::uniform(vec![1.0e6]);
        let q = predict_query(&m, &c, &[p.clone(), p.clone()], &[st.clone(), st.clone()], &nd2).unwrap();
        let one = single.predict_subq(0, &c, &p, &st, &nd1).unwrap();
        assert_eq!(q, one.scale(2.0));
        let q1 = predict_query(&single, &c, std::slice::from_ref(&p), std::slice::from_ref(&st), &nd1).unwrap();
        assert_eq!(q1, one);
        assert!(predict_query(&m, &c, &[p], &[st], &nd2).is_err());
    }

    #[test]
    fn wrong_space_is_a_contract_violation() {
        let m = model(vec![simple_subq()]);
        let s = Spaces::spark_default();
        let nd = NonDecision::uniform(vec![1.0e6]);
        let err = m
            .predict_subq(0, &s.plan.defaults(), &s.plan.defaults(), &s.stage.defaults(), &nd)
            .unwrap_err();
        assert!(matches!(err, TuneError::Contract(_)));
    }

    #[test]
    fn join_algorithm_follows_thresholds() {
        let mut sc = simple_subq();
        sc.build_bytes_per_row = Some(10.0);
        let m = model(vec![sc]);
        let s = Spaces::spark_default();
        let nd = NonDecision::uniform(vec![1.0e6]); // 10 MB-ish build side
        let mut p = s.plan.defaults();
        p.coords[2] = 50.0;
        let out = m.evaluate(0, &ctx(2.0, 2.0), &p, &s.stage.defaults(), &nd, None).unwrap();
        assert_eq!(out.join, Some(JoinAlgo::Bhj));
        p.coords[2] = 0.0;
        let out = m.evaluate(0, &ctx(2.0, 2.0), &p, &s.stage.defaults(), &nd, None).unwrap();
        assert_eq!(out.join, Some(JoinAlgo::Smj));
    }

    #[test]
    fn rejects_bad_constants() {
        let mut sc = simple_subq();
        sc.work = 0.0;
        assert!(CostModel::new(Spaces::spark_default(), vec![sc], ModelConstants::default(), Prices::default(), 0).is_err());
    }
}
