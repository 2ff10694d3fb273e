//! Hierarchical multi-objective tuning of query parameters.
//!
//! A query is a DAG of subqueries (subQs). Context parameters are shared by
//! the whole query; plan and stage parameters are chosen per subQ. The solver
//! tunes each subQ under a fixed context, aggregates the per-subQ Pareto fronts
//! into a query-level front, and recommends one point from it. A runtime
//! simulator replays stage completions and re-optimizes plan parameters as true
//! cardinalities are revealed.

pub mod costmodel;
pub mod error;
pub mod harness;
pub mod hmooc;
pub mod pareto;
pub mod runtime;
pub mod sampling;
pub mod space;

pub use costmodel::{predict_query, CostModel, NonDecision, SubqModel};
pub use error::{Result, TuneError};
pub use hmooc::{solve, wun_recommend, Method, QueryDAG, SolveConfig, WeightVector};
pub use pareto::{dominates, hypervolume, pareto_filter, ObjectiveVector, ParetoSet, Solution};
pub use space::{ConfigSpace, ConfigVector, Group, Spaces};
