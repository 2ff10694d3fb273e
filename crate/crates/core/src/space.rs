//! Parameter spaces and configuration vectors.
//!
//! A [`ConfigSpace`] is a finite grid: every dimension lists its allowed
//! values in strictly increasing order. Configurations are points on that grid.

use serde::{Deserialize, Serialize};

use crate::error::{Result, TuneError};

/// The three parameter groups of a query: shared context, per-plan, per-stage.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(rename_all = "lowercase")]
pub enum Group {
    Context,
    Plan,
    Stage,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum ParamKind {
    IntGrid,
    FloatGrid,
    /// Encoded as 0.0 / 1.0.
    Bool,
}

/// One tunable parameter.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ParamDef {
    pub name: String,
    pub kind: ParamKind,
    pub values: Vec<f64>,
    pub default: f64,
    /// Plan-structure parameter: never dropped by feature-importance filtering.
    #[serde(default)]
    pub important: bool,
}

impl ParamDef {
    pub fn new(name: &str, kind: ParamKind, values: &[f64], default: f64) -> Self {
        ParamDef {
            name: name.to_string(),
            kind,
            values: values.to_vec(),
            default,
            important: false,
        }
    }

    pub fn boolean(name: &str, default: bool) -> Self {
        Self::new(name, ParamKind::Bool, &[0.0, 1.0], if default { 1.0 } else { 0.0 })
    }

    pub fn important(mut self) -> Self {
        self.important = true;
        self
    }

    pub fn min(&self) -> f64 {
        self.values[0]
    }

    pub fn max(&self) -> f64 {
        self.values[self.values.len() - 1]
    }

    pub fn contains(&self, v: f64) -> bool {
        self.index_of(v).is_some()
    }

    pub fn index_of(&self, v: f64) -> Option<usize> {
        self.values.binary_search_by(|x| x.total_cmp(&v)).ok()
    }

    /// Grid value closest to `v`; ties go to the lower value.
    pub fn snap(&self, v: f64) -> f64 {
        let mut best = self.values[0];
        for &x in &self.values[1..] {
            if (x - v).abs() < (best - v).abs() {
                best = x;
            }
        }
        best
    }

    fn validate(&self) -> Result<()> {
        if self.values.is_empty() {
            return Err(TuneError::config(format!("parameter {} has no values", self.name)));
        }
        if self.values.iter().any(|v| !v.is_finite()) {
            return Err(TuneError::config(format!("parameter {} has a non-finite value", self.name)));
        }
        if self.values.windows(2).any(|w| w[0] >= w[1]) {
            return Err(TuneError::config(format!(
                "parameter {} values must be strictly increasing",
                self.name
            )));
        }
        if self.kind == ParamKind::Bool && self.values != [0.0, 1.0] {
            return Err(TuneError::config(format!("bool parameter {} must have values [0, 1]", self.name)));
        }
        if !self.contains(self.default) {
            return Err(TuneError::config(format!(
                "default {} of parameter {} is not an allowed value",
                self.default, self.name
            )));
        }
        Ok(())
    }
}

/// The grid description of one parameter group.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
#[serde(try_from = "RawSpace")]
pub struct ConfigSpace {
    pub group: Group,
    pub dims: Vec<ParamDef>,
}

#[derive(Deserialize)]
struct RawSpace {
    group: Group,
    dims: Vec<ParamDef>,
}

impl TryFrom<RawSpace> for ConfigSpace {
    type Error = TuneError;

    fn try_from(raw: RawSpace) -> Result<Self> {
        ConfigSpace::new(raw.group, raw.dims)
    }
}

impl ConfigSpace {
    pub fn new(group: Group, dims: Vec<ParamDef>) -> Result<Self> {
        for d in &dims {
            d.validate()?;
        }
        for (i, d) in dims.iter().enumerate() {
            if dims[..i].iter().any(|o| o.name == d.name) {
                return Err(TuneError::config(format!("duplicate parameter name {}", d.name)));
            }
        }
        Ok(ConfigSpace { group, dims })
    }

    pub fn len(&self) -> usize {
        self.dims.len()
    }

    pub fn is_empty(&self) -> bool {
        self.dims.is_empty()
    }

    pub fn index_of(&self, name: &str) -> Option<usize> {
        self.dims.iter().position(|d| d.name == name)
    }

    pub fn defaults(&self) -> ConfigVector {
        ConfigVector {
            group: self.group,
            coords: self.dims.iter().map(|d| d.default).collect(),
        }
    }

    /// Number of grid points in the full Cartesian product.
    pub fn grid_size(&self) -> f64 {
        self.dims.iter().map(|d| d.values.len() as f64).product()
    }

    pub fn validate(&self, cv: &ConfigVector) -> Result<()> {
        if cv.group != self.group {
            return Err(TuneError::contract(format!(
                "configuration of group {:?} used where {:?} is expected",
                cv.group, self.group
            )));
        }
        if cv.coords.len() != self.dims.len() {
            return Err(TuneError::contract(format!(
                "configuration has {} coordinates, space {:?} has {} dims",
                cv.coords.len(),
                self.group,
                self.dims.len()
            )));
        }
        for (d, &v) in self.dims.iter().zip(&cv.coords) {
            if !d.contains(v) {
                return Err(TuneError::contract(format!("value {v} is not on the grid of {}", d.name)));
            }
        }
        Ok(())
    }

    /// Per-dim min-max scaling of a configuration to [0, 1]; single-valued dims map to 0.
    pub fn normalized(&self, cv: &ConfigVector) -> Vec<f64> {
        self.dims
            .iter()
            .zip(&cv.coords)
            .map(|(d, &v)| {
                let range = d.max() - d.min();
                if range > 0.0 {
                    (v - d.min()) / range
                } else {
                    0.0
                }
            })
            .collect()
    }

    /// Concatenation of two spaces, used to sample plan and stage parameters jointly.
    pub fn joint(a: &ConfigSpace, b: &ConfigSpace) -> ConfigSpace {
        ConfigSpace {
            group: a.group,
            dims: a.dims.iter().chain(&b.dims).cloned().collect(),
        }
    }
}

/// A point in one [`ConfigSpace`].
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct ConfigVector {
    pub group: Group,
    pub coords: Vec<f64>,
}

impl ConfigVector {
    pub fn new(group: Group, coords: Vec<f64>) -> Self {
        ConfigVector { group, coords }
    }

    pub fn key(&self) -> ConfigKey {
        ConfigKey(self.coords.iter().map(|c| c.to_bits()).collect())
    }

    pub fn get(&self, idx: usize) -> f64 {
        self.coords[idx]
    }
}

/// Hashable identity of a configuration (bitwise coordinates).
#[derive(Debug, Clone, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct ConfigKey(Vec<u64>);

/// The three spaces of a tuning problem.
#[derive(Debug, Clone, PartialEq, Serialize, Deserialize)]
pub struct Spaces {
    pub context: ConfigSpace,
    pub plan: ConfigSpace,
    pub stage: ConfigSpace,
}

impl Spaces {
    /// Spark-flavoured default spaces. Sizes are in MB, memory in GB.
    pub fn spark_default() -> Self {
        use ParamKind::*;
        let context = ConfigSpace::new(
            Group::Context,
            vec![
                ParamDef::new("k1", IntGrid, &[1., 2., 3., 4., 5., 6., 7., 8.], 1.),
                ParamDef::new("k2", IntGrid, &[1., 2., 4., 8., 16., 32.], 1.),
                ParamDef::new("k3", IntGrid, &[2., 4., 6., 8., 10., 12., 14., 16.], 2.),
                ParamDef::new("k4", IntGrid, &[50., 100., 200., 400., 800.], 200.),
                ParamDef::new("k5", IntGrid, &[12., 24., 48., 96., 192.], 48.),
                ParamDef::new("k6", IntGrid, &[50., 100., 200., 400., 800.], 200.),
                ParamDef::boolean("k7", true),
                ParamDef::new("k8", FloatGrid, &[0.4, 0.5, 0.6, 0.7, 0.8], 0.6),
            ],
        )
        .expect("static context space");
        let plan = ConfigSpace::new(
            Group::Plan,
            vec![
                ParamDef::new("s1", IntGrid, &[16., 32., 64., 128., 256.], 64.),
                ParamDef::new("s3", IntGrid, &[0., 16., 32., 64., 128., 256.], 0.).important(),
                ParamDef::new(
                    "s4",
                    IntGrid,
                    &[0., 5., 10., 25., 50., 100., 200., 400., 800., 1600., 3200.],
                    10.,
                )
                .important(),
                ParamDef::new("s5", IntGrid, &[25., 50., 100., 200., 400., 800., 1600., 3200.], 200.),
            ],
        )
        .expect("static plan space");
        let stage = ConfigSpace::new(
            Group::Stage,
            vec![
                ParamDef::new("s10", FloatGrid, &[0.1, 0.2, 0.3, 0.4, 0.5], 0.2),
                ParamDef::new("s11", IntGrid, &[1., 2., 4., 8.], 1.),
            ],
        )
        .expect("static stage space");
        Spaces { context, plan, stage }
    }

    pub fn get(&self, group: Group) -> &ConfigSpace {
        match group {
            Group::Context => &self.context,
            Group::Plan => &self.plan,
            Group::Stage => &self.stage,
        }
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn default_spaces_are_valid() {
        let s = Spaces::spark_default();
        for sp in [&s.context, &s.plan, &s.stage] {
            sp.validate(&sp.defaults()).unwrap();
        }
        assert_eq!(s.context.len(), 8);
    }

    #[test]
    fn rejects_bad_dims() {
        let bad_default = ParamDef::new("x", ParamKind::IntGrid, &[1., 2.], 3.);
        assert!(ConfigSpace::new(Group::Plan, vec![bad_default]).is_err());
        let unsorted = ParamDef::new("x", ParamKind::IntGrid, &[2., 1.], 1.);
        assert!(ConfigSpace::new(Group::Plan, vec![unsorted]).is_err());
        let empty = ParamDef::new("x", ParamKind::IntGrid, &[], 1.);
        assert!(ConfigSpace::new(Group::Plan, vec![empty]).is_err());
    }

    #[test]
    fn validate_catches_wrong_space() {
        let s = Spaces::spark_default();
        let p = s.plan.defaults();
        assert!(matches!(s.context.validate(&p), Err(TuneError::Contract(_))));
        let mut off_grid = s.plan.defaults();
        off_grid.coords[0] = 65.0;
        assert!(s.plan.validate(&off_grid).is_err());
    }

    #[test]
    fn snap_picks_nearest() {
        let d = ParamDef::new("x", ParamKind::IntGrid, &[0., 10., 20.], 0.);
        assert_eq!(d.snap(14.0), 10.0);
        assert_eq!(d.snap(16.0), 20.0);
        assert_eq!(d.snap(-3.0), 0.0);
    }
}
