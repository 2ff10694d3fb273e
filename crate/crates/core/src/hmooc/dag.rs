use serde::{Deserialize, Serialize};

use crate::error::{Result, TuneError};

#[derive(Debug, Clone, Copy, PartialEq, Eq, Serialize, Deserialize)]
#[serde(rename_all = "snake_case")]
pub enum SubqRole {
    Scan,
    Join,
    Other,
}

/// A compile-time subquery. `children` are the subQs whose output it consumes.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
pub struct SubQ {
    pub id: usize,
    pub role: SubqRole,
    #[serde(default)]
    pub children: Vec<usize>,
}

/// Query DAG whose list order is a topological order: subQ `i` has id `i` and
/// every child id is smaller than `i`.
#[derive(Debug, Clone, PartialEq, Eq, Serialize, Deserialize)]
#[serde(try_from = "Vec<SubQ>", into = "Vec<SubQ>")]
pub struct QueryDAG {
    subqs: Vec<SubQ>,
}

impl QueryDAG {
    pub fn new(subqs: Vec<SubQ>) -> Result<Self> {
        if subqs.is_empty() {
            return Err(TuneError::config("a query needs at least one subQ"));
        }
        for (i, s) in subqs.iter().enumerate() {
            if s.id != i {
                return Err(TuneError::config(format!("subQ at position {i} has id {}", s.id)));
            }
            if let Some(&c) = s.children.iter().find(|&&c| c >= i) {
                return Err(TuneError::config(format!(
                    "subQ {i} consumes subQ {c}; children must precede their parent"
                )));
            }
        }
        Ok(QueryDAG { subqs })
    }

    /// A left-deep chain: scans at even positions feed joins.
    pub fn chain(roles: &[SubqRole]) -> Result<Self> {
        Self::new(
            roles
                .iter()
                .enumerate()
                .map(|(i, &role)| SubQ {
                    id: i,
                    role,
                    children: if i == 0 { vec![] } else { vec![i - 1] },
                })
                .collect(),
        )
    }

    pub fn len(&self) -> usize {
        self.subqs.len()
    }

    pub fn is_empty(&self) -> bool {
        self.subqs.is_empty()
    }

    pub fn subqs(&self) -> &[SubQ] {
        &self.subqs
    }

    pub fn subq(&self, id: usize) -> Result<&SubQ> {
        self.subqs.get(id).ok_or(TuneError::UnknownSubq(id))
    }

    pub fn is_join(&self, id: usize) -> bool {
        self.subqs[id].role == SubqRole::Join
    }

    pub fn parents(&self, id: usize) -> impl Iterator<Item = usize> + '_ {
        self.subqs.iter().filter(move |s| s.children.contains(&id)).map(|s| s.id)
    }

    pub fn edges(&self) -> Vec<(usize, usize)> {
        self.subqs
            .iter()
            .flat_map(|s| s.children.iter().map(move |&c| (c, s.id)))
            .collect()
    }
}

impl TryFrom<Vec<SubQ>> for QueryDAG {
    type Error = TuneError;

    fn try_from(subqs: Vec<SubQ>) -> Result<Self> {
        QueryDAG::new(subqs)
    }
}

impl From<QueryDAG> for Vec<SubQ> {
    fn from(d: QueryDAG) -> Self {
        d.subqs
    }
}
