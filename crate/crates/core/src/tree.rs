//! The event-tree lattice of an ordered set of categorical variables.
//!
//! Vertices at depth `d` correspond to prefixes `(x_1, .., x_d)` of a full
//! assignment. They are addressed in mixed radix with the first variable most
//! significant, so the children of vertex `v` at depth `d` are
//! `v * k_d .. v * k_d + k_d` at depth `d + 1`, where `k_d` is the number of
//! levels of the variable decided at depth `d`.

use crate::error::{Error, Result};
use serde::{Deserialize, Serialize};
use std::collections::HashSet;

#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
pub struct Variable {
    pub name: String,
    pub levels: Vec<String>,
}

impl Variable {
    pub fn new<S: Into<String>, L: Into<String>>(name: S, levels: impl IntoIterator<Item = L>) -> Self {
        Variable {
            name: name.into(),
            levels: levels.into_iter().map(Into::into).collect(),
        }
    }

    pub fn cardinality(&self) -> usize {
        self.levels.len()
    }

    pub fn level_index(&self, label: &str) -> Result<usize> {
        self.levels
            .iter()
            .position(|l| l == label)
            .ok_or_else(|| Error::UnknownLevel {
                variable: self.name.clone(),
                level: label.to_string(),
            })
    }
}

/// Ordered categorical variables defining an X-compatible tree.
#[derive(Debug, Clone, PartialEq, Eq, Hash, Serialize, Deserialize)]
#[serde(try_from = "Vec<Variable>", into = "Vec<Variable>")]
pub struct EventTree {
    variables: Vec<Variable>,
}

impl TryFrom<Vec<Variable>> for EventTree {
    type Error = Error;

    fn try_from(variables: Vec<Variable>) -> Result<Self> {
        EventTree::new(variables)
    }
}

impl From<EventTree> for Vec<Variable> {
    fn from(t: EventTree) -> Self {
        t.variables
    }
}

/// Address of a non-leaf or leaf vertex: its depth and mixed-radix index.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Hash, PartialOrd, Ord)]
pub struct VertexId {
    pub stratum: usize,
    pub index: usize,
}

impl VertexId {
    pub const ROOT: VertexId = VertexId { stratum: 0, index: 0 };

    pub fn new(stratum: usize, index: usize) -> Self {
        VertexId { stratum, index }
    }
}

impl EventTree {
    pub fn new(variables: Vec<Variable>) -> Result<Self> {
        if variables.is_empty() {
            return Err(Error::InvalidTree("at least one variable is required".into()));
        }
        let mut names = HashSet::new();
        for v in &variables {
            if !names.insert(v.name.as_str()) {
                return Err(Error::InvalidTree(format!("duplicate variable `{}`", v.name)));
            }
            if v.levels.len() < 2 {
                return Err(Error::InvalidTree(format!(
                    "variable `{}` needs at least two levels",
                    v.name
                )));
            }
            let mut seen = HashSet::new();
            for l in &v.levels {
                if !seen.insert(l.as_str()) {
                    return Err(Error::InvalidTree(format!(
                        "duplicate level `{}` in variable `{}`",
                        l, v.name
                    )));
                }
            }
        }
        Ok(EventTree { variables })
    }

    pub fn variables(&self) -> &[Variable] {
        &self.variables
    }

    pub fn variable(&self, i: usize) -> &Variable {
        &self.variables[i]
    }

    /// Number of variables (`n`), equivalently the number of non-leaf strata.
    pub fn len(&self) -> usize {
        self.variables.len()
    }

    pub fn is_empty(&self) -> bool {
        self.variables.is_empty()
    }

    pub fn names(&self) -> impl Iterator<Item = &str> {
        self.variables.iter().map(|v| v.name.as_str())
    }

    pub fn variable_index(&self, name: &str) -> Result<usize> {
        self.variables
            .iter()
            .position(|v| v.name == name)
            .ok_or_else(|| Error::UnknownVariable(name.to_string()))
    }

    pub fn cardinality(&self, i: usize) -> usize {
        self.variables[i].cardinality()
    }

    pub fn cardinalities(&self) -> Vec<usize> {
        self.variables.iter().map(Variable::cardinality).collect()
    }

    /// Number of vertices at depth `d` (`d == n` gives the number of leaves).
    pub fn stratum_size(&self, d: usize) -> usize {
        self.variables[..d].iter().map(Variable::cardinality).product()
    }

    /// Number of root-to-leaf paths, i.e. the size of the product space.
    pub fn n_leaves(&self) -> usize {
        self.stratum_size(self.len())
    }

    pub fn n_vertices(&self) -> usize {
        (0..=self.len()).map(|d| self.stratum_size(d)).sum()
    }

    pub fn children(&self, v: VertexId) -> std::ops::Range<usize> {
        let k = self.cardinality(v.stratum);
        v.index * k..v.index * k + k
    }

    pub fn parent(&self, v: VertexId) -> Option<VertexId> {
        if v.stratum == 0 {
            None
        } else {
            let k = self.cardinality(v.stratum - 1);
            Some(VertexId::new(v.stratum - 1, v.index / k))
        }
    }

    /// Encodes a prefix of level indices.
    pub fn encode_indices(&self, path: &[usize]) -> Result<VertexId> {
        if path.len() > self.len() {
            return Err(Error::InvalidPath(format!(
                "path of length {} exceeds {} variables",
                path.len(),
                self.len()
            )));
        }
        let mut index = 0;
        for (d, &x) in path.iter().enumerate() {
            let k = self.cardinality(d);
            if x >= k {
                return Err(Error::InvalidPath(format!(
                    "level index {} out of range for `{}`",
                    x, self.variables[d].name
                )));
            }
            index = index * k + x;
        }
        Ok(VertexId::new(path.len(), index))
    }

    /// Encodes a prefix of level labels, first variable first.
    pub fn encode_path<S: AsRef<str>>(&self, path: &[S]) -> Result<VertexId> {
        if path.len() > self.len() {
            return Err(Error::InvalidPath(format!(
                "path of length {} exceeds {} variables",
                path.len(),
                self.len()
            )));
        }
        let idx = path
            .iter()
            .enumerate()
            .map(|(d, l)| self.variables[d].level_index(l.as_ref()))
            .collect::<Result<Vec<_>>>()?;
        self.encode_indices(&idx)
    }

    pub fn decode_indices(&self, v: VertexId) -> Result<Vec<usize>> {
        if v.stratum > self.len() {
            return Err(Error::InvalidPath(format!("stratum {} beyond tree depth", v.stratum)));
        }
        let size = self.stratum_size(v.stratum);
        if v.index >= size {
            return Err(Error::VertexOutOfRange {
                stratum: v.stratum,
                index: v.index,
                size,
            });
        }
        let mut out = vec![0; v.stratum];
        let mut rest = v.index;
        for d in (0..v.stratum).rev() {
            let k = self.cardinality(d);
            out[d] = rest % k;
            rest /= k;
        }
        Ok(out)
    }

    pub fn decode_vertex(&self, v: VertexId) -> Result<Vec<String>> {
        Ok(self
            .decode_indices(v)?
            .into_iter()
            .enumerate()
            .map(|(d, x)| self.variables[d].levels[x].clone())
            .collect())
    }

    /// Index of the leaf for a full assignment of level indices.
    pub fn leaf_index(&self, x: &[usize]) -> Result<usize> {
        if x.len() != self.len() {
            return Err(Error::InvalidPath(format!(
                "expected {} values, got {}",
                self.len(),
                x.len()
            )));
        }
        Ok(self.encode_indices(x)?.index)
    }

    /// Tree restricted to variables `from..n` (the shape of a subtree at depth `from`).
    pub fn suffix(&self, from: usize) -> Result<EventTree> {
        EventTree::new(self.variables[from..].to_vec())
    }

    /// Reorders variables by name; `order` must be a permutation of the variable names.
    pub fn permutation_for(&self, order: &[String]) -> Result<Vec<usize>> {
        if order.len() != self.len() {
            return Err(Error::InvalidArgument(format!(
                "order lists {} variables, tree has {}",
                order.len(),
                self.len()
            )));
        }
        let mut seen = HashSet::new();
        order
            .iter()
            .map(|name| {
                if !seen.insert(name.as_str()) {
                    return Err(Error::InvalidArgument(format!("variable `{}` repeated in order", name)));
                }
                self.variable_index(name)
            })
            .collect()
    }
}
