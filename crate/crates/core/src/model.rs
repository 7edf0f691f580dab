//! Stratified staged trees.
//!
//! Every stratum `d` holds the vertices at depth `d`; each vertex is assigned to
//! exactly one stage of its own stratum, so a stage can never span two strata.
//! A stage carries the floret distribution over the levels of variable `d`.
//!
//! Stage slots inside a stratum are kept in first-appearance order: slot `i` is
//! the `i`-th distinct stage met when scanning vertices by mixed-radix index.
//! Search algorithms rely on that order for deterministic tie-breaking.

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::num::Real;
use crate::tree::{EventTree, VertexId};
use std::collections::HashMap;

/// Default label of the per-stratum stage collecting unobserved vertices.
pub const DEFAULT_UNOBSERVED: &str = "na";

#[derive(Debug, Clone, PartialEq)]
pub struct Stage<T: Real = f64> {
    pub id: String,
    /// Observed counts per level of the stratum variable, summed over members.
    pub counts: Vec<T>,
    /// Floret probabilities; absent for the unobserved stage and for unfitted models.
    pub probs: Option<Vec<T>>,
    pub unobserved: bool,
}

impl<T: Real> Stage<T> {
    pub fn total(&self) -> T {
        self.counts.iter().copied().sum()
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct Stratum<T: Real = f64> {
    pub(crate) assignment: Vec<usize>,
    pub(crate) stages: Vec<Stage<T>>,
    /// Per-vertex floret counts, flattened `vertex * k + level`.
    pub(crate) ctables: Option<Vec<T>>,
    pub(crate) k: usize,
}

impl<T: Real> Stratum<T> {
    pub fn n_vertices(&self) -> usize {
        self.assignment.len()
    }

    pub fn cardinality(&self) -> usize {
        self.k
    }

    pub fn stages(&self) -> &[Stage<T>] {
        &self.stages
    }

    pub fn n_stages(&self) -> usize {
        self.stages.len()
    }

    pub fn n_observed_stages(&self) -> usize {
        self.stages.iter().filter(|s| !s.unobserved).count()
    }

    /// Stage slot of each vertex.
    pub fn assignment(&self) -> &[usize] {
        &self.assignment
    }

    pub fn stage_of(&self, vertex: usize) -> &Stage<T> {
        &self.stages[self.assignment[vertex]]
    }

    pub fn slot_of_id(&self, id: &str) -> Option<usize> {
        self.stages.iter().position(|s| s.id == id)
    }

    pub fn members(&self, slot: usize) -> Vec<usize> {
        self.assignment
            .iter()
            .enumerate()
            .filter(|(_, &s)| s == slot)
            .map(|(v, _)| v)
            .collect()
    }

    pub fn vertex_counts(&self, vertex: usize) -> Option<&[T]> {
        self.ctables
            .as_ref()
            .map(|c| &c[vertex * self.k..(vertex + 1) * self.k])
    }

    pub fn unobserved_slot(&self) -> Option<usize> {
        self.stages.iter().position(|s| s.unobserved)
    }

    /// Reorders slots into first-appearance order and drops empty slots.
    pub(crate) fn normalize(&mut self) {
        let mut remap = vec![usize::MAX; self.stages.len()];
        let mut order = Vec::with_capacity(self.stages.len());
        for &s in &self.assignment {
            if remap[s] == usize::MAX {
                remap[s] = order.len();
                order.push(s);
            }
        }
        if order.len() == self.stages.len() && order.iter().enumerate().all(|(i, &s)| i == s) {
            return;
        }
        let mut old: Vec<Option<Stage<T>>> = self.stages.drain(..).map(Some).collect();
        self.stages = order.iter().map(|&s| old[s].take().expect("slot used once")).collect();
        for a in &mut self.assignment {
            *a = remap[*a];
        }
    }

    /// Recomputes stage counts from the vertex counts.
    pub(crate) fn recount(&mut self) {
        let Some(ct) = &self.ctables else { return };
        for s in &mut self.stages {
            s.counts = vec![T::zero(); self.k];
        }
        for (v, &s) in self.assignment.iter().enumerate() {
            let c = &ct[v * self.k..(v + 1) * self.k];
            for (acc, &x) in self.stages[s].counts.iter_mut().zip(c) {
                *acc = *acc + x;
            }
        }
    }
}

/// A stratified staged tree over an [`EventTree`].
#[derive(Debug, Clone, PartialEq)]
pub struct StagedTree<T: Real = f64> {
    pub(crate) tree: EventTree,
    pub(crate) strata: Vec<Stratum<T>>,
    pub(crate) lambda: T,
    pub(crate) name_unobserved: String,
    pub(crate) fitted: bool,
}

impl<T: Real> StagedTree<T> {
    /// Builds an unfitted staged tree from per-stratum vertex labels.
    ///
    /// `labels[d][v]` is the stage label of vertex `v` at depth `d`. Stratum 0
    /// must contain only the root. Vertices labelled `name_unobserved` form the
    /// unobserved stage of their stratum.
    pub fn from_labels(tree: EventTree, labels: Vec<Vec<String>>, name_unobserved: &str) -> Result<Self> {
        if labels.len() != tree.len() {
            return Err(Error::InvalidStaging(format!(
                "expected {} strata, got {}",
                tree.len(),
                labels.len()
            )));
        }
        let mut strata = Vec::with_capacity(tree.len());
        for (d, lab) in labels.into_iter().enumerate() {
            let size = tree.stratum_size(d);
            if lab.len() != size {
                return Err(Error::InvalidStaging(format!(
                    "stratum {} has {} vertices, got {} labels",
                    d,
                    size,
                    lab.len()
                )));
            }
            let k = tree.cardinality(d);
            let mut index: HashMap<String, usize> = HashMap::new();
            let mut stages = Vec::new();
            let mut assignment = Vec::with_capacity(size);
            for l in lab {
                let slot = match index.get(&l) {
                    Some(&s) => s,
                    None => {
                        let s = stages.len();
                        stages.push(Stage {
                            unobserved: l == name_unobserved,
                            id: l.clone(),
                            counts: vec![T::zero(); k],
                            probs: None,
                        });
                        index.insert(l, s);
                        s
                    }
                };
                assignment.push(slot);
            }
            strata.push(Stratum {
                assignment,
                stages,
                ctables: None,
                k,
            });
        }
        let st = StagedTree {
            tree,
            strata,
            lambda: T::zero(),
            name_unobserved: name_unobserved.to_string(),
            fitted: false,
        };
        st.validate()?;
        Ok(st)
    }

    pub fn tree(&self) -> &EventTree {
        &self.tree
    }

    pub fn strata(&self) -> &[Stratum<T>] {
        &self.strata
    }

    pub fn stratum(&self, d: usize) -> &Stratum<T> {
        &self.strata[d]
    }

    pub fn lambda(&self) -> T {
        self.lambda
    }

    pub fn name_unobserved(&self) -> &str {
        &self.name_unobserved
    }

    pub fn is_fitted(&self) -> bool {
        self.fitted
    }

    pub fn has_counts(&self) -> bool {
        self.strata.iter().all(|s| s.ctables.is_some())
    }

    /// Total number of observations the model was fitted on.
    pub fn n_obs(&self) -> T {
        self.strata[0].stages[0].total()
    }

    pub fn stage(&self, v: VertexId) -> &Stage<T> {
        self.strata[v.stratum].stage_of(v.index)
    }

    pub fn stage_id(&self, v: VertexId) -> &str {
        &self.stage(v).id
    }

    /// Stage labels of every vertex, per stratum.
    pub fn labels(&self) -> Vec<Vec<String>> {
        self.strata
            .iter()
            .map(|s| s.assignment.iter().map(|&a| s.stages[a].id.clone()).collect())
            .collect()
    }

    /// Floret probabilities at `v`; `None` for unobserved vertices or unfitted models.
    pub fn floret(&self, v: VertexId) -> Option<&[T]> {
        self.stage(v).probs.as_deref()
    }

    pub fn is_unobserved(&self, v: VertexId) -> bool {
        self.stage(v).unobserved
    }

    /// Attaches per-vertex counts from `ds` and recomputes stage counts.
    pub(crate) fn attach_counts(&mut self, ds: &Dataset<T>) -> Result<()> {
        if ds.tree() != &self.tree {
            return Err(Error::Incompatible("dataset and model trees differ".into()));
        }
        let pc = ds.prefix_counts();
        for (d, s) in self.strata.iter_mut().enumerate() {
            s.ctables = Some(pc[d + 1].clone());
            s.recount();
        }
        Ok(())
    }

    /// Fits floret probabilities from stage counts with additive smoothing `lambda`.
    pub(crate) fn refit(&mut self, lambda: T) -> Result<()> {
        if !self.has_counts() {
            return Err(Error::InvalidArgument("model carries no counts to fit from".into()));
        }
        self.lambda = lambda;
        for d in 0..self.strata.len() {
            for slot in 0..self.strata[d].stages.len() {
                self.refit_stage(d, slot)?;
            }
        }
        self.fitted = true;
        Ok(())
    }

    pub(crate) fn refit_stage(&mut self, d: usize, slot: usize) -> Result<()> {
        let lambda = self.lambda;
        let stage = &mut self.strata[d].stages[slot];
        if stage.unobserved {
            stage.probs = None;
            return Ok(());
        }
        stage.probs = Some(smoothed_probs(&stage.counts, lambda).ok_or_else(|| Error::ZeroFloret {
            stratum: d,
            stage: stage.id.clone(),
        })?);
        Ok(())
    }

    /// Renames observed stages `"1"`, `"2"`, ... per stratum in order of their first
    /// member vertex. The unobserved stage keeps its label.
    pub fn standard_naming(&self) -> StagedTree<T> {
        let mut out = self.clone();
        for s in &mut out.strata {
            s.normalize();
            let mut n = 0u64;
            for st in s.stages.iter_mut().filter(|st| !st.unobserved) {
                n += 1;
                if n.to_string() == self.name_unobserved {
                    n += 1;
                }
                st.id = n.to_string();
            }
        }
        out
    }

    /// A label not used by any stage of stratum `d`: one more than the largest numeric label.
    pub(crate) fn fresh_label(&self, d: usize) -> String {
        let max = self.strata[d]
            .stages
            .iter()
            .filter_map(|s| s.id.parse::<u64>().ok())
            .max()
            .unwrap_or(0);
        let mut n = max + 1;
        loop {
            let l = n.to_string();
            if l != self.name_unobserved && self.strata[d].slot_of_id(&l).is_none() {
                return l;
            }
            n += 1;
        }
    }

    /// Checks every structural and numeric invariant.
    pub fn validate(&self) -> Result<()> {
        if self.strata.len() != self.tree.len() {
            return Err(Error::InvalidStaging("stratum count differs from variable count".into()));
        }
        let tol = T::lit(1e-9).max(T::epsilon() * T::lit(64.0));
        for (d, s) in self.strata.iter().enumerate() {
            if s.assignment.len() != self.tree.stratum_size(d) {
                return Err(Error::InvalidStaging(format!("stratum {} has the wrong number of vertices", d)));
            }
            if s.k != self.tree.cardinality(d) {
                return Err(Error::InvalidStaging(format!("stratum {} has the wrong floret size", d)));
            }
            let mut used = vec![false; s.stages.len()];
            for &a in &s.assignment {
                if a >= s.stages.len() {
                    return Err(Error::InvalidStaging(format!("stratum {} references a missing stage", d)));
                }
                used[a] = true;
            }
            if used.iter().any(|u| !u) {
                return Err(Error::InvalidStaging(format!("stratum {} has an empty stage", d)));
            }
            let mut ids = std::collections::HashSet::new();
            let mut n_unobs = 0;
            for st in &s.stages {
                if !ids.insert(st.id.as_str()) {
                    return Err(Error::InvalidStaging(format!("stage `{}` repeated in stratum {}", st.id, d)));
                }
                if st.unobserved != (st.id == self.name_unobserved) {
                    return Err(Error::InvalidStaging(format!(
                        "stage `{}` in stratum {} misuses the unobserved label",
                        st.id, d
                    )));
                }
                if st.unobserved {
                    n_unobs += 1;
                    if st.probs.is_some() {
                        return Err(Error::InvalidStaging(format!(
                            "unobserved stage in stratum {} carries probabilities",
                            d
                        )));
                    }
                }
                if st.counts.len() != s.k {
                    return Err(Error::InvalidStaging(format!("stage `{}` counts have the wrong length", st.id)));
                }
                if st.counts.iter().any(|c| !(*c >= T::zero())) {
                    return Err(Error::InvalidStaging(format!("stage `{}` has negative counts", st.id)));
                }
                if let Some(p) = &st.probs {
                    if p.len() != s.k || p.iter().any(|x| !(*x >= T::zero())) {
                        return Err(Error::InvalidStaging(format!(
                            "stage `{}` in stratum {} has an invalid probability vector",
                            st.id, d
                        )));
                    }
                    let sum: T = p.iter().copied().sum();
                    if (sum - T::one()).abs() > tol {
                        return Err(Error::InvalidStaging(format!(
                            "stage `{}` in stratum {} probabilities sum to {}",
                            st.id, d, sum
                        )));
                    }
                } else if self.fitted && !st.unobserved {
                    return Err(Error::InvalidStaging(format!(
                        "fitted model lacks probabilities for stage `{}` in stratum {}",
                        st.id, d
                    )));
                }
            }
            if n_unobs > 1 {
                return Err(Error::InvalidStaging(format!("stratum {} has several unobserved stages", d)));
            }
            if d == 0 && s.stages.len() != 1 {
                return Err(Error::InvalidStaging("the root must form its own stage".into()));
            }
            if let Some(ct) = &s.ctables {
                if ct.len() != s.assignment.len() * s.k {
                    return Err(Error::InvalidStaging(format!("stratum {} vertex counts have the wrong length", d)));
                }
                let mut sums = vec![vec![T::zero(); s.k]; s.stages.len()];
                for (v, &a) in s.assignment.iter().enumerate() {
                    for j in 0..s.k {
                        sums[a][j] = sums[a][j] + ct[v * s.k + j];
                    }
                }
                for (st, sum) in s.stages.iter().zip(&sums) {
                    for (a, b) in st.counts.iter().zip(sum) {
                        if (*a - *b).abs() > tol * (T::one() + b.abs()) {
                            return Err(Error::InvalidStaging(format!(
                                "stage `{}` counts disagree with its members in stratum {}",
                                st.id, d
                            )));
                        }
                    }
                }
            }
        }
        Ok(())
    }
}

/// `(n_j + lambda) / (m + lambda * k)`; `None` when the denominator is zero.
pub fn smoothed_probs<T: Real>(counts: &[T], lambda: T) -> Option<Vec<T>> {
    let k = T::from_count(counts.len());
    let m: T = counts.iter().copied().sum();
    let denom = m + lambda * k;
    if !(denom > T::zero()) {
        return None;
    }
    Some(counts.iter().map(|&n| (n + lambda) / denom).collect())
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::tree::Variable;

    fn binary3() -> EventTree {
        EventTree::new(vec![
            Variable::new("X1", ["0", "1"]),
            Variable::new("X2", ["0", "1"]),
            Variable::new("X3", ["0", "1"]),
        ])
        .unwrap()
    }

    fn labels(v: &[&[&str]]) -> Vec<Vec<String>> {
        v.iter().map(|s| s.iter().map(|x| x.to_string()).collect()).collect()
    }

    #[test]
    fn smoothing_formula() {
        assert_eq!(smoothed_probs(&[2.0, 2.0], 0.0).unwrap(), vec![0.5, 0.5]);
        let p = smoothed_probs(&[0.0f64, 4.0], 1.0).unwrap();
        assert!((p[0] - 1.0 / 6.0).abs() < 1e-15 && (p[1] - 5.0 / 6.0).abs() < 1e-15);
        assert!(smoothed_probs(&[0.0_f64, 0.0], 0.0).is_none());
    }

    #[test]
    fn slots_follow_first_appearance() {
        let st: StagedTree = StagedTree::from_labels(
            binary3(),
            labels(&[&["r"], &["b", "a"], &["z", "y", "z", "x"]]),
            "na",
        )
        .unwrap();
        let s2 = st.stratum(2);
        assert_eq!(s2.stages()[0].id, "z");
        assert_eq!(s2.members(0), vec![0, 2]);
        assert_eq!(st.stage_id(VertexId::new(2, 3)), "x");
    }

    #[test]
    fn rejects_bad_stagings() {
        let t = binary3();
        assert!(StagedTree::<f64>::from_labels(t.clone(), labels(&[&["r"], &["a"], &["a", "a", "a", "a"]]), "na").is_err());
        assert!(StagedTree::<f64>::from_labels(t.clone(), labels(&[&["r"], &["a", "a"]]), "na").is_err());
        assert!(
            StagedTree::<f64>::from_labels(t, labels(&[&["r"], &["a", "a"], &["a", "a", "a", "a", "a"]]), "na").is_err()
        );
    }

    #[test]
    fn fresh_labels_skip_used() {
        let st: StagedTree = StagedTree::from_labels(
            binary3(),
            labels(&[&["1"], &["1", "1"], &["1", "3", "na", "x"]]),
            "na",
        )
        .unwrap();
        assert_eq!(st.fresh_label(2), "4");
        assert_eq!(st.fresh_label(1), "2");
    }

    #[test]
    fn normalize_drops_empty_slots() {
        let mut st: StagedTree = StagedTree::from_labels(
            binary3(),
            labels(&[&["1"], &["1", "2"], &["1", "2", "3", "4"]]),
            "na",
        )
        .unwrap();
        let s = &mut st.strata[2];
        s.assignment = vec![3, 1, 3, 1];
        s.normalize();
        assert_eq!(s.stages.len(), 2);
        assert_eq!(s.stages[0].id, "4");
        assert_eq!(s.assignment, vec![0, 1, 0, 1]);
    }
}
