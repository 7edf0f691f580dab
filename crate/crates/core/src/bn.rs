//! Compilation of a Bayesian network structure into a staged tree.

use crate::error::{Error, Result};
use crate::model::{StagedTree, DEFAULT_UNOBSERVED};
use crate::num::Real;
use crate::tree::EventTree;
use std::collections::{BTreeMap, HashMap};

/// Staged tree encoding the conditional independences of a DAG whose
/// topological order is the tree's variable order.
///
/// Two vertices of stratum `d` share a stage iff their paths agree on every
/// parent of variable `d`. Missing entries in `parents` mean no parents. No
/// unobserved stage is created; the result is unfitted.
pub fn as_staged_tree_from_bn<T: Real>(
    tree: &EventTree,
    parents: &BTreeMap<String, Vec<String>>,
) -> Result<StagedTree<T>> {
    for child in parents.keys() {
        tree.variable_index(child)?;
    }
    let mut labels = Vec::with_capacity(tree.len());
    for d in 0..tree.len() {
        let name = &tree.variable(d).name;
        let mut pa = Vec::new();
        if let Some(ps) = parents.get(name) {
            for p in ps {
                let i = tree.variable_index(p)?;
                if i >= d {
                    return Err(Error::InvalidArgument(format!(
                        "parent `{}` of `{}` is not earlier in the variable order",
                        p, name
                    )));
                }
                if !pa.contains(&i) {
                    pa.push(i);
                }
            }
        }
        pa.sort_unstable();
        let mut seen: HashMap<Vec<usize>, String> = HashMap::new();
        let mut lab = Vec::with_capacity(tree.stratum_size(d));
        for v in 0..tree.stratum_size(d) {
            let path = tree.decode_indices(crate::tree::VertexId::new(d, v))?;
            let key: Vec<usize> = pa.iter().map(|&i| path[i]).collect();
            let n = seen.len();
            let l = seen.entry(key).or_insert_with(|| (n + 1).to_string()).clone();
            lab.push(l);
        }
        labels.push(lab);
    }
    StagedTree::from_labels(tree.clone(), labels, DEFAULT_UNOBSERVED)
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

    fn parents(spec: &[(&str, &[&str])]) -> BTreeMap<String, Vec<String>> {
        spec.iter()
            .map(|(c, ps)| (c.to_string(), ps.iter().map(|p| p.to_string()).collect()))
            .collect()
    }

    #[test]
    fn common_parent_gives_two_stages() {
        let st: StagedTree = as_staged_tree_from_bn(&binary3(), &parents(&[("X2", &["X1"]), ("X3", &["X1"])])).unwrap();
        let s2 = st.stratum(2);
        assert_eq!(s2.n_stages(), 2);
        assert_eq!(s2.members(0), vec![0, 1]);
        assert_eq!(s2.members(1), vec![2, 3]);
        assert_eq!(st.stratum(1).n_stages(), 2);
    }

    #[test]
    fn empty_and_complete_parent_sets() {
        let t = binary3();
        let none: StagedTree = as_staged_tree_from_bn(&t, &BTreeMap::new()).unwrap();
        assert!(none.strata().iter().all(|s| s.n_stages() == 1));
        let all: StagedTree = as_staged_tree_from_bn(&t, &parents(&[("X2", &["X1"]), ("X3", &["X1", "X2"])])).unwrap();
        for d in 0..3 {
            assert_eq!(all.stratum(d).n_stages(), t.stratum_size(d));
        }
    }

    #[test]
    fn parent_must_come_first() {
        assert!(as_staged_tree_from_bn::<f64>(&binary3(), &parents(&[("X2", &["X3"])])).is_err());
        assert!(as_staged_tree_from_bn::<f64>(&binary3(), &parents(&[("X2", &["X2"])])).is_err());
        assert!(as_staged_tree_from_bn::<f64>(&binary3(), &parents(&[("X9", &["X1"])])).is_err());
    }
}
