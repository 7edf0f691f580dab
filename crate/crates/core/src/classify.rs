//! Prediction of a class variable as the most probable completion of a record.

use crate::data::Records;
use crate::error::{Error, Result};
use crate::model::StagedTree;
use crate::num::Real;
use crate::query::path_prob;

/// Marginal probability of each level of variable `d`.
fn marginal<T: Real>(st: &StagedTree<T>, d: usize) -> Result<Vec<T>> {
    let var = st.tree().variable(d);
    var.levels
        .iter()
        .map(|l| {
            let mut x = crate::query::PartialAssignment::new();
            x.insert(var.name.clone(), l.clone());
            crate::query::prob(st, &x, false)
        })
        .collect()
}

fn argmax<T: Real>(v: &[T]) -> usize {
    let mut best = 0;
    for (i, &x) in v.iter().enumerate().skip(1) {
        if x > v[best] {
            best = i;
        }
    }
    best
}

/// Predicts the level index of variable `class` for each row of level indices
/// over the model's variables (the class entry of a row is ignored).
///
/// The prediction maximizes the joint probability of the completed row; ties go
/// to the earlier level, and rows where every completion has probability 0 get
/// the most probable class level overall.
pub fn predict_indices<T: Real>(st: &StagedTree<T>, class: usize, rows: &[Vec<usize>]) -> Result<Vec<usize>> {
    if !st.is_fitted() {
        return Err(Error::NotFitted);
    }
    let k = st.tree().cardinality(class);
    let fallback = argmax(&marginal(st, class)?);
    let mut out = Vec::with_capacity(rows.len());
    let mut probs = vec![T::zero(); k];
    for row in rows {
        let mut x = row.clone();
        for (c, p) in probs.iter_mut().enumerate() {
            x[class] = c;
            *p = path_prob(st, &x)?;
        }
        out.push(if probs.iter().all(|&p| p == T::zero()) {
            fallback
        } else {
            argmax(&probs)
        });
    }
    Ok(out)
}

/// Maps the columns of `newdata` onto the model's variables by name. The
/// class column may be missing; every other model variable must be present.
fn align<T: Real>(st: &StagedTree<T>, class: usize, newdata: &Records) -> Result<Vec<Vec<usize>>> {
    let tree = st.tree();
    let mut cols = Vec::with_capacity(tree.len());
    for (d, var) in tree.variables().iter().enumerate() {
        match newdata.tree.variable_index(&var.name) {
            Ok(c) => cols.push(Some(c)),
            Err(_) if d == class => cols.push(None),
            Err(e) => return Err(e),
        }
    }
    let mut maps = Vec::with_capacity(tree.len());
    for (d, c) in cols.iter().enumerate() {
        maps.push(match c {
            Some(c) => newdata
                .tree
                .variable(*c)
                .levels
                .iter()
                .map(|l| {
                    if d == class {
                        Ok(tree.variable(d).level_index(l).unwrap_or(0))
                    } else {
                        tree.variable(d).level_index(l)
                    }
                })
                .collect::<Result<Vec<_>>>()?,
            None => Vec::new(),
        });
    }
    Ok(newdata
        .rows
        .iter()
        .map(|r| {
            cols.iter()
                .enumerate()
                .map(|(d, c)| c.map_or(0, |c| maps[d][r[c]]))
                .collect()
        })
        .collect())
}

/// Predicted class labels for the rows of `newdata`, matched to the model by variable name.
pub fn predict<T: Real>(st: &StagedTree<T>, class_var: &str, newdata: &Records) -> Result<Vec<String>> {
    let class = st.tree().variable_index(class_var)?;
    let rows = align(st, class, newdata)?;
    let levels = &st.tree().variable(class).levels;
    Ok(predict_indices(st, class, &rows)?
        .into_iter()
        .map(|c| levels[c].clone())
        .collect())
}

/// Fraction of rows of `test` whose class label is predicted correctly.
pub fn accuracy<T: Real>(st: &StagedTree<T>, class_var: &str, test: &Records) -> Result<T> {
    if test.is_empty() {
        return Err(Error::InvalidData("no rows to classify".into()));
    }
    let truth_col = test.tree.variable_index(class_var)?;
    let pred = predict(st, class_var, test)?;
    let levels = &test.tree.variable(truth_col).levels;
    let hits = pred
        .iter()
        .zip(&test.rows)
        .filter(|(p, r)| **p == levels[r[truth_col]])
        .count();
    Ok(T::from_count(hits) / T::from_count(test.len()))
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Dataset;
    use crate::estimate::{full, InitOptions};
    use crate::tree::{EventTree, Variable};

    fn tree() -> EventTree {
        EventTree::new(vec![Variable::new("C", ["n", "y"]), Variable::new("X", ["0", "1", "2"])]).unwrap()
    }

    #[test]
    fn deterministic_class_is_recovered() {
        // C = y iff X = 1; X = 2 never observed
        let st = full(&Dataset::new(tree(), vec![5.0, 0.0, 0.0, 0.0, 3.0, 0.0]).unwrap(), &InitOptions::default()).unwrap();
        let rows = vec![vec![0, 0], vec![0, 1], vec![1, 2]];
        assert_eq!(predict_indices(&st, 0, &rows).unwrap(), vec![0, 1, 0]);
    }

    #[test]
    fn ties_go_to_first_level() {
        let st = full(&Dataset::new(tree(), vec![2.0, 1.0, 1.0, 2.0, 1.0, 1.0]).unwrap(), &InitOptions::default()).unwrap();
        assert_eq!(predict_indices(&st, 0, &[vec![0, 2]]).unwrap(), vec![0]);
    }

    #[test]
    fn one_variable_predicts_the_mode() {
        let t = EventTree::new(vec![Variable::new("C", ["a", "b"])]).unwrap();
        let st = full(&Dataset::new(t.clone(), vec![1.0, 4.0]).unwrap(), &InitOptions::default()).unwrap();
        let test = Records {
            tree: t,
            rows: vec![vec![0], vec![1]],
        };
        assert_eq!(predict(&st, "C", &test).unwrap(), vec!["b", "b"]);
        assert_eq!(accuracy(&st, "C", &test).unwrap(), 0.5);
    }

    #[test]
    fn columns_matched_by_name() {
        let st = full(&Dataset::new(tree(), vec![5.0, 0.0, 0.0, 0.0, 3.0, 1.0]).unwrap(), &InitOptions::default()).unwrap();
        let other = EventTree::new(vec![Variable::new("X", ["1", "0"])]).unwrap();
        let test = Records {
            tree: other,
            rows: vec![vec![0], vec![1]],
        };
        assert_eq!(predict(&st, "C", &test).unwrap(), vec!["y", "n"]);
        let bad = Records {
            tree: EventTree::new(vec![Variable::new("X", ["0", "9"])]).unwrap(),
            rows: vec![vec![1]],
        };
        assert!(predict(&st, "C", &bad).is_err());
    }
}
