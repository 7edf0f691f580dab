#![allow(dead_code)]

use rand::Rng;
use stagedtree::*;
use std::collections::BTreeMap;
use std::ops::Range;

pub fn random_tree(rng: &mut impl Rng, max_vars: usize, max_card: usize) -> EventTree {
    let n = rng.random_range(1..=max_vars);
    EventTree::new(
        (0..n)
            .map(|i| {
                let k = rng.random_range(2..=max_card);
                Variable::new(format!("V{}", i), (0..k).map(|l| format!("l{}", l)))
            })
            .collect(),
    )
    .unwrap()
}

/// Integer counts over a random tree, with at least one observation.
pub fn random_dataset(rng: &mut impl Rng, max_vars: usize, max_card: usize, counts: Range<u32>) -> Dataset {
    let tree = random_tree(rng, max_vars, max_card);
    let mut c: Vec<f64> = (0..tree.n_leaves()).map(|_| rng.random_range(counts.clone()) as f64).collect();
    if c.iter().all(|&x| x == 0.0) {
        c[0] = 1.0;
    }
    Dataset::new(tree, c).unwrap()
}

/// A fitted model with a random stratified staging and strictly positive counts.
pub fn random_staged(rng: &mut impl Rng, max_vars: usize, max_card: usize) -> StagedTree {
    let ds = random_dataset(rng, max_vars, max_card, 1..20);
    let tree = ds.tree().clone();
    let labels = (0..tree.len())
        .map(|d| {
            let stages = rng.random_range(1..=tree.stratum_size(d).min(3));
            (0..tree.stratum_size(d))
                .map(|_| (rng.random_range(0..stages) + 1).to_string())
                .collect()
        })
        .collect();
    fit(&StagedTree::from_labels(tree, labels, "na").unwrap(), &ds, 0.0).unwrap()
}

pub fn binary3() -> EventTree {
    EventTree::new(vec![
        Variable::new("X1", ["0", "1"]),
        Variable::new("X2", ["0", "1"]),
        Variable::new("X3", ["0", "1"]),
    ])
    .unwrap()
}

/// Fitted three-binary model with the given stage labels per stratum.
pub fn staging_of(labels: &[&[&str]]) -> StagedTree {
    let labels = labels.iter().map(|s| s.iter().map(|x| x.to_string()).collect()).collect();
    let st = StagedTree::from_labels(binary3(), labels, "na").unwrap();
    let ds = Dataset::new(binary3(), vec![3.0, 1.0, 2.0, 5.0, 4.0, 4.0, 7.0, 1.0]).unwrap();
    fit(&st, &ds, 0.0).unwrap()
}

/// The network X1 -> X2, X1 -> X3 compiled to a staged tree, with well separated
/// conditional distributions.
pub fn fig1_model() -> StagedTree {
    let tree = binary3();
    let mut parents = BTreeMap::new();
    parents.insert("X2".to_string(), vec!["X1".to_string()]);
    parents.insert("X3".to_string(), vec!["X1".to_string()]);
    let bn: StagedTree = as_staged_tree_from_bn(&tree, &parents).unwrap();
    let p1 = [0.4, 0.6];
    let p2 = [[0.2, 0.8], [0.7, 0.3]];
    let p3 = [[0.3, 0.7], [0.8, 0.2]];
    // expected counts reproduce the conditional probabilities exactly
    let mut counts = Vec::new();
    for a in 0..2 {
        for b in 0..2 {
            for c in 0..2 {
                counts.push(1e6 * p1[a] * p2[a][b] * p3[a][c]);
            }
        }
    }
    fit(&bn, &Dataset::new(tree, counts).unwrap(), 0.0).unwrap()
}
