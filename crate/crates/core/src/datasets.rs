//! Built-in datasets: the Titanic contingency table and the `Asym` simulator.

use crate::data::{Dataset, Records};
use crate::num::Real;
use crate::tree::{EventTree, Variable};
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub const TITANIC_N: usize = 2201;

/// Titanic passengers and crew by Class, Sex, Age and Survived.
pub fn titanic_tree() -> EventTree {
    EventTree::new(vec![
        Variable::new("Class", ["1st", "2nd", "3rd", "Crew"]),
        Variable::new("Sex", ["Male", "Female"]),
        Variable::new("Age", ["Child", "Adult"]),
        Variable::new("Survived", ["No", "Yes"]),
    ])
    .expect("valid titanic tree")
}

// [survived][age][sex][class]
const TITANIC_COUNTS: [[[[u32; 4]; 2]; 2]; 2] = [
    [[[0, 0, 35, 0], [0, 0, 17, 0]], [[118, 154, 387, 670], [4, 13, 89, 3]]],
    [[[5, 11, 13, 0], [1, 13, 14, 0]], [[57, 14, 75, 192], [140, 80, 76, 20]]],
];

pub fn titanic<T: Real>() -> Dataset<T> {
    let tree = titanic_tree();
    let mut ds = Dataset::zeros(tree);
    for (sv, by_age) in TITANIC_COUNTS.iter().enumerate() {
        for (age, by_sex) in by_age.iter().enumerate() {
            for (sex, by_class) in by_sex.iter().enumerate() {
                for (class, &n) in by_class.iter().enumerate() {
                    ds.add(&[class, sex, age, sv], T::from_count(n as usize))
                        .expect("cell in range");
                }
            }
        }
    }
    ds
}

/// One record per passenger, in cell order.
pub fn titanic_records() -> Records {
    titanic::<f64>().to_records().expect("integer counts")
}

/// Four binary variables with context-specific dependence on the class `C`.
///
/// `X3` depends on `(C, X2)` only through the context `C = yes, X2 = 1`, and
/// `X4` depends on `X2` when `C = yes` but on `X3` when `C = no`, so the
/// generating staged tree has 9 free parameters while the saturated tree has 15.
pub fn asym_tree() -> EventTree {
    EventTree::new(vec![
        Variable::new("C", ["yes", "no"]),
        Variable::new("X2", ["0", "1"]),
        Variable::new("X3", ["0", "1"]),
        Variable::new("X4", ["0", "1"]),
    ])
    .expect("valid asym tree")
}

/// Draws `n` records from the `Asym` generator.
///
/// Probabilities of level `0`: `C` 0.7; `X2` 0.39 if `C = yes`, else 0.77;
/// `X3` 0.32 if `C = yes, X2 = 1`, else 0.63; `X4` 0.82 / 0.55 for
/// `C = yes` and `X2 = 0 / 1`, 0.03 / 0.30 for `C = no` and `X3 = 0 / 1`.
pub fn asym(n: usize, seed: u64) -> Records {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut draw = |p0: f64| usize::from(!rng.random_bool(p0));
    let rows = (0..n)
        .map(|_| {
            let c = draw(0.7);
            let x2 = draw(if c == 0 { 0.39 } else { 0.77 });
            let x3 = draw(if c == 0 && x2 == 1 { 0.32 } else { 0.63 });
            let p4 = match (c, x2, x3) {
                (0, 0, _) => 0.82,
                (0, _, _) => 0.55,
                (_, _, 0) => 0.03,
                _ => 0.30,
            };
            let x4 = draw(p4);
            vec![c, x2, x3, x4]
        })
        .collect();
    Records { tree: asym_tree(), rows }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn titanic_margins() {
        let ds = titanic::<f64>();
        assert_eq!(ds.total(), 2201.0);
        let pc = ds.prefix_counts();
        assert_eq!(pc[1], vec![325.0, 285.0, 706.0, 885.0]);
        let survived: f64 = (0..ds.counts().len()).filter(|i| i % 2 == 1).map(|i| ds.counts()[i]).sum();
        assert_eq!(survived, 711.0);
        assert_eq!(titanic_records().len(), TITANIC_N);
    }

    #[test]
    fn asym_is_reproducible() {
        let a = asym(500, 3);
        assert_eq!(a, asym(500, 3));
        assert_ne!(a, asym(500, 4));
        let yes = a.rows.iter().filter(|r| r[0] == 0).count() as f64 / 500.0;
        assert!((yes - 0.7).abs() < 0.07);
    }
}
