//! Likelihood-ratio test between nested staged trees.

use crate::error::{Error, Result};
use crate::estimate::{df, loglik};
use crate::model::StagedTree;
use crate::num::Real;
use crate::special::chisq_upper_tail;
use std::collections::HashMap;

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct LrTest<T: Real = f64> {
    pub statistic: T,
    pub df: usize,
    pub p_value: T,
}

/// True if every stage of `fine` lies inside a single stage of `coarse`, in every stratum.
pub fn is_coarsening<T: Real>(coarse: &StagedTree<T>, fine: &StagedTree<T>) -> bool {
    coarse.tree() == fine.tree()
        && coarse.strata().iter().zip(fine.strata()).all(|(c, f)| {
            let mut owner: HashMap<usize, usize> = HashMap::new();
            c.assignment()
                .iter()
                .zip(f.assignment())
                .all(|(&a, &b)| *owner.entry(b).or_insert(a) == a)
        })
}

/// Tests `nested` against the more general model `general`; both must be fitted on the same data.
pub fn lr_test<T: Real>(nested: &StagedTree<T>, general: &StagedTree<T>) -> Result<LrTest<T>> {
    if nested.tree() != general.tree() {
        return Err(Error::Incompatible("models have different event trees".into()));
    }
    let same_data = match (nested.stratum(0).vertex_counts(0), general.stratum(0).vertex_counts(0)) {
        (Some(_), Some(_)) => (0..nested.tree().len()).all(|d| nested.stratum(d).ctables == general.stratum(d).ctables),
        _ => nested.n_obs() == general.n_obs(),
    };
    if !same_data {
        return Err(Error::Incompatible("models were fitted on different data".into()));
    }
    if !is_coarsening(nested, general) {
        return Err(Error::NotNested("the first model's staging does not coarsen the second's".into()));
    }
    let (d0, d1) = (df(nested), df(general));
    if d1 <= d0 {
        return Err(Error::InvalidArgument(format!(
            "the general model must have more parameters ({} vs {})",
            d1, d0
        )));
    }
    let statistic = T::lit(2.0) * (loglik(general)? - loglik(nested)?);
    let df = d1 - d0;
    let p_value = chisq_upper_tail(statistic.max(T::zero()), df)?;
    Ok(LrTest {
        statistic,
        df,
        p_value,
    })
}
