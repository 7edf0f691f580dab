//! Initial models, maximum-likelihood fitting and information criteria.

use crate::data::Dataset;
use crate::error::{Error, Result};
use crate::model::{StagedTree, DEFAULT_UNOBSERVED};
use crate::num::{xlogy, Real};

/// Options shared by [`full`] and [`indep`].
#[derive(Debug, Clone)]
pub struct InitOptions<T: Real = f64> {
    pub order: Option<Vec<String>>,
    pub join_unobserved: bool,
    pub lambda: T,
    pub name_unobserved: String,
}

impl<T: Real> Default for InitOptions<T> {
    fn default() -> Self {
        InitOptions {
            order: None,
            join_unobserved: true,
            lambda: T::zero(),
            name_unobserved: DEFAULT_UNOBSERVED.to_string(),
        }
    }
}

/// Log-likelihood and information criteria of a fitted model.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ModelScore<T: Real = f64> {
    pub loglik: T,
    pub df: usize,
    pub aic: T,
    pub bic: T,
    pub n: T,
}

impl<T: Real> ModelScore<T> {
    pub fn new(loglik: T, df: usize, n: T) -> Self {
        let dfr = T::from_count(df);
        let two = T::lit(2.0);
        ModelScore {
            loglik,
            df,
            aic: two * dfr - two * loglik,
            bic: dfr * n.ln() - two * loglik,
            n,
        }
    }
}

fn prepare<T: Real>(ds: &Dataset<T>, opts: &InitOptions<T>) -> Result<Dataset<T>> {
    if opts.lambda < T::zero() {
        return Err(Error::InvalidArgument("lambda must be non-negative".into()));
    }
    if !(ds.total() > T::zero()) {
        return Err(Error::InvalidData("dataset has no observations".into()));
    }
    match &opts.order {
        Some(order) => ds.reorder(order),
        None => Ok(ds.clone()),
    }
}

fn build<T: Real>(ds: Dataset<T>, opts: &InitOptions<T>, saturated: bool) -> Result<StagedTree<T>> {
    let tree = ds.tree().clone();
    let labels = (0..tree.len())
        .map(|d| {
            (0..tree.stratum_size(d))
                .map(|v| if saturated { (v + 1).to_string() } else { "1".to_string() })
                .collect()
        })
        .collect();
    let mut st = StagedTree::from_labels(tree, labels, &opts.name_unobserved)?;
    st.attach_counts(&ds)?;
    if opts.join_unobserved {
        st = collapse_unobserved(&st, &ds, &opts.name_unobserved)?;
    }
    st = st.standard_naming();
    st.refit(opts.lambda)?;
    Ok(st)
}

/// Saturated model: every observed vertex in its own stage.
pub fn full<T: Real>(ds: &Dataset<T>, opts: &InitOptions<T>) -> Result<StagedTree<T>> {
    build(prepare(ds, opts)?, opts, true)
}

/// Independence model: one observed stage per stratum.
pub fn indep<T: Real>(ds: &Dataset<T>, opts: &InitOptions<T>) -> Result<StagedTree<T>> {
    build(prepare(ds, opts)?, opts, false)
}

/// Moves every vertex with a zero path-prefix count into the stratum's unobserved stage.
///
/// The root is never moved. Vertices that sit in a stage labelled `name` but do
/// have observations are moved to a fresh stage of their own.
pub fn collapse_unobserved<T: Real>(st: &StagedTree<T>, ds: &Dataset<T>, name: &str) -> Result<StagedTree<T>> {
    if ds.tree() != st.tree() {
        return Err(Error::Incompatible("dataset and model trees differ".into()));
    }
    let pc = ds.prefix_counts();
    let mut labels = st.labels();
    for d in 1..labels.len() {
        let mut fresh: Option<String> = None;
        for v in 0..labels[d].len() {
            if pc[d][v] == T::zero() {
                labels[d][v] = name.to_string();
            } else if labels[d][v] == name {
                let f = fresh.get_or_insert_with(|| unused_numeric_label(&labels[d], name));
                labels[d][v] = f.clone();
            }
        }
    }
    let mut out = StagedTree::from_labels(st.tree.clone(), labels, name)?;
    out.attach_counts(ds)?;
    if st.fitted {
        out.refit(st.lambda)?;
    } else {
        out.lambda = st.lambda;
    }
    Ok(out)
}

fn unused_numeric_label(labels: &[String], reserved: &str) -> String {
    let mut n = labels.iter().filter_map(|l| l.parse::<u64>().ok()).max().unwrap_or(0) + 1;
    while n.to_string() == reserved {
        n += 1;
    }
    n.to_string()
}

/// Fits stage probabilities by (smoothed) maximum likelihood on `ds`.
pub fn fit<T: Real>(st: &StagedTree<T>, ds: &Dataset<T>, lambda: T) -> Result<StagedTree<T>> {
    if lambda < T::zero() {
        return Err(Error::InvalidArgument("lambda must be non-negative".into()));
    }
    let mut out = st.clone();
    out.attach_counts(ds)?;
    out.refit(lambda)?;
    Ok(out)
}

/// Log-likelihood contribution of a stage with `counts` under smoothing `lambda`.
pub fn stage_loglik<T: Real>(counts: &[T], lambda: T) -> T {
    let m: T = counts.iter().copied().sum();
    let denom = m + lambda * T::from_count(counts.len());
    if !(denom > T::zero()) {
        return T::zero();
    }
    counts.iter().map(|&n| xlogy(n, (n + lambda) / denom)).sum()
}

/// Natural-log likelihood of the data the model was fitted on.
pub fn loglik<T: Real>(st: &StagedTree<T>) -> Result<T> {
    if !st.fitted {
        return Err(Error::NotFitted);
    }
    let mut total = T::zero();
    for (d, s) in st.strata.iter().enumerate() {
        for stage in s.stages.iter().filter(|s| !s.unobserved) {
            let p = stage.probs.as_ref().ok_or(Error::NotFitted)?;
            for (&n, &q) in stage.counts.iter().zip(p) {
                if n > T::zero() && q == T::zero() {
                    return Err(Error::Numeric(format!(
                        "stage `{}` in stratum {} has zero probability for an observed level",
                        stage.id, d
                    )));
                }
                total = total + xlogy(n, q);
            }
        }
    }
    Ok(total)
}

/// Number of free parameters; the unobserved stage counts as a stage.
pub fn df<T: Real>(st: &StagedTree<T>) -> usize {
    st.strata.iter().map(|s| s.n_stages() * (s.k - 1)).sum()
}

pub fn score<T: Real>(st: &StagedTree<T>) -> Result<ModelScore<T>> {
    Ok(ModelScore::new(loglik(st)?, df(st), st.n_obs()))
}

pub fn aic<T: Real>(st: &StagedTree<T>) -> Result<T> {
    Ok(score(st)?.aic)
}

pub fn bic<T: Real>(st: &StagedTree<T>) -> Result<T> {
    Ok(score(st)?.bic)
}
