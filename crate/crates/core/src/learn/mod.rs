//! Score- and distance-driven search over stratified stagings.
//!
//! Every algorithm works one stratum at a time and never touches the root
//! stratum, strata outside the scope, or the unobserved stage. Candidate moves
//! are scored incrementally: the score is a sum of per-stage terms, so a move
//! only recomputes the terms of the stages it changes.
//!
//! Ties are resolved by scan order. Stages are scanned in slot order (the
//! order in which they first appear among the stratum's vertices) and a
//! candidate only replaces the current best if it is better by more than
//! [`Real::score_tolerance`].

mod backward;
mod bj;
mod cluster;
mod hc;

pub use backward::{stages_bhc, stages_bhcr, stages_fbhc};
pub use bj::stages_bj;
pub use cluster::{stages_hclust, stages_kmeans, Linkage};
pub use hc::stages_hc;

use crate::divergence::Divergence;
use crate::error::{Error, Result};
use crate::estimate::{df, loglik, stage_loglik};
use crate::model::{Stage, StagedTree};
use crate::num::Real;
use std::fmt;
use std::str::FromStr;

/// Objective maximized by the score-based algorithms.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ScoreKind {
    #[default]
    NegBic,
    NegAic,
    Loglik,
}

impl FromStr for ScoreKind {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "bic" | "neg_bic" => Ok(ScoreKind::NegBic),
            "aic" | "neg_aic" => Ok(ScoreKind::NegAic),
            "loglik" => Ok(ScoreKind::Loglik),
            _ => Err(Error::InvalidArgument(format!("unknown score `{}`", s))),
        }
    }
}

impl fmt::Display for ScoreKind {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            ScoreKind::NegBic => "bic",
            ScoreKind::NegAic => "aic",
            ScoreKind::Loglik => "loglik",
        })
    }
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Algorithm {
    Hc,
    Bhc,
    Fbhc,
    Bhcr,
    Bj,
    Hclust,
    Kmeans,
}

impl Algorithm {
    pub const ALL: [Algorithm; 7] = [
        Algorithm::Hc,
        Algorithm::Bhc,
        Algorithm::Fbhc,
        Algorithm::Bhcr,
        Algorithm::Bj,
        Algorithm::Hclust,
        Algorithm::Kmeans,
    ];
}

impl FromStr for Algorithm {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        Algorithm::ALL
            .into_iter()
            .find(|a| a.to_string() == s)
            .ok_or_else(|| Error::InvalidArgument(format!("unknown algorithm `{}`", s)))
    }
}

impl fmt::Display for Algorithm {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Algorithm::Hc => "hc",
            Algorithm::Bhc => "bhc",
            Algorithm::Fbhc => "fbhc",
            Algorithm::Bhcr => "bhcr",
            Algorithm::Bj => "bj",
            Algorithm::Hclust => "hclust",
            Algorithm::Kmeans => "kmeans",
        })
    }
}

#[derive(Debug, Clone)]
pub struct SearchConfig<T: Real = f64> {
    pub score: ScoreKind,
    /// Variables whose strata are searched; `None` means all but the first.
    pub scope: Option<Vec<String>>,
    pub seed: u64,
    /// Iterations of `bhcr`.
    pub max_iter: usize,
    /// Distance threshold of `bj`.
    pub thr: T,
    /// Stages per stratum for `hclust` and `kmeans`.
    pub k: usize,
    pub distance: Divergence<T>,
    pub linkage: Linkage,
    pub n_restarts: usize,
}

impl<T: Real> Default for SearchConfig<T> {
    fn default() -> Self {
        SearchConfig {
            score: ScoreKind::NegBic,
            scope: None,
            seed: 0,
            max_iter: 100,
            thr: T::lit(0.1),
            k: 2,
            distance: Divergence::KlSym,
            linkage: Linkage::Complete,
            n_restarts: 10,
        }
    }
}

/// Runs `alg` on a fitted model.
pub fn learn<T: Real>(st: &StagedTree<T>, alg: Algorithm, cfg: &SearchConfig<T>) -> Result<StagedTree<T>> {
    match alg {
        Algorithm::Hc => stages_hc(st, cfg),
        Algorithm::Bhc => stages_bhc(st, cfg),
        Algorithm::Fbhc => stages_fbhc(st, cfg),
        Algorithm::Bhcr => stages_bhcr(st, cfg),
        Algorithm::Bj => stages_bj(st, cfg),
        Algorithm::Hclust => stages_hclust(st, cfg),
        Algorithm::Kmeans => stages_kmeans(st, cfg),
    }
}

/// Value of the objective on a fitted model: `-BIC`, `-AIC` or the log-likelihood.
pub fn score_model<T: Real>(st: &StagedTree<T>, kind: ScoreKind) -> Result<T> {
    let l = loglik(st)?;
    let d = T::from_count(df(st));
    let two = T::lit(2.0);
    Ok(match kind {
        ScoreKind::NegBic => two * l - d * st.n_obs().ln(),
        ScoreKind::NegAic => two * l - two * d,
        ScoreKind::Loglik => l,
    })
}

/// Joins stages `a` and `b` of stratum `stratum`; the merged stage keeps label `a`.
pub fn join_stages<T: Real>(st: &StagedTree<T>, stratum: usize, a: &str, b: &str) -> Result<StagedTree<T>> {
    require_counts(st)?;
    if stratum >= st.strata.len() {
        return Err(Error::InvalidArgument(format!("no stratum {}", stratum)));
    }
    if a == b {
        return Err(Error::InvalidArgument("cannot join a stage with itself".into()));
    }
    let s = &st.strata[stratum];
    let slot = |id: &str| {
        s.slot_of_id(id).ok_or_else(|| Error::UnknownStage {
            stratum,
            stage: id.to_string(),
        })
    };
    let (sa, sb) = (slot(a)?, slot(b)?);
    if s.stages[sa].unobserved || s.stages[sb].unobserved {
        return Err(Error::InvalidArgument("the unobserved stage cannot be joined".into()));
    }
    let mut out = st.clone();
    merge_slots(&mut out, stratum, sa, sb)?;
    Ok(out)
}

pub(crate) fn require_counts<T: Real>(st: &StagedTree<T>) -> Result<()> {
    if !st.fitted || !st.has_counts() {
        return Err(Error::NotFitted);
    }
    Ok(())
}

/// Strata searched under `scope`, in variable order, excluding the root.
pub(crate) fn scope_strata<T: Real>(st: &StagedTree<T>, scope: &Option<Vec<String>>) -> Result<Vec<usize>> {
    let mut out: Vec<usize> = match scope {
        None => (1..st.tree.len()).collect(),
        Some(names) => {
            let mut v = Vec::with_capacity(names.len());
            for n in names {
                v.push(st.tree.variable_index(n)?);
            }
            v
        }
    };
    out.sort_unstable();
    out.dedup();
    out.retain(|&d| d > 0);
    Ok(out)
}

/// Observed stage slots of stratum `d`, in slot order.
pub(crate) fn observed_slots<T: Real>(st: &StagedTree<T>, d: usize) -> Vec<usize> {
    st.strata[d]
        .stages
        .iter()
        .enumerate()
        .filter(|(_, s)| !s.unobserved)
        .map(|(i, _)| i)
        .collect()
}

/// Per-stage score terms; the score of a model is the sum over its stages.
pub(crate) struct Scorer<T: Real> {
    mult: T,
    penalty: T,
    lambda: T,
}

impl<T: Real> Scorer<T> {
    pub(crate) fn new(st: &StagedTree<T>, kind: ScoreKind, k: usize) -> Self {
        let free = T::from_count(k - 1);
        let (mult, penalty) = match kind {
            ScoreKind::NegBic => (T::lit(2.0), free * st.n_obs().ln()),
            ScoreKind::NegAic => (T::lit(2.0), T::lit(2.0) * free),
            ScoreKind::Loglik => (T::one(), T::zero()),
        };
        Scorer {
            mult,
            penalty,
            lambda: st.lambda,
        }
    }

    /// Term of a non-empty observed stage with these counts, or `None` if it
    /// cannot be fitted.
    pub(crate) fn term(&self, counts: &[T]) -> Option<T> {
        let m: T = counts.iter().copied().sum();
        if !(m + self.lambda > T::zero()) {
            return None;
        }
        Some(self.mult * stage_loglik(counts, self.lambda) - self.penalty)
    }

    pub(crate) fn stage_term(&self, s: &Stage<T>) -> T {
        if s.unobserved {
            -self.penalty
        } else {
            self.term(&s.counts).unwrap_or(T::neg_infinity())
        }
    }
}

pub(crate) fn add<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| x + y).collect()
}

pub(crate) fn sub<T: Real>(a: &[T], b: &[T]) -> Vec<T> {
    a.iter().zip(b).map(|(&x, &y)| (x - y).max(T::zero())).collect()
}

/// Moves every vertex of slot `drop` into slot `keep` and refits the result.
pub(crate) fn merge_slots<T: Real>(st: &mut StagedTree<T>, d: usize, keep: usize, drop: usize) -> Result<()> {
    let s = &mut st.strata[d];
    for a in s.assignment.iter_mut() {
        if *a == drop {
            *a = keep;
        }
    }
    let id = s.stages[keep].id.clone();
    s.recount();
    s.normalize();
    let slot = s.slot_of_id(&id).expect("kept stage survives");
    st.refit_stage(d, slot)
}

/// Moves vertex `v` of stratum `d` to slot `target`, or to a fresh stage.
pub(crate) fn move_vertex<T: Real>(st: &mut StagedTree<T>, d: usize, v: usize, target: Option<usize>) -> Result<()> {
    let fresh = st.fresh_label(d);
    let s = &mut st.strata[d];
    let from = s.assignment[v];
    let to = match target {
        Some(t) => t,
        None => {
            s.stages.push(Stage {
                id: fresh,
                counts: vec![T::zero(); s.k],
                probs: None,
                unobserved: false,
            });
            s.stages.len() - 1
        }
    };
    let ids = [s.stages[from].id.clone(), s.stages[to].id.clone()];
    s.assignment[v] = to;
    s.recount();
    s.normalize();
    for id in ids {
        if let Some(slot) = st.strata[d].slot_of_id(&id) {
            st.refit_stage(d, slot)?;
        }
    }
    Ok(())
}

/// Debug-build check that an incremental gain matches a full recomputation.
pub(crate) fn check_gain<T: Real>(st: &StagedTree<T>, kind: ScoreKind, before: T, gain: T) {
    if cfg!(debug_assertions) {
        let after = score_model(st, kind).expect("fitted model");
        let slack = T::score_tolerance(after) * T::lit(1e3);
        debug_assert!(
            (after - before - gain).abs() <= slack,
            "incremental gain {} disagrees with recomputed {}",
            gain,
            after - before
        );
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Dataset;
    use crate::estimate::{full, InitOptions};
    use crate::tree::{EventTree, Variable};

    fn ds() -> Dataset {
        let t = EventTree::new(vec![Variable::new("A", ["0", "1"]), Variable::new("B", ["0", "1"])]).unwrap();
        Dataset::new(t, vec![2.0, 2.0, 1.0, 3.0]).unwrap()
    }

    #[test]
    fn join_refits_from_merged_counts() {
        let st = full(&ds(), &InitOptions::default()).unwrap();
        let j = join_stages(&st, 1, "1", "2").unwrap();
        let s = &j.stratum(1).stages()[0];
        assert_eq!(s.id, "1");
        assert_eq!(s.probs.as_deref(), Some(&[3.0 / 8.0, 5.0 / 8.0][..]));
        assert!(loglik(&j).unwrap() <= loglik(&st).unwrap());
        j.validate().unwrap();
    }

    #[test]
    fn join_errors() {
        let st = full(&ds(), &InitOptions::default()).unwrap();
        assert!(join_stages(&st, 1, "1", "1").is_err());
        assert!(matches!(join_stages(&st, 1, "1", "9"), Err(Error::UnknownStage { .. })));
        assert!(join_stages(&st, 5, "1", "2").is_err());
    }

    #[test]
    fn score_kinds() {
        let st = full(&ds(), &InitOptions::default()).unwrap();
        let l = loglik(&st).unwrap();
        assert_eq!(score_model(&st, ScoreKind::Loglik).unwrap(), l);
        assert!((score_model(&st, ScoreKind::NegAic).unwrap() - (2.0 * l - 6.0)).abs() < 1e-12);
        assert!((score_model(&st, ScoreKind::NegBic).unwrap() - (2.0 * l - 3.0 * 8f64.ln())).abs() < 1e-12);
        assert_eq!("aic".parse::<ScoreKind>().unwrap(), ScoreKind::NegAic);
        for a in Algorithm::ALL {
            assert_eq!(a.to_string().parse::<Algorithm>().unwrap(), a);
        }
    }

    #[test]
    fn scope_excludes_root() {
        let st = full(&ds(), &InitOptions::default()).unwrap();
        assert_eq!(scope_strata(&st, &None).unwrap(), vec![1]);
        assert_eq!(scope_strata(&st, &Some(vec!["A".into()])).unwrap(), Vec::<usize>::new());
        assert!(scope_strata(&st, &Some(vec!["Z".into()])).is_err());
    }
}
