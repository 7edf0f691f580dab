//! Repeated train/test evaluation of a learning pipeline.
//!
//! Split `i` draws its training rows with a ChaCha8 generator seeded by
//! `seed` on stream `i`: the row indices are shuffled and the first
//! `round(train_fraction * n)` go to training, the rest to testing. The class
//! variable is the first variable of the records.

use crate::classify::predict_indices;
use crate::data::Records;
use crate::error::{Error, Result};
use crate::estimate::{full, indep, score, InitOptions};
use crate::learn::{learn, Algorithm, SearchConfig};
use crate::num::Real;
use rand::seq::SliceRandom;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::time::Instant;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Init {
    #[default]
    Full,
    Indep,
}

impl std::str::FromStr for Init {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "full" => Ok(Init::Full),
            "indep" => Ok(Init::Indep),
            _ => Err(Error::InvalidArgument(format!("unknown initial model `{}` (full, indep)", s))),
        }
    }
}

#[derive(Debug, Clone)]
pub struct EvalConfig<T: Real = f64> {
    pub init: Init,
    /// `None` evaluates the initial model itself.
    pub algorithm: Option<Algorithm>,
    pub search: SearchConfig<T>,
    pub init_options: InitOptions<T>,
    pub splits: usize,
    pub train_fraction: f64,
    pub seed: u64,
}

impl<T: Real> Default for EvalConfig<T> {
    fn default() -> Self {
        EvalConfig {
            init: Init::Full,
            algorithm: Some(Algorithm::Bhc),
            search: SearchConfig::default(),
            init_options: InitOptions::default(),
            splits: 10,
            train_fraction: 0.8,
            seed: 0,
        }
    }
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SplitResult<T: Real = f64> {
    pub split: usize,
    pub df: usize,
    pub loglik: T,
    pub aic: T,
    pub bic: T,
    pub accuracy: T,
    pub seconds: f64,
}

/// Training and test row indices of split `i`.
pub fn split_indices(n: usize, train_fraction: f64, seed: u64, i: usize) -> (Vec<usize>, Vec<usize>) {
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    rng.set_stream(i as u64);
    let mut idx: Vec<usize> = (0..n).collect();
    idx.shuffle(&mut rng);
    let n_train = (train_fraction * n as f64).round() as usize;
    let test = idx.split_off(n_train.min(n));
    (idx, test)
}

pub fn evaluate_split<T: Real>(records: &Records, cfg: &EvalConfig<T>, split: usize) -> Result<SplitResult<T>> {
    let (train, test) = split_indices(records.len(), cfg.train_fraction, cfg.seed, split);
    if train.is_empty() || test.is_empty() {
        return Err(Error::InvalidData(format!(
            "{} rows are too few for a {}/{} split",
            records.len(),
            cfg.train_fraction,
            1.0 - cfg.train_fraction
        )));
    }
    let start = Instant::now();
    let ds = records.subset_dataset::<T>(train.iter().copied())?;
    let init = match cfg.init {
        Init::Full => full(&ds, &cfg.init_options)?,
        Init::Indep => indep(&ds, &cfg.init_options)?,
    };
    let model = match cfg.algorithm {
        Some(alg) => learn(&init, alg, &cfg.search)?,
        None => init,
    };
    let seconds = start.elapsed().as_secs_f64();
    let s = score(&model)?;
    let rows: Vec<Vec<usize>> = test.iter().map(|&i| records.rows[i].clone()).collect();
    let pred = predict_indices(&model, 0, &rows)?;
    let hits = pred.iter().zip(&rows).filter(|(p, r)| **p == r[0]).count();
    Ok(SplitResult {
        split,
        df: s.df,
        loglik: s.loglik,
        aic: s.aic,
        bic: s.bic,
        accuracy: T::from_count(hits) / T::from_count(rows.len()),
        seconds,
    })
}

/// Runs every split, in parallel, returning results in split order.
pub fn evaluate<T: Real>(records: &Records, cfg: &EvalConfig<T>) -> Result<Vec<SplitResult<T>>> {
    if cfg.splits == 0 {
        return Err(Error::InvalidArgument("at least one split is required".into()));
    }
    if !(cfg.train_fraction > 0.0 && cfg.train_fraction < 1.0) {
        return Err(Error::InvalidArgument("train fraction must lie in (0, 1)".into()));
    }
    std::thread::scope(|s| {
        let handles: Vec<_> = (0..cfg.splits)
            .map(|i| s.spawn(move || evaluate_split(records, cfg, i)))
            .collect();
        handles
            .into_iter()
            .map(|h| h.join().expect("evaluation thread panicked"))
            .collect()
    })
}

/// Column means of the split results (the `split` field holds the number of splits).
pub fn mean<T: Real>(results: &[SplitResult<T>]) -> Option<MeanResult<T>> {
    if results.is_empty() {
        return None;
    }
    let n = T::from_count(results.len());
    let avg = |f: &dyn Fn(&SplitResult<T>) -> T| results.iter().map(f).sum::<T>() / n;
    Some(MeanResult {
        splits: results.len(),
        df: avg(&|r| T::from_count(r.df)),
        loglik: avg(&|r| r.loglik),
        aic: avg(&|r| r.aic),
        bic: avg(&|r| r.bic),
        accuracy: avg(&|r| r.accuracy),
        seconds: results.iter().map(|r| r.seconds).sum::<f64>() / results.len() as f64,
    })
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct MeanResult<T: Real = f64> {
    pub splits: usize,
    pub df: T,
    pub loglik: T,
    pub aic: T,
    pub bic: T,
    pub accuracy: T,
    pub seconds: f64,
}
