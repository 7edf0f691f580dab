use super::{merge_slots, observed_slots, require_counts, scope_strata, SearchConfig};
use crate::error::{Error, Result};
use crate::model::StagedTree;
use crate::num::Real;
use rand::seq::index::sample;
use rand::SeedableRng;
use rand_chacha::ChaCha8Rng;
use std::fmt;
use std::str::FromStr;

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum Linkage {
    #[default]
    Complete,
    Single,
    Average,
}

impl FromStr for Linkage {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "complete" => Ok(Linkage::Complete),
            "single" => Ok(Linkage::Single),
            "average" => Ok(Linkage::Average),
            _ => Err(Error::InvalidArgument(format!("unknown linkage `{}`", s))),
        }
    }
}

impl fmt::Display for Linkage {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        f.write_str(match self {
            Linkage::Complete => "complete",
            Linkage::Single => "single",
            Linkage::Average => "average",
        })
    }
}

/// Replaces the observed stages of each scoped stratum by `cfg.k` clusters
/// of their probability vectors; `cluster` maps vectors to cluster ids.
fn regroup<T: Real>(
    st: &StagedTree<T>,
    cfg: &SearchConfig<T>,
    mut cluster: impl FnMut(&[Vec<T>]) -> Vec<usize>,
) -> Result<StagedTree<T>> {
    require_counts(st)?;
    if cfg.k == 0 {
        return Err(Error::InvalidArgument("k must be positive".into()));
    }
    let mut out = st.clone();
    for d in scope_strata(st, &cfg.scope)? {
        let obs = observed_slots(&out, d);
        if cfg.k > obs.len() {
            return Err(Error::InvalidArgument(format!(
                "k = {} exceeds the {} observed stages of `{}`",
                cfg.k,
                obs.len(),
                st.tree.variable(d).name
            )));
        }
        let points: Vec<Vec<T>> = obs
            .iter()
            .map(|&s| out.strata[d].stages[s].probs.clone().ok_or(Error::NotFitted))
            .collect::<Result<_>>()?;
        let labels = cluster(&points);
        let ids: Vec<String> = obs.iter().map(|&s| out.strata[d].stages[s].id.clone()).collect();
        for i in 0..ids.len() {
            let Some(first) = (0..i).find(|&j| labels[j] == labels[i]) else { continue };
            let s = &out.strata[d];
            let keep = s.slot_of_id(&ids[first]).expect("stage present");
            let drop = s.slot_of_id(&ids[i]).expect("stage present");
            merge_slots(&mut out, d, keep, drop)?;
        }
    }
    Ok(out)
}

/// Agglomerative clustering of the stage probabilities under `cfg.distance`
/// and `cfg.linkage`, cut at `cfg.k` clusters per stratum.
pub fn stages_hclust<T: Real>(st: &StagedTree<T>, cfg: &SearchConfig<T>) -> Result<StagedTree<T>> {
    regroup(st, cfg, |points| hclust(points, cfg))
}

fn hclust<T: Real>(points: &[Vec<T>], cfg: &SearchConfig<T>) -> Vec<usize> {
    let n = points.len();
    let mut dist = vec![vec![T::zero(); n]; n];
    for i in 0..n {
        for j in (i + 1)..n {
            let x = cfg.distance.eval(&points[i], &points[j]);
            let x = if x.is_nan() { T::infinity() } else { x };
            dist[i][j] = x;
            dist[j][i] = x;
        }
    }
    let linked = |a: &[usize], b: &[usize]| -> T {
        let pairs = a.iter().flat_map(|&i| b.iter().map(move |&j| (i, j)));
        match cfg.linkage {
            Linkage::Single => pairs.map(|(i, j)| dist[i][j]).fold(T::infinity(), T::min),
            Linkage::Complete => pairs.map(|(i, j)| dist[i][j]).fold(T::neg_infinity(), T::max),
            Linkage::Average => {
                pairs.map(|(i, j)| dist[i][j]).sum::<T>() / T::from_count(a.len() * b.len())
            }
        }
    };
    let mut clusters: Vec<Vec<usize>> = (0..n).map(|i| vec![i]).collect();
    while clusters.len() > cfg.k {
        let mut best: Option<(usize, usize, T)> = None;
        for a in 0..clusters.len() {
            for b in (a + 1)..clusters.len() {
                let x = linked(&clusters[a], &clusters[b]);
                if best.is_none_or(|(_, _, y)| x < y) {
                    best = Some((a, b, x));
                }
            }
        }
        let (a, b, _) = best.expect("at least two clusters");
        let moved = clusters.remove(b);
        clusters[a].extend(moved);
    }
    let mut labels = vec![0; n];
    for (c, members) in clusters.iter().enumerate() {
        for &i in members {
            labels[i] = c;
        }
    }
    labels
}

/// Lloyd's k-means on the stage probability vectors (Euclidean), keeping the
/// best of `cfg.n_restarts` seeded initializations.
pub fn stages_kmeans<T: Real>(st: &StagedTree<T>, cfg: &SearchConfig<T>) -> Result<StagedTree<T>> {
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    regroup(st, cfg, |points| kmeans(points, cfg.k, cfg.n_restarts.max(1), &mut rng))
}

fn sq_dist<T: Real>(a: &[T], b: &[T]) -> T {
    a.iter().zip(b).map(|(&x, &y)| (x - y) * (x - y)).sum()
}

const LLOYD_MAX_ITER: usize = 100;

fn kmeans<T: Real>(points: &[Vec<T>], k: usize, restarts: usize, rng: &mut ChaCha8Rng) -> Vec<usize> {
    let n = points.len();
    let dim = points[0].len();
    let mut best: Option<(Vec<usize>, T)> = None;
    for _ in 0..restarts {
        let mut centers: Vec<Vec<T>> = sample(rng, n, k).iter().map(|i| points[i].clone()).collect();
        let mut labels = vec![usize::MAX; n];
        for _ in 0..LLOYD_MAX_ITER {
            let mut changed = false;
            for (i, p) in points.iter().enumerate() {
                let mut c_best = 0;
                let mut d_best = sq_dist(p, &centers[0]);
                for (c, center) in centers.iter().enumerate().skip(1) {
                    let x = sq_dist(p, center);
                    if x < d_best {
                        d_best = x;
                        c_best = c;
                    }
                }
                if labels[i] != c_best {
                    labels[i] = c_best;
                    changed = true;
                }
            }
            if !changed {
                break;
            }
            for (c, center) in centers.iter_mut().enumerate() {
                let members: Vec<&Vec<T>> = points.iter().zip(&labels).filter(|(_, &l)| l == c).map(|(p, _)| p).collect();
                if members.is_empty() {
                    continue;
                }
                let m = T::from_count(members.len());
                *center = (0..dim).map(|j| members.iter().map(|p| p[j]).sum::<T>() / m).collect();
            }
        }
        let wss: T = points.iter().zip(&labels).map(|(p, &l)| sq_dist(p, &centers[l])).sum();
        if best.as_ref().is_none_or(|(_, w)| wss < *w) {
            best = Some((labels, wss));
        }
    }
    best.expect("at least one restart").0
}
