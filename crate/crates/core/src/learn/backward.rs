use super::{
    add, check_gain, merge_slots, observed_slots, require_counts, scope_strata, score_model, Scorer, SearchConfig,
};
use crate::error::Result;
use crate::model::StagedTree;
use crate::num::Real;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

/// Gain of joining slots `a` and `b`, or `None` if the merged stage cannot be fitted.
fn join_gain<T: Real>(st: &StagedTree<T>, d: usize, scorer: &Scorer<T>, a: usize, b: usize) -> Option<T> {
    let s = &st.strata[d];
    let (sa, sb) = (&s.stages[a], &s.stages[b]);
    scorer
        .term(&add(&sa.counts, &sb.counts))
        .map(|t| t - scorer.stage_term(sa) - scorer.stage_term(sb))
}

fn tolerance<T: Real>(st: &StagedTree<T>, d: usize, scorer: &Scorer<T>) -> T {
    T::score_tolerance(st.strata[d].stages.iter().map(|s| scorer.stage_term(s)).sum())
}

fn apply<T: Real>(st: &mut StagedTree<T>, cfg: &SearchConfig<T>, d: usize, keep: usize, drop: usize, gain: T) -> Result<()> {
    let before = if cfg!(debug_assertions) { score_model(st, cfg.score)? } else { T::zero() };
    merge_slots(st, d, keep, drop)?;
    check_gain(st, cfg.score, before, gain);
    Ok(())
}

/// Backward hill climbing: repeatedly applies the best improving join of two stages.
pub fn stages_bhc<T: Real>(st: &StagedTree<T>, cfg: &SearchConfig<T>) -> Result<StagedTree<T>> {
    require_counts(st)?;
    let mut out = st.clone();
    for d in scope_strata(st, &cfg.scope)? {
        let scorer = Scorer::new(&out, cfg.score, out.strata[d].k);
        loop {
            let obs = observed_slots(&out, d);
            let tol = tolerance(&out, d, &scorer);
            let mut best = None;
            let mut best_gain = T::zero();
            for i in 1..obs.len() {
                for j in 0..i {
                    if let Some(g) = join_gain(&out, d, &scorer, obs[i], obs[j]) {
                        if g > best_gain + tol {
                            best_gain = g;
                            best = Some((obs[i], obs[j]));
                        }
                    }
                }
            }
            let Some((keep, drop)) = best else { break };
            apply(&mut out, cfg, d, keep, drop, best_gain)?;
        }
    }
    Ok(out)
}

/// Fast backward hill climbing: applies the first improving join found, then rescans.
pub fn stages_fbhc<T: Real>(st: &StagedTree<T>, cfg: &SearchConfig<T>) -> Result<StagedTree<T>> {
    require_counts(st)?;
    let mut out = st.clone();
    for d in scope_strata(st, &cfg.scope)? {
        let scorer = Scorer::new(&out, cfg.score, out.strata[d].k);
        'scan: loop {
            let obs = observed_slots(&out, d);
            let tol = tolerance(&out, d, &scorer);
            for i in 1..obs.len() {
                for j in 0..i {
                    if let Some(g) = join_gain(&out, d, &scorer, obs[i], obs[j]) {
                        if g > tol {
                            apply(&mut out, cfg, d, obs[i], obs[j], g)?;
                            continue 'scan;
                        }
                    }
                }
            }
            break;
        }
    }
    Ok(out)
}

/// Random backward search: `max_iter` times, picks a scoped stratum and two of
/// its observed stages uniformly at random and joins them if that improves the score.
///
/// The generator is ChaCha8 seeded with `cfg.seed`.
pub fn stages_bhcr<T: Real>(st: &StagedTree<T>, cfg: &SearchConfig<T>) -> Result<StagedTree<T>> {
    require_counts(st)?;
    let mut out = st.clone();
    let strata = scope_strata(st, &cfg.scope)?;
    if strata.is_empty() {
        return Ok(out);
    }
    let mut rng = ChaCha8Rng::seed_from_u64(cfg.seed);
    for _ in 0..cfg.max_iter {
        let d = strata[rng.random_range(0..strata.len())];
        let obs = observed_slots(&out, d);
        if obs.len() < 2 {
            continue;
        }
        let i = rng.random_range(0..obs.len());
        let mut j = rng.random_range(0..obs.len() - 1);
        if j >= i {
            j += 1;
        }
        let scorer = Scorer::new(&out, cfg.score, out.strata[d].k);
        let tol = tolerance(&out, d, &scorer);
        if let Some(g) = join_gain(&out, d, &scorer, obs[i], obs[j]) {
            if g > tol {
                apply(&mut out, cfg, d, obs[i], obs[j], g)?;
            }
        }
    }
    Ok(out)
}
