use super::{add, check_gain, move_vertex, require_counts, scope_strata, score_model, sub, Scorer, SearchConfig};
use crate::error::Result;
use crate::model::StagedTree;
use crate::num::Real;

/// Hill climbing over single-vertex moves.
///
/// Each pass evaluates moving every observed vertex to every other observed
/// stage or to a new stage of its own, and applies the best move if it
/// improves the score. A stratum is finished when no move improves it.
pub fn stages_hc<T: Real>(st: &StagedTree<T>, cfg: &SearchConfig<T>) -> Result<StagedTree<T>> {
    require_counts(st)?;
    let mut out = st.clone();
    for d in scope_strata(st, &cfg.scope)? {
        let scorer = Scorer::new(&out, cfg.score, out.strata[d].k);
        while let Some((v, target, gain)) = best_move(&out, d, &scorer) {
            let before = if cfg!(debug_assertions) { score_model(&out, cfg.score)? } else { T::zero() };
            move_vertex(&mut out, d, v, target)?;
            check_gain(&out, cfg.score, before, gain);
        }
    }
    Ok(out)
}

fn best_move<T: Real>(st: &StagedTree<T>, d: usize, scorer: &Scorer<T>) -> Option<(usize, Option<usize>, T)> {
    let s = &st.strata[d];
    let terms: Vec<T> = s.stages.iter().map(|g| scorer.stage_term(g)).collect();
    let mut sizes = vec![0usize; s.stages.len()];
    for &a in &s.assignment {
        sizes[a] += 1;
    }
    let total: T = terms.iter().copied().sum();
    let tol = T::score_tolerance(total);
    let mut best: Option<(usize, Option<usize>, T)> = None;
    let mut best_gain = T::zero();
    for v in 0..s.n_vertices() {
        let a = s.assignment[v];
        if s.stages[a].unobserved {
            continue;
        }
        let c = s.vertex_counts(v).expect("counts attached");
        let alone = sizes[a] == 1;
        let rest = if alone {
            Some(T::zero())
        } else {
            scorer.term(&sub(&s.stages[a].counts, c))
        };
        let Some(rest) = rest else { continue };
        let base = rest - terms[a];
        let mut consider = |target: Option<usize>, t: Option<T>| {
            if let Some(t) = t {
                let gain = base + t;
                if gain > best_gain + tol {
                    best_gain = gain;
                    best = Some((v, target, gain));
                }
            }
        };
        for (b, stage) in s.stages.iter().enumerate() {
            if b == a || stage.unobserved {
                continue;
            }
            consider(Some(b), scorer.term(&add(&stage.counts, c)).map(|t| t - terms[b]));
        }
        if !alone {
            consider(None, scorer.term(c));
        }
    }
    best
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Dataset;
    use crate::estimate::{indep, InitOptions};
    use crate::learn::ScoreKind;
    use crate::tree::{EventTree, Variable};

    #[test]
    fn splits_a_heterogeneous_stratum() {
        let t = EventTree::new(vec![Variable::new("A", ["0", "1"]), Variable::new("B", ["0", "1"])]).unwrap();
        let ds = Dataset::new(t, vec![90.0, 10.0, 10.0, 90.0]).unwrap();
        let st = indep(&ds, &InitOptions::default()).unwrap();
        let cfg = SearchConfig::default();
        let out = stages_hc(&st, &cfg).unwrap();
        assert_eq!(out.stratum(1).n_stages(), 2);
        assert!(score_model(&out, ScoreKind::NegBic).unwrap() > score_model(&st, ScoreKind::NegBic).unwrap());
        // a local optimum is a fixed point
        assert_eq!(stages_hc(&out, &cfg).unwrap(), out);
    }

    #[test]
    fn homogeneous_data_stays_joined() {
        let t = EventTree::new(vec![Variable::new("A", ["0", "1"]), Variable::new("B", ["0", "1"])]).unwrap();
        let ds = Dataset::new(t, vec![50.0, 50.0, 50.0, 50.0]).unwrap();
        let st = indep(&ds, &InitOptions::default()).unwrap();
        assert_eq!(stages_hc(&st, &SearchConfig::default()).unwrap(), st);
    }
}
