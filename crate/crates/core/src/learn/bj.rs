use super::{merge_slots, observed_slots, require_counts, scope_strata, SearchConfig};
use crate::error::Result;
use crate::model::StagedTree;
use crate::num::Real;

/// Backward joining: while the closest pair of observed stages in a stratum is
/// at distance below `cfg.thr`, joins that pair and refits.
///
/// Equal distances resolve to the pair met first in slot order. Infinite and
/// NaN distances never qualify.
pub fn stages_bj<T: Real>(st: &StagedTree<T>, cfg: &SearchConfig<T>) -> Result<StagedTree<T>> {
    require_counts(st)?;
    let mut out = st.clone();
    for d in scope_strata(st, &cfg.scope)? {
        loop {
            let obs = observed_slots(&out, d);
            let stages = &out.strata[d].stages;
            let mut best: Option<(usize, usize, T)> = None;
            for i in 0..obs.len() {
                for j in (i + 1)..obs.len() {
                    let (Some(p), Some(q)) = (&stages[obs[i]].probs, &stages[obs[j]].probs) else {
                        continue;
                    };
                    let dist = cfg.distance.eval(p, q);
                    if dist.is_finite() && best.is_none_or(|(_, _, b)| dist < b) {
                        best = Some((obs[i], obs[j], dist));
                    }
                }
            }
            match best {
                Some((keep, drop, dist)) if dist < cfg.thr => merge_slots(&mut out, d, keep, drop)?,
                _ => break,
            }
        }
    }
    Ok(out)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Dataset;
    use crate::estimate::{full, InitOptions};
    use crate::tree::{EventTree, Variable};

    fn st() -> StagedTree {
        let t = EventTree::new(vec![Variable::new("A", ["0", "1", "2"]), Variable::new("B", ["0", "1"])]).unwrap();
        full(&Dataset::new(t, vec![5.0, 5.0, 10.0, 10.0, 9.0, 1.0]).unwrap(), &InitOptions::default()).unwrap()
    }

    #[test]
    fn zero_threshold_is_identity() {
        let cfg = SearchConfig {
            thr: 0.0,
            ..Default::default()
        };
        assert_eq!(stages_bj(&st(), &cfg).unwrap(), st());
    }

    #[test]
    fn identical_florets_are_joined() {
        let cfg = SearchConfig {
            thr: 1e-9,
            ..Default::default()
        };
        let out = stages_bj(&st(), &cfg).unwrap();
        assert_eq!(out.stratum(1).assignment(), &[0, 0, 1]);
    }
}
