//! JSON model documents (`.sevt.json`).
//!
//! ```json
//! {"version": 1, "variables": [{"name": "A", "levels": ["a", "b"]}],
//!  "lambda": 0.0, "name_unobserved": "na", "fitted": true,
//!  "strata": [{"stages": [{"id": "1", "members": [0], "counts": [3.0, 4.0],
//!              "probs": [0.42857142857142855, 0.5714285714285714]}],
//!              "vertex_counts": [3.0, 4.0]}]}
//! ```
//!
//! Numbers are written in shortest round-trip form, so probabilities and
//! counts reload bit-for-bit. `vertex_counts` (per-vertex floret counts,
//! flattened by vertex) is optional; without it a model can be queried but not
//! re-learned.

use crate::error::{Error, Result};
use crate::model::StagedTree;
use crate::num::Real;
use crate::tree::{EventTree, Variable};
use serde::{Deserialize, Serialize};

pub const FORMAT_VERSION: u32 = 1;

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StageDoc {
    id: String,
    members: Vec<usize>,
    counts: Vec<f64>,
    probs: Option<Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct StratumDoc {
    stages: Vec<StageDoc>,
    #[serde(default, skip_serializing_if = "Option::is_none")]
    vertex_counts: Option<Vec<f64>>,
}

#[derive(Debug, Serialize, Deserialize)]
#[serde(deny_unknown_fields)]
struct ModelDoc {
    version: u32,
    variables: Vec<Variable>,
    lambda: f64,
    #[serde(default = "default_unobserved")]
    name_unobserved: String,
    fitted: bool,
    strata: Vec<StratumDoc>,
}

fn default_unobserved() -> String {
    crate::model::DEFAULT_UNOBSERVED.to_string()
}

fn to_doc<T: Real>(st: &StagedTree<T>) -> ModelDoc {
    let f = |v: &[T]| v.iter().map(|x| x.as_f64()).collect::<Vec<f64>>();
    ModelDoc {
        version: FORMAT_VERSION,
        variables: st.tree().variables().to_vec(),
        lambda: st.lambda().as_f64(),
        name_unobserved: st.name_unobserved().to_string(),
        fitted: st.is_fitted(),
        strata: st
            .strata()
            .iter()
            .map(|s| StratumDoc {
                stages: s
                    .stages()
                    .iter()
                    .enumerate()
                    .map(|(slot, g)| StageDoc {
                        id: g.id.clone(),
                        members: s.members(slot),
                        counts: f(&g.counts),
                        probs: g.probs.as_deref().map(f),
                    })
                    .collect(),
                vertex_counts: s.ctables.as_deref().map(f),
            })
            .collect(),
    }
}

pub fn save_model<T: Real>(st: &StagedTree<T>) -> Result<String> {
    Ok(serde_json::to_string_pretty(&to_doc(st))?)
}

pub fn write_model<T: Real, W: std::io::Write>(st: &StagedTree<T>, w: W) -> Result<()> {
    serde_json::to_writer_pretty(w, &to_doc(st))?;
    Ok(())
}

fn scalar<T: Real>(x: f64) -> Result<T> {
    if !x.is_finite() {
        return Err(Error::Schema(format!("non-finite number {}", x)));
    }
    T::from_f64(x).ok_or_else(|| Error::Schema(format!("number {} not representable", x)))
}

fn scalars<T: Real>(v: &[f64]) -> Result<Vec<T>> {
    v.iter().map(|&x| scalar(x)).collect()
}

pub fn load_model<T: Real>(text: &str) -> Result<StagedTree<T>> {
    let doc: ModelDoc = serde_json::from_str(text).map_err(|e| Error::Schema(e.to_string()))?;
    from_doc(doc)
}

pub fn read_model<T: Real, R: std::io::Read>(r: R) -> Result<StagedTree<T>> {
    let doc: ModelDoc = serde_json::from_reader(r).map_err(|e| Error::Schema(e.to_string()))?;
    from_doc(doc)
}

fn from_doc<T: Real>(doc: ModelDoc) -> Result<StagedTree<T>> {
    if doc.version != FORMAT_VERSION {
        return Err(Error::Schema(format!(
            "unsupported version {} (expected {})",
            doc.version, FORMAT_VERSION
        )));
    }
    let tree = EventTree::new(doc.variables)?;
    if doc.strata.len() != tree.len() {
        return Err(Error::Schema(format!(
            "{} strata for {} variables",
            doc.strata.len(),
            tree.len()
        )));
    }
    let mut labels = Vec::with_capacity(tree.len());
    for (d, s) in doc.strata.iter().enumerate() {
        let size = tree.stratum_size(d);
        let mut lab: Vec<Option<String>> = vec![None; size];
        for g in &s.stages {
            for &v in &g.members {
                if v >= size {
                    return Err(Error::Schema(format!(
                        "stage `{}` lists vertex {} outside stratum {} (size {})",
                        g.id, v, d, size
                    )));
                }
                if lab[v].replace(g.id.clone()).is_some() {
                    return Err(Error::Schema(format!("vertex {} of stratum {} is in two stages", v, d)));
                }
            }
        }
        let lab = lab
            .into_iter()
            .enumerate()
            .map(|(v, l)| l.ok_or_else(|| Error::Schema(format!("vertex {} of stratum {} has no stage", v, d))))
            .collect::<Result<Vec<_>>>()?;
        labels.push(lab);
    }
    let mut st = StagedTree::from_labels(tree, labels, &doc.name_unobserved)?;
    for (d, s) in doc.strata.iter().enumerate() {
        let k = st.strata[d].k;
        if let Some(vc) = &s.vertex_counts {
            if vc.len() != st.strata[d].n_vertices() * k {
                return Err(Error::Schema(format!("stratum {} vertex_counts has the wrong length", d)));
            }
            st.strata[d].ctables = Some(scalars(vc)?);
        }
        for g in &s.stages {
            let slot = st.strata[d].slot_of_id(&g.id).expect("stage built from labels");
            if g.counts.len() != k {
                return Err(Error::Schema(format!("stage `{}` counts have the wrong length", g.id)));
            }
            let stage = &mut st.strata[d].stages[slot];
            stage.counts = scalars(&g.counts)?;
            stage.probs = g.probs.as_deref().map(scalars).transpose()?;
        }
    }
    st.lambda = scalar(doc.lambda)?;
    if st.lambda < T::zero() {
        return Err(Error::Schema("lambda must be non-negative".into()));
    }
    st.fitted = doc.fitted;
    st.validate()?;
    Ok(st)
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::datasets::titanic;
    use crate::estimate::{full, InitOptions};

    #[test]
    fn round_trip() {
        let st = full(&titanic::<f64>(), &InitOptions::default()).unwrap();
        let text = save_model(&st).unwrap();
        assert_eq!(load_model::<f64>(&text).unwrap(), st);
        let st32 = full(&titanic::<f32>(), &InitOptions::default()).unwrap();
        assert_eq!(load_model::<f32>(&save_model(&st32).unwrap()).unwrap(), st32);
    }

    #[test]
    fn rejects_bad_documents() {
        let st = full(&titanic::<f64>(), &InitOptions::default()).unwrap();
        let good: serde_json::Value = serde_json::from_str(&save_model(&st).unwrap()).unwrap();

        let mut v = good.clone();
        v["version"] = 2.into();
        assert!(matches!(load_model::<f64>(&v.to_string()), Err(Error::Schema(_))));

        // a stage of stratum 1 claiming a vertex index only valid further down
        let mut v = good.clone();
        v["strata"][1]["stages"][0]["members"] = serde_json::json!([0, 7]);
        assert!(load_model::<f64>(&v.to_string()).is_err());

        let mut v = good.clone();
        v["strata"][2]["stages"][0]["probs"] = serde_json::Value::Null;
        assert!(load_model::<f64>(&v.to_string()).is_err());
        v["fitted"] = false.into();
        assert!(load_model::<f64>(&v.to_string()).is_ok());

        let mut v = good.clone();
        v["strata"][1]["stages"][0]["probs"] = serde_json::json!([0.9, 0.3]);
        assert!(load_model::<f64>(&v.to_string()).is_err());

        let mut v = good;
        v["strata"][3]["stages"][1]["id"] = "1".into();
        assert!(load_model::<f64>(&v.to_string()).is_err());

        assert!(load_model::<f64>("{").is_err());
    }
}
