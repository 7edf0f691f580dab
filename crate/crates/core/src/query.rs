//! Queries on fitted staged trees: event probabilities, stages and paths,
//! sampling, subtrees, stage comparison and summaries.

use crate::data::Records;
use crate::error::{Error, Result};
use crate::model::{StagedTree, Stratum};
use crate::num::Real;
use crate::tree::VertexId;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;
use std::collections::{BTreeMap, HashMap};
use std::fmt;

/// Levels fixed for a subset of the variables, by name.
pub type PartialAssignment = BTreeMap<String, String>;

/// Parses `Var=Level,Var=Level`.
pub fn parse_assignment(s: &str) -> Result<PartialAssignment> {
    let mut out = PartialAssignment::new();
    for part in s.split(',').map(str::trim).filter(|p| !p.is_empty()) {
        let (k, v) = part
            .split_once('=')
            .ok_or_else(|| Error::InvalidArgument(format!("expected Var=Level, got `{}`", part)))?;
        if out.insert(k.trim().to_string(), v.trim().to_string()).is_some() {
            return Err(Error::InvalidArgument(format!("variable `{}` given twice", k.trim())));
        }
    }
    Ok(out)
}

fn constraints<T: Real>(st: &StagedTree<T>, x: &PartialAssignment) -> Result<Vec<Option<usize>>> {
    let tree = st.tree();
    let mut out = vec![None; tree.len()];
    for (name, level) in x {
        let d = tree.variable_index(name)?;
        out[d] = Some(tree.variable(d).level_index(level)?);
    }
    Ok(out)
}

fn require_fitted<T: Real>(st: &StagedTree<T>) -> Result<()> {
    if st.is_fitted() {
        Ok(())
    } else {
        Err(Error::NotFitted)
    }
}

/// Probability mass reaching each leaf compatible with `fixed`, by forward
/// propagation down the strata. Mass entering an unobserved vertex is dropped.
fn propagate<T: Real>(st: &StagedTree<T>, fixed: &[Option<usize>]) -> Vec<T> {
    let mut mass = vec![T::one()];
    for (d, s) in st.strata().iter().enumerate() {
        let k = s.cardinality();
        let mut next = vec![T::zero(); mass.len() * k];
        for (v, &m) in mass.iter().enumerate() {
            if m == T::zero() {
                continue;
            }
            let Some(p) = s.stage_of(v).probs.as_deref() else { continue };
            for j in 0..k {
                if fixed[d].is_none_or(|f| f == j) {
                    next[v * k + j] = m * p[j];
                }
            }
        }
        mass = next;
    }
    mass
}

/// Probability of the event `x`; with `log` the natural logarithm (`-inf` for 0).
///
/// Paths through unobserved vertices carry no probability.
pub fn prob<T: Real>(st: &StagedTree<T>, x: &PartialAssignment, log: bool) -> Result<T> {
    require_fitted(st)?;
    let fixed = constraints(st, x)?;
    let p: T = propagate(st, &fixed).into_iter().sum();
    Ok(if log { p.ln() } else { p })
}

/// Probability of every full assignment, in leaf (mixed-radix) order.
pub fn atomic_probs<T: Real>(st: &StagedTree<T>) -> Result<Vec<T>> {
    require_fitted(st)?;
    Ok(propagate(st, &vec![None; st.tree().len()]))
}

/// Probability of one full assignment given by level indices.
pub fn path_prob<T: Real>(st: &StagedTree<T>, x: &[usize]) -> Result<T> {
    require_fitted(st)?;
    st.tree().leaf_index(x)?;
    let mut p = T::one();
    let mut v = 0;
    for (s, &j) in st.strata().iter().zip(x) {
        match s.stage_of(v).probs.as_deref() {
            Some(f) => p = p * f[j],
            None => return Ok(T::zero()),
        }
        v = v * s.cardinality() + j;
    }
    Ok(p)
}

/// Draws `n` independent root-to-leaf walks.
///
/// The generator is ChaCha8 seeded with `seed`; each call starts a fresh
/// stream, so equal seeds give equal samples. Edges into unobserved vertices
/// are never taken: the remaining edges of the floret are renormalized.
pub fn sample_from<T: Real>(st: &StagedTree<T>, n: usize, seed: u64) -> Result<Records> {
    require_fitted(st)?;
    let tree = st.tree();
    let depth = tree.len();
    let mut rng = ChaCha8Rng::seed_from_u64(seed);
    let mut rows = Vec::with_capacity(n);
    for _ in 0..n {
        let mut row = Vec::with_capacity(depth);
        let mut v = 0;
        for d in 0..depth {
            let s = st.stratum(d);
            let k = s.cardinality();
            let p = s.stage_of(v).probs.as_deref().ok_or_else(|| {
                Error::Numeric(format!("sampling reached an unobserved vertex in stratum {}", d))
            })?;
            let open = |j: usize| d + 1 == depth || !st.stratum(d + 1).stage_of(v * k + j).unobserved;
            let total: T = (0..k).filter(|&j| open(j)).map(|j| p[j]).sum();
            if !(total > T::zero()) {
                return Err(Error::Numeric(format!("floret in stratum {} has no reachable edge", d)));
            }
            let u = T::lit(rng.random::<f64>()) * total;
            let mut acc = T::zero();
            let mut pick = None;
            for j in (0..k).filter(|&j| open(j) && p[j] > T::zero()) {
                acc = acc + p[j];
                pick = Some(j);
                if u < acc {
                    break;
                }
            }
            let j = pick.expect("positive total");
            row.push(j);
            v = v * k + j;
        }
        rows.push(row);
    }
    Ok(Records {
        tree: tree.clone(),
        rows,
    })
}

/// Stage of the vertex reached by `path`, which governs the next variable.
pub fn get_stage<T: Real, S: AsRef<str>>(st: &StagedTree<T>, path: &[S]) -> Result<String> {
    if path.len() >= st.tree().len() {
        return Err(Error::InvalidPath("a leaf has no stage".into()));
    }
    let v = st.tree().encode_path(path)?;
    Ok(st.stage_id(v).to_string())
}

/// Paths to every vertex of `stage` among the vertices whose floret is over `var`,
/// in mixed-radix order.
pub fn get_path<T: Real>(st: &StagedTree<T>, var: &str, stage: &str) -> Result<Vec<Vec<String>>> {
    let d = st.tree().variable_index(var)?;
    if d == 0 {
        return Err(Error::InvalidArgument(format!("`{}` is the first variable; its only stage is the root", var)));
    }
    let s = st.stratum(d);
    let slot = s.slot_of_id(stage).ok_or_else(|| Error::UnknownStage {
        stratum: d,
        stage: stage.to_string(),
    })?;
    s.members(slot)
        .into_iter()
        .map(|v| st.tree().decode_vertex(VertexId::new(d, v)))
        .collect()
}

/// The staged tree rooted at the vertex reached by `path`.
///
/// Stage labels and probabilities are those of the original model; counts are
/// restricted to the subtree.
pub fn subtree<T: Real, S: AsRef<str>>(st: &StagedTree<T>, path: &[S]) -> Result<StagedTree<T>> {
    let tree = st.tree();
    if path.len() >= tree.len() {
        return Err(Error::InvalidPath("a subtree needs at least one variable below the prefix".into()));
    }
    let root = tree.encode_path(path)?;
    if path.is_empty() {
        return Ok(st.clone());
    }
    if st.is_unobserved(root) {
        return Err(Error::InvalidPath("the prefix leads to an unobserved vertex".into()));
    }
    let m = root.stratum;
    let sub_tree = tree.suffix(m)?;
    let mut ranges = Vec::new();
    let mut labels = Vec::new();
    for e in 0..sub_tree.len() {
        let width = sub_tree.stratum_size(e);
        let lo = root.index * width;
        let s = st.stratum(m + e);
        labels.push((lo..lo + width).map(|v| s.stage_of(v).id.clone()).collect());
        ranges.push(lo..lo + width);
    }
    let mut out = StagedTree::from_labels(sub_tree, labels, st.name_unobserved())?;
    for (e, range) in ranges.into_iter().enumerate() {
        let src = st.stratum(m + e);
        let dst = &mut out.strata[e];
        let k = dst.k;
        dst.ctables = src.ctables.as_ref().map(|c| c[range.start * k..range.end * k].to_vec());
        for stage in &mut dst.stages {
            let slot = src.slot_of_id(&stage.id).expect("stage of the original model");
            stage.probs = src.stages[slot].probs.clone();
        }
        dst.recount();
    }
    out.lambda = st.lambda();
    out.fitted = st.is_fitted();
    out.validate()?;
    Ok(out)
}

#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum CompareMethod {
    /// Equality of the stage partitions, labels ignored.
    #[default]
    Stages,
    /// Equality of the multisets of stage sizes.
    Naive,
    /// Equality of labels after standard renaming of both models.
    Hamming,
}

impl std::str::FromStr for CompareMethod {
    type Err = Error;

    fn from_str(s: &str) -> Result<Self> {
        match s {
            "stages" => Ok(CompareMethod::Stages),
            "naive" => Ok(CompareMethod::Naive),
            "hamming" => Ok(CompareMethod::Hamming),
            _ => Err(Error::InvalidArgument(format!("unknown comparison method `{}`", s))),
        }
    }
}

/// Vertices, per stratum, whose stage assignment differs between two models.
#[derive(Debug, Clone, PartialEq, Eq, Default)]
pub struct StageDiff {
    pub vertices: Vec<Vec<usize>>,
}

impl StageDiff {
    pub fn is_empty(&self) -> bool {
        self.vertices.iter().all(Vec::is_empty)
    }

    /// Differing vertices as level-label paths, per stratum.
    pub fn paths(&self, tree: &crate::tree::EventTree) -> Vec<Vec<Vec<String>>> {
        self.vertices
            .iter()
            .enumerate()
            .map(|(d, vs)| {
                vs.iter()
                    .map(|&v| tree.decode_vertex(VertexId::new(d, v)).expect("vertex in range"))
                    .collect()
            })
            .collect()
    }
}

/// Vertices whose block in `a` differs from their block in `b`.
fn partition_diff<T: Real>(a: &Stratum<T>, b: &Stratum<T>) -> Vec<usize> {
    let (x, y) = (a.assignment(), b.assignment());
    let mut na = HashMap::new();
    let mut nb = HashMap::new();
    let mut nab = HashMap::new();
    for v in 0..x.len() {
        *na.entry(x[v]).or_insert(0usize) += 1;
        *nb.entry(y[v]).or_insert(0usize) += 1;
        *nab.entry((x[v], y[v])).or_insert(0usize) += 1;
    }
    (0..x.len())
        .filter(|&v| {
            let both = nab[&(x[v], y[v])];
            na[&x[v]] != both || nb[&y[v]] != both
        })
        .collect()
}

fn block_sizes<T: Real>(s: &Stratum<T>) -> Vec<usize> {
    let mut sizes = vec![0; s.n_stages()];
    for &a in s.assignment() {
        sizes[a] += 1;
    }
    sizes.sort_unstable();
    sizes
}

/// Compares the stagings of two models over the same event tree.
pub fn compare_stages<T: Real>(a: &StagedTree<T>, b: &StagedTree<T>, method: CompareMethod) -> Result<(bool, StageDiff)> {
    if a.tree() != b.tree() {
        return Err(Error::Incompatible("models have different variables, orders or levels".into()));
    }
    let mut diff = StageDiff::default();
    match method {
        CompareMethod::Stages | CompareMethod::Naive => {
            for (sa, sb) in a.strata().iter().zip(b.strata()) {
                let mut vs = partition_diff(sa, sb);
                if method == CompareMethod::Naive && block_sizes(sa) == block_sizes(sb) {
                    vs.clear();
                }
                diff.vertices.push(vs);
            }
        }
        CompareMethod::Hamming => {
            let (ra, rb) = (a.standard_naming(), b.standard_naming());
            for (sa, sb) in ra.strata().iter().zip(rb.strata()) {
                diff.vertices.push(
                    (0..sa.n_vertices())
                        .filter(|&v| sa.stage_of(v).id != sb.stage_of(v).id)
                        .collect(),
                );
            }
        }
    }
    Ok((diff.is_empty(), diff))
}

/// Renames observed stages `"1"`, `"2"`, ... per stratum in order of first member.
pub fn stndnaming<T: Real>(st: &StagedTree<T>) -> StagedTree<T> {
    st.standard_naming()
}

#[derive(Debug, Clone, PartialEq)]
pub struct StageSummary<T: Real = f64> {
    pub id: String,
    /// Member vertices; the root's empty path is not counted.
    pub npaths: usize,
    pub sample_size: T,
    pub probs: Option<Vec<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct StratumSummary<T: Real = f64> {
    pub variable: String,
    pub levels: Vec<String>,
    pub stages: Vec<StageSummary<T>>,
}

#[derive(Debug, Clone, PartialEq)]
pub struct Summary<T: Real = f64> {
    pub lambda: T,
    pub fitted: bool,
    pub strata: Vec<StratumSummary<T>>,
}

/// Per-stratum table of stages with their path counts, sample sizes and
/// probabilities; the unobserved stage is listed last.
pub fn summary<T: Real>(st: &StagedTree<T>) -> Summary<T> {
    let strata = st
        .strata()
        .iter()
        .enumerate()
        .map(|(d, s)| {
            let var = st.tree().variable(d);
            let mut stages: Vec<StageSummary<T>> = s
                .stages()
                .iter()
                .enumerate()
                .map(|(slot, g)| StageSummary {
                    id: g.id.clone(),
                    npaths: if d == 0 { 0 } else { s.members(slot).len() },
                    sample_size: g.total(),
                    probs: g.probs.clone(),
                })
                .collect();
            if let Some(u) = s.unobserved_slot() {
                let g = stages.remove(u);
                stages.push(g);
            }
            StratumSummary {
                variable: var.name.clone(),
                levels: var.levels.clone(),
                stages,
            }
        })
        .collect();
    Summary {
        lambda: st.lambda(),
        fitted: st.is_fitted(),
        strata,
    }
}

impl<T: Real> fmt::Display for Summary<T> {
    fn fmt(&self, f: &mut fmt::Formatter<'_>) -> fmt::Result {
        writeln!(f, "lambda: {}", self.lambda)?;
        writeln!(f, "fitted: {}", self.fitted)?;
        for s in &self.strata {
            writeln!(f, "Variable: {}", s.variable)?;
            write!(f, "{:>8} {:>7} {:>12}", "stage", "npaths", "sample.size")?;
            for l in &s.levels {
                write!(f, " {:>10}", l)?;
            }
            writeln!(f)?;
            for g in &s.stages {
                write!(f, "{:>8} {:>7} {:>12}", g.id, g.npaths, g.sample_size)?;
                match &g.probs {
                    Some(p) => {
                        for x in p {
                            write!(f, " {:>10.7}", x)?;
                        }
                    }
                    None => {
                        for _ in &s.levels {
                            write!(f, " {:>10}", "NA")?;
                        }
                    }
                }
                writeln!(f)?;
            }
        }
        Ok(())
    }
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::data::Dataset;
    use crate::estimate::{full, indep, InitOptions};
    use crate::tree::{EventTree, Variable};

    fn ds() -> Dataset {
        let t = EventTree::new(vec![
            Variable::new("A", ["a0", "a1"]),
            Variable::new("B", ["b0", "b1", "b2"]),
            Variable::new("C", ["c0", "c1"]),
        ])
        .unwrap();
        Dataset::new(t, (1..=12).map(f64::from).collect()).unwrap()
    }

    fn assignment(pairs: &[(&str, &str)]) -> PartialAssignment {
        pairs.iter().map(|(k, v)| (k.to_string(), v.to_string())).collect()
    }

    #[test]
    fn parse_events() {
        let x = parse_assignment("A=a1, C=c0").unwrap();
        assert_eq!(x, assignment(&[("A", "a1"), ("C", "c0")]));
        assert!(parse_assignment("A").is_err());
        assert!(parse_assignment("A=a0,A=a1").is_err());
        assert!(parse_assignment("").unwrap().is_empty());
    }

    #[test]
    fn prob_matches_frequencies_under_full() {
        let st = full(&ds(), &InitOptions::default()).unwrap();
        assert!((prob(&st, &PartialAssignment::new(), false).unwrap() - 1.0).abs() < 1e-15);
        let p = prob(&st, &assignment(&[("A", "a1"), ("C", "c0")]), false).unwrap();
        assert!((p - (7.0 + 9.0 + 11.0) / 78.0).abs() < 1e-15);
        assert!(prob(&st, &assignment(&[("A", "zz")]), false).is_err());
        assert!(prob(&st, &assignment(&[("Z", "a0")]), false).is_err());
        let l = prob(&st, &assignment(&[("A", "a0")]), true).unwrap();
        assert!((l - (21.0f64 / 78.0).ln()).abs() < 1e-14);
    }

    #[test]
    fn atoms_factorize_under_indep() {
        let d = ds();
        let st = indep(&d, &InitOptions::default()).unwrap();
        let atoms = atomic_probs(&st).unwrap();
        assert!((atoms.iter().sum::<f64>() - 1.0).abs() < 1e-12);
        let pc = d.prefix_counts();
        let n = d.total();
        let ma = [pc[1][0] / n, pc[1][1] / n];
        let mb: Vec<f64> = (0..3).map(|b| (pc[2][b] + pc[2][3 + b]) / n).collect();
        let mc: Vec<f64> = (0..2).map(|c| (0..6).map(|v| d.counts()[v * 2 + c]).sum::<f64>() / n).collect();
        for a in 0..2 {
            for b in 0..3 {
                for c in 0..2 {
                    let i = (a * 3 + b) * 2 + c;
                    assert!((atoms[i] - ma[a] * mb[b] * mc[c]).abs() < 1e-14);
                    assert!((path_prob(&st, &[a, b, c]).unwrap() - atoms[i]).abs() < 1e-15);
                }
            }
        }
    }

    #[test]
    fn sampling() {
        let st = full(&ds(), &InitOptions::default()).unwrap();
        assert!(sample_from(&st, 0, 1).unwrap().is_empty());
        let a = sample_from(&st, 50, 1).unwrap();
        assert_eq!(a, sample_from(&st, 50, 1).unwrap());
        assert_ne!(a, sample_from(&st, 50, 2).unwrap());
        let t = EventTree::new(vec![Variable::new("A", ["0", "1"]), Variable::new("B", ["0", "1"])]).unwrap();
        let det = full(&Dataset::new(t, vec![0.0, 0.0, 0.0, 4.0]).unwrap(), &InitOptions::default()).unwrap();
        let s = sample_from(&det, 20, 3).unwrap();
        assert!(s.rows.iter().all(|r| r == &vec![1, 1]));
    }

    #[test]
    fn stages_and_paths() {
        let st = indep(&ds(), &InitOptions::default()).unwrap();
        assert_eq!(get_stage(&st, &["a1"]).unwrap(), "1");
        assert!(get_stage(&st, &["a1", "b0", "c0"]).is_err());
        assert!(get_stage(&st, &["a9"]).is_err());
        assert_eq!(get_path(&st, "C", "1").unwrap().len(), 6);
        assert!(get_path(&st, "C", "7").is_err());
        assert!(get_path(&st, "A", "1").is_err());
        let f = full(&ds(), &InitOptions::default()).unwrap();
        let paths = get_path(&f, "C", "4").unwrap();
        assert_eq!(paths, vec![vec!["a1".to_string(), "b0".to_string()]]);
        assert_eq!(get_stage(&f, &paths[0]).unwrap(), "4");
    }

    #[test]
    fn subtree_is_conditional() {
        let st = full(&ds(), &InitOptions::default()).unwrap();
        assert_eq!(subtree(&st, &[] as &[&str]).unwrap(), st);
        let sub = subtree(&st, &["a1"]).unwrap();
        assert_eq!(sub.tree().names().collect::<Vec<_>>(), vec!["B", "C"]);
        let pa = prob(&st, &assignment(&[("A", "a1")]), false).unwrap();
        for b in ["b0", "b1", "b2"] {
            for c in ["c0", "c1"] {
                let joint = prob(&st, &assignment(&[("A", "a1"), ("B", b), ("C", c)]), false).unwrap();
                let cond = prob(&sub, &assignment(&[("B", b), ("C", c)]), false).unwrap();
                assert!((cond - joint / pa).abs() < 1e-14);
            }
        }
        assert_eq!(sub.n_obs(), 57.0);
        assert!(subtree(&st, &["a1", "b0", "c0"]).is_err());
    }

    #[test]
    fn comparisons() {
        let d = ds();
        let f = full(&d, &InitOptions::default()).unwrap();
        let i = indep(&d, &InitOptions::default()).unwrap();
        for m in [CompareMethod::Stages, CompareMethod::Naive, CompareMethod::Hamming] {
            assert_eq!(compare_stages(&f, &f, m).unwrap(), (true, StageDiff { vertices: vec![vec![]; 3] }));
            let (eq, diff) = compare_stages(&f, &i, m).unwrap();
            assert!(!eq);
            assert!(diff.vertices[0].is_empty());
            // under hamming, vertex 0 keeps label "1" in both models
            let expected = if m == CompareMethod::Hamming { 5 } else { 6 };
            assert_eq!(diff.vertices[2].len(), expected);
        }
        let labels = vec![vec!["x".to_string()], vec!["q".into(), "p".into()], vec!["z".into(); 6]];
        let relabeled = StagedTree::<f64>::from_labels(d.tree().clone(), labels, "na").unwrap();
        let (eq, _) = compare_stages(&i, &relabeled, CompareMethod::Stages).unwrap();
        assert!(!eq);
        let (eq, diff) = compare_stages(&i, &relabeled, CompareMethod::Naive).unwrap();
        assert!(!eq && diff.vertices[1].len() == 2);
        let other = EventTree::new(vec![Variable::new("A", ["a0", "a1"])]).unwrap();
        let o = full(&Dataset::new(other, vec![1.0, 1.0]).unwrap(), &InitOptions::default()).unwrap();
        assert!(compare_stages(&f, &o, CompareMethod::Stages).is_err());
    }

    #[test]
    fn naming_is_idempotent() {
        let st = full(&ds(), &InitOptions::default()).unwrap();
        let once = stndnaming(&st);
        assert_eq!(stndnaming(&once), once);
        assert!(compare_stages(&st, &once, CompareMethod::Stages).unwrap().0);
    }

    #[test]
    fn summary_rows() {
        let st = indep(&ds(), &InitOptions::default()).unwrap();
        let s = summary(&st);
        assert_eq!(s.strata.len(), 3);
        assert_eq!(s.strata[1].stages[0].npaths, 2);
        assert_eq!(s.strata[1].stages[0].sample_size, 78.0);
        let text = s.to_string();
        assert!(text.contains("Variable: B"));
    }
}
