//! Positions, chain event graphs and DOT export.
//!
//! Two vertices share a position when they are in the same stage and, level
//! by level, their children share a position. Leaves all sit in the sink.
//! Unobserved vertices of a stratum form a single position without outgoing
//! edges.

use crate::error::{Error, Result};
use crate::model::StagedTree;
use crate::num::Real;
use crate::tree::EventTree;
use std::collections::HashMap;
use std::fmt::Write;

/// Position of every vertex, per stratum; positions are numbered per stratum
/// in order of their first member.
pub fn positions<T: Real>(st: &StagedTree<T>) -> Result<Vec<Vec<usize>>> {
    if !st.is_fitted() {
        return Err(Error::NotFitted);
    }
    let n = st.tree().len();
    let mut out: Vec<Vec<usize>> = vec![Vec::new(); n];
    for d in (0..n).rev() {
        let s = st.stratum(d);
        let k = s.cardinality();
        let mut index: HashMap<(Option<usize>, Vec<usize>), usize> = HashMap::new();
        let mut pos = Vec::with_capacity(s.n_vertices());
        for v in 0..s.n_vertices() {
            let slot = s.assignment()[v];
            let key = if s.stages()[slot].unobserved {
                (None, Vec::new())
            } else if d + 1 == n {
                (Some(slot), Vec::new())
            } else {
                (Some(slot), out[d + 1][v * k..(v + 1) * k].to_vec())
            };
            let next = index.len();
            pos.push(*index.entry(key).or_insert(next));
        }
        out[d] = pos;
    }
    Ok(out)
}

#[derive(Debug, Clone, PartialEq)]
pub struct CegNode {
    /// `None` for the sink.
    pub stratum: Option<usize>,
    pub stage: Option<String>,
    pub members: Vec<usize>,
    pub unobserved: bool,
}

#[derive(Debug, Clone, PartialEq)]
pub struct CegEdge<T: Real = f64> {
    pub from: usize,
    pub to: usize,
    pub level: usize,
    pub label: String,
    pub prob: T,
}

/// A chain event graph. Node 0 is the root, then positions by stratum and
/// first member, and the sink last.
#[derive(Debug, Clone, PartialEq)]
pub struct Ceg<T: Real = f64> {
    pub tree: EventTree,
    pub nodes: Vec<CegNode>,
    pub edges: Vec<CegEdge<T>>,
    /// Node id of every vertex, per stratum.
    pub vertex_node: Vec<Vec<usize>>,
    out: Vec<Vec<usize>>,
}

impl<T: Real> Ceg<T> {
    pub fn sink(&self) -> usize {
        self.nodes.len() - 1
    }

    pub fn n_positions(&self) -> usize {
        self.nodes.len()
    }

    /// Product of edge probabilities along the walk of a full assignment;
    /// zero if the walk enters an unobserved position.
    pub fn path_prob(&self, x: &[usize]) -> Result<T> {
        if x.len() != self.tree.len() {
            return Err(Error::InvalidPath(format!("expected {} values, got {}", self.tree.len(), x.len())));
        }
        let mut node = 0;
        let mut p = T::one();
        for (d, &j) in x.iter().enumerate() {
            if j >= self.tree.cardinality(d) {
                return Err(Error::InvalidPath(format!("level index {} out of range", j)));
            }
            let Some(&e) = self.out[node].get(j) else { return Ok(T::zero()) };
            p = p * self.edges[e].prob;
            node = self.edges[e].to;
        }
        Ok(p)
    }

    /// Edge counts between nodes, in node order.
    pub fn adjacency(&self) -> Vec<Vec<usize>> {
        let n = self.nodes.len();
        let mut m = vec![vec![0; n]; n];
        for e in &self.edges {
            m[e.from][e.to] += 1;
        }
        m
    }

    pub fn node_name(&self, i: usize) -> String {
        if i == self.sink() {
            "u_inf".to_string()
        } else {
            format!("u{}", i)
        }
    }
}

pub fn ceg<T: Real>(st: &StagedTree<T>) -> Result<Ceg<T>> {
    let pos = positions(st)?;
    let tree = st.tree().clone();
    let n = tree.len();
    let mut nodes = Vec::new();
    let mut vertex_node = Vec::with_capacity(n);
    for (d, p) in pos.iter().enumerate() {
        let base = nodes.len();
        let count = p.iter().max().map_or(0, |m| m + 1);
        for _ in 0..count {
            nodes.push(CegNode {
                stratum: Some(d),
                stage: None,
                members: Vec::new(),
                unobserved: false,
            });
        }
        for (v, &q) in p.iter().enumerate() {
            let node = &mut nodes[base + q];
            if node.members.is_empty() {
                let stage = st.stratum(d).stage_of(v);
                node.stage = Some(stage.id.clone());
                node.unobserved = stage.unobserved;
            }
            node.members.push(v);
        }
        vertex_node.push(p.iter().map(|&q| base + q).collect::<Vec<_>>());
    }
    let sink = nodes.len();
    nodes.push(CegNode {
        stratum: None,
        stage: None,
        members: Vec::new(),
        unobserved: false,
    });
    let mut edges = Vec::new();
    let mut out = vec![Vec::new(); nodes.len()];
    for i in 0..sink {
        let d = nodes[i].stratum.expect("non-sink");
        let v = nodes[i].members[0];
        let Some(p) = st.stratum(d).stage_of(v).probs.as_deref() else { continue };
        let k = tree.cardinality(d);
        for j in 0..k {
            let to = if d + 1 == n { sink } else { vertex_node[d + 1][v * k + j] };
            out[i].push(edges.len());
            edges.push(CegEdge {
                from: i,
                to,
                level: j,
                label: tree.variable(d).levels[j].clone(),
                prob: p[j],
            });
        }
    }
    Ok(Ceg {
        tree,
        nodes,
        edges,
        vertex_node,
        out,
    })
}

/// Adjacency matrix of `c`: entry `(i, j)` counts the edges from node `i` to node `j`.
pub fn ceg_adjmat<T: Real>(c: &Ceg<T>) -> Vec<Vec<usize>> {
    c.adjacency()
}

const PALETTE: [&str; 12] = [
    "#e41a1c", "#377eb8", "#4daf4a", "#984ea3", "#ff7f00", "#ffff33", "#a65628", "#f781bf", "#66c2a5", "#fc8d62",
    "#8da0cb", "#e78ac3",
];
const UNOBSERVED_COLOR: &str = "#bebebe";

fn escape(s: &str) -> String {
    s.replace('\\', "\\\\").replace('"', "\\\"")
}

fn edge_label<T: Real>(level: &str, p: Option<T>) -> String {
    match p {
        Some(p) => format!("{} / {:.4}", escape(level), p.as_f64()),
        None => escape(level),
    }
}

/// DOT digraph of the full tree, vertices filled by stage.
///
/// Colors follow the stage slot within each stratum; the unobserved stage is gray.
pub fn tree_to_dot<T: Real>(st: &StagedTree<T>) -> String {
    let tree = st.tree();
    let n = tree.len();
    let mut s = String::from("digraph staged_tree {\n  rankdir=LR;\n  node [shape=circle, style=filled, label=\"\"];\n");
    for d in 0..=n {
        for v in 0..tree.stratum_size(d) {
            if d == n {
                let _ = writeln!(s, "  v{}_{} [fillcolor=\"#ffffff\", shape=point];", d, v);
                continue;
            }
            let stratum = st.stratum(d);
            let slot = stratum.assignment()[v];
            let stage = &stratum.stages()[slot];
            let color = if stage.unobserved {
                UNOBSERVED_COLOR
            } else {
                PALETTE[slot % PALETTE.len()]
            };
            let _ = writeln!(
                s,
                "  v{}_{} [fillcolor=\"{}\", tooltip=\"{}\"];",
                d,
                v,
                color,
                escape(&stage.id)
            );
        }
    }
    for d in 0..n {
        let k = tree.cardinality(d);
        for v in 0..tree.stratum_size(d) {
            let probs = st.stratum(d).stage_of(v).probs.as_deref();
            for j in 0..k {
                let _ = writeln!(
                    s,
                    "  v{}_{} -> v{}_{} [label=\"{}\"];",
                    d,
                    v,
                    d + 1,
                    v * k + j,
                    edge_label(&tree.variable(d).levels[j], probs.map(|p| p[j]))
                );
            }
        }
    }
    s.push_str("}\n");
    s
}

/// DOT digraph of a CEG; parallel edges are drawn separately.
pub fn ceg_to_dot<T: Real>(c: &Ceg<T>) -> String {
    let mut s = String::from("digraph ceg {\n  rankdir=LR;\n  node [shape=circle, style=filled];\n");
    let mut slots: HashMap<(usize, String), usize> = HashMap::new();
    for (i, node) in c.nodes.iter().enumerate() {
        let color = match (&node.stratum, &node.stage) {
            (None, _) => "#ffffff".to_string(),
            _ if node.unobserved => UNOBSERVED_COLOR.to_string(),
            (Some(d), Some(stage)) => {
                let next = slots.keys().filter(|(e, _)| e == d).count();
                let slot = *slots.entry((*d, stage.clone())).or_insert(next);
                PALETTE[slot % PALETTE.len()].to_string()
            }
            _ => "#ffffff".to_string(),
        };
        let _ = writeln!(s, "  {} [fillcolor=\"{}\", label=\"{}\"];", c.node_name(i), color, c.node_name(i));
    }
    for e in &c.edges {
        let _ = writeln!(
            s,
            "  {} -> {} [label=\"{}\"];",
            c.node_name(e.from),
            c.node_name(e.to),
            edge_label(&e.label, Some(e.prob))
        );
    }
    s.push_str("}\n");
    s
}
