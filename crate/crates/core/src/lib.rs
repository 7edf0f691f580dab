//! Staged event trees and chain event graphs for categorical data.
//!
//! Models are generic over the floating-point type; `f64` is the default and
//! the `*F32` aliases below cover single precision.

#![allow(clippy::neg_cmp_op_on_partial_ord)]

pub mod bn;
pub mod ceg;
pub mod classify;
pub mod data;
pub mod datasets;
pub mod divergence;
pub mod error;
pub mod estimate;
pub mod evaluate;
pub mod learn;
pub mod lrt;
pub mod model;
pub mod num;
pub mod persist;
pub mod query;
pub mod special;
pub mod tree;

pub use bn::as_staged_tree_from_bn;
pub use ceg::{ceg, ceg_adjmat, ceg_to_dot, positions, tree_to_dot, Ceg, CegEdge, CegNode};
pub use classify::{accuracy, predict, predict_indices};
pub use data::{load_counts_csv, load_records_csv, Dataset, LevelOrder, LoadOptions, Records};
pub use divergence::{divergence, Divergence};
pub use error::{Error, ErrorKind, Result};
pub use estimate::{aic, bic, collapse_unobserved, df, fit, full, indep, loglik, score, InitOptions, ModelScore};
pub use evaluate::{evaluate, EvalConfig, Init, MeanResult, SplitResult};
pub use learn::{
    join_stages, learn, score_model, stages_bhc, stages_bhcr, stages_bj, stages_fbhc, stages_hc, stages_hclust,
    stages_kmeans, Algorithm, Linkage, ScoreKind, SearchConfig,
};
pub use lrt::{lr_test, LrTest};
pub use model::{Stage, StagedTree, Stratum, DEFAULT_UNOBSERVED};
pub use num::Real;
pub use persist::{load_model, read_model, save_model, write_model};
pub use query::{
    atomic_probs, compare_stages, get_path, get_stage, parse_assignment, path_prob, prob, sample_from, stndnaming,
    subtree, summary, CompareMethod, PartialAssignment, StageDiff, Summary,
};
pub use special::chisq_upper_tail;
pub use tree::{EventTree, Variable, VertexId};

pub type StagedTreeF32 = StagedTree<f32>;
pub type DatasetF32 = Dataset<f32>;
pub type ModelScoreF32 = ModelScore<f32>;
