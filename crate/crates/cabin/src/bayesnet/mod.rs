//! Bayesian networks over discretized QoS/context variables: K2 structure
//! learning, Dirichlet parameter learning, and exact marginal inference.

pub mod dag;
pub mod dataset;
mod factor;
mod infer;
mod learn;
mod model;
mod score;

use thiserror::Error;

pub use dag::{Dag, NodeRole, NodeSpec};
pub use dataset::TraceDataset;
pub use infer::{infer_marginal, joint_enumerate};
pub use learn::{k2_learn, learn_parameters, order_nodes, DEFAULT_ALPHA, DEFAULT_MAX_PARENTS};
pub use model::{BayesianNetworkModel, Evidence};
pub use score::{ch_score, ch_score_named};

#[derive(Debug, Error)]
pub enum BayesNetError {
    #[error("column `{0}` not present in the dataset")]
    MissingColumn(String),
    #[error("invalid dataset: {0}")]
    InvalidDataset(String),
    #[error("invalid ordering: {0}")]
    InvalidOrdering(String),
    #[error("unknown node `{0}`")]
    UnknownNode(String),
    #[error("evidence label {label} out of range for node `{node}` (cardinality {cardinality})")]
    EvidenceOutOfRange {
        node: String,
        label: usize,
        cardinality: usize,
    },
    #[error("evidence has probability zero under the model")]
    ImpossibleEvidence,
    #[error("joint state space of {states} assignments exceeds the {limit} limit")]
    StateSpaceTooLarge { states: u128, limit: u64 },
    #[error("invalid model: {0}")]
    InvalidModel(String),
    #[error(transparent)]
    Io(#[from] std::io::Error),
}

/// Conditional probability table of one node: a probability row per parent
/// configuration (mixed-radix index over the parent cardinalities, first
/// parent most significant).
#[derive(Debug, Clone)]
pub struct Cpt {
    /// Node index in the owning DAG.
    pub node: usize,
    /// Parent node indices, in the DAG's canonical (ordering-position) order.
    pub parents: Vec<usize>,
    pub parent_cards: Vec<usize>,
    pub cardinality: usize,
    pub rows: Vec<Vec<f64>>,
}

impl Cpt {
    /// Row index for a parent label assignment.
    pub fn config_index(&self, parent_labels: &[usize]) -> usize {
        debug_assert_eq!(parent_labels.len(), self.parents.len());
        let mut j = 0usize;
        for (l, c) in parent_labels.iter().zip(&self.parent_cards) {
            j = j * c + l;
        }
        j
    }

    pub fn row(&self, parent_labels: &[usize]) -> &[f64] {
        &self.rows[self.config_index(parent_labels)]
    }
}
