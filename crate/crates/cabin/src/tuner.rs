//! Optimal context tuning: choose values for the tunable parent contexts of
//! a QoS node that maximize the probability of a target QoS value.
//!
//! Only parents are tuned. Conditioning on the QoS node's Markov blanket
//! makes it independent of everything else, so non-parent contexts cannot
//! raise the guarantee probability and are left untouched.

use std::collections::BTreeMap;

use thiserror::Error;

use crate::bayesnet::{infer_marginal, BayesNetError, BayesianNetworkModel, Evidence, NodeRole};

/// Default guarantee threshold used when walking a target preference list.
pub const DEFAULT_P_MIN: f64 = 0.5;

#[derive(Debug, Error)]
pub enum TunerError {
    #[error("node `{0}` is not the model's QoS metric")]
    NotAQosNode(String),
    #[error("target label {label} out of range for `{node}` (cardinality {cardinality})")]
    TargetOutOfRange {
        node: String,
        label: usize,
        cardinality: usize,
    },
    #[error("evidence on tunable node `{0}`: tunable nodes are outputs, not observations")]
    ObservedTunable(String),
    #[error("preference must be a permutation of the QoS labels")]
    BadPreference,
    #[error(transparent)]
    Bayes(#[from] BayesNetError),
}

/// An assignment of tunable parent contexts together with the probability of
/// hitting the target QoS label under it.
#[derive(Debug, Clone, PartialEq)]
pub struct TuningRecommendation {
    pub qos_node: String,
    pub target_label: usize,
    /// Tunable parent context -> chosen label.
    pub assignment: BTreeMap<String, usize>,
    pub probability: f64,
}

/// Parents of the QoS node that the operator can actually set.
pub fn tunable_parents(
    model: &BayesianNetworkModel,
    qos_node: &str,
) -> Result<Vec<String>, TunerError> {
    let dag = model.dag();
    let idx = dag.node_index(qos_node)?;
    if dag.node(idx).role != NodeRole::QosMetric {
        return Err(TunerError::NotAQosNode(qos_node.into()));
    }
    Ok(dag
        .parents_of(idx)
        .iter()
        .filter(|&&p| dag.node(p).tunable)
        .map(|&p| dag.node(p).name.clone())
        .collect())
}

/// Enumerates every joint assignment of the tunable parent contexts and
/// returns the one maximizing `P(qos = target | assignment, observed)`.
///
/// Ties go to the lexicographically smallest label vector over the tunable
/// parents sorted by name.
pub fn recommend(
    model: &BayesianNetworkModel,
    qos_node: &str,
    target: usize,
    observed: &Evidence,
) -> Result<TuningRecommendation, TunerError> {
    let dag = model.dag();
    let qos_idx = dag.node_index(qos_node)?;
    let cardinality = dag.node(qos_idx).cardinality;
    if target >= cardinality {
        return Err(TunerError::TargetOutOfRange {
            node: qos_node.into(),
            label: target,
            cardinality,
        });
    }
    model.check_evidence(observed)?;
    for (name, _) in observed.iter() {
        let idx = dag.node_index(name)?;
        if dag.node(idx).tunable {
            return Err(TunerError::ObservedTunable(name.clone()));
        }
    }

    let mut tunables = tunable_parents(model, qos_node)?;
    tunables.sort();
    let cards: Vec<usize> = tunables
        .iter()
        .map(|name| dag.node(dag.node_index(name).expect("parent exists")).cardinality)
        .collect();

    let mut best: Option<(f64, Vec<usize>)> = None;
    let mut labels = vec![0usize; tunables.len()];
    loop {
        let mut evidence = observed.clone();
        for (name, &label) in tunables.iter().zip(&labels) {
            evidence.set(name.clone(), label);
        }
        let posterior = infer_marginal(model, &evidence, qos_node)?;
        let p = posterior[target];
        // Strict improvement keeps the first (lexicographically smallest)
        // assignment on ties.
        if best.as_ref().is_none_or(|(bp, _)| p > *bp) {
            best = Some((p, labels.clone()));
        }
        // Mixed-radix increment, last variable fastest, so assignments are
        // visited in lexicographic order.
        let mut i = tunables.len();
        loop {
            if i == 0 {
                let (probability, labels) = best.expect("at least one assignment visited");
                let assignment = tunables.into_iter().zip(labels).collect();
                return Ok(TuningRecommendation {
                    qos_node: qos_node.into(),
                    target_label: target,
                    assignment,
                    probability,
                });
            }
            i -= 1;
            labels[i] += 1;
            if labels[i] < cards[i] {
                break;
            }
            labels[i] = 0;
        }
    }
}

/// Walks the preference list in order and returns the first target whose best
/// guarantee probability reaches `p_min`; if none qualifies, returns the
/// globally best recommendation by probability (earlier preferences win
/// ties).
pub fn recommend_best(
    model: &BayesianNetworkModel,
    qos_node: &str,
    preference: &[usize],
    observed: &Evidence,
    p_min: f64,
) -> Result<TuningRecommendation, TunerError> {
    let dag = model.dag();
    let qos_idx = dag.node_index(qos_node)?;
    let cardinality = dag.node(qos_idx).cardinality;
    {
        let mut seen = vec![false; cardinality];
        for &label in preference {
            if label >= cardinality || seen[label] {
                return Err(TunerError::BadPreference);
            }
            seen[label] = true;
        }
        if preference.len() != cardinality {
            return Err(TunerError::BadPreference);
        }
    }

    let mut fallback: Option<TuningRecommendation> = None;
    for &target in preference {
        let rec = recommend(model, qos_node, target, observed)?;
        if rec.probability >= p_min {
            return Ok(rec);
        }
        if fallback
            .as_ref()
            .is_none_or(|f| rec.probability > f.probability)
        {
            fallback = Some(rec);
        }
    }
    Ok(fallback.expect("preference is non-empty"))
}
