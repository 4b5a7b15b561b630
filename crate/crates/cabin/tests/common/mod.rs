//! Shared builders for integration tests.

use std::collections::BTreeMap;

use cabin::bayesnet::{BayesianNetworkModel, Cpt, Dag, NodeSpec};
use cabin::discretizer::{DiscretizationScheme, GaussianTerm};
use rand::Rng;
use rand_chacha::ChaCha8Rng;

/// Evenly spaced unit-amplitude terms for nodes whose data is already
/// discrete.
pub fn synthetic_scheme(variable: &str, cardinality: usize) -> DiscretizationScheme {
    DiscretizationScheme {
        variable: variable.into(),
        unit: String::new(),
        terms: (0..cardinality)
            .map(|i| GaussianTerm {
                amplitude: 1.0,
                mean: i as f64,
                width: 0.5,
            })
            .collect(),
        normalized: true,
        epsilon: 0.05,
        k_max: cardinality.max(1),
    }
}

/// Assembles a model, synthesizing a scheme per node.
pub fn model_from_parts(dag: Dag, cpts: Vec<Cpt>) -> BayesianNetworkModel {
    let schemes: BTreeMap<_, _> = dag
        .nodes()
        .iter()
        .map(|n| (n.name.clone(), synthetic_scheme(&n.name, n.cardinality)))
        .collect();
    BayesianNetworkModel::new(dag, cpts, schemes).unwrap()
}

pub fn random_row(rng: &mut ChaCha8Rng, len: usize) -> Vec<f64> {
    let mut row: Vec<f64> = (0..len).map(|_| rng.random::<f64>() + 0.05).collect();
    let sum: f64 = row.iter().sum();
    row.iter_mut().for_each(|v| *v /= sum);
    row
}

/// Random model over `n` nodes: random order-consistent DAG with edge
/// probability 0.4, random positive CPT rows, the last node the QoS metric.
pub fn random_model(rng: &mut ChaCha8Rng, n: usize, max_card: usize) -> BayesianNetworkModel {
    let nodes: Vec<NodeSpec> = (0..n)
        .map(|i| {
            let card = rng.random_range(2..=max_card);
            if i == n - 1 {
                NodeSpec::qos(format!("n{i}"), card)
            } else {
                NodeSpec::context(format!("n{i}"), card, false)
            }
        })
        .collect();
    let cards: Vec<usize> = nodes.iter().map(|s| s.cardinality).collect();
    let mut dag = Dag::new(nodes, (0..n).collect()).unwrap();
    for child in 1..n {
        for parent in 0..child {
            if rng.random::<f64>() < 0.4 {
                dag.add_edge(parent, child).unwrap();
            }
        }
    }
    let cpts = (0..n)
        .map(|node| {
            let parents = dag.parents_of(node).to_vec();
            let parent_cards: Vec<usize> = parents.iter().map(|&p| cards[p]).collect();
            let configs: usize = parent_cards.iter().product();
            Cpt {
                node,
                parents,
                parent_cards,
                cardinality: cards[node],
                rows: (0..configs).map(|_| random_row(rng, cards[node])).collect(),
            }
        })
        .collect();
    model_from_parts(dag, cpts)
}
