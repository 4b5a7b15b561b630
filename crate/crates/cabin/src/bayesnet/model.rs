//! A fully specified network: structure, parameters, and the discretization
//! schemes that map raw measurements onto node labels.

use std::collections::BTreeMap;
use std::path::Path;

use rand::Rng;
use serde::Deserialize;
use serde_json::Value;

use crate::discretizer::DiscretizationScheme;
use crate::fmt::{json_escape, sig12};

use super::dag::{Dag, NodeRole, NodeSpec};
use super::dataset::TraceDataset;
use super::{BayesNetError, Cpt};

/// A partial assignment of node labels used as observed data in queries.
#[derive(Debug, Clone, Default)]
pub struct Evidence {
    map: BTreeMap<String, usize>,
}

impl Evidence {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn from_pairs<'a>(pairs: impl IntoIterator<Item = (&'a str, usize)>) -> Self {
        let mut e = Self::new();
        for (name, label) in pairs {
            e.set(name, label);
        }
        e
    }

    pub fn set(&mut self, node: impl Into<String>, label: usize) {
        self.map.insert(node.into(), label);
    }

    pub fn get(&self, node: &str) -> Option<usize> {
        self.map.get(node).copied()
    }

    pub fn contains(&self, node: &str) -> bool {
        self.map.contains_key(node)
    }

    pub fn iter(&self) -> impl Iterator<Item = (&String, usize)> {
        self.map.iter().map(|(k, v)| (k, *v))
    }

    pub fn is_empty(&self) -> bool {
        self.map.is_empty()
    }

    pub fn len(&self) -> usize {
        self.map.len()
    }

    /// Union with another evidence set; `other` wins on conflicts.
    pub fn merged_with(&self, other: &Evidence) -> Evidence {
        let mut map = self.map.clone();
        for (k, v) in &other.map {
            map.insert(k.clone(), *v);
        }
        Evidence { map }
    }
}

/// Structure, CPTs, and per-variable discretization schemes.
#[derive(Debug, Clone)]
pub struct BayesianNetworkModel {
    dag: Dag,
    /// One CPT per node, indexed by node.
    cpts: Vec<Cpt>,
    schemes: BTreeMap<String, DiscretizationScheme>,
}

impl BayesianNetworkModel {
    pub fn new(
        dag: Dag,
        cpts: Vec<Cpt>,
        schemes: BTreeMap<String, DiscretizationScheme>,
    ) -> Result<Self, BayesNetError> {
        if cpts.len() != dag.n_nodes() {
            return Err(BayesNetError::InvalidModel(format!(
                "{} CPTs for {} nodes",
                cpts.len(),
                dag.n_nodes()
            )));
        }
        let qos_count = dag
            .nodes()
            .iter()
            .filter(|n| n.role == NodeRole::QosMetric)
            .count();
        if qos_count != 1 {
            return Err(BayesNetError::InvalidModel(format!(
                "model must have exactly one QoS node, found {qos_count}"
            )));
        }
        for (idx, cpt) in cpts.iter().enumerate() {
            let spec = dag.node(idx);
            if cpt.node != idx {
                return Err(BayesNetError::InvalidModel(format!(
                    "CPT at position {idx} is for node {}",
                    cpt.node
                )));
            }
            if cpt.parents != dag.parents_of(idx) {
                return Err(BayesNetError::InvalidModel(format!(
                    "CPT parents for `{}` do not match the DAG",
                    spec.name
                )));
            }
            if cpt.cardinality != spec.cardinality {
                return Err(BayesNetError::InvalidModel(format!(
                    "CPT cardinality for `{}` does not match the node",
                    spec.name
                )));
            }
            let configs: usize = cpt.parent_cards.iter().product();
            if cpt.rows.len() != configs {
                return Err(BayesNetError::InvalidModel(format!(
                    "CPT for `{}` has {} rows, expected {configs}",
                    spec.name,
                    cpt.rows.len()
                )));
            }
            for row in &cpt.rows {
                if row.len() != spec.cardinality {
                    return Err(BayesNetError::InvalidModel(format!(
                        "CPT row for `{}` has wrong width",
                        spec.name
                    )));
                }
                let sum: f64 = row.iter().sum();
                if (sum - 1.0).abs() > 1e-6 || row.iter().any(|p| *p < 0.0) {
                    return Err(BayesNetError::InvalidModel(format!(
                        "CPT row for `{}` is not a probability vector (sum {sum})",
                        spec.name
                    )));
                }
            }
            match schemes.get(&spec.name) {
                None => {
                    return Err(BayesNetError::InvalidModel(format!(
                        "no discretization scheme for `{}`",
                        spec.name
                    )))
                }
                Some(s) if s.term_count() != spec.cardinality => {
                    return Err(BayesNetError::InvalidModel(format!(
                        "scheme for `{}` has {} terms but the node has cardinality {}",
                        spec.name,
                        s.term_count(),
                        spec.cardinality
                    )))
                }
                Some(_) => {}
            }
        }
        Ok(Self { dag, cpts, schemes })
    }

    pub fn dag(&self) -> &Dag {
        &self.dag
    }

    pub fn cpt(&self, node: usize) -> &Cpt {
        &self.cpts[node]
    }

    pub fn cpts(&self) -> &[Cpt] {
        &self.cpts
    }

    pub fn schemes(&self) -> &BTreeMap<String, DiscretizationScheme> {
        &self.schemes
    }

    pub fn scheme(&self, node_name: &str) -> Option<&DiscretizationScheme> {
        self.schemes.get(node_name)
    }

    /// The single QoS node's name.
    pub fn qos_node(&self) -> &str {
        &self
            .dag
            .nodes()
            .iter()
            .find(|n| n.role == NodeRole::QosMetric)
            .expect("validated at construction")
            .name
    }

    /// Validates an evidence set against node names and cardinalities.
    pub fn check_evidence(&self, evidence: &Evidence) -> Result<(), BayesNetError> {
        for (name, label) in evidence.iter() {
            let idx = self.dag.node_index(name)?;
            let card = self.dag.node(idx).cardinality;
            if label >= card {
                return Err(BayesNetError::EvidenceOutOfRange {
                    node: name.clone(),
                    label,
                    cardinality: card,
                });
            }
        }
        Ok(())
    }

    /// Ancestral sampling of `n` complete rows.
    pub fn sample(&self, n: usize, rng: &mut impl Rng) -> TraceDataset {
        let order = self.dag.ordering().to_vec();
        let n_nodes = self.dag.n_nodes();
        let mut columns = vec![Vec::with_capacity(n); n_nodes];
        let mut row = vec![0usize; n_nodes];
        for _ in 0..n {
            for &node in &order {
                let parent_labels: Vec<usize> = self.cpts[node]
                    .parents
                    .iter()
                    .map(|&p| row[p])
                    .collect();
                let dist = self.cpts[node].row(&parent_labels);
                let u: f64 = rng.random();
                let mut acc = 0.0;
                let mut label = dist.len() - 1;
                for (k, p) in dist.iter().enumerate() {
                    acc += p;
                    if u < acc {
                        label = k;
                        break;
                    }
                }
                row[node] = label;
            }
            for (node, col) in columns.iter_mut().enumerate() {
                col.push(row[node]);
            }
        }
        TraceDataset::new(
            self.dag.nodes().iter().map(|s| s.name.clone()).collect(),
            self.dag.nodes().iter().map(|s| s.cardinality).collect(),
            columns,
        )
        .expect("sampled labels are in range")
    }

    /// Canonical JSON: fixed key order, name-keyed maps sorted, floats with
    /// 12 significant digits. Loading and saving is byte-stable.
    pub fn to_json(&self) -> String {
        let mut out = String::from("{\"nodes\":[");
        for (i, node) in self.dag.nodes().iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&format!(
                "{{\"name\":\"{}\",\"cardinality\":{},\"role\":\"{}\",\"tunable\":{}}}",
                json_escape(&node.name),
                node.cardinality,
                node.role.as_str(),
                node.tunable
            ));
        }
        out.push_str("],\"ordering\":[");
        for (i, &idx) in self.dag.ordering().iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&format!("\"{}\"", json_escape(&self.dag.node(idx).name)));
        }
        out.push_str("],\"edges\":[");
        for (i, (p, c)) in self.dag.edges().iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&format!(
                "[\"{}\",\"{}\"]",
                json_escape(&self.dag.node(*p).name),
                json_escape(&self.dag.node(*c).name)
            ));
        }
        out.push_str("],\"cpts\":{");
        let mut by_name: Vec<(&str, &Cpt)> = self
            .cpts
            .iter()
            .map(|c| (self.dag.node(c.node).name.as_str(), c))
            .collect();
        by_name.sort_by_key(|(name, _)| *name);
        for (i, (name, cpt)) in by_name.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&format!("\"{}\":{{\"parents\":[", json_escape(name)));
            for (j, &p) in cpt.parents.iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                out.push_str(&format!("\"{}\"", json_escape(&self.dag.node(p).name)));
            }
            out.push_str("],\"rows\":[");
            for (j, row) in cpt.rows.iter().enumerate() {
                if j > 0 {
                    out.push(',');
                }
                out.push('[');
                for (k, v) in row.iter().enumerate() {
                    if k > 0 {
                        out.push(',');
                    }
                    out.push_str(&sig12(*v));
                }
                out.push(']');
            }
            out.push_str("]}");
        }
        out.push_str("},\"schemes\":{");
        for (i, (name, scheme)) in self.schemes.iter().enumerate() {
            if i > 0 {
                out.push(',');
            }
            out.push_str(&format!("\"{}\":{}", json_escape(name), scheme.to_json()));
        }
        out.push_str("}}");
        out
    }

    pub fn from_json(text: &str) -> Result<Self, BayesNetError> {
        let file: ModelFile = serde_json::from_str(text)
            .map_err(|e| BayesNetError::InvalidModel(e.to_string()))?;

        let mut nodes = Vec::with_capacity(file.nodes.len());
        for n in &file.nodes {
            let role = NodeRole::parse(&n.role).ok_or_else(|| {
                BayesNetError::InvalidModel(format!("unknown role `{}`", n.role))
            })?;
            nodes.push(NodeSpec {
                name: n.name.clone(),
                cardinality: n.cardinality,
                role,
                tunable: n.tunable,
            });
        }
        let index_of = |name: &str| -> Result<usize, BayesNetError> {
            nodes
                .iter()
                .position(|n| n.name == name)
                .ok_or_else(|| BayesNetError::UnknownNode(name.into()))
        };
        let ordering: Vec<usize> = file
            .ordering
            .iter()
            .map(|n| index_of(n))
            .collect::<Result<_, _>>()?;
        let mut dag = Dag::new(nodes.clone(), ordering)?;
        for edge in &file.edges {
            if edge.len() != 2 {
                return Err(BayesNetError::InvalidModel(
                    "edges must be [parent, child] pairs".into(),
                ));
            }
            dag.add_edge(index_of(&edge[0])?, index_of(&edge[1])?)?;
        }

        let mut cpts = Vec::with_capacity(nodes.len());
        for (idx, spec) in nodes.iter().enumerate() {
            let entry = file.cpts.get(&spec.name).ok_or_else(|| {
                BayesNetError::InvalidModel(format!("no CPT for `{}`", spec.name))
            })?;
            let parents: Vec<usize> = entry
                .parents
                .iter()
                .map(|p| index_of(p))
                .collect::<Result<_, _>>()?;
            let parent_cards: Vec<usize> =
                parents.iter().map(|&p| nodes[p].cardinality).collect();
            cpts.push(Cpt {
                node: idx,
                parents,
                parent_cards,
                cardinality: spec.cardinality,
                rows: entry.rows.clone(),
            });
        }

        let mut schemes = BTreeMap::new();
        for (name, value) in &file.schemes {
            let scheme = DiscretizationScheme::from_file_value(value)
                .map_err(|e| BayesNetError::InvalidModel(e.to_string()))?;
            schemes.insert(name.clone(), scheme);
        }

        Self::new(dag, cpts, schemes)
    }

    pub fn save(&self, path: &Path) -> Result<(), BayesNetError> {
        std::fs::write(path, self.to_json())?;
        Ok(())
    }

    pub fn load(path: &Path) -> Result<Self, BayesNetError> {
        let text = std::fs::read_to_string(path)?;
        Self::from_json(&text)
    }
}

#[derive(Deserialize)]
struct ModelFile {
    nodes: Vec<NodeFile>,
    ordering: Vec<String>,
    edges: Vec<Vec<String>>,
    cpts: BTreeMap<String, CptFile>,
    schemes: BTreeMap<String, Value>,
}

#[derive(Deserialize)]
struct NodeFile {
    name: String,
    cardinality: usize,
    role: String,
    #[serde(default)]
    tunable: bool,
}

#[derive(Deserialize)]
struct CptFile {
    parents: Vec<String>,
    rows: Vec<Vec<f64>>,
}

#[cfg(test)]
pub(crate) mod test_support {
    use super::*;
    use crate::discretizer::GaussianTerm;

    /// Evenly spaced unit-amplitude terms for models built from data that is
    /// already discrete.
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
            epsilon: crate::discretizer::DEFAULT_EPSILON,
            k_max: cardinality.max(1),
        }
    }

    /// Assembles a model from raw parts, synthesizing schemes.
    pub fn model_from_parts(dag: Dag, cpts: Vec<Cpt>) -> BayesianNetworkModel {
        let schemes = dag
            .nodes()
            .iter()
            .map(|n| (n.name.clone(), synthetic_scheme(&n.name, n.cardinality)))
            .collect();
        BayesianNetworkModel::new(dag, cpts, schemes).unwrap()
    }
}
