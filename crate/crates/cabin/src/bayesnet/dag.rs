//! Directed acyclic graphs over named discrete nodes.

use std::collections::BTreeSet;

use super::BayesNetError;

/// What a node represents in the QoS model.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum NodeRole {
    /// The user-facing quantity to guarantee (one per model).
    QosMetric,
    /// An observed application- or network-level variable.
    Context,
}

impl NodeRole {
    pub fn as_str(&self) -> &'static str {
        match self {
            NodeRole::QosMetric => "qos_metric",
            NodeRole::Context => "context",
        }
    }

    pub fn parse(s: &str) -> Option<Self> {
        match s {
            "qos_metric" => Some(NodeRole::QosMetric),
            "context" => Some(NodeRole::Context),
            _ => None,
        }
    }
}

/// A discrete node: name, number of discrete values, role, and whether the
/// operator can set it.
#[derive(Debug, Clone)]
pub struct NodeSpec {
    pub name: String,
    pub cardinality: usize,
    pub role: NodeRole,
    pub tunable: bool,
}

impl NodeSpec {
    pub fn context(name: impl Into<String>, cardinality: usize, tunable: bool) -> Self {
        Self {
            name: name.into(),
            cardinality,
            role: NodeRole::Context,
            tunable,
        }
    }

    pub fn qos(name: impl Into<String>, cardinality: usize) -> Self {
        Self {
            name: name.into(),
            cardinality,
            role: NodeRole::QosMetric,
            tunable: false,
        }
    }
}

/// A DAG whose edges respect a fixed node ordering: every parent precedes its
/// child, which makes acyclicity structural.
#[derive(Debug, Clone)]
pub struct Dag {
    nodes: Vec<NodeSpec>,
    /// Node indices in learning order.
    ordering: Vec<usize>,
    /// Position of each node in `ordering`.
    position: Vec<usize>,
    /// Parents per node, sorted by ordering position.
    parents: Vec<Vec<usize>>,
}

impl Dag {
    /// An edgeless DAG over `nodes` with the given learning order (a
    /// permutation of node indices).
    pub fn new(nodes: Vec<NodeSpec>, ordering: Vec<usize>) -> Result<Self, BayesNetError> {
        let n = nodes.len();
        if ordering.len() != n {
            return Err(BayesNetError::InvalidOrdering(format!(
                "ordering has {} entries for {n} nodes",
                ordering.len()
            )));
        }
        let mut position = vec![usize::MAX; n];
        for (pos, &idx) in ordering.iter().enumerate() {
            if idx >= n || position[idx] != usize::MAX {
                return Err(BayesNetError::InvalidOrdering(
                    "ordering is not a permutation of the nodes".into(),
                ));
            }
            position[idx] = pos;
        }
        Ok(Self {
            nodes,
            ordering,
            position,
            parents: vec![Vec::new(); n],
        })
    }

    pub fn n_nodes(&self) -> usize {
        self.nodes.len()
    }

    pub fn node(&self, idx: usize) -> &NodeSpec {
        &self.nodes[idx]
    }

    pub fn nodes(&self) -> &[NodeSpec] {
        &self.nodes
    }

    pub fn ordering(&self) -> &[usize] {
        &self.ordering
    }

    pub fn node_index(&self, name: &str) -> Result<usize, BayesNetError> {
        self.nodes
            .iter()
            .position(|n| n.name == name)
            .ok_or_else(|| BayesNetError::UnknownNode(name.into()))
    }

    pub fn set_role(&mut self, name: &str, role: NodeRole, tunable: bool) -> Result<(), BayesNetError> {
        let idx = self.node_index(name)?;
        self.nodes[idx].role = role;
        self.nodes[idx].tunable = tunable;
        Ok(())
    }

    /// Adds `parent -> child`; the parent must precede the child in the
    /// ordering.
    pub fn add_edge(&mut self, parent: usize, child: usize) -> Result<(), BayesNetError> {
        if parent >= self.nodes.len() || child >= self.nodes.len() {
            return Err(BayesNetError::UnknownNode(format!(
                "node index out of range ({parent} -> {child})"
            )));
        }
        if self.position[parent] >= self.position[child] {
            return Err(BayesNetError::InvalidOrdering(format!(
                "edge {} -> {} violates the node ordering",
                self.nodes[parent].name, self.nodes[child].name
            )));
        }
        if !self.parents[child].contains(&parent) {
            self.parents[child].push(parent);
            let position = &self.position;
            self.parents[child].sort_by_key(|p| position[*p]);
        }
        Ok(())
    }

    /// Parents of a node, sorted by ordering position.
    pub fn parents_of(&self, node: usize) -> &[usize] {
        &self.parents[node]
    }

    pub fn children_of(&self, node: usize) -> Vec<usize> {
        (0..self.nodes.len())
            .filter(|&c| self.parents[c].contains(&node))
            .collect()
    }

    /// Markov blanket: parents, children, and the children's other parents.
    pub fn markov_blanket(&self, node: usize) -> BTreeSet<usize> {
        let mut blanket: BTreeSet<usize> = self.parents[node].iter().copied().collect();
        for child in self.children_of(node) {
            blanket.insert(child);
            for &co_parent in &self.parents[child] {
                blanket.insert(co_parent);
            }
        }
        blanket.remove(&node);
        blanket
    }

    /// Name-based parent lookup.
    pub fn parents_named(&self, name: &str) -> Result<Vec<String>, BayesNetError> {
        let idx = self.node_index(name)?;
        Ok(self
            .parents_of(idx)
            .iter()
            .map(|&p| self.nodes[p].name.clone())
            .collect())
    }

    /// Name-based Markov blanket lookup.
    pub fn markov_blanket_named(&self, name: &str) -> Result<BTreeSet<String>, BayesNetError> {
        let idx = self.node_index(name)?;
        Ok(self
            .markov_blanket(idx)
            .into_iter()
            .map(|i| self.nodes[i].name.clone())
            .collect())
    }

    /// All edges as (parent, child) index pairs, sorted by name pair.
    pub fn edges(&self) -> Vec<(usize, usize)> {
        let mut edges: Vec<(usize, usize)> = (0..self.nodes.len())
            .flat_map(|c| self.parents[c].iter().map(move |&p| (p, c)))
            .collect();
        edges.sort_by(|a, b| {
            (&self.nodes[a.0].name, &self.nodes[a.1].name)
                .cmp(&(&self.nodes[b.0].name, &self.nodes[b.1].name))
        });
        edges
    }

    /// Kahn topological sort; returns None when a cycle exists. Edges always
    /// respect the ordering, so this succeeds by construction; it exists so
    /// tests can assert acyclicity independently.
    pub fn topological_sort(&self) -> Option<Vec<usize>> {
        let n = self.nodes.len();
        let mut indegree = vec![0usize; n];
        for child in 0..n {
            indegree[child] = self.parents[child].len();
        }
        let mut queue: Vec<usize> = (0..n).filter(|&i| indegree[i] == 0).collect();
        let mut order = Vec::with_capacity(n);
        while let Some(next) = queue.pop() {
            order.push(next);
            for child in self.children_of(next) {
                indegree[child] -= 1;
                if indegree[child] == 0 {
                    queue.push(child);
                }
            }
        }
        (order.len() == n).then_some(order)
    }
}
