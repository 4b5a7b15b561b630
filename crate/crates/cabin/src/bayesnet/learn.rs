//! Node ordering, K2 structure search, and Dirichlet parameter learning.

use super::dag::{Dag, NodeSpec};
use super::dataset::TraceDataset;
use super::score::{ch_score_with_table, LnFactorial};
use super::{BayesNetError, Cpt};

/// Default cap on parents per node.
pub const DEFAULT_MAX_PARENTS: usize = 3;

/// Default Dirichlet smoothing pseudo-count.
pub const DEFAULT_ALPHA: f64 = 1.0;

/// Orders contexts by decreasing empirical mutual information with the QoS
/// column (ties broken lexicographically by name) and places the QoS column
/// last, so every context is eligible as its parent under K2.
pub fn order_nodes(data: &TraceDataset, qos_node: &str) -> Result<Vec<String>, BayesNetError> {
    let qos_idx = data
        .column_index(qos_node)
        .ok_or_else(|| BayesNetError::MissingColumn(qos_node.into()))?;
    if data.n_columns() < 2 {
        return Err(BayesNetError::InvalidDataset(
            "ordering needs at least two columns".into(),
        ));
    }
    let mut contexts: Vec<(f64, &String)> = (0..data.n_columns())
        .filter(|&c| c != qos_idx)
        .map(|c| (data.mutual_information(c, qos_idx), &data.names()[c]))
        .collect();
    contexts.sort_by(|(mi_a, name_a), (mi_b, name_b)| {
        mi_b.partial_cmp(mi_a)
            .unwrap()
            .then_with(|| name_a.cmp(name_b))
    });
    let mut ordering: Vec<String> = contexts.into_iter().map(|(_, n)| n.clone()).collect();
    ordering.push(qos_node.to_string());
    Ok(ordering)
}

/// K2: for every node in order, greedily adds the predecessor parent that
/// most increases the Cooper-Herskovits score, stopping when no addition
/// improves it or `max_parents` is reached.
pub fn k2_learn(
    data: &TraceDataset,
    ordering: &[String],
    max_parents: usize,
) -> Result<Dag, BayesNetError> {
    if max_parents == 0 {
        return Err(BayesNetError::InvalidDataset(
            "max_parents must be at least 1".into(),
        ));
    }
    let mut order_idx = Vec::with_capacity(ordering.len());
    for name in ordering {
        order_idx.push(
            data.column_index(name)
                .ok_or_else(|| BayesNetError::MissingColumn(name.clone()))?,
        );
    }
    {
        let mut seen = vec![false; data.n_columns()];
        for &i in &order_idx {
            seen[i] = true;
        }
        if order_idx.len() != data.n_columns() || seen.iter().any(|s| !s) {
            return Err(BayesNetError::InvalidOrdering(
                "ordering must be a permutation of the dataset columns".into(),
            ));
        }
    }

    let nodes: Vec<NodeSpec> = data
        .names()
        .iter()
        .enumerate()
        .map(|(i, name)| NodeSpec::context(name.clone(), data.cardinality(i), false))
        .collect();
    let mut dag = Dag::new(nodes, order_idx.clone())?;

    let max_card = (0..data.n_columns())
        .map(|c| data.cardinality(c))
        .max()
        .unwrap_or(1);
    let lf = LnFactorial::up_to(data.n_rows() + max_card);

    for (pos, &node) in order_idx.iter().enumerate() {
        let mut parents: Vec<usize> = Vec::new();
        let mut current = ch_score_with_table(data, node, &parents, &lf);
        while parents.len() < max_parents {
            let mut best: Option<(f64, usize)> = None;
            for &candidate in &order_idx[..pos] {
                if parents.contains(&candidate) {
                    continue;
                }
                let mut trial = parents.clone();
                trial.push(candidate);
                let score = ch_score_with_table(data, node, &trial, &lf);
                // Strict improvement; earlier predecessors win ties.
                if score > current && best.is_none_or(|(s, _)| score > s) {
                    best = Some((score, candidate));
                }
            }
            match best {
                Some((score, candidate)) => {
                    parents.push(candidate);
                    current = score;
                }
                None => break,
            }
        }
        for parent in parents {
            dag.add_edge(parent, node)?;
        }
    }
    Ok(dag)
}

/// Dirichlet-smoothed CPT estimation: `theta_ijk = (N_ijk + alpha) /
/// (N_ij + r * alpha)`. Unseen parent configurations get the uniform row.
pub fn learn_parameters(
    dag: &Dag,
    data: &TraceDataset,
    alpha: f64,
) -> Result<Vec<Cpt>, BayesNetError> {
    assert!(alpha > 0.0, "smoothing pseudo-count must be positive");
    let mut cpts = Vec::with_capacity(dag.n_nodes());
    for node in 0..dag.n_nodes() {
        let name = &dag.node(node).name;
        let col = data
            .column_index(name)
            .ok_or_else(|| BayesNetError::MissingColumn(name.clone()))?;
        let r = data.cardinality(col);
        let parents = dag.parents_of(node).to_vec();
        let parent_cols: Vec<usize> = parents
            .iter()
            .map(|&p| {
                data.column_index(&dag.node(p).name)
                    .ok_or_else(|| BayesNetError::MissingColumn(dag.node(p).name.clone()))
            })
            .collect::<Result<_, _>>()?;
        let parent_cards: Vec<usize> =
            parent_cols.iter().map(|&c| data.cardinality(c)).collect();
        let configs: usize = parent_cards.iter().product();
        if configs == 0 || configs.checked_mul(r).is_none() {
            return Err(BayesNetError::InvalidDataset(format!(
                "parent configuration space for `{name}` is invalid"
            )));
        }

        let mut counts = vec![0u32; configs * r];
        for row in 0..data.n_rows() {
            let mut j = 0usize;
            for (&pc, &card) in parent_cols.iter().zip(&parent_cards) {
                j = j * card + data.labels(pc)[row];
            }
            counts[j * r + data.labels(col)[row]] += 1;
        }

        let mut rows = Vec::with_capacity(configs);
        for j in 0..configs {
            let nij: u32 = counts[j * r..(j + 1) * r].iter().sum();
            let denom = nij as f64 + r as f64 * alpha;
            rows.push(
                (0..r)
                    .map(|k| (counts[j * r + k] as f64 + alpha) / denom)
                    .collect::<Vec<f64>>(),
            );
        }
        cpts.push(Cpt {
            node,
            parents,
            parent_cards,
            cardinality: r,
            rows,
        });
    }
    Ok(cpts)
}

#[cfg(test)]
mod tests {
    use super::*;
    use rand::Rng;
    use rand::SeedableRng;
    use rand_chacha::ChaCha8Rng;

    fn dataset(cols: &[(&str, usize, Vec<usize>)]) -> TraceDataset {
        TraceDataset::new(
            cols.iter().map(|(n, _, _)| n.to_string()).collect(),
            cols.iter().map(|(_, c, _)| *c).collect(),
            cols.iter().map(|(_, _, v)| v.clone()).collect(),
        )
        .unwrap()
    }

    /// Draws labels for a 3-node chain a -> b -> c where each child copies
    /// its parent with probability `fidelity`.
    fn chain_data(seed: u64, n: usize, fidelity: f64) -> TraceDataset {
        let mut rng = ChaCha8Rng::seed_from_u64(seed);
        let mut a = Vec::with_capacity(n);
        let mut b = Vec::with_capacity(n);
        let mut c = Vec::with_capacity(n);
        for _ in 0..n {
            let av = rng.random_range(0..3usize);
            let bv = if rng.random::<f64>() < fidelity {
                av
            } else {
                rng.random_range(0..3usize)
            };
            let cv = if rng.random::<f64>() < fidelity {
                bv
            } else {
                rng.random_range(0..3usize)
            };
            a.push(av);
            b.push(bv);
            c.push(cv);
        }
        dataset(&[("a", 3, a), ("b", 3, b), ("c", 3, c)])
    }

    #[test]
    fn ordering_puts_informative_context_first() {
        let mut rng = ChaCha8Rng::seed_from_u64(5);
        let n = 2000;
        let qos: Vec<usize> = (0..n).map(|_| rng.random_range(0..2usize)).collect();
        let informative = qos.clone(); // deterministic function of the qos label
        let noise: Vec<usize> = (0..n).map(|_| rng.random_range(0..2usize)).collect();
        let d = dataset(&[("noise", 2, noise), ("informative", 2, informative), ("q", 2, qos)]);
        let order = order_nodes(&d, "q").unwrap();
        assert_eq!(order, vec!["informative", "noise", "q"]);
    }

    #[test]
    fn single_context_order_is_fixed() {
        let d = dataset(&[("c", 2, vec![0, 1]), ("q", 2, vec![1, 0])]);
        assert_eq!(order_nodes(&d, "q").unwrap(), vec!["c", "q"]);
    }

    #[test]
    fn duplicate_columns_tie_break_by_name() {
        let col = vec![0, 1, 0, 1, 1, 0, 0, 1];
        let q = vec![0, 1, 1, 1, 1, 0, 0, 0];
        let d = dataset(&[("beta", 2, col.clone()), ("alpha", 2, col), ("q", 2, q)]);
        let order = order_nodes(&d, "q").unwrap();
        assert_eq!(order, vec!["alpha", "beta", "q"]);
    }

    #[test]
    fn missing_qos_column_is_an_error() {
        let d = dataset(&[("a", 2, vec![0])]);
        assert!(matches!(
            order_nodes(&d, "zzz"),
            Err(BayesNetError::MissingColumn(_))
        ));
    }

    #[test]
    fn single_node_learns_no_edges() {
        let d = dataset(&[("a", 2, vec![0, 1, 0])]);
        let dag = k2_learn(&d, &["a".into()], 2).unwrap();
        assert!(dag.edges().is_empty());
    }

    /// Exhaustive order-consistent DAG search: enumerate every parent-set
    /// combination allowed by the ordering and return the best total score.
    fn exhaustive_best_edges(data: &TraceDataset, order: &[usize], max_parents: usize) -> Vec<(usize, usize)> {
        fn subsets(pool: &[usize], max: usize) -> Vec<Vec<usize>> {
            let mut out = vec![vec![]];
            for &p in pool {
                let mut extended = Vec::new();
                for s in &out {
                    if s.len() < max {
                        let mut t = s.clone();
                        t.push(p);
                        extended.push(t);
                    }
                }
                out.extend(extended);
            }
            out
        }
        let mut edges = Vec::new();
        for (pos, &node) in order.iter().enumerate() {
            let mut best_score = f64::NEG_INFINITY;
            let mut best_set: Vec<usize> = Vec::new();
            for set in subsets(&order[..pos], max_parents) {
                let score = super::super::score::ch_score(data, node, &set);
                if score > best_score {
                    best_score = score;
                    best_set = set;
                }
            }
            for p in best_set {
                edges.push((p, node));
            }
        }
        edges.sort_unstable();
        edges
    }

    #[test]
    fn chain_recovery_matches_exhaustive_oracle() {
        let mut exact = 0;
        for seed in 0..5 {
            let d = chain_data(seed, 5000, 0.8);
            let dag = k2_learn(&d, &["a".into(), "b".into(), "c".into()], 2).unwrap();
            let mut got = dag.edges();
            got.sort_unstable();
            let oracle = exhaustive_best_edges(&d, &[0, 1, 2], 2);
            assert_eq!(got, oracle, "seed {seed}: K2 differs from exhaustive search");
            if got == vec![(0, 1), (1, 2)] {
                exact += 1;
            }
        }
        assert!(exact >= 4, "recovered chain in {exact}/5 seeds");
    }

    #[test]
    fn v_structure_is_recovered() {
        let mut rng = ChaCha8Rng::seed_from_u64(42);
        let n = 5000;
        let mut a = Vec::new();
        let mut b = Vec::new();
        let mut c = Vec::new();
        for _ in 0..n {
            let av = rng.random_range(0..3usize);
            let bv = rng.random_range(0..3usize);
            // Saturating sum keeps the child marginally dependent on each
            // parent, which a greedy learner needs for its first pick.
            let cv = if rng.random::<f64>() < 0.8 {
                (av + bv).min(2)
            } else {
                rng.random_range(0..3usize)
            };
            a.push(av);
            b.push(bv);
            c.push(cv);
        }
        let d = dataset(&[("a", 3, a), ("b", 3, b), ("c", 3, c)]);
        let dag = k2_learn(&d, &["a".into(), "b".into(), "c".into()], 2).unwrap();
        let mut got = dag.edges();
        got.sort_unstable();
        assert_eq!(got, vec![(0, 2), (1, 2)]);
    }

    #[test]
    fn learned_dag_is_order_consistent_and_acyclic() {
        let d = chain_data(9, 2000, 0.7);
        let dag = k2_learn(&d, &["a".into(), "b".into(), "c".into()], 2).unwrap();
        assert!(dag.topological_sort().is_some());
        for (p, c) in dag.edges() {
            let pos = |n| dag.ordering().iter().position(|&x| x == n).unwrap();
            assert!(pos(p) < pos(c));
        }
    }

    #[test]
    fn parameters_closed_form() {
        let d = dataset(&[("a", 2, vec![0, 0, 0, 0, 0, 0, 0, 1, 1, 1])]);
        let dag = k2_learn(&d, &["a".into()], 1).unwrap();
        let cpts = learn_parameters(&dag, &d, 1.0).unwrap();
        let row = &cpts[0].rows[0];
        assert!((row[0] - 8.0 / 12.0).abs() < 1e-12);
        assert!((row[1] - 4.0 / 12.0).abs() < 1e-12);
    }

    #[test]
    fn unseen_configuration_gets_uniform_row() {
        // b has parent a, but a = 1 never occurs.
        let d = dataset(&[("a", 2, vec![0, 0, 0]), ("b", 4, vec![1, 2, 3])]);
        let mut dag = Dag::new(
            vec![NodeSpec::context("a", 2, false), NodeSpec::context("b", 4, false)],
            vec![0, 1],
        )
        .unwrap();
        dag.add_edge(0, 1).unwrap();
        let cpts = learn_parameters(&dag, &d, 1.0).unwrap();
        assert_eq!(cpts[1].rows[1], vec![0.25, 0.25, 0.25, 0.25]);
    }

    #[test]
    fn tiny_alpha_approaches_empirical_frequencies() {
        let d = dataset(&[("a", 3, vec![0, 0, 1, 1, 1, 2, 2, 2, 2, 2])]);
        let dag = k2_learn(&d, &["a".into()], 1).unwrap();
        let cpts = learn_parameters(&dag, &d, 1e-12).unwrap();
        // Direct frequency-counting oracle.
        let freq = [0.2, 0.3, 0.5];
        for (got, want) in cpts[0].rows[0].iter().zip(freq) {
            assert!((got - want).abs() < 1e-9, "{got} vs {want}");
        }
    }

    #[test]
    fn zero_row_dataset_learns_uniform_edgeless_model() {
        let d = dataset(&[("a", 2, vec![]), ("b", 3, vec![])]);
        let order = order_nodes(&d, "b").unwrap();
        let dag = k2_learn(&d, &order, 3).unwrap();
        assert!(dag.edges().is_empty());
        let cpts = learn_parameters(&dag, &d, 1.0).unwrap();
        let b = dag.node_index("b").unwrap();
        assert_eq!(cpts[b].rows[0].len(), 3);
        for v in &cpts[b].rows[0] {
            assert!((v - 1.0 / 3.0).abs() < 1e-12);
        }
    }

    #[test]
    fn cpt_rows_are_stochastic() {
        let d = chain_data(3, 500, 0.8);
        let dag = k2_learn(&d, &["a".into(), "b".into(), "c".into()], 2).unwrap();
        for cpt in learn_parameters(&dag, &d, 1.0).unwrap() {
            for row in &cpt.rows {
                let sum: f64 = row.iter().sum();
                assert!((sum - 1.0).abs() < 1e-9);
                assert!(row.iter().all(|p| *p > 0.0 && *p < 1.0));
            }
        }
    }
}
