//! Exact marginal queries: variable elimination, plus a brute-force joint
//! enumeration that serves as its independent test oracle.

use super::factor::Factor;
use super::model::{BayesianNetworkModel, Evidence};
use super::BayesNetError;

/// Joint state spaces beyond this are refused by [`joint_enumerate`].
pub const ENUMERATION_LIMIT: u64 = 10_000_000;

/// Exact posterior `P(query | evidence)` by variable elimination with the
/// min-degree heuristic.
pub fn infer_marginal(
    model: &BayesianNetworkModel,
    evidence: &Evidence,
    query: &str,
) -> Result<Vec<f64>, BayesNetError> {
    let dag = model.dag();
    let query_idx = dag.node_index(query)?;
    model.check_evidence(evidence)?;
    let r = dag.node(query_idx).cardinality;

    // Conditioning on the query itself is a point mass.
    if let Some(label) = evidence.get(query) {
        let mut out = vec![0.0; r];
        out[label] = 1.0;
        return Ok(out);
    }

    let evidence_idx: Vec<(usize, usize)> = evidence
        .iter()
        .map(|(name, label)| Ok((dag.node_index(name)?, label)))
        .collect::<Result<_, BayesNetError>>()?;

    // One factor per CPT, reduced by the evidence.
    let mut factors: Vec<Factor> = Vec::with_capacity(dag.n_nodes());
    for node in 0..dag.n_nodes() {
        let cpt = model.cpt(node);
        let mut scope: Vec<usize> = cpt.parents.clone();
        scope.push(node);
        let mut factor = Factor::from_fn(
            &scope,
            |v| dag.node(v).cardinality,
            |lookup| {
                let parent_labels: Vec<usize> =
                    cpt.parents.iter().map(|&p| lookup(p)).collect();
                cpt.row(&parent_labels)[lookup(node)]
            },
        );
        for &(var, label) in &evidence_idx {
            factor = factor.reduce(var, label);
        }
        factors.push(factor);
    }

    // Eliminate everything except the query, smallest factor-graph degree
    // first (ties broken by node index).
    let mut to_eliminate: Vec<usize> = {
        let mut vars: Vec<usize> = factors
            .iter()
            .flat_map(|f| f.vars.iter().copied())
            .filter(|&v| v != query_idx)
            .collect();
        vars.sort_unstable();
        vars.dedup();
        vars
    };

    while !to_eliminate.is_empty() {
        let degree = |v: usize| -> usize {
            let mut neighbors: Vec<usize> = factors
                .iter()
                .filter(|f| f.vars.contains(&v))
                .flat_map(|f| f.vars.iter().copied())
                .filter(|&u| u != v)
                .collect();
            neighbors.sort_unstable();
            neighbors.dedup();
            neighbors.len()
        };
        let &victim = to_eliminate
            .iter()
            .min_by_key(|&&v| (degree(v), v))
            .expect("non-empty");
        to_eliminate.retain(|&v| v != victim);

        let (touching, rest): (Vec<Factor>, Vec<Factor>) =
            factors.into_iter().partition(|f| f.vars.contains(&victim));
        let product = touching
            .into_iter()
            .reduce(|a, b| a.multiply(&b))
            .expect("victim appears in at least one factor");
        factors = rest;
        factors.push(product.sum_out(victim));
    }

    let result = factors
        .into_iter()
        .reduce(|a, b| a.multiply(&b))
        .unwrap_or_else(|| Factor::scalar(1.0));

    let mut out = vec![0.0; r];
    if result.vars.is_empty() {
        return Err(BayesNetError::ImpossibleEvidence);
    }
    debug_assert_eq!(result.vars, vec![query_idx]);
    out.copy_from_slice(&result.values);
    normalize(&mut out)?;
    Ok(out)
}

/// Brute-force posterior: sums the factored joint over every complete
/// assignment consistent with the evidence. Independent of the variable
/// elimination path; kept as its oracle.
pub fn joint_enumerate(
    model: &BayesianNetworkModel,
    evidence: &Evidence,
    query: &str,
) -> Result<Vec<f64>, BayesNetError> {
    let dag = model.dag();
    let query_idx = dag.node_index(query)?;
    model.check_evidence(evidence)?;
    let n = dag.n_nodes();

    let states: u128 = dag
        .nodes()
        .iter()
        .map(|s| s.cardinality as u128)
        .product();
    if states > ENUMERATION_LIMIT as u128 {
        return Err(BayesNetError::StateSpaceTooLarge {
            states,
            limit: ENUMERATION_LIMIT,
        });
    }

    let fixed: Vec<Option<usize>> = (0..n)
        .map(|idx| evidence.get(&dag.node(idx).name))
        .collect();

    let r = dag.node(query_idx).cardinality;
    let mut out = vec![0.0; r];
    let mut assignment = vec![0usize; n];
    'outer: loop {
        let consistent = fixed
            .iter()
            .zip(&assignment)
            .all(|(f, a)| f.is_none_or(|v| v == *a));
        if consistent {
            let mut p = 1.0;
            for node in 0..n {
                let cpt = model.cpt(node);
                let parent_labels: Vec<usize> =
                    cpt.parents.iter().map(|&q| assignment[q]).collect();
                p *= cpt.row(&parent_labels)[assignment[node]];
            }
            out[assignment[query_idx]] += p;
        }
        // Mixed-radix increment, last node fastest.
        for i in (0..n).rev() {
            assignment[i] += 1;
            if assignment[i] < dag.node(i).cardinality {
                continue 'outer;
            }
            assignment[i] = 0;
        }
        break;
    }
    normalize(&mut out)?;
    Ok(out)
}

fn normalize(values: &mut [f64]) -> Result<(), BayesNetError> {
    let total: f64 = values.iter().sum();
    if !(total > 0.0) || !total.is_finite() {
        return Err(BayesNetError::ImpossibleEvidence);
    }
    for v in values.iter_mut() {
        *v /= total;
    }
    Ok(())
}
