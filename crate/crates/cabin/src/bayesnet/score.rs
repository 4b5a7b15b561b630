//! Cooper-Herskovits family score in log space.

use std::collections::HashMap;

use super::dataset::TraceDataset;
use super::BayesNetError;

/// Cumulative log-factorial table: `ln_factorial(m) = ln(m!)`.
///
/// Every gamma argument in the score is a small positive integer, so a table
/// of exact `ln(m!)` sums replaces a general log-gamma routine.
pub(crate) struct LnFactorial {
    table: Vec<f64>,
}

impl LnFactorial {
    pub fn up_to(max: usize) -> Self {
        let mut table = Vec::with_capacity(max + 1);
        table.push(0.0);
        let mut acc = 0.0;
        for m in 1..=max {
            acc += (m as f64).ln();
            table.push(acc);
        }
        Self { table }
    }

    #[inline]
    pub fn get(&self, m: usize) -> f64 {
        self.table[m]
    }

    /// `ln Gamma(m)` for integer `m >= 1`, i.e. `ln((m-1)!)`.
    #[inline]
    pub fn ln_gamma_int(&self, m: usize) -> f64 {
        self.get(m - 1)
    }
}

/// Log Cooper-Herskovits score of the family `(node | parents)`:
///
/// `sum_j [ lnG(r) - lnG(N_ij + r) + sum_k lnG(N_ijk + 1) ]`
///
/// where `j` ranges over parent configurations, `k` over node values, and
/// unobserved configurations contribute zero.
pub fn ch_score(data: &TraceDataset, node: usize, parents: &[usize]) -> f64 {
    let lf = LnFactorial::up_to(data.n_rows() + data.cardinality(node));
    ch_score_with_table(data, node, parents, &lf)
}

pub(crate) fn ch_score_with_table(
    data: &TraceDataset,
    node: usize,
    parents: &[usize],
    lf: &LnFactorial,
) -> f64 {
    debug_assert!(!parents.contains(&node), "node cannot be its own parent");
    let r = data.cardinality(node);
    let node_labels = data.labels(node);

    // Counts per observed parent configuration (mixed-radix key, first
    // parent most significant).
    let mut counts: HashMap<u64, Vec<u32>> = HashMap::new();
    for row in 0..data.n_rows() {
        let mut key = 0u64;
        for &p in parents {
            key = key
                .checked_mul(data.cardinality(p) as u64)
                .and_then(|k| k.checked_add(data.labels(p)[row] as u64))
                .expect("parent configuration space exceeds u64");
        }
        counts.entry(key).or_insert_with(|| vec![0; r])[node_labels[row]] += 1;
    }

    // Deterministic summation order.
    let mut keys: Vec<u64> = counts.keys().copied().collect();
    keys.sort_unstable();

    let mut score = 0.0;
    for key in keys {
        let nijk = &counts[&key];
        let nij: u32 = nijk.iter().sum();
        score += lf.ln_gamma_int(r) - lf.ln_gamma_int(nij as usize + r);
        for &c in nijk {
            score += lf.ln_gamma_int(c as usize + 1);
        }
    }
    score
}

/// Name-based wrapper over [`ch_score`].
pub fn ch_score_named(
    data: &TraceDataset,
    node: &str,
    parents: &[&str],
) -> Result<f64, BayesNetError> {
    let node_idx = data
        .column_index(node)
        .ok_or_else(|| BayesNetError::MissingColumn(node.into()))?;
    let mut parent_idx = Vec::with_capacity(parents.len());
    for p in parents {
        let idx = data
            .column_index(p)
            .ok_or_else(|| BayesNetError::MissingColumn((*p).into()))?;
        if idx == node_idx {
            return Err(BayesNetError::InvalidDataset(format!(
                "`{node}` cannot be its own parent"
            )));
        }
        parent_idx.push(idx);
    }
    Ok(ch_score(data, node_idx, &parent_idx))
}

#[cfg(test)]
mod tests {
    use super::*;

    fn dataset(cols: &[(&str, usize, Vec<usize>)]) -> TraceDataset {
        TraceDataset::new(
            cols.iter().map(|(n, _, _)| n.to_string()).collect(),
            cols.iter().map(|(_, c, _)| *c).collect(),
            cols.iter().map(|(_, _, v)| v.clone()).collect(),
        )
        .unwrap()
    }

    #[test]
    fn empty_dataset_scores_zero() {
        let d = dataset(&[("a", 2, vec![]), ("b", 3, vec![])]);
        assert_eq!(ch_score(&d, 0, &[]), 0.0);
        assert_eq!(ch_score(&d, 0, &[1]), 0.0);
    }

    #[test]
    fn parentless_binary_counts_3_1() {
        // r = 2, counts (3, 1): score = ln(1! * 3! * 1! / 5!) = ln(6/120).
        let d = dataset(&[("a", 2, vec![0, 0, 0, 1])]);
        let score = ch_score(&d, 0, &[]);
        assert!((score - (0.05f64).ln()).abs() < 1e-12, "score {score}");
    }

    #[test]
    fn perfect_predictor_beats_no_parent() {
        let n = 1000;
        let a: Vec<usize> = (0..n).map(|i| i % 2).collect();
        let b = a.clone();
        let d = dataset(&[("a", 2, a), ("b", 2, b)]);
        let without = ch_score(&d, 1, &[]);
        let with = ch_score(&d, 1, &[0]);
        assert!(with > without, "with={with} without={without}");
    }

    #[test]
    fn score_depends_only_on_family_columns() {
        let a = vec![0, 1, 0, 1, 1, 0];
        let b = vec![1, 1, 0, 0, 1, 0];
        let noise1 = vec![0, 2, 1, 2, 0, 1];
        let noise2 = vec![2, 0, 2, 1, 1, 0];
        let d1 = dataset(&[
            ("a", 2, a.clone()),
            ("b", 2, b.clone()),
            ("u", 3, noise1.clone()),
            ("v", 3, noise2.clone()),
        ]);
        // Swap the unrelated columns; the family score must be bit-identical.
        let d2 = dataset(&[
            ("a", 2, a),
            ("b", 2, b),
            ("u", 3, noise2),
            ("v", 3, noise1),
        ]);
        let s1 = ch_score(&d1, 1, &[0]);
        let s2 = ch_score(&d2, 1, &[0]);
        assert_eq!(s1.to_bits(), s2.to_bits());
    }

    #[test]
    fn named_wrapper_validates_columns() {
        let d = dataset(&[("a", 2, vec![0, 1])]);
        assert!(ch_score_named(&d, "zzz", &[]).is_err());
        assert!(ch_score_named(&d, "a", &["a"]).is_err());
        assert!(ch_score_named(&d, "a", &[]).is_ok());
    }
}
