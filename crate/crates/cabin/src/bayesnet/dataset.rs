//! Complete-data tabular datasets of discrete labels.

use super::BayesNetError;

/// A table of discrete labels: one named column per variable, no missing
/// entries.
#[derive(Debug, Clone)]
pub struct TraceDataset {
    names: Vec<String>,
    cardinalities: Vec<usize>,
    columns: Vec<Vec<usize>>,
    rows: usize,
}

impl TraceDataset {
    /// Builds a dataset from parallel columns. Every label must lie within
    /// its column's cardinality and all columns must have equal length.
    pub fn new(
        names: Vec<String>,
        cardinalities: Vec<usize>,
        columns: Vec<Vec<usize>>,
    ) -> Result<Self, BayesNetError> {
        if names.len() != columns.len() || names.len() != cardinalities.len() {
            return Err(BayesNetError::InvalidDataset(
                "names, cardinalities, and columns must have equal lengths".into(),
            ));
        }
        let rows = columns.first().map_or(0, Vec::len);
        for ((name, card), col) in names.iter().zip(&cardinalities).zip(&columns) {
            if *card == 0 {
                return Err(BayesNetError::InvalidDataset(format!(
                    "column `{name}` has zero cardinality"
                )));
            }
            if col.len() != rows {
                return Err(BayesNetError::InvalidDataset(format!(
                    "column `{name}` has {} rows, expected {rows}",
                    col.len()
                )));
            }
            if let Some(bad) = col.iter().find(|l| **l >= *card) {
                return Err(BayesNetError::InvalidDataset(format!(
                    "column `{name}` has label {bad} >= cardinality {card}"
                )));
            }
        }
        Ok(Self {
            names,
            cardinalities,
            columns,
            rows,
        })
    }

    pub fn n_rows(&self) -> usize {
        self.rows
    }

    pub fn n_columns(&self) -> usize {
        self.names.len()
    }

    pub fn names(&self) -> &[String] {
        &self.names
    }

    pub fn column_index(&self, name: &str) -> Option<usize> {
        self.names.iter().position(|n| n == name)
    }

    pub fn cardinality(&self, col: usize) -> usize {
        self.cardinalities[col]
    }

    pub fn labels(&self, col: usize) -> &[usize] {
        &self.columns[col]
    }

    /// Empirical mutual information (nats) between two columns.
    pub fn mutual_information(&self, a: usize, b: usize) -> f64 {
        let n = self.rows;
        if n == 0 {
            return 0.0;
        }
        let (ra, rb) = (self.cardinalities[a], self.cardinalities[b]);
        let mut joint = vec![0usize; ra * rb];
        let mut ma = vec![0usize; ra];
        let mut mb = vec![0usize; rb];
        for (&x, &y) in self.columns[a].iter().zip(&self.columns[b]) {
            joint[x * rb + y] += 1;
            ma[x] += 1;
            mb[y] += 1;
        }
        let nf = n as f64;
        let mut mi = 0.0;
        for x in 0..ra {
            for y in 0..rb {
                let nxy = joint[x * rb + y];
                if nxy == 0 {
                    continue;
                }
                let p = nxy as f64 / nf;
                mi += p * (p * nf * nf / (ma[x] as f64 * mb[y] as f64)).ln();
            }
        }
        mi.max(0.0)
    }

    /// Empirical conditional mutual information (nats) between columns `a`
    /// and `b` given the joint configuration of `given`.
    pub fn conditional_mutual_information(&self, a: usize, b: usize, given: &[usize]) -> f64 {
        let n = self.rows;
        if n == 0 {
            return 0.0;
        }
        let (ra, rb) = (self.cardinalities[a], self.cardinalities[b]);
        let rg: usize = given.iter().map(|&g| self.cardinalities[g]).product();
        let mut joint = vec![0usize; ra * rb * rg];
        let mut nag = vec![0usize; ra * rg];
        let mut nbg = vec![0usize; rb * rg];
        let mut ng = vec![0usize; rg];
        for row in 0..n {
            let x = self.columns[a][row];
            let y = self.columns[b][row];
            let mut g = 0usize;
            for &gc in given {
                g = g * self.cardinalities[gc] + self.columns[gc][row];
            }
            joint[(x * rb + y) * rg + g] += 1;
            nag[x * rg + g] += 1;
            nbg[y * rg + g] += 1;
            ng[g] += 1;
        }
        let nf = n as f64;
        let mut cmi = 0.0;
        for x in 0..ra {
            for y in 0..rb {
                for g in 0..rg {
                    let nxyg = joint[(x * rb + y) * rg + g];
                    if nxyg == 0 {
                        continue;
                    }
                    let p = nxyg as f64 / nf;
                    let ratio = (nxyg as f64 * ng[g] as f64)
                        / (nag[x * rg + g] as f64 * nbg[y * rg + g] as f64);
                    cmi += p * ratio.ln();
                }
            }
        }
        cmi.max(0.0)
    }
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
    fn rejects_out_of_range_labels() {
        let err = TraceDataset::new(
            vec!["a".into()],
            vec![2],
            vec![vec![0, 1, 2]],
        );
        assert!(err.is_err());
    }

    #[test]
    fn mi_of_identical_columns_is_entropy() {
        let col = vec![0, 0, 1, 1];
        let d = dataset(&[("a", 2, col.clone()), ("b", 2, col)]);
        let mi = d.mutual_information(0, 1);
        assert!((mi - (2.0f64).ln()).abs() < 1e-12, "mi {mi}");
    }

    #[test]
    fn mi_of_independent_columns_is_small() {
        let a: Vec<usize> = (0..1000).map(|i| i % 2).collect();
        let b: Vec<usize> = (0..1000).map(|i| (i / 2) % 2).collect();
        let d = dataset(&[("a", 2, a), ("b", 2, b)]);
        assert!(d.mutual_information(0, 1) < 1e-6);
    }

    #[test]
    fn cmi_screens_off_mediator() {
        // x -> m (copy) -> y (copy): I(x; y | m) = 0, I(x; y) = ln 2.
        let x: Vec<usize> = (0..500).map(|i| i % 2).collect();
        let d = dataset(&[("x", 2, x.clone()), ("m", 2, x.clone()), ("y", 2, x)]);
        assert!(d.mutual_information(0, 2) > 0.6);
        assert!(d.conditional_mutual_information(0, 2, &[1]) < 1e-12);
    }
}
