//! Table factors for exact inference.
//!
//! A factor holds a value per joint assignment of its scope. Scopes are kept
//! sorted by node index and values are laid out row-major with the last scope
//! variable varying fastest.

#[derive(Debug, Clone)]
pub(crate) struct Factor {
    /// Scope as node indices, strictly ascending.
    pub vars: Vec<usize>,
    /// Cardinality per scope variable.
    pub cards: Vec<usize>,
    pub values: Vec<f64>,
}

impl Factor {
    pub fn scalar(value: f64) -> Self {
        Self {
            vars: vec![],
            cards: vec![],
            values: vec![value],
        }
    }

    /// Builds a factor over `vars` (any order) by evaluating `f` on every
    /// assignment; `vars` are sorted into canonical order internally.
    pub fn from_fn(
        vars: &[usize],
        cards_of: impl Fn(usize) -> usize,
        f: impl Fn(&dyn Fn(usize) -> usize) -> f64,
    ) -> Self {
        let mut sorted: Vec<usize> = vars.to_vec();
        sorted.sort_unstable();
        sorted.dedup();
        let cards: Vec<usize> = sorted.iter().map(|&v| cards_of(v)).collect();
        let size: usize = cards.iter().product();
        let mut values = Vec::with_capacity(size);
        let mut assignment = vec![0usize; sorted.len()];
        for flat in 0..size {
            decode(flat, &cards, &mut assignment);
            let lookup = |var: usize| -> usize {
                let pos = sorted.binary_search(&var).expect("var in scope");
                assignment[pos]
            };
            values.push(f(&lookup));
        }
        Self {
            vars: sorted,
            cards,
            values,
        }
    }

    /// Fixes `var = label`, dropping it from the scope.
    pub fn reduce(&self, var: usize, label: usize) -> Self {
        let Ok(pos) = self.vars.binary_search(&var) else {
            return self.clone();
        };
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        vars.remove(pos);
        cards.remove(pos);
        let size: usize = cards.iter().product();
        let mut values = Vec::with_capacity(size.max(1));
        let mut reduced_assignment = vec![0usize; vars.len()];
        let mut full_assignment = vec![0usize; self.vars.len()];
        for flat in 0..size.max(1) {
            decode(flat, &cards, &mut reduced_assignment);
            for (i, v) in full_assignment.iter_mut().enumerate() {
                *v = match i.cmp(&pos) {
                    std::cmp::Ordering::Less => reduced_assignment[i],
                    std::cmp::Ordering::Equal => label,
                    std::cmp::Ordering::Greater => reduced_assignment[i - 1],
                };
            }
            values.push(self.values[encode(&full_assignment, &self.cards)]);
        }
        Self { vars, cards, values }
    }

    pub fn multiply(&self, other: &Factor) -> Self {
        let mut vars: Vec<usize> = self.vars.iter().chain(&other.vars).copied().collect();
        vars.sort_unstable();
        vars.dedup();
        let card_of = |v: usize| -> usize {
            if let Ok(p) = self.vars.binary_search(&v) {
                self.cards[p]
            } else {
                let p = other.vars.binary_search(&v).unwrap();
                other.cards[p]
            }
        };
        let cards: Vec<usize> = vars.iter().map(|&v| card_of(v)).collect();
        let size: usize = cards.iter().product::<usize>().max(1);
        let mut values = Vec::with_capacity(size);
        let mut assignment = vec![0usize; vars.len()];
        for flat in 0..size {
            decode(flat, &cards, &mut assignment);
            let project = |f: &Factor| -> f64 {
                let idx: Vec<usize> = f
                    .vars
                    .iter()
                    .map(|v| assignment[vars.binary_search(v).unwrap()])
                    .collect();
                f.values[encode(&idx, &f.cards)]
            };
            values.push(project(self) * project(other));
        }
        Self { vars, cards, values }
    }

    /// Marginalizes `var` out of the scope.
    pub fn sum_out(&self, var: usize) -> Self {
        let Ok(pos) = self.vars.binary_search(&var) else {
            return self.clone();
        };
        let mut vars = self.vars.clone();
        let mut cards = self.cards.clone();
        let var_card = cards[pos];
        vars.remove(pos);
        cards.remove(pos);
        let size: usize = cards.iter().product::<usize>().max(1);
        let mut values = vec![0.0; size];
        let mut reduced = vec![0usize; vars.len()];
        let mut full = vec![0usize; self.vars.len()];
        for (flat, slot) in values.iter_mut().enumerate() {
            decode(flat, &cards, &mut reduced);
            for label in 0..var_card {
                for (i, v) in full.iter_mut().enumerate() {
                    *v = match i.cmp(&pos) {
                        std::cmp::Ordering::Less => reduced[i],
                        std::cmp::Ordering::Equal => label,
                        std::cmp::Ordering::Greater => reduced[i - 1],
                    };
                }
                *slot += self.values[encode(&full, &self.cards)];
            }
        }
        Self { vars, cards, values }
    }
}

#[inline]
fn encode(assignment: &[usize], cards: &[usize]) -> usize {
    let mut idx = 0;
    for (a, c) in assignment.iter().zip(cards) {
        idx = idx * c + a;
    }
    idx
}

#[inline]
fn decode(mut flat: usize, cards: &[usize], out: &mut [usize]) {
    for i in (0..cards.len()).rev() {
        out[i] = flat % cards[i];
        flat /= cards[i];
    }
}
