//! Exact sparse row reduction over the rationals.

use std::collections::{BTreeMap, HashMap};

use num_traits::{One, Zero};

use crate::poly::{Monomial, Polynomial, Rational};

/// Sparse vector as `(column, value)` pairs sorted by column, no zeros.
pub type SparseRow = Vec<(usize, Rational)>;

/// Incrementally built row-echelon form.
#[derive(Clone, Debug, Default)]
pub struct Echelon {
    /// Keyed by pivot column; each row has leading entry 1 at its pivot.
    rows: BTreeMap<usize, SparseRow>,
}

fn axpy(a: &[(usize, Rational)], b: &[(usize, Rational)], s: &Rational) -> SparseRow {
    let mut out = Vec::with_capacity(a.len() + b.len());
    let (mut i, mut j) = (0, 0);
    while i < a.len() || j < b.len() {
        if j == b.len() || (i < a.len() && a[i].0 < b[j].0) {
            out.push(a[i].clone());
            i += 1;
        } else if i == a.len() || b[j].0 < a[i].0 {
            out.push((b[j].0, &b[j].1 * s));
            j += 1;
        } else {
            let v = &a[i].1 + &b[j].1 * s;
            if !v.is_zero() {
                out.push((a[i].0, v));
            }
            i += 1;
            j += 1;
        }
    }
    out
}

impl Echelon {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn rank(&self) -> usize {
        self.rows.len()
    }

    /// Eliminate every pivot column from `row`.
    pub fn reduce(&self, mut row: SparseRow) -> SparseRow {
        let mut i = 0;
        while i < row.len() {
            if let Some(p) = self.rows.get(&row[i].0) {
                let s = -row[i].1.clone();
                let (head, tail) = row.split_at(i);
                let mut next = head.to_vec();
                next.extend(axpy(tail, p, &s));
                row = next;
            } else {
                i += 1;
            }
        }
        row
    }

    /// Add `row` to the span; returns whether it was independent.
    pub fn insert(&mut self, row: SparseRow) -> bool {
        let r = self.reduce(row);
        match r.first() {
            None => false,
            Some((col, lead)) => {
                let col = *col;
                let inv = lead.recip();
                let r: SparseRow = if inv.is_one() {
                    r
                } else {
                    r.into_iter().map(|(c, v)| (c, v * &inv)).collect()
                };
                self.rows.insert(col, r);
                true
            }
        }
    }

    pub fn contains(&self, row: SparseRow) -> bool {
        self.reduce(row).is_empty()
    }
}

/// Assigns column indices to monomials on first sight.
#[derive(Clone, Debug, Default)]
pub struct Coordinates {
    index: HashMap<Monomial, usize>,
}

impl Coordinates {
    pub fn new() -> Self {
        Self::default()
    }

    pub fn len(&self) -> usize {
        self.index.len()
    }

    pub fn is_empty(&self) -> bool {
        self.index.is_empty()
    }

    /// Coordinates of `p`, shifted by `offset`.
    pub fn row(&mut self, p: &Polynomial, offset: usize) -> SparseRow {
        let mut row: SparseRow = p
            .terms()
            .iter()
            .map(|(m, c)| {
                let next = self.index.len();
                (*self.index.entry(m.clone()).or_insert(next) + offset, c.clone())
            })
            .collect();
        row.sort_by_key(|e| e.0);
        row
    }
}

/// Rank of a list of polynomials as vectors in their common coefficient space.
pub fn rank(polys: &[Polynomial]) -> usize {
    let mut coords = Coordinates::new();
    let mut ech = Echelon::new();
    for p in polys {
        ech.insert(coords.row(p, 0));
    }
    ech.rank()
}

/// Indices of a maximal independent subset, chosen greedily in input order.
pub fn independent_subset(polys: &[Polynomial]) -> Vec<usize> {
    let mut coords = Coordinates::new();
    let mut ech = Echelon::new();
    (0..polys.len())
        .filter(|&i| ech.insert(coords.row(&polys[i], 0)))
        .collect()
}

/// Concatenate two sparse rows, shifting the second by `offset`.
pub fn concat(a: SparseRow, b: SparseRow, offset: usize) -> SparseRow {
    let mut out = a;
    out.extend(b.into_iter().map(|(c, v)| (c + offset, v)));
    out.sort_by_key(|e| e.0);
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::poly::rat;

    fn row(v: &[(usize, i64)]) -> SparseRow {
        v.iter().map(|&(c, x)| (c, rat(x))).collect()
    }

    #[test]
    fn rank_of_small_matrix() {
        let mut e = Echelon::new();
        assert!(e.insert(row(&[(0, 1), (1, 2)])));
        assert!(e.insert(row(&[(1, 1), (2, 1)])));
        assert!(!e.insert(row(&[(0, 1), (1, 3), (2, 1)])));
        assert!(!e.insert(Vec::new()));
        assert!(e.insert(row(&[(2, 5)])));
        assert_eq!(e.rank(), 3);
    }

    #[test]
    fn membership_in_span() {
        let mut e = Echelon::new();
        e.insert(row(&[(3, 2), (5, 4)]));
        assert!(e.contains(row(&[(3, -1), (5, -2)])));
        assert!(!e.contains(row(&[(5, 1)])));
    }
}
