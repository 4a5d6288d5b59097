//! Exact rational sparse linear algebra: reduced row echelon form and
//! nullspace bases for homogeneous systems.

use std::collections::BTreeMap;

use num_rational::BigRational;
use num_traits::{One, Zero};

/// A sparse matrix over exact rationals. Absent entries are zero; stored
/// entries are nonzero.
#[derive(Clone, Debug, PartialEq, Eq)]
pub struct RatMatrix {
    rows: usize,
    cols: usize,
    entries: BTreeMap<(usize, usize), BigRational>,
}

impl RatMatrix {
    pub fn new(rows: usize, cols: usize) -> Self {
        RatMatrix {
            rows,
            cols,
            entries: BTreeMap::new(),
        }
    }

    pub fn from_rows(rows: &[Vec<BigRational>]) -> Self {
        let cols = rows.first().map(|r| r.len()).unwrap_or(0);
        let mut m = RatMatrix::new(rows.len(), cols);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), cols, "ragged row");
            for (j, v) in row.iter().enumerate() {
                m.set(i, j, v.clone());
            }
        }
        m
    }

    /// Builds from sparse rows given as (column, value) pairs.
    pub fn from_sparse_rows(rows: &[Vec<(usize, BigRational)>], cols: usize) -> Self {
        let mut m = RatMatrix::new(rows.len(), cols);
        for (i, row) in rows.iter().enumerate() {
            for (j, v) in row {
                m.set(i, *j, v.clone());
            }
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, i: usize, j: usize) -> BigRational {
        assert!(i < self.rows && j < self.cols, "index out of bounds");
        self.entries
            .get(&(i, j))
            .cloned()
            .unwrap_or_else(BigRational::zero)
    }

    pub fn set(&mut self, i: usize, j: usize, v: BigRational) {
        assert!(i < self.rows && j < self.cols, "index out of bounds");
        if v.is_zero() {
            self.entries.remove(&(i, j));
        } else {
            self.entries.insert((i, j), v);
        }
    }

    pub fn entries(&self) -> impl Iterator<Item = (&(usize, usize), &BigRational)> {
        self.entries.iter()
    }

    pub fn nonzero_count(&self) -> usize {
        self.entries.len()
    }

    /// Matrix-vector product.
    pub fn mul_vec(&self, v: &[BigRational]) -> Vec<BigRational> {
        assert_eq!(v.len(), self.cols, "dimension mismatch");
        let mut out = vec![BigRational::zero(); self.rows];
        for ((i, j), a) in &self.entries {
            out[*i] += a * &v[*j];
        }
        out
    }

    fn to_sparse_rows(&self) -> Vec<BTreeMap<usize, BigRational>> {
        let mut rows: Vec<BTreeMap<usize, BigRational>> = vec![BTreeMap::new(); self.rows];
        for ((i, j), v) in &self.entries {
            rows[*i].insert(*j, v.clone());
        }
        rows
    }
}

/// Result of a reduction to reduced row echelon form.
#[derive(Clone, Debug)]
pub struct Rref {
    pub matrix: RatMatrix,
    /// Pivot columns, strictly increasing; the rank is their count.
    pub pivots: Vec<usize>,
}

impl Rref {
    pub fn rank(&self) -> usize {
        self.pivots.len()
    }
}

/// Approximate operand size used by the pivot rule.
fn bit_size(v: &BigRational) -> u64 {
    v.numer().bits() + v.denom().bits()
}

/// Exact reduced row echelon form.
///
/// Pivot rule: within the leftmost unresolved nonzero column, choose the entry
/// of smallest numerator-times-denominator bit size. The rule only affects
/// intermediate coefficient growth; the RREF itself is unique.
pub fn rref(a: &RatMatrix) -> Rref {
    let mut rows = a.to_sparse_rows();
    let nrows = rows.len();
    let mut pivots = Vec::new();
    let mut next_row = 0;

    for col in 0..a.cols() {
        if next_row == nrows {
            break;
        }
        let candidate = (next_row..nrows)
            .filter_map(|r| rows[r].get(&col).map(|v| (r, bit_size(v))))
            .min_by_key(|(r, size)| (*size, *r));
        let Some((pivot_row, _)) = candidate else {
            continue;
        };
        rows.swap(next_row, pivot_row);

        // Scale the pivot row to make the pivot 1.
        let inv = rows[next_row][&col].recip();
        if !inv.is_one() {
            for v in rows[next_row].values_mut() {
                *v *= &inv;
            }
        }

        // Eliminate the column from every other row.
        let pivot_entries: Vec<(usize, BigRational)> = rows[next_row]
            .iter()
            .map(|(j, v)| (*j, v.clone()))
            .collect();
        for (r, row) in rows.iter_mut().enumerate() {
            if r == next_row {
                continue;
            }
            let Some(factor) = row.get(&col).cloned() else {
                continue;
            };
            for (j, v) in &pivot_entries {
                let delta = &factor * v;
                match row.entry(*j) {
                    std::collections::btree_map::Entry::Vacant(e) => {
                        e.insert(-delta);
                    }
                    std::collections::btree_map::Entry::Occupied(mut e) => {
                        *e.get_mut() -= delta;
                        if e.get().is_zero() {
                            e.remove();
                        }
                    }
                }
            }
        }

        pivots.push(col);
        next_row += 1;
    }

    let mut matrix = RatMatrix::new(a.rows(), a.cols());
    for (i, row) in rows.iter().enumerate() {
        for (j, v) in row {
            matrix.set(i, *j, v.clone());
        }
    }
    Rref { matrix, pivots }
}

/// Basis of the right nullspace `{v : A v = 0}` from the standard RREF
/// parametrization: one basis vector per free column, ordered by ascending
/// free column, with the free coordinate set to 1.
pub fn nullspace(a: &RatMatrix) -> Vec<Vec<BigRational>> {
    let red = rref(a);
    nullspace_of_rref(&red, a.cols())
}

fn nullspace_of_rref(red: &Rref, cols: usize) -> Vec<Vec<BigRational>> {
    let pivot_of_col: BTreeMap<usize, usize> = red
        .pivots
        .iter()
        .enumerate()
        .map(|(row, col)| (*col, row))
        .collect();
    let mut basis = Vec::new();
    for free in 0..cols {
        if pivot_of_col.contains_key(&free) {
            continue;
        }
        let mut v = vec![BigRational::zero(); cols];
        v[free] = BigRational::one();
        for (col, row) in &pivot_of_col {
            let entry = red.matrix.get(*row, free);
            if !entry.is_zero() {
                v[*col] = -entry;
            }
        }
        basis.push(v);
    }
    basis
}

/// Solves `A x = b` exactly. Returns None when the system is inconsistent;
/// free coordinates (if any) are set to zero.
pub fn solve(a: &RatMatrix, b: &[BigRational]) -> Option<Vec<BigRational>> {
    assert_eq!(b.len(), a.rows(), "dimension mismatch");
    let mut aug = RatMatrix::new(a.rows(), a.cols() + 1);
    for ((i, j), v) in a.entries() {
        aug.set(*i, *j, v.clone());
    }
    for (i, v) in b.iter().enumerate() {
        aug.set(i, a.cols(), v.clone());
    }
    let red = rref(&aug);
    if red.pivots.contains(&a.cols()) {
        return None; // a pivot in the augmented column: inconsistent
    }
    let mut x = vec![BigRational::zero(); a.cols()];
    for (row, col) in red.pivots.iter().enumerate() {
        x[*col] = red.matrix.get(row, a.cols());
    }
    Some(x)
}

/// Determinant of a square matrix by Laplace cofactor expansion, memoized
/// over column subsets. Deliberately independent of the elimination code so
/// it can serve as an oracle for rank checks.
pub fn det_laplace(a: &RatMatrix) -> BigRational {
    assert_eq!(a.rows(), a.cols(), "determinant of non-square matrix");
    let n = a.rows();
    assert!(n <= 16, "Laplace expansion limited to small matrices");
    if n == 0 {
        return BigRational::one();
    }
    let dense: Vec<Vec<BigRational>> = (0..n)
        .map(|i| (0..n).map(|j| a.get(i, j)).collect())
        .collect();
    let mut memo: BTreeMap<u32, BigRational> = BTreeMap::new();
    fn expand(
        dense: &[Vec<BigRational>],
        cols_mask: u32,
        memo: &mut BTreeMap<u32, BigRational>,
    ) -> BigRational {
        if cols_mask == 0 {
            return BigRational::one();
        }
        if let Some(v) = memo.get(&cols_mask) {
            return v.clone();
        }
        let n = dense.len();
        let row = n - (cols_mask.count_ones() as usize);
        let mut acc = BigRational::zero();
        let mut sign = BigRational::one();
        for j in 0..n {
            if cols_mask & (1 << j) == 0 {
                continue;
            }
            let entry = &dense[row][j];
            if !entry.is_zero() {
                let minor = expand(dense, cols_mask & !(1 << j), memo);
                acc += &sign * entry * minor;
            }
            sign = -sign;
        }
        memo.insert(cols_mask, acc.clone());
        acc
    }
    expand(&dense, (1u32 << n) - 1, &mut memo)
}
