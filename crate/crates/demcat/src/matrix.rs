//! Dense matrices over an exact field, and the handful of subspace
//! operations the homological layer is built on.
//!
//! Everything here is dense and small (dimensions stay well under a
//! hundred), so clarity wins over asymptotics throughout.

use crate::field::Field;

#[derive(Clone, PartialEq)]
pub struct Matrix<K: Field> {
    pub field: K,
    rows: usize,
    cols: usize,
    entries: Vec<K::Elem>, // row major
}

impl<K: Field> std::fmt::Debug for Matrix<K> {
    fn fmt(&self, f: &mut std::fmt::Formatter<'_>) -> std::fmt::Result {
        writeln!(f, "Matrix {}x{} [", self.rows, self.cols)?;
        for r in 0..self.rows {
            let row: Vec<String> = (0..self.cols)
                .map(|c| self.field.render(self.get(r, c)))
                .collect();
            writeln!(f, "  [{}]", row.join(", "))?;
        }
        write!(f, "]")
    }
}

impl<K: Field> Matrix<K> {
    pub fn zeros(field: K, rows: usize, cols: usize) -> Self {
        let entries = vec![field.zero(); rows * cols];
        Matrix { field, rows, cols, entries }
    }

    pub fn identity(field: K, n: usize) -> Self {
        let mut m = Self::zeros(field, n, n);
        for i in 0..n {
            let one = m.field.one();
            m.set(i, i, one);
        }
        m
    }

    pub fn from_fn(field: K, rows: usize, cols: usize, mut f: impl FnMut(usize, usize) -> K::Elem) -> Self {
        let mut entries = Vec::with_capacity(rows * cols);
        for r in 0..rows {
            for c in 0..cols {
                entries.push(f(r, c));
            }
        }
        Matrix { field, rows, cols, entries }
    }

    pub fn from_i64_rows(field: K, data: &[&[i64]]) -> Self {
        let rows = data.len();
        let cols = data.first().map_or(0, |r| r.len());
        Self::from_fn(field.clone(), rows, cols, |r, c| field.from_i64(data[r][c]))
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn get(&self, r: usize, c: usize) -> &K::Elem {
        &self.entries[r * self.cols + c]
    }

    pub fn set(&mut self, r: usize, c: usize, v: K::Elem) {
        self.entries[r * self.cols + c] = v;
    }

    pub fn is_zero(&self) -> bool {
        self.entries.iter().all(|e| self.field.is_zero(e))
    }

    pub fn transpose(&self) -> Self {
        Self::from_fn(self.field.clone(), self.cols, self.rows, |r, c| self.get(c, r).clone())
    }

    pub fn add(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::from_fn(self.field.clone(), self.rows, self.cols, |r, c| {
            self.field.add(self.get(r, c), other.get(r, c))
        })
    }

    pub fn sub(&self, other: &Self) -> Self {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        Self::from_fn(self.field.clone(), self.rows, self.cols, |r, c| {
            self.field.sub(self.get(r, c), other.get(r, c))
        })
    }

    pub fn neg(&self) -> Self {
        Self::from_fn(self.field.clone(), self.rows, self.cols, |r, c| self.field.neg(self.get(r, c)))
    }

    pub fn scale(&self, s: &K::Elem) -> Self {
        Self::from_fn(self.field.clone(), self.rows, self.cols, |r, c| self.field.mul(self.get(r, c), s))
    }

    pub fn mul(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.rows, "dimension mismatch in matrix product");
        let k = &self.field;
        Self::from_fn(k.clone(), self.rows, other.cols, |r, c| {
            let mut acc = k.zero();
            for m in 0..self.cols {
                acc = k.add(&acc, &k.mul(self.get(r, m), other.get(m, c)));
            }
            acc
        })
    }

    pub fn apply(&self, v: &[K::Elem]) -> Vec<K::Elem> {
        assert_eq!(self.cols, v.len());
        let k = &self.field;
        (0..self.rows)
            .map(|r| {
                let mut acc = k.zero();
                for c in 0..self.cols {
                    acc = k.add(&acc, &k.mul(self.get(r, c), &v[c]));
                }
                acc
            })
            .collect()
    }

    pub fn column(&self, c: usize) -> Vec<K::Elem> {
        (0..self.rows).map(|r| self.get(r, c).clone()).collect()
    }

    pub fn columns(&self) -> Vec<Vec<K::Elem>> {
        (0..self.cols).map(|c| self.column(c)).collect()
    }

    pub fn from_columns(field: K, rows: usize, cols: &[Vec<K::Elem>]) -> Self {
        for col in cols {
            assert_eq!(col.len(), rows);
        }
        Self::from_fn(field, rows, cols.len(), |r, c| cols[c][r].clone())
    }

    pub fn hstack(&self, other: &Self) -> Self {
        assert_eq!(self.rows, other.rows);
        Self::from_fn(self.field.clone(), self.rows, self.cols + other.cols, |r, c| {
            if c < self.cols {
                self.get(r, c).clone()
            } else {
                other.get(r, c - self.cols).clone()
            }
        })
    }

    pub fn vstack(&self, other: &Self) -> Self {
        assert_eq!(self.cols, other.cols);
        Self::from_fn(self.field.clone(), self.rows + other.rows, self.cols, |r, c| {
            if r < self.rows {
                self.get(r, c).clone()
            } else {
                other.get(r - self.rows, c).clone()
            }
        })
    }

    /// Rank by fraction-free (Bareiss) elimination. Divisions only happen by
    /// previous pivots, which keeps intermediate entries as small as the
    /// minors they equal.
    pub fn rank(&self) -> usize {
        let k = self.field.clone();
        let mut a = self.clone();
        let (m, n) = (a.rows, a.cols);
        let mut prev = k.one();
        let mut rank = 0;
        let mut row = 0;
        for col in 0..n {
            if row >= m {
                break;
            }
            let pivot_row = (row..m).find(|&r| !k.is_zero(a.get(r, col)));
            let Some(p) = pivot_row else { continue };
            if p != row {
                for c in 0..n {
                    let tmp = a.get(row, c).clone();
                    let v = a.get(p, c).clone();
                    a.set(row, c, v);
                    a.set(p, c, tmp);
                }
            }
            let pivot = a.get(row, col).clone();
            for r in row + 1..m {
                for c in col + 1..n {
                    let num = k.sub(
                        &k.mul(&pivot, a.get(r, c)),
                        &k.mul(a.get(r, col), a.get(row, c)),
                    );
                    a.set(r, c, k.div(&num, &prev));
                }
                a.set(r, col, k.zero());
            }
            prev = pivot;
            rank += 1;
            row += 1;
        }
        rank
    }

    /// Reduced row echelon form; returns (rref, pivot columns).
    pub fn rref(&self) -> (Self, Vec<usize>) {
        let k = self.field.clone();
        let mut a = self.clone();
        let (m, n) = (a.rows, a.cols);
        let mut pivots = Vec::new();
        let mut row = 0;
        for col in 0..n {
            if row >= m {
                break;
            }
            let Some(p) = (row..m).find(|&r| !k.is_zero(a.get(r, col))) else { continue };
            if p != row {
                for c in 0..n {
                    let tmp = a.get(row, c).clone();
                    let v = a.get(p, c).clone();
                    a.set(row, c, v);
                    a.set(p, c, tmp);
                }
            }
            let inv = k.inv(a.get(row, col));
            for c in 0..n {
                let v = k.mul(a.get(row, c), &inv);
                a.set(row, c, v);
            }
            for r in 0..m {
                if r != row && !k.is_zero(a.get(r, col)) {
                    let factor = a.get(r, col).clone();
                    for c in 0..n {
                        let v = k.sub(a.get(r, c), &k.mul(&factor, a.get(row, c)));
                        a.set(r, c, v);
                    }
                }
            }
            pivots.push(col);
            row += 1;
        }
        (a, pivots)
    }

    /// Basis of the null space, as columns. Count = cols - rank.
    pub fn kernel_basis(&self) -> Self {
        let k = self.field.clone();
        let (rref, pivots) = self.rref();
        let n = self.cols;
        let free: Vec<usize> = (0..n).filter(|c| !pivots.contains(c)).collect();
        let mut basis = Self::zeros(k.clone(), n, free.len());
        for (bi, &fc) in free.iter().enumerate() {
            basis.set(fc, bi, k.one());
            for (pr, &pc) in pivots.iter().enumerate() {
                basis.set(pc, bi, k.neg(rref.get(pr, fc)));
            }
        }
        basis
    }

    /// A particular solution of `self * x = b`, if any.
    pub fn solve(&self, b: &[K::Elem]) -> Option<Vec<K::Elem>> {
        assert_eq!(b.len(), self.rows);
        let k = self.field.clone();
        let bm = Matrix::from_columns(k.clone(), self.rows, &[b.to_vec()]);
        let aug = self.hstack(&bm);
        let (rref, pivots) = aug.rref();
        // inconsistent if the last column is a pivot
        if pivots.contains(&self.cols) {
            return None;
        }
        let mut x = vec![k.zero(); self.cols];
        for (pr, &pc) in pivots.iter().enumerate() {
            x[pc] = rref.get(pr, self.cols).clone();
        }
        Some(x)
    }

    /// Solves `self * X = B` columnwise; None if any column is inconsistent.
    pub fn solve_matrix(&self, b: &Matrix<K>) -> Option<Matrix<K>> {
        assert_eq!(b.rows, self.rows);
        let mut cols = Vec::with_capacity(b.cols);
        for c in 0..b.cols {
            cols.push(self.solve(&b.column(c))?);
        }
        Some(Matrix::from_columns(self.field.clone(), self.cols, &cols))
    }

    /// Columns of `self` that form a basis of the column space.
    pub fn column_space_basis(&self) -> Self {
        let (_, pivots) = self.rref_of_transpose_trick();
        let cols: Vec<Vec<K::Elem>> = pivots.iter().map(|&c| self.column(c)).collect();
        Matrix::from_columns(self.field.clone(), self.rows, &cols)
    }

    fn rref_of_transpose_trick(&self) -> (Self, Vec<usize>) {
        self.rref()
    }

    /// Inverse of a square invertible matrix. Panics if singular.
    pub fn inverse(&self) -> Self {
        assert_eq!(self.rows, self.cols);
        let id = Matrix::identity(self.field.clone(), self.rows);
        let aug = self.hstack(&id);
        let (rref, pivots) = aug.rref();
        assert_eq!(pivots.len(), self.rows, "matrix is singular");
        assert!(pivots.iter().enumerate().all(|(i, &p)| i == p), "matrix is singular");
        Matrix::from_fn(self.field.clone(), self.rows, self.cols, |r, c| {
            rref.get(r, self.cols + c).clone()
        })
    }
}

/// Columns of `extra` that extend the column space of `base` to the joint
/// column space; returned as a matrix of the chosen columns.
pub fn extend_basis<K: Field>(base: &Matrix<K>, extra: &Matrix<K>) -> Matrix<K> {
    let mut current = base.clone();
    let mut rank = current.rank();
    let mut chosen = Vec::new();
    for c in 0..extra.cols() {
        let cand = Matrix::from_columns(extra.field.clone(), extra.rows(), &[extra.column(c)]);
        let widened = current.hstack(&cand);
        let r = widened.rank();
        if r > rank {
            rank = r;
            current = widened;
            chosen.push(extra.column(c));
        }
    }
    Matrix::from_columns(extra.field.clone(), extra.rows(), &chosen)
}

/// Does the column space of `sub` lie inside the column space of `space`?
pub fn subspace_contains<K: Field>(space: &Matrix<K>, sub: &Matrix<K>) -> bool {
    if sub.cols() == 0 {
        return true;
    }
    space.hstack(sub).rank() == space.rank()
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::field::{PrimeField, Rationals};

    fn q() -> Rationals {
        Rationals
    }

    #[test]
    fn rank_identity_and_zero() {
        assert_eq!(Matrix::identity(q(), 2).rank(), 2);
        assert_eq!(Matrix::<Rationals>::zeros(q(), 3, 3).rank(), 0);
    }

    #[test]
    fn rank_proportional_rows() {
        let a = Matrix::from_i64_rows(q(), &[&[1, 2], &[2, 4]]);
        assert_eq!(a.rank(), 1);
        assert_eq!(a.rank(), a.transpose().rank());
    }

    #[test]
    fn kernel_of_identity_is_empty() {
        let a = Matrix::identity(q(), 4);
        assert_eq!(a.kernel_basis().cols(), 0);
    }

    #[test]
    fn kernel_of_zero_is_everything() {
        let a = Matrix::<Rationals>::zeros(q(), 3, 3);
        assert_eq!(a.kernel_basis().cols(), 3);
    }

    #[test]
    fn kernel_single_relation() {
        let a = Matrix::from_i64_rows(q(), &[&[1, 1]]);
        let kb = a.kernel_basis();
        assert_eq!(kb.cols(), 1);
        // spans (1, -1)
        let v = kb.column(0);
        assert_eq!(q().add(&v[0], &v[1]), q().zero());
        assert!(!q().is_zero(&v[0]));
    }

    #[test]
    fn solve_and_inverse() {
        let a = Matrix::from_i64_rows(q(), &[&[2, 1], &[1, 1]]);
        let b = [q().from_i64(3), q().from_i64(2)];
        let x = a.solve(&b).unwrap();
        assert_eq!(a.apply(&x), b.to_vec());
        let inv = a.inverse();
        assert_eq!(a.mul(&inv), Matrix::identity(q(), 2));

        let sing = Matrix::from_i64_rows(q(), &[&[1, 1], &[1, 1]]);
        assert!(sing.solve(&[q().from_i64(0), q().from_i64(1)]).is_none());
    }

    #[test]
    fn rank_nullity_over_fp() {
        let k = PrimeField::new(5).unwrap();
        let a = Matrix::from_i64_rows(k, &[&[1, 2, 3], &[4, 5, 6], &[7, 8, 9]]);
        assert_eq!(a.rank() + a.kernel_basis().cols(), a.cols());
        assert_eq!(a.rank(), 2);
    }

    #[test]
    fn extend_basis_picks_new_directions() {
        let base = Matrix::from_i64_rows(q(), &[&[1], &[0], &[0]]);
        let extra = Matrix::from_i64_rows(q(), &[&[1, 0], &[0, 1], &[0, 0]]);
        let ext = extend_basis(&base, &extra);
        assert_eq!(ext.cols(), 1);
        assert!(subspace_contains(&base.hstack(&ext), &extra));
    }
}
