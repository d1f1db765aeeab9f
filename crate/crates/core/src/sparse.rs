//! Compressed sparse row storage for the system operator.
//!
//! The matrix–vector product is the only hot path of the solver. With the
//! `parallel` feature enabled, large products are split over rows with rayon;
//! every output entry is still a sequential dot product over its row, so the
//! result is bitwise identical to the serial kernel.

use std::sync::atomic::{AtomicUsize, Ordering};

use crate::dense::DenseMatrix;
use crate::error::{check_dim, Error, Result};

/// Row count above which [`SparseMatrix::matvec`] dispatches to the parallel kernel.
pub const PARALLEL_ROW_THRESHOLD: usize = 4096;

/// Default relative tolerance for automatic symmetry detection.
pub const DEFAULT_SYMMETRY_TOL: f64 = 1e-12;

#[derive(Debug)]
pub struct SparseMatrix {
    n: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
    matvecs: AtomicUsize,
}

impl Clone for SparseMatrix {
    fn clone(&self) -> Self {
        Self {
            n: self.n,
            row_offsets: self.row_offsets.clone(),
            col_indices: self.col_indices.clone(),
            values: self.values.clone(),
            matvecs: AtomicUsize::new(0),
        }
    }
}

impl PartialEq for SparseMatrix {
    fn eq(&self, other: &Self) -> bool {
        self.n == other.n
            && self.row_offsets == other.row_offsets
            && self.col_indices == other.col_indices
            && self.values.iter().map(|v| v.to_bits()).eq(other.values.iter().map(|v| v.to_bits()))
    }
}

impl SparseMatrix {
    /// Builds a matrix from raw CSR arrays, validating the storage invariants.
    pub fn from_csr(
        n: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        check_dim(n + 1, row_offsets.len())?;
        check_dim(col_indices.len(), values.len())?;
        if row_offsets[0] != 0 || row_offsets[n] != col_indices.len() {
            return Err(Error::InvalidArgument("row offsets do not span the entries".into()));
        }
        for i in 0..n {
            let (lo, hi) = (row_offsets[i], row_offsets[i + 1]);
            if lo > hi {
                return Err(Error::InvalidArgument(format!("row offsets decrease at row {i}")));
            }
            let row = &col_indices[lo..hi];
            if row.iter().any(|&j| j >= n) {
                return Err(Error::InvalidArgument(format!("column index out of range in row {i}")));
            }
            if row.windows(2).any(|w| w[0] >= w[1]) {
                return Err(Error::InvalidArgument(format!(
                    "column indices not strictly increasing in row {i}"
                )));
            }
        }
        Ok(Self { n, row_offsets, col_indices, values, matvecs: AtomicUsize::new(0) })
    }

    /// Assembles from `(row, col, value)` triplets; duplicates are summed.
    pub fn from_triplets<I>(n: usize, triplets: I) -> Result<Self>
    where
        I: IntoIterator<Item = (usize, usize, f64)>,
    {
        let mut rows: Vec<Vec<(usize, f64)>> = vec![Vec::new(); n];
        for (i, j, v) in triplets {
            if i >= n || j >= n {
                return Err(Error::InvalidArgument(format!("entry ({i}, {j}) outside {n}x{n}")));
            }
            rows[i].push((j, v));
        }
        let mut row_offsets = Vec::with_capacity(n + 1);
        let mut col_indices = Vec::new();
        let mut values = Vec::new();
        row_offsets.push(0);
        for mut row in rows {
            row.sort_by_key(|&(j, _)| j);
            for (j, v) in row {
                if col_indices.len() > *row_offsets.last().unwrap() && *col_indices.last().unwrap() == j {
                    *values.last_mut().unwrap() += v;
                } else {
                    col_indices.push(j);
                    values.push(v);
                }
            }
            row_offsets.push(col_indices.len());
        }
        Self::from_csr(n, row_offsets, col_indices, values)
    }

    pub fn identity(n: usize) -> Self {
        Self::from_diagonal(&vec![1.0; n])
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let n = diag.len();
        Self {
            n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: diag.to_vec(),
            matvecs: AtomicUsize::new(0),
        }
    }

    /// Stores every nonzero of a square dense matrix.
    pub fn from_dense(m: &DenseMatrix) -> Result<Self> {
        if !m.is_square() {
            return Err(Error::NotSquare { rows: m.rows(), cols: m.cols() });
        }
        let n = m.rows();
        let trip = (0..n)
            .flat_map(|i| (0..n).map(move |j| (i, j)))
            .filter_map(|(i, j)| {
                let v = m[(i, j)];
                (v != 0.0).then_some((i, j, v))
            });
        Self::from_triplets(n, trip)
    }

    pub fn to_dense(&self) -> DenseMatrix {
        let mut d = DenseMatrix::zeros(self.n, self.n);
        for (i, j, v) in self.iter() {
            d[(i, j)] += v;
        }
        d
    }

    pub fn n(&self) -> usize {
        self.n
    }

    pub fn nnz(&self) -> usize {
        self.values.len()
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    /// Iterates stored entries in row-major order.
    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.n).flat_map(move |i| {
            let (lo, hi) = (self.row_offsets[i], self.row_offsets[i + 1]);
            (lo..hi).map(move |p| (i, self.col_indices[p], self.values[p]))
        })
    }

    /// Entry `(i, j)`, zero when not stored.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (lo, hi) = (self.row_offsets[i], self.row_offsets[i + 1]);
        match self.col_indices[lo..hi].binary_search(&j) {
            Ok(p) => self.values[lo + p],
            Err(_) => 0.0,
        }
    }

    /// Number of products performed with this matrix so far.
    pub fn matvec_count(&self) -> usize {
        self.matvecs.load(Ordering::Relaxed)
    }

    pub fn reset_matvec_count(&self) {
        self.matvecs.store(0, Ordering::Relaxed);
    }

    /// Returns `A x`. Counts as one product.
    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        let mut y = vec![0.0; self.n];
        self.matvec_into(x, &mut y)?;
        Ok(y)
    }

    /// Writes `A x` into `y`. Counts as one product.
    pub fn matvec_into(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        check_dim(self.n, x.len())?;
        check_dim(self.n, y.len())?;
        #[cfg(feature = "parallel")]
        if self.n >= PARALLEL_ROW_THRESHOLD {
            self.parallel_kernel(x, y);
            self.matvecs.fetch_add(1, Ordering::Relaxed);
            return Ok(());
        }
        self.serial_kernel(x, y);
        self.matvecs.fetch_add(1, Ordering::Relaxed);
        Ok(())
    }

    /// Single-threaded product regardless of size. Counts as one product.
    pub fn matvec_serial(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        check_dim(self.n, x.len())?;
        check_dim(self.n, y.len())?;
        self.serial_kernel(x, y);
        self.matvecs.fetch_add(1, Ordering::Relaxed);
        Ok(())
    }

    /// Row-parallel product regardless of size. Counts as one product.
    #[cfg(feature = "parallel")]
    pub fn matvec_parallel(&self, x: &[f64], y: &mut [f64]) -> Result<()> {
        check_dim(self.n, x.len())?;
        check_dim(self.n, y.len())?;
        self.parallel_kernel(x, y);
        self.matvecs.fetch_add(1, Ordering::Relaxed);
        Ok(())
    }

    #[inline]
    fn row_dot(&self, i: usize, x: &[f64]) -> f64 {
        let (lo, hi) = (self.row_offsets[i], self.row_offsets[i + 1]);
        let mut acc = 0.0;
        for p in lo..hi {
            acc += self.values[p] * x[self.col_indices[p]];
        }
        acc
    }

    fn serial_kernel(&self, x: &[f64], y: &mut [f64]) {
        for (i, yi) in y.iter_mut().enumerate() {
            *yi = self.row_dot(i, x);
        }
    }

    #[cfg(feature = "parallel")]
    fn parallel_kernel(&self, x: &[f64], y: &mut [f64]) {
        use rayon::prelude::*;
        const CHUNK: usize = 512;
        y.par_chunks_mut(CHUNK).enumerate().for_each(|(c, out)| {
            let base = c * CHUNK;
            for (r, yi) in out.iter_mut().enumerate() {
                *yi = self.row_dot(base + r, x);
            }
        });
    }

    /// Maximum absolute column sum.
    pub fn one_norm(&self) -> f64 {
        let mut col = vec![0.0; self.n];
        for (&j, &v) in self.col_indices.iter().zip(&self.values) {
            col[j] += v.abs();
        }
        col.into_iter().fold(0.0, f64::max)
    }

    /// Maximum absolute row sum.
    pub fn inf_norm(&self) -> f64 {
        (0..self.n)
            .map(|i| self.values[self.row_offsets[i]..self.row_offsets[i + 1]].iter().map(|v| v.abs()).sum())
            .fold(0.0, f64::max)
    }

    pub fn max_abs(&self) -> f64 {
        self.values.iter().fold(0.0f64, |m, v| m.max(v.abs()))
    }

    pub fn transpose(&self) -> SparseMatrix {
        let n = self.n;
        let mut counts = vec![0usize; n + 1];
        for &j in &self.col_indices {
            counts[j + 1] += 1;
        }
        for i in 0..n {
            counts[i + 1] += counts[i];
        }
        let row_offsets = counts.clone();
        let mut next = counts;
        let mut col_indices = vec![0; self.nnz()];
        let mut values = vec![0.0; self.nnz()];
        // rows visited in order, so columns of the transpose come out sorted
        for (i, j, v) in self.iter() {
            let p = next[j];
            col_indices[p] = i;
            values[p] = v;
            next[j] += 1;
        }
        SparseMatrix { n, row_offsets, col_indices, values, matvecs: AtomicUsize::new(0) }
    }

    /// Largest entrywise difference `|A_ij - A_ji|`.
    pub fn max_asymmetry(&self) -> f64 {
        let t = self.transpose();
        let mut worst = 0.0f64;
        for i in 0..self.n {
            let a = (self.row_offsets[i], self.row_offsets[i + 1]);
            let b = (t.row_offsets[i], t.row_offsets[i + 1]);
            let (mut p, mut q) = (a.0, b.0);
            while p < a.1 || q < b.1 {
                let ja = if p < a.1 { self.col_indices[p] } else { usize::MAX };
                let jb = if q < b.1 { t.col_indices[q] } else { usize::MAX };
                let d = if ja == jb {
                    let d = self.values[p] - t.values[q];
                    p += 1;
                    q += 1;
                    d
                } else if ja < jb {
                    p += 1;
                    self.values[p - 1]
                } else {
                    q += 1;
                    t.values[q - 1]
                };
                worst = worst.max(d.abs());
            }
        }
        worst
    }

    /// True iff `max |A_ij - A_ji| <= tau * max |A_ij|`.
    pub fn is_symmetric(&self, tau: f64) -> bool {
        self.max_asymmetry() <= tau * self.max_abs()
    }

    /// `alpha * self + beta * other`.
    pub fn linear_combination(&self, alpha: f64, other: &SparseMatrix, beta: f64) -> Result<SparseMatrix> {
        check_dim(self.n, other.n)?;
        let trip = self
            .iter()
            .map(|(i, j, v)| (i, j, alpha * v))
            .chain(other.iter().map(|(i, j, v)| (i, j, beta * v)));
        SparseMatrix::from_triplets(self.n, trip)
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn identity_and_diagonal_products() {
        let i3 = SparseMatrix::identity(3);
        assert_eq!(i3.matvec(&[1.0, 2.0, 3.0]).unwrap(), vec![1.0, 2.0, 3.0]);
        let d = SparseMatrix::from_diagonal(&[2.0, 3.0]);
        assert_eq!(d.matvec(&[1.0, 1.0]).unwrap(), vec![2.0, 3.0]);
    }

    #[test]
    fn dimension_mismatch_is_an_error() {
        let d = SparseMatrix::identity(3);
        assert!(matches!(d.matvec(&[1.0]), Err(Error::DimensionMismatch { .. })));
        assert_eq!(d.matvec_count(), 0);
    }

    #[test]
    fn counter_increments_once_per_call() {
        let a = SparseMatrix::identity(4);
        for k in 1..=5 {
            a.matvec(&[0.0; 4]).unwrap();
            assert_eq!(a.matvec_count(), k);
        }
        a.reset_matvec_count();
        assert_eq!(a.matvec_count(), 0);
    }

    #[test]
    fn norms_of_simple_matrices() {
        assert_eq!(SparseMatrix::identity(7).one_norm(), 1.0);
        assert_eq!(SparseMatrix::identity(7).inf_norm(), 1.0);
        let d = SparseMatrix::from_diagonal(&[1.0, -2.0, 3.0]);
        assert_eq!(d.one_norm(), 3.0);
        assert_eq!(d.inf_norm(), 3.0);
    }

    #[test]
    fn symmetry_detection() {
        assert!(SparseMatrix::from_diagonal(&[1.0, 5.0]).is_symmetric(0.0));
        let skew = SparseMatrix::from_triplets(2, [(0, 1, 1.0), (1, 0, -1.0)]).unwrap();
        assert!(!skew.is_symmetric(0.0));
        // one-sided entry
        let upper = SparseMatrix::from_triplets(2, [(0, 1, 1.0)]).unwrap();
        assert!(!upper.is_symmetric(0.5));
    }

    #[test]
    fn triplets_sum_duplicates_and_sort() {
        let a = SparseMatrix::from_triplets(2, [(0, 1, 1.0), (0, 0, 2.0), (0, 1, 0.5)]).unwrap();
        assert_eq!(a.col_indices(), &[0, 1]);
        assert_eq!(a.values(), &[2.0, 1.5]);
        assert_eq!(a.row_offsets(), &[0, 2, 2]);
    }

    #[test]
    fn invalid_csr_is_rejected() {
        assert!(SparseMatrix::from_csr(2, vec![0, 1, 2], vec![1, 0], vec![1.0, 1.0]).is_ok());
        assert!(SparseMatrix::from_csr(2, vec![0, 2, 2], vec![1, 0], vec![1.0, 1.0]).is_err());
        assert!(SparseMatrix::from_csr(2, vec![0, 1, 2], vec![2, 0], vec![1.0, 1.0]).is_err());
        assert!(SparseMatrix::from_csr(2, vec![0, 1, 1], vec![0, 0], vec![1.0, 1.0]).is_err());
    }

    #[test]
    fn transpose_roundtrip() {
        let a = SparseMatrix::from_triplets(3, [(0, 2, 1.0), (1, 0, -3.0), (2, 2, 4.0), (2, 1, 0.5)]).unwrap();
        let t = a.transpose();
        assert_eq!(t.get(2, 0), 1.0);
        assert_eq!(t.get(0, 1), -3.0);
        assert_eq!(t.transpose(), a);
        assert_eq!(a.one_norm(), t.inf_norm());
    }
}
