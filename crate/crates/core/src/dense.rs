//! Dense kernels for the small projected matrices.
//!
//! Everything here operates on matrices of Krylov dimension (plus one), so the
//! algorithms favour robustness over asymptotic speed: a degree-13 diagonal
//! Padé approximant with scaling and squaring for the exponential, the
//! augmented-exponential trick for phi, and cyclic Jacobi for symmetric
//! eigenvalues.

use std::ops::{Index, IndexMut};

use crate::error::{check_dim, Error, Result};

/// Largest dimension accepted by [`expm`] and [`phi_action`].
pub const DEFAULT_DIM_CAP: usize = 64;

/// Row-major dense matrix.
#[derive(Debug, Clone, PartialEq)]
pub struct DenseMatrix {
    rows: usize,
    cols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(rows: usize, cols: usize) -> Self {
        Self { rows, cols, data: vec![0.0; rows * cols] }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_row_major(rows: usize, cols: usize, data: Vec<f64>) -> Result<Self> {
        check_dim(rows * cols, data.len())?;
        Ok(Self { rows, cols, data })
    }

    /// Builds from nested rows; panics on ragged input.
    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let r = rows.len();
        let c = rows.first().map_or(0, |row| row.len());
        assert!(rows.iter().all(|row| row.len() == c), "ragged rows");
        Self { rows: r, cols: c, data: rows.concat() }
    }

    pub fn from_diagonal(diag: &[f64]) -> Self {
        let mut m = Self::zeros(diag.len(), diag.len());
        for (i, &d) in diag.iter().enumerate() {
            m[(i, i)] = d;
        }
        m
    }

    pub fn rows(&self) -> usize {
        self.rows
    }

    pub fn cols(&self) -> usize {
        self.cols
    }

    pub fn is_square(&self) -> bool {
        self.rows == self.cols
    }

    pub fn as_slice(&self) -> &[f64] {
        &self.data
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.cols..(i + 1) * self.cols]
    }

    pub fn column(&self, j: usize) -> Vec<f64> {
        (0..self.rows).map(|i| self[(i, j)]).collect()
    }

    /// Leading `r x c` block.
    pub fn top_left(&self, r: usize, c: usize) -> DenseMatrix {
        let mut m = DenseMatrix::zeros(r, c);
        for i in 0..r {
            m.data[i * c..(i + 1) * c].copy_from_slice(&self.row(i)[..c]);
        }
        m
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut t = DenseMatrix::zeros(self.cols, self.rows);
        for i in 0..self.rows {
            for j in 0..self.cols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn scaled(&self, alpha: f64) -> DenseMatrix {
        DenseMatrix { rows: self.rows, cols: self.cols, data: self.data.iter().map(|v| alpha * v).collect() }
    }

    /// `self + alpha * other`.
    pub fn add_scaled(&self, alpha: f64, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!((self.rows, self.cols), (other.rows, other.cols));
        DenseMatrix {
            rows: self.rows,
            cols: self.cols,
            data: self.data.iter().zip(&other.data).map(|(a, b)| a + alpha * b).collect(),
        }
    }

    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.cols, other.rows, "inner dimensions differ");
        let mut out = DenseMatrix::zeros(self.rows, other.cols);
        for i in 0..self.rows {
            let orow = &mut out.data[i * other.cols..(i + 1) * other.cols];
            for (k, &a) in self.row(i).iter().enumerate() {
                if a == 0.0 {
                    continue;
                }
                for (o, b) in orow.iter_mut().zip(other.row(k)) {
                    *o += a * b;
                }
            }
        }
        out
    }

    pub fn matvec(&self, x: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.cols, x.len())?;
        Ok((0..self.rows).map(|i| crate::vector::dot(self.row(i), x)).collect())
    }

    /// Maximum absolute column sum.
    pub fn one_norm(&self) -> f64 {
        (0..self.cols).map(|j| (0..self.rows).map(|i| self[(i, j)].abs()).sum::<f64>()).fold(0.0, f64::max)
    }

    pub fn frobenius_norm(&self) -> f64 {
        crate::vector::norm2(&self.data)
    }

    pub fn max_abs(&self) -> f64 {
        crate::vector::max_abs(&self.data)
    }

    /// `(M + M^T) / 2`.
    pub fn symmetric_part(&self) -> DenseMatrix {
        let mut s = self.clone();
        for i in 0..self.rows {
            for j in 0..self.cols {
                s[(i, j)] = 0.5 * (self[(i, j)] + self[(j, i)]);
            }
        }
        s
    }

    fn require_square(&self) -> Result<()> {
        if !self.is_square() {
            return Err(Error::NotSquare { rows: self.rows, cols: self.cols });
        }
        Ok(())
    }
}

impl Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    #[inline]
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.cols + j]
    }
}

impl IndexMut<(usize, usize)> for DenseMatrix {
    #[inline]
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.cols + j]
    }
}

/// Solves `A X = B` by Gaussian elimination with partial pivoting.
pub fn solve(a: &DenseMatrix, b: &DenseMatrix) -> Result<DenseMatrix> {
    a.require_square()?;
    check_dim(a.rows, b.rows)?;
    let n = a.rows;
    let m = b.cols;
    let mut lu = a.clone();
    let mut x = b.clone();
    for col in 0..n {
        let piv = (col..n)
            .max_by(|&p, &q| lu[(p, col)].abs().total_cmp(&lu[(q, col)].abs()))
            .unwrap();
        if lu[(piv, col)] == 0.0 {
            return Err(Error::InvalidArgument("singular matrix in dense solve".into()));
        }
        if piv != col {
            for j in 0..n {
                lu.data.swap(piv * n + j, col * n + j);
            }
            for j in 0..m {
                x.data.swap(piv * m + j, col * m + j);
            }
        }
        let d = lu[(col, col)];
        for r in col + 1..n {
            let f = lu[(r, col)] / d;
            if f == 0.0 {
                continue;
            }
            for j in col..n {
                lu[(r, j)] -= f * lu[(col, j)];
            }
            for j in 0..m {
                x[(r, j)] -= f * x[(col, j)];
            }
        }
    }
    for col in (0..n).rev() {
        let d = lu[(col, col)];
        for j in 0..m {
            let mut s = x[(col, j)];
            for k in col + 1..n {
                s -= lu[(col, k)] * x[(k, j)];
            }
            x[(col, j)] = s / d;
        }
    }
    Ok(x)
}

const PADE13: [f64; 14] = [
    64764752532480000.0,
    32382376266240000.0,
    7771770303897600.0,
    1187353796428800.0,
    129060195264000.0,
    10559470521600.0,
    670442572800.0,
    33522128640.0,
    1323241920.0,
    40840800.0,
    960960.0,
    16380.0,
    182.0,
    1.0,
];

const THETA13: f64 = 5.37;

/// Matrix exponential, capped at [`DEFAULT_DIM_CAP`].
pub fn expm(m: &DenseMatrix) -> Result<DenseMatrix> {
    expm_capped(m, DEFAULT_DIM_CAP)
}

/// Matrix exponential by [13/13] Padé with scaling and squaring.
pub fn expm_capped(m: &DenseMatrix, cap: usize) -> Result<DenseMatrix> {
    m.require_square()?;
    let n = m.rows;
    if n > cap {
        return Err(Error::DimensionCap { dim: n, cap });
    }
    if n == 0 {
        return Ok(DenseMatrix::zeros(0, 0));
    }
    let norm = m.one_norm();
    if !norm.is_finite() {
        return Err(Error::InvalidArgument("non-finite matrix in expm".into()));
    }
    let s = if norm > THETA13 { (norm / THETA13).log2().ceil() as i32 } else { 0 };
    let a = m.scaled(0.5f64.powi(s));
    let id = DenseMatrix::identity(n);
    let a2 = a.matmul(&a);
    let a4 = a2.matmul(&a2);
    let a6 = a4.matmul(&a2);
    let b = &PADE13;

    let inner_u = a6.scaled(b[13]).add_scaled(b[11], &a4).add_scaled(b[9], &a2);
    let u = a6
        .matmul(&inner_u)
        .add_scaled(b[7], &a6)
        .add_scaled(b[5], &a4)
        .add_scaled(b[3], &a2)
        .add_scaled(b[1], &id);
    let u = a.matmul(&u);
    let inner_v = a6.scaled(b[12]).add_scaled(b[10], &a4).add_scaled(b[8], &a2);
    let v = a6
        .matmul(&inner_v)
        .add_scaled(b[6], &a6)
        .add_scaled(b[4], &a4)
        .add_scaled(b[2], &a2)
        .add_scaled(b[0], &id);

    let p = v.add_scaled(1.0, &u);
    let q = v.add_scaled(-1.0, &u);
    let mut r = solve(&q, &p)?;
    for _ in 0..s {
        r = r.matmul(&r);
    }
    Ok(r)
}

/// Exponential of the augmented matrix `[[-t M, x], [0, 0]]`.
///
/// The top-left block is `exp(-tM)` and the last column holds `phi(-tM) x`.
pub(crate) fn augmented_exp(m: &DenseMatrix, x: &[f64], t: f64, cap: usize) -> Result<DenseMatrix> {
    m.require_square()?;
    check_dim(m.rows, x.len())?;
    let n = m.rows;
    let mut aug = DenseMatrix::zeros(n + 1, n + 1);
    for i in 0..n {
        for j in 0..n {
            aug[(i, j)] = -t * m[(i, j)];
        }
        aug[(i, n)] = x[i];
    }
    expm_capped(&aug, cap)
}

/// `phi(-tM) x` with `phi(z) = (e^z - 1)/z`, evaluated through the augmented exponential.
pub fn phi_action(m: &DenseMatrix, x: &[f64], t: f64) -> Result<Vec<f64>> {
    phi_action_capped(m, x, t, DEFAULT_DIM_CAP)
}

pub fn phi_action_capped(m: &DenseMatrix, x: &[f64], t: f64, cap: usize) -> Result<Vec<f64>> {
    m.require_square()?;
    check_dim(m.rows, x.len())?;
    let n = m.rows;
    // the action is linear in x; unit scaling keeps the augmented norm tied to tM
    let xn = crate::vector::norm2(x);
    if xn == 0.0 {
        return Ok(vec![0.0; n]);
    }
    let unit: Vec<f64> = x.iter().map(|v| v / xn).collect();
    let e = augmented_exp(m, &unit, t, cap)?;
    Ok((0..n).map(|i| xn * e[(i, n)]).collect())
}

/// Eigen-decomposition of a symmetric matrix by cyclic Jacobi rotations.
///
/// Returns the eigenvalues (unsorted, in diagonal order) and, if requested,
/// the eigenvectors as the columns of a matrix.
pub fn sym_eigen(s: &DenseMatrix, want_vectors: bool) -> Result<(Vec<f64>, Option<DenseMatrix>)> {
    s.require_square()?;
    let n = s.rows;
    let mut a = s.symmetric_part();
    let mut v = want_vectors.then(|| DenseMatrix::identity(n));
    let total = a.frobenius_norm();
    if total == 0.0 {
        return Ok((vec![0.0; n], v));
    }
    for _sweep in 0..100 {
        let mut off = 0.0;
        for p in 0..n {
            for q in p + 1..n {
                off += a[(p, q)] * a[(p, q)];
            }
        }
        if off.sqrt() <= 1e-17 * total {
            break;
        }
        for p in 0..n {
            for q in p + 1..n {
                let apq = a[(p, q)];
                if apq == 0.0 {
                    continue;
                }
                let (app, aqq) = (a[(p, p)], a[(q, q)]);
                let theta = (aqq - app) / (2.0 * apq);
                let t = theta.signum() / (theta.abs() + (theta * theta + 1.0).sqrt());
                let t = if theta == 0.0 { 1.0 } else { t };
                let c = 1.0 / (t * t + 1.0).sqrt();
                let sn = t * c;
                for k in 0..n {
                    let akp = a[(k, p)];
                    let akq = a[(k, q)];
                    a[(k, p)] = c * akp - sn * akq;
                    a[(k, q)] = sn * akp + c * akq;
                }
                for k in 0..n {
                    let apk = a[(p, k)];
                    let aqk = a[(q, k)];
                    a[(p, k)] = c * apk - sn * aqk;
                    a[(q, k)] = sn * apk + c * aqk;
                }
                a[(p, q)] = 0.0;
                a[(q, p)] = 0.0;
                if let Some(v) = v.as_mut() {
                    for k in 0..n {
                        let vkp = v[(k, p)];
                        let vkq = v[(k, q)];
                        v[(k, p)] = c * vkp - sn * vkq;
                        v[(k, q)] = sn * vkp + c * vkq;
                    }
                }
            }
        }
    }
    Ok(((0..n).map(|i| a[(i, i)]).collect(), v))
}

/// Minimum eigenvalue of the symmetric part `(M + M^T)/2`.
pub fn sym_min_eig(m: &DenseMatrix) -> Result<f64> {
    let (ev, _) = sym_eigen(&m.symmetric_part(), false)?;
    Ok(ev.into_iter().fold(f64::INFINITY, f64::min))
}

/// Maximum eigenvalue of the symmetric part `(M + M^T)/2`.
pub fn sym_max_eig(m: &DenseMatrix) -> Result<f64> {
    let (ev, _) = sym_eigen(&m.symmetric_part(), false)?;
    Ok(ev.into_iter().fold(f64::NEG_INFINITY, f64::max))
}
