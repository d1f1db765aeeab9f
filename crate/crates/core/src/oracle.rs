//! Dense reference solutions for test-scale problems.
//!
//! Two independent routes are provided: a Taylor scaling-and-squaring
//! exponential of the augmented matrix, and a classical RK4 time integrator.
//! Neither shares code with the production path beyond the matrix types.

use crate::dense::DenseMatrix;
use crate::error::{check_dim, Error, Result};
use crate::sparse::SparseMatrix;
use crate::vector::norm2;

/// Largest dimension accepted by [`dense_phi_solve`].
pub const DEFAULT_ORACLE_CAP: usize = 2000;

const TAYLOR_DEGREE: usize = 18;

#[derive(Debug, Clone)]
pub struct DenseProblem {
    pub a: DenseMatrix,
    pub v0: Vec<f64>,
    pub g: Vec<f64>,
    pub t: f64,
}

impl DenseProblem {
    pub fn new(a: DenseMatrix, v0: Vec<f64>, g: Vec<f64>, t: f64) -> Result<Self> {
        if !a.is_square() {
            return Err(Error::NotSquare { rows: a.rows(), cols: a.cols() });
        }
        check_dim(a.rows(), v0.len())?;
        check_dim(a.rows(), g.len())?;
        Ok(Self { a, v0, g, t })
    }

    pub fn from_sparse(a: &SparseMatrix, v0: &[f64], g: &[f64], t: f64) -> Result<Self> {
        Self::new(a.to_dense(), v0.to_vec(), g.to_vec(), t)
    }
}

/// Square product, row-parallel when the `parallel` feature is on.
fn square_product(n: usize, x: &[f64], y: &[f64]) -> Vec<f64> {
    let mut out = vec![0.0; n * n];
    let row = |i: usize, dst: &mut [f64]| {
        for (k, &xik) in x[i * n..(i + 1) * n].iter().enumerate() {
            if xik != 0.0 {
                for (d, &ykj) in dst.iter_mut().zip(&y[k * n..(k + 1) * n]) {
                    *d += xik * ykj;
                }
            }
        }
    };
    #[cfg(feature = "parallel")]
    {
        use rayon::prelude::*;
        out.par_chunks_mut(n).enumerate().for_each(|(i, dst)| row(i, dst));
    }
    #[cfg(not(feature = "parallel"))]
    {
        out.chunks_mut(n).enumerate().for_each(|(i, dst)| row(i, dst));
    }
    out
}

/// `exp(X)` for a square row-major `X` of dimension `n`, by a degree-18
/// Taylor polynomial of `X / 2^s` with `||X / 2^s||_1 <= 1`, then squaring.
pub fn taylor_expm(n: usize, x: &[f64]) -> Vec<f64> {
    let mut norm = 0.0f64;
    for j in 0..n {
        norm = norm.max((0..n).map(|i| x[i * n + j].abs()).sum());
    }
    let s = if norm > 1.0 { norm.log2().ceil() as i32 } else { 0 };
    let scale = 0.5f64.powi(s);
    let y: Vec<f64> = x.iter().map(|v| v * scale).collect();
    // Horner: P = I + Y/j * P for j = degree .. 1
    let mut p = vec![0.0; n * n];
    for i in 0..n {
        p[i * n + i] = 1.0;
    }
    for j in (1..=TAYLOR_DEGREE).rev() {
        let mut q = square_product(n, &y, &p);
        let inv = 1.0 / j as f64;
        q.iter_mut().for_each(|v| *v *= inv);
        for i in 0..n {
            q[i * n + i] += 1.0;
        }
        p = q;
    }
    for _ in 0..s {
        p = square_product(n, &p, &p);
    }
    p
}

/// `v + t phi(-tA)(g - Av)` through the exponential of `[[-tA, x], [0, 0]]`.
pub fn dense_phi_solve(p: &DenseProblem) -> Result<Vec<f64>> {
    dense_phi_solve_capped(p, DEFAULT_ORACLE_CAP)
}

pub fn dense_phi_solve_capped(p: &DenseProblem, cap: usize) -> Result<Vec<f64>> {
    let n = p.a.rows();
    if n > cap {
        return Err(Error::DimensionCap { dim: n, cap });
    }
    if !(p.t >= 0.0) {
        return Err(Error::InvalidArgument(format!("time must be nonnegative, got {}", p.t)));
    }
    let av = p.a.matvec(&p.v0)?;
    let r: Vec<f64> = p.g.iter().zip(&av).map(|(g, a)| g - a).collect();
    let scale = norm2(&r);
    if scale == 0.0 || p.t == 0.0 {
        return Ok(p.v0.clone());
    }
    let m = n + 1;
    let mut x = vec![0.0; m * m];
    for i in 0..n {
        for j in 0..n {
            x[i * m + j] = -p.t * p.a[(i, j)];
        }
        x[i * m + n] = r[i] / scale;
    }
    let e = taylor_expm(m, &x);
    Ok((0..n).map(|i| p.v0[i] + p.t * scale * e[i * m + n]).collect())
}

/// Classical fourth-order Runge–Kutta for `y' = -Ay + g`, `y(0) = v`, with
/// `steps` uniform steps over `[0, t]`.
pub fn rk4_solve(a: &SparseMatrix, v: &[f64], g: &[f64], t: f64, steps: usize) -> Result<Vec<f64>> {
    let n = a.n();
    check_dim(n, v.len())?;
    check_dim(n, g.len())?;
    if steps == 0 {
        return Err(Error::InvalidArgument("rk4 needs at least one step".into()));
    }
    let h = t / steps as f64;
    let mut y = v.to_vec();
    let mut tmp = vec![0.0; n];
    let mut k = [vec![0.0; n], vec![0.0; n], vec![0.0; n], vec![0.0; n]];
    let rhs = |x: &[f64], out: &mut [f64]| -> Result<()> {
        a.matvec_serial(x, out)?;
        for (o, gi) in out.iter_mut().zip(g) {
            *o = gi - *o;
        }
        Ok(())
    };
    for _ in 0..steps {
        rhs(&y, &mut k[0])?;
        for stage in 1..4 {
            let c = if stage == 3 { h } else { 0.5 * h };
            for i in 0..n {
                tmp[i] = y[i] + c * k[stage - 1][i];
            }
            let (_, rest) = k.split_at_mut(stage);
            rhs(&tmp, &mut rest[0])?;
        }
        for i in 0..n {
            y[i] += h / 6.0 * (k[0][i] + 2.0 * k[1][i] + 2.0 * k[2][i] + k[3][i]);
        }
    }
    Ok(y)
}

#[cfg(test)]
mod tests {
    use super::*;

    #[test]
    fn zero_matrix_gives_linear_growth() {
        let p = DenseProblem::new(DenseMatrix::zeros(3, 3), vec![1.0, 2.0, 3.0], vec![1.0, -1.0, 0.5], 2.0).unwrap();
        let y = dense_phi_solve(&p).unwrap();
        for (yi, want) in y.iter().zip([3.0, 0.0, 4.0]) {
            assert!((yi - want).abs() < 1e-14);
        }
    }

    #[test]
    fn scalar_closed_form() {
        let p = DenseProblem::new(DenseMatrix::identity(1), vec![0.0], vec![1.0], 1.0).unwrap();
        let y = dense_phi_solve(&p).unwrap();
        assert!((y[0] - (1.0 - (-1.0f64).exp())).abs() < 1e-15);
    }

    #[test]
    fn taylor_matches_rotation() {
        // exp([[0, a], [-a, 0]]) is a rotation by a
        let a = 7.3;
        let e = taylor_expm(2, &[0.0, a, -a, 0.0]);
        assert!((e[0] - a.cos()).abs() < 1e-13 && (e[1] - a.sin()).abs() < 1e-13);
    }

    #[test]
    fn cap_is_enforced() {
        let p = DenseProblem::new(DenseMatrix::identity(3), vec![0.0; 3], vec![1.0; 3], 1.0).unwrap();
        assert!(matches!(dense_phi_solve_capped(&p, 2), Err(Error::DimensionCap { .. })));
    }

    #[test]
    fn rk4_scalar_decay() {
        let a = SparseMatrix::identity(1);
        let y = rk4_solve(&a, &[0.0], &[1.0], 1.0, 1000).unwrap();
        assert!((y[0] - (1.0 - (-1.0f64).exp())).abs() < 1e-13);
    }
}
