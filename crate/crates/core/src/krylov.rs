//! Incremental Arnoldi and Lanczos processes.
//!
//! After `k` steps the decomposition satisfies `A V_k = V_{k+1} Hbar_k`, with
//! `V_{k+1}` column-orthonormal and `Hbar_k` a `(k+1) x k` upper Hessenberg
//! matrix whose subdiagonal is nonnegative. No reorthogonalization is done
//! unless requested.

use crate::dense::DenseMatrix;
use crate::error::{check_dim, Error, Result};
use crate::sparse::SparseMatrix;
use crate::vector::{axpy, dot, norm2};

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum KrylovMode {
    /// Modified Gram–Schmidt against every previous basis vector.
    Arnoldi,
    /// Three-term recurrence; valid for symmetric operators only.
    Lanczos,
}

#[derive(Debug, Clone, Copy, PartialEq)]
pub struct KrylovOptions {
    pub mode: KrylovMode,
    /// Second Gram–Schmidt pass against the whole basis (diagnostics only).
    pub reorthogonalize: bool,
    /// `h_{k+1,k}` at or below this value is treated as a happy breakdown.
    pub breakdown_tol: f64,
}

impl KrylovOptions {
    /// Options with the default breakdown threshold `1e-14 * max(1, ||A||_1)`.
    pub fn for_matrix(a: &SparseMatrix, mode: KrylovMode) -> Self {
        Self { mode, reorthogonalize: false, breakdown_tol: default_breakdown_tol(a.one_norm()) }
    }
}

pub fn default_breakdown_tol(one_norm: f64) -> f64 {
    1e-14 * one_norm.max(1.0)
}

/// Outcome of one [`ArnoldiDecomposition::extend`] step.
#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Step {
    Continued,
    /// The space became invariant; `h_{k+1,k}` was set to zero.
    HappyBreakdown,
}

#[derive(Debug, Clone)]
pub struct ArnoldiDecomposition {
    opts: KrylovOptions,
    beta: f64,
    /// `v_1 .. v_{k+1}`; after a breakdown the last vector is zero.
    basis: Vec<Vec<f64>>,
    /// Column `j` holds `h_{1,j+1} .. h_{j+2,j+1}`.
    hcols: Vec<Vec<f64>>,
    breakdown: bool,
}

impl ArnoldiDecomposition {
    /// Normalizes `r0` into the first basis vector.
    pub fn start(a: &SparseMatrix, r0: &[f64], opts: KrylovOptions) -> Result<Self> {
        check_dim(a.n(), r0.len())?;
        let beta = norm2(r0);
        if beta == 0.0 {
            return Err(Error::BreakdownAtStart);
        }
        if !beta.is_finite() {
            return Err(Error::InvalidArgument("starting vector is not finite".into()));
        }
        let v1 = r0.iter().map(|x| x / beta).collect();
        Ok(Self { opts, beta, basis: vec![v1], hcols: Vec::new(), breakdown: false })
    }

    /// Performs one more step; consumes exactly one matrix–vector product.
    pub fn extend(&mut self, a: &SparseMatrix) -> Result<Step> {
        let k = self.k();
        let n = a.n();
        if self.breakdown {
            return Err(Error::InvalidArgument("cannot extend past a happy breakdown".into()));
        }
        if k >= n {
            return Err(Error::InvalidArgument(format!("krylov dimension {k} already equals n = {n}")));
        }
        let mut w = a.matvec(&self.basis[k])?;
        let mut col = vec![0.0; k + 2];
        match self.opts.mode {
            KrylovMode::Arnoldi => {
                for (i, v) in self.basis.iter().enumerate() {
                    let h = dot(&w, v);
                    axpy(-h, v, &mut w);
                    col[i] = h;
                }
            }
            KrylovMode::Lanczos => {
                if k > 0 {
                    let b = self.hcols[k - 1][k];
                    axpy(-b, &self.basis[k - 1], &mut w);
                    col[k - 1] = b;
                }
                let alpha = dot(&w, &self.basis[k]);
                axpy(-alpha, &self.basis[k], &mut w);
                col[k] = alpha;
            }
        }
        if self.opts.reorthogonalize {
            for (i, v) in self.basis.iter().enumerate() {
                let h = dot(&w, v);
                axpy(-h, v, &mut w);
                if self.opts.mode == KrylovMode::Arnoldi {
                    col[i] += h;
                }
            }
        }
        let h_next = norm2(&w);
        if h_next <= self.opts.breakdown_tol {
            col[k + 1] = 0.0;
            self.hcols.push(col);
            self.basis.push(vec![0.0; n]);
            self.breakdown = true;
            return Ok(Step::HappyBreakdown);
        }
        col[k + 1] = h_next;
        w.iter_mut().for_each(|x| *x /= h_next);
        self.hcols.push(col);
        self.basis.push(w);
        Ok(Step::Continued)
    }

    /// Number of completed steps.
    pub fn k(&self) -> usize {
        self.hcols.len()
    }

    pub fn beta(&self) -> f64 {
        self.beta
    }

    pub fn mode(&self) -> KrylovMode {
        self.opts.mode
    }

    pub fn options(&self) -> &KrylovOptions {
        &self.opts
    }

    pub fn is_breakdown(&self) -> bool {
        self.breakdown
    }

    /// `h_{k+1,k}`, zero before the first step and after a breakdown.
    pub fn h_sub(&self) -> f64 {
        self.hcols.last().map_or(0.0, |c| c[c.len() - 1])
    }

    pub fn basis(&self) -> &[Vec<f64>] {
        &self.basis
    }

    /// Extended Hessenberg matrix, `(k+1) x k`.
    pub fn hbar(&self) -> DenseMatrix {
        let k = self.k();
        let mut h = DenseMatrix::zeros(k + 1, k);
        for (j, col) in self.hcols.iter().enumerate() {
            for (i, &v) in col.iter().enumerate() {
                h[(i, j)] = v;
            }
        }
        h
    }

    /// Square projection `H_k = V_k^T A V_k`.
    pub fn h_square(&self) -> DenseMatrix {
        let k = self.k();
        self.hbar().top_left(k, k)
    }

    /// `V_k c` for a coefficient vector of length `k`.
    pub fn combine(&self, coeffs: &[f64]) -> Result<Vec<f64>> {
        check_dim(self.k(), coeffs.len())?;
        let mut y = vec![0.0; self.basis[0].len()];
        for (c, v) in coeffs.iter().zip(&self.basis) {
            axpy(*c, v, &mut y);
        }
        Ok(y)
    }
}
