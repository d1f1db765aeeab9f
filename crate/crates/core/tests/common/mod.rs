//! Independent reference computations shared by the integration tests.
#![allow(dead_code)]

use phirt::dense::DenseMatrix;
use phirt::krylov::ArnoldiDecomposition;
use rand::{Rng, SeedableRng};
use rand_chacha::ChaCha8Rng;

pub fn rng(seed: u64) -> ChaCha8Rng {
    ChaCha8Rng::seed_from_u64(seed)
}

pub fn random_vec(rng: &mut ChaCha8Rng, n: usize) -> Vec<f64> {
    (0..n).map(|_| rng.gen_range(-1.0..1.0)).collect()
}

pub fn random_dense(rng: &mut ChaCha8Rng, rows: usize, cols: usize) -> DenseMatrix {
    DenseMatrix::from_row_major(rows, cols, (0..rows * cols).map(|_| rng.gen_range(-1.0..1.0)).collect()).unwrap()
}

/// `B^T B / n + skew`: symmetric part positive semidefinite by construction.
pub fn random_field(rng: &mut ChaCha8Rng, n: usize, skew_weight: f64) -> DenseMatrix {
    let b = random_dense(rng, n, n);
    let spd = b.transpose().matmul(&b).scaled(1.0 / n as f64);
    let c = random_dense(rng, n, n);
    let skew = c.add_scaled(-1.0, &c.transpose()).scaled(0.5 * skew_weight);
    spd.add_scaled(1.0, &skew)
}

pub fn vec_norm(x: &[f64]) -> f64 {
    x.iter().map(|v| v * v).sum::<f64>().sqrt()
}

pub fn vec_sub(a: &[f64], b: &[f64]) -> Vec<f64> {
    a.iter().zip(b).map(|(x, y)| x - y).collect()
}

/// Plain triple-loop dense product.
pub fn dense_matvec(a: &DenseMatrix, x: &[f64]) -> Vec<f64> {
    (0..a.rows()).map(|i| (0..a.cols()).map(|j| a[(i, j)] * x[j]).sum()).collect()
}

pub fn max_abs_diff(a: &DenseMatrix, b: &DenseMatrix) -> f64 {
    a.as_slice().iter().zip(b.as_slice()).map(|(x, y)| (x - y).abs()).fold(0.0, f64::max)
}

/// Neumaier-compensated accumulator.
#[derive(Default, Clone, Copy)]
pub struct Compensated {
    sum: f64,
    carry: f64,
}

impl Compensated {
    pub fn add(&mut self, x: f64) {
        let t = self.sum + x;
        if self.sum.abs() >= x.abs() {
            self.carry += (self.sum - t) + x;
        } else {
            self.carry += (x - t) + self.sum;
        }
        self.sum = t;
    }

    pub fn value(&self) -> f64 {
        self.sum + self.carry
    }
}

/// Truncated Taylor series of `exp(M)` with compensated entrywise summation.
pub fn taylor_expm(m: &DenseMatrix, terms: usize) -> DenseMatrix {
    let n = m.rows();
    let mut acc = vec![Compensated::default(); n * n];
    let mut term = DenseMatrix::identity(n);
    for j in 0..terms {
        for (a, &t) in acc.iter_mut().zip(term.as_slice()) {
            a.add(t);
        }
        term = m.matmul(&term).scaled(1.0 / (j + 1) as f64);
    }
    DenseMatrix::from_row_major(n, n, acc.iter().map(Compensated::value).collect()).unwrap()
}

/// `phi(Z) x = sum_j Z^j x / (j+1)!` with compensated summation.
pub fn phi_series(z: &DenseMatrix, x: &[f64], terms: usize) -> Vec<f64> {
    let n = z.rows();
    let mut acc = vec![Compensated::default(); n];
    let mut w = x.to_vec();
    for j in 0..terms {
        let f = 1.0 / (j + 1) as f64;
        w.iter_mut().for_each(|v| *v *= f);
        for (a, &v) in acc.iter_mut().zip(&w) {
            a.add(v);
        }
        w = dense_matvec(z, &w);
    }
    acc.iter().map(Compensated::value).collect()
}

/// Number of eigenvalues of the symmetric `s` below `sigma`, from the pivots of
/// an LDL^T factorization of `s - sigma I` (Sylvester's law of inertia).
pub fn count_below(s: &DenseMatrix, sigma: f64) -> usize {
    let n = s.rows();
    let mut a: Vec<Vec<f64>> = (0..n).map(|i| (0..n).map(|j| s[(i, j)] - if i == j { sigma } else { 0.0 }).collect()).collect();
    let scale = s.max_abs().max(1.0);
    let mut neg = 0;
    for k in 0..n {
        let mut p = a[k][k];
        if p == 0.0 {
            p = -1e-300 * scale;
        }
        if p < 0.0 {
            neg += 1;
        }
        let (top, rest) = a.split_at_mut(k + 1);
        let pivot_row = &top[k];
        for row in rest.iter_mut() {
            let f = row[k] / p;
            if f != 0.0 {
                for (x, &y) in row[k + 1..].iter_mut().zip(&pivot_row[k + 1..]) {
                    *x -= f * y;
                }
            }
        }
    }
    neg
}

/// Smallest eigenvalue of the symmetric part by inertia bisection.
pub fn bisect_min_eig(m: &DenseMatrix) -> f64 {
    let s = m.symmetric_part();
    let r = (0..s.rows()).map(|i| (0..s.cols()).map(|j| s[(i, j)].abs()).sum::<f64>()).fold(0.0, f64::max);
    let (mut lo, mut hi) = (-r - 1.0, r + 1.0);
    for _ in 0..200 {
        let mid = 0.5 * (lo + hi);
        if count_below(&s, mid) >= 1 {
            hi = mid;
        } else {
            lo = mid;
        }
        if hi - lo < 1e-14 * (1.0 + r) {
            break;
        }
    }
    0.5 * (lo + hi)
}

/// `ln n!` for `n = 0..=max`, compensated.
pub fn ln_factorials(max: usize) -> Vec<f64> {
    let mut out = Vec::with_capacity(max + 1);
    let mut acc = Compensated::default();
    out.push(0.0);
    for j in 1..=max {
        acc.add((j as f64).ln());
        out.push(acc.value());
    }
    out
}

/// `e^{-w} I_nu(w)` from the power series `sum_m (w/2)^{2m+nu} / (m! (m+nu)!)`, summed in log space.
pub fn bessel_power_series(nu: usize, w: f64, lnf: &[f64]) -> f64 {
    if w == 0.0 {
        return if nu == 0 { 1.0 } else { 0.0 };
    }
    let lh = (0.5 * w).ln();
    let mut logs = Vec::new();
    let mut m = 0usize;
    let mut peak = f64::NEG_INFINITY;
    loop {
        let l = (2 * m + nu) as f64 * lh - lnf[m] - lnf[m + nu] - w;
        peak = peak.max(l);
        logs.push(l);
        if (l < peak - 50.0 && m as f64 > w) || m + nu + 1 >= lnf.len() {
            break;
        }
        m += 1;
    }
    let mut acc = Compensated::default();
    for l in &logs {
        acc.add((l - peak).exp());
    }
    (peak + acc.value().ln()).exp()
}

/// `4 sum_{nu=k}^{nu_hi} (nu-k+2)(nu-k+1) rho^nu e^{-w} I_nu(w)` by direct summation.
pub fn bound_by_summation(k: usize, w: f64, rho: f64, nu_hi: usize) -> f64 {
    let lnf = ln_factorials(2 * nu_hi + 4 * w.ceil() as usize + 200);
    let mut acc = Compensated::default();
    for nu in k..=nu_hi {
        let m = (nu - k) as f64;
        acc.add((m + 2.0) * (m + 1.0) * rho.powi(nu as i32) * bessel_power_series(nu, w, &lnf));
    }
    4.0 * acc.value()
}

/// Basis `V_k` as a dense `n x k` matrix.
pub fn basis_matrix(dec: &ArnoldiDecomposition, cols: usize) -> DenseMatrix {
    let n = dec.basis()[0].len();
    let mut v = DenseMatrix::zeros(n, cols);
    for (j, col) in dec.basis().iter().take(cols).enumerate() {
        for i in 0..n {
            v[(i, j)] = col[i];
        }
    }
    v
}

/// Residual `-A y_k + g - y_k'` with `y_k = V_k u`, `y_k' = V_k (-H_k u + beta e_1)`,
/// for a decomposition started from `g` (zero initial value).
pub fn dense_residual(a: &DenseMatrix, g: &[f64], dec: &ArnoldiDecomposition, u: &[f64]) -> Vec<f64> {
    let k = dec.k();
    let v = basis_matrix(dec, k);
    let h = dec.h_square();
    let y = dense_matvec(&v, u);
    let mut du: Vec<f64> = dense_matvec(&h, u).iter().map(|x| -x).collect();
    du[0] += dec.beta();
    let dy = dense_matvec(&v, &du);
    let ay = dense_matvec(a, &y);
    (0..g.len()).map(|i| -ay[i] + g[i] - dy[i]).collect()
}

/// `phi(-z)` for scalar `z >= 0`.
pub fn phi_neg(z: f64) -> f64 {
    if z == 0.0 {
        1.0
    } else {
        -(-z).exp_m1() / z
    }
}
