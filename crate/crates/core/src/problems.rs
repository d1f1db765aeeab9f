//! Deterministic generators for the test operators.
//!
//! Every generator returns an operator `A` whose symmetric part is
//! nonnegative definite, together with a source `g`, an initial value and a
//! final time.

use std::f64::consts::PI;

use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

#[derive(Debug, Clone)]
pub struct ProblemInstance {
    pub a: SparseMatrix,
    pub g: Vec<f64>,
    pub v0: Vec<f64>,
    pub t_final: f64,
    pub label: String,
}

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Source3d {
    Sine,
    Gaussian,
}

impl std::str::FromStr for Source3d {
    type Err = Error;
    fn from_str(s: &str) -> Result<Self> {
        match s {
            "sine" => Ok(Source3d::Sine),
            "gaussian" => Ok(Source3d::Gaussian),
            other => Err(Error::InvalidArgument(format!("unknown source '{other}'"))),
        }
    }
}

/// Rounds to a multiple of 2^-20 so that short integer combinations are exact.
fn dyadic(x: f64) -> f64 {
    const GRID: f64 = 1048576.0;
    (x * GRID).round() / GRID
}

/// Axis weights of the anisotropic operator `1e4 d_xx + 1e2 d_yy + d_zz`.
pub const ANISO_WEIGHTS: [f64; 3] = [1e4, 1e2, 1.0];

/// Periodic anisotropic diffusion on the unit cube, fourth-order central
/// differences `(-1/12, 4/3, -5/2, 4/3, -1/12) / h^2` per axis.
///
/// Stencil coefficients are quantized to a dyadic grid (relative change below
/// 1e-8) so that every row sums to exactly zero in floating point.
pub fn gen_aniso_diffusion_3d(m: usize, source: Source3d) -> Result<ProblemInstance> {
    if m < 8 {
        return Err(Error::InvalidArgument(format!("periodic stencil needs m >= 8, got {m}")));
    }
    let n = m * m * m;
    let h = 1.0 / m as f64;
    let q: Vec<f64> = ANISO_WEIGHTS.iter().map(|w| dyadic(w / (12.0 * h * h))).collect();
    let idx = |i: usize, j: usize, k: usize| (i * m + j) * m + k;
    let wrap = |i: usize, d: isize| ((i as isize + d).rem_euclid(m as isize)) as usize;
    let diag = 30.0 * (q[0] + q[1] + q[2]);
    let mut trip = Vec::with_capacity(13 * n);
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                let row = idx(i, j, k);
                trip.push((row, row, diag));
                for (d, coef) in [(-2isize, 1.0), (-1, -16.0), (1, -16.0), (2, 1.0)] {
                    trip.push((row, idx(wrap(i, d), j, k), coef * q[0]));
                    trip.push((row, idx(i, wrap(j, d), k), coef * q[1]));
                    trip.push((row, idx(i, j, wrap(k, d)), coef * q[2]));
                }
            }
        }
    }
    let a = SparseMatrix::from_triplets(n, trip)?;
    let center = |i: usize| (i as f64 + 0.5) * h;
    let mut g = Vec::with_capacity(n);
    for i in 0..m {
        for j in 0..m {
            for k in 0..m {
                let (x, y, z) = (center(i), center(j), center(k));
                let poly = x * (1.0 - x) * y * (1.0 - y) * z * (1.0 - z);
                let s = match source {
                    Source3d::Sine => (2.0 * PI * x).sin() * (2.0 * PI * y).sin() * (2.0 * PI * z).sin(),
                    Source3d::Gaussian => {
                        (-500.0 * ((x - 0.5).powi(2) + (y - 0.5).powi(2) + (z - 0.5).powi(2))).exp()
                    }
                };
                g.push(s + poly);
            }
        }
    }
    let label = format!("aniso3d-m{m}-{}", if source == Source3d::Sine { "sine" } else { "gaussian" });
    Ok(ProblemInstance { a, g, v0: vec![0.0; n], t_final: 1000.0, label })
}

/// Diffusion coefficient of the convection–diffusion test: `1e3` in the inner
/// square `[-0.4, 0.4]^2`, `1e-4` in the surrounding wall of width 0.2, `1`
/// elsewhere. The wall has a slit of width 0.1 centred on its right side.
pub fn diffusion_coefficient(x: f64, y: f64) -> f64 {
    let (ax, ay) = (x.abs(), y.abs());
    if ax <= 0.4 && ay <= 0.4 {
        1e3
    } else if ax <= 0.6 && ay <= 0.6 {
        if x > 0.4 && ay <= 0.05 {
            1.0
        } else {
            1e-4
        }
    } else {
        1.0
    }
}

/// Recirculating wind `(y (1 - x^2), x (y^2 - 1))`, divergence free.
pub fn wind(x: f64, y: f64) -> (f64, f64) {
    (y * (1.0 - x * x), x * (y * y - 1.0))
}

/// Diffusion and convection parts of the 2D operator on `m x m` interior points of `[-1, 1]^2`.
///
/// The diffusion part uses face-averaged coefficients and is symmetric; the
/// convection part discretizes `(v . grad u + div(v u)) / 2` centrally and is
/// exactly skew-symmetric.
pub fn conv_diff_parts(m: usize) -> Result<(SparseMatrix, SparseMatrix)> {
    if m < 2 {
        return Err(Error::InvalidArgument(format!("grid needs m >= 2, got {m}")));
    }
    let n = m * m;
    let h = 2.0 / (m + 1) as f64;
    let coord = |i: isize| -1.0 + (i + 1) as f64 * h;
    let idx = |i: usize, j: usize| j * m + i;
    let inv_h2 = 1.0 / (h * h);
    let inv_4h = 1.0 / (4.0 * h);
    let mut diff = Vec::with_capacity(5 * n);
    let mut conv = Vec::with_capacity(4 * n);
    for j in 0..m {
        for i in 0..m {
            let row = idx(i, j);
            let (x, y) = (coord(i as isize), coord(j as isize));
            let d0 = diffusion_coefficient(x, y);
            let mut diag = 0.0;
            // neighbours (di, dj); out-of-range ones sit on the Dirichlet boundary
            for (di, dj) in [(-1isize, 0isize), (1, 0), (0, -1), (0, 1)] {
                let (ni, nj) = (i as isize + di, j as isize + dj);
                let (nx, ny) = (coord(ni), coord(nj));
                let face = 0.5 * (d0 + diffusion_coefficient(nx, ny)) * inv_h2;
                diag += face;
                let inside = ni >= 0 && nj >= 0 && (ni as usize) < m && (nj as usize) < m;
                if inside {
                    let col = idx(ni as usize, nj as usize);
                    diff.push((row, col, -face));
                    let (w0, w1) = (wind(x, y), wind(nx, ny));
                    let vel = if di != 0 { w0.0 + w1.0 } else { w0.1 + w1.1 };
                    let sign = if di + dj > 0 { 1.0 } else { -1.0 };
                    conv.push((row, col, sign * vel * inv_4h));
                }
            }
            diff.push((row, row, diag));
        }
    }
    Ok((SparseMatrix::from_triplets(n, diff)?, SparseMatrix::from_triplets(n, conv)?))
}

/// 2D convection–diffusion with recirculating wind and a walled diffusion field.
pub fn gen_conv_diff_2d(m: usize, peclet: f64) -> Result<ProblemInstance> {
    if m < 16 {
        return Err(Error::InvalidArgument(format!("grid needs m >= 16, got {m}")));
    }
    if !(peclet > 0.0) {
        return Err(Error::InvalidArgument(format!("Peclet number must be positive, got {peclet}")));
    }
    let (diff, conv) = conv_diff_parts(m)?;
    let a = diff.linear_combination(1.0, &conv, peclet)?;
    let h = 2.0 / (m + 1) as f64;
    let mut g = Vec::with_capacity(m * m);
    for j in 0..m {
        for i in 0..m {
            let (x, y) = (-1.0 + (i + 1) as f64 * h, -1.0 + (j + 1) as f64 * h);
            g.push(1000.0 * (-100.0 * (x * x + y * y)).exp());
        }
    }
    Ok(ProblemInstance { a, g, v0: vec![0.01; m * m], t_final: 1e-3, label: format!("convdiff2d-m{m}-pe{peclet}") })
}

/// Tridiagonal matrix with unit diagonal and off-diagonals `1/sqrt 2, 1/2, 1/2, ...`;
/// its spectrum fills `[0, 2]` and `g = e_1`.
pub fn gen_worst_case(n: usize) -> Result<ProblemInstance> {
    if n < 3 {
        return Err(Error::InvalidArgument(format!("worst-case matrix needs n >= 3, got {n}")));
    }
    let mut trip = Vec::with_capacity(3 * n);
    for i in 0..n {
        trip.push((i, i, 1.0));
        if i + 1 < n {
            let off = if i == 0 { std::f64::consts::FRAC_1_SQRT_2 } else { 0.5 };
            trip.push((i, i + 1, off));
            trip.push((i + 1, i, off));
        }
    }
    let mut g = vec![0.0; n];
    g[0] = 1.0;
    Ok(ProblemInstance {
        a: SparseMatrix::from_triplets(n, trip)?,
        g,
        v0: vec![0.0; n],
        t_final: 1.0,
        label: format!("worst-n{n}"),
    })
}

/// `tridiag(-1, 2, -1) / h^2` with `h = 1/(n+1)` and a Gaussian source centred at 0.5.
pub fn gen_laplacian_1d(n: usize) -> Result<ProblemInstance> {
    if n < 2 {
        return Err(Error::InvalidArgument(format!("laplacian needs n >= 2, got {n}")));
    }
    let h = 1.0 / (n + 1) as f64;
    let s = 1.0 / (h * h);
    let mut trip = Vec::with_capacity(3 * n);
    for i in 0..n {
        trip.push((i, i, 2.0 * s));
        if i + 1 < n {
            trip.push((i, i + 1, -s));
            trip.push((i + 1, i, -s));
        }
    }
    let g = (0..n).map(|i| (-100.0 * ((i + 1) as f64 * h - 0.5).powi(2)).exp()).collect();
    Ok(ProblemInstance {
        a: SparseMatrix::from_triplets(n, trip)?,
        g,
        v0: vec![0.0; n],
        t_final: 1.0,
        label: format!("laplacian1d-n{n}"),
    })
}
