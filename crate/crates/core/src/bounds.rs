//! A-priori residual bounds built from Chebyshev/Faber expansions.
//!
//! For a symmetric operator with spectrum in `[0, 2c]`, or a numerical range
//! inside the ellipse with foci `0`, `2c` and semiaxis sum `rho c`,
//!
//! ```text
//! ||r_k(t)|| / beta <= 4 e^{-ct} sum_{nu >= k} (nu-k+2)(nu-k+1) rho^nu I_nu(ct)
//! ```
//!
//! (`rho = 1` in the symmetric case). When `k >= max(5ct, 2)` the symmetric
//! series is dominated by `16 (ct)^k / (2k-1)!!`. Only exponentially scaled
//! Bessel values `e^{-w} I_nu(w)` are ever formed.

use crate::dense::{sym_eigen, DenseMatrix};
use crate::error::{Error, Result};

/// Ellipse with foci `0` and `2c` and semiaxis sum `rho * c`; `rho = 1` is the segment `[0, 2c]`.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SpectralEnclosure {
    pub c: f64,
    pub rho: f64,
}

impl SpectralEnclosure {
    pub fn new(c: f64, rho: f64) -> Result<Self> {
        if !(c > 0.0) || !(rho >= 1.0) || !c.is_finite() || !rho.is_finite() {
            return Err(Error::InvalidArgument(format!("invalid enclosure c = {c}, rho = {rho}")));
        }
        Ok(Self { c, rho })
    }

    pub fn segment(c: f64) -> Result<Self> {
        Self::new(c, 1.0)
    }
}

/// Truncation policy for the Bessel series.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct SeriesControl {
    /// A term below `rel_cutoff * partial_sum` counts as negligible.
    pub rel_cutoff: f64,
    /// Hard cap on summed terms; `None` means `k + 4000`.
    pub max_terms: Option<usize>,
}

impl Default for SeriesControl {
    fn default() -> Self {
        Self { rel_cutoff: 1e-16, max_terms: None }
    }
}

/// Consecutive negligible terms required before the sum is accepted.
const QUIET_TERMS: usize = 10;

fn miller_start(nu_max: usize, w: f64) -> usize {
    // the normalization sum needs every index where I_nu(w) is significant
    let top = nu_max.max(w.ceil() as usize);
    top + 15 + (2.0 * (top as f64 * w).sqrt()).ceil() as usize
}

/// `ln(e^{-w} I_nu(w))` for `nu = 0..=nu_max` by Miller's downward recurrence.
///
/// Values are normalized with `e^{-w} (I_0 + 2 sum_{nu>=1} I_nu) = 1`. Entries
/// that vanish (only `w = 0`, `nu >= 1`) are `-inf`.
pub fn log_scaled_bessel_i(nu_max: usize, w: f64) -> Result<Vec<f64>> {
    if !(w >= 0.0) || !w.is_finite() {
        return Err(Error::InvalidArgument(format!("bessel argument must be nonnegative, got {w}")));
    }
    if w == 0.0 {
        let mut out = vec![f64::NEG_INFINITY; nu_max + 1];
        out[0] = 0.0;
        return Ok(out);
    }
    const RESCALE: f64 = 1e200;
    let ln_rescale = RESCALE.ln();
    let start = miller_start(nu_max, w);
    // mantissa and rescale count per index
    let mut mant = vec![0.0; nu_max + 1];
    let mut level = vec![0u32; nu_max + 1];
    let mut next = 0.0f64; // b_{nu+1}
    let mut cur = 1e-280f64; // b_nu at nu = start
    let mut rescales = 0u32;
    let mut sum = 0.0f64; // normalization sum in units of the current level
    let two_over_w = 2.0 / w;
    let mut nu = start;
    loop {
        if nu <= nu_max {
            mant[nu] = cur;
            level[nu] = rescales;
        }
        sum += if nu == 0 { cur } else { 2.0 * cur };
        if nu == 0 {
            break;
        }
        let prev = next + (nu as f64) * two_over_w * cur;
        next = cur;
        cur = prev;
        nu -= 1;
        if cur.abs() > RESCALE {
            cur /= RESCALE;
            next /= RESCALE;
            sum /= RESCALE;
            rescales += 1;
        }
    }
    let ln_sum = sum.ln();
    Ok(mant
        .iter()
        .zip(&level)
        .map(|(&m, &l)| {
            if m <= 0.0 {
                f64::NEG_INFINITY
            } else {
                m.ln() - (rescales - l) as f64 * ln_rescale - ln_sum
            }
        })
        .collect())
}

/// `e^{-w} I_nu(w)` for `nu = 0..=nu_max`; underflowing values are returned as zero.
pub fn scaled_bessel_i(nu_max: usize, w: f64) -> Result<Vec<f64>> {
    Ok(log_scaled_bessel_i(nu_max, w)?.into_iter().map(f64::exp).collect())
}

/// `4 e^{-w} sum_{nu >= k} (nu-k+2)(nu-k+1) rho^nu I_nu(w)` with `w = ct`.
fn bessel_series(k: usize, w: f64, rho: f64, ctl: &SeriesControl) -> Result<f64> {
    if k < 2 {
        return Err(Error::InvalidArgument(format!("bound requires k >= 2, got {k}")));
    }
    if !(w >= 0.0) || !w.is_finite() {
        return Err(Error::InvalidArgument(format!("ct must be nonnegative, got {w}")));
    }
    if w == 0.0 {
        return Ok(0.0);
    }
    let max_terms = ctl.max_terms.unwrap_or(k + 4000);
    let ln_rho = rho.ln();
    // extend the tabulated range in blocks until the tail is negligible
    let mut block = (k + 64).max((w + 10.0 * w.sqrt()).ceil() as usize + 64);
    loop {
        let nu_max = (k + max_terms).min(block);
        let logs = log_scaled_bessel_i(nu_max, w)?;
        let mut sum = 0.0f64;
        let mut quiet = 0usize;
        for (nu, &log_i) in logs.iter().enumerate().skip(k) {
            let m = (nu - k) as f64;
            let term = ((m + 2.0) * (m + 1.0)).ln() + nu as f64 * ln_rho + log_i;
            let term = term.exp();
            if !term.is_finite() {
                return Err(Error::TruncationFailure { terms: nu - k });
            }
            sum += term;
            if term <= ctl.rel_cutoff * sum {
                quiet += 1;
                if quiet >= QUIET_TERMS {
                    return Ok(4.0 * sum);
                }
            } else {
                quiet = 0;
            }
        }
        if nu_max >= k + max_terms {
            return Err(Error::TruncationFailure { terms: max_terms });
        }
        block *= 2;
    }
}

/// Symmetric-case residual bound for spectrum in `[0, 2c]`.
pub fn residual_bound_sym(k: usize, c: f64, t: f64, ctl: &SeriesControl) -> Result<f64> {
    if !(c > 0.0) || !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("need c > 0 and t >= 0, got c = {c}, t = {t}")));
    }
    bessel_series(k, c * t, 1.0, ctl)
}

/// Elliptic numerical range bound; coincides with [`residual_bound_sym`] at `rho = 1`.
pub fn residual_bound_ellipse(k: usize, enc: &SpectralEnclosure, t: f64, ctl: &SeriesControl) -> Result<f64> {
    if !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("t must be nonnegative, got {t}")));
    }
    bessel_series(k, enc.c * t, enc.rho, ctl)
}

/// `ln (2k-1)!!`.
pub fn ln_double_factorial_odd(k: usize) -> f64 {
    (1..=k).map(|j| ((2 * j - 1) as f64).ln()).sum()
}

/// Closed-form bound `16 (ct)^k / (2k-1)!!`, valid for `k >= max(5ct, 2)`.
pub fn residual_bound_sym_closed(k: usize, c: f64, t: f64) -> Result<f64> {
    if !(c > 0.0) || !(t >= 0.0) {
        return Err(Error::InvalidArgument(format!("need c > 0 and t >= 0, got c = {c}, t = {t}")));
    }
    let ct = c * t;
    if k < 2 || (k as f64) < 5.0 * ct {
        return Err(Error::Domain(format!("closed-form bound needs k >= max(5ct, 2); k = {k}, ct = {ct}")));
    }
    if ct == 0.0 {
        return Ok(0.0);
    }
    Ok((16f64.ln() + k as f64 * ct.ln() - ln_double_factorial_odd(k)).exp())
}

/// Number of angles used to trace the numerical range boundary.
pub const DEFAULT_ENCLOSURE_ANGLES: usize = 64;

/// Boundary points of the numerical range `W(H)` in directions `2 pi j / angles`.
///
/// For each angle the maximal eigenvector `x` of the Hermitian part of
/// `e^{-i theta} H` is found through its real symmetric `2k x 2k` embedding,
/// and the point `x^* H x` is returned as `(re, im)`.
pub fn numerical_range_boundary(h: &DenseMatrix, angles: usize) -> Result<Vec<(f64, f64)>> {
    if !h.is_square() {
        return Err(Error::NotSquare { rows: h.rows(), cols: h.cols() });
    }
    let k = h.rows();
    let sym = h.symmetric_part();
    // skew part K = (H - H^T)/2
    let mut skew = DenseMatrix::zeros(k, k);
    for i in 0..k {
        for j in 0..k {
            skew[(i, j)] = 0.5 * (h[(i, j)] - h[(j, i)]);
        }
    }
    let mut pts = Vec::with_capacity(angles);
    for a in 0..angles {
        let theta = 2.0 * std::f64::consts::PI * a as f64 / angles as f64;
        let (c, s) = (theta.cos(), theta.sin());
        // Hermitian part of e^{-i theta} H is R + iQ with R = cos S, Q = -sin K,
        // embedded as the real symmetric [[R, -Q], [Q, R]]
        let mut emb = DenseMatrix::zeros(2 * k, 2 * k);
        for i in 0..k {
            for j in 0..k {
                let r = c * sym[(i, j)];
                let q = -s * skew[(i, j)];
                emb[(i, j)] = r;
                emb[(i + k, j + k)] = r;
                emb[(i, j + k)] = -q;
                emb[(i + k, j)] = q;
            }
        }
        let (vals, vecs) = sym_eigen(&emb, true)?;
        let vecs = vecs.expect("eigenvectors requested");
        let top = (0..2 * k).max_by(|&p, &q| vals[p].total_cmp(&vals[q])).unwrap();
        let x_re: Vec<f64> = (0..k).map(|i| vecs[(i, top)]).collect();
        let x_im: Vec<f64> = (0..k).map(|i| vecs[(i + k, top)]).collect();
        pts.push(rayleigh_quotient(h, &x_re, &x_im));
    }
    Ok(pts)
}

/// `x^* H x / x^* x` for a complex vector `x = re + i im` and real `H`.
pub fn rayleigh_quotient(h: &DenseMatrix, re: &[f64], im: &[f64]) -> (f64, f64) {
    let hr = h.matvec(re).expect("dimension");
    let hi = h.matvec(im).expect("dimension");
    let dot = crate::vector::dot;
    // (re - i im)^T (hr + i hi)
    let num_re = dot(re, &hr) + dot(im, &hi);
    let num_im = dot(re, &hi) - dot(im, &hr);
    let den = dot(re, re) + dot(im, im);
    (num_re / den, num_im / den)
}

/// Elliptic level `rho(z) >= 1` of a point relative to the foci `0` and `2c`.
pub fn ellipse_level(z: (f64, f64), c: f64) -> f64 {
    // w = (z - c)/c; rho = |w + sqrt(w^2 - 1)| on the branch with modulus >= 1
    let (wr, wi) = ((z.0 - c) / c, z.1 / c);
    let (sr, si) = complex_sqrt(wr * wr - wi * wi - 1.0, 2.0 * wr * wi);
    let a = ((wr + sr).powi(2) + (wi + si).powi(2)).sqrt();
    let b = ((wr - sr).powi(2) + (wi - si).powi(2)).sqrt();
    a.max(b).max(1.0)
}

fn complex_sqrt(re: f64, im: f64) -> (f64, f64) {
    let r = (re * re + im * im).sqrt();
    let sr = ((r + re) * 0.5).max(0.0).sqrt();
    let si = ((r - re) * 0.5).max(0.0).sqrt();
    (sr, if im < 0.0 { -si } else { si })
}

/// Estimates the enclosing ellipse of a projected matrix's numerical range.
///
/// `c` is half the largest eigenvalue of the symmetric part; `rho` is the
/// smallest level whose ellipse contains all sampled boundary points.
pub fn estimate_enclosure(h: &DenseMatrix) -> Result<SpectralEnclosure> {
    estimate_enclosure_with(h, DEFAULT_ENCLOSURE_ANGLES)
}

pub fn estimate_enclosure_with(h: &DenseMatrix, angles: usize) -> Result<SpectralEnclosure> {
    if !h.is_square() {
        return Err(Error::NotSquare { rows: h.rows(), cols: h.cols() });
    }
    if h.rows() < 2 {
        return Err(Error::InvalidArgument("enclosure needs dimension >= 2".into()));
    }
    let (vals, _) = sym_eigen(&h.symmetric_part(), false)?;
    let top = vals.iter().copied().fold(f64::NEG_INFINITY, f64::max);
    let c = (0.5 * top).max(f64::MIN_POSITIVE);
    let rho = numerical_range_boundary(h, angles)?
        .into_iter()
        .map(|z| ellipse_level(z, c))
        .fold(1.0, f64::max);
    SpectralEnclosure::new(c, rho)
}

/// Result of [`estimate_restarts`].
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct RestartEstimate {
    /// Largest admissible restart interval found.
    pub delta: f64,
    /// `ceil(t_total / delta)`.
    pub restarts: usize,
}

/// Pessimistic restart count from the a-priori bound: the largest `delta` with
/// `bound(k_max, enc, delta) <= tol_r`, then `J = ceil(t_total / delta)`.
pub fn estimate_restarts(
    enc: &SpectralEnclosure,
    t_total: f64,
    k_max: usize,
    tol_r: f64,
    ctl: &SeriesControl,
) -> Result<RestartEstimate> {
    if !(tol_r > 0.0) || !(t_total > 0.0) {
        return Err(Error::InvalidArgument("tol_r and t_total must be positive".into()));
    }
    // a series that cannot be summed is treated as exceeding the tolerance
    let admissible = |delta: f64| -> Result<bool> {
        match residual_bound_ellipse(k_max, enc, delta, ctl) {
            Ok(b) => Ok(b <= tol_r),
            Err(Error::TruncationFailure { .. }) => Ok(false),
            Err(e) => Err(e),
        }
    };
    if admissible(t_total)? {
        return Ok(RestartEstimate { delta: t_total, restarts: 1 });
    }
    let mut hi = t_total;
    let mut lo = 0.5 * t_total;
    while !admissible(lo)? {
        hi = lo;
        lo *= 0.5;
        if lo < f64::MIN_POSITIVE * 1e16 || lo <= t_total * f64::EPSILON {
            return Err(Error::Infeasible);
        }
    }
    for _ in 0..200 {
        if hi - lo <= 1e-12 * lo {
            break;
        }
        let mid = 0.5 * (lo + hi);
        if admissible(mid)? {
            lo = mid;
        } else {
            hi = mid;
        }
    }
    Ok(RestartEstimate { delta: lo, restarts: (t_total / lo).ceil() as usize })
}
