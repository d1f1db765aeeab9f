//! Residual–time (RT) restarted Krylov evaluation of `y(t) = v + t phi(-tA)(g - Av)`.
//!
//! For a Krylov approximation `y_k(s) = v + V_k u(s)`, where `u` solves the
//! projected problem `u' = -H_k u + beta e_1`, `u(0) = 0`, the residual
//! `-A y_k + g - y_k'` equals `-h_{k+1,k} v_{k+1} e_k^T u(s)`. Its norm is
//! therefore available at the cost of a small dense computation, and the
//! solver restarts on the longest time interval over which that norm stays
//! below `tol / t`. The accumulated error is then bounded by `tol`.

use crate::dense::{self, DenseMatrix, DEFAULT_DIM_CAP};
use crate::error::{check_dim, Error, Result};
use crate::krylov::{default_breakdown_tol, ArnoldiDecomposition, KrylovMode, KrylovOptions, Step};
use crate::sparse::{SparseMatrix, DEFAULT_SYMMETRY_TOL};
use crate::vector::{axpy, norm2};

/// Choice of Krylov process.
#[derive(Debug, Clone, Copy, PartialEq, Eq, Default)]
pub enum ModeSelect {
    /// Lanczos when the matrix passes the symmetry test, Arnoldi otherwise.
    #[default]
    Auto,
    Arnoldi,
    Lanczos,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolverConfig {
    /// Maximal Krylov dimension per restart.
    pub k_max: usize,
    /// Absolute error budget over the whole interval `[0, t]`.
    pub tol: f64,
    /// Residual samples on `[0, t]` for the stopping test.
    pub n_samples: usize,
    /// Initial restart granularity: the search starts at `t / coarse_divisor`.
    pub coarse_divisor: usize,
    /// Maximal number of halvings in the restart-length search.
    pub halving_cap: u32,
    pub max_restarts: usize,
    pub mode: ModeSelect,
    pub reorthogonalize: bool,
    /// Relative tolerance for automatic symmetry detection.
    pub symmetry_tol: f64,
}

impl Default for SolverConfig {
    fn default() -> Self {
        Self {
            k_max: 30,
            tol: 1e-6,
            n_samples: 6,
            coarse_divisor: 100,
            halving_cap: 50,
            max_restarts: 1_000_000,
            mode: ModeSelect::Auto,
            reorthogonalize: false,
            symmetry_tol: DEFAULT_SYMMETRY_TOL,
        }
    }
}

impl SolverConfig {
    pub fn with_tol(tol: f64) -> Self {
        Self { tol, ..Self::default() }
    }

    pub fn validate(&self) -> Result<()> {
        let bad = |m: &str| Err(Error::InvalidArgument(m.to_string()));
        if self.k_max < 1 {
            return bad("k_max must be at least 1");
        }
        if !(self.tol > 0.0) || !self.tol.is_finite() {
            return bad("tol must be positive");
        }
        if self.n_samples < 1 {
            return bad("n_samples must be at least 1");
        }
        if self.coarse_divisor < 1 {
            return bad("coarse_divisor must be at least 1");
        }
        if self.halving_cap < 1 {
            return bad("halving_cap must be at least 1");
        }
        if self.symmetry_tol < 0.0 {
            return bad("symmetry_tol must be nonnegative");
        }
        Ok(())
    }
}

/// Cached `E = exp(-dt H_k)` and `d = beta phi(-dt H_k) e_1`.
#[derive(Debug, Clone)]
pub struct ProjectedPropagator {
    e: DenseMatrix,
    d: Vec<f64>,
    dt: f64,
}

impl ProjectedPropagator {
    pub fn new(h: &DenseMatrix, beta: f64, dt: f64) -> Result<Self> {
        Self::with_cap(h, beta, dt, DEFAULT_DIM_CAP)
    }

    fn with_cap(h: &DenseMatrix, beta: f64, dt: f64, cap: usize) -> Result<Self> {
        let k = h.rows();
        let mut e1 = vec![0.0; k];
        if k > 0 {
            e1[0] = 1.0;
        }
        // one augmented exponential yields both blocks
        let aug = dense::augmented_exp(h, &e1, dt, cap)?;
        let d = (0..k).map(|i| beta * aug[(i, k)]).collect();
        Ok(Self { e: aug.top_left(k, k), d, dt })
    }

    pub fn from_decomposition(dec: &ArnoldiDecomposition, dt: f64) -> Result<Self> {
        Self::with_cap(&dec.h_square(), dec.beta(), dt, DEFAULT_DIM_CAP.max(dec.k() + 1))
    }

    pub fn dt(&self) -> f64 {
        self.dt
    }

    pub fn e(&self) -> &DenseMatrix {
        &self.e
    }

    pub fn d(&self) -> &[f64] {
        &self.d
    }

    /// Advances the projected solution by `dt`: `E u + dt d`.
    pub fn propagate(&self, u: &[f64]) -> Result<Vec<f64>> {
        let mut next = self.e.matvec(u)?;
        axpy(self.dt, &self.d, &mut next);
        Ok(next)
    }
}

/// `||r_k|| = h_{k+1,k} |e_k^T u|`; `u` already carries the factor `beta`.
pub fn residual_norm(dec: &ArnoldiDecomposition, u: &[f64]) -> f64 {
    match u.last() {
        Some(&last) if dec.k() > 0 => dec.h_sub() * last.abs(),
        _ => 0.0,
    }
}

/// Projected solution `u(t) = t phi(-t H_k) beta e_1`.
pub fn projected_solution(dec: &ArnoldiDecomposition, t: f64) -> Result<Vec<f64>> {
    let k = dec.k();
    let mut rhs = vec![0.0; k];
    if k == 0 {
        return Ok(rhs);
    }
    rhs[0] = dec.beta();
    let cap = DEFAULT_DIM_CAP.max(k + 1);
    let mut u = dense::phi_action_capped(&dec.h_square(), &rhs, t, cap)?;
    u.iter_mut().for_each(|x| *x *= t);
    Ok(u)
}

/// Samples the residual at `s = j t / n_samples`, `j = 1..n_samples`.
/// Returns the maximum and `u(t)`.
fn sample_residuals(dec: &ArnoldiDecomposition, t: f64, n_samples: usize) -> Result<(f64, Vec<f64>)> {
    let k = dec.k();
    if dec.is_breakdown() || k == 0 {
        return Ok((0.0, vec![0.0; k]));
    }
    let prop = ProjectedPropagator::from_decomposition(dec, t / n_samples as f64)?;
    let mut u = vec![0.0; k];
    let mut worst = 0.0f64;
    for _ in 0..n_samples {
        u = prop.propagate(&u)?;
        worst = worst.max(residual_norm(dec, &u));
    }
    Ok((worst, u))
}

/// Estimate of `max_{s in [0,t]} ||r_k(s)||` from `cfg.n_samples` equidistant samples.
pub fn estimate_max_residual(dec: &ArnoldiDecomposition, t: f64, cfg: &SolverConfig) -> Result<f64> {
    if !(t > 0.0) {
        return Err(Error::InvalidArgument("t must be positive".into()));
    }
    Ok(sample_residuals(dec, t, cfg.n_samples.max(1))?.0)
}

/// Finds the restart length `delta` and the projected solution `u(delta)`.
///
/// The search starts at `dt = t / coarse_divisor`. If the residual at `dt`
/// passes, the recursion walks forward and `delta` is the last passing
/// multiple of `dt`; otherwise `dt` is halved until it passes.
pub fn find_restart_delta(
    dec: &ArnoldiDecomposition,
    t: f64,
    tol_r: f64,
    cfg: &SolverConfig,
) -> Result<(f64, Vec<f64>)> {
    if !(t > 0.0) {
        return Err(Error::InvalidArgument("t must be positive".into()));
    }
    let k = dec.k();
    let steps = cfg.coarse_divisor.max(1);
    let dt = t / steps as f64;
    let prop = ProjectedPropagator::from_decomposition(dec, dt)?;
    let mut u = prop.propagate(&vec![0.0; k])?;
    if residual_norm(dec, &u) <= tol_r {
        let mut p = 1;
        while p < steps {
            let next = prop.propagate(&u)?;
            if residual_norm(dec, &next) > tol_r {
                break;
            }
            u = next;
            p += 1;
        }
        let delta = if p == steps { t } else { p as f64 * dt };
        return Ok((delta, u));
    }
    let mut dt = dt;
    for _ in 0..cfg.halving_cap {
        dt *= 0.5;
        let prop = ProjectedPropagator::from_decomposition(dec, dt)?;
        u = prop.propagate(&vec![0.0; k])?;
        if residual_norm(dec, &u) <= tol_r {
            return Ok((dt, u));
        }
    }
    Err(Error::Stagnation { tol: tol_r, dt, halvings: cfg.halving_cap })
}

/// A-priori residual bound `beta t h_{k+1,k} phi(-t omega_k)`.
pub fn prop1_bound(beta: f64, h_sub: f64, omega_k: f64, t: f64) -> f64 {
    if omega_k > 0.0 {
        beta * h_sub * (-(-t * omega_k).exp_m1()) / omega_k
    } else {
        beta * t * h_sub
    }
}

/// One entry of the residual history.
#[derive(Debug, Clone, Copy, PartialEq)]
pub struct ResidualSample {
    pub restart: usize,
    pub k: usize,
    pub max_residual: f64,
}

#[derive(Debug, Clone, PartialEq)]
pub struct SolveOutcome {
    pub y: Vec<f64>,
    /// Number of restarts `J`.
    pub restarts: usize,
    /// Time advanced by each restart cycle, including the final one.
    pub deltas: Vec<f64>,
    pub matvecs: usize,
    pub residual_trace: Vec<ResidualSample>,
    pub converged: bool,
    pub mode: KrylovMode,
}

pub fn resolve_mode(a: &SparseMatrix, cfg: &SolverConfig) -> KrylovMode {
    match cfg.mode {
        ModeSelect::Arnoldi => KrylovMode::Arnoldi,
        ModeSelect::Lanczos => KrylovMode::Lanczos,
        ModeSelect::Auto => {
            if a.is_symmetric(cfg.symmetry_tol) {
                KrylovMode::Lanczos
            } else {
                KrylovMode::Arnoldi
            }
        }
    }
}

/// Approximates `v + t phi(-tA)(g - Av)` with error at most `cfg.tol`.
///
/// Requires `x^T A x >= 0` for all `x`; this is not checked.
pub fn phi_rt_solve(
    a: &SparseMatrix,
    v: &[f64],
    g: &[f64],
    t: f64,
    cfg: &SolverConfig,
) -> Result<SolveOutcome> {
    cfg.validate()?;
    let n = a.n();
    check_dim(n, v.len())?;
    check_dim(n, g.len())?;
    if !(t > 0.0) || !t.is_finite() {
        return Err(Error::InvalidArgument("t must be positive and finite".into()));
    }
    let mode = resolve_mode(a, cfg);
    let opts = KrylovOptions {
        mode,
        reorthogonalize: cfg.reorthogonalize,
        breakdown_tol: default_breakdown_tol(a.one_norm()),
    };
    let tol_r = cfg.tol / t;
    let k_limit = cfg.k_max.min(n);

    let mut v_cur = v.to_vec();
    let mut t_rem = t;
    let mut restarts = 0usize;
    let mut matvecs = 0usize;
    let mut deltas = Vec::new();
    let mut trace = Vec::new();

    loop {
        let mut r0 = a.matvec(&v_cur)?;
        matvecs += 1;
        r0.iter_mut().zip(g).for_each(|(r, gi)| *r = gi - *r);
        let mut dec = match ArnoldiDecomposition::start(a, &r0, opts) {
            Ok(d) => d,
            Err(Error::BreakdownAtStart) => {
                // g = A v_cur: the current state is stationary
                deltas.push(t_rem);
                return Ok(SolveOutcome {
                    y: v_cur,
                    restarts,
                    deltas,
                    matvecs,
                    residual_trace: trace,
                    converged: true,
                    mode,
                });
            }
            Err(e) => return Err(e),
        };

        let mut converged = false;
        while dec.k() < k_limit {
            let step = dec.extend(a)?;
            matvecs += 1;
            let est = match step {
                Step::HappyBreakdown => 0.0,
                Step::Continued => estimate_max_residual(&dec, t_rem, cfg)?,
            };
            trace.push(ResidualSample { restart: restarts, k: dec.k(), max_residual: est });
            if est <= tol_r {
                converged = true;
                break;
            }
        }

        if converged {
            let u = projected_solution(&dec, t_rem)?;
            let update = dec.combine(&u)?;
            axpy(1.0, &update, &mut v_cur);
            deltas.push(t_rem);
            return Ok(SolveOutcome {
                y: v_cur,
                restarts,
                deltas,
                matvecs,
                residual_trace: trace,
                converged: true,
                mode,
            });
        }

        if restarts >= cfg.max_restarts {
            return Err(Error::NonConvergence { restarts, t_remaining: t_rem });
        }
        let (delta, u) = find_restart_delta(&dec, t_rem, tol_r, cfg)?;
        let update = dec.combine(&u)?;
        axpy(1.0, &update, &mut v_cur);
        restarts += 1;
        deltas.push(delta);
        if delta >= t_rem {
            return Ok(SolveOutcome {
                y: v_cur,
                restarts,
                deltas,
                matvecs,
                residual_trace: trace,
                converged: true,
                mode,
            });
        }
        t_rem -= delta;
    }
}

/// Relative difference `||y - y_ref|| / ||y_ref||` (absolute when `y_ref = 0`).
pub fn relative_error(y: &[f64], y_ref: &[f64]) -> f64 {
    let diff: Vec<f64> = y.iter().zip(y_ref).map(|(a, b)| a - b).collect();
    let nr = norm2(y_ref);
    if nr == 0.0 {
        norm2(&diff)
    } else {
        norm2(&diff) / nr
    }
}

#[cfg(test)]
mod tests {
    use super::*;

    fn lanczos_opts() -> KrylovOptions {
        KrylovOptions { mode: KrylovMode::Arnoldi, reorthogonalize: false, breakdown_tol: 1e-14 }
    }

    #[test]
    fn prop1_bound_branches() {
        assert_eq!(prop1_bound(2.0, 0.5, 0.0, 3.0), 3.0);
        let near = prop1_bound(2.0, 0.5, 1e-300, 3.0);
        assert!((near - 3.0).abs() < 1e-14);
        let w = 0.7;
        let b = prop1_bound(1.5, 2.0, w, 2.0);
        assert!((b - 1.5 * 2.0 * (1.0 - (-1.4f64).exp()) / w).abs() < 1e-14);
    }

    #[test]
    fn residual_norm_trivial_cases() {
        let a = SparseMatrix::identity(3);
        let mut d = ArnoldiDecomposition::start(&a, &[1.0, 0.0, 0.0], lanczos_opts()).unwrap();
        d.extend(&a).unwrap();
        // happy breakdown
        assert_eq!(residual_norm(&d, &[5.0]), 0.0);
        let b = SparseMatrix::from_diagonal(&[1.0, 2.0, 3.0]);
        let mut d = ArnoldiDecomposition::start(&b, &[1.0, 1.0, 1.0], lanczos_opts()).unwrap();
        d.extend(&b).unwrap();
        assert!(d.h_sub() > 0.0);
        assert_eq!(residual_norm(&d, &[0.0]), 0.0);
    }

    #[test]
    fn propagate_from_rest_and_zero_h() {
        let h = DenseMatrix::zeros(3, 3);
        let p = ProjectedPropagator::new(&h, 2.0, 0.25).unwrap();
        let u = p.propagate(&[0.0; 3]).unwrap();
        assert_eq!(u, vec![0.5, 0.0, 0.0]);
        let u2 = p.propagate(&u).unwrap();
        assert_eq!(u2, vec![1.0, 0.0, 0.0]);
    }

    #[test]
    fn config_validation() {
        assert!(SolverConfig::default().validate().is_ok());
        assert!(SolverConfig { k_max: 0, ..Default::default() }.validate().is_err());
        assert!(SolverConfig { tol: 0.0, ..Default::default() }.validate().is_err());
        assert!(SolverConfig { n_samples: 0, ..Default::default() }.validate().is_err());
        assert!(SolverConfig { halving_cap: 0, ..Default::default() }.validate().is_err());
    }

    #[test]
    fn zero_matrix_gives_linear_growth() {
        let a = SparseMatrix::from_triplets(4, std::iter::empty()).unwrap();
        let v = [1.0, -1.0, 0.5, 2.0];
        let g = [0.5, 0.0, -1.0, 3.0];
        let out = phi_rt_solve(&a, &v, &g, 2.0, &SolverConfig::with_tol(1e-10)).unwrap();
        for i in 0..4 {
            assert!((out.y[i] - (v[i] + 2.0 * g[i])).abs() < 1e-13);
        }
        assert!(out.converged);
    }

    #[test]
    fn stationary_start_returns_initial_value() {
        let a = SparseMatrix::from_diagonal(&[1.0, 2.0, 3.0]);
        let v = [1.0, 1.0, 1.0];
        let g = a.matvec(&v).unwrap();
        a.reset_matvec_count();
        let out = phi_rt_solve(&a, &v, &g, 5.0, &SolverConfig::default()).unwrap();
        assert_eq!(out.y, v.to_vec());
        assert_eq!(out.restarts, 0);
        assert_eq!(out.matvecs, 1);
        assert_eq!(a.matvec_count(), 1);
    }

    #[test]
    fn diagonal_closed_form() {
        let diag: Vec<f64> = (1..=12).map(|i| 0.3 * i as f64).collect();
        let a = SparseMatrix::from_diagonal(&diag);
        let v: Vec<f64> = (0..12).map(|i| (i as f64).sin()).collect();
        let g: Vec<f64> = (0..12).map(|i| 1.0 + 0.1 * i as f64).collect();
        let t = 2.5;
        let cfg = SolverConfig { tol: 1e-8, k_max: 4, ..Default::default() };
        let out = phi_rt_solve(&a, &v, &g, t, &cfg).unwrap();
        for i in 0..12 {
            let ai = diag[i];
            let want = v[i] + (1.0 - (-t * ai).exp()) / ai * (g[i] - ai * v[i]);
            assert!((out.y[i] - want).abs() <= 1e-8, "component {i}");
        }
        let total: f64 = out.deltas.iter().sum();
        assert!((total - t).abs() <= 1e-12 * t);
    }

    #[test]
    fn dimension_checks() {
        let a = SparseMatrix::identity(3);
        assert!(phi_rt_solve(&a, &[0.0; 2], &[1.0; 3], 1.0, &SolverConfig::default()).is_err());
        assert!(phi_rt_solve(&a, &[0.0; 3], &[1.0; 3], 0.0, &SolverConfig::default()).is_err());
    }

    #[test]
    fn relative_error_handles_zero_reference() {
        assert_eq!(relative_error(&[3.0, 4.0], &[0.0, 0.0]), 5.0);
        assert!((relative_error(&[1.0, 1.0], &[1.0, 0.0]) - 1.0).abs() < 1e-15);
    }
}
