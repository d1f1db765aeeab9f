//! Tolerance sweeps and their CSV records.

use std::fmt::Write as _;
use std::time::Instant;

use crate::error::Result;
use crate::oracle::{dense_phi_solve, DenseProblem};
use crate::phi_rt::{phi_rt_solve, relative_error, SolverConfig};
use crate::sparse::SparseMatrix;

/// First line of every CSV written by [`format_csv`].
pub const CSV_SCHEMA: &str = "# phirt-bench v1";
pub const CSV_HEADER: &str = "index,method,tol,delivered_error,matvecs,wall_s,restarts";

/// Tolerance of the self-reference used when no dense oracle is affordable.
pub const SELF_REFERENCE_TOL: f64 = 1e-11;

/// Largest dimension for which the dense oracle is the default reference.
pub const ORACLE_AUTO_MAX_N: usize = 500;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum ReferenceKind {
    Oracle,
    SelfSolve,
}

impl ReferenceKind {
    pub fn auto(n: usize) -> Self {
        if n <= ORACLE_AUTO_MAX_N {
            ReferenceKind::Oracle
        } else {
            ReferenceKind::SelfSolve
        }
    }

    pub fn label(self) -> &'static str {
        match self {
            ReferenceKind::Oracle => "oracle",
            ReferenceKind::SelfSolve => "self",
        }
    }
}

#[derive(Debug, Clone, PartialEq)]
pub struct BenchRecord {
    pub index: usize,
    pub method: String,
    pub tol: f64,
    /// `||y - y_ref|| / ||y_ref||`.
    pub delivered_error: f64,
    pub matvecs: usize,
    pub wall_seconds: f64,
    pub restarts: usize,
}

/// Problem data shared by all sweep points.
#[derive(Debug, Clone, Copy)]
pub struct SweepProblem<'a> {
    pub a: &'a SparseMatrix,
    pub v0: &'a [f64],
    pub g: &'a [f64],
    pub t: f64,
}

/// Reference solution by the dense oracle or by a tight self-solve with `base`'s other settings.
pub fn reference_solution(p: SweepProblem<'_>, kind: ReferenceKind, base: &SolverConfig) -> Result<Vec<f64>> {
    match kind {
        ReferenceKind::Oracle => dense_phi_solve(&DenseProblem::from_sparse(p.a, p.v0, p.g, p.t)?),
        ReferenceKind::SelfSolve => {
            let cfg = SolverConfig { tol: SELF_REFERENCE_TOL, ..base.clone() };
            Ok(phi_rt_solve(p.a, p.v0, p.g, p.t, &cfg)?.y)
        }
    }
}

fn run_point(p: SweepProblem<'_>, index: usize, tol: f64, base: &SolverConfig, y_ref: &[f64]) -> Result<BenchRecord> {
    let cfg = SolverConfig { tol, ..base.clone() };
    let start = Instant::now();
    let out = phi_rt_solve(p.a, p.v0, p.g, p.t, &cfg)?;
    let wall_seconds = start.elapsed().as_secs_f64();
    Ok(BenchRecord {
        index,
        method: format!("phiRT({})", cfg.k_max),
        tol,
        delivered_error: relative_error(&out.y, y_ref),
        matvecs: out.matvecs,
        wall_seconds,
        restarts: out.restarts,
    })
}

/// Solves once per tolerance, one after another.
pub fn sweep_sequential(p: SweepProblem<'_>, tols: &[f64], base: &SolverConfig, y_ref: &[f64]) -> Result<Vec<BenchRecord>> {
    tols.iter().enumerate().map(|(i, &tol)| run_point(p, i, tol, base, y_ref)).collect()
}

/// Solves the sweep points concurrently; records stay in sweep order.
#[cfg(feature = "parallel")]
pub fn sweep_parallel(p: SweepProblem<'_>, tols: &[f64], base: &SolverConfig, y_ref: &[f64]) -> Result<Vec<BenchRecord>> {
    use rayon::prelude::*;
    let results: Vec<Result<BenchRecord>> =
        tols.par_iter().enumerate().map(|(i, &tol)| run_point(p, i, tol, base, y_ref)).collect();
    results.into_iter().collect()
}

/// Parallel sweep when available, sequential otherwise.
pub fn sweep(p: SweepProblem<'_>, tols: &[f64], base: &SolverConfig, y_ref: &[f64]) -> Result<Vec<BenchRecord>> {
    #[cfg(feature = "parallel")]
    {
        sweep_parallel(p, tols, base, y_ref)
    }
    #[cfg(not(feature = "parallel"))]
    {
        sweep_sequential(p, tols, base, y_ref)
    }
}

pub fn format_csv(records: &[BenchRecord]) -> String {
    let mut out = String::new();
    let _ = writeln!(out, "{CSV_SCHEMA}");
    let _ = writeln!(out, "{CSV_HEADER}");
    for r in records {
        let _ = writeln!(
            out,
            "{},{},{:e},{:e},{},{:.6},{}",
            r.index, r.method, r.tol, r.delivered_error, r.matvecs, r.wall_seconds, r.restarts
        );
    }
    out
}

#[cfg(test)]
mod tests {
    use super::*;
    use crate::problems::gen_laplacian_1d;

    #[test]
    fn sweep_rows_follow_input_order() {
        let p = gen_laplacian_1d(40).unwrap();
        let sp = SweepProblem { a: &p.a, v0: &p.v0, g: &p.g, t: 0.1 };
        let base = SolverConfig { k_max: 8, ..SolverConfig::default() };
        let y_ref = reference_solution(sp, ReferenceKind::Oracle, &base).unwrap();
        let tols = [1e-3, 1e-6, 1e-4];
        let rec = sweep(sp, &tols, &base, &y_ref).unwrap();
        assert_eq!(rec.iter().map(|r| r.tol).collect::<Vec<_>>(), tols);
        assert_eq!(rec.iter().map(|r| r.index).collect::<Vec<_>>(), vec![0, 1, 2]);
        let seq = sweep_sequential(sp, &tols, &base, &y_ref).unwrap();
        for (a, b) in rec.iter().zip(&seq) {
            assert_eq!((a.matvecs, a.restarts, a.delivered_error), (b.matvecs, b.restarts, b.delivered_error));
        }
        let csv = format_csv(&rec);
        assert!(csv.starts_with(CSV_SCHEMA));
        assert_eq!(csv.lines().count(), 5);
    }
}
