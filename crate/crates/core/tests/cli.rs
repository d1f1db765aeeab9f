//! End-to-end runs of the `phirt` binary.

use std::path::Path;
use std::process::{Command, Output};

use phirt::mm;
use phirt::problems::gen_laplacian_1d;

fn phirt(dir: &Path, args: &[&str]) -> Output {
    Command::new(env!("CARGO_BIN_EXE_phirt")).current_dir(dir).args(args).output().unwrap()
}

fn stdout(o: &Output) -> String {
    String::from_utf8_lossy(&o.stdout).into_owned()
}

fn field(text: &str, key: &str) -> String {
    text.lines()
        .find_map(|l| l.strip_prefix(&format!("{key}=")))
        .unwrap_or_else(|| panic!("missing {key} in\n{text}"))
        .to_string()
}

#[test]
fn gen_then_solve_reports_small_error() {
    let dir = tempfile::tempdir().unwrap();
    let g = phirt(dir.path(), &["gen", "--problem", "laplacian1d", "--n", "400"]);
    assert_eq!(g.status.code(), Some(0), "{}", String::from_utf8_lossy(&g.stderr));
    for f in ["A.mtx", "g.txt", "v0.txt", "problem.conf"] {
        assert!(dir.path().join(f).exists());
    }
    let s = phirt(dir.path(), &["solve", "--t", "1", "--tol", "1e-6", "--kmax", "10"]);
    assert_eq!(s.status.code(), Some(0), "{}", String::from_utf8_lossy(&s.stderr));
    let out = stdout(&s);
    assert_eq!(field(&out, "converged"), "true");
    assert_eq!(field(&out, "reference"), "oracle");
    let err: f64 = field(&out, "error_abs").parse().unwrap();
    assert!(err <= 1e-6, "{err}");
}

#[test]
fn config_file_supplies_flags() {
    let dir = tempfile::tempdir().unwrap();
    let sub = dir.path().join("prob");
    let g = phirt(dir.path(), &["gen", "--problem", "worst", "--n", "50", "--out", "prob"]);
    assert_eq!(g.status.code(), Some(0));
    let conf = sub.join("problem.conf");
    let s = phirt(dir.path(), &["solve", "--config", conf.to_str().unwrap(), "--tol", "1e-8"]);
    assert_eq!(s.status.code(), Some(0), "{}", String::from_utf8_lossy(&s.stderr));
    let out = stdout(&s);
    assert_eq!(field(&out, "t"), "1e0");
    assert_eq!(field(&out, "tol"), "1e-8");
}

#[test]
fn stationary_input_returns_initial_value() {
    let dir = tempfile::tempdir().unwrap();
    let p = gen_laplacian_1d(30).unwrap();
    let v: Vec<f64> = (0..30).map(|i| (i as f64 * 0.3).sin()).collect();
    let g = p.a.matvec(&v).unwrap();
    mm::write_matrix_market(&dir.path().join("A.mtx"), &p.a, mm::Symmetry::General).unwrap();
    mm::write_vector(&dir.path().join("g.txt"), &g).unwrap();
    mm::write_vector(&dir.path().join("v.txt"), &v).unwrap();
    let s = phirt(
        dir.path(),
        &["solve", "--matrix", "A.mtx", "--g", "g.txt", "--v0", "v.txt", "--t", "3", "--out", "y.txt"],
    );
    assert_eq!(s.status.code(), Some(0), "{}", String::from_utf8_lossy(&s.stderr));
    let out = stdout(&s);
    assert_eq!(field(&out, "restarts"), "0");
    assert_eq!(field(&out, "matvecs"), "1");
    assert_eq!(mm::read_vector(&dir.path().join("y.txt")).unwrap(), v);
}

#[test]
fn bounds_dominate_measured_residuals() {
    let dir = tempfile::tempdir().unwrap();
    let s = phirt(dir.path(), &["bounds", "--problem", "worst", "--n", "1000", "--c", "1", "--t", "20", "--kmax", "60"]);
    assert_eq!(s.status.code(), Some(0), "{}", String::from_utf8_lossy(&s.stderr));
    let out = stdout(&s);
    let mut rows = 0;
    for line in out.lines().skip(2) {
        let cols: Vec<f64> = line.split(',').map(|x| x.parse().unwrap()).collect();
        assert_eq!(cols.len(), 3);
        if cols[2] >= 1e-12 {
            assert!(cols[1] >= cols[2], "k = {}: bound {} < residual {}", cols[0], cols[1], cols[2]);
        }
        rows += 1;
    }
    assert_eq!(rows, 59);
}

#[test]
fn bench_csv_is_deterministic_and_controlled() {
    let dir = tempfile::tempdir().unwrap();
    let args = ["bench", "--problem", "laplacian1d", "--n", "200", "--t", "0.5", "--kmax", "10", "--sweep", "1e-3,1e-5,1e-7"];
    let a = stdout(&phirt(dir.path(), &args));
    let b = stdout(&phirt(dir.path(), &args));
    let strip = |s: &str| -> Vec<String> {
        s.lines()
            .map(|l| {
                let mut c: Vec<&str> = l.split(',').collect();
                if c.len() == 7 {
                    c.remove(5);
                }
                c.join(",")
            })
            .collect()
    };
    assert_eq!(strip(&a), strip(&b));
    let lines: Vec<&str> = a.lines().collect();
    assert_eq!(lines[0], phirt::bench::CSV_SCHEMA);
    assert_eq!(lines[1], phirt::bench::CSV_HEADER);
    for (i, line) in lines[2..].iter().enumerate() {
        let c: Vec<&str> = line.split(',').collect();
        assert_eq!(c[0], i.to_string());
        let tol: f64 = c[2].parse().unwrap();
        let err: f64 = c[3].parse().unwrap();
        assert!(err <= tol, "{line}");
        assert!(c[4].parse::<usize>().unwrap() >= 1);
    }
}

#[test]
fn estimate_reports_restart_count() {
    let dir = tempfile::tempdir().unwrap();
    let s = phirt(dir.path(), &["estimate", "--c", "2", "--t", "100", "--kmax", "30", "--tol-r", "1e-6"]);
    assert_eq!(s.status.code(), Some(0));
    let out = stdout(&s);
    let delta: f64 = field(&out, "delta").parse().unwrap();
    let j: usize = field(&out, "restarts").parse().unwrap();
    assert_eq!(j, (100.0 / delta).ceil() as usize);
    let e = phirt(dir.path(), &["estimate", "--problem", "convdiff2d", "--m", "32", "--enclosure", "--kmax", "20"]);
    assert_eq!(e.status.code(), Some(0), "{}", String::from_utf8_lossy(&e.stderr));
    let rho: f64 = field(&stdout(&e), "rho").parse().unwrap();
    assert!(rho >= 1.0);
}

#[test]
fn exit_codes() {
    let dir = tempfile::tempdir().unwrap();
    assert_eq!(phirt(dir.path(), &["solve", "--kmax", "oops"]).status.code(), Some(1));
    assert_eq!(phirt(dir.path(), &["solve", "--t", "1"]).status.code(), Some(1), "missing files");
    assert_eq!(phirt(dir.path(), &["gen"]).status.code(), Some(1));
    let s = phirt(
        dir.path(),
        &["solve", "--problem", "laplacian1d", "--n", "100", "--t", "1", "--tol", "1e-8", "--kmax", "2", "--max-restarts", "3"],
    );
    assert_eq!(s.status.code(), Some(2));
    let err = String::from_utf8_lossy(&s.stderr);
    assert!(err.starts_with("error kind=non_convergence detail="), "{err}");
    let s = phirt(dir.path(), &["estimate", "--c", "1e6", "--t", "1", "--kmax", "2", "--tol-r", "1e-300"]);
    assert_eq!(s.status.code(), Some(2), "{}", String::from_utf8_lossy(&s.stderr));
}
