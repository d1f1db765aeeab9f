//! Matrix Market coordinate files and plain vector files.

use std::fmt::Write as _;
use std::fs;
use std::path::Path;

use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

#[derive(Debug, Clone, Copy, PartialEq, Eq)]
pub enum Symmetry {
    General,
    Symmetric,
}

fn parse_err(line: usize, msg: impl std::fmt::Display) -> Error {
    Error::Parse(format!("line {line}: {msg}"))
}

/// Parses a real coordinate Matrix Market document (`general` or `symmetric`).
pub fn parse_matrix_market(text: &str) -> Result<SparseMatrix> {
    let mut lines = text.lines().enumerate();
    let (_, header) = lines.next().ok_or_else(|| Error::Parse("empty matrix file".into()))?;
    let fields: Vec<String> = header.split_whitespace().map(|s| s.to_ascii_lowercase()).collect();
    if fields.len() != 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" || fields[2] != "coordinate" {
        return Err(parse_err(1, "expected '%%MatrixMarket matrix coordinate <field> <symmetry>'"));
    }
    if fields[3] != "real" && fields[3] != "integer" {
        return Err(parse_err(1, format!("unsupported field '{}'", fields[3])));
    }
    let symmetry = match fields[4].as_str() {
        "general" => Symmetry::General,
        "symmetric" => Symmetry::Symmetric,
        other => return Err(parse_err(1, format!("unsupported symmetry '{other}'"))),
    };
    let mut size: Option<(usize, usize, usize)> = None;
    let mut trip = Vec::new();
    for (no, raw) in lines {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') {
            continue;
        }
        let mut it = line.split_whitespace();
        let mut next = |what: &str| it.next().ok_or_else(|| parse_err(no + 1, format!("missing {what}")));
        match size {
            None => {
                let r: usize = next("rows")?.parse().map_err(|e| parse_err(no + 1, e))?;
                let c: usize = next("cols")?.parse().map_err(|e| parse_err(no + 1, e))?;
                let z: usize = next("entry count")?.parse().map_err(|e| parse_err(no + 1, e))?;
                if r != c {
                    return Err(Error::NotSquare { rows: r, cols: c });
                }
                size = Some((r, c, z));
                trip.reserve(z * if symmetry == Symmetry::Symmetric { 2 } else { 1 });
            }
            Some((n, _, _)) => {
                let i: usize = next("row index")?.parse().map_err(|e| parse_err(no + 1, e))?;
                let j: usize = next("column index")?.parse().map_err(|e| parse_err(no + 1, e))?;
                let v: f64 = next("value")?.parse().map_err(|e| parse_err(no + 1, e))?;
                if i == 0 || j == 0 || i > n || j > n {
                    return Err(parse_err(no + 1, format!("index ({i}, {j}) outside 1..={n}")));
                }
                trip.push((i - 1, j - 1, v));
                if symmetry == Symmetry::Symmetric && i != j {
                    trip.push((j - 1, i - 1, v));
                }
            }
        }
    }
    let (n, _, nnz) = size.ok_or_else(|| Error::Parse("missing size line".into()))?;
    let stored = if symmetry == Symmetry::Symmetric {
        trip.iter().filter(|(i, j, _)| i >= j).count()
    } else {
        trip.len()
    };
    if stored != nnz {
        return Err(Error::Parse(format!("expected {nnz} entries, found {stored}")));
    }
    SparseMatrix::from_triplets(n, trip)
}

pub fn read_matrix_market(path: &Path) -> Result<SparseMatrix> {
    parse_matrix_market(&fs::read_to_string(path)?)
}

/// Serializes `a`; with [`Symmetry::Symmetric`] only the lower triangle is
/// written and `a` must be exactly symmetric.
pub fn format_matrix_market(a: &SparseMatrix, symmetry: Symmetry) -> Result<String> {
    if symmetry == Symmetry::Symmetric && !a.is_symmetric(0.0) {
        return Err(Error::InvalidArgument("matrix is not exactly symmetric".into()));
    }
    let entries: Vec<_> = a.iter().filter(|(i, j, _)| symmetry == Symmetry::General || i >= j).collect();
    let tag = if symmetry == Symmetry::General { "general" } else { "symmetric" };
    let mut out = String::with_capacity(32 * (entries.len() + 2));
    let _ = writeln!(out, "%%MatrixMarket matrix coordinate real {tag}");
    let _ = writeln!(out, "{} {} {}", a.n(), a.n(), entries.len());
    for (i, j, v) in entries {
        let _ = writeln!(out, "{} {} {:e}", i + 1, j + 1, v);
    }
    Ok(out)
}

pub fn write_matrix_market(path: &Path, a: &SparseMatrix, symmetry: Symmetry) -> Result<()> {
    fs::write(path, format_matrix_market(a, symmetry)?)?;
    Ok(())
}

/// One real per line; blank lines and `%`/`#` comments are skipped.
pub fn parse_vector(text: &str) -> Result<Vec<f64>> {
    let mut out = Vec::new();
    for (no, raw) in text.lines().enumerate() {
        let line = raw.trim();
        if line.is_empty() || line.starts_with('%') || line.starts_with('#') {
            continue;
        }
        for tok in line.split_whitespace() {
            out.push(tok.parse::<f64>().map_err(|e| parse_err(no + 1, format!("'{tok}': {e}")))?);
        }
    }
    Ok(out)
}

pub fn read_vector(path: &Path) -> Result<Vec<f64>> {
    parse_vector(&fs::read_to_string(path)?)
}

pub fn format_vector(v: &[f64]) -> String {
    let mut out = String::with_capacity(24 * v.len());
    for x in v {
        let _ = writeln!(out, "{x:e}");
    }
    out
}

pub fn write_vector(path: &Path, v: &[f64]) -> Result<()> {
    fs::write(path, format_vector(v))?;
    Ok(())
}
