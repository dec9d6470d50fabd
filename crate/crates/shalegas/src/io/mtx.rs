//! Matrix Market coordinate format (`real general`).

use std::fmt::Write as _;
use std::path::Path;

use shalegas_core::linalg::CsrMatrix;

use crate::error::{Error, Result};

pub fn to_matrix_market(a: &CsrMatrix) -> String {
    let mut out = String::new();
    out.push_str("%%MatrixMarket matrix coordinate real general\n");
    let _ = writeln!(out, "{} {} {}", a.n_rows(), a.n_cols(), a.nnz());
    for (i, j, v) in a.iter() {
        let _ = writeln!(out, "{} {} {:e}", i + 1, j + 1, v);
    }
    out
}

pub fn parse_matrix_market(text: &str, context: &str) -> Result<CsrMatrix> {
    let fail = |message: String| Error::Format {
        context: context.to_string(),
        message,
    };
    let mut lines = text.lines();
    let header = lines.next().ok_or_else(|| fail("empty file".into()))?;
    let h: Vec<String> = header.split_whitespace().map(str::to_lowercase).collect();
    if h.len() < 5 || h[0] != "%%matrixmarket" || h[1] != "matrix" || h[2] != "coordinate" {
        return Err(fail(format!("unsupported header '{header}'")));
    }
    if h[3] != "real" && h[3] != "integer" {
        return Err(fail(format!("unsupported field '{}'", h[3])));
    }
    let symmetric = match h[4].as_str() {
        "general" => false,
        "symmetric" => true,
        other => return Err(fail(format!("unsupported symmetry '{other}'"))),
    };
    let mut body = lines.filter(|l| !l.trim_start().starts_with('%') && !l.trim().is_empty());
    let size = body.next().ok_or_else(|| fail("missing size line".into()))?;
    let dims: Vec<usize> = size
        .split_whitespace()
        .map(|t| t.parse().map_err(|_| fail(format!("bad size line '{size}'"))))
        .collect::<Result<_>>()?;
    if dims.len() != 3 {
        return Err(fail(format!("bad size line '{size}'")));
    }
    let (rows, cols, nnz) = (dims[0], dims[1], dims[2]);
    let mut trip = Vec::with_capacity(if symmetric { 2 * nnz } else { nnz });
    for line in body {
        let t: Vec<&str> = line.split_whitespace().collect();
        if t.len() != 3 {
            return Err(fail(format!("bad entry '{line}'")));
        }
        let i: usize = t[0].parse().map_err(|_| fail(format!("bad row in '{line}'")))?;
        let j: usize = t[1].parse().map_err(|_| fail(format!("bad column in '{line}'")))?;
        let v: f64 = t[2].parse().map_err(|_| fail(format!("bad value in '{line}'")))?;
        if i == 0 || j == 0 || i > rows || j > cols {
            return Err(fail(format!("entry ({i}, {j}) outside {rows} x {cols}")));
        }
        trip.push((i - 1, j - 1, v));
        if symmetric && i != j {
            trip.push((j - 1, i - 1, v));
        }
    }
    if !symmetric && trip.len() != nnz {
        return Err(fail(format!("expected {nnz} entries, found {}", trip.len())));
    }
    CsrMatrix::from_triplets(rows, cols, &trip).map_err(|e| fail(e.to_string()))
}

pub fn write_matrix_market(path: &Path, a: &CsrMatrix) -> Result<()> {
    std::fs::write(path, to_matrix_market(a)).map_err(|e| Error::io(path, e))
}

pub fn read_matrix_market(path: &Path) -> Result<CsrMatrix> {
    let text = std::fs::read_to_string(path).map_err(|e| Error::io(path, e))?;
    parse_matrix_market(&text, &path.display().to_string())
}
