//! Matrix Market coordinate I/O.
//!
//! Reads `real general` and `real symmetric` coordinate files (symmetric
//! storage is expanded on read) and writes `general` files with 17
//! significant digits so a write/read round trip is bit-identical.

use std::fs::File;
use std::io::{BufRead, BufReader, BufWriter, Write};
use std::path::Path;

use crate::error::{Error, Result};
use crate::sparse::SparseMatrix;

fn bad(msg: impl Into<String>) -> Error {
    Error::MatrixMarket(msg.into())
}

pub fn read_matrix_market(path: impl AsRef<Path>) -> Result<SparseMatrix> {
    let file = File::open(path.as_ref())?;
    read_from(BufReader::new(file))
}

pub fn read_from(reader: impl BufRead) -> Result<SparseMatrix> {
    let mut lines = reader.lines();
    let header = lines
        .next()
        .ok_or_else(|| bad("empty file"))??
        .to_lowercase();
    let fields: Vec<&str> = header.split_whitespace().collect();
    if fields.len() < 5 || fields[0] != "%%matrixmarket" || fields[1] != "matrix" {
        return Err(bad(format!("unrecognized header: {header}")));
    }
    if fields[2] != "coordinate" {
        return Err(bad(format!("unsupported format: {}", fields[2])));
    }
    if fields[3] != "real" {
        return Err(bad(format!("unsupported field type: {}", fields[3])));
    }
    let symmetric = match fields[4] {
        "general" => false,
        "symmetric" => true,
        other => return Err(bad(format!("unsupported symmetry: {other}"))),
    };

    let mut size_line = None;
    for line in lines.by_ref() {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        size_line = Some(line);
        break;
    }
    let size_line = size_line.ok_or_else(|| bad("missing size line"))?;
    let mut it = size_line.split_whitespace();
    let nrows: usize = it
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| bad("bad size line"))?;
    let ncols: usize = it
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| bad("bad size line"))?;
    let nnz: usize = it
        .next()
        .and_then(|t| t.parse().ok())
        .ok_or_else(|| bad("bad size line"))?;

    let mut triplets = Vec::with_capacity(if symmetric { 2 * nnz } else { nnz });
    let mut seen = 0usize;
    for line in lines {
        let line = line?;
        let trimmed = line.trim();
        if trimmed.is_empty() || trimmed.starts_with('%') {
            continue;
        }
        let mut it = trimmed.split_whitespace();
        let i: usize = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| bad(format!("bad entry line: {trimmed}")))?;
        let j: usize = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| bad(format!("bad entry line: {trimmed}")))?;
        let v: f64 = it
            .next()
            .and_then(|t| t.parse().ok())
            .ok_or_else(|| bad(format!("bad entry line: {trimmed}")))?;
        if i == 0 || j == 0 || i > nrows || j > ncols {
            return Err(bad(format!(
                "index ({i},{j}) out of range for {nrows}x{ncols} matrix"
            )));
        }
        triplets.push((i - 1, j - 1, v));
        if symmetric && i != j {
            triplets.push((j - 1, i - 1, v));
        }
        seen += 1;
    }
    if seen != nnz {
        return Err(bad(format!("expected {nnz} entries, found {seen}")));
    }
    Ok(SparseMatrix::from_triplets(nrows, ncols, &triplets))
}

pub fn write_matrix_market(a: &SparseMatrix, path: impl AsRef<Path>) -> Result<()> {
    let file = File::create(path.as_ref())?;
    let mut w = BufWriter::new(file);
    write_to(a, &mut w)
}

pub fn write_to(a: &SparseMatrix, w: &mut impl Write) -> Result<()> {
    writeln!(w, "%%MatrixMarket matrix coordinate real general")?;
    writeln!(w, "{} {} {}", a.nrows(), a.ncols(), a.nnz())?;
    for (i, j, v) in a.iter() {
        // 17 significant digits round-trips every finite double exactly.
        writeln!(w, "{} {} {:.16e}", i + 1, j + 1, v)?;
    }
    Ok(())
}
