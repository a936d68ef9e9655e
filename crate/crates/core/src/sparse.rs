//! Compressed-sparse-row matrices and the kernels built on them.
//!
//! `SparseMatrix` is the carrier for every block of the coupled system.
//! Rows store strictly increasing column indices with no duplicates;
//! explicit zeros produced by cancellation are kept so that downstream
//! pattern-based factorizations (ILU(0)) see reproducible patterns.

use crate::error::{dim_mismatch, Error, Result};

#[derive(Debug, Clone, PartialEq)]
pub struct SparseMatrix {
    nrows: usize,
    ncols: usize,
    row_offsets: Vec<usize>,
    col_indices: Vec<usize>,
    values: Vec<f64>,
}

impl SparseMatrix {
    /// Builds a matrix from raw CSR arrays, validating the invariants.
    pub fn from_csr(
        nrows: usize,
        ncols: usize,
        row_offsets: Vec<usize>,
        col_indices: Vec<usize>,
        values: Vec<f64>,
    ) -> Result<Self> {
        if row_offsets.len() != nrows + 1 {
            return Err(Error::InvalidStructure(format!(
                "row_offsets has length {}, expected {}",
                row_offsets.len(),
                nrows + 1
            )));
        }
        if row_offsets[0] != 0 || row_offsets[nrows] != col_indices.len() {
            return Err(Error::InvalidStructure(
                "row_offsets must start at 0 and end at nnz".into(),
            ));
        }
        if col_indices.len() != values.len() {
            return Err(Error::InvalidStructure(
                "col_indices and values differ in length".into(),
            ));
        }
        for i in 0..nrows {
            if row_offsets[i] > row_offsets[i + 1] {
                return Err(Error::InvalidStructure(format!(
                    "row_offsets decreases at row {i}"
                )));
            }
            let row = &col_indices[row_offsets[i]..row_offsets[i + 1]];
            for w in row.windows(2) {
                if w[0] >= w[1] {
                    return Err(Error::InvalidStructure(format!(
                        "row {i}: column indices not strictly increasing"
                    )));
                }
            }
            if let Some(&last) = row.last() {
                if last >= ncols {
                    return Err(Error::InvalidStructure(format!(
                        "row {i}: column index {last} out of range (ncols = {ncols})"
                    )));
                }
            }
        }
        Ok(Self {
            nrows,
            ncols,
            row_offsets,
            col_indices,
            values,
        })
    }

    /// Builds a matrix from (row, col, value) triplets; duplicates are summed.
    pub fn from_triplets(nrows: usize, ncols: usize, triplets: &[(usize, usize, f64)]) -> Self {
        let mut counts = vec![0usize; nrows + 1];
        for &(r, c, _) in triplets {
            assert!(r < nrows && c < ncols, "triplet ({r},{c}) out of range");
            counts[r + 1] += 1;
        }
        for i in 0..nrows {
            counts[i + 1] += counts[i];
        }
        let mut cols = vec![0usize; triplets.len()];
        let mut vals = vec![0.0; triplets.len()];
        let mut cursor = counts.clone();
        for &(r, c, v) in triplets {
            let p = cursor[r];
            cols[p] = c;
            vals[p] = v;
            cursor[r] += 1;
        }
        // Sort each row and merge duplicates in place.
        let mut out_offsets = vec![0usize; nrows + 1];
        let mut out_cols = Vec::with_capacity(triplets.len());
        let mut out_vals = Vec::with_capacity(triplets.len());
        let mut row_buf: Vec<(usize, f64)> = Vec::new();
        for r in 0..nrows {
            row_buf.clear();
            for p in counts[r]..counts[r + 1] {
                row_buf.push((cols[p], vals[p]));
            }
            row_buf.sort_by_key(|&(c, _)| c);
            let mut k = 0;
            while k < row_buf.len() {
                let c = row_buf[k].0;
                let mut v = row_buf[k].1;
                k += 1;
                while k < row_buf.len() && row_buf[k].0 == c {
                    v += row_buf[k].1;
                    k += 1;
                }
                out_cols.push(c);
                out_vals.push(v);
            }
            out_offsets[r + 1] = out_cols.len();
        }
        Self {
            nrows,
            ncols,
            row_offsets: out_offsets,
            col_indices: out_cols,
            values: out_vals,
        }
    }

    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            row_offsets: vec![0; nrows + 1],
            col_indices: Vec::new(),
            values: Vec::new(),
        }
    }

    pub fn identity(n: usize) -> Self {
        Self {
            nrows: n,
            ncols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: vec![1.0; n],
        }
    }

    pub fn from_diag(d: &[f64]) -> Self {
        let n = d.len();
        Self {
            nrows: n,
            ncols: n,
            row_offsets: (0..=n).collect(),
            col_indices: (0..n).collect(),
            values: d.to_vec(),
        }
    }

    /// Dense row-major constructor, mostly for tests; zero entries are dropped.
    pub fn from_dense_rows(rows: &[Vec<f64>]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        let mut triplets = Vec::new();
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), ncols, "ragged dense input");
            for (j, &v) in row.iter().enumerate() {
                if v != 0.0 {
                    triplets.push((i, j, v));
                }
            }
        }
        Self::from_triplets(nrows, ncols, &triplets)
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn nnz(&self) -> usize {
        self.col_indices.len()
    }

    pub fn is_square(&self) -> bool {
        self.nrows == self.ncols
    }

    pub fn row_offsets(&self) -> &[usize] {
        &self.row_offsets
    }

    pub fn col_indices(&self) -> &[usize] {
        &self.col_indices
    }

    pub fn values(&self) -> &[f64] {
        &self.values
    }

    pub fn values_mut(&mut self) -> &mut [f64] {
        &mut self.values
    }

    /// Column indices and values of row `i`.
    pub fn row(&self, i: usize) -> (&[usize], &[f64]) {
        let lo = self.row_offsets[i];
        let hi = self.row_offsets[i + 1];
        (&self.col_indices[lo..hi], &self.values[lo..hi])
    }

    /// Stored value at (i, j), or 0 when the entry is not stored.
    pub fn get(&self, i: usize, j: usize) -> f64 {
        let (cols, vals) = self.row(i);
        match cols.binary_search(&j) {
            Ok(p) => vals[p],
            Err(_) => 0.0,
        }
    }

    pub fn iter(&self) -> impl Iterator<Item = (usize, usize, f64)> + '_ {
        (0..self.nrows).flat_map(move |i| {
            let (cols, vals) = self.row(i);
            cols.iter().zip(vals).map(move |(&c, &v)| (i, c, v))
        })
    }

    pub fn transpose(&self) -> SparseMatrix {
        let mut counts = vec![0usize; self.ncols + 1];
        for &c in &self.col_indices {
            counts[c + 1] += 1;
        }
        for i in 0..self.ncols {
            counts[i + 1] += counts[i];
        }
        let mut cols = vec![0usize; self.nnz()];
        let mut vals = vec![0.0; self.nnz()];
        let mut cursor = counts.clone();
        for i in 0..self.nrows {
            let (rc, rv) = self.row(i);
            for (&c, &v) in rc.iter().zip(rv) {
                let p = cursor[c];
                cols[p] = i;
                vals[p] = v;
                cursor[c] += 1;
            }
        }
        SparseMatrix {
            nrows: self.ncols,
            ncols: self.nrows,
            row_offsets: counts,
            col_indices: cols,
            values: vals,
        }
    }

    /// y = A x.
    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.ncols {
            return Err(dim_mismatch(
                "spmv",
                format!("A is {}x{}, x has length {}", self.nrows, self.ncols, x.len()),
            ));
        }
        let mut y = vec![0.0; self.nrows];
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            let mut acc = 0.0;
            for (&c, &v) in cols.iter().zip(vals) {
                acc += v * x[c];
            }
            y[i] = acc;
        }
        Ok(y)
    }

    /// y += alpha * A x, without allocating.
    pub fn spmv_acc(&self, alpha: f64, x: &[f64], y: &mut [f64]) {
        assert_eq!(x.len(), self.ncols);
        assert_eq!(y.len(), self.nrows);
        for i in 0..self.nrows {
            let (cols, vals) = self.row(i);
            let mut acc = 0.0;
            for (&c, &v) in cols.iter().zip(vals) {
                acc += v * x[c];
            }
            y[i] += alpha * acc;
        }
    }

    /// C = A B via a row-wise sparse accumulator (dense scratch over ncols).
    ///
    /// Entries that cancel to zero are kept; call [`SparseMatrix::prune`] to
    /// drop them explicitly.
    pub fn spgemm(&self, other: &SparseMatrix) -> Result<SparseMatrix> {
        if self.ncols != other.nrows {
            return Err(dim_mismatch(
                "spgemm",
                format!(
                    "A is {}x{}, B is {}x{}",
                    self.nrows, self.ncols, other.nrows, other.ncols
                ),
            ));
        }
        let n_out_cols = other.ncols;
        let mut scratch = vec![0.0; n_out_cols];
        let mut touched: Vec<usize> = Vec::new();
        let mut mark = vec![usize::MAX; n_out_cols];

        let mut offsets = vec![0usize; self.nrows + 1];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for i in 0..self.nrows {
            touched.clear();
            let (arc, arv) = self.row(i);
            for (&k, &av) in arc.iter().zip(arv) {
                let (brc, brv) = other.row(k);
                for (&j, &bv) in brc.iter().zip(brv) {
                    if mark[j] != i {
                        mark[j] = i;
                        scratch[j] = 0.0;
                        touched.push(j);
                    }
                    scratch[j] += av * bv;
                }
            }
            touched.sort_unstable();
            for &j in &touched {
                cols.push(j);
                vals.push(scratch[j]);
            }
            offsets[i + 1] = cols.len();
        }
        Ok(SparseMatrix {
            nrows: self.nrows,
            ncols: n_out_cols,
            row_offsets: offsets,
            col_indices: cols,
            values: vals,
        })
    }

    /// alpha*A + beta*B with merged sparsity pattern.
    pub fn axpby(alpha: f64, a: &SparseMatrix, beta: f64, b: &SparseMatrix) -> Result<SparseMatrix> {
        if a.nrows != b.nrows || a.ncols != b.ncols {
            return Err(dim_mismatch(
                "sp_axpby",
                format!(
                    "A is {}x{}, B is {}x{}",
                    a.nrows, a.ncols, b.nrows, b.ncols
                ),
            ));
        }
        let mut offsets = vec![0usize; a.nrows + 1];
        let mut cols = Vec::with_capacity(a.nnz().max(b.nnz()));
        let mut vals = Vec::with_capacity(a.nnz().max(b.nnz()));
        for i in 0..a.nrows {
            let (ac, av) = a.row(i);
            let (bc, bv) = b.row(i);
            let (mut p, mut q) = (0, 0);
            while p < ac.len() || q < bc.len() {
                let ca = ac.get(p).copied().unwrap_or(usize::MAX);
                let cb = bc.get(q).copied().unwrap_or(usize::MAX);
                if ca < cb {
                    cols.push(ca);
                    vals.push(alpha * av[p]);
                    p += 1;
                } else if cb < ca {
                    cols.push(cb);
                    vals.push(beta * bv[q]);
                    q += 1;
                } else {
                    cols.push(ca);
                    vals.push(alpha * av[p] + beta * bv[q]);
                    p += 1;
                    q += 1;
                }
            }
            offsets[i + 1] = cols.len();
        }
        Ok(SparseMatrix {
            nrows: a.nrows,
            ncols: a.ncols,
            row_offsets: offsets,
            col_indices: cols,
            values: vals,
        })
    }

    /// d with d_i = 1/A_ii; fails on a missing or zero diagonal entry.
    pub fn diag_inverse(&self) -> Result<Vec<f64>> {
        if !self.is_square() {
            return Err(dim_mismatch(
                "diag_inverse",
                format!("matrix is {}x{}", self.nrows, self.ncols),
            ));
        }
        let mut d = vec![0.0; self.nrows];
        for i in 0..self.nrows {
            let v = {
                let (cols, vals) = self.row(i);
                match cols.binary_search(&i) {
                    Ok(p) => vals[p],
                    Err(_) => return Err(Error::MissingDiagonal { row: i }),
                }
            };
            if v == 0.0 {
                return Err(Error::ZeroDiagonal { row: i });
            }
            d[i] = 1.0 / v;
        }
        Ok(d)
    }

    /// Diagonal entries, zero where absent.
    pub fn diag(&self) -> Vec<f64> {
        let n = self.nrows.min(self.ncols);
        let mut d = vec![0.0; n];
        for (i, item) in d.iter_mut().enumerate() {
            *item = self.get(i, i);
        }
        d
    }

    /// A' with entry (i,j) = A_ij * d_j; the pattern is unchanged.
    pub fn scale_cols(&self, d: &[f64]) -> Result<SparseMatrix> {
        if d.len() != self.ncols {
            return Err(dim_mismatch(
                "scale_cols",
                format!("A has {} columns, d has length {}", self.ncols, d.len()),
            ));
        }
        let mut out = self.clone();
        for p in 0..out.values.len() {
            out.values[p] *= d[out.col_indices[p]];
        }
        Ok(out)
    }

    /// s * A on the same pattern.
    pub fn scaled(&self, s: f64) -> SparseMatrix {
        let mut out = self.clone();
        for v in out.values.iter_mut() {
            *v *= s;
        }
        out
    }

    /// A' with entry (i,j) = d_i * A_ij; the pattern is unchanged.
    pub fn scale_rows(&self, d: &[f64]) -> Result<SparseMatrix> {
        if d.len() != self.nrows {
            return Err(dim_mismatch(
                "scale_rows",
                format!("A has {} rows, d has length {}", self.nrows, d.len()),
            ));
        }
        let mut out = self.clone();
        for i in 0..out.nrows {
            let (lo, hi) = (out.row_offsets[i], out.row_offsets[i + 1]);
            for v in &mut out.values[lo..hi] {
                *v *= d[i];
            }
        }
        Ok(out)
    }

    /// Drops stored entries with |value| <= eps.
    pub fn prune(&self, eps: f64) -> SparseMatrix {
        let mut offsets = vec![0usize; self.nrows + 1];
        let mut cols = Vec::new();
        let mut vals = Vec::new();
        for i in 0..self.nrows {
            let (rc, rv) = self.row(i);
            for (&c, &v) in rc.iter().zip(rv) {
                if v.abs() > eps {
                    cols.push(c);
                    vals.push(v);
                }
            }
            offsets[i + 1] = cols.len();
        }
        SparseMatrix {
            nrows: self.nrows,
            ncols: self.ncols,
            row_offsets: offsets,
            col_indices: cols,
            values: vals,
        }
    }

    /// Frobenius norm of the stored values.
    pub fn frobenius_norm(&self) -> f64 {
        self.values.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    /// Columns that carry at least one stored nonzero value.
    pub fn nonzero_columns(&self) -> Vec<usize> {
        let mut seen = vec![false; self.ncols];
        for (&c, &v) in self.col_indices.iter().zip(&self.values) {
            if v != 0.0 {
                seen[c] = true;
            }
        }
        seen.iter()
            .enumerate()
            .filter_map(|(c, &s)| s.then_some(c))
            .collect()
    }
}

/// Euclidean norm.
pub fn norm2(v: &[f64]) -> f64 {
    v.iter().map(|x| x * x).sum::<f64>().sqrt()
}

pub fn dot(a: &[f64], b: &[f64]) -> f64 {
    debug_assert_eq!(a.len(), b.len());
    a.iter().zip(b).map(|(x, y)| x * y).sum()
}
