//! Dense row-major matrices, LU with partial pivoting, and helpers.
//!
//! This is the oracle path: exact Schur-complement references, coarse-level
//! AMG solves, and the dense comparisons in tests all run through here.
//! Everything densifies, so callers keep sizes in the low thousands.

use crate::error::{dim_mismatch, Error, Result};
use crate::sparse::SparseMatrix;

#[derive(Debug, Clone)]
pub struct DenseMatrix {
    nrows: usize,
    ncols: usize,
    data: Vec<f64>,
}

impl DenseMatrix {
    pub fn zeros(nrows: usize, ncols: usize) -> Self {
        Self {
            nrows,
            ncols,
            data: vec![0.0; nrows * ncols],
        }
    }

    pub fn identity(n: usize) -> Self {
        let mut m = Self::zeros(n, n);
        for i in 0..n {
            m[(i, i)] = 1.0;
        }
        m
    }

    pub fn from_diag(d: &[f64]) -> Self {
        let mut m = Self::zeros(d.len(), d.len());
        for (i, &v) in d.iter().enumerate() {
            m[(i, i)] = v;
        }
        m
    }

    pub fn from_sparse(a: &SparseMatrix) -> Self {
        let mut m = Self::zeros(a.nrows(), a.ncols());
        for (i, j, v) in a.iter() {
            m[(i, j)] += v;
        }
        m
    }

    pub fn from_rows(rows: &[Vec<f64>]) -> Self {
        let nrows = rows.len();
        let ncols = rows.first().map_or(0, |r| r.len());
        let mut m = Self::zeros(nrows, ncols);
        for (i, row) in rows.iter().enumerate() {
            assert_eq!(row.len(), ncols);
            m.data[i * ncols..(i + 1) * ncols].copy_from_slice(row);
        }
        m
    }

    pub fn nrows(&self) -> usize {
        self.nrows
    }

    pub fn ncols(&self) -> usize {
        self.ncols
    }

    pub fn row(&self, i: usize) -> &[f64] {
        &self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn row_mut(&mut self, i: usize) -> &mut [f64] {
        &mut self.data[i * self.ncols..(i + 1) * self.ncols]
    }

    pub fn matvec(&self, x: &[f64]) -> Vec<f64> {
        assert_eq!(x.len(), self.ncols);
        let mut y = vec![0.0; self.nrows];
        for i in 0..self.nrows {
            let row = self.row(i);
            let mut acc = 0.0;
            for (a, b) in row.iter().zip(x) {
                acc += a * b;
            }
            y[i] = acc;
        }
        y
    }

    /// C = self * other, ikj loop so the inner updates stream over rows.
    pub fn matmul(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!(self.ncols, other.nrows, "matmul dimension mismatch");
        let mut c = DenseMatrix::zeros(self.nrows, other.ncols);
        for i in 0..self.nrows {
            let arow = self.row(i);
            for (k, &aik) in arow.iter().enumerate() {
                if aik == 0.0 {
                    continue;
                }
                let brow = other.row(k);
                let crow = c.row_mut(i);
                for (cv, bv) in crow.iter_mut().zip(brow) {
                    *cv += aik * bv;
                }
            }
        }
        c
    }

    pub fn add(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a += b;
        }
        out
    }

    pub fn sub(&self, other: &DenseMatrix) -> DenseMatrix {
        assert_eq!((self.nrows, self.ncols), (other.nrows, other.ncols));
        let mut out = self.clone();
        for (a, b) in out.data.iter_mut().zip(&other.data) {
            *a -= b;
        }
        out
    }

    pub fn scale(&self, s: f64) -> DenseMatrix {
        let mut out = self.clone();
        for a in out.data.iter_mut() {
            *a *= s;
        }
        out
    }

    pub fn transpose(&self) -> DenseMatrix {
        let mut t = DenseMatrix::zeros(self.ncols, self.nrows);
        for i in 0..self.nrows {
            for j in 0..self.ncols {
                t[(j, i)] = self[(i, j)];
            }
        }
        t
    }

    pub fn frobenius_norm(&self) -> f64 {
        self.data.iter().map(|v| v * v).sum::<f64>().sqrt()
    }

    pub fn lu(&self) -> Result<LuFactors> {
        LuFactors::factor(self.clone())
    }

    /// Dense inverse via LU; oracle use only.
    pub fn inverse(&self) -> Result<DenseMatrix> {
        let lu = self.lu()?;
        let n = self.nrows;
        let mut inv = DenseMatrix::zeros(n, n);
        let mut e = vec![0.0; n];
        for j in 0..n {
            e[j] = 1.0;
            let col = lu.solve(&e)?;
            for i in 0..n {
                inv[(i, j)] = col[i];
            }
            e[j] = 0.0;
        }
        Ok(inv)
    }
}

impl std::ops::Index<(usize, usize)> for DenseMatrix {
    type Output = f64;
    fn index(&self, (i, j): (usize, usize)) -> &f64 {
        &self.data[i * self.ncols + j]
    }
}

impl std::ops::IndexMut<(usize, usize)> for DenseMatrix {
    fn index_mut(&mut self, (i, j): (usize, usize)) -> &mut f64 {
        &mut self.data[i * self.ncols + j]
    }
}

/// LU factorization with partial pivoting, stored packed (unit lower / upper).
#[derive(Debug, Clone)]
pub struct LuFactors {
    lu: DenseMatrix,
    perm: Vec<usize>,
}

impl LuFactors {
    fn factor(mut a: DenseMatrix) -> Result<Self> {
        assert_eq!(a.nrows, a.ncols, "LU requires a square matrix");
        let n = a.nrows;
        let mut perm: Vec<usize> = (0..n).collect();
        for k in 0..n {
            let mut piv = k;
            let mut best = a[(k, k)].abs();
            for i in (k + 1)..n {
                let v = a[(i, k)].abs();
                if v > best {
                    best = v;
                    piv = i;
                }
            }
            if best == 0.0 {
                return Err(Error::SingularMatrix { col: k });
            }
            if piv != k {
                perm.swap(k, piv);
                let (lo, hi) = (k.min(piv), k.max(piv));
                let (top, bottom) = a.data.split_at_mut(hi * n);
                top[lo * n..lo * n + n].swap_with_slice(&mut bottom[..n]);
            }
            let pivot = a[(k, k)];
            for i in (k + 1)..n {
                let l = a[(i, k)] / pivot;
                a[(i, k)] = l;
                if l == 0.0 {
                    continue;
                }
                let (up, low) = a.data.split_at_mut(i * n);
                let urow = &up[k * n + k + 1..k * n + n];
                let irow = &mut low[k + 1..n];
                for (x, u) in irow.iter_mut().zip(urow) {
                    *x -= l * u;
                }
            }
        }
        Ok(Self { lu: a, perm })
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let n = self.lu.nrows;
        if b.len() != n {
            return Err(dim_mismatch(
                "lu_solve",
                format!("matrix is {}x{}, rhs has length {}", n, n, b.len()),
            ));
        }
        let mut x: Vec<f64> = self.perm.iter().map(|&p| b[p]).collect();
        // Ly = Pb
        for i in 1..n {
            let row = self.lu.row(i);
            let mut acc = x[i];
            for (j, item) in x.iter().enumerate().take(i) {
                acc -= row[j] * item;
            }
            x[i] = acc;
        }
        // Ux = y
        for i in (0..n).rev() {
            let row = self.lu.row(i);
            let mut acc = x[i];
            for (j, item) in x.iter().enumerate().skip(i + 1) {
                acc -= row[j] * item;
            }
            x[i] = acc / row[i];
        }
        Ok(x)
    }

    /// Solves for every column of a dense right-hand-side matrix.
    pub fn solve_matrix(&self, b: &DenseMatrix) -> Result<DenseMatrix> {
        let mut out = DenseMatrix::zeros(b.nrows(), b.ncols());
        let mut col = vec![0.0; b.nrows()];
        for j in 0..b.ncols() {
            for i in 0..b.nrows() {
                col[i] = b[(i, j)];
            }
            let x = self.solve(&col)?;
            for i in 0..b.nrows() {
                out[(i, j)] = x[i];
            }
        }
        Ok(out)
    }
}

/// Densifies A and solves Ax = b with partial pivoting.
pub fn dense_lu_solve(a: &SparseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    if !a.is_square() {
        return Err(dim_mismatch(
            "dense_lu_solve",
            format!("matrix is {}x{}", a.nrows(), a.ncols()),
        ));
    }
    DenseMatrix::from_sparse(a).lu()?.solve(b)
}

/// LU of R A C for diagonal equilibration scalings R, C.
///
/// Physical units spread the row magnitudes of the coupled systems over
/// many orders; plain LU is backward stable but its forward error scales
/// with that artificial conditioning. Equilibrating first recovers
/// oracle-grade solutions.
#[derive(Debug, Clone)]
pub struct EquilibratedLu {
    lu: LuFactors,
    row_scale: Vec<f64>,
    col_scale: Vec<f64>,
}

impl EquilibratedLu {
    pub fn factor(a: &DenseMatrix) -> Result<Self> {
        assert_eq!(a.nrows(), a.ncols());
        let n = a.nrows();
        let mut row_scale = vec![1.0; n];
        for i in 0..n {
            let m = a.row(i).iter().fold(0.0f64, |acc, v| acc.max(v.abs()));
            if m > 0.0 {
                row_scale[i] = 1.0 / m;
            }
        }
        let mut col_scale = vec![0.0f64; n];
        for i in 0..n {
            for (j, v) in a.row(i).iter().enumerate() {
                col_scale[j] = col_scale[j].max((v * row_scale[i]).abs());
            }
        }
        for c in col_scale.iter_mut() {
            *c = if *c > 0.0 { 1.0 / *c } else { 1.0 };
        }
        let mut scaled = a.clone();
        for i in 0..n {
            let r = row_scale[i];
            for (j, v) in scaled.row_mut(i).iter_mut().enumerate() {
                *v *= r * col_scale[j];
            }
        }
        Ok(Self {
            lu: scaled.lu()?,
            row_scale,
            col_scale,
        })
    }

    pub fn solve(&self, b: &[f64]) -> Result<Vec<f64>> {
        let scaled_b: Vec<f64> = b.iter().zip(&self.row_scale).map(|(v, r)| v * r).collect();
        let y = self.lu.solve(&scaled_b)?;
        Ok(y.iter().zip(&self.col_scale).map(|(v, c)| v * c).collect())
    }
}

/// Equilibrated dense solve with one step of iterative refinement.
pub fn dense_solve_robust(a: &SparseMatrix, b: &[f64]) -> Result<Vec<f64>> {
    if !a.is_square() {
        return Err(dim_mismatch(
            "dense_solve_robust",
            format!("matrix is {}x{}", a.nrows(), a.ncols()),
        ));
    }
    let lu = EquilibratedLu::factor(&DenseMatrix::from_sparse(a))?;
    let mut x = lu.solve(b)?;
    for _ in 0..2 {
        let ax = a.spmv(&x)?;
        let resid: Vec<f64> = b.iter().zip(&ax).map(|(u, v)| u - v).collect();
        let dx = lu.solve(&resid)?;
        for (xi, di) in x.iter_mut().zip(&dx) {
            *xi += di;
        }
    }
    Ok(x)
}
