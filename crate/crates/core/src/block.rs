//! Block-partitioned matrices and monolithic assembly.

use crate::error::{dim_mismatch, Result};
use crate::sparse::SparseMatrix;

/// A 3x3 grid of optional sparse blocks; absent blocks are zero.
#[derive(Debug, Clone)]
pub struct BlockMatrix3x3 {
    pub blocks: [[Option<SparseMatrix>; 3]; 3],
    pub row_dims: [usize; 3],
    pub col_dims: [usize; 3],
}

impl BlockMatrix3x3 {
    pub fn new(row_dims: [usize; 3], col_dims: [usize; 3]) -> Self {
        Self {
            blocks: Default::default(),
            row_dims,
            col_dims,
        }
    }

    pub fn set(&mut self, i: usize, j: usize, block: SparseMatrix) -> Result<()> {
        if block.nrows() != self.row_dims[i] || block.ncols() != self.col_dims[j] {
            return Err(dim_mismatch(
                "block_set",
                format!(
                    "block ({i},{j}) is {}x{}, expected {}x{}",
                    block.nrows(),
                    block.ncols(),
                    self.row_dims[i],
                    self.col_dims[j]
                ),
            ));
        }
        self.blocks[i][j] = Some(block);
        Ok(())
    }

    pub fn total_rows(&self) -> usize {
        self.row_dims.iter().sum()
    }

    pub fn total_cols(&self) -> usize {
        self.col_dims.iter().sum()
    }

    /// Blockwise y = K x on the concatenated vector layout.
    pub fn spmv(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.total_cols() {
            return Err(dim_mismatch(
                "block_spmv",
                format!("vector has length {}, expected {}", x.len(), self.total_cols()),
            ));
        }
        let row_starts = prefix(&self.row_dims);
        let col_starts = prefix(&self.col_dims);
        let mut y = vec![0.0; self.total_rows()];
        for i in 0..3 {
            for j in 0..3 {
                if let Some(b) = &self.blocks[i][j] {
                    let xs = &x[col_starts[j]..col_starts[j] + self.col_dims[j]];
                    let ys = &mut y[row_starts[i]..row_starts[i] + self.row_dims[i]];
                    b.spmv_acc(1.0, xs, ys);
                }
            }
        }
        Ok(y)
    }

    /// Flattens the grid into one CSR matrix, fields placed contiguously.
    pub fn assemble_monolithic(&self) -> Result<SparseMatrix> {
        let grid: Vec<Vec<Option<&SparseMatrix>>> = (0..3)
            .map(|i| (0..3).map(|j| self.blocks[i][j].as_ref()).collect())
            .collect();
        assemble_block_grid(&grid, &self.row_dims, &self.col_dims)
    }
}

fn prefix(dims: &[usize]) -> Vec<usize> {
    let mut p = vec![0; dims.len()];
    for i in 1..dims.len() {
        p[i] = p[i - 1] + dims[i - 1];
    }
    p
}

/// Assembles an arbitrary grid of optional blocks into one CSR matrix.
pub fn assemble_block_grid(
    blocks: &[Vec<Option<&SparseMatrix>>],
    row_dims: &[usize],
    col_dims: &[usize],
) -> Result<SparseMatrix> {
    for (i, row) in blocks.iter().enumerate() {
        for (j, b) in row.iter().enumerate() {
            if let Some(b) = b {
                if b.nrows() != row_dims[i] || b.ncols() != col_dims[j] {
                    return Err(dim_mismatch(
                        "assemble_monolithic",
                        format!(
                            "block ({i},{j}) is {}x{}, expected {}x{}",
                            b.nrows(),
                            b.ncols(),
                            row_dims[i],
                            col_dims[j]
                        ),
                    ));
                }
            }
        }
    }
    let row_starts = prefix(row_dims);
    let col_starts = prefix(col_dims);
    let nrows: usize = row_dims.iter().sum();
    let ncols: usize = col_dims.iter().sum();

    let mut offsets = vec![0usize; nrows + 1];
    let mut nnz = 0usize;
    for (bi, row) in blocks.iter().enumerate() {
        for local in 0..row_dims[bi] {
            for b in row.iter().flatten() {
                let (cols, _) = b.row(local);
                nnz += cols.len();
            }
            offsets[row_starts[bi] + local + 1] = nnz;
        }
    }
    let mut cols = Vec::with_capacity(nnz);
    let mut vals = Vec::with_capacity(nnz);
    for (bi, row) in blocks.iter().enumerate() {
        for local in 0..row_dims[bi] {
            for (bj, b) in row.iter().enumerate() {
                if let Some(b) = b {
                    let (bc, bv) = b.row(local);
                    for (&c, &v) in bc.iter().zip(bv) {
                        cols.push(col_starts[bj] + c);
                        vals.push(v);
                    }
                }
            }
        }
    }
    SparseMatrix::from_csr(nrows, ncols, offsets, cols, vals)
}
