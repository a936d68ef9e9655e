//! The reordered 3x3 compact block system.
//!
//! Field order is (m, s, f): mesh motion, structure displacement, fluid
//! velocity+pressure. The (m,f) and (s,m) blocks are structural zeros.
//! Within each field the interface unknowns occupy a contiguous index
//! range recorded in `interface_maps`; for the fluid field that range is
//! the interface velocity unknowns, which is exactly where the Schur
//! perturbation is allowed to live.

use std::ops::Range;

use crate::block::BlockMatrix3x3;
use crate::error::{dim_mismatch, Result};
use crate::sparse::SparseMatrix;

/// Interface (gamma) index ranges within each field block.
#[derive(Debug, Clone, PartialEq, Eq)]
pub struct InterfaceMaps {
    pub mesh_gamma: Range<usize>,
    pub structure_gamma: Range<usize>,
    pub fluid_velocity_gamma: Range<usize>,
}

#[derive(Debug, Clone)]
pub struct FsiBlockSystem {
    pub a_m: SparseMatrix,
    pub a_ms: SparseMatrix,
    pub a_s: SparseMatrix,
    pub a_sf: SparseMatrix,
    pub a_fm: SparseMatrix,
    pub a_fs: SparseMatrix,
    pub a_f: SparseMatrix,
    pub b_m: Vec<f64>,
    pub b_s: Vec<f64>,
    pub b_f: Vec<f64>,
    pub interface_maps: InterfaceMaps,
}

impl FsiBlockSystem {
    /// (n_m, n_s, n_f)
    pub fn dims(&self) -> (usize, usize, usize) {
        (self.a_m.nrows(), self.a_s.nrows(), self.a_f.nrows())
    }

    pub fn total_dim(&self) -> usize {
        let (m, s, f) = self.dims();
        m + s + f
    }

    pub fn validate(&self) -> Result<()> {
        let (n_m, n_s, n_f) = self.dims();
        let checks: [(&str, usize, usize, usize, usize); 7] = [
            ("A_m", self.a_m.nrows(), self.a_m.ncols(), n_m, n_m),
            ("A_ms", self.a_ms.nrows(), self.a_ms.ncols(), n_m, n_s),
            ("A_s", self.a_s.nrows(), self.a_s.ncols(), n_s, n_s),
            ("A_sf", self.a_sf.nrows(), self.a_sf.ncols(), n_s, n_f),
            ("A_fm", self.a_fm.nrows(), self.a_fm.ncols(), n_f, n_m),
            ("A_fs", self.a_fs.nrows(), self.a_fs.ncols(), n_f, n_s),
            ("A_f", self.a_f.nrows(), self.a_f.ncols(), n_f, n_f),
        ];
        for (name, r, c, er, ec) in checks {
            if (r, c) != (er, ec) {
                return Err(dim_mismatch(
                    "fsi_block_system",
                    format!("{name} is {r}x{c}, expected {er}x{ec}"),
                ));
            }
        }
        for (name, v, n) in [
            ("b_m", self.b_m.len(), n_m),
            ("b_s", self.b_s.len(), n_s),
            ("b_f", self.b_f.len(), n_f),
        ] {
            if v != n {
                return Err(dim_mismatch(
                    "fsi_block_system",
                    format!("{name} has length {v}, expected {n}"),
                ));
            }
        }
        Ok(())
    }

    pub fn rhs(&self) -> Vec<f64> {
        let mut b = Vec::with_capacity(self.total_dim());
        b.extend_from_slice(&self.b_m);
        b.extend_from_slice(&self.b_s);
        b.extend_from_slice(&self.b_f);
        b
    }

    /// Splits a monolithic vector into (m, s, f) segments.
    pub fn split<'a>(&self, x: &'a [f64]) -> (&'a [f64], &'a [f64], &'a [f64]) {
        let (n_m, n_s, _) = self.dims();
        let (m, rest) = x.split_at(n_m);
        let (s, f) = rest.split_at(n_s);
        (m, s, f)
    }

    pub fn as_block_matrix(&self) -> BlockMatrix3x3 {
        let (n_m, n_s, n_f) = self.dims();
        let mut k = BlockMatrix3x3::new([n_m, n_s, n_f], [n_m, n_s, n_f]);
        k.set(0, 0, self.a_m.clone()).expect("validated dims");
        k.set(0, 1, self.a_ms.clone()).expect("validated dims");
        k.set(1, 1, self.a_s.clone()).expect("validated dims");
        k.set(1, 2, self.a_sf.clone()).expect("validated dims");
        k.set(2, 0, self.a_fm.clone()).expect("validated dims");
        k.set(2, 1, self.a_fs.clone()).expect("validated dims");
        k.set(2, 2, self.a_f.clone()).expect("validated dims");
        k
    }

    /// Blockwise K x.
    pub fn apply(&self, x: &[f64]) -> Result<Vec<f64>> {
        if x.len() != self.total_dim() {
            return Err(dim_mismatch(
                "fsi_apply",
                format!("vector length {}, expected {}", x.len(), self.total_dim()),
            ));
        }
        let (n_m, n_s, n_f) = self.dims();
        let (xm, xs, xf) = self.split(x);
        let mut y = vec![0.0; self.total_dim()];
        {
            let ym = &mut y[0..n_m];
            self.a_m.spmv_acc(1.0, xm, ym);
            self.a_ms.spmv_acc(1.0, xs, ym);
        }
        {
            let ys = &mut y[n_m..n_m + n_s];
            self.a_s.spmv_acc(1.0, xs, ys);
            self.a_sf.spmv_acc(1.0, xf, ys);
        }
        {
            let yf = &mut y[n_m + n_s..n_m + n_s + n_f];
            self.a_fm.spmv_acc(1.0, xm, yf);
            self.a_fs.spmv_acc(1.0, xs, yf);
            self.a_f.spmv_acc(1.0, xf, yf);
        }
        Ok(y)
    }

    pub fn assemble_monolithic(&self) -> Result<SparseMatrix> {
        self.as_block_matrix().assemble_monolithic()
    }
}
